"""Scenario files: flat INI with [timing], [sim], [policy], [qos] sections.

Every key is optional; omitted keys fall back to the library defaults,
so a file may override just the pieces it cares about. See FORMATS.md
for the full key reference.
"""

import configparser

from .abtmac import AbtmacParams, QosClass
from .errors import ValidationError
from .legacy import DcfParams
from .sim import (Abtmac, FixedPayload, FixedWindow, GeometricPayload,
                  LegacyDcf, PoissonTraffic, SATURATED, SimConfig)
from .timing import AccessMode, TimingParams, DEFAULT_TIMING

_TIMING_FIELDS = ("channel_rate", "slot", "sifs", "difs", "phy_preamble_bits",
                  "phy_header_bits", "mac_header_bits", "ack_bits", "rts_bits",
                  "cts_bits")


def read_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    loaded = cp.read(path)
    if not loaded:
        raise ValidationError(f"cannot read config file {path}")
    return cp


def timing_from_config(cp) -> TimingParams:
    if not cp.has_section("timing"):
        return DEFAULT_TIMING
    section = cp["timing"]
    for key in section:
        if key not in _TIMING_FIELDS:
            raise ValidationError(f"unknown [timing] key {key!r}")
    kwargs = {}
    for name in _TIMING_FIELDS:
        if name in section:
            raw = section.getfloat(name)
            kwargs[name] = int(raw) if name.endswith("_bits") else raw
    return TimingParams(**kwargs).validate()


def _policy_from_config(cp):
    if not cp.has_section("policy"):
        return LegacyDcf()
    section = cp["policy"]
    kind = section.get("kind", "legacy")
    if kind == "legacy":
        return LegacyDcf(DcfParams(
            cw_min=section.getint("cw_min", 32),
            cw_max=section.getint("cw_max", 1024),
            retry_limit=section.getint("retry_limit", 7)))
    if kind == "abtmac":
        params = AbtmacParams(
            target_rate=section.getfloat("target_rate", 0.55),
            k_const=section.getfloat("k", 1.0),
            k_prime=section.getfloat("k_prime", 1.0),
            cw_max=section.getint("cw_max", 1024),
            retry_limit=section.getint("retry_limit", 7))
        return Abtmac(params,
                      m_source=section.get("m_source", "oracle"),
                      update_interval=section.getint("update_interval", 1000))
    if kind == "fixed":
        if "cw_min" not in section:
            raise ValidationError("[policy] kind=fixed needs a cw_min key")
        return FixedWindow(
            cw_min=section.getint("cw_min"),
            cw_max=section.getint("cw_max", 1024),
            retry_limit=section.getint("retry_limit", 7))
    raise ValidationError(f"unknown policy kind {kind!r}")


def scenario_from_config(cp) -> SimConfig:
    if not cp.has_section("sim"):
        raise ValidationError("scenario file needs a [sim] section")
    section = cp["sim"]
    mode_name = section.get("mode", "basic")
    try:
        mode = AccessMode(mode_name)
    except ValueError:
        raise ValidationError(f"unknown access mode {mode_name!r}") from None

    model = section.get("payload_model", "fixed")
    slots = section.getfloat("payload", 34.0)
    if model == "fixed":
        payload = FixedPayload(slots)
    elif model == "geometric":
        payload = GeometricPayload(slots)
    else:
        raise ValidationError(f"unknown payload_model {model!r}")

    arrival = section.getfloat("arrival_rate", 0.0)
    traffic = PoissonTraffic(arrival) if arrival > 0 else SATURATED

    if "stations" not in section:
        raise ValidationError("[sim] needs a stations key")
    return SimConfig(
        station_count=section.getint("stations"),
        mode=mode,
        policy=_policy_from_config(cp),
        payload=payload,
        traffic=traffic,
        duration=section.getint("duration", 1_000_000),
        seed=section.getint("seed", 1),
        estimation_error_factor=section.getfloat("estimation_error_factor", 1.0),
        timing=timing_from_config(cp),
    ).validate()


def qos_from_config(cp) -> list:
    """[qos] keys `class.<id> = <count> <scale>` in file order."""
    if not cp.has_section("qos"):
        return []
    classes = []
    for key, value in cp["qos"].items():
        if not key.startswith("class."):
            raise ValidationError(f"unknown [qos] key {key!r}")
        parts = value.split()
        if len(parts) != 2:
            raise ValidationError(f"[qos] {key} needs '<count> <scale>', got {value!r}")
        classes.append(QosClass(class_id=key[len("class."):],
                                station_count=int(parts[0]),
                                backoff_scale=float(parts[1])))
    return classes


def load_scenario(path) -> SimConfig:
    return scenario_from_config(read_config(path))
