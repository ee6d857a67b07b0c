"""Shared simulation fixtures.

The long saturated runs cost about a second each, and the unit and
acceptance suites probe different facets of the same standard
scenarios, so each heavy scenario runs exactly once per session here.
All of them pin their seeds; the asserted values are frozen outputs
of those (config, seed) pairs.
"""

import pytest

from maclab.abtmac import AbtmacParams
from maclab.sim import (Abtmac, LegacyDcf, SimConfig, run, run_replicated,
                        sensitivity_suite)
from maclab.timing import AccessMode

RTS_TUNED = AbtmacParams(0.7)
BASIC_TUNED = AbtmacParams(0.55)
LONG = 1_000_000


def saturated(m, mode, policy, seed, duration=LONG, **kw):
    return SimConfig(station_count=m, mode=mode, policy=policy,
                     duration=duration, seed=seed, **kw)


@pytest.fixture(scope="session")
def tuned_rts_sweep():
    """Tuned handshake mode across populations, common seed."""
    return {m: run(saturated(m, AccessMode.RTS_CTS, Abtmac(RTS_TUNED), 31))
            for m in (10, 50, 100)}


@pytest.fixture(scope="session")
def tuned_basic_sweep():
    return {m: run(saturated(m, AccessMode.BASIC, Abtmac(BASIC_TUNED), 31))
            for m in (10, 50, 100)}


@pytest.fixture(scope="session")
def legacy_rts_sweep():
    return {m: run(saturated(m, AccessMode.RTS_CTS, LegacyDcf(), 31))
            for m in (10, 50, 100)}


@pytest.fixture(scope="session")
def legacy_basic_sweep():
    return {m: run(saturated(m, AccessMode.BASIC, LegacyDcf(), 31))
            for m in (10, 50, 100)}


@pytest.fixture(scope="session")
def airtime_tuned_rts():
    """Slot-utilization scenarios: tuned handshake populations."""
    return {m: run(saturated(m, AccessMode.RTS_CTS, Abtmac(RTS_TUNED), 21))
            for m in (20, 60, 100)}


@pytest.fixture(scope="session")
def airtime_legacy_basic_100():
    return run(saturated(100, AccessMode.BASIC, LegacyDcf(), 21))


@pytest.fixture(scope="session")
def tuned_rts20_replicated():
    cfg = saturated(20, AccessMode.RTS_CTS, Abtmac(RTS_TUNED), 11)
    return run_replicated(cfg, 5)


@pytest.fixture(scope="session")
def tuned_basic20_replicated():
    cfg = saturated(20, AccessMode.BASIC, Abtmac(BASIC_TUNED), 11)
    return run_replicated(cfg, 5)


@pytest.fixture(scope="session")
def sensitivity_basic_rows():
    base = saturated(100, AccessMode.BASIC, Abtmac(BASIC_TUNED), 41)
    return sensitivity_suite(base, m_estimates=(0.5, 1.0, 1.5),
                             payloads=(34.0, 102.0, 410.0, 820.0))


@pytest.fixture(scope="session")
def sensitivity_rts_rows():
    base = saturated(100, AccessMode.RTS_CTS, Abtmac(RTS_TUNED), 41)
    return sensitivity_suite(base, m_estimates=(0.5, 1.0, 1.5))
