import numpy as np
import pytest

from irsdsm.channel import ChannelSet, SystemConfig, gen_channel_set, gen_rayleigh

# (label, passed, detail) for each acceptance criterion, printed at the end
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(label: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0].split()[0][2:])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")


def random_channels(rng, K=4, L=4, N=8, rician=False):
    """Generic complex channels; Rician ones use a 10 dB factor."""
    if rician:
        return gen_channel_set(SystemConfig(K=K, L=L, N=N, rician_beta=10.0), rng)
    return ChannelSet(gen_rayleigh(L, K, rng), gen_rayleigh(L, N, rng), gen_rayleigh(N, K, rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
