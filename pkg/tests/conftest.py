import warnings
from fractions import Fraction

import pytest

from unishear.system import preset_alpha, preset_parabolic, preset_wavelet
from unishear.transform import build_digital_system

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


_cache = {}


def system(preset="parabolic", N=64, J=None, eta=None):
    """Cached digital system; ``eta`` is pixels per unit length."""
    key = (preset, N, J, eta)
    if key not in _cache:
        J_ = J if J is not None else {32: 3, 64: 3, 128: 4, 256: 4, 512: 5}[N]
        seq = {"parabolic": preset_parabolic, "wavelet": preset_wavelet}.get(preset)
        seq = seq(J_) if seq else preset_alpha(preset, J_)
        sp = None if eta is None else Fraction(eta, N)
        _cache[key] = build_digital_system(seq, N, J_, sp)
    return _cache[key]


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield
