import pytest

from penningcool.trap import TrapConfig, compute_frequencies


@pytest.fixture(scope="session")
def ref_trap():
    """Reference trap pinned by the measured nu_c = 729 kHz, nu_z = 265 kHz."""
    return TrapConfig.from_frequencies_hz(729e3, 265e3)


@pytest.fixture(scope="session")
def ref_freqs(ref_trap):
    return compute_frequencies(ref_trap)
