"""Centralized tolerances and environment switches."""
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    symmetric_rtol: float = 1e-12
    uncertainty_eig: float = -1e-9
    symplectic_atol: float = 1e-10
    isotropic_atol: float = 1e-9
    fock_hermitian_atol: float = 1e-12
    fock_psd_eig: float = -1e-10
    fock_max_leakage: float = 1e-8
    # fidelity denominators below this are treated as orthogonal states
    fidelity_denominator_floor: float = 1e-300
    # |det V - 1| below this marks a two-mode state as pure
    purity_atol: float = 1e-10
    # switch from direct CN formula to series when m * zeta1 is below this
    cn_series_threshold: float = 0.1
    dd_self_check_rtol: float = 1e-12


TOL = Tolerances()

DEFAULT_PRECISION_BITS = 256


def resolve_precision_bits(bits=None):
    """Explicit ``bits`` wins, then ``CPF_PRECISION_BITS``, then the default."""
    if bits is not None:
        return int(bits)
    env = os.environ.get("CPF_PRECISION_BITS")
    if env:
        return int(env)
    return DEFAULT_PRECISION_BITS


def numba_disabled():
    return os.environ.get("CPF_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
