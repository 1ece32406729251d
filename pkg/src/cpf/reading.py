"""Position-based quantum reading of a block of ``m`` memory cells.

One cell (the target, reflectivity ``r_T``) differs from the others
(background, ``r_B``). Each cell is probed by ``M`` modes of ``N_S`` mean
photons, either coherent (classical reading) or the signal arms of
two-mode squeezed vacua (quantum reading).

Every probability ``f(p)`` has a twin ``log_f(p)`` giving its natural log.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from . import discrimination as d
from .channels import apply_to_gaussian, reading_channels
from .gaussian import log_fidelity_two_mode, tmsv_state


class UnsupportedRegimeError(ValueError):
    pass


@dataclass(frozen=True)
class ReadingParams:
    m: int
    M: float
    N_S: float
    r_B: float
    r_T: float
    N_B: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("m must be an integer >= 2")
        if self.M < 0:
            raise ValueError("M must be non-negative")
        if self.N_S < 0:
            raise ValueError("N_S must be non-negative")
        # validates reflectivities and N_B
        reading_channels(self.r_B, self.r_T, self.N_B)

    @property
    def degenerate(self):
        return self.r_B == self.r_T

    @property
    def guess(self):
        return (self.m - 1) / self.m


def _require_pure_loss(p, what):
    if p.N_B > 0:
        raise UnsupportedRegimeError(f"{what} is only defined for N_B = 0")


def _dsqrt2(p):
    return (math.sqrt(p.r_B) - math.sqrt(p.r_T)) ** 2


# ---------------------------------------------------------------------------
# classical reading
# ---------------------------------------------------------------------------

def log_overlap_classical(p):
    _require_pure_loss(p, "the classical overlap")
    return -p.M * p.N_S * _dsqrt2(p)


def overlap_classical(p):
    """``|<sqrt(r_B) a|sqrt(r_T) a>|^2`` with ``|a|^2 = M N_S``."""
    return math.exp(log_overlap_classical(p))


def log_classical_helstrom(p):
    return d.log_helstrom_gus_pure(p.m, log_overlap_classical(p))


def classical_helstrom(p):
    return d._exp(log_classical_helstrom(p))


def log_classical_helstrom_asymptotic(p):
    return math.log(0.25 * (p.m - 1)) - 2.0 * p.M * p.N_S * _dsqrt2(p)


def classical_helstrom_asymptotic(p):
    return d._exp(log_classical_helstrom_asymptotic(p))


def log_classical_lb(p):
    """Best classical lower bound; thermal noise enters as ``2 N_B + 1``."""
    return (math.log((p.m - 1) / (2.0 * p.m))
            - 2.0 * p.M * _dsqrt2(p) * p.N_S / (2.0 * p.N_B + 1.0))


def classical_lb(p):
    return d._exp(log_classical_lb(p))


# ---------------------------------------------------------------------------
# entangled probe: fidelity upper bound
# ---------------------------------------------------------------------------

def return_idler_states(p):
    """(target, background) return-idler states of a single TMSV probe."""
    target, background = reading_channels(p.r_B, p.r_T, p.N_B)
    probe = tmsv_state(p.N_S)
    return apply_to_gaussian(target, probe, 0), apply_to_gaussian(background, probe, 0)


def log_quantum_ub(p, clamp=True):
    st, sb = return_idler_states(p)
    val = math.log(p.m - 1) + p.M * log_fidelity_two_mode(st, sb)
    return min(val, 0.0) if clamp else val


def quantum_ub(p):
    return d._exp(log_quantum_ub(p))


def quantum_ub_result(p):
    return d.DiscriminationResult.from_log(log_quantum_ub(p, clamp=False), "upper_bound")


def log_quantum_ub_asymptotic(p):
    """Small-``N_S`` form; ``H = (1+N_B-r_B)(1+N_B-r_T)``."""
    nb = p.N_B
    h = (1.0 + nb - p.r_B) * (1.0 + nb - p.r_T)
    expo = 2.0 * p.M * p.N_S * (1.0 + nb - math.sqrt(h) - math.sqrt(p.r_B * p.r_T)) / (1.0 + nb)
    return math.log(p.m - 1) - expo


def quantum_ub_asymptotic(p):
    return d._exp(min(0.0, log_quantum_ub_asymptotic(p)))


def noisy_exponent_ratio(p):
    """Exponent of the noisy entangled upper bound over that of the classical bound."""
    if p.N_B <= 0:
        raise ValueError("noisy_exponent_ratio needs N_B > 0")
    if p.degenerate:
        raise ValueError("exponent ratio is undefined for r_B == r_T")
    nb = p.N_B
    h = (1.0 + nb - p.r_B) * (1.0 + nb - p.r_T)
    e_qr = 2.0 * (1.0 + nb - math.sqrt(h) - math.sqrt(p.r_B * p.r_T)) / (1.0 + nb)
    e_cr = 2.0 * _dsqrt2(p) / (2.0 * nb + 1.0)
    return e_qr / e_cr


# ---------------------------------------------------------------------------
# CN receiver built from two-mode squeezing and photon counting
# ---------------------------------------------------------------------------

def squeeze_strength(r, N_S):
    """Two-mode squeezing that returns the signal arm of the ``r``-loss TMSV to vacuum."""
    if not 0.0 <= r <= 1.0 or N_S < 0:
        raise ValueError("need 0 <= r <= 1 and N_S >= 0")
    a, b = math.sqrt(N_S + 1.0), math.sqrt(r * N_S)
    return 0.5 * math.log((a - b) / (a + b))


def residual_thermal(N_S, r_a, r_b):
    """Signal photons left after nulling with squeezer tuned to ``r_a`` a state made by ``r_b``.

    Not symmetric: the first reflectivity sets the squeezer, the second the state.
    """
    return N_S * (N_S + 1.0) * (math.sqrt(r_a) - math.sqrt(r_b)) ** 2 / (1.0 + N_S * (1.0 - r_a))


def cn_error_pair(p):
    """Type-I/II errors of the t- and b-POVMs (squeeze, then count signal photons)."""
    _require_pure_loss(p, "the CN receiver")
    lz2 = -p.M * math.log1p(residual_thermal(p.N_S, p.r_B, p.r_T))
    lz1 = -p.M * math.log1p(residual_thermal(p.N_S, p.r_T, p.r_B))
    return d.ErrorPair.from_logs(lz1, lz2)


def log_cn_reading_error(p):
    return d.log_cn_error(p.m, cn_error_pair(p))


def cn_reading_error(p):
    return d._exp(log_cn_reading_error(p))


def log_cn_reading_asymptotic_low_signal(p):
    """Twice the small-overlap classical Helstrom value."""
    return math.log(2.0) + log_classical_helstrom_asymptotic(p)


def log_cn_reading_asymptotic_high_reflectivity(p):
    """Regime ``N_S (sqrt(r_B) - sqrt(r_T))^2 << 1`` with reflectivities near one."""
    expo = p.M * (p.N_S + 1.0) * _dsqrt2(p) * (1.0 / (1.0 - p.r_T) + 1.0 / (1.0 - p.r_B))
    return math.log(0.5 * (p.m - 1)) - expo


def _log_star_zeta(N_S, r, M):
    return -2.0 * M * math.log1p(N_S * (1.0 - math.sqrt(r)))


def cn_star_error_pair(p):
    """Errors when the nulled state of the unit-reflectivity cell is vacuum on both arms."""
    _require_pure_loss(p, "the improved CN receiver")
    if p.r_B != 1.0 and p.r_T != 1.0:
        raise UnsupportedRegimeError("the improved CN receiver needs r_B = 1 or r_T = 1")
    base = cn_error_pair(p)
    if p.degenerate:
        return base
    if p.r_B == 1.0:
        return d.ErrorPair.from_logs(base.log_zeta1, _log_star_zeta(p.N_S, p.r_T, p.M))
    return d.ErrorPair.from_logs(_log_star_zeta(p.N_S, p.r_B, p.M), base.log_zeta2)


def log_cn_star_error(p):
    return d.log_cn_error(p.m, cn_star_error_pair(p))


def cn_star_error(p):
    return d._exp(log_cn_star_error(p))


def log_cn_star_asymptotic(p):
    """Low-signal form: classical Helstrom times ``2 exp(-M N_S (1 - r))``."""
    r = p.r_T if p.r_B == 1.0 else p.r_B
    return log_classical_helstrom(p) + math.log(2.0) - p.M * p.N_S * (1.0 - r)


class BinaryReadingErrors(NamedTuple):
    cn: float
    cn_star: Optional[float]
    log_cn: float
    log_cn_star: Optional[float]


def binary_reading_errors(p):
    """Equal-prior binary reading (``r_B > r_T``) with the b-POVM.

    Errors occur only when the lower-reflectivity state yields no clicks.
    With ``r_B = 1`` the idlers are counted too.
    """
    _require_pure_loss(p, "binary reading")
    if not p.r_B > p.r_T:
        raise ValueError("binary reading assumes r_B > r_T")
    lcn = cn_error_pair(p).log_zeta2 - math.log(2.0)
    if p.r_B == 1.0:
        lstar = cn_star_error_pair(p).log_zeta2 - math.log(2.0)
        return BinaryReadingErrors(d._exp(lcn), d._exp(lstar), lcn, lstar)
    return BinaryReadingErrors(d._exp(lcn), None, lcn, None)
