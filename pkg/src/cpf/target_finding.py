"""Target finding over ``m`` sectors in a bright thermal background.

A sector holding the target returns a fraction ``eta`` of the probe plus
``N_B`` thermal photons; empty sectors return thermal light only. Classical
coherent probing with direct detection is compared against entangled
probing with a sum-frequency-generation (SFG) CN receiver.
"""
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import discrimination as d
from ._config import TOL, resolve_precision_bits
from .channels import apply_to_gaussian, target_finding_channels
from .gaussian import GaussianState, log_fidelity_two_mode, tmsv_state, two_mode_squeezer


class PrecisionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TargetFindingParams:
    m: int
    M: float
    N_S: float
    eta: float
    N_B: float
    precision_bits: int = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("m must be an integer >= 2")
        if self.M < 0 or self.N_S < 0:
            raise ValueError("M and N_S must be non-negative")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")
        if self.N_B < 0:
            raise ValueError("N_B must be non-negative")
        object.__setattr__(self, "precision_bits", resolve_precision_bits(self.precision_bits))

    @property
    def v(self):
        return self.N_B / (self.N_B + 1.0)

    @property
    def signal(self):
        """Mean returned signal photons per sector, ``eta M N_S``."""
        return self.eta * self.M * self.N_S


# ---------------------------------------------------------------------------
# classical light
# ---------------------------------------------------------------------------

def log_ctf_lb(p):
    return math.log((p.m - 1) / (2.0 * p.m)) - 2.0 * p.signal / (2.0 * p.N_B + 1.0)


def ctf_lb(p):
    return d._exp(log_ctf_lb(p))


def _dd_sum(ctx, m, nb, eta, M, N_S):
    nb = ctx.mpf(nb)
    v = nb / (nb + 1)
    x = ctx.mpf(eta) * ctx.mpf(M) * ctx.mpf(N_S)
    total = ctx.mpf(0)
    for k in range(2, m + 1):
        vk = v ** k
        expo = -(1 - v) * (1 - v ** (k - 1)) * x / (1 - vk)
        term = ctx.mpf(math.comb(m, k)) * ctx.exp(expo)
        total += term if k % 2 == 0 else -term
    return total / m


def _dd_mp(p):
    bits = p.precision_bits
    lo = mpmath.MPContext()
    lo.prec = bits
    hi = mpmath.MPContext()
    hi.prec = 2 * bits
    a = _dd_sum(lo, p.m, p.N_B, p.eta, p.M, p.N_S)
    b = _dd_sum(hi, p.m, p.N_B, p.eta, p.M, p.N_S)
    if b <= 0 or abs(a - b) > TOL.dd_self_check_rtol * abs(b):
        raise PrecisionError(
            f"alternating sum unresolved at {bits} bits; raise precision_bits "
            "(or CPF_PRECISION_BITS)")
    guess = hi.mpf(p.m - 1) / p.m
    if b > guess * (1 + hi.mpf(2) ** (-(bits // 2))):
        raise PrecisionError("alternating sum exceeded the guessing probability")
    return lo, a


def log_dd_error(p):
    """Natural log of :func:`dd_error`."""
    ctx, val = _dd_mp(p)
    return min(float(ctx.log(val)), math.log((p.m - 1) / p.m))


def dd_error(p):
    """Direct-detection (max-count) error for coherent probing.

    The alternating binomial sum is evaluated at ``precision_bits`` and
    checked against twice that precision.
    """
    return d._exp(log_dd_error(p))


def log_dd_error_asymptotic(p):
    """High-noise large-``M`` form ``(m-1)/(2m) exp(-eta M N_S / (2 N_B))``."""
    return math.log((p.m - 1) / (2.0 * p.m)) - p.signal / (2.0 * p.N_B)


def dd_error_asymptotic(p):
    return d._exp(log_dd_error_asymptotic(p))


def log_dd_error_leading_term(p):
    """The ``k = 2`` term of the sum, ``(m-1)/2 exp(-eta M N_S / (2 N_B + 1))``.

    This is the large-``M`` limit of :func:`dd_error` for any ``N_B``.
    """
    return math.log((p.m - 1) / 2.0) - p.signal / (2.0 * p.N_B + 1.0)


def dd_error_leading_term(p):
    return d._exp(min(0.0, log_dd_error_leading_term(p)))


# ---------------------------------------------------------------------------
# entangled light
# ---------------------------------------------------------------------------

def return_idler_states(p, small_signal=True):
    """(target, background) return-idler states of one TMSV probe.

    With ``small_signal`` the target return keeps only the ``2 N_B + 1``
    signal variance, dropping the ``2 eta N_S`` reflected-photon term.
    Otherwise the exact thermal-loss output is used.
    """
    target, background = target_finding_channels(p.eta, p.N_B)
    probe = tmsv_state(p.N_S)
    st = apply_to_gaussian(target, probe, 0)
    sb = apply_to_gaussian(background, probe, 0)
    if small_signal:
        cov = st.cov.copy()
        cov[:2, :2] = (2.0 * p.N_B + 1.0) * np.eye(2)
        st = GaussianState(st.mean, cov)
    return st, sb


def log_qtf_ub(p, clamp=True, small_signal=True):
    st, sb = return_idler_states(p, small_signal)
    val = math.log(p.m - 1) + p.M * log_fidelity_two_mode(st, sb)
    return min(val, 0.0) if clamp else val


def qtf_ub(p, small_signal=True):
    return d._exp(log_qtf_ub(p, small_signal=small_signal))


def qtf_ub_result(p, small_signal=True):
    return d.DiscriminationResult.from_log(
        log_qtf_ub(p, clamp=False, small_signal=small_signal), "upper_bound")


def log_qtf_ub_asymptotic(p):
    return math.log(p.m - 1) - p.signal / (1.0 + p.N_B)


def qtf_ub_asymptotic(p):
    return d._exp(min(0.0, log_qtf_ub_asymptotic(p)))


def sfg_regime(p):
    """Whether ``N_S << 1`` and ``N_B >> 1`` hold (order of magnitude)."""
    return p.N_S <= 0.1 and p.N_B >= 10.0


def sfg_error_pair(p):
    """Both SFG errors equal the vacuum probability of a coherent state
    with ``eta M N_S (N_S + 1) / N_B`` photons."""
    if p.N_B <= 0:
        raise ValueError("the SFG receiver model needs N_B > 0")
    lz = -p.signal * (p.N_S + 1.0) / p.N_B
    return d.ErrorPair.from_logs(lz, lz)


def sfg_nulling_angle(p):
    """Squeezing magnitude that removes signal-idler correlations of the target return."""
    c = math.sqrt(p.eta * p.N_S * (p.N_S + 1.0))
    return -0.5 * math.atan(-2.0 * c / (1.0 + p.N_S + p.N_B))


def sfg_nulling_residual(p, small_signal=True):
    """Relative cross-correlation left after squeezing the target return.

    The squeezer here is ``two_mode_squeezer(-r)`` with ``r`` from
    :func:`sfg_nulling_angle`; positive arguments of ``two_mode_squeezer``
    add correlations rather than remove them.
    """
    st, _ = return_idler_states(p, small_signal)
    before = np.abs(st.cov[:2, 2:]).max()
    if before == 0:
        return 0.0
    s = two_mode_squeezer(-sfg_nulling_angle(p)).matrix
    after = np.abs((s @ st.cov @ s.T)[:2, 2:]).max()
    return float(after / before)


def log_qtf_cn_error(p):
    return d.log_cn_error(p.m, sfg_error_pair(p))


def qtf_cn_error(p):
    return d._exp(log_qtf_cn_error(p))


def qtf_cn_result(p):
    return d.DiscriminationResult.from_log(
        log_qtf_cn_error(p), "exact", sfg_regime=sfg_regime(p))


def log_qtf_cn_asymptotic(p):
    return math.log(0.5 * (p.m - 1)) - 2.0 * p.signal / p.N_B


def qtf_cn_asymptotic(p):
    return d._exp(min(0.0, log_qtf_cn_asymptotic(p)))
