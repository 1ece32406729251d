"""m-ary discrimination of geometrically uniform ensembles.

Pure-state Helstrom limit, fidelity bounds, the conditional-nulling (CN)
receiver and the baseline receiver without feed-forward. Every probability
has a ``log_`` twin returning the natural log so that results survive
exponents far beyond double-precision range.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._config import TOL


def _check_m(m, minimum=1):
    if int(m) != m or m < minimum:
        raise ValueError(f"m must be an integer >= {minimum}, got {m!r}")
    return int(m)


def _check_prob(name, x):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def _log(x):
    return math.log(x) if x > 0 else -math.inf


def _exp(x):
    return math.exp(x) if x > -745.2 else 0.0


class ResultKind(str, enum.Enum):
    EXACT = "exact"
    UPPER_BOUND = "upper_bound"
    LOWER_BOUND = "lower_bound"
    ASYMPTOTIC = "asymptotic"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class ErrorPair:
    """Type-I (``zeta1``) and type-II (``zeta2``) error probabilities.

    The log fields are authoritative when the linear values underflow.
    """

    zeta1: float
    zeta2: float
    log_zeta1: float = None
    log_zeta2: float = None

    def __post_init__(self):
        _check_prob("zeta1", self.zeta1)
        _check_prob("zeta2", self.zeta2)
        if self.log_zeta1 is None:
            object.__setattr__(self, "log_zeta1", _log(self.zeta1))
        if self.log_zeta2 is None:
            object.__setattr__(self, "log_zeta2", _log(self.zeta2))
        if self.log_zeta1 > 0 or self.log_zeta2 > 0:
            raise ValueError("log error probabilities must be <= 0")

    @classmethod
    def from_logs(cls, log_zeta1, log_zeta2):
        log_zeta1, log_zeta2 = min(float(log_zeta1), 0.0), min(float(log_zeta2), 0.0)
        return cls(_exp(log_zeta1), _exp(log_zeta2), log_zeta1, log_zeta2)


@dataclass(frozen=True)
class DiscriminationResult:
    value: float
    kind: ResultKind
    log_value: float = None
    clamped: bool = False
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", ResultKind(self.kind))
        _check_prob("value", self.value)
        if self.log_value is None:
            object.__setattr__(self, "log_value", _log(self.value))

    @classmethod
    def from_log(cls, log_value, kind, **detail):
        """Build a result from an unclamped log value, clamping at 1."""
        clamped = log_value > 0
        log_value = min(float(log_value), 0.0)
        return cls(_exp(log_value), kind, log_value, clamped, dict(detail))


# ---------------------------------------------------------------------------
# pure-state Helstrom limit
# ---------------------------------------------------------------------------

def helstrom_gus_pure(m, zeta):
    """Helstrom limit for ``m`` GUS pure states with pairwise overlap ``zeta``."""
    m = _check_m(m, 2)
    _check_prob("zeta", zeta)
    # (m-1)/m^2 [sqrt(1+(m-1)z) - sqrt(1-z)]^2 without the subtraction
    s = math.sqrt(1.0 + (m - 1) * zeta) + math.sqrt(1.0 - zeta)
    return (m - 1) * zeta * zeta / (s * s)


def log_helstrom_gus_pure(m, log_zeta):
    m = _check_m(m, 2)
    if log_zeta == -math.inf:
        return -math.inf
    zeta = _exp(log_zeta)
    s = math.sqrt(1.0 + (m - 1) * zeta) + math.sqrt(1.0 - zeta)
    return math.log(m - 1) + 2.0 * log_zeta - 2.0 * math.log(s)


def helstrom_gus_pure_asymptotic(m, zeta):
    return 0.25 * (m - 1) * zeta * zeta


def log_helstrom_gus_pure_asymptotic(m, log_zeta):
    return math.log(0.25 * (m - 1)) + 2.0 * log_zeta


# ---------------------------------------------------------------------------
# fidelity bounds; F is the fidelity between two hypotheses, which for CPF
# equals the squared fidelity between target and background outputs
# ---------------------------------------------------------------------------

def barnum_ub(m, F):
    _check_prob("F", F)
    return min(1.0, (m - 1) * F)


def log_barnum_ub(m, log_F, clamp=True):
    val = math.log(m - 1) + log_F
    return min(val, 0.0) if clamp else val


def fidelity_lb(m, F):
    _check_prob("F", F)
    return (m - 1) / (2.0 * m) * F * F


def log_fidelity_lb(m, log_F):
    return math.log((m - 1) / (2.0 * m)) + 2.0 * log_F


# ---------------------------------------------------------------------------
# CN receiver
# ---------------------------------------------------------------------------

def _cn_series(m, z1):
    """``sum_{j>=2} C(m,j) (-z1)^(j-2)`` for small ``m * z1``."""
    term = m * (m - 1) / 2.0
    total = term
    j = 2
    while j < m:
        term *= -z1 * (m - j) / (j + 1)
        total += term
        j += 1
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def _log_cn_core(m, log_z1):
    """``ln[(m z1 + (1-z1)^m - 1) / z1]``."""
    z1 = _exp(log_z1)
    if m * z1 < TOL.cn_series_threshold:
        return log_z1 + math.log(_cn_series(m, z1))
    if z1 == 1.0:
        return math.log(m - 1.0)
    return math.log(m * z1 + math.expm1(m * math.log1p(-z1))) - log_z1


def log_cn_error(m, e):
    """Natural log of :func:`cn_error`."""
    m = _check_m(m)
    if m == 1 or e.log_zeta1 == -math.inf or e.log_zeta2 == -math.inf:
        return -math.inf
    return e.log_zeta2 - math.log(m) + _log_cn_core(m, e.log_zeta1)


def cn_error(m, e):
    """Error probability of the CN receiver.

    ``(zeta2 / (m zeta1)) (m zeta1 + (1 - zeta1)^m - 1)``, evaluated through a
    convergent series when ``m zeta1`` is small.
    """
    return _exp(log_cn_error(m, e))


def cn_error_recursive(m, e):
    """Same quantity from ``P_k = (k-1)/k [(1-z1) P_{k-1} + z1 z2]``, ``P_1 = 0``."""
    m = _check_m(m)
    if m == 1:
        return 0.0
    return float(_kernels.cn_recursion_table(m, e.zeta1, e.zeta2)[m - 1])


def cn_asymptotic(m, e):
    return 0.5 * (m - 1) * e.zeta1 * e.zeta2


def log_cn_asymptotic(m, e):
    if m == 1:
        return -math.inf
    return math.log(0.5 * (m - 1)) + e.log_zeta1 + e.log_zeta2


def no_feedforward(m, zeta2):
    """Receiver that tests subsystems one by one, guessing the last on no click."""
    m = _check_m(m)
    _check_prob("zeta2", zeta2)
    return (m - 1) * zeta2 / m


def log_no_feedforward(m, log_zeta2):
    m = _check_m(m)
    if m == 1:
        return -math.inf
    return math.log((m - 1) / m) + log_zeta2


def _mc_chunk_rows(m):
    # bounded memory per chunk; depends only on m so results are backend independent
    return max(1, min(100_000, 4_000_000 // (m + 1)))


def cn_monte_carlo(m, e, trials, seed, use_numba=None):
    """Simulate the CN measurement sequence and return the empirical error rate.

    The hypothesis is drawn uniformly; each visited subsystem gets the
    t-POVM (false positive ``zeta1`` on background, exact on target) and on a
    target click the b-POVM on the remaining block (false negative ``zeta2``,
    exact on background). Uniforms come from PCG64 substreams spawned per
    chunk from ``seed``.
    """
    m = _check_m(m)
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if m == 1:
        return DiscriminationResult(0.0, ResultKind.MONTE_CARLO, detail={
            "trials": trials, "errors": 0, "stderr": 1.0 / trials, "seed": seed,
            "algorithm": "PCG64", "backend": _kernels.backend()})
    rows = _mc_chunk_rows(m)
    n_chunks = -(-trials // rows)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    errors = 0
    remaining = trials
    for ss in streams:
        k = min(rows, remaining)
        u = np.random.Generator(np.random.PCG64(ss)).random((k, m + 1))
        errors += _kernels.cn_protocol_errors(u, m, e.zeta1, e.zeta2, use_numba)
        remaining -= k
    p = errors / trials
    stderr = math.sqrt(p * (1.0 - p) / trials)
    if stderr == 0.0:
        # all-or-nothing outcome: report the one-trial resolution instead of 0
        stderr = 1.0 / trials
    backend = _kernels.backend() if use_numba is None else ("numba" if use_numba else "numpy")
    return DiscriminationResult(p, ResultKind.MONTE_CARLO, detail={
        "trials": trials, "errors": errors, "stderr": stderr, "seed": seed,
        "algorithm": "PCG64", "backend": backend})


# ---------------------------------------------------------------------------
# classical benchmark for phase-insensitive Gaussian channels
# ---------------------------------------------------------------------------

def passive_signature_factor(E_B, E_T):
    """``c = [1 + (sqrt(E_B (1+E_T)) - sqrt(E_T (1+E_B)))^2]^-1``."""
    d = math.sqrt(E_B * (1.0 + E_T)) - math.sqrt(E_T * (1.0 + E_B))
    return 1.0 / (1.0 + d * d)


def log_gaussian_classical_lb(m, M, N_S, target, background):
    """Log of the fidelity lower bound optimized over classical (coherent) sources."""
    m = _check_m(m, 2)
    mu_b, mu_t, e_b, e_t = background.mu, target.mu, background.E, target.E
    c = passive_signature_factor(e_b, e_t)
    d = math.sqrt(mu_b) - math.sqrt(mu_t)
    return (math.log((m - 1) / (2.0 * m)) + 2 * M * math.log(c)
            - 2.0 * M * N_S * d * d / (1.0 + e_b + e_t))


def gaussian_classical_lb(m, M, N_S, target, background):
    return _exp(log_gaussian_classical_lb(m, M, N_S, target, background))
