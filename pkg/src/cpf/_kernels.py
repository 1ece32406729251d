"""Hot Monte Carlo and recursion loops.

Every kernel has a numba ``@njit`` version and a pure-numpy version. Both
consume the same pre-drawn uniforms, so for a given seed they return
identical results. Set ``CPF_DISABLE_NUMBA=1`` to force the numpy path.
"""
import numpy as np

from ._config import numba_disabled

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False


# ---------------------------------------------------------------------------
# CN receiver protocol
#
# Uniform layout per trial (row of length m + 1):
#   u[0]        -> true hypothesis h = floor(u[0] * m)
#   u[1 + n]    -> t-POVM outcome on subsystem n (n = 0 .. m-2)
#   u[m]        -> b-POVM outcome on the target subsystem
# ---------------------------------------------------------------------------

def _cn_protocol_numpy(u, m, zeta1, zeta2):
    trials = u.shape[0]
    truth = np.minimum((u[:, 0] * m).astype(np.int64), m - 1)
    decision = np.full(trials, m - 1, dtype=np.int64)
    active = np.ones(trials, dtype=bool)
    target_missed = u[:, m] < zeta2
    for n in range(m - 1):
        # t-POVM never errs on the target state
        says_target = active & ((truth == n) | (u[:, 1 + n] < zeta1))
        # b-POVM on S_{n+1..m}: only the target can click 'T'
        found_later = says_target & (truth > n) & ~target_missed
        decision[says_target] = n
        decision[found_later] = truth[found_later]
        active &= ~says_target
    return int(np.count_nonzero(decision != truth))


def _cn_protocol_loop(u, m, zeta1, zeta2):
    errors = 0
    for i in range(u.shape[0]):
        h = int(u[i, 0] * m)
        if h > m - 1:
            h = m - 1
        decision = m - 1
        for n in range(m - 1):
            if n == h or u[i, 1 + n] < zeta1:
                decision = n
                if h > n and not (u[i, m] < zeta2):
                    decision = h
                break
        if decision != h:
            errors += 1
    return errors


# ---------------------------------------------------------------------------
# Direct-detection (max-count) decision with uniform tie-breaking.
# counts: (trials, m) integer array; truth: (trials,) index; u: (trials,) uniforms.
# ---------------------------------------------------------------------------

def _max_count_errors_numpy(counts, truth, u):
    best = counts.max(axis=1, keepdims=True)
    is_best = counts == best
    n_ties = is_best.sum(axis=1)
    pick = np.minimum((u * n_ties).astype(np.int64), n_ties - 1)
    # index of the pick-th maximal entry in each row
    rank = np.cumsum(is_best, axis=1) - 1
    chosen = np.argmax(is_best & (rank == pick[:, None]), axis=1)
    return int(np.count_nonzero(chosen != truth))


def _max_count_errors_loop(counts, truth, u):
    errors = 0
    trials, m = counts.shape
    for i in range(trials):
        best = counts[i, 0]
        n_ties = 1
        for k in range(1, m):
            c = counts[i, k]
            if c > best:
                best = c
                n_ties = 1
            elif c == best:
                n_ties += 1
        pick = int(u[i] * n_ties)
        if pick > n_ties - 1:
            pick = n_ties - 1
        seen = 0
        chosen = 0
        for k in range(m):
            if counts[i, k] == best:
                if seen == pick:
                    chosen = k
                    break
                seen += 1
        if chosen != truth[i]:
            errors += 1
    return errors


# ---------------------------------------------------------------------------
# P_k = (k-1)/k [(1 - z1) P_{k-1} + z1 z2], P_1 = 0, for k = 1..m_max.
# ---------------------------------------------------------------------------

def _cn_recursion_numpy(m_max, zeta1, zeta2):
    out = np.zeros(m_max)
    p = 0.0
    q = 1.0 - zeta1
    c = zeta1 * zeta2
    for k in range(2, m_max + 1):
        p = (k - 1) / k * (q * p + c)
        out[k - 1] = p
    return out


_cn_recursion_loop = _cn_recursion_numpy

if NUMBA_AVAILABLE:
    _cn_protocol_numba = njit(cache=True)(_cn_protocol_loop)
    _max_count_errors_numba = njit(cache=True)(_max_count_errors_loop)
    _cn_recursion_numba = njit(cache=True)(_cn_recursion_loop)


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    if NUMBA_AVAILABLE and not numba_disabled():
        return "numba"
    return "numpy"


def cn_protocol_errors(u, m, zeta1, zeta2, use_numba=None):
    """Count CN-receiver errors over the rows of the uniform block ``u``."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    if use_numba is None:
        use_numba = backend() == "numba"
    if use_numba:
        return int(_cn_protocol_numba(u, int(m), float(zeta1), float(zeta2)))
    return _cn_protocol_numpy(u, int(m), float(zeta1), float(zeta2))


def max_count_errors(counts, truth, u, use_numba=None):
    """Count max-count decoding errors with uniform tie-breaking."""
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    truth = np.ascontiguousarray(truth, dtype=np.int64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if use_numba is None:
        use_numba = backend() == "numba"
    if use_numba:
        return int(_max_count_errors_numba(counts, truth, u))
    return _max_count_errors_numpy(counts, truth, u)


def cn_recursion_table(m_max, zeta1, zeta2, use_numba=None):
    """Array whose entry ``k-1`` is the recursive CN error for ``k`` subsystems."""
    if use_numba is None:
        use_numba = backend() == "numba"
    if use_numba:
        return _cn_recursion_numba(int(m_max), float(zeta1), float(zeta2))
    return _cn_recursion_numpy(int(m_max), float(zeta1), float(zeta2))
