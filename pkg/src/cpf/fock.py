"""Truncated Fock-space oracle.

States are kept in factored form ``rho = X X^dag`` so that the Uhlmann
fidelity reduces to the trace norm of ``X^dag Y`` and pure-loss channels
act column-wise through their Kraus operators. Everything here is brute
force and independent of the covariance-matrix formulas it checks.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import _kernels
from ._config import TOL
from . import gaussian as g
from .channels import PhaseInsensitiveChannel, apply_to_gaussian


class TruncationError(ValueError):
    pass


def default_cutoff(total_mean_photons):
    return int(math.ceil(10.0 * (1.0 + total_mean_photons)))


@dataclass(frozen=True, eq=False)
class FockState:
    """``n_modes``-mode state with photon numbers ``0..cutoff`` per mode."""

    cutoff: int
    n_modes: int
    factor: np.ndarray

    @property
    def dim(self):
        return (self.cutoff + 1) ** self.n_modes

    @property
    def density(self):
        return self.factor @ self.factor.conj().T

    @property
    def trace(self):
        return float(np.sum(np.abs(self.factor) ** 2))

    @property
    def leakage(self):
        return max(0.0, 1.0 - self.trace)

    def purity(self):
        gram = self.factor.conj().T @ self.factor
        return float(np.sum(np.abs(gram) ** 2))

    def require_small_leakage(self, tol=None):
        tol = TOL.fock_max_leakage if tol is None else tol
        if self.leakage >= tol:
            raise TruncationError(
                f"leakage {self.leakage:.3e} at cutoff {self.cutoff}; increase the cutoff")
        return self

    @classmethod
    def from_density(cls, rho, cutoff, n_modes):
        """Factor a dense density matrix after checking it is a valid state."""
        rho = np.asarray(rho, dtype=complex)
        if np.abs(rho - rho.conj().T).max() > TOL.fock_hermitian_atol:
            raise ValueError("density matrix is not Hermitian")
        w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        if w.min() < TOL.fock_psd_eig:
            raise ValueError(f"density matrix has eigenvalue {w.min():.3e}")
        keep = w > 1e-15 * max(w.max(), 1e-300)
        return cls(cutoff, n_modes, v[:, keep] * np.sqrt(w[keep]))


def _prune(x, rel=1e-16):
    w = np.sum(np.abs(x) ** 2, axis=0)
    if w.size == 0:
        return x
    return x[:, w > rel * w.max()]


def _truncate(x, big, cutoff, n_modes):
    """Restrict a factor on ``0..big`` per mode to ``0..cutoff`` per mode."""
    shape = (big + 1,) * n_modes + (x.shape[1],)
    sl = (slice(0, cutoff + 1),) * n_modes
    return x.reshape(shape)[sl].reshape((cutoff + 1) ** n_modes, x.shape[1])


# ---------------------------------------------------------------------------
# ladder operators and single-mode unitaries
# ---------------------------------------------------------------------------

def annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def displacement_op(alpha, cutoff, pad=30):
    a = annihilation(cutoff + pad)
    u = expm(alpha * a.conj().T - np.conj(alpha) * a)
    return u[:cutoff + 1, :cutoff + 1]


def squeezing_op(r, cutoff, pad=30):
    """``exp(r (a^2 - a^dag^2) / 2)``."""
    a = annihilation(cutoff + pad)
    u = expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    return u[:cutoff + 1, :cutoff + 1]


def rotation_op(theta, cutoff):
    return np.diag(np.exp(-1j * theta * np.arange(cutoff + 1)))


def beam_splitter_op(theta, cutoff):
    """``exp(theta (a^dag b - a b^dag))`` on two modes.

    The generator conserves the total photon number ``N``, so it is
    exponentiated exactly on each ``N`` block; blocks with ``N > cutoff``
    are cut by the truncation and left out.
    """
    d = cutoff + 1
    u = np.zeros((d * d, d * d), dtype=complex)
    for total in range(d):
        n = np.arange(total + 1)  # photons in mode a
        idx = n * d + (total - n)
        # a^dag b |n, N-n> = sqrt((n+1)(N-n)) |n+1, N-n-1>
        off = np.sqrt((n[:-1] + 1.0) * (total - n[:-1]))
        gen = np.diag(off, -1) - np.diag(off, 1)
        u[np.ix_(idx, idx)] = expm(theta * gen)
    return u


def _apply_local(op, x, mode, cutoff, n_modes):
    d = cutoff + 1
    shape = (d,) * n_modes + (x.shape[1],)
    t = np.moveaxis(x.reshape(shape), mode, 0)
    t = np.tensordot(op, t, axes=(1, 0))
    return np.moveaxis(t, 0, mode).reshape(x.shape)


def apply_unitary(state, op, mode=None):
    """Apply a single-mode operator to ``mode`` or a full-space operator."""
    if mode is None:
        x = op @ state.factor
    else:
        x = _apply_local(op, state.factor, mode, state.cutoff, state.n_modes)
    return FockState(state.cutoff, state.n_modes, x)


# ---------------------------------------------------------------------------
# state builders
# ---------------------------------------------------------------------------

def vacuum_fock(cutoff, n_modes=1):
    x = np.zeros(((cutoff + 1) ** n_modes, 1), dtype=complex)
    x[0, 0] = 1.0
    return FockState(cutoff, n_modes, x)


def coherent_fock(alpha, cutoff):
    n = np.arange(cutoff + 1)
    logamp = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha) + 1e-300) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n])
    psi = np.exp(logamp) * np.exp(1j * np.angle(alpha) * n)
    if alpha == 0:
        psi = np.zeros(cutoff + 1)
        psi[0] = 1.0
    return FockState(cutoff, 1, psi.astype(complex)[:, None])


def thermal_fock(n_mean, cutoff):
    k = np.arange(cutoff + 1)
    p = (n_mean ** k) / (n_mean + 1.0) ** (k + 1) if n_mean > 0 else (k == 0).astype(float)
    x = np.diag(np.sqrt(p)).astype(complex)
    return FockState(cutoff, 1, _prune(x))


def tmsv_fock(N_S, cutoff):
    """Two-mode squeezed vacuum with Schmidt weights ``N_S^k / (N_S+1)^(k+1)``."""
    d = cutoff + 1
    k = np.arange(d)
    if N_S > 0:
        w = np.exp(0.5 * (k * np.log(N_S) - (k + 1) * np.log1p(N_S)))
    else:
        w = (k == 0).astype(float)
    psi = np.zeros(d * d, dtype=complex)
    psi[k * d + k] = w
    st = FockState(cutoff, 2, psi[:, None])
    if st.leakage >= TOL.fock_max_leakage:
        q = N_S / (N_S + 1.0)
        need = int(math.ceil(math.log(TOL.fock_max_leakage) / math.log(q))) if q > 0 else 0
        raise TruncationError(
            f"TMSV leakage {st.leakage:.3e} at cutoff {cutoff}; use cutoff >= {need}")
    return st


def product_fock(*states):
    cutoff = states[0].cutoff
    if any(s.cutoff != cutoff for s in states):
        raise ValueError("all factors need the same cutoff")
    x = states[0].factor
    for s in states[1:]:
        x = np.einsum("ia,jb->ijab", x, s.factor).reshape(x.shape[0] * s.factor.shape[0], -1)
    return FockState(cutoff, sum(s.n_modes for s in states), _prune(x))


# ---------------------------------------------------------------------------
# pure-loss channel
# ---------------------------------------------------------------------------

def loss_kraus(r, cutoff):
    """``A_k = sum_n sqrt(C(n,k)) r^((n-k)/2) (1-r)^(k/2) |n-k><n|``."""
    d = cutoff + 1
    ops = []
    for k in range(d):
        a = np.zeros((d, d))
        for n in range(k, d):
            a[n - k, n] = math.sqrt(math.comb(n, k) * r ** (n - k) * (1.0 - r) ** k)
        if np.any(a):
            ops.append(a)
    return ops


def loss_channel_fock(state, r, mode=0):
    """Send ``mode`` through a pure-loss channel of transmissivity ``r``."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    cols = [_apply_local(a, state.factor, mode, state.cutoff, state.n_modes)
            for a in loss_kraus(r, state.cutoff)]
    return FockState(state.cutoff, state.n_modes, _prune(np.hstack(cols)))


# ---------------------------------------------------------------------------
# fidelity and moments
# ---------------------------------------------------------------------------

def uhlmann_fidelity(a, b):
    """Squared fidelity ``||sqrt(rho) sqrt(sigma)||_1^2`` = ``||X^dag Y||_1^2``."""
    if a.dim != b.dim:
        raise ValueError("states live on different spaces")
    s = np.linalg.svd(a.factor.conj().T @ b.factor, compute_uv=False)
    return float(np.sum(s) ** 2)


def _quadratures(cutoff, n_modes):
    a1 = annihilation(cutoff)
    eye = np.eye(cutoff + 1)
    ops = []
    for k in range(n_modes):
        mats = [eye] * n_modes
        mats[k] = a1
        a = mats[0]
        for mm in mats[1:]:
            a = np.kron(a, mm)
        ops += [a + a.conj().T, -1j * (a - a.conj().T)]
    return ops


def fock_moments(state):
    """First and second moments in the ``x = a + a^dag`` convention."""
    x = state.factor
    ops = _quadratures(state.cutoff, state.n_modes)
    ox = [o @ x for o in ops]
    mean = np.array([np.vdot(x, y).real for y in ox])
    n = len(ops)
    cov = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            cov[i, j] = np.vdot(ox[i], ox[j]).real - mean[i] * mean[j]
    return mean, cov


# ---------------------------------------------------------------------------
# random states with matching Gaussian descriptions
# ---------------------------------------------------------------------------

def random_one_mode_pair(rng, cutoff=None, max_thermal=0.5, max_squeezing=0.4,
                         max_displacement=0.7):
    """``D(alpha) R(theta) S(r) rho_th(n)`` as (FockState, GaussianState)."""
    n = rng.uniform(0, max_thermal)
    r = rng.uniform(-max_squeezing, max_squeezing)
    theta = rng.uniform(0, 2 * np.pi)
    alpha = complex(*rng.uniform(-max_displacement, max_displacement, size=2))
    cutoff = 50 if cutoff is None else cutoff
    big = cutoff + 20
    u = displacement_op(alpha, big) @ rotation_op(theta, big) @ squeezing_op(r, big)
    x = u @ thermal_fock(n, big).factor
    fs = FockState(cutoff, 1, _prune(_truncate(x, big, cutoff, 1)))
    gs = g.thermal_state(n)
    gs = g.apply_symplectic(g.single_mode_squeezer(r), gs)
    gs = g.apply_symplectic(g.rotation(theta), gs)
    gs = g.displace(gs, 0, alpha)
    return fs, gs


def random_two_mode_pair(rng, family, cutoff=None):
    """Random two-mode state in Fock and Gaussian form.

    Default cutoffs are sized so the truncation leakage stays below
    ``1e-8`` over the sampled parameter ranges.

    Families: ``"lossy_pure"`` (two squeezed vacua mixed on a beam splitter,
    rotated, sent through pure loss and displaced), ``"product"`` (two
    independent one-mode states) and ``"lossy_tmsv"`` (TMSV with loss on one
    arm).
    """
    if family == "product":
        c = cutoff if cutoff is not None else 28
        fa, ga = random_one_mode_pair(rng, c, max_thermal=0.3, max_displacement=0.5)
        fb, gb = random_one_mode_pair(rng, c, max_thermal=0.3, max_displacement=0.5)
        return product_fock(fa, fb), g.product_state(ga, gb)
    if family == "lossy_tmsv":
        ns = rng.uniform(0.05, 1.2)
        eta = rng.uniform(0, 1)
        c = cutoff if cutoff is not None else 40
        fs = loss_channel_fock(tmsv_fock(ns, c), eta, 0)
        gs = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(eta), g.tmsv_state(ns), 0)
        return fs, gs
    if family != "lossy_pure":
        raise ValueError(f"unknown family {family!r}")
    r1, r2 = rng.uniform(-0.45, 0.45, size=2)
    theta = rng.uniform(0, np.pi)
    phases = rng.uniform(0, 2 * np.pi, size=2)
    etas = rng.uniform(0.2, 1.0, size=2)
    alphas = [complex(*rng.uniform(-0.5, 0.5, size=2)) for _ in range(2)]
    c = cutoff if cutoff is not None else 28
    big = c + 8
    st = vacuum_fock(big, 2)
    st = apply_unitary(st, squeezing_op(r1, big), 0)
    st = apply_unitary(st, squeezing_op(r2, big), 1)
    st = apply_unitary(st, beam_splitter_op(theta, big))
    for k in range(2):
        st = apply_unitary(st, rotation_op(phases[k], big), k)
        st = loss_channel_fock(st, etas[k], k)
        st = apply_unitary(st, displacement_op(alphas[k], big), k)
    fs = FockState(c, 2, _prune(_truncate(st.factor, big, c, 2)))

    gs = g.vacuum(2)
    gs = g.apply_symplectic(g.embed(g.single_mode_squeezer(r1), [0], 2), gs)
    gs = g.apply_symplectic(g.embed(g.single_mode_squeezer(r2), [1], 2), gs)
    gs = g.apply_symplectic(g.beam_splitter(theta), gs)
    for k in range(2):
        gs = g.apply_symplectic(g.embed(g.rotation(phases[k]), [k], 2), gs)
        gs = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(etas[k]), gs, k)
        gs = g.displace(gs, k, alphas[k])
    return fs, gs


# ---------------------------------------------------------------------------
# photon-count samplers
# ---------------------------------------------------------------------------

def sample_thermal_counts(n_mean, M, trials, seed):
    """``(trials, M)`` geometric counts with mean ``n_mean`` per mode."""
    rng = np.random.default_rng(seed)
    return rng.geometric(1.0 / (1.0 + n_mean), size=(int(trials), int(M))) - 1


def _displaced_thermal(rng, signal, n_thermal, shape):
    amp = math.sqrt(signal) + math.sqrt(n_thermal / 2.0) * (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return rng.poisson(np.abs(amp) ** 2)


def sample_displaced_thermal_counts(mean_photons_signal, n_thermal, M, trials, seed):
    """Counts of a displaced thermal state, sampled through its P-function.

    A complex amplitude is drawn around ``sqrt(mean_photons_signal)`` with
    ``E|delta|^2 = n_thermal`` and the count is Poisson in ``|amp|^2``.
    """
    rng = np.random.default_rng(seed)
    return _displaced_thermal(rng, mean_photons_signal, n_thermal, (int(trials), int(M)))


def dd_monte_carlo(m, signal, N_B, trials, seed, use_numba=None, chunk=200_000):
    """Simulate max-count decoding of one displaced-thermal sector among
    ``m - 1`` thermal sectors. Returns (error rate, standard error)."""
    trials = int(trials)
    n_chunks = -(-trials // chunk)
    errors = 0
    remaining = trials
    for ss in np.random.SeedSequence(seed).spawn(n_chunks):
        rng = np.random.default_rng(ss)
        k = min(chunk, remaining)
        truth = rng.integers(0, m, size=k)
        counts = rng.geometric(1.0 / (1.0 + N_B), size=(k, m)) - 1
        counts[np.arange(k), truth] = _displaced_thermal(rng, signal, N_B, k)
        u = rng.random(k)
        errors += _kernels.max_count_errors(counts, truth, u, use_numba)
        remaining -= k
    p = errors / trials
    return p, math.sqrt(max(p * (1.0 - p), 1.0 / trials) / trials)
