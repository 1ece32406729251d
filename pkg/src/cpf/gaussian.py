"""Gaussian states, symplectic maps and closed-form fidelities.

Conventions: quadratures ``x = a + a^dagger`` and ``p = -i(a - a^dagger)``
ordered ``(q1, p1, q2, p2, ...)``. The vacuum has identity covariance and a
coherent state ``|alpha>`` has mean ``2 (Re alpha, Im alpha)``.

The two-mode fidelity uses the symplectic form ``Omega`` wherever the
textbook expression writes ``J``. With ``Omega`` the determinants entering
the formula are real and are evaluated as

    Delta  = det(V1 + V2) / 16
    Gamma  = det(Omega V1 Omega V2 - I) / 16
    Lambda = det(V1 + i Omega) det(V2 + i Omega) / 16

where ``det(V + i Omega) = det V - (det A + det B + 2 det C) + 1`` for
``V = [[A, C], [C^T, B]]``. This form is checked against brute-force
Fock-space fidelities in the test suite.
"""
from dataclasses import dataclass

import numpy as np

from ._config import TOL


class InvalidStateError(ValueError):
    """Raised when a covariance matrix violates a physical constraint."""


class NotThermalError(ValueError):
    """Raised when a mode's covariance block is not proportional to I2."""


_OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
_Z2 = np.diag([1.0, -1.0])
_I2 = np.eye(2)


def symplectic_form(n_modes):
    """Block-diagonal symplectic form for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), _OMEGA1)


# ---------------------------------------------------------------------------
# small closed-form linear algebra
# ---------------------------------------------------------------------------

def _det2(a):
    return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]


def _inv2(a):
    d = _det2(a)
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / d


def _det4(a):
    # Laplace expansion along the first two rows (complementary 2x2 minors)
    s0 = a[0, 0] * a[1, 1] - a[1, 0] * a[0, 1]
    s1 = a[0, 0] * a[1, 2] - a[1, 0] * a[0, 2]
    s2 = a[0, 0] * a[1, 3] - a[1, 0] * a[0, 3]
    s3 = a[0, 1] * a[1, 2] - a[1, 1] * a[0, 2]
    s4 = a[0, 1] * a[1, 3] - a[1, 1] * a[0, 3]
    s5 = a[0, 2] * a[1, 3] - a[1, 2] * a[0, 3]
    c5 = a[2, 2] * a[3, 3] - a[3, 2] * a[2, 3]
    c4 = a[2, 1] * a[3, 3] - a[3, 1] * a[2, 3]
    c3 = a[2, 1] * a[3, 2] - a[3, 1] * a[2, 2]
    c2 = a[2, 0] * a[3, 3] - a[3, 0] * a[2, 3]
    c1 = a[2, 0] * a[3, 2] - a[3, 0] * a[2, 2]
    c0 = a[2, 0] * a[3, 1] - a[3, 0] * a[2, 1]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


def _quad_form_inv(m, x):
    """``x^T m^{-1} x`` for symmetric positive-definite 2x2 or 4x4 ``m``."""
    if m.shape == (2, 2):
        return float(x @ _inv2(m) @ x)
    a, c, b = m[:2, :2], m[:2, 2:], m[2:, 2:]
    ainv = _inv2(a)
    schur = b - c.T @ ainv @ c
    x1, x2 = x[:2], x[2:]
    y = x2 - c.T @ ainv @ x1
    return float(x1 @ ainv @ x1 + y @ _inv2(schur) @ y)




# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of an n-mode Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        mean.setflags(write=False)
        cov.setflags(write=False)
        self.validate()

    @property
    def n_modes(self):
        return self.cov.shape[0] // 2

    def validate(self):
        cov, mean = self.cov, self.mean
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise InvalidStateError(f"covariance must be 2n x 2n, got {cov.shape}")
        if mean.shape != (cov.shape[0],):
            raise InvalidStateError(
                f"mean has length {mean.shape[0]}, expected {cov.shape[0]}"
            )
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > TOL.symmetric_rtol * scale:
            raise InvalidStateError("covariance is not symmetric")
        omega = symplectic_form(self.n_modes)
        eig = np.linalg.eigvalsh(cov + 1j * omega)
        if eig.min() < TOL.uncertainty_eig * scale:
            raise InvalidStateError(
                f"uncertainty relation violated (min eigenvalue {eig.min():.3e})"
            )

    def mode(self, index):
        """Reduced single-mode state of mode ``index``."""
        sl = slice(2 * index, 2 * index + 2)
        return GaussianState(self.mean[sl], self.cov[sl, sl])

    def symplectic_eigenvalues(self):
        omega = symplectic_form(self.n_modes)
        ev = np.abs(np.linalg.eigvals(1j * omega @ self.cov))
        return np.sort(ev)[::2]

    def purity(self):
        return 1.0 / np.sqrt(np.linalg.det(self.cov))

    def mean_photons(self):
        """Total mean photon number."""
        return float((np.trace(self.cov) - 2 * self.n_modes + self.mean @ self.mean) / 4)


@dataclass(frozen=True, eq=False)
class SymplecticOp:
    """A real 2n x 2n matrix ``S`` with ``S Omega S^T = Omega``."""

    matrix: np.ndarray

    def __post_init__(self):
        s = np.array(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", s)
        s.setflags(write=False)
        n = s.shape[0] // 2
        omega = symplectic_form(n)
        if s.shape != (2 * n, 2 * n) or np.max(np.abs(s @ omega @ s.T - omega)) > (
            TOL.symplectic_atol * max(1.0, float(np.max(np.abs(s))) ** 2)
        ):
            raise ValueError("matrix is not symplectic")

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def vacuum(n_modes=1):
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def thermal_state(n_mean):
    if n_mean < 0:
        raise ValueError("mean photon number must be non-negative")
    return GaussianState(np.zeros(2), (2 * n_mean + 1) * _I2)


def coherent_state(alpha_re, alpha_im=0.0):
    return GaussianState([2.0 * alpha_re, 2.0 * alpha_im], _I2)


def displaced_thermal_state(alpha, n_mean):
    alpha = complex(alpha)
    return GaussianState([2 * alpha.real, 2 * alpha.imag], (2 * n_mean + 1) * _I2)


def tmsv_state(n_s):
    """Two-mode squeezed vacuum with ``n_s`` mean photons per arm."""
    if n_s < 0:
        raise ValueError("N_S must be non-negative")
    cp = np.sqrt(n_s * (n_s + 1))
    a = (2 * n_s + 1) * _I2
    c = 2 * cp * _Z2
    return GaussianState(np.zeros(4), np.block([[a, c], [c, a]]))


def product_state(*states):
    mean = np.concatenate([s.mean for s in states])
    blocks = [s.cov for s in states]
    cov = np.zeros((mean.size, mean.size))
    i = 0
    for b in blocks:
        k = b.shape[0]
        cov[i:i + k, i:i + k] = b
        i += k
    return GaussianState(mean, cov)


def two_mode_squeezer(s):
    """Symplectic matrix of ``exp(s (a^dag b^dag - a b))``."""
    ch, sh = np.cosh(s), np.sinh(s)
    return SymplecticOp(np.block([[ch * _I2, sh * _Z2], [sh * _Z2, ch * _I2]]))


def single_mode_squeezer(r, phi=0.0):
    """Symplectic matrix of ``R(phi)^dag S(r) R(phi)``, ``S(r) = exp(r (a^2 - a^dag^2) / 2)``."""
    rot = rotation(phi).matrix
    return SymplecticOp(rot.T @ np.diag([np.exp(-r), np.exp(r)]) @ rot)


def rotation(theta):
    """Phase rotation ``exp(-i theta a^dag a)``."""
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticOp([[c, s], [-s, c]])


def beam_splitter(theta):
    """Symplectic matrix of ``exp(theta (a^dag b - a b^dag))``."""
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticOp(np.block([[c * _I2, s * _I2], [-s * _I2, c * _I2]]))


def embed(op, modes, n_modes):
    """Lift ``op`` acting on ``modes`` to an ``n_modes`` system."""
    modes = list(modes)
    s = np.eye(2 * n_modes)
    idx = np.concatenate([[2 * k, 2 * k + 1] for k in modes])
    s[np.ix_(idx, idx)] = op.matrix
    return SymplecticOp(s)


def apply_symplectic(op, state):
    if op.matrix.shape[0] != state.cov.shape[0]:
        raise ValueError(
            f"operator acts on {op.n_modes} modes, state has {state.n_modes}"
        )
    s = op.matrix
    return GaussianState(s @ state.mean, s @ state.cov @ s.T)


def displace(state, mode_index, alpha):
    alpha = complex(alpha)
    mean = state.mean.copy()
    mean[2 * mode_index] += 2 * alpha.real
    mean[2 * mode_index + 1] += 2 * alpha.imag
    return GaussianState(mean, state.cov)


def thermal_occupation(state, mode_index):
    """Mean photon number of a mode whose covariance block is ``c * I2``."""
    block = state.cov[2 * mode_index:2 * mode_index + 2, 2 * mode_index:2 * mode_index + 2]
    c = 0.5 * (block[0, 0] + block[1, 1])
    if np.max(np.abs(block - c * _I2)) > TOL.isotropic_atol * max(1.0, abs(c)):
        raise NotThermalError(f"mode {mode_index} block is not isotropic: {block.tolist()}")
    return (c - 1.0) / 2.0


# ---------------------------------------------------------------------------
# fidelities (all return the squared Bures fidelity F^2 = (tr sqrt(...))^2)
# ---------------------------------------------------------------------------

def _det_plus_i_omega(v):
    """Real value of ``det(V + i Omega)`` for a two-mode covariance."""
    a, c, b = v[:2, :2], v[:2, 2:], v[2:, 2:]
    seralian = _det2(a) + _det2(b) + 2 * _det2(c)
    return _det4(v) - seralian + 1.0


def fidelity_one_mode(a, b):
    """Squared fidelity between two single-mode Gaussian states."""
    if a.n_modes != 1 or b.n_modes != 1:
        raise ValueError("fidelity_one_mode needs single-mode states")
    vsum = a.cov + b.cov
    du = b.mean - a.mean
    delta_w = _det2(vsum)
    if delta_w <= 0:
        raise ArithmeticError("V1 + V2 is not positive definite")
    small_w = max((_det2(a.cov) - 1.0) * (_det2(b.cov) - 1.0), 0.0)
    denom = np.sqrt(delta_w + small_w) - np.sqrt(small_w)
    expo = -0.5 * _quad_form_inv(vsum, du)
    if denom < TOL.fidelity_denominator_floor:
        return 0.0
    return float(min(1.0, 2.0 * np.exp(expo) / denom))


def fidelity_two_mode_terms(a, b):
    """The real (Delta, Gamma, Lambda) triple entering the two-mode fidelity."""
    v1, v2 = a.cov, b.cov
    omega = symplectic_form(2)
    delta = _det4(v1 + v2) / 16.0
    gamma = _det4(omega @ v1 @ omega @ v2 - np.eye(4)) / 16.0
    lam = _det_plus_i_omega(v1) * _det_plus_i_omega(v2) / 16.0
    return float(delta), float(gamma), float(max(lam, 0.0))


def _either_pure(a, b):
    # with a pure state F^2 = tr(rho sigma) and root^2 - delta vanishes exactly;
    # computing that difference in floating point would cost half the digits
    return min(abs(_det4(a.cov) - 1.0), abs(_det4(b.cov) - 1.0)) < TOL.purity_atol


def fidelity_two_mode(a, b):
    """Squared fidelity between two two-mode Gaussian states."""
    if a.n_modes != 2 or b.n_modes != 2:
        raise ValueError("fidelity_two_mode needs two-mode states")
    vsum = a.cov + b.cov
    du = b.mean - a.mean
    delta, gamma, lam = fidelity_two_mode_terms(a, b)
    if delta <= 0 or gamma < 0:
        raise ArithmeticError("invalid covariance for the two-mode fidelity")
    expo = -0.5 * _quad_form_inv(vsum, du)
    if _either_pure(a, b):
        return float(min(1.0, np.exp(expo) / np.sqrt(delta)))
    root = np.sqrt(gamma) + np.sqrt(lam)
    denom = root - np.sqrt(max(root * root - delta, 0.0))
    if denom < TOL.fidelity_denominator_floor:
        return 0.0
    return float(min(1.0, np.exp(expo) / denom))


def log_fidelity_two_mode(a, b):
    """Natural log of :func:`fidelity_two_mode`, without underflow."""
    vsum = a.cov + b.cov
    du = b.mean - a.mean
    delta, gamma, lam = fidelity_two_mode_terms(a, b)
    expo = -0.5 * _quad_form_inv(vsum, du)
    if _either_pure(a, b):
        return float(min(0.0, expo - 0.5 * np.log(delta)))
    root = np.sqrt(gamma) + np.sqrt(lam)
    # root - sqrt(root^2 - delta) == delta / (root + sqrt(root^2 - delta))
    denom = delta / (root + np.sqrt(max(root * root - delta, 0.0)))
    return float(min(0.0, expo - np.log(denom)))


def fidelity_two_mode_complex(a, b):
    """Reference evaluation with literal complex determinants (slow, for checks)."""
    v1, v2 = a.cov.astype(complex), b.cov.astype(complex)
    j = symplectic_form(2).astype(complex)
    eye = np.eye(4)
    delta = np.linalg.det((v1 + v2) / 2)
    gamma = 16 * np.linalg.det(j @ v1 @ j @ v2 / 4 - eye / 4)
    lam = 16 * np.linalg.det(v1 / 2 + 1j * j / 2) * np.linalg.det(v2 / 2 + 1j * j / 2)
    root = np.sqrt(gamma) + np.sqrt(lam)
    denom = root - np.sqrt(root ** 2 - delta)
    du = b.mean - a.mean
    expo = -0.5 * du @ np.linalg.solve(a.cov + b.cov, du)
    return complex(np.exp(expo) / denom)


def fidelity(a, b):
    """Squared fidelity, dispatching on the number of modes.

    Product states of more modes should be handled by multiplying
    single-mode or two-mode factors.
    """
    if a.n_modes != b.n_modes:
        raise ValueError("states have different numbers of modes")
    if a.n_modes == 1:
        return fidelity_one_mode(a, b)
    if a.n_modes == 2:
        return fidelity_two_mode(a, b)
    raise NotImplementedError("only one- and two-mode fidelities are available")


def bures_fidelity(a, b):
    """Unsquared fidelity ``F = tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    return float(np.sqrt(fidelity(a, b)))


# ---------------------------------------------------------------------------
# random states for property tests and oracle comparisons
# ---------------------------------------------------------------------------

def random_symplectic(n_modes, rng, max_squeezing=0.5):
    """Random symplectic matrix ``O1 diag(e^-r, e^r) O2`` with passive ``O1, O2``."""

    def passive():
        z = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
        q, r = np.linalg.qr(z)
        u = q * (np.diag(r) / np.abs(np.diag(r)))
        o = np.zeros((2 * n_modes, 2 * n_modes))
        # a -> U a in xpxp ordering
        o[0::2, 0::2] = u.real
        o[0::2, 1::2] = -u.imag
        o[1::2, 0::2] = u.imag
        o[1::2, 1::2] = u.real
        return o

    r = rng.uniform(-max_squeezing, max_squeezing, size=n_modes)
    sq = np.diag(np.ravel(np.column_stack([np.exp(-r), np.exp(r)])))
    return SymplecticOp(passive() @ sq @ passive())


def random_gaussian_state(n_modes, rng, max_thermal=1.0, max_squeezing=0.5, max_displacement=1.0):
    nu = 1 + 2 * rng.uniform(0, max_thermal, size=n_modes)
    cov0 = np.diag(np.repeat(nu, 2))
    s = random_symplectic(n_modes, rng, max_squeezing).matrix
    mean = rng.uniform(-max_displacement, max_displacement, size=2 * n_modes)
    return GaussianState(mean, s @ cov0 @ s.T)
