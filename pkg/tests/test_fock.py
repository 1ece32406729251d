import math

import numpy as np
import pytest
from scipy.linalg import expm

from cpf import fock as f
from cpf import gaussian as g
from cpf.channels import PhaseInsensitiveChannel, apply_to_gaussian


def test_builders_are_normalised():
    for st in (f.coherent_fock(0.8 - 0.3j, 40), f.thermal_fock(0.7, 60), f.tmsv_fock(0.5, 40),
               f.vacuum_fock(5, 2)):
        assert st.leakage < 1e-8
        assert st.trace == pytest.approx(1.0, abs=1e-8)


def test_tmsv_truncation_error_suggests_cutoff():
    with pytest.raises(f.TruncationError, match="cutoff >="):
        f.tmsv_fock(2.0, 10)


def test_require_small_leakage():
    with pytest.raises(f.TruncationError):
        f.thermal_fock(3.0, 5).require_small_leakage()


def test_beam_splitter_matches_dense_exponential():
    c = 6
    # dense exponential on a larger space, restricted to photon-number blocks N <= c
    big = c + 8
    ab = f.annihilation(big)
    ebig = np.eye(big + 1)
    A, B = np.kron(ab, ebig), np.kron(ebig, ab)
    dense = expm(0.7 * (A.conj().T @ B - A @ B.conj().T))
    idx = [i * (big + 1) + j for i in range(c + 1) for j in range(c + 1)]
    dense = dense[np.ix_(idx, idx)]
    block = f.beam_splitter_op(0.7, c)
    n_tot = np.add.outer(np.arange(c + 1), np.arange(c + 1)).ravel()
    keep = n_tot <= c
    assert np.allclose(block[np.ix_(keep, keep)], dense[np.ix_(keep, keep)], atol=1e-12)


def test_loss_kraus_complete():
    ops = f.loss_kraus(0.37, 12)
    total = sum(k.T @ k for k in ops)
    assert np.allclose(total, np.eye(13), atol=1e-13)


def test_loss_of_coherent_state():
    out = f.loss_channel_fock(f.coherent_fock(1.2, 40), 0.5)
    ref = f.coherent_fock(1.2 * math.sqrt(0.5), 40)
    assert f.uhlmann_fidelity(out, ref) == pytest.approx(1.0, abs=1e-12)


def test_moments_match_gaussian_channel():
    ns, eta = 0.8, 0.35
    st = f.loss_channel_fock(f.tmsv_fock(ns, 45), eta)
    mean, cov = f.fock_moments(st)
    ref = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(eta), g.tmsv_state(ns))
    assert np.allclose(mean, 0.0, atol=1e-12)
    assert np.allclose(cov, ref.cov, atol=1e-8)


def test_random_one_mode_pair_moments():
    rng = np.random.default_rng(3)
    for _ in range(5):
        fs, gs = f.random_one_mode_pair(rng)
        mean, cov = f.fock_moments(fs)
        assert np.allclose(mean, gs.mean, atol=1e-8)
        assert np.allclose(cov, gs.cov, atol=1e-8)


@pytest.mark.parametrize("family", ["product", "lossy_tmsv", "lossy_pure"])
def test_random_two_mode_fidelity_agrees(family):
    rng = np.random.default_rng(17)
    fa, ga = f.random_two_mode_pair(rng, family)
    fb, gb = f.random_two_mode_pair(rng, family, fa.cutoff)
    assert max(fa.leakage, fb.leakage) < 1e-8
    assert f.uhlmann_fidelity(fa, fb) == pytest.approx(g.fidelity(ga, gb), abs=1e-8)
    assert f.uhlmann_fidelity(fa, fa) == pytest.approx(fa.trace ** 2, rel=1e-10)


def test_unknown_family():
    with pytest.raises(ValueError):
        f.random_two_mode_pair(np.random.default_rng(0), "squeezed")


def test_from_density_round_trip():
    st = f.thermal_fock(0.4, 20)
    back = f.FockState.from_density(st.density, 20, 1)
    assert f.uhlmann_fidelity(st, back) == pytest.approx(st.trace ** 2, rel=1e-12)
    assert back.purity() == pytest.approx(st.purity(), rel=1e-10)
    with pytest.raises(ValueError):
        f.FockState.from_density(np.diag([1.2, -0.2]), 1, 1)


def test_uhlmann_space_mismatch():
    with pytest.raises(ValueError):
        f.uhlmann_fidelity(f.vacuum_fock(3), f.vacuum_fock(4))


def test_thermal_sampler_statistics():
    c = f.sample_thermal_counts(1.5, 4, 100_000, seed=1)
    assert c.shape == (100_000, 4)
    assert c.mean() == pytest.approx(1.5, rel=0.01)
    assert c.var() == pytest.approx(1.5 * 2.5, rel=0.02)
    # vacuum probability of M modes
    assert np.mean(c.sum(axis=1) == 0) == pytest.approx(2.5 ** -4, rel=0.05)


def test_displaced_thermal_sampler_statistics():
    s, n = 2.0, 0.5
    c = f.sample_displaced_thermal_counts(s, n, 1, 200_000, seed=2).ravel()
    assert c.mean() == pytest.approx(s + n, rel=0.01)
    assert c.var() == pytest.approx(n * (n + 1) + s * (2 * n + 1), rel=0.03)


def test_dd_monte_carlo_reproducible():
    a = f.dd_monte_carlo(4, 0.5, 1.0, 20_000, seed=9)
    b = f.dd_monte_carlo(4, 0.5, 1.0, 20_000, seed=9)
    assert a == b
    # no signal: errors at the guessing rate
    p, se = f.dd_monte_carlo(4, 0.0, 1.0, 50_000, seed=9)
    assert abs(p - 0.75) < 4 * se


def test_lossy_tmsv_fidelity_small_signal():
    n_s = 0.2
    a = f.loss_channel_fock(f.tmsv_fock(n_s, 40), 0.9)
    b = f.loss_channel_fock(f.tmsv_fock(n_s, 40), 0.95)
    s = g.tmsv_state(n_s)
    ga = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(0.9), s)
    gb = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(0.95), s)
    assert abs(f.uhlmann_fidelity(a, b) - g.fidelity(ga, gb)) < 1e-6


@pytest.mark.parametrize("alpha,beta", [(0.3, -0.5j), (1.0, 0.6 + 0.8j), (-0.7 + 0.2j, 0.0)])
def test_coherent_overlap_fock(alpha, beta):
    fa, fb = f.coherent_fock(alpha, 40), f.coherent_fock(beta, 40)
    exact = math.exp(-abs(alpha - beta) ** 2)
    ga = g.coherent_state(complex(alpha).real, complex(alpha).imag)
    gb = g.coherent_state(complex(beta).real, complex(beta).imag)
    assert abs(f.uhlmann_fidelity(fa, fb) - exact) < 1e-8
    assert abs(g.fidelity_one_mode(ga, gb) - exact) < 1e-8


def test_thermal_pair_fock():
    val = f.uhlmann_fidelity(f.thermal_fock(0.2, 60), f.thermal_fock(0.5, 60))
    assert abs(val - g.fidelity_one_mode(g.thermal_state(0.2), g.thermal_state(0.5))) < 1e-8


def test_zero_count_frequency_of_thermal_modes():
    n, M, trials = 0.016, 10, 1_000_000
    counts = f.sample_thermal_counts(n, M, trials, 11)
    p = (1 + n) ** -M
    freq = np.mean(np.all(counts == 0, axis=1))
    assert abs(freq - p) < 3 * math.sqrt(p * (1 - p) / trials)
