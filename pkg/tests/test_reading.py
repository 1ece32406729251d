import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cpf import discrimination as d
from cpf import gaussian as g
from cpf import reading as rd
from cpf.channels import PhaseInsensitiveChannel, apply_to_gaussian
from cpf.fock import sample_thermal_counts

refl = st.floats(0.0, 1.0)
signal = st.floats(1e-4, 20.0)


def _nulled(N_S, r_state, r_tuned):
    """Lossy TMSV return-idler pair after the two-mode squeezer tuned to ``r_tuned``."""
    ret = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(r_state), g.tmsv_state(N_S))
    return g.apply_symplectic(g.two_mode_squeezer(rd.squeeze_strength(r_tuned, N_S)), ret)


def test_nulling_returns_signal_arm_to_vacuum():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        r, n_s = rng.uniform(0, 1), 10 ** rng.uniform(-4, 1.5)
        out = _nulled(n_s, r, r)
        worst = max(worst, abs(g.thermal_occupation(out, 0)) / (1 + n_s))
    assert worst < 1e-11


@settings(max_examples=300, deadline=None)
@given(signal, refl, refl)
def test_residual_thermal_matches_symplectic_pipeline(n_s, r_a, r_b):
    out = _nulled(n_s, r_b, r_a)
    assert g.thermal_occupation(out, 0) == pytest.approx(
        rd.residual_thermal(n_s, r_a, r_b), rel=1e-8, abs=1e-10 * (1 + n_s))


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 50), st.floats(1.0, 1e4), st.floats(1e-3, 5.0), refl, refl)
def test_cn_error_pair_is_vacuum_probability(m, M, n_s, r_b, r_t):
    p = rd.ReadingParams(m, M, n_s, r_b, r_t)
    e = rd.cn_error_pair(p)
    # zeta2: target cell nulled with the background setting shows no signal photon
    n2 = g.thermal_occupation(_nulled(n_s, r_t, r_b), 0)
    n1 = g.thermal_occupation(_nulled(n_s, r_b, r_t), 0)
    tol = 1e-13 * M * (1 + n_s)
    assert e.log_zeta2 == pytest.approx(-M * math.log1p(n2), rel=1e-7, abs=tol)
    assert e.log_zeta1 == pytest.approx(-M * math.log1p(n1), rel=1e-7, abs=tol)


@pytest.mark.parametrize("M,n_s,r_b,r_t", [(4, 2.0, 0.95, 0.5), (10, 0.5, 0.9, 0.3)])
def test_cn_errors_match_thermal_count_sampling(M, n_s, r_b, r_t):
    p = rd.ReadingParams(3, M, n_s, r_b, r_t)
    e = rd.cn_error_pair(p)
    trials = 200_000
    for zeta, (ra, rb), seed in ((e.zeta2, (r_b, r_t), 1), (e.zeta1, (r_t, r_b), 2)):
        counts = sample_thermal_counts(rd.residual_thermal(n_s, ra, rb), M, trials, seed)
        hat = np.mean(counts.sum(axis=1) == 0)
        se = math.sqrt(zeta * (1 - zeta) / trials)
        assert abs(hat - zeta) < 3 * se


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 10.0), st.floats(0.0, 0.999), st.integers(1, 100))
def test_cn_star_zeta_is_two_mode_vacuum_fidelity(n_s, r_t, M):
    p = rd.ReadingParams(3, M, n_s, 1.0, r_t)
    out = _nulled(n_s, r_t, 1.0)
    log_vac = g.log_fidelity_two_mode(out, g.vacuum(2))
    assert rd.cn_star_error_pair(p).log_zeta2 == pytest.approx(M * log_vac, rel=1e-9, abs=1e-12)


def test_cn_star_frozen_value():
    # per-pair two-mode vacuum probability from the Gaussian fidelity, N_S = 5, r_T = 0.4
    p = rd.ReadingParams(3, 1, 5.0, 1.0, 0.4)
    assert rd.cn_star_error_pair(p).zeta2 == pytest.approx(0.12418244367162805, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 64), st.floats(1.0, 1e4), st.floats(1e-4, 1.0), refl)
def test_cn_star_improves_on_cn(m, M, n_s, r):
    assume(r < 1.0)
    for p in (rd.ReadingParams(m, M, n_s, 1.0, r), rd.ReadingParams(m, M, n_s, r, 1.0)):
        assert rd.log_cn_star_error(p) <= rd.log_cn_reading_error(p) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 64), st.floats(1.0, 1e3), st.floats(1e-3, 2.0), refl, refl)
def test_cn_respects_fidelity_lower_bound(m, M, n_s, r_b, r_t):
    p = rd.ReadingParams(m, M, n_s, r_b, r_t)
    st_, sb = rd.return_idler_states(p)
    log_f = M * g.log_fidelity_two_mode(st_, sb)
    assert rd.log_cn_reading_error(p) >= d.log_fidelity_lb(m, log_f) - 1e-9


def test_classical_overlap_is_coherent_fidelity():
    p = rd.ReadingParams(4, 30, 0.2, 0.9, 0.5)
    a = math.sqrt(p.M * p.N_S)
    f = g.fidelity(g.coherent_state(math.sqrt(p.r_B) * a), g.coherent_state(math.sqrt(p.r_T) * a))
    assert rd.overlap_classical(p) == pytest.approx(f, rel=1e-12)


def test_quantum_ub_is_barnum_on_return_idler_fidelity():
    p = rd.ReadingParams(16, 200, 0.01, 0.95, 0.9)
    st_, sb = rd.return_idler_states(p)
    f = g.fidelity(st_, sb) ** p.M
    assert rd.quantum_ub(p) == pytest.approx(d.barnum_ub(p.m, f), rel=1e-10)
    r = rd.quantum_ub_result(rd.ReadingParams(16, 1, 0.01, 0.95, 0.9))
    assert r.clamped and r.value == 1.0


@pytest.mark.parametrize("N_B", [0.0, 0.5, 3.0])
def test_quantum_ub_asymptote_small_signal(N_B):
    p = rd.ReadingParams(8, 1e6, 1e-5, 0.9 if N_B else 0.95, 0.6, N_B)
    exact = rd.log_quantum_ub(p, clamp=False) - math.log(7)
    asym = rd.log_quantum_ub_asymptotic(p) - math.log(7)
    assert asym == pytest.approx(exact, rel=1e-4)


def test_low_signal_cn_is_twice_classical():
    p = rd.ReadingParams(10, 1e7, 1e-5, 1.0, 0.4)
    ratio = rd.cn_reading_error(p) / rd.classical_helstrom(p)
    assert ratio == pytest.approx(2.0, rel=1e-3)
    assert rd.log_cn_reading_asymptotic_low_signal(p) == pytest.approx(
        rd.log_cn_reading_error(p), abs=1e-3)


@pytest.mark.parametrize("n_s,bound", [(1e-3, 0.02), (1e-4, 2e-3), (1e-5, 2e-4)])
def test_cn_star_asymptote(n_s, bound):
    # fixed M N_S = 100; the asymptote needs m * zeta << 1, so r_T is kept well below 1
    p = rd.ReadingParams(10, 100 / n_s, n_s, 1.0, 0.4)
    assert abs(rd.log_cn_star_error(p) - rd.log_cn_star_asymptotic(p)) < bound


def test_high_reflectivity_asymptote():
    # needs N_S (1 - r) >> 1 together with N_S (sqrt(r_B) - sqrt(r_T))^2 << 1
    p = rd.ReadingParams(10, 2000, 1e4, 0.99, 0.9899)
    assert rd.log_cn_reading_asymptotic_high_reflectivity(p) == pytest.approx(
        rd.log_cn_reading_error(p), rel=0.02)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5, 0.999), st.floats(0.5, 0.999), st.floats(0.01, 50.0))
def test_noisy_exponent_ratio_exceeds_one(r_b, r_t, n_b):
    assume(abs(r_b - r_t) > 1e-6)
    assert rd.noisy_exponent_ratio(rd.ReadingParams(2, 1, 0.01, r_b, r_t, n_b)) > 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.floats(1e-3, 1.0), refl, refl, st.floats(1.0, 1e3))
def test_cn_decreases_with_M(m, n_s, r_b, r_t, M):
    a = rd.log_cn_reading_error(rd.ReadingParams(m, M, n_s, r_b, r_t))
    b = rd.log_cn_reading_error(rd.ReadingParams(m, 2 * M, n_s, r_b, r_t))
    assert b <= a + 1e-12


def test_binary_reading_uses_type_two_errors():
    p = rd.ReadingParams(2, 50, 0.1, 1.0, 0.8)
    out = rd.binary_reading_errors(p)
    assert out.cn == pytest.approx(rd.cn_error_pair(p).zeta2 / 2)
    assert out.cn_star == pytest.approx(rd.cn_star_error_pair(p).zeta2 / 2)
    assert out.cn_star <= out.cn
    p = rd.ReadingParams(2, 50, 0.1, 0.9, 0.8)
    assert rd.binary_reading_errors(p).cn_star is None
    with pytest.raises(ValueError):
        rd.binary_reading_errors(rd.ReadingParams(2, 50, 0.1, 0.8, 0.9))


def test_degenerate_cells_give_guessing():
    p = rd.ReadingParams(5, 100, 0.1, 0.9, 0.9)
    assert rd.cn_reading_error(p) == pytest.approx(p.guess)
    assert rd.classical_helstrom(p) == pytest.approx(p.guess)


def test_unsupported_regimes():
    noisy = rd.ReadingParams(4, 10, 0.1, 0.9, 0.8, N_B=0.5)
    for fn in (rd.cn_error_pair, rd.cn_reading_error, rd.overlap_classical):
        with pytest.raises(rd.UnsupportedRegimeError):
            fn(noisy)
    with pytest.raises(rd.UnsupportedRegimeError):
        rd.cn_star_error(rd.ReadingParams(4, 10, 0.1, 0.9, 0.8))
    with pytest.raises(ValueError):
        rd.noisy_exponent_ratio(rd.ReadingParams(4, 10, 0.1, 0.9, 0.8))


@pytest.mark.parametrize("kw", [dict(m=1), dict(M=-1.0), dict(N_S=-0.1), dict(r_B=1.2),
                                dict(r_B=1.0, N_B=0.1), dict(m=2.5)])
def test_params_validation(kw):
    base = dict(m=4, M=10.0, N_S=0.1, r_B=0.9, r_T=0.8)
    base.update(kw)
    with pytest.raises(ValueError):
        rd.ReadingParams(**base)


def test_classical_overlap_from_coherent_outputs():
    from cpf.channels import coherent_output, reading_channels
    p = rd.ReadingParams(100, 10, 5.0, 0.95, 0.9)
    t, b = reading_channels(p.r_B, p.r_T)
    alpha = math.sqrt(p.M * p.N_S)
    via_states = g.fidelity_one_mode(coherent_output(t, alpha), coherent_output(b, alpha))
    assert via_states == pytest.approx(rd.overlap_classical(p), rel=1e-12)


def test_classical_helstrom_small_overlap_asymptote():
    p = rd.ReadingParams(10, 1e4, 1.0, 0.95, 0.9)
    assert rd.overlap_classical(p) < 2e-3
    assert rd.classical_helstrom(p) == pytest.approx(rd.classical_helstrom_asymptotic(p), rel=0.01)


def test_classical_lb_below_helstrom():
    for m in (2, 10, 100):
        for M in (1, 10, 100, 1000):
            for r_b, r_t in ((0.95, 0.9), (1.0, 0.4), (0.6, 0.1)):
                p = rd.ReadingParams(m, M, 0.5, r_b, r_t)
                assert rd.classical_lb(p) <= rd.classical_helstrom(p) * (1 + 1e-12)


def test_ub_asymptote_without_noise_is_pure_loss_exponent():
    p = rd.ReadingParams(10, 100, 0.01, 0.9, 0.5)
    expo = 2 * p.M * p.N_S * (1 - math.sqrt((1 - 0.9) * (1 - 0.5)) - math.sqrt(0.45))
    assert rd.log_quantum_ub_asymptotic(p) == pytest.approx(math.log(9) - expo, rel=1e-14)


def test_residual_thermal_frozen_point():
    ret = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(0.9), g.tmsv_state(5.0))
    out = g.apply_symplectic(g.two_mode_squeezer(rd.squeeze_strength(0.95, 5.0)), ret)
    assert g.thermal_occupation(out, 0) == pytest.approx(0.01621917862336586, abs=1e-10)
    assert rd.residual_thermal(5.0, 0.95, 0.9) == pytest.approx(0.01621917862336586, abs=1e-10)


def test_cn_beats_classical_helstrom_at_moderate_point():
    p = rd.ReadingParams(100, 10, 5.0, 0.95, 0.9)
    assert rd.cn_reading_error(p) < rd.classical_helstrom(p)


def test_binary_presets_monotone_and_ordered():
    for n_s in (0.1, 10.0):
        cn, star = [], []
        for M in np.unique(np.logspace(0, 3, 25).astype(int)):
            b = rd.binary_reading_errors(rd.ReadingParams(2, M, n_s, 1.0, 0.4))
            cn.append(b.log_cn)
            star.append(b.log_cn_star)
        assert np.all(np.diff(cn) < 0) and np.all(np.diff(star) < 0)
        assert np.all(np.array(star) <= np.array(cn) + 1e-12)


def test_noisy_ratio_near_unit_reflectivity():
    p = rd.ReadingParams(2, 1, 1e-3, 0.99, 0.98, 1.0)
    assert rd.noisy_exponent_ratio(p) == pytest.approx(1.5, rel=0.1)


def test_noisy_ratio_drops_below_one_at_low_reflectivity():
    # the entangled advantage is not universal once r_B + r_T is well below one
    p = rd.ReadingParams(2, 1, 1e-3, 0.1, 0.05, 1.0)
    assert rd.noisy_exponent_ratio(p) < 1.0
