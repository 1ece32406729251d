import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpf import gaussian as g
from cpf.channels import (CPFScenario, ChannelKind, PhaseInsensitiveChannel,
                          UnsupportedOperationError, apply_to_gaussian, coherent_output,
                          reading_channels, target_finding_channels)

unit = st.floats(0.0, 1.0)
occ = st.floats(0.0, 5.0)


def test_thermal_loss_vacuum_output():
    ch = PhaseInsensitiveChannel.thermal_loss(0.3, n_env=2.0)
    out = apply_to_gaussian(ch, g.vacuum(1))
    assert ch.E == pytest.approx(1.4)
    assert ch.n_env == pytest.approx(2.0)
    assert np.allclose(out.cov, (2 * ch.E + 1) * np.eye(2))


def test_amplifier_and_additive_noise():
    amp = PhaseInsensitiveChannel.noisy_amplifier(2.0, n_env=0.5)
    assert amp.n_env == pytest.approx(0.5)
    out = apply_to_gaussian(amp, g.coherent_state(1.0))
    assert out.mean[0] == pytest.approx(2.0 * math.sqrt(2.0))
    add = PhaseInsensitiveChannel.additive_noise(0.6)
    assert add.omega_add == pytest.approx(0.6)
    assert np.allclose(apply_to_gaussian(add, g.vacuum(1)).cov, 1.6 * np.eye(2))


@pytest.mark.parametrize("kind,mu,E", [
    ("thermal_loss", 1.2, 0.0),
    ("noisy_amplifier", 0.5, 0.0),
    ("noisy_amplifier", 2.0, 0.5),   # below the quantum limit E >= mu - 1
    ("additive_noise", 0.9, 0.1),
    ("conjugate_amplifier", 1.0, 0.5),
    ("thermal_loss", 0.5, -0.1),
])
def test_invalid_channels(kind, mu, E):
    with pytest.raises(ValueError):
        PhaseInsensitiveChannel(kind, mu, E)


def test_conjugate_amplifier_state_evolution_unsupported():
    ch = PhaseInsensitiveChannel.conjugate_amplifier(1.0, 2.0)
    assert ch.kind is ChannelKind.CONJUGATE_AMPLIFIER
    with pytest.raises(UnsupportedOperationError):
        apply_to_gaussian(ch, g.vacuum(1))
    out = coherent_output(ch, 1.0 + 0.5j)
    assert np.allclose(out.mean, [2.0, -1.0])


def test_only_target_mode_is_touched():
    s = g.tmsv_state(1.0)
    out = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(0.5), s, 0)
    assert np.allclose(out.cov[2:, 2:], s.cov[2:, 2:])
    assert np.allclose(out.cov[:2, 2:], math.sqrt(0.5) * s.cov[:2, 2:])
    with pytest.raises(IndexError):
        apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(0.5), s, 2)


@settings(max_examples=200, deadline=None)
@given(unit, occ, unit, occ)
def test_thermal_loss_composition(mu1, n1, mu2, n2):
    c1 = PhaseInsensitiveChannel.thermal_loss(mu1, n1)
    c2 = PhaseInsensitiveChannel.thermal_loss(mu2, n2)
    s = g.tmsv_state(0.7)
    two = apply_to_gaussian(c2, apply_to_gaussian(c1, s))
    one = apply_to_gaussian(PhaseInsensitiveChannel(ChannelKind.THERMAL_LOSS, mu1 * mu2,
                                                    mu2 * c1.E + c2.E), s)
    assert np.allclose(two.cov, one.cov, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["loss", "amp", "add"]), unit, occ)
def test_outputs_satisfy_uncertainty(seed, kind, x, n):
    ch = {"loss": lambda: PhaseInsensitiveChannel.thermal_loss(x, n),
          "amp": lambda: PhaseInsensitiveChannel.noisy_amplifier(1.0 + 3 * x, n),
          "add": lambda: PhaseInsensitiveChannel.additive_noise(n)}[kind]()
    s = g.random_gaussian_state(2, np.random.default_rng(seed))
    out = apply_to_gaussian(ch, s, 1)   # GaussianState validates on construction
    assert out.n_modes == 2


def test_reading_channels_have_no_passive_signature():
    t, b = reading_channels(0.95, 0.9, 0.3)
    assert (t.mu, b.mu) == (0.9, 0.95)
    assert t.E == b.E == 0.3
    sc = CPFScenario(4, 10, 0.1, t, b)
    assert not sc.passive_signature
    assert sc.prior == 0.25
    assert sc.total_energy == pytest.approx(4.0)
    with pytest.raises(ValueError):
        reading_channels(1.0, 0.9, 0.1)
    with pytest.raises(ValueError):
        reading_channels(1.1, 0.9)


def test_target_finding_channels():
    t, b = target_finding_channels(0.2, 5.0)
    assert b.mu == 0.0 and t.mu == 0.2
    assert t.E == b.E == 5.0
    assert t.n_env == pytest.approx(6.25)
    with pytest.raises(ValueError):
        CPFScenario(1, 1, 1, t, b)


def test_lossy_tmsv_entries():
    n_s, r = 5.0, 0.9
    v = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(r), g.tmsv_state(n_s)).cov
    cp = math.sqrt(n_s * (n_s + 1))
    assert np.allclose(np.diag(v), [2 * r * n_s + 1] * 2 + [2 * n_s + 1] * 2)
    assert np.allclose(v[:2, 2:], 2 * math.sqrt(r) * cp * np.diag([1, -1]))


def test_zero_transmission_replaces_signal_with_thermal():
    n_s, nb = 2.0, 3.0
    v = apply_to_gaussian(PhaseInsensitiveChannel.thermal_loss(0.0, nb), g.tmsv_state(n_s)).cov
    assert np.allclose(np.diag(v), [2 * nb + 1] * 2 + [2 * n_s + 1] * 2)
    assert np.allclose(v[:2, 2:], 0.0)


def test_target_channel_on_coherent_probe():
    eta, nb, M, n_s = 0.1, 20.0, 1e4, 1e-3
    ch = PhaseInsensitiveChannel.thermal_loss(eta, nb / (1 - eta))
    out = apply_to_gaussian(ch, g.coherent_state(math.sqrt(M * n_s)))
    assert np.allclose(out.mean, [2 * math.sqrt(eta * M * n_s), 0.0])
    assert np.allclose(out.cov, (2 * nb + 1) * np.eye(2))
