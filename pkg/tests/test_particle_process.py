from math import pi

import numpy as np
import pytest

from crofton_tensors.bodies import Ball
from crofton_tensors.coeffs import G_s, omega
from crofton_tensors.ground_truth import surface_tensor
from crofton_tensors.mc import mc_run, mc_samples
from crofton_tensors.particle_process import (
    GrainLaw,
    ParticleProcessModel,
    isotropic_average,
    process_design,
    section_intensity,
    simulate,
    specific_tensor_estimate,
    specific_tensor_truth,
)
from crofton_tensors.symtensor import line_metric, metric_tensor

DISKS = GrainLaw("disk", radius=0.1)


def unit_model(gamma, grains=DISKS, margin=None):
    n = grains.dim
    return ParticleProcessModel(gamma, grains, (0.0,) * n, (1.0,) * n, margin)


def test_model_validation():
    with pytest.raises(ValueError):
        unit_model(0.0)
    with pytest.raises(ValueError):
        GrainLaw("ellipse", semi_axes=(1.0,))
    with pytest.raises(ValueError):
        GrainLaw("cube")
    with pytest.raises(ValueError):
        ParticleProcessModel(1.0, DISKS, (0, 0), (1, 0))


def test_poisson_germ_count():
    model = unit_model(10.0, margin=0.0)
    assert model.simulation_volume == 1.0
    rng = np.random.default_rng(0)
    counts = np.array([len(simulate(model, rng)) for _ in range(10_000)])
    assert abs(counts.mean() - 10.0) < 3 * np.sqrt(10.0 / 10_000)


def test_germs_cover_dilated_window():
    X = simulate(unit_model(200.0), np.random.default_rng(1))
    assert X.centers.min() >= -0.1 and X.centers.max() <= 1.1
    assert X.centers.min() < 0 and X.centers.max() > 1


def test_section_intensity_disks():
    model = unit_model(50.0)
    u = np.array([1.0, 0.0])
    run = lambda rng, size: [[section_intensity(simulate(model, rng), u, 0.9)] for _ in range(size)]
    S = mc_run(run, 3000, 2)
    assert S.within([2 * 0.1 * 50.0]).all()


def test_section_intensity_direction_free():
    model = unit_model(50.0, GrainLaw("ellipse", semi_axes=(0.15, 0.05)))
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    x = mc_samples(lambda rng, size: [[section_intensity(X, a, 0.8), section_intensity(X, b, 0.8)]
                                      for X in (simulate(model, rng) for _ in range(size))], 3000, 3)
    d = x[:, 0] - x[:, 1]
    assert abs(d.mean()) <= 3 * d.std(ddof=1) / np.sqrt(len(d))


def test_segment_must_stay_in_window():
    X = simulate(unit_model(5.0), np.random.default_rng(4))
    with pytest.raises(ValueError):
        section_intensity(X, [1.0, 0.0], 1.5)


def test_odd_rank_rejected():
    X = simulate(unit_model(5.0), np.random.default_rng(5))
    with pytest.raises(ValueError):
        specific_tensor_estimate(X, [[1.0, 0.0]], 0.5, 3)
    assert np.all(specific_tensor_truth(unit_model(5.0), 3).coeffs == 0)


def test_disk_truth_closed_form():
    gamma, r = 7.0, 0.1
    T = specific_tensor_truth(unit_model(gamma), 2)
    assert T.allclose(metric_tensor(2) * (gamma * r / 8), rtol=1e-10)
    T0 = specific_tensor_truth(unit_model(gamma), 0)
    assert T0.coeffs[0] == pytest.approx(gamma * pi * r, rel=1e-10)


def test_random_disk_truth_scales_with_mean_radius():
    law = GrainLaw("random_disk", radius=0.2, radius_min=0.1)
    T = specific_tensor_truth(unit_model(3.0, law), 2)
    assert T.allclose(metric_tensor(2) * (3.0 * 0.15 / 8), rtol=1e-10)


@pytest.mark.parametrize("law", [GrainLaw("ellipse", semi_axes=(0.15, 0.05)),
                                 GrainLaw("spheroid", dim=3, semi_axes=(0.1, 0.1, 0.2))],
                         ids=["ellipse", "spheroid"])
def test_grain_mc_truth_matches_closed_form(law):
    model = unit_model(4.0, law)
    closed = specific_tensor_truth(model, 2)
    mc = specific_tensor_truth(model, 2, grain_reps=2000, rng=np.random.default_rng(6))
    assert np.abs(mc.coeffs - closed.coeffs).max() < 0.05 * np.abs(closed.coeffs).max()
    # isotropic: off-diagonal components vanish
    assert closed.allclose(isotropic_average(closed), rtol=1e-12, atol=1e-15)


def test_isotropic_average_of_line_metric():
    u = np.array([0.3, -0.4, 0.5])
    assert isotropic_average(line_metric(u / np.linalg.norm(u))).allclose(metric_tensor(3) / 3, rtol=1e-12)


@pytest.mark.parametrize("s", [0, 2, 4])
def test_estimator_unbiased_disks(s):
    model = unit_model(50.0)
    truth = specific_tensor_truth(model, s).coeffs
    S = mc_run(process_design(model, s, 3, 0.8), 600, 7 + s)
    assert S.within(truth).all()


def test_stationarity_under_window_translation():
    model = unit_model(40.0)
    shifted = model.translated([5.0, -3.0])
    a = mc_run(process_design(model, 2, 2, 0.8), 600, 8)
    b = mc_run(process_design(shifted, 2, 2, 0.8), 600, 9)
    assert np.all(np.abs(a.mean - b.mean) <= 3 * np.sqrt(a.se**2 + b.se**2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_rank_two_section_constant(n):
    """The s=2 rank-two coefficient 2 pi^2 omega_n / omega_{n+3} / (4 pi) equals the
    Q(L) coefficient (n+1) omega_n / (4 omega_{n+1}) of G_2."""
    a = 2 * pi**2 * omega(n) / omega(n + 3) / (4 * pi)
    b = (n + 1) * omega(n) / (4 * omega(n + 1))
    assert a == pytest.approx(b, rel=1e-13)
    u = np.eye(n)[0]
    G = G_s(u, n, 2)
    assert G.allclose(line_metric(u) * b - metric_tensor(n) * (omega(n) / (4 * omega(n + 1))), rtol=1e-12)


def test_disk_section_matches_ground_truth():
    r = 0.1
    assert surface_tensor(Ball(np.zeros(2), r), 2).allclose(metric_tensor(2) * (r / 8), rtol=1e-12)
