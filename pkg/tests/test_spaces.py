import math

import numpy as np
import pytest

from tfinv import spaces as S
from tfinv.families import parse_generator, sample_family
from tfinv.hermite import Grid, GridFunction, HermiteExpansion, SupportLeakageError

GRID = Grid(1, 1 / 16, 12)


def h0(grid=GRID):
    return sample_family(["hermite:0"], grid)[0]


def narrow_atoms(grid):
    specs = [f"gabor:0.2,{2 * math.pi * k / 8 - math.pi!r},0" for k in range(8)]
    return sample_family(specs, grid)


def test_norm_examples():
    assert S.PlainL2().norm(h0()) == pytest.approx(1.0, abs=1e-8)
    assert S.WeightedL2("const:4").norm(h0()) == pytest.approx(2.0, abs=1e-8)
    assert S.SobolevHs(1.0).norm(h0()) == pytest.approx(math.sqrt(1.5), abs=1e-8)
    assert S.SobolevHs(1.0).norm(h0()) == pytest.approx(1.2247, abs=1e-4)


def test_sobolev_modulation_is_a_frequency_shift():
    f = h0()
    g = S.mod_translate(f, 0.0, 3.0)
    # ||h_0||^2 + ||(h_0 e^{3ix})'||^2 = 1 + 1/2 + 9
    assert S.SobolevHs(1.0).norm(g) == pytest.approx(math.sqrt(10.5), abs=1e-8)
    assert S.SobolevHs(1.0).shifted_norm_sq(f, [0.0], [3.0]) == pytest.approx(10.5, abs=1e-8)


def test_mod_translate_identity_and_exact_shift():
    f = sample_family(["random:3,5"], GRID)[0]
    assert np.array_equal(S.mod_translate(f, 0, 0).samples, f.samples)
    g = S.mod_translate(f, 1.0, 0.0)
    expect = GridFunction.sample(lambda p: parse_generator("random:3,5")(p - 1.0), GRID).samples
    assert np.allclose(g.samples, expect, atol=1e-12)
    assert g.shift_error == 0.0
    snapped = S.mod_translate(f, 1.0 + 1 / 64, 0.0)
    assert snapped.shift_error == pytest.approx(1 / 64)


def test_mod_translate_support_leakage():
    with pytest.raises(SupportLeakageError):
        S.mod_translate(h0(), 11.0, 0.0)


def test_shifted_norm_matches_explicit_shift():
    f = sample_family(["gabor:0.8,1.0,2"], GRID)[0]
    for space in (S.PlainL2(), S.WeightedL2("2+sin"), S.WeightedL2("step:1,3,0.5"), S.SobolevHs(1.0)):
        g = S.mod_translate(f, [1.5], [0.5])
        assert space.shifted_norm_sq(f, [1.5], [0.5]) == pytest.approx(space.norm(g) ** 2, rel=1e-8)


def test_weight_parsing():
    assert S.parse_weight("const:2")(np.array([[0.3]]))[0] == 2
    w = S.parse_weight("step:1,3,0.5")
    assert w.lower == 1 and w.upper == 3
    with pytest.raises(ValueError):
        S.parse_weight("nonsense")
    with pytest.raises(ValueError):
        S.make_model("Banach", 1)


def test_declared_constants():
    assert S.PlainL2().declared_C0 == 1
    assert S.WeightedL2("2+sin").declared_C0 == pytest.approx(math.sqrt(3))
    assert S.SobolevHs(1.0).declared_C0 == math.inf


def test_plain_v0_is_identically_one():
    xs, xis = S.default_phase_grid()
    est = S.estimate_v0(S.PlainL2(), sample_family(["hermite:0", "gaussian:1.5", "random:1,6"], GRID), xs, xis)
    assert np.max(np.abs(est.values - 1)) < 1e-9
    assert S.submultiplicativity_defect(est) == 0.0


def test_exact_sine_weight_v0():
    xs, xis = S.default_phase_grid()
    est = S.exact_v0_estimate(S.sine_weight_v0, xs, xis)
    assert est.value_at([0.0], [0.0]) == pytest.approx(1.0, abs=1e-12)
    assert est.values.max() <= math.sqrt(3) + 1e-12
    assert est.fit["r"] < 0.01


def test_exact_v0_dominates_sampled_family():
    grid = Grid(1, 1 / 32, 10)
    xs, xis = S.phase_grid(np.arange(-4, 4.01, 0.5), [0.0])
    est = S.estimate_v0(S.WeightedL2("2+sin"), narrow_atoms(grid), xs, xis)
    exact = S.sine_weight_v0(xs, xis)
    assert np.all(est.values <= exact + 1e-9)


def test_submultiplicativity_requires_triples():
    est = S.exact_v0_estimate(S.sine_weight_v0, np.array([[1.0]]), np.array([[0.0]]))
    with pytest.raises(ValueError, match="no sum-closed triples"):
        S.submultiplicativity_defect(est)


def test_sum_closed_triples_are_exact():
    xs, xis = S.phase_grid([-1, 0, 1], [-2, 0, 2])
    T = S.sum_closed_triples(xs, xis)
    P = np.hstack([xs, xis])
    assert len(T) > 0
    assert np.allclose(P[T[:, 0]] + P[T[:, 1]], P[T[:, 2]])
    # every admissible pair with i <= j is found
    count = sum(1 for i in range(len(P)) for j in range(i, len(P))
                if any(np.allclose(P[i] + P[j], q) for q in P))
    assert len(T) == count


def test_sobolev_flagged_hypothesis_violating():
    grid = Grid(1, 1 / 16, 32)
    xs, xis = S.phase_grid([0.0], np.arange(0, 16.01, 0.5))
    est = S.estimate_v0(S.SobolevHs(1.0), sample_family(["gaussian:4"], grid), xs, xis)
    adm = S.admissibility(S.SobolevHs(1.0), est)
    assert adm.verdict == "hypothesis-violated"
    assert 0.9 <= est.poly_fit["N"] <= 1.1


def test_estimate_v0_rejects_degenerate_family():
    zero = GridFunction.sample(lambda p: np.zeros(p.shape[:-1]), GRID)
    with pytest.raises(ValueError):
        S.estimate_v0(S.PlainL2(), [zero], np.zeros((1, 1)), np.zeros((1, 1)))
    with pytest.raises(ValueError):
        S.estimate_v0(S.PlainL2(), [], np.zeros((1, 1)), np.zeros((1, 1)))


def test_weight_estimate_csv():
    est = S.exact_v0_estimate(S.sine_weight_v0, *S.phase_grid([0.0, 1.0], [0.0]))
    lines = est.to_csv().strip().splitlines()
    assert lines[0].startswith("x0,xi0,v0")
    assert len(lines) == 3


def test_gaussian_pairing_ratio_bounded_on_weighted_space():
    from tfinv.hermite import gaussian_pairing_bound
    space = S.WeightedL2("2+sin")
    ratios = [gaussian_pairing_bound(HermiteExpansion.random(1, 8, seed=s), space, 1).ratio for s in range(5)]
    assert max(ratios) < 10
