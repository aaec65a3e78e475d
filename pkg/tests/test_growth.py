import json
import math

import numpy as np
import pytest
from scipy.special import gammaln

from tfinv import growth as G
from tfinv.hermite import HermiteExpansion


def seq(law, N=48, d=1):
    return G.sequence_expansion(law, N, d)


def random_sequence(rng):
    """A random coefficient sequence drawn from the six scale families with mild noise."""
    kind = int(rng.integers(6))
    a = rng.uniform(0.3, 3.0)
    laws = [
        lambda n, lf: -0.5 * lf - a * n,
        lambda n, lf: -a * n,
        lambda n, lf: -a * np.sqrt(n),
        lambda n, lf: -a * np.log1p(n) ** 2,
        lambda n, lf: a * np.log1p(n),
        lambda n, lf: a * np.sqrt(n),
    ]
    N = int(rng.integers(24, 80))
    d = 1 if rng.random() < 0.75 else 2
    noise = rng.uniform(-0.1, 0.1, size=20000)
    return G.sequence_expansion(lambda n, lf: np.exp(laws[kind](n, lf) + noise[:len(n)]), N, d)


RANDOM_SEQUENCES = [random_sequence(np.random.default_rng(s)) for s in range(200)]


def test_profile_factorial_minus():
    p = G.profile(seq(lambda n, lf: np.exp(-0.5 * lf - n * np.log(2))))
    assert p.law == "factorial-minus"
    assert p.h_exp == pytest.approx(math.log(0.5), abs=1e-6)
    assert p.fits["factorial-minus"].residual < 1e-6


def test_profile_exponential_sub_exponential_rate_diverges():
    rates = [G.profile(seq(lambda n, lf: np.exp(-n), N)).r_sub for N in (20, 40, 80)]
    assert rates[0] < rates[1] < rates[2]
    p = G.profile(seq(lambda n, lf: np.exp(-n), 40))
    assert p.law != "factorial-minus"
    assert p.fits["factorial-minus"].residual > p.fits["exponential"].residual


def test_profile_polynomial_degree():
    p = G.profile(seq(lambda n, lf: (1 + n) ** -3.0))
    assert p.poly_deg == pytest.approx(-3.0, abs=0.05)


def test_profile_errors_and_degenerate_inputs():
    with pytest.raises(G.ProfileError):
        G.profile(HermiteExpansion.random(1, 5))
    zero = HermiteExpansion.zeros(1, 20)
    cls = G.classify(zero)
    assert cls.tag == "H_flat" and cls.margin == math.inf
    finite = HermiteExpansion.from_dict({(1,): 1.0}, 1, truncation_order=20)
    assert G.classify(finite).tag == "H_flat"


def test_residuals_nonnegative_and_deterministic():
    c = RANDOM_SEQUENCES[0]
    a, b = G.report_json(c), G.report_json(c)
    assert a == b
    assert all(f.residual >= 0 for f in G.profile(c).fits.values())


@pytest.mark.parametrize("law,tag", [
    (lambda n, lf: np.exp(-0.5 * lf - n * np.log(4)), "H_flat"),
    (lambda n, lf: np.exp(-2 * np.sqrt(n)), "Schwartz"),
    (lambda n, lf: np.exp(np.sqrt(n)), "Sigma1Dual"),
])
def test_classify_examples(law, tag):
    assert G.classify(seq(law, 60)).tag == tag


def test_fixed_rate_sigma1_boundary_is_coarser_with_margin():
    cls = G.classify(seq(lambda n, lf: np.exp(-2 * np.sqrt(n)), 60))
    assert cls.tag == "Schwartz"
    assert not cls.laws["Sigma1"][0]
    assert cls.margin > 0


@pytest.mark.parametrize("N", [40, 48, 64, 100])
def test_canonical_sequences_distinct_and_ordered(N):
    tags = [G.classify(G.canonical_expansion(t, N)).tag for t in G.CHAIN]
    assert tags == list(G.CHAIN)


def test_canonical_sequences_in_two_dimensions():
    tags = [G.classify(G.canonical_expansion(t, 30, 2)).tag for t in G.CHAIN]
    assert tags == list(G.CHAIN)


def test_lattice_monotonicity_on_random_sequences():
    for c in RANDOM_SEQUENCES:
        cls = G.classify(c)
        laws = G.law_checks(G.profile(c))
        for tag in G.CHAIN[:-1]:
            if G.coarser_or_equal(tag, cls.tag):
                assert laws[tag][0], (cls.tag, tag)


def test_scaling_invariance_on_random_sequences():
    rng = np.random.default_rng(99)
    for c in RANDOM_SEQUENCES:
        lam = complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(-3, 3)
        assert G.classify(c * lam).tag == G.classify(c).tag


def test_margin_positive_when_finer_class_rejected():
    for c in RANDOM_SEQUENCES[:50]:
        cls = G.classify(c)
        if cls.tag != "H_flat":
            assert cls.margin > 0


DAMPINGS = {
    "half": lambda n: 0.5 + 0 * n,
    "exp": lambda n: np.exp(-n / 2),
    "poly2": lambda n: (1 + n) ** -2.0,
    "poly5": lambda n: (1 + n) ** -5.0,
    "sqrt": lambda n: np.exp(-np.sqrt(n)),
    "factorial": lambda n: np.exp(-0.5 * gammaln(n + 1)),
    "log2": lambda n: np.exp(-np.log1p(n) ** 2),
}


@pytest.mark.parametrize("N", [32, 48, 64])
@pytest.mark.parametrize("tag", G.CHAIN)
def test_shell_max_dominance_structured(tag, N):
    law = G.CANONICAL_LAWS[tag]
    base = G.classify(G.canonical_expansion(tag, N)).tag
    for name, damp in DAMPINGS.items():
        smaller = seq(lambda n, lf: np.exp(law(n, lf)) * damp(n), N)
        assert not G.RANK[G.classify(smaller).tag] > G.RANK[base], name


def test_report_json_shape():
    rep = json.loads(G.report_json(G.canonical_expansion("Schwartz")))
    assert {"tag", "margin", "fits", "shells"} <= set(rep)
    assert rep["tag"] == "Schwartz"
