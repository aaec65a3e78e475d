"""Classify Hermite coefficient sequences into the chain

    H_flat  <  Sigma1  <  Schwartz  <  SchwartzDual  <  Sigma1Dual  <  H_flatDual

by the growth of the shell maxima M_n = max_{|alpha| = n} |c(alpha)|.

Each space is a coefficient law at one of three growth scales:

    H_flat       |c| <~ h^n n!^(-1/2)        for some h
    Sigma1       |c| <~ exp(-r sqrt(n))      for every r
    Schwartz     |c| <~ (1 + n)^(-r)         for every r
    SchwartzDual |c| <~ (1 + n)^r            for some r
    Sigma1Dual   |c| <~ exp(r sqrt(n))       for some r
    H_flatDual   |c| <~ h^n n!^(1/2)         for every h

Finite data cannot decide "for every r" literally. The upper half of the
shells is split into two windows and log M_n is regressed on each growth
scale s in (log(1+n), sqrt(n), n, log n!) in both windows. The ratio q_s of
the two slopes is > 1 on scales slower than the sequence's own and < 1 on
faster ones; where log q_s crosses zero gives a scale position p (0 for
polynomial, 1 for sqrt, 2 for exponential, 3 for factorial behaviour, and
fractional in between). "Some" laws at scale k accept p <= k + tol, "every"
laws need decay with p >= k + tol, so a sequence sitting exactly on an
"every" boundary lands in the coarser class.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import gammaln

from .hermite import HermiteExpansion

CHAIN = ("H_flat", "Sigma1", "Schwartz", "SchwartzDual", "Sigma1Dual", "H_flatDual", "Unbounded")
RANK = {tag: i for i, tag in enumerate(CHAIN)}

SCALE_NAMES = ("log", "sqrt", "linear", "factorial")
DEFAULT_TOL = 0.25
MIN_ORDER = 8
MIN_TAIL_SHELLS = 4


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Fit:
    intercept: float
    slope: float
    residual: float


@dataclass(frozen=True)
class ScalePosition:
    trend: int               # -1 decaying, 0 flat, +1 growing (on the last window)
    position: float          # nan when the trend reverses between windows
    log_ratios: tuple        # log q_s per scale


@dataclass(frozen=True)
class GrowthProfile:
    shells: tuple            # (n, log M_n) with M_n > 0
    order: int
    zero: bool = False
    finite: bool = False
    fits: dict = field(default_factory=dict)
    law: str = ""
    h_exp: float = math.nan
    r_sub: float = math.nan
    poly_deg: float = math.nan
    positions: dict = field(default_factory=dict)
    scale_fits: dict = field(default_factory=dict)   # "<kind>:<k>" -> slower pair fits as well

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "zero": self.zero,
            "finite": self.finite,
            "law": self.law,
            "h_exp": _num(self.h_exp),
            "r_sub": _num(self.r_sub),
            "poly_deg": _num(self.poly_deg),
            "fits": {k: {kk: _num(vv) for kk, vv in asdict(v).items()} for k, v in self.fits.items()},
            "positions": {k: {"trend": v.trend, "position": _num(v.position)}
                          for k, v in self.positions.items()},
            "scale_fits": dict(self.scale_fits),
            "shells": [[int(n), _num(L)] for n, L in self.shells],
        }


@dataclass(frozen=True)
class SpaceClass:
    tag: str
    margin: float
    laws: dict = field(default_factory=dict)     # tag -> (holds, separation)
    boundary: bool = False


def _num(x):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def shell_maxima(c: HermiteExpansion) -> np.ndarray:
    """M_n for n = 0..truncation_order (zero where no index is stored)."""
    M = np.zeros(c.truncation_order + 1)
    if len(c):
        n = c.alphas.sum(axis=1)
        np.maximum.at(M, n, np.abs(c.coeffs))
    return M


def _lsq(x, y) -> Fit:
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return Fit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res * res))))


def _scales(n):
    n = np.asarray(n, dtype=float)
    return (np.log1p(n), np.sqrt(n), n, gammaln(n + 1.0))


def _window_slopes(n, u, s):
    mid = 0.5 * (n[0] + n[-1])
    lo = n <= mid
    hi = n >= mid
    return _lsq(s[lo], u[lo]).slope, _lsq(s[hi], u[hi]).slope


def scale_position(n, u) -> ScalePosition:
    """Locate the growth scale of the sequence u_n (see module docstring)."""
    n = np.asarray(n, dtype=float)
    u = np.asarray(u, dtype=float)
    scales = _scales(n)
    tiny = 1e-12 * max(1.0, float(np.abs(u).max()))
    slopes = [_window_slopes(n, u, s) for s in scales]
    rho_lin = slopes[2][1]
    if abs(rho_lin) * (n[-1] - n[0]) <= tiny:
        return ScalePosition(0, -math.inf, (0.0,) * 4)
    trend = 1 if rho_lin > 0 else -1
    lq = []
    for r1, r2 in slopes:
        if r1 * r2 <= 0 or abs(r1) <= tiny:
            return ScalePosition(trend, math.nan, tuple(lq))
        lq.append(math.log(r2 / r1))
    lq = tuple(lq)
    if lq[0] <= 0:
        step = lq[0] - lq[1]
        p = lq[0] / step if step > 0 else 0.0
        return ScalePosition(trend, min(p, 0.0), lq)
    for k in range(1, 4):
        if lq[k] <= 0:
            return ScalePosition(trend, (k - 1) + lq[k - 1] / (lq[k - 1] - lq[k]), lq)
    step = lq[2] - lq[3]
    p = 3.0 + lq[3] / step if step > 0 else math.inf
    return ScalePosition(trend, p, lq)


def _residual(cols, u) -> float:
    A = np.column_stack(cols + [np.ones_like(u)])
    coef, *_ = np.linalg.lstsq(A, u, rcond=None)
    res = u - A @ coef
    return float(np.sqrt(np.mean(res * res)))


def slower_pair_fits(n, u, k: int, factor: float = 0.5) -> bool:
    """True when scales (s_k, s_k-1) explain u decisively better than (s_k+1, s_k).

    Catches growth at scale k with a slowly varying lower-order correction,
    e.g. exp(2 sqrt n) (1+n)^-2, whose window slopes drift upward and so look
    faster than scale k to ``scale_position``. On noisy data the two residuals
    tie and the position test alone decides.
    """
    s = _scales(n)
    slower = [s[k]] + ([s[k - 1]] if k > 0 else [])
    faster = [s[k + 1]] + ([s[k]] if k > 0 else [])
    u = np.asarray(u, dtype=float)
    return _residual(slower, u) <= factor * _residual(faster, u)


def profile(c: HermiteExpansion) -> GrowthProfile:
    """Shell maxima of c and the tail fits of log M_n against each law."""
    N = c.truncation_order
    if N < MIN_ORDER:
        raise ProfileError(f"truncation order {N} < {MIN_ORDER}: too few shells to fit")
    M = shell_maxima(c)
    n_all = np.arange(N + 1)
    keep = M > 0
    shells = tuple((int(n), float(np.log(m))) for n, m in zip(n_all[keep], M[keep]))
    if not keep.any():
        return GrowthProfile(shells, N, zero=True, law="zero")
    tail = keep & (n_all >= math.ceil(N / 2))
    if not tail.any():
        return GrowthProfile(shells, N, finite=True, law="finite")
    if tail.sum() < MIN_TAIL_SHELLS:
        raise ProfileError(f"only {int(tail.sum())} nonzero tail shells; need {MIN_TAIL_SHELLS}")

    n = n_all[tail].astype(float)
    L = np.log(M[tail])
    half_lf = 0.5 * gammaln(n + 1.0)
    fits = {
        "factorial-minus": _lsq(n, L + half_lf),
        "factorial-plus": _lsq(n, L - half_lf),
        "exponential": _lsq(n, L),
        "sub-exponential": _lsq(-np.sqrt(n), L),
        "polynomial": _lsq(np.log1p(n), L),
    }
    law = min(fits, key=lambda k: fits[k].residual)
    h_exp = fits["factorial-minus"].slope if law != "factorial-plus" else fits["factorial-plus"].slope
    positions = {
        "plain": scale_position(n, L),
        "minus": scale_position(n, L + half_lf),
        "plus": scale_position(n, L - half_lf),
    }
    scale_fits = {
        "minus:2": slower_pair_fits(n, L + half_lf, 2),
        "plain:0": slower_pair_fits(n, L, 0),
        "plain:1": slower_pair_fits(n, L, 1),
    }
    return GrowthProfile(shells, N, fits=fits, law=law, h_exp=h_exp,
                         r_sub=fits["sub-exponential"].slope,
                         poly_deg=fits["polynomial"].slope, positions=positions,
                         scale_fits=scale_fits)


def _some_law(pos: ScalePosition, k: int, tol: float, slower_fits: bool = False):
    """(holds, separation) for |u| <~ exp(rho s_k) for some rho."""
    if pos.trend <= 0:
        return True, math.inf
    if math.isnan(pos.position):
        return slower_fits, math.inf
    gap = (k + tol) - pos.position
    return gap >= 0 or slower_fits, abs(gap)


def _every_law(pos: ScalePosition, k: int, tol: float):
    """(holds, separation) for |u| <~ exp(-rho s_k) for every rho."""
    if pos.trend >= 0 or math.isnan(pos.position):
        return False, math.inf
    gap = pos.position - (k + tol)
    return gap >= 0, abs(gap)


def law_checks(prof: GrowthProfile, tol: float = DEFAULT_TOL) -> dict:
    """Each class's defining law evaluated on the profile: tag -> (holds, separation)."""
    if prof.zero or prof.finite:
        return {tag: (True, math.inf) for tag in CHAIN[:-1]}
    p = prof.positions
    own = {
        "H_flat": _some_law(p["minus"], 2, tol, prof.scale_fits["minus:2"]),
        "Sigma1": _every_law(p["plain"], 1, tol),
        "Schwartz": _every_law(p["plain"], 0, tol),
        "SchwartzDual": _some_law(p["plain"], 0, tol, prof.scale_fits["plain:0"]),
        "Sigma1Dual": _some_law(p["plain"], 1, tol, prof.scale_fits["plain:1"]),
        "H_flatDual": _every_law(p["plus"], 2, tol),
    }
    # the classes are nested, so a finer law that holds implies every coarser
    # one; a finite-window fit of the coarser law alone can miss this when two
    # scales are mixed (e.g. a bounded sequence tested against n!^(1/2))
    out = {}
    implied = None
    for tag in CHAIN[:-1]:
        holds, sep = own[tag]
        if not holds and implied is not None:
            holds, sep = True, implied
        out[tag] = (holds, sep)
        if holds and implied is None:
            implied = sep
    return out


def classify_profile(prof: GrowthProfile, tol: float = DEFAULT_TOL) -> SpaceClass:
    laws = law_checks(prof, tol)
    if prof.zero or prof.finite:
        return SpaceClass("H_flat", math.inf, laws)
    # walk up from the coarsest class; the answer is the finest class whose
    # law and all coarser laws hold
    accepted = "Unbounded"
    rejected_sep = math.inf
    for tag in reversed(CHAIN[:-1]):
        holds, sep = laws[tag]
        if not holds:
            rejected_sep = sep
            break
        accepted = tag
    if accepted == "H_flat":
        margin = laws["H_flat"][1]
    else:
        margin = rejected_sep
    return SpaceClass(accepted, margin, laws, boundary=margin < tol)


def classify(c: HermiteExpansion, tol: float = DEFAULT_TOL) -> SpaceClass:
    """Finest class of the embedding chain whose coefficient law the tail of c satisfies."""
    return classify_profile(profile(c), tol)


def coarser_or_equal(a: str, b: str) -> bool:
    return RANK[a] >= RANK[b]


def report(c: HermiteExpansion, tol: float = DEFAULT_TOL) -> dict:
    prof = profile(c)
    cls = classify_profile(prof, tol)
    body = prof.to_json()
    return {
        "tag": cls.tag,
        "margin": _num(cls.margin),
        "boundary": cls.boundary,
        "laws": {k: {"holds": bool(h), "separation": _num(s)} for k, (h, s) in cls.laws.items()},
        "fits": body["fits"],
        "law": prof.law,
        "shells": body["shells"],
    }


def report_json(c: HermiteExpansion, tol: float = DEFAULT_TOL) -> str:
    return json.dumps(report(c, tol), sort_keys=True)


def sequence_expansion(law, N: int, dimension: int = 1) -> HermiteExpansion:
    """Expansion whose coefficient at alpha is law(|alpha|, alpha!) (both arrays)."""
    def coeffs(alphas):
        n = alphas.sum(axis=1).astype(float)
        lf = gammaln(alphas + 1.0).sum(axis=1)
        return law(n, lf)
    return HermiteExpansion.from_function(dimension, N, coeffs)


CANONICAL_LAWS = {
    # log-magnitude laws in terms of n = |alpha| and lf = log(alpha!)
    "H_flat": lambda n, lf: -0.5 * lf - n * np.log(2.0),
    "Sigma1": lambda n, lf: -n,
    "Schwartz": lambda n, lf: -np.log1p(n) ** 2,
    "SchwartzDual": lambda n, lf: 3.0 * np.log1p(n),
    "Sigma1Dual": lambda n, lf: 2.0 * np.sqrt(n),
    "H_flatDual": lambda n, lf: n,
    "Unbounded": lambda n, lf: 0.5 * lf - n * np.log(3.0),
}


def canonical_expansion(tag: str, N: int = 48, dimension: int = 1) -> HermiteExpansion:
    law = CANONICAL_LAWS[tag]
    return sequence_expansion(lambda n, lf: np.exp(law(n, lf)), N, dimension)
