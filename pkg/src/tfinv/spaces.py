"""Concrete Hilbert spaces on sampled functions, translation-modulation, and the weight v0.

Three models:

* ``PlainL2``    -- the L2 norm; translation and modulation are unitary.
* ``WeightedL2`` -- int w |f|^2 with a banded weight m <= w <= M, hence
  admissible with C0 = sqrt(M/m).
* ``SobolevHs``  -- int (1+|w|^2)^s |f^|^2 dw/(2pi)^d; modulation is unbounded
  in the sense that v0(0, xi) grows like |xi|^s. This is the negative control.

``shifted_norm_sq(f, x, xi)`` returns ||exp(i<., xi>) f(. - x)||^2 through the
change of variables y -> y + x (weights) or w -> w + xi (Sobolev), so callers
never need to move f on the grid; ``mod_translate`` is the explicit grid path.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .hermite import (DEFAULT_TOLERANCES, Grid, GridFunction, HermiteExpansion, SupportLeakageError,
                      default_grid_for, synthesize)


# ---------------------------------------------------------------------------
# translation / modulation on the grid

def snap(x, spacing: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Nearest grid-commensurate shift: (index shift, snapped shift, snap error)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.rint(x / spacing).astype(np.int64)
    snapped = k * spacing
    return k, snapped, float(np.max(np.abs(snapped - x))) if x.size else 0.0


def mod_translate(f: GridFunction, x, xi, tol: float = DEFAULT_TOLERANCES.tail) -> GridFunction:
    """exp(i<., xi>) f(. - x): exact index shift, then nodewise phase."""
    d = f.dimension
    x = np.broadcast_to(np.asarray(x, dtype=float), (d,))
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (d,))
    k, xs, err = snap(x, f.spacing)
    s = f.samples
    peak = np.abs(s).max() if s.size else 0.0
    for ax in range(d):
        shift = int(k[ax])
        if shift == 0:
            continue
        n = s.shape[ax]
        if abs(shift) >= n:
            lost = np.abs(s).max()
        else:
            lost_idx = np.arange(n - shift, n) if shift > 0 else np.arange(0, -shift)
            lost = np.abs(np.take(s, lost_idx, axis=ax)).max()
        if peak > 0 and lost > tol * peak:
            raise SupportLeakageError(f"shift {xs[ax]} pushes the support off the grid")
        s = np.roll(s, shift, axis=ax)
        fill = [slice(None)] * d
        fill[ax] = slice(0, shift) if shift > 0 else slice(n + shift, n)
        s[tuple(fill)] = 0
    pts = f.grid.points()
    s = s * np.exp(1j * (pts @ xi))
    src = None
    if f.source is not None:
        base = f.source
        src = lambda p: np.exp(1j * (p @ xi)) * base(p - xs)
    return GridFunction(f.grid, s, src, f.shift_error + err)


# ---------------------------------------------------------------------------
# weights

@dataclass(frozen=True)
class Weight:
    """Positive banded weight with declared bounds lower <= w <= upper."""

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    lower: float
    upper: float

    def __call__(self, points) -> np.ndarray:
        return self.func(np.asarray(points, dtype=float))


def constant_weight(c: float) -> Weight:
    if c <= 0:
        raise ValueError("constant weight must be positive")
    return Weight(f"const:{c:g}", lambda p: np.full(p.shape[:-1], float(c)), c, c)


def sine_weight() -> Weight:
    """w(y) = 2 + mean_j sin(y_j); 1 <= w <= 3 with mean value 2."""
    return Weight("2+sin", lambda p: 2.0 + np.mean(np.sin(p), axis=-1), 1.0, 3.0)


def step_weight(a: float, b: float, width: float) -> Weight:
    """Smoothed step from a (y_1 -> -inf) to b (y_1 -> +inf)."""
    if min(a, b) <= 0 or width <= 0:
        raise ValueError("step weight needs positive levels and width")
    return Weight(f"step:{a:g},{b:g},{width:g}",
                  lambda p: a + (b - a) * 0.5 * (1.0 + np.tanh(p[..., 0] / width)),
                  min(a, b), max(a, b))


def parse_weight(spec: str) -> Weight:
    spec = spec.strip()
    if spec == "2+sin":
        return sine_weight()
    if spec.startswith("const:"):
        return constant_weight(float(spec[6:]))
    if spec.startswith("step:"):
        a, b, width = (float(v) for v in spec[5:].split(","))
        return step_weight(a, b, width)
    raise ValueError(f"unknown weight {spec!r}")


def sine_weight_v0(x, xi=None) -> np.ndarray:
    """Exact v0 of the 2+sin weighted space in d = 1.

    v0(x, xi)^2 = max_y (2 + sin(y + x)) / (2 + sin y), the larger root of
    3 r^2 - (8 - 2 cos x) r + 3 = 0; independent of xi.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim and x.shape[-1] == 1:
        x = x[..., 0]
    b = 8.0 - 2.0 * np.cos(x)
    return np.sqrt((b + np.sqrt(b * b - 36.0)) / 6.0)


# ---------------------------------------------------------------------------
# models

class SpaceModel:
    """Hilbert space on grid functions. Subclasses define the inner product."""

    kind = "abstract"
    translation_invariant = False
    modulation_invariant = False

    def __init__(self, dimension: int = 1):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    # C0 in ||exp(i<., xi>) f(. - x)|| <= C0 ||f||; math.inf when no bound exists
    @property
    def declared_C0(self) -> float:
        raise NotImplementedError

    def shifted_inner(self, f: GridFunction, g: GridFunction, x=None, xi=None) -> complex:
        raise NotImplementedError

    def shifted_norm_sq(self, f: GridFunction, x=None, xi=None) -> float:
        return float(self.shifted_inner(f, f, x, xi).real)

    def shifted_norm_sq_many(self, f: GridFunction, xs: np.ndarray, xis: np.ndarray) -> np.ndarray:
        return np.array([self.shifted_norm_sq(f, x, xi) for x, xi in zip(xs, xis)])

    def shifted_inner_many(self, f, g, xs, xis) -> np.ndarray:
        return np.array([self.shifted_inner(f, g, x, xi) for x, xi in zip(xs, xis)])

    def inner(self, f: GridFunction, g: GridFunction) -> complex:
        self._check(f)
        self._check(g)
        return self.shifted_inner(f, g)

    def norm(self, f: GridFunction) -> float:
        self._check(f)
        return math.sqrt(max(self.shifted_norm_sq(f), 0.0))

    def expansion_norm(self, c: HermiteExpansion, grid: Grid | None = None) -> float:
        return self.norm(synthesize(c, grid or default_grid_for(c)))

    def _check(self, f: GridFunction):
        if f.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        f.check_support()

    def _vec(self, v) -> np.ndarray:
        if v is None:
            return np.zeros(self.dimension)
        return np.broadcast_to(np.asarray(v, dtype=float), (self.dimension,))

    def describe(self) -> dict:
        return {"kind": self.kind, "d": self.dimension}


class PlainL2(SpaceModel):
    kind = "PlainL2"
    translation_invariant = True
    modulation_invariant = True

    @property
    def declared_C0(self) -> float:
        return 1.0

    def shifted_inner(self, f, g, x=None, xi=None) -> complex:
        return complex(np.sum(f.samples * np.conj(g.samples)) * f.grid.cell_volume)

    def shifted_inner_many(self, f, g, xs, xis):
        return np.full(len(xs), self.shifted_inner(f, g))


class WeightedL2(SpaceModel):
    kind = "WeightedL2"
    modulation_invariant = True

    def __init__(self, weight: Weight | str, dimension: int = 1):
        super().__init__(dimension)
        self.weight = parse_weight(weight) if isinstance(weight, str) else weight

    @property
    def declared_C0(self) -> float:
        return math.sqrt(self.weight.upper / self.weight.lower)

    def shifted_inner(self, f, g, x=None, xi=None) -> complex:
        x = self._vec(x)
        w = self.weight(f.grid.points() + x)
        return complex(np.sum(w * f.samples * np.conj(g.samples)) * f.grid.cell_volume)

    def shifted_inner_many(self, f, g, xs, xis, chunk: int = 256):
        pts = f.grid.points().reshape(-1, self.dimension)
        prod = (f.samples * np.conj(g.samples)).reshape(-1)
        mask = prod != 0
        pts, prod = pts[mask], prod[mask]
        xs = np.asarray(xs, dtype=float).reshape(-1, self.dimension)
        out = np.empty(len(xs), dtype=complex)
        for i in range(0, len(xs), chunk):
            block = xs[i:i + chunk]
            w = self.weight(pts[None, :, :] + block[:, None, :])
            out[i:i + chunk] = w @ prod
        return out * f.grid.cell_volume

    def shifted_norm_sq_many(self, f, xs, xis):
        return self.shifted_inner_many(f, f, xs, xis).real

    def describe(self) -> dict:
        return {"kind": self.kind, "d": self.dimension, "params": {"weight": self.weight.name}}


class SobolevHs(SpaceModel):
    kind = "SobolevHs"
    translation_invariant = True

    def __init__(self, s: float, dimension: int = 1):
        super().__init__(dimension)
        if s <= 0:
            raise ValueError("Sobolev order must be positive")
        self.s = float(s)

    @property
    def declared_C0(self) -> float:
        return math.inf

    def _spectrum(self, f: GridFunction):
        h = f.spacing
        n = f.grid.axis_count
        F = np.fft.fftn(f.samples) * h ** self.dimension
        omega = 2 * np.pi * np.fft.fftfreq(n, d=h)
        axes = np.meshgrid(*([omega] * self.dimension), indexing="ij")
        return F, np.stack(axes, axis=-1), (1.0 / (n * h)) ** self.dimension

    def shifted_inner(self, f, g, x=None, xi=None) -> complex:
        xi = self._vec(xi)
        F, omega, dmu = self._spectrum(f)
        G = F if g is f else self._spectrum(g)[0]
        mult = (1.0 + np.sum((omega + xi) ** 2, axis=-1)) ** self.s
        return complex(np.sum(mult * F * np.conj(G)) * dmu)

    def shifted_inner_many(self, f, g, xs, xis):
        F, omega, dmu = self._spectrum(f)
        G = F if g is f else self._spectrum(g)[0]
        prod = (F * np.conj(G)).reshape(-1)
        om = omega.reshape(-1, self.dimension)
        xis = np.asarray(xis, dtype=float).reshape(-1, self.dimension)
        out = np.empty(len(xis), dtype=complex)
        for i, xi in enumerate(xis):
            mult = (1.0 + np.sum((om + xi) ** 2, axis=-1)) ** self.s
            out[i] = mult @ prod
        return out * dmu

    def shifted_norm_sq_many(self, f, xs, xis):
        return self.shifted_inner_many(f, f, xs, xis).real

    def describe(self) -> dict:
        return {"kind": self.kind, "d": self.dimension, "params": {"s": self.s}}


def make_model(kind: str, d: int = 1, params: dict | None = None) -> SpaceModel:
    params = params or {}
    if kind == "PlainL2":
        return PlainL2(d)
    if kind == "WeightedL2":
        return WeightedL2(params.get("weight", "2+sin"), d)
    if kind == "SobolevHs":
        return SobolevHs(params.get("s", 1.0), d)
    raise ValueError(f"unknown space model {kind!r}")


# ---------------------------------------------------------------------------
# v0

@dataclass(frozen=True)
class WeightEstimate:
    """Sampled lower estimate of v0 on a phase grid with its two growth fits."""

    xs: np.ndarray
    xis: np.ndarray
    values: np.ndarray
    fit: dict            # {"C", "r", "residual", "r2"}: v0 ~ C exp(r(|x|+|xi|))
    poly_fit: dict       # {"C0", "N", "residual", "r2"}: v0 ~ C0 (1+|x|+|xi|)^N

    def value_at(self, x, xi) -> float:
        i = _find_point(self.xs, self.xis, x, xi)
        if i is None:
            raise KeyError((x, xi))
        return float(self.values[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.xs.shape[1]
        w.writerow([f"x{j}" for j in range(d)] + [f"xi{j}" for j in range(d)]
                   + ["v0", "exp_C", "exp_r", "poly_C0", "poly_N"])
        for x, xi, v in zip(self.xs, self.xis, self.values):
            w.writerow([repr(float(a)) for a in x] + [repr(float(a)) for a in xi]
                       + [repr(float(v)), repr(self.fit["C"]), repr(self.fit["r"]),
                          repr(self.poly_fit["C0"]), repr(self.poly_fit["N"])])
        return buf.getvalue()


def _find_point(xs, xis, x, xi, tol=1e-9):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    hit = np.all(np.abs(xs - x) < tol, axis=1) & np.all(np.abs(xis - xi) < tol, axis=1)
    idx = np.flatnonzero(hit)
    return int(idx[0]) if idx.size else None


def phase_grid(x_values, xi_values, d: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian phase grid; in d > 1 every axis takes the listed values."""
    from itertools import product
    xs = np.array(list(product(x_values, repeat=d)), dtype=float)
    xis = np.array(list(product(xi_values, repeat=d)), dtype=float)
    X = np.repeat(xs, len(xis), axis=0)
    XI = np.tile(xis, (len(xs), 1))
    return X, XI


def default_phase_grid(d: int = 1):
    """Sum-closed lattice |x| <= 16 (step 1/2), |xi| <= 16 (step 2)."""
    return phase_grid(np.arange(-16, 16.001, 0.5), np.arange(-16, 16.001, 2.0), d)


def _loglinear(t, y):
    A = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res * res)) / ss if ss > 0 else 1.0
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res * res))), r2


def fit_weight(xs, xis, values) -> tuple[dict, dict]:
    t = np.sum(np.abs(xs), axis=1) + np.sum(np.abs(xis), axis=1)
    y = np.log(values)
    a, r, res, r2 = _loglinear(t, y)
    a2, N, res2, r22 = _loglinear(np.log1p(t), y)
    return ({"C": math.exp(a), "r": r, "residual": res, "r2": r2},
            {"C0": math.exp(a2), "N": N, "residual": res2, "r2": r22})


def estimate_v0(space: SpaceModel, family, xs, xis) -> WeightEstimate:
    """max over the family of ||exp(i<., xi>) f(. - x)|| / ||f|| at every phase point."""
    family = list(family)
    if not family:
        raise ValueError("test family is empty")
    xs = np.asarray(xs, dtype=float).reshape(-1, space.dimension)
    xis = np.asarray(xis, dtype=float).reshape(-1, space.dimension)
    best = np.zeros(len(xs))
    used = 0
    for f in family:
        base = space.norm(f) ** 2
        if base <= 0:
            continue
        used += 1
        ratios = np.sqrt(np.maximum(space.shifted_norm_sq_many(f, xs, xis), 0.0) / base)
        best = np.maximum(best, ratios)
    if not used:
        raise ValueError("degenerate test family: every member has zero norm")
    fit, poly = fit_weight(xs, xis, best)
    return WeightEstimate(xs, xis, best, fit, poly)


def exact_v0_estimate(v0: Callable, xs, xis) -> WeightEstimate:
    xs = np.asarray(xs, dtype=float)
    xis = np.asarray(xis, dtype=float)
    vals = np.asarray(v0(xs, xis), dtype=float).reshape(-1)
    fit, poly = fit_weight(xs, xis, vals)
    return WeightEstimate(xs, xis, vals, fit, poly)


def sum_closed_triples(xs, xis, tol: float = 1e-9):
    """Index triples (i, j, k) with point_i + point_j = point_k on the grid."""
    P = np.hstack([xs, xis])
    Q = np.round(P / tol).astype(np.int64)
    lo = Q.min(axis=0)
    span = Q.max(axis=0) - lo
    # affine code valid for sums of two points: coordinates shifted by 2*lo
    base = np.cumprod(np.concatenate([[1], 2 * span[:-1] + 1]))
    codes = (Q - 2 * lo) @ base
    order_ = np.argsort(codes)
    sorted_codes = codes[order_]
    triples = []
    for i in range(len(P)):
        s = Q[i] + Q[i:]
        inside = np.all((s >= lo) & (s <= lo + span), axis=1)
        js = np.flatnonzero(inside)
        c = (s[js] - 2 * lo) @ base
        pos = np.searchsorted(sorted_codes, c)
        pos = np.minimum(pos, len(sorted_codes) - 1)
        hit = sorted_codes[pos] == c
        for j, k in zip(js[hit] + i, order_[pos[hit]]):
            triples.append((i, j, k))
    return np.array(triples, dtype=np.int64).reshape(-1, 3)


def submultiplicativity_defect(est: WeightEstimate, triples=None) -> float:
    """max of v0(p + q) - v0(p) v0(q) over sum-closed triples, clipped at 0."""
    if triples is None:
        triples = sum_closed_triples(est.xs, est.xis)
    if len(triples) == 0:
        raise ValueError("no sum-closed triples available on this phase grid")
    v = est.values
    gap = v[triples[:, 2]] - v[triples[:, 0]] * v[triples[:, 1]]
    return float(max(gap.max(), 0.0))


def slack_budget(est: WeightEstimate, fraction: float = 0.05) -> float:
    return fraction * float(est.values.max())


@dataclass(frozen=True)
class Admissibility:
    verdict: str          # "admissible" | "hypothesis-violated" | "inconclusive"
    C0: float
    max_v0: float
    fit: dict
    poly_fit: dict


def admissibility(space: SpaceModel, est: WeightEstimate, rate_tol: float = 0.01,
                  growth_min: float = 0.5, r2_min: float = 0.9) -> Admissibility:
    """Verdict on the uniform bound C0 for translation-modulation.

    A finite declared C0 is accepted when the sampled v0 stays below it. Without
    one, the model is flagged hypothesis-violating when v0 grows with both a
    positive exponential rate and a polynomial degree backed by a good fit.
    """
    C0 = space.declared_C0
    vmax = float(est.values.max())
    if math.isfinite(C0):
        ok = vmax <= C0 * (1 + 1e-9)
        return Admissibility("admissible" if ok else "hypothesis-violated", C0, vmax,
                             est.fit, est.poly_fit)
    growing = (est.fit["r"] > rate_tol and est.poly_fit["N"] > growth_min
               and est.poly_fit["r2"] > r2_min)
    return Admissibility("hypothesis-violated" if growing else "inconclusive", C0, vmax,
                         est.fit, est.poly_fit)
