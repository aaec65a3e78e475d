"""Hermite functions, Hermite coefficient expansions and sampled grid functions.

Hermite functions are L2-orthonormal:

    h_n(x) = (2^n n! sqrt(pi))^(-1/2) H_n(x) exp(-x^2/2)

and multi-dimensional ones are tensor products. They are evaluated with the
three-term recurrence on the normalized functions themselves, which stays
finite for the orders used here.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln, roots_hermite

MultiIndex = tuple[int, ...]

MAX_AXIS_ORDER = 512
EXACT_FACTORIAL_LIMIT = 64


@dataclass(frozen=True)
class Tolerances:
    analysis: float = 1e-10
    operator: float = 1e-5
    tail: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()


# ---------------------------------------------------------------------------
# multi-indices

def as_multi_index(alpha: Iterable[int], d: int | None = None) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index entries must be nonnegative: {alpha}")
    if d is not None and len(alpha) != d:
        raise ValueError(f"multi-index {alpha} does not have dimension {d}")
    if len(alpha) < 1:
        raise ValueError("multi-index must have dimension >= 1")
    return alpha


def order(alpha: Sequence[int]) -> int:
    return int(sum(alpha))


def factorial(alpha: Sequence[int]) -> int:
    """Exact alpha! for entries up to 64; use log_factorial beyond."""
    if max(alpha) > EXACT_FACTORIAL_LIMIT:
        raise OverflowError("entry exceeds exact factorial range; use log_factorial")
    return math.prod(math.factorial(a) for a in alpha)


def log_factorial(alpha) -> np.ndarray | float:
    """log(alpha!) for a single multi-index or an (K, d) array of them."""
    a = np.asarray(alpha, dtype=float)
    return gammaln(a + 1.0).sum(axis=-1)


def multi_indices(d: int, N: int) -> np.ndarray:
    """All alpha in N^d with |alpha| <= N, graded lexicographic order, shape (K, d)."""
    if d < 1 or N < 0:
        raise ValueError("need d >= 1 and N >= 0")
    rows = []
    for n in range(N + 1):
        for alpha in _compositions(n, d):
            rows.append(alpha)
    return np.array(rows, dtype=np.int64).reshape(-1, d)


def _compositions(n: int, d: int):
    if d == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, d - 1):
            yield (first,) + rest


def _graded_lex_key(alpha: MultiIndex):
    return (sum(alpha), alpha)


# ---------------------------------------------------------------------------
# Hermite functions

def hermite_table(n_max: int, x) -> np.ndarray:
    """h_0..h_{n_max} at the points x; result has shape (n_max + 1,) + x.shape."""
    if n_max > MAX_AXIS_ORDER:
        raise ValueError(f"order {n_max} exceeds validated recurrence range {MAX_AXIS_ORDER}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_eval(alpha: Sequence[int], points) -> np.ndarray:
    """Values of the orthonormal Hermite function h_alpha at points of shape (P, d)."""
    alpha = as_multi_index(alpha)
    d = len(alpha)
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and d == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValueError(f"points must have shape (P, {d})")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    if max(alpha) > MAX_AXIS_ORDER:
        raise ValueError(f"order per axis > {MAX_AXIS_ORDER} rejected")
    vals = np.ones(pts.shape[0])
    for j, a in enumerate(alpha):
        vals = vals * hermite_table(a, pts[:, j])[a]
    return vals


# ---------------------------------------------------------------------------
# expansions

@dataclass(frozen=True)
class HermiteExpansion:
    """Finite expansion sum_alpha c(alpha) h_alpha.

    ``alphas`` is an (K, d) integer array in graded lexicographic order and
    ``coeffs`` the matching complex coefficients.
    """

    dimension: int
    alphas: np.ndarray
    coeffs: np.ndarray
    truncation_order: int

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.int64).reshape(-1, self.dimension)
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if alphas.shape[0] != coeffs.shape[0]:
            raise ValueError("alphas and coeffs length mismatch")
        if np.any(alphas < 0):
            raise ValueError("negative multi-index entry")
        if alphas.size and alphas.sum(axis=1).max() > self.truncation_order:
            raise ValueError("stored index exceeds truncation_order")
        keys = [tuple(int(v) for v in a) for a in alphas]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate multi-index")
        perm = sorted(range(len(keys)), key=lambda i: _graded_lex_key(keys[i]))
        alphas = alphas[perm]
        coeffs = coeffs[perm]
        alphas.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_dict(cls, coeffs: Mapping[Sequence[int], complex], dimension: int | None = None,
                  truncation_order: int | None = None) -> "HermiteExpansion":
        items = [(as_multi_index(a, dimension), complex(c)) for a, c in coeffs.items()]
        if dimension is None:
            if not items:
                raise ValueError("dimension required for an empty expansion")
            dimension = len(items[0][0])
        alphas = np.array([a for a, _ in items], dtype=np.int64).reshape(-1, dimension)
        vals = np.array([c for _, c in items], dtype=complex)
        if truncation_order is None:
            truncation_order = int(alphas.sum(axis=1).max()) if len(items) else 0
        return cls(dimension, alphas, vals, truncation_order)

    @classmethod
    def zeros(cls, dimension: int, N: int) -> "HermiteExpansion":
        alphas = multi_indices(dimension, N)
        return cls(dimension, alphas, np.zeros(len(alphas), dtype=complex), N)

    @classmethod
    def from_function(cls, dimension: int, N: int, law: Callable[[np.ndarray], np.ndarray]):
        """Dense expansion with c(alpha) = law(alphas) for all |alpha| <= N."""
        alphas = multi_indices(dimension, N)
        return cls(dimension, alphas, np.asarray(law(alphas), dtype=complex), N)

    @classmethod
    def random(cls, dimension: int, N: int, seed: int = 0) -> "HermiteExpansion":
        rng = np.random.default_rng(seed)
        alphas = multi_indices(dimension, N)
        c = rng.standard_normal(len(alphas)) + 1j * rng.standard_normal(len(alphas))
        return cls(dimension, alphas, c, N)

    def to_dict(self) -> dict[MultiIndex, complex]:
        return {tuple(int(v) for v in a): complex(c) for a, c in zip(self.alphas, self.coeffs)}

    def __len__(self):
        return len(self.coeffs)

    def coefficient(self, alpha) -> complex:
        alpha = as_multi_index(alpha, self.dimension)
        hit = np.all(self.alphas == np.array(alpha), axis=1)
        return complex(self.coeffs[hit][0]) if hit.any() else 0j

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def _combine(self, other: "HermiteExpansion", sign: complex) -> "HermiteExpansion":
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        merged = self.to_dict()
        for a, c in other.to_dict().items():
            merged[a] = merged.get(a, 0j) + sign * c
        return HermiteExpansion.from_dict(merged, self.dimension,
                                          max(self.truncation_order, other.truncation_order))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        return HermiteExpansion(self.dimension, self.alphas, self.coeffs * complex(scalar),
                                self.truncation_order)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def to_json(self) -> str:
        return json.dumps(expansion_to_json(self))

    @classmethod
    def from_json(cls, text: str) -> "HermiteExpansion":
        return expansion_from_json(json.loads(text))


def expansion_to_json(c: HermiteExpansion) -> dict:
    return {
        "dimension": c.dimension,
        "truncation_order": c.truncation_order,
        "entries": [{"alpha": [int(v) for v in a], "re": float(z.real), "im": float(z.imag)}
                    for a, z in zip(c.alphas, c.coeffs)],
    }


def expansion_from_json(obj: Mapping) -> HermiteExpansion:
    d = int(obj["dimension"])
    entries = obj["entries"]
    alphas = np.array([e["alpha"] for e in entries], dtype=np.int64).reshape(-1, d)
    coeffs = np.array([complex(e["re"], e["im"]) for e in entries], dtype=complex)
    return HermiteExpansion(d, alphas, coeffs, int(obj["truncation_order"]))


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class Grid:
    """Uniform grid with nodes k*spacing, |k| <= floor(radius/spacing), on every axis."""

    dimension: int
    spacing: float
    radius: float

    def __post_init__(self):
        if self.dimension < 1 or self.spacing <= 0 or self.radius <= 0:
            raise ValueError("invalid grid descriptor")

    @property
    def half_count(self) -> int:
        return int(math.floor(self.radius / self.spacing + 1e-9))

    @property
    def axis_count(self) -> int:
        return 2 * self.half_count + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.axis_count,) * self.dimension

    @property
    def axis(self) -> np.ndarray:
        k = np.arange(-self.half_count, self.half_count + 1)
        return k * self.spacing

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (d,)``."""
        axes = np.meshgrid(*([self.axis] * self.dimension), indexing="ij")
        return np.stack(axes, axis=-1)

    def enlarged(self, radius: float) -> "Grid":
        return Grid(self.dimension, self.spacing, radius)


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a Grid.

    ``source`` optionally keeps the exact callable the samples came from, so
    quadratures that need off-grid values (Gauss-Hermite) can use it.
    ``shift_error`` accumulates the snap error of grid translations.
    """

    grid: Grid
    samples: np.ndarray
    source: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    shift_error: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != self.grid.shape:
            raise ValueError(f"samples shape {s.shape} != grid shape {self.grid.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def sample(cls, func: Callable[[np.ndarray], np.ndarray], grid: Grid) -> "GridFunction":
        """Sample ``func`` (taking points of shape (..., d)) on the grid."""
        return cls(grid, np.asarray(func(grid.points()), dtype=complex), source=func)

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    @property
    def radius(self) -> float:
        return self.grid.radius

    def _lift(self, samples, source):
        return GridFunction(self.grid, samples, source, self.shift_error)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        src = _combine_sources(self.source, other.source, lambda a, b: a + b)
        return GridFunction(self.grid, self.samples + other.samples, src,
                            self.shift_error + other.shift_error)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        src = _combine_sources(self.source, other.source, lambda a, b: a - b)
        return GridFunction(self.grid, self.samples - other.samples, src,
                            self.shift_error + other.shift_error)

    def __mul__(self, scalar) -> "GridFunction":
        lam = complex(scalar)
        src = None if self.source is None else (lambda p, f=self.source: lam * f(p))
        return self._lift(self.samples * lam, src)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def boundary_max(self) -> float:
        """Largest modulus on the outer layer of nodes."""
        s = np.abs(self.samples)
        m = 0.0
        for ax in range(s.ndim):
            m = max(m, np.take(s, 0, axis=ax).max(), np.take(s, -1, axis=ax).max())
        return float(m)

    def check_support(self, tol: float = DEFAULT_TOLERANCES.tail):
        peak = np.abs(self.samples).max()
        if peak > 0 and self.boundary_max() > tol * peak:
            raise SupportLeakageError(
                f"boundary samples exceed {tol:g} * max|f| on radius {self.radius}")

    def padded(self, radius: float) -> "GridFunction":
        """Zero-pad (or re-sample from the source) onto a larger radius."""
        big = self.grid.enlarged(radius)
        if big.half_count < self.grid.half_count:
            raise ValueError("padding radius smaller than current radius")
        if self.source is not None:
            out = GridFunction.sample(self.source, big)
            return GridFunction(big, out.samples, self.source, self.shift_error)
        pad = big.half_count - self.grid.half_count
        s = np.pad(self.samples, [(pad, pad)] * self.dimension)
        return GridFunction(big, s, None, self.shift_error)


class SupportLeakageError(ValueError):
    """The grid does not cover the essential support of a function."""


def _check_same_grid(f: GridFunction, g: GridFunction):
    if f.grid != g.grid:
        raise ValueError("grid functions live on different grids")


def _combine_sources(a, b, op):
    if a is None or b is None:
        return None
    return lambda p: op(a(p), b(p))


# ---------------------------------------------------------------------------
# analysis / synthesis

def _tensor_values(alphas: np.ndarray, axis_tables: Sequence[np.ndarray]) -> np.ndarray:
    """h_alpha on a tensor grid from per-axis tables; returns (K,) + grid shape."""
    d = alphas.shape[1]
    out = None
    for j in range(d):
        t = axis_tables[j][alphas[:, j]]          # (K, n_j)
        shape = [len(alphas)] + [1] * d
        shape[j + 1] = t.shape[1]
        t = t.reshape(shape)
        out = t if out is None else out * t
    return out


def gauss_hermite_rule(n_nodes: int):
    """Nodes x_k and scaled weights lambda_k with int f ~ sum lambda_k f(x_k).

    lambda_k = w_k exp(x_k^2) computed as 1 / sum_j h_j(x_k)^2 (Christoffel
    function of the orthonormal Hermite functions), which never overflows.
    """
    x, _ = roots_hermite(n_nodes)
    table = hermite_table(n_nodes - 1, x)
    lam = 1.0 / np.sum(table * table, axis=0)
    return x, lam


def analyze(f, N: int, nodes: int | None = None, dimension: int | None = None) -> HermiteExpansion:
    """Hermite coefficients c(f, alpha) = int f h_alpha for |alpha| <= N.

    ``f`` is a GridFunction or a callable on points of shape (..., d). When an
    exact evaluator is available (a callable, or a GridFunction created by
    ``GridFunction.sample``) the integral uses tensor Gauss-Hermite quadrature
    with ``nodes`` >= 2N + 16 per axis; otherwise the uniform-grid trapezoid
    rule is used on the samples.
    """
    if N < 0:
        raise ValueError("truncation order must be nonnegative")
    min_nodes = 2 * N + 16
    if nodes is None:
        nodes = min_nodes
    if nodes < min_nodes:
        raise ValueError(f"{nodes} quadrature nodes insufficient for order {N} (need {min_nodes})")

    if isinstance(f, GridFunction):
        d = f.dimension
        func = f.source
    else:
        if dimension is None:
            raise ValueError("dimension required when analyzing a callable")
        d = dimension
        func = f

    alphas = multi_indices(d, N)
    if func is not None:
        x, lam = gauss_hermite_rule(nodes)
        axes = np.meshgrid(*([x] * d), indexing="ij")
        pts = np.stack(axes, axis=-1)
        weights = lam
        for _ in range(d - 1):
            weights = np.multiply.outer(weights, lam)
        vals = np.asarray(func(pts), dtype=complex) * weights
        tables = [hermite_table(N, x)] * d
    else:
        if f.grid.axis_count < min_nodes:
            raise ValueError(f"grid has {f.grid.axis_count} nodes per axis, need {min_nodes}")
        vals = f.samples * f.grid.cell_volume
        tables = [hermite_table(N, f.grid.axis)] * d
    basis = _tensor_values(alphas, tables)
    coeffs = basis.reshape(len(alphas), -1) @ vals.reshape(-1)
    return HermiteExpansion(d, alphas, coeffs, N)


def evaluate(c: HermiteExpansion, points) -> np.ndarray:
    """Pointwise sum c(alpha) h_alpha(x) at points of shape (..., d)."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != c.dimension:
        raise ValueError("point dimension mismatch")
    flat = pts.reshape(-1, c.dimension)
    out = np.zeros(flat.shape[0], dtype=complex)
    if len(c):
        n_max = int(c.alphas.max())
        tables = [hermite_table(n_max, flat[:, j]) for j in range(c.dimension)]
        vals = np.ones((len(c), flat.shape[0]))
        for j in range(c.dimension):
            vals = vals * tables[j][c.alphas[:, j]]
        out = c.coeffs @ vals
    return out.reshape(pts.shape[:-1])


def synthesize(c: HermiteExpansion, grid: Grid) -> GridFunction:
    if grid.dimension != c.dimension:
        raise ValueError("grid dimension mismatch")
    alphas = c.alphas
    if len(c):
        n_max = int(alphas.max())
        tables = [hermite_table(n_max, grid.axis)] * c.dimension
        basis = _tensor_values(alphas, tables)
        samples = np.tensordot(c.coeffs, basis, axes=(0, 0))
    else:
        samples = np.zeros(grid.shape, dtype=complex)
    return GridFunction(grid, samples, source=lambda p, c=c: evaluate(c, p))


def as_callable(c: HermiteExpansion) -> Callable[[np.ndarray], np.ndarray]:
    return lambda p: evaluate(c, p)


def pairing(f: HermiteExpansion, phi: HermiteExpansion) -> complex:
    """sum_alpha c(f, alpha) conj(c(phi, alpha)) over the union of stored indices."""
    if f.dimension != phi.dimension:
        raise ValueError("dimension mismatch")
    other = phi.to_dict()
    total = 0j
    for a, c in zip(f.alphas, f.coeffs):
        key = tuple(int(v) for v in a)
        if key in other:
            total += c * np.conj(other[key])
    return complex(total)


def oscillator_eigenvalues(c: HermiteExpansion) -> np.ndarray:
    return 2.0 * c.alphas.sum(axis=1) + c.dimension


def oscillator_power(f: HermiteExpansion, j: int, sign: int = 1) -> HermiteExpansion:
    """Apply H^(sign*j), H = |x|^2 - Laplacian, diagonal on h_alpha with eigenvalue 2|alpha|+d."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    scale = oscillator_eigenvalues(f) ** float(sign * j)
    return HermiteExpansion(f.dimension, f.alphas, f.coeffs * scale, f.truncation_order)


def hj_norm(f: HermiteExpansion, j: int) -> float:
    """Norm of f in the Hilbert space H_j: the L2 norm of H^(-j) f."""
    return oscillator_power(f, j, -1).l2_norm()


def gaussian(dimension: int) -> HermiteExpansion:
    """exp(-|x|^2/2) = pi^(d/4) h_0."""
    return HermiteExpansion.from_dict({(0,) * dimension: np.pi ** (dimension / 4)}, dimension)


@dataclass(frozen=True)
class PairingBound:
    pairing_abs: float
    hj_norm_phi: float
    space_norm: float
    ratio: float


def gaussian_pairing_bound(f: HermiteExpansion, space, j: int) -> PairingBound:
    """|(f, phi)| for phi = exp(-|x|^2/2), ||H^j phi||_L2 and the ratio |(f, phi)| / ||f||_space.

    ``space`` is a space model exposing ``expansion_norm``.
    """
    phi = gaussian(f.dimension)
    p = abs(pairing(f, phi))
    hphi = oscillator_power(phi, j, 1).l2_norm()
    nf = space.expansion_norm(f)
    if nf == 0:
        raise ValueError("zero f has no pairing ratio")
    return PairingBound(p, hphi, nf, p / nf)


def default_grid_for(c: HermiteExpansion, spacing: float = 1.0 / 16, margin: float = 8.0) -> Grid:
    """A grid wide enough for the essential support of a degree-N expansion."""
    radius = math.sqrt(2 * c.truncation_order + 1) + margin
    return Grid(c.dimension, spacing, radius)


def lattice(values: Sequence[float], d: int) -> np.ndarray:
    return np.array(list(product(values, repeat=d)), dtype=float)
