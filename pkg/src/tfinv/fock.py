"""Bargmann transform of finite Hermite expansions and Weyl displacements on Fock space.

The transform is fixed by V h_alpha = e_alpha, e_alpha(z) = z^alpha / sqrt(alpha!),
so it is a relabeling of coefficients. The Hermitian pairing (z, w) conjugates
the second argument. With these conventions

    V(exp(i<., xi>) f(. - x))(z) = exp(i<x, xi>/2) (W_{conj(w)/sqrt 2} V f)(z),  w = x + i xi,

which ``covariance_check`` verifies numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hermite import HermiteExpansion, analyze, as_callable, expansion_to_json, expansion_from_json


def hermitian(z, w) -> np.ndarray:
    """(z, w) = sum_j z_j conj(w_j) along the last axis."""
    return np.sum(np.asarray(z) * np.conj(np.asarray(w)), axis=-1)


def as_points(z, d: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1, 1)
    elif z.ndim == 1:
        z = z.reshape(-1, 1) if d == 1 else z.reshape(1, d)
    if z.shape[-1] != d:
        raise ValueError(f"points must have last axis {d}")
    return z


def split(z) -> tuple[np.ndarray, np.ndarray]:
    """Real pair (x, xi) of z = x + i xi."""
    z = np.asarray(z, dtype=complex)
    return z.real, z.imag


def from_phase(x, xi) -> np.ndarray:
    return np.asarray(x, dtype=float) + 1j * np.asarray(xi, dtype=float)


@dataclass(frozen=True)
class BargmannFunction:
    """F(z) = phase * exp(-|w|^2/2 + (z, w)) * P(z - w), P = sum_alpha c_alpha e_alpha.

    Without displacement w = 0 and phase = 1.
    """

    dimension: int
    alphas: np.ndarray
    coeffs: np.ndarray
    shift: np.ndarray | None = None
    phase: complex = 1.0 + 0j

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=np.int64).reshape(-1, self.dimension)
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        a.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "coeffs", c)
        if self.shift is not None:
            w = np.asarray(self.shift, dtype=complex).reshape(self.dimension)
            w.setflags(write=False)
            object.__setattr__(self, "shift", w)
        object.__setattr__(self, "phase", complex(self.phase))

    @property
    def displacement(self) -> np.ndarray:
        return np.zeros(self.dimension, dtype=complex) if self.shift is None else self.shift

    def coefficient_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def polynomial(self, z) -> np.ndarray:
        """P(z) without the displacement factor; z of shape (P, d)."""
        z = as_points(z, self.dimension)
        if not len(self.coeffs):
            return np.zeros(z.shape[0], dtype=complex)
        n_max = int(self.alphas.max())
        vals = np.ones((len(self.coeffs), z.shape[0]), dtype=complex)
        for j in range(self.dimension):
            table = monomial_table(n_max, z[:, j])
            vals = vals * table[self.alphas[:, j]]
        return self.coeffs @ vals

    def __call__(self, z) -> np.ndarray:
        z = as_points(z, self.dimension)
        w = self.displacement
        if self.shift is None:
            return self.phase * self.polynomial(z)
        factor = np.exp(-0.5 * np.sum(np.abs(w) ** 2) + hermitian(z, w))
        return self.phase * factor * self.polynomial(z - w)

    def untagged(self) -> "BargmannFunction":
        return BargmannFunction(self.dimension, self.alphas, self.coeffs)

    def to_json(self) -> dict:
        obj = expansion_to_json(HermiteExpansion(
            self.dimension, self.alphas, self.coeffs,
            int(self.alphas.sum(axis=1).max()) if len(self.coeffs) else 0))
        if self.shift is not None:
            obj["w"] = [[float(v.real), float(v.imag)] for v in self.shift]
            obj["phase"] = [self.phase.real, self.phase.imag]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "BargmannFunction":
        c = expansion_from_json(obj)
        shift = None
        phase = 1.0
        if "w" in obj:
            shift = np.array([complex(re, im) for re, im in obj["w"]])
            phase = complex(*obj.get("phase", [1.0, 0.0]))
        return cls(c.dimension, c.alphas, c.coeffs, shift, phase)


def monomial_table(n_max: int, z) -> np.ndarray:
    """e_0..e_{n_max} at z, e_n = z^n / sqrt(n!), built by e_n = e_{n-1} z / sqrt(n)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((n_max + 1,) + z.shape, dtype=complex)
    out[0] = 1.0
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * z / math.sqrt(n)
    return out


def bargmann(f: HermiteExpansion) -> BargmannFunction:
    return BargmannFunction(f.dimension, f.alphas, f.coeffs)


def weyl(F: BargmannFunction, w) -> BargmannFunction:
    """(W_w F)(z) = exp(-|w|^2/2 + (z, w)) F(z - w), kept exact through the tag.

    Two displacements merge as W_u W_v = exp(-i Im (u, v)) W_{u+v}.
    """
    u = np.asarray(w, dtype=complex).reshape(F.dimension)
    v = F.displacement
    phase = F.phase * np.exp(-1j * np.imag(hermitian(u, v)))
    total = u + v
    return BargmannFunction(F.dimension, F.alphas, F.coeffs, total, phase)


# ---------------------------------------------------------------------------
# covariance

class TruncationError(RuntimeError):
    pass


def covariance_sides(f: HermiteExpansion, x, xi, sample_points, N: int | None = None):
    """Left and right sides of the translation-modulation covariance at the samples.

    The left side goes through sampling g(y) = exp(i<y, xi>) f(y - x), Gauss-Hermite
    analysis to order N and relabeling; the right side is the closed Weyl form.
    """
    d = f.dimension
    x = np.asarray(x, dtype=float).reshape(d)
    xi = np.asarray(xi, dtype=float).reshape(d)
    shift_mag = float(np.linalg.norm(x) + np.linalg.norm(xi))
    if N is None:
        N = f.truncation_order + math.ceil(4 * shift_mag)
    N = max(N, f.truncation_order)
    base = as_callable(f)

    def g(p):
        return np.exp(1j * (p @ xi)) * base(p - x)

    cg = analyze(g, N, dimension=d)
    _check_truncation(cg)
    z = as_points(sample_points, d)
    lhs = bargmann(cg)(z)
    w = from_phase(x, xi)
    rhs = np.exp(0.5j * float(x @ xi)) * weyl(bargmann(f), np.conj(w) / math.sqrt(2.0))(z)
    return lhs, rhs


def _check_truncation(c: HermiteExpansion, tol: float = 1e-6):
    n = c.alphas.sum(axis=1)
    mass = np.abs(c.coeffs) ** 2
    total = mass.sum()
    if total == 0:
        return
    top = mass[n >= c.truncation_order - 1].sum()
    if top > tol * total:
        raise TruncationError(
            f"truncation order {c.truncation_order} insufficient: top-shell mass ratio {top / total:.2e}")


def covariance_check(f: HermiteExpansion, x, xi, sample_points, N: int | None = None,
                     floor: float = 1e-14) -> float:
    """Max relative error |LHS - RHS| / (|RHS| + floor) over the sample points."""
    lhs, rhs = covariance_sides(f, x, xi, sample_points, N)
    return float(np.max(np.abs(lhs - rhs) / (np.abs(rhs) + floor)))


def spiral_samples(count: int = 64, radius: float = 2.0) -> np.ndarray:
    """Golden-angle points filling the disc |z| <= radius (d = 1)."""
    k = np.arange(count) + 0.5
    r = radius * np.sqrt(k / count)
    theta = k * math.pi * (3.0 - math.sqrt(5.0))
    return (r * np.exp(1j * theta)).reshape(-1, 1)


# ---------------------------------------------------------------------------
# seminorms

FAMILIES = ("A0inf", "A01", "Aflat")


def polar_samples(d: int, radius: float, n_radii: int | None = None,
                  n_angles: int | None = None) -> np.ndarray:
    """Radial-angular grid out to ``radius``; for d > 1 the per-axis product."""
    if n_radii is None:
        n_radii = 65 if d == 1 else 17
    if n_angles is None:
        n_angles = 64 if d == 1 else 16
    r = np.linspace(0.0, radius, n_radii)
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    ring = np.concatenate([[0j], (r[1:, None] * np.exp(1j * t[None, :])).ravel()])
    if d == 1:
        return ring.reshape(-1, 1)
    axes = np.meshgrid(*([ring] * d), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=-1)


def default_samples(d: int, r: float) -> np.ndarray:
    return polar_samples(d, max(2.0 * r, 8.0))


def fock_seminorm(F: BargmannFunction, family: str, r: float, sample_set=None) -> float:
    """Sampled sup of the weighted modulus defining each Fock seminorm.

    A0inf: |F| exp(-|z|^2/2) (1+|z|)^(-r); A01: |F| exp(-|z|^2/2 - r|z|);
    Aflat: |F| on the ball |z| <= r.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown seminorm family {family!r}")
    if r < 0:
        raise ValueError("r must be nonnegative")
    z = default_samples(F.dimension, r) if sample_set is None else as_points(sample_set, F.dimension)
    rad = np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))
    if family == "Aflat":
        z = z[rad <= r * (1 + 1e-12)]
        rad = rad[rad <= r * (1 + 1e-12)]
    if len(z) == 0:
        raise ValueError("empty sample set")
    mod = np.abs(F(z))
    if family == "A0inf":
        mod = mod * np.exp(-0.5 * rad ** 2) * (1.0 + rad) ** (-r)
    elif family == "A01":
        mod = mod * np.exp(-0.5 * rad ** 2 - r * rad)
    return float(mod.max())


def weighted_sup_estimate(F: BargmannFunction, v0, sample_set) -> float:
    """max over samples of |F(z)| exp(-|z|^2/2) / v0(-sqrt2 conj z).

    ``v0`` takes phase points (x, xi) as two arrays of shape (P, d); the point
    -sqrt2 conj(z) has x = -sqrt2 Re z and xi = sqrt2 Im z.
    """
    z = as_points(sample_set, F.dimension)
    if len(z) == 0:
        raise ValueError("empty sample set")
    weight = np.asarray(v0(-math.sqrt(2.0) * z.real, math.sqrt(2.0) * z.imag), dtype=float)
    if np.any(weight <= 0):
        raise ValueError("weight must be strictly positive on the samples")
    rad2 = np.sum(np.abs(z) ** 2, axis=-1)
    return float(np.max(np.abs(F(z)) * np.exp(-0.5 * rad2) / weight))


def gaussian_measure_mass(F: BargmannFunction, radius: float = 10.0, n: int = 400) -> float:
    """int |F(z)|^2 exp(-|z|^2) dA / pi on a square midpoint grid (d = 1)."""
    if F.dimension != 1:
        raise ValueError("gaussian_measure_mass is implemented for d = 1")
    h = 2 * radius / n
    t = -radius + h * (np.arange(n) + 0.5)
    X, Y = np.meshgrid(t, t, indexing="ij")
    z = (X + 1j * Y).reshape(-1, 1)
    vals = np.abs(F(z)) ** 2 * np.exp(-np.abs(z[:, 0]) ** 2)
    return float(vals.sum() * h * h / math.pi)
