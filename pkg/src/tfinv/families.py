"""Named test-function generators used by the experiments.

    hermite:k[,k2,...]      h_alpha
    gaussian:sigma          exp(-|x|^2 / (2 sigma^2))
    gabor:sigma,x0,omega0   exp(i omega0 (x_1 - x0)) exp(-|x - x0 e_1|^2 / (2 sigma^2))
    random:seed,N           random complex Hermite expansion of degree N
"""
from __future__ import annotations

import numpy as np

from .hermite import Grid, GridFunction, HermiteExpansion, as_callable, hermite_table


def hermite_function(alpha):
    alpha = tuple(int(a) for a in alpha)

    def f(p):
        p = np.asarray(p, dtype=float)
        out = np.ones(p.shape[:-1])
        for j, a in enumerate(alpha):
            out = out * hermite_table(a, p[..., j])[a]
        return out.astype(complex)
    return f


def gaussian_function(sigma: float):
    def f(p):
        return np.exp(-0.5 * np.sum(np.asarray(p) ** 2, axis=-1) / sigma ** 2).astype(complex)
    return f


def gabor_function(sigma: float, x0: float, omega0: float):
    def f(p):
        p = np.asarray(p, dtype=float)
        q = p.copy()
        q[..., 0] -= x0
        return np.exp(1j * omega0 * q[..., 0] - 0.5 * np.sum(q * q, axis=-1) / sigma ** 2)
    return f


def parse_generator(spec: str, d: int = 1):
    """Callable on points of shape (..., d) for a generator spec string."""
    name, _, args = spec.partition(":")
    vals = [v for v in args.split(",") if v.strip()] if args else []
    if name == "hermite":
        alpha = [int(v) for v in vals] or [0]
        if len(alpha) == 1 and d > 1:
            alpha = alpha + [0] * (d - 1)
        if len(alpha) != d:
            raise ValueError(f"hermite index {alpha} does not match d={d}")
        return hermite_function(alpha)
    if name == "gaussian":
        return gaussian_function(float(vals[0]) if vals else 1.0)
    if name == "gabor":
        sigma, x0, omega0 = (float(v) for v in vals)
        return gabor_function(sigma, x0, omega0)
    if name == "random":
        seed = int(vals[0]) if vals else 0
        N = int(vals[1]) if len(vals) > 1 else 8
        return as_callable(HermiteExpansion.random(d, N, seed))
    raise ValueError(f"unknown generator {spec!r}")


def sample_family(specs, grid: Grid) -> list[GridFunction]:
    return [GridFunction.sample(parse_generator(s, grid.dimension), grid) for s in specs]
