"""Phase-space averaged norms over the cube Q_R = [-R, R]^(2d).

    ||f||_[R]^2 = |Q_R|^-1 int_{Q_R} ||exp(i<., xi>) f(. - x)||^2 dx dxi

evaluated by the midpoint rule. When a model's norm does not depend on x
(translation invariant) or on xi (modulation invariant) that half of the
integral is exactly the integrand at 0 and is not sampled.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .hermite import GridFunction
from .spaces import PlainL2, SpaceModel, mod_translate

POLARIZATION_TOL = 1e-8


class ScheduleError(AssertionError):
    """A per-R check failed; the message names R and the family member."""


@dataclass(frozen=True)
class CubeSpec:
    R: float
    dimension: int = 1
    nodes_per_unit: float = 8.0
    rule: str = "midpoint"

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.rule != "midpoint":
            raise ValueError(f"unsupported rule {self.rule!r}")
        if self.node_spacing > min(1.0, self.R / 8.0) + 1e-12:
            raise ValueError(f"node spacing {self.node_spacing:g} too coarse for R={self.R:g}")

    @property
    def volume(self) -> float:
        return (2.0 * self.R) ** (2 * self.dimension)

    @property
    def nodes(self) -> int:
        return max(1, math.ceil(2.0 * self.R * self.nodes_per_unit - 1e-9))

    @property
    def node_spacing(self) -> float:
        return 2.0 * self.R / self.nodes

    def axis_nodes(self) -> np.ndarray:
        h = self.node_spacing
        return -self.R + h * (np.arange(self.nodes) + 0.5)

    def lattice(self) -> np.ndarray:
        ax = self.axis_nodes()
        return np.array(list(product(ax, repeat=self.dimension))) if self.dimension > 1 \
            else ax.reshape(-1, 1)


def _phase_nodes(space: SpaceModel, cube: CubeSpec):
    d = space.dimension
    zero = np.zeros((1, d))
    xs = zero if space.translation_invariant else cube.lattice()
    xis = zero if space.modulation_invariant else cube.lattice()
    X = np.repeat(xs, len(xis), axis=0)
    XI = np.tile(xis, (len(xs), 1))
    return X, XI


def _check(space: SpaceModel, f: GridFunction, cube: CubeSpec):
    if cube.dimension != space.dimension or f.dimension != space.dimension:
        raise ValueError("dimension mismatch between space, function and cube")
    f.check_support()


def averaged_norm_sq(space: SpaceModel, f: GridFunction, cube: CubeSpec) -> float:
    _check(space, f, cube)
    X, XI = _phase_nodes(space, cube)
    return float(np.mean(space.shifted_norm_sq_many(f, X, XI)))


def averaged_norm(space: SpaceModel, f: GridFunction, cube: CubeSpec) -> float:
    return math.sqrt(max(averaged_norm_sq(space, f, cube), 0.0))


def averaged_inner_direct(space: SpaceModel, f: GridFunction, g: GridFunction,
                          cube: CubeSpec) -> complex:
    _check(space, f, cube)
    _check(space, g, cube)
    X, XI = _phase_nodes(space, cube)
    return complex(np.mean(space.shifted_inner_many(f, g, X, XI)))


def averaged_inner_polarized(space: SpaceModel, f: GridFunction, g: GridFunction,
                             cube: CubeSpec) -> complex:
    n = lambda h: averaged_norm_sq(space, h, cube)
    return 0.25 * (n(f + g) - n(f - g) + 1j * n(f + 1j * g) - 1j * n(f - 1j * g))


def averaged_inner(space: SpaceModel, f: GridFunction, g: GridFunction, cube: CubeSpec,
                   tol: float = POLARIZATION_TOL) -> complex:
    """(f, g)_[R]; the direct average is checked against polarization of ||.||_[R]."""
    direct = averaged_inner_direct(space, f, g, cube)
    polar = averaged_inner_polarized(space, f, g, cube)
    scale = max(1.0, math.sqrt(averaged_norm_sq(space, f, cube) * averaged_norm_sq(space, g, cube)))
    if abs(direct - polar) > tol * scale:
        raise AssertionError(f"polarization mismatch {abs(direct - polar):.3e} at R={cube.R}")
    return direct


@dataclass(frozen=True)
class Defect:
    defect: float
    bound: float           # C0^2 (sum|x0| + sum|xi0|) ||f||^2 / R
    linear_bound: float    # C0 (sum|x0| + sum|xi0|) ||f||^2 / R
    shifted_sq: float
    base_sq: float


def invariance_defect(space: SpaceModel, f: GridFunction, cube: CubeSpec, x0, xi0) -> Defect:
    """| ||exp(i<., xi0>) f(. - x0)||_[R]^2 - ||f||_[R]^2 | with its O(1/R) bounds."""
    d = space.dimension
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (d,))
    xi0 = np.broadcast_to(np.asarray(xi0, dtype=float), (d,))
    if cube.R <= max(np.abs(x0).max(), np.abs(xi0).max()):
        raise ValueError("R must exceed every |x0_j| and |xi0_j| so the shifted cube overlaps Q_R")
    g = mod_translate(f, x0, xi0)
    base = averaged_norm_sq(space, f, cube)
    shifted = averaged_norm_sq(space, g, cube)
    C0 = space.declared_C0
    norm_sq = space.norm(f) ** 2
    size = float(np.abs(x0).sum() + np.abs(xi0).sum())
    bound = C0 ** 2 * size * norm_sq / cube.R if math.isfinite(C0) else math.inf
    linear = C0 * size * norm_sq / cube.R if math.isfinite(C0) else math.inf
    return Defect(abs(shifted - base), bound, linear, shifted, base)


# ---------------------------------------------------------------------------
# schedules

DEFAULT_SCHEDULE = tuple(5.0 * 2 ** k for k in range(6))


@dataclass
class Row:
    f_id: str
    R: float
    avg_norm: float
    lo: float
    hi: float
    defect_t: float
    defect_m: float
    bound: float
    C_est: float = math.nan


@dataclass
class AveragingReport:
    schedule: list
    rows: list
    C: float
    C0: float
    brackets: dict           # f_id -> (lower, ||f||_H / ||f||_L2, upper)
    cauchy: list             # max over family of | ||f||_[R_k+1] - ||f||_[R_k] |
    l2_norms: dict
    space_norms: dict
    passed: bool = True
    failures: list = field(default_factory=list)

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["f_id", "R", "avg_norm", "lo", "hi", "defect_t", "defect_m", "bound", "C_est"])
        for r in self.rows:
            w.writerow([r.f_id] + [repr(float(v)) for v in
                                   (r.R, r.avg_norm, r.lo, r.hi, r.defect_t, r.defect_m, r.bound, r.C_est)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "schedule": list(self.schedule),
            "C": self.C,
            "C0": self.C0,
            "bracket": [self.C / self.C0, self.C * self.C0],
            "members": {k: {"lower": v[0], "ratio": v[1], "upper": v[2]} for k, v in self.brackets.items()},
            "cauchy": self.cauchy,
            "passed": self.passed,
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def run_schedule(space: SpaceModel, family, schedule=DEFAULT_SCHEDULE, x_probes=(), xi_probes=(),
                 ids=None, nodes_per_unit: float = 8.0, strict: bool = True, workers: int = 1,
                 defect_slack: float = 1e-6) -> AveragingReport:
    """Averaged norms over the schedule, sandwich checks, and the limiting constant C.

    C is the median over the family of ||f||_[R_max] / ||f||_L2; each member must
    then satisfy C/C0 < ||f||_H / ||f||_L2 < C*C0. With ``strict`` the first
    failing check raises ScheduleError.
    """
    family = list(family)
    schedule = [float(R) for R in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if ids is None:
        ids = [f"f{i}" for i in range(len(family))]
    d = space.dimension
    l2 = PlainL2(d)
    C0 = space.declared_C0
    l2_norms, h_norms = {}, {}
    for fid, f in zip(ids, family):
        l2_norms[fid] = l2.norm(f)
        h_norms[fid] = space.norm(f)
        if h_norms[fid] <= 0 or l2_norms[fid] <= 0:
            raise ValueError(f"family member {fid} has zero norm")

    failures = []

    def fail(msg):
        failures.append(msg)
        if strict:
            raise ScheduleError(msg)

    size = max([float(np.abs(x).sum()) for x in x_probes] +
               [float(np.abs(xi).sum()) for xi in xi_probes] + [0.0])
    zero = np.zeros(d)

    def member(cube, f):
        a = averaged_norm(space, f, cube)
        dt = max((invariance_defect(space, f, cube, x, zero).defect
                  for x in x_probes if cube.R > np.max(np.abs(x))), default=0.0)
        dm = max((invariance_defect(space, f, cube, zero, xi).defect
                  for xi in xi_probes if cube.R > np.max(np.abs(xi))), default=0.0)
        return a, dt, dm

    rows = []
    avg = {fid: [] for fid in ids}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for R in schedule:
            cube = CubeSpec(R, d, nodes_per_unit)
            # map keeps family order, so the report does not depend on scheduling
            results = list(pool.map(lambda f: member(cube, f), family))
            for fid, (a, dt, dm) in zip(ids, results):
                avg[fid].append(a)
                nh = h_norms[fid]
                lo, hi = nh / C0, nh * C0
                slack = 1e-9 * nh
                if not (lo - slack <= a <= hi + slack):
                    fail(f"norm_averaging.run_schedule: sandwich fails at R={R:g}, f={fid}: "
                         f"{lo:.6g} <= {a:.6g} <= {hi:.6g}")
                bound = C0 ** 2 * size * nh ** 2 / R if math.isfinite(C0) else math.inf
                for defect, kind in ((dt, "translation"), (dm, "modulation")):
                    if defect > bound + defect_slack:
                        fail(f"norm_averaging.invariance_defect: {kind} defect {defect:.3e} exceeds "
                             f"bound {bound:.3e} at R={R:g}, f={fid}")
                rows.append(Row(fid, R, a, lo, hi, dt, dm, bound))
            C_R = float(np.median([avg[fid][-1] / l2_norms[fid] for fid in ids]))
            for r in rows[-len(family):]:
                r.C_est = C_R

    C = rows[-1].C_est
    brackets = {}
    for fid in ids:
        ratio = h_norms[fid] / l2_norms[fid]
        lower, upper = C / C0, C * C0
        brackets[fid] = (lower, ratio, upper)
        # non-strict with a relative slack: C0 = 1 collapses the bracket to a point
        slack = 1e-8 * ratio
        if math.isfinite(C0) and not (lower - slack <= ratio <= upper + slack):
            fail(f"norm_averaging.run_schedule: bracket fails for f={fid}: "
                 f"{lower:.6g} <= {ratio:.6g} <= {upper:.6g}")
    cauchy = []
    for k in range(len(schedule) - 1):
        cauchy.append(max(abs(avg[fid][k + 1] - avg[fid][k]) for fid in ids))
    return AveragingReport(schedule, rows, C, C0, brackets, cauchy, l2_norms, h_norms,
                           passed=not failures, failures=failures)
