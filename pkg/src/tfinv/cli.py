"""tfinv <experiment> --config <path> [--out dir] [--workers n] [--seed s]

Experiments: classify, bargmann-covariance, v0-estimate, average-norm,
full-theorem-witness. Configs are strict JSON (schema "tfinv-1"); every
output file starts with the fully resolved config. Exit status is 0 on
success, 1 when a checked property fails and 2 on a bad config.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import averaging, fock, growth, spaces
from .families import sample_family
from .hermite import Grid, HermiteExpansion, expansion_from_json

SCHEMA = "tfinv-1"
EXPERIMENTS = ("classify", "bargmann-covariance", "v0-estimate", "average-norm", "full-theorem-witness")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSpec(_Strict):
    kind: Literal["PlainL2", "WeightedL2", "SobolevHs"] = "WeightedL2"
    d: int = Field(1, ge=1, le=2)
    params: dict = Field(default_factory=dict)


class GridSpec(_Strict):
    spacing: float = Field(1 / 16, gt=0)
    radius: float = Field(12.0, gt=0)


class AveragingSpec(_Strict):
    schedule: Optional[list[float]] = None
    R0: float = Field(5.0, gt=0)
    doublings: int = Field(5, ge=0, le=8)
    nodes_per_unit: float = Field(8.0, gt=0)
    x_probes: list[list[float]] = Field(default_factory=lambda: [[1.0]])
    xi_probes: list[list[float]] = Field(default_factory=list)


class V0Spec(_Strict):
    x: Optional[list[float]] = None       # start, stop, step
    xi: Optional[list[float]] = None
    family: Optional[list[str]] = None
    grid: Optional[GridSpec] = None
    slack_fraction: float = Field(0.05, ge=0)


class CovarianceSpec(_Strict):
    functions: list[list[int]] = Field(default_factory=lambda: [[0], [1], [2]])
    x: list[float] = Field(default_factory=lambda: [-2.0, 2.0, 5])          # start, stop, count
    xi: list[float] = Field(default_factory=lambda: [-2.0, 2.0, 5])
    N: int = Field(32, ge=1, le=512)
    samples: int = Field(64, ge=1)
    radius: float = Field(2.0, gt=0)
    tol: float = Field(1e-8, gt=0)


class ClassifyItem(_Strict):
    id: Optional[str] = None
    canonical: Optional[str] = None
    N: int = Field(48, ge=growth.MIN_ORDER)
    expansion: Optional[dict] = None
    expect: Optional[str] = None


class ClassifySpec(_Strict):
    items: Optional[list[ClassifyItem]] = None
    tol: float = Field(growth.DEFAULT_TOL, gt=0)


class ToleranceSpec(_Strict):
    analysis: float = 1e-10
    operator: float = 1e-5
    tail: float = 1e-8
    polarization: float = averaging.POLARIZATION_TOL
    defect_slack: float = 1e-6


class ExperimentConfig(_Strict):
    schema_: str = Field(SCHEMA, alias="schema")
    experiment: Optional[str] = None
    seed: int = 0
    model: ModelSpec = Field(default_factory=ModelSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    family: Optional[list[str]] = None
    averaging: AveragingSpec = Field(default_factory=AveragingSpec)
    v0: V0Spec = Field(default_factory=V0Spec)
    covariance: CovarianceSpec = Field(default_factory=CovarianceSpec)
    classify: ClassifySpec = Field(default_factory=ClassifySpec)
    tolerances: ToleranceSpec = Field(default_factory=ToleranceSpec)
    timestamps: bool = False


DEFAULT_FAMILY = ["hermite:0", "hermite:1", "hermite:2", "hermite:3", "gaussian:0.7", "gaussian:1.5",
                  "gabor:0.8,1.0,0", "gabor:1.0,-0.5,2", "random:1,6", "random:2,6"]


def _v0_defaults(kind: str):
    """Family and grid used for v0 when the config leaves them open."""
    if kind == "SobolevHs":
        # x is irrelevant for this norm; sweep the modulation axis finely
        return (["gaussian:4"], GridSpec(spacing=1 / 16, radius=32.0),
                [0.0, 0.0, 1.0], [0.0, 16.0, 0.5])
    # narrow atoms at evenly spread centres resolve the weight's oscillation
    atoms = [f"gabor:0.2,{2 * math.pi * k / 8 - math.pi!r},0" for k in range(8)]
    return atoms, GridSpec(spacing=1 / 32, radius=10.0), [-16.0, 16.0, 0.5], [-16.0, 16.0, 2.0]


def load_config(path, experiment: str, seed: int | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.schema_ != SCHEMA:
        raise ConfigError(f"unsupported schema {cfg.schema_!r}; expected {SCHEMA!r}")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if cfg.experiment is not None and cfg.experiment != experiment:
        raise ConfigError(f"config is for {cfg.experiment!r}, not {experiment!r}")
    update = {"experiment": experiment}
    if seed is not None:
        update["seed"] = seed
    if cfg.family is None:
        update["family"] = list(DEFAULT_FAMILY)
    fam, grid, x, xi = _v0_defaults(cfg.model.kind)
    update["v0"] = cfg.v0.model_copy(update={"family": cfg.v0.family or fam, "grid": cfg.v0.grid or grid,
                                             "x": cfg.v0.x or x, "xi": cfg.v0.xi or xi})
    if cfg.averaging.schedule is None:
        sched = [cfg.averaging.R0 * 2 ** k for k in range(cfg.averaging.doublings + 1)]
        update["averaging"] = cfg.averaging.model_copy(update={"schedule": sched})
    if cfg.classify.items is None:
        items = [ClassifyItem(id=t, canonical=t, expect=t) for t in growth.CHAIN]
        update["classify"] = cfg.classify.model_copy(update={"items": items})
    cfg = cfg.model_copy(update=update)
    try:
        spaces.make_model(cfg.model.kind, cfg.model.d, cfg.model.params)
        for item in cfg.classify.items:
            if (item.canonical is None) == (item.expansion is None):
                raise ConfigError("each classify item needs exactly one of canonical, expansion")
            if item.canonical is not None and item.canonical not in growth.CANONICAL_LAWS:
                raise ConfigError(f"unknown canonical sequence {item.canonical!r}")
            if item.expect is not None and item.expect not in growth.CHAIN:
                raise ConfigError(f"unknown class {item.expect!r}")
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def resolved(cfg: ExperimentConfig) -> dict:
    return cfg.model_dump(mode="json", by_alias=True)


# ---------------------------------------------------------------------------
# experiments; each returns (ok, message, csv_body, summary)

def _family(cfg: ExperimentConfig, specs=None, grid: GridSpec | None = None):
    g = grid or cfg.grid
    specs = specs if specs is not None else cfg.family
    return specs, sample_family(specs, Grid(cfg.model.d, g.spacing, g.radius))


def _model(cfg):
    return spaces.make_model(cfg.model.kind, cfg.model.d, cfg.model.params)


def _arange(spec):
    start, stop, step = spec
    return np.arange(start, stop + 0.5 * step, step)


def run_classify(cfg, workers):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "tag", "margin", "boundary", "law", "expect"])
    results, failures = {}, []
    for i, item in enumerate(cfg.classify.items):
        if item.canonical is not None:
            c = growth.canonical_expansion(item.canonical, item.N, cfg.model.d)
        else:
            c = expansion_from_json(item.expansion)
        rep = growth.report(c, cfg.classify.tol)
        ident = item.id or f"item{i}"
        results[ident] = rep
        w.writerow([ident, rep["tag"], repr(rep["margin"]), rep["boundary"], rep["law"], item.expect or ""])
        if item.expect is not None and rep["tag"] != item.expect:
            failures.append(f"growth_classifier.classify({ident}): got {rep['tag']}, expected {item.expect}")
    ok = not failures
    msg = failures[0] if failures else f"PASS classify: {len(results)} sequences"
    return ok, msg, buf.getvalue(), {"results": results}


def run_covariance(cfg, workers):
    cv = cfg.covariance
    d = cfg.model.d
    if d != 1:
        raise ConfigError("bargmann-covariance runs in d = 1")
    xs = np.linspace(cv.x[0], cv.x[1], int(cv.x[2]))
    xis = np.linspace(cv.xi[0], cv.xi[1], int(cv.xi[2]))
    z = fock.spiral_samples(cv.samples, cv.radius)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["f_id", "x", "xi", "max_rel_err"])
    worst, where = 0.0, None
    for alpha in cv.functions:
        if len(alpha) != d:
            raise ConfigError(f"hermite index {alpha} does not match d={d}")
        f = HermiteExpansion.from_dict({tuple(alpha): 1.0}, d)
        fid = "h" + "_".join(map(str, alpha))
        for x in xs:
            for xi in xis:
                err = fock.covariance_check(f, [x], [xi], z, cv.N)
                w.writerow([fid, repr(float(x)), repr(float(xi)), repr(err)])
                if err > worst:
                    worst, where = err, (fid, float(x), float(xi))
    ok = worst < cv.tol
    msg = (f"PASS bargmann-covariance: max rel err {worst:.3e}" if ok else
           f"bargmann_fock.covariance_check(f={where[0]}, x={where[1]}, xi={where[2]}): "
           f"rel err {worst:.3e} >= {cv.tol:g}")
    return ok, msg, buf.getvalue(), {"max_rel_err": worst, "worst_at": where}


def _v0(cfg):
    space = _model(cfg)
    d = cfg.model.d
    xs, xis = spaces.phase_grid(_arange(cfg.v0.x), _arange(cfg.v0.xi), d)
    _, fam = _family(cfg, cfg.v0.family, cfg.v0.grid)
    est = spaces.estimate_v0(space, fam, xs, xis)
    return space, est, spaces.admissibility(space, est)


def run_v0(cfg, workers):
    space, est, adm = _v0(cfg)
    summary = {"fit": est.fit, "poly_fit": est.poly_fit, "verdict": adm.verdict,
               "C0": _num(adm.C0), "max_v0": adm.max_v0}
    ok, msg = True, f"PASS v0-estimate: {adm.verdict}, r = {est.fit['r']:.4g}, N = {est.poly_fit['N']:.4g}"
    if math.isfinite(space.declared_C0):
        triples = spaces.sum_closed_triples(est.xs, est.xis)
        defect = spaces.submultiplicativity_defect(est, triples)
        budget = spaces.slack_budget(est, cfg.v0.slack_fraction)
        summary.update(submultiplicativity_defect=defect, slack_budget=budget, triples=len(triples))
        if defect > budget:
            ok = False
            msg = (f"space_models.submultiplicativity_defect({space.kind}): {defect:.3e} exceeds "
                   f"slack {budget:.3e}")
        if adm.verdict != "admissible":
            ok = False
            msg = f"space_models.admissibility({space.kind}): sampled v0 {adm.max_v0:.4g} > C0 {adm.C0:.4g}"
    return ok, msg, est.to_csv(), summary


def _schedule(cfg, workers, strict=False):
    space = _model(cfg)
    ids, fam = _family(cfg)
    av = cfg.averaging
    return averaging.run_schedule(space, fam, av.schedule,
                                  x_probes=[np.asarray(p, float) for p in av.x_probes],
                                  xi_probes=[np.asarray(p, float) for p in av.xi_probes],
                                  ids=ids, nodes_per_unit=av.nodes_per_unit, strict=strict,
                                  workers=workers, defect_slack=cfg.tolerances.defect_slack)


def run_average(cfg, workers):
    rep = _schedule(cfg, workers)
    ok = rep.passed
    msg = rep.failures[0] if rep.failures else \
        f"PASS average-norm: C = {rep.C:.10g}, bracket [{rep.C / rep.C0:.6g}, {rep.C * rep.C0:.6g}]"
    return ok, msg, rep.to_csv(), rep.summary()


def run_witness(cfg, workers):
    space, est, adm = _v0(cfg)
    stage = {"verdict": adm.verdict, "fit": est.fit, "poly_fit": est.poly_fit, "max_v0": adm.max_v0}
    if adm.verdict == "hypothesis-violated":
        msg = (f"HYPOTHESIS-VIOLATED {space.kind}: v0 grows (r = {est.fit['r']:.4g}, "
               f"N = {est.poly_fit['N']:.4g}); averaging not attempted")
        return True, msg, est.to_csv(), {"admissibility": stage, "outcome": "HYPOTHESIS-VIOLATED"}
    if adm.verdict != "admissible":
        msg = f"space_models.admissibility({space.kind}): inconclusive; averaging not attempted"
        return False, msg, est.to_csv(), {"admissibility": stage, "outcome": "INCONCLUSIVE"}
    rep = _schedule(cfg, workers)
    summary = {"admissibility": stage, "averaging": rep.summary(),
               "outcome": "PASS" if rep.passed else "FAIL"}
    if rep.passed:
        msg = (f"PASS full-theorem-witness {space.kind}: C = {rep.C:.8g}, "
               f"bracket factor C0 = {rep.C0:.8g}")
        return True, msg, rep.to_csv(), summary
    return False, rep.failures[0], rep.to_csv(), summary


RUNNERS = {
    "classify": run_classify,
    "bargmann-covariance": run_covariance,
    "v0-estimate": run_v0,
    "average-norm": run_average,
    "full-theorem-witness": run_witness,
}


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else None)


def run(cfg: ExperimentConfig, out: Path | None = None, workers: int = 1) -> tuple[int, str]:
    """Run one experiment, write <experiment>.csv and <experiment>.json, return (status, message)."""
    np.random.seed(cfg.seed)
    ok, msg, body, summary = RUNNERS[cfg.experiment](cfg, workers)
    config = resolved(cfg)
    header = f"# {SCHEMA} config={json.dumps(config, sort_keys=True, separators=(',', ':'))}\n"
    if cfg.timestamps:
        header += f"# generated {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}\n"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cfg.experiment}.csv").write_text(header + body)
        doc = {"schema": SCHEMA, "config": config, "passed": ok, "message": msg, "result": summary}
        (out / f"{cfg.experiment}.json").write_text(json.dumps(doc, sort_keys=True, indent=1, default=_num) + "\n")
    return (EXIT_OK if ok else EXIT_FAIL), msg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tfinv", description="translation-modulation invariance experiments")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.experiment, args.seed)
        status, msg = run(cfg, Path(args.out) if args.out else None, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(msg)
    return status


if __name__ == "__main__":
    sys.exit(main())
