"""Command-line entry point: simulate, analyze, balance, sensitivity.

Every run writes a manifest echoing the resolved configuration, and every
output file is stamped with a hash of that configuration (a ``#`` comment
line for CSV and text, a leading ``config_hash`` key for JSON).  Outputs
depend only on the configuration and input contents, so reruns are
byte-identical apart from the manifest timestamp.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
from dataclasses import asdict
from datetime import datetime, timezone
import hashlib
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .errors import ImbalanceError, MissingMeans, NumericalError, ValidationError
from .estimator import VARIANCE_METHODS, analyze, paired_sample, row_pairs
from .ingest import Dataset, parse_schema, read_csv, write_csv
from .km import km_curve
from .matching import METRICS, optimal_pair_match
from .paired_cov import estimate_G01
from .propensity import fit_logistic, standardized_mean_differences
from .sensitivity import bounding_factor, effect_bound, sensitivity_grid
from .simulate import (PS_INTERCEPT, ScenarioConfig, make_rng, simulate_dataset,
                       table_scenario)
from .study import PS_MODELS, run_study

log = logging.getLogger("rmstmatch")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3
DEFAULT_SMD_THRESHOLD = 0.1


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


class RunOutputs:
    """Writes stamped outputs and the run manifest."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.hash = config_hash({"command": command, **config})
        self.written = []

    @property
    def header(self) -> str:
        return f"rmstmatch {__version__} {self.command} config_hash={self.hash}"

    def _opened(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(path)
        return open(path, "w", newline="", encoding="utf-8")

    def csv(self, path, columns, rows):
        with self._opened(path) as fh:
            fh.write(f"# {self.header}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_cell(v) for v in row])

    def json(self, path, payload: dict):
        with self._opened(path) as fh:
            json.dump(_jsonable({"config_hash": self.hash, **payload}), fh, indent=2)
            fh.write("\n")

    def text(self, path, body: str):
        with self._opened(path) as fh:
            fh.write(f"# {self.header}\n{body}")

    def dataset(self, dataset, path):
        write_csv(dataset, path, header_comment=self.header)
        self.written.append(Path(path))

    def manifest(self, path):
        outputs = [{"path": str(p), "sha256": file_sha256(p)} for p in self.written]
        payload = {
            "command": self.command,
            "version": __version__,
            "backend": BACKEND,
            "config_hash": self.hash,
            "config": self.config,
            "outputs": outputs,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(payload), fh, indent=2)
            fh.write("\n")


def _manifest_beside(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def result_table(rows) -> str:
    """Result rows ``(label, estimate, se, lo, hi)`` in the published layout."""
    head = f"{'':<16}{'Estimate':>10}{'SE':>8}{'95% CI Lower Bound':>21}{'95% CI Upper Bound':>21}\n"
    lines = [head]
    for label, est, se, lo, hi in rows:
        lines.append(f"{label:<16}{est:>10.3f}{se:>8.3f}{lo:>21.3f}{hi:>21.3f}\n")
    return "".join(lines)


# simulate

SUMMARY_COLUMNS = ("method", "n", "beta_A", "shape0", "shape1", "gamma", "tau", "n_reps",
                   "n_failed", "truth", "mean_estimate", "bias", "bias_pct", "cp", "sem", "see")
REPLICATE_COLUMNS = ("rep", "status", "truth", "estimate", "se", "ci_low", "ci_high", "iptw",
                     "n_pairs", "max_smd")


def cmd_simulate(args):
    text = Path(args.scenario).read_text(encoding="utf-8")
    cfg = ScenarioConfig.from_text(text)
    if args.seed is not None:
        cfg = ScenarioConfig(**{**asdict(cfg), "seed": int(args.seed)})
    if args.reps < 2:
        raise ValidationError("--reps must be >= 2")
    config = {"scenario": asdict(cfg), "reps": args.reps, "ps_model": args.ps_model,
              "variance": args.variance, "metric": args.metric}
    out = RunOutputs("simulate", config)
    outdir = Path(args.out)

    study = run_study(cfg, args.reps, workers=args.workers, ps_model=args.ps_model,
                      variance_method=args.variance, metric=args.metric)
    rows = []
    for method, s in (("matched_rmst", study.matched), ("iptw_km_rmst", study.iptw)):
        rows.append((method, cfg.n, cfg.beta_A, cfg.shape0, cfg.shape1, cfg.gamma, cfg.tau,
                     s.n_reps, study.n_failed, s.truth, s.mean_estimate, s.bias, s.bias_pct,
                     s.cp, s.sem, s.see))
    out.csv(outdir / "summary.csv", SUMMARY_COLUMNS, rows)
    out.csv(outdir / "replicates.csv", REPLICATE_COLUMNS,
            [tuple(getattr(r, c) for c in REPLICATE_COLUMNS) for r in study.records])
    if args.export_dataset:
        sim = simulate_dataset(cfg, make_rng(cfg.seed, args.export_rep))
        out.dataset(Dataset.from_simulation(sim), args.export_dataset)
    out.manifest(outdir / "manifest.json")

    m = study.matched
    bias_label = "Bias" if math.isnan(m.bias_pct) else "Bias%"
    print(f"{'method':<14}{bias_label:>10}{'CP':>8}{'SEM':>8}{'SEE':>8}")
    for method, s in (("matched_rmst", study.matched), ("iptw_km_rmst", study.iptw)):
        print(f"{method:<14}{s.bias_column:>10.3f}{s.cp:>8.3f}{s.sem:>8.3f}{s.see:>8.3f}")
    if study.n_failed:
        print(f"{study.n_failed} of {args.reps} replicates failed and were excluded")


def cmd_scenario(args):
    intercept = PS_INTERCEPT if args.literal_intercept else None
    kw = {} if intercept is None else {"ps_intercept": intercept}
    cfg = table_scenario(args.regime, args.beta_a, args.censoring, n=args.n, tau=args.tau,
                         seed=args.seed, **kw)
    Path(args.out).write_text(cfg.to_text(), encoding="utf-8")


# analyze / balance

def _load(args):
    schema = parse_schema(args.schema)
    data = read_csv(args.data, schema)
    base = {"data_sha256": file_sha256(args.data), "schema": schema}
    return data, base


def cmd_analyze(args):
    data, config = _load(args)
    config.update(tau=args.tau, variance=args.variance, metric=args.metric, level=args.level,
                  smd_threshold=args.smd_threshold, force=bool(args.force))
    out = RunOutputs("analyze", config)

    res = analyze(data, args.tau, variance_method=args.variance, metric=args.metric,
                  level=args.level)
    r = res.result
    if args.emit_balance:
        out.csv(args.emit_balance, ("covariate", "smd_before", "smd_after"), res.balance.rows())
    max_smd = res.balance.max_abs_after
    if max_smd > args.smd_threshold and not args.force:
        out.manifest(_manifest_beside(args.out))
        raise ImbalanceError(f"post-matching max |SMD| = {max_smd:.4f} exceeds "
                             f"{args.smd_threshold}; refine the propensity model or use --force")

    ids = data.ids
    if args.emit_pairs:
        out.csv(args.emit_pairs, ("treated_id", "control_id", "distance"),
                [(ids[t], ids[c], d) for (t, c), d in zip(res.rows.tolist(), res.pairs.distances)])
    sample = paired_sample(data.time, data.event, res.rows)
    if args.emit_curves:
        rows = []
        for arm, t, d in (("control", sample.time0, sample.event0),
                          ("treated", sample.time1, sample.event1)):
            rows += [(arm, *row) for row in km_curve(t, d).rows()]
        out.csv(args.emit_curves, ("arm", "time", "at_risk", "events", "survival"), rows)
    if args.emit_g:
        out.csv(args.emit_g, ("u", "v", "g"), estimate_G01(sample, args.tau).rows())

    table = result_table([("Matched RMST", r.estimate, r.se, r.ci_low, r.ci_high)])
    if args.emit_table:
        out.text(args.emit_table, table)
    fit = res.propensity
    payload = {
        "estimate": r.estimate, "se": r.se, "ci": [r.ci_low, r.ci_high], "level": r.level,
        "n_pairs": r.n_pairs, "tau": r.tau, "method": "matched_rmst",
        "variance_method": r.variance_method, "metric": args.metric,
        "rmst1": r.rmst1, "rmst0": r.rmst0, "var1": r.var1, "var0": r.var0, "cov": r.cov,
        "p_value": r.p_value, "balance_max_smd": max_smd,
        "balance_forced": bool(max_smd > args.smd_threshold),
        "n_treated": int(np.sum(data.treatment == 1)),
        "n_control": int(np.sum(data.treatment == 0)),
        "propensity": {"covariates": list(data.covariate_names),
                       "coefficients": fit.coefficients.tolist(),
                       "converged": bool(fit.converged), "iterations": int(fit.iterations)},
    }
    out.json(args.out, payload)
    out.manifest(_manifest_beside(args.out))
    print(table, end="")


def cmd_balance(args):
    data, config = _load(args)
    config.update(metric=args.metric)
    out = RunOutputs("balance", config)
    A = data.treatment
    fit = fit_logistic(data.covariates, A)
    pairs = optimal_pair_match(fit.scores[A == 1], fit.scores[A == 0], metric=args.metric)
    table = standardized_mean_differences(data.covariates, A, data.covariate_names,
                                          row_pairs(A, pairs))
    out.csv(args.out, ("covariate", "smd_before", "smd_after"), table.rows())
    out.manifest(_manifest_beside(args.out))
    for name, before, after in table.rows():
        print(f"{name:<20}{before:>10.4f}{after:>10.4f}")


# sensitivity

def cmd_sensitivity(args):
    if args.result:
        payload = json.loads(Path(args.result).read_text(encoding="utf-8"))
        m1, m0 = payload.get("rmst1"), payload.get("rmst0")
        config = {"result_sha256": file_sha256(args.result)}
    else:
        m1, m0 = args.m1, args.m0
        config = {"m1": m1, "m0": m0}
    if m1 is None or m0 is None:
        raise MissingMeans("need rmst1/rmst0 in --result or both --m1 and --m0")
    m1, m0 = float(m1), float(m0)
    config.update(rr_max=args.rr_max, mr_max=args.mr_max, steps=args.steps)
    out = RunOutputs("sensitivity", config)
    outdir = Path(args.out)

    grid = sensitivity_grid(m1, m0, (1.0, args.rr_max), (1.0, args.mr_max), args.steps)
    grid_path = outdir / "grid.csv"
    out.csv(grid_path, ("rr_au", "mr_uz", "bound"), grid.rows())
    out.csv(outdir / "contour.csv", ("rr_au", "mr_uz"), grid.zero_contour)
    _check_grid_file(grid_path, args.steps, grid.direction)

    sign = "positive" if m1 >= m0 else "negative"
    at_15 = effect_bound(m1, m0, bounding_factor(1.5, 1.5), sign)
    out.json(outdir / "summary.json", {
        "m1": m1, "m0": m0, "estimate": m1 - m0, "direction": grid.direction,
        "bound_at_1_5": at_15, "diagonal_crossing": grid.diagonal_crossing(),
    })
    out.manifest(outdir / "manifest.json")
    cross = grid.diagonal_crossing()
    print(f"direction {grid.direction}; bound at (1.5, 1.5) = {at_15:.3f}; "
          f"diagonal zero crossing = {'none' if cross is None else f'{cross:.3f}'}")


def _check_grid_file(path, steps, direction):
    """Re-read an emitted grid and confirm the bounds are monotone."""
    values = np.loadtxt(path, delimiter=",", comments="#", skiprows=2, ndmin=2)
    bounds = values[:, 2].reshape(steps, steps)
    step = np.concatenate((np.diff(bounds, axis=0).ravel(), np.diff(bounds, axis=1).ravel()))
    tol = 1e-9 * max(1.0, float(np.max(np.abs(bounds))))
    ok = np.all(step >= -tol) if direction.startswith("negative") else np.all(step <= tol)
    if not ok:
        raise NumericalError(f"{path}: emitted bounds are not monotone")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmstmatch", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo study of one scenario")
    s.add_argument("--scenario", required=True, help="key = value scenario file")
    s.add_argument("--reps", type=int, required=True)
    s.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--ps-model", choices=PS_MODELS, default="logistic")
    s.add_argument("--variance", choices=VARIANCE_METHODS, default="murray")
    s.add_argument("--metric", choices=METRICS, default="logit")
    s.add_argument("--export-dataset", help="also write one replicate's data (with t0,t1)")
    s.add_argument("--export-rep", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("scenario", help="write a scenario file from the published grid")
    s.add_argument("--regime", choices=("PH", "NP"), required=True)
    s.add_argument("--beta-a", type=float, required=True)
    s.add_argument("--censoring", type=float, choices=(0.0, 0.2, 0.4, 0.6), required=True)
    s.add_argument("--n", type=int, default=2500)
    s.add_argument("--tau", type=float, default=100.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--literal-intercept", action="store_true",
                   help=f"use intercept {PS_INTERCEPT} instead of the 20%%-exposure calibration")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scenario)

    s = sub.add_parser("analyze", help="matched RMST difference on a dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--schema", default="", help="id=ID,time=FUTIME,event=EVT,treat=SMOKER")
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--variance", choices=VARIANCE_METHODS, default="murray")
    s.add_argument("--metric", choices=METRICS, default="logit")
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--smd-threshold", type=float, default=DEFAULT_SMD_THRESHOLD)
    s.add_argument("--force", action="store_true", help="report despite poor balance")
    s.add_argument("--emit-pairs")
    s.add_argument("--emit-balance")
    s.add_argument("--emit-curves")
    s.add_argument("--emit-g")
    s.add_argument("--emit-table")
    s.add_argument("--out", required=True, help="result JSON")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("balance", help="covariate balance before and after matching")
    s.add_argument("--data", required=True)
    s.add_argument("--schema", default="")
    s.add_argument("--metric", choices=METRICS, default="logit")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_balance)

    s = sub.add_parser("sensitivity", help="bounds under unmeasured confounding")
    s.add_argument("--result", help="analyze JSON output")
    s.add_argument("--m1", type=float)
    s.add_argument("--m0", type=float)
    s.add_argument("--rr-max", type=float, default=3.0)
    s.add_argument("--mr-max", type=float, default=3.0)
    s.add_argument("--steps", type=int, default=81)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_sensitivity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"rmstmatch: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        print(f"rmstmatch: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"rmstmatch: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
