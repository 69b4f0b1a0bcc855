"""CSV input/output for survival datasets."""
from __future__ import annotations

import csv
from dataclasses import dataclass
import math

import numpy as np

from .errors import (EmptyArm, MissingColumn, NegativeTime, NonBinaryFlag,
                     NonNumericCell, ValidationError)

REQUIRED = ("id", "time", "event", "treat")
POTENTIAL = ("t0", "t1")


@dataclass(frozen=True)
class Dataset:
    ids: list
    time: np.ndarray
    event: np.ndarray
    treatment: np.ndarray
    covariates: np.ndarray
    covariate_names: list
    potential_times: np.ndarray | None = None
    tau: float | None = None

    def __post_init__(self):
        n = len(self.ids)
        for name in ("time", "event", "treatment"):
            if getattr(self, name).shape != (n,):
                raise ValidationError(f"{name} must have one entry per subject")
        if self.covariates.shape != (n, len(self.covariate_names)):
            raise ValidationError("covariate matrix does not match names/rows")
        if n and not (self.treatment == 1).any():
            raise EmptyArm("dataset has no treated subjects")
        if n and not (self.treatment == 0).any():
            raise EmptyArm("dataset has no control subjects")

    @property
    def n(self) -> int:
        return len(self.ids)

    @classmethod
    def from_simulation(cls, sim, ids=None) -> "Dataset":
        n = sim.n
        ids = [str(i + 1) for i in range(n)] if ids is None else list(ids)
        return cls(ids, np.asarray(sim.observed_time, dtype=float),
                   np.asarray(sim.event, dtype=np.int64),
                   np.asarray(sim.treatment, dtype=np.int64),
                   np.asarray(sim.covariates, dtype=float), sim.covariate_names,
                   np.asarray(sim.potential_times, dtype=float), sim.tau)


def parse_schema(text: str | None) -> dict:
    """``"id=ID,time=FUTIME,event=EVT,treat=SMOKER"`` -> logical -> column mapping."""
    mapping = {}
    if not text:
        return mapping
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ValidationError(f"schema entry {item!r} is not of the form key=COLUMN")
        key, col = (s.strip() for s in item.split("=", 1))
        mapping[key] = col
    return mapping


def _number(row_no, col, raw):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise NonNumericCell(row_no, col, raw) from None
    if not math.isfinite(value):
        raise NonNumericCell(row_no, col, raw)
    return value


def _flag(row_no, col, raw):
    value = _number(row_no, col, raw)
    if value not in (0.0, 1.0):
        raise NonBinaryFlag(row_no, col, raw)
    return int(value)


def read_csv(path, schema: dict | None = None) -> Dataset:
    """Read and validate a dataset.

    Lines starting with ``#`` are comments.  ``schema`` maps the logical
    names id/time/event/treat (and optionally covariates) to file columns;
    unmapped logical names default to themselves.  If no covariates are
    mapped, every remaining column other than t0/t1 is a covariate.
    Row numbers in errors are 1-based data rows.
    """
    schema = dict(schema or {})
    with open(path, newline="", encoding="utf-8") as fh:
        lines = (line for line in fh if not line.startswith("#"))
        reader = csv.reader(lines)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        rows = [r for r in reader if r]

    cols = {logical: schema.get(logical, logical) for logical in REQUIRED}
    for logical, col in cols.items():
        if col not in header:
            raise MissingColumn(col)
    cov_map = {k: v for k, v in schema.items() if k not in REQUIRED}
    if not cov_map:
        used = set(cols.values()) | set(POTENTIAL)
        cov_map = {h: h for h in header if h not in used}
    for col in cov_map.values():
        if col not in header:
            raise MissingColumn(col)
    pos = {h: i for i, h in enumerate(header)}

    ids, time, event, treat, covs = [], [], [], [], []
    potentials = all(p in header for p in POTENTIAL)
    pot = []
    for r_no, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ValidationError(f"row {r_no}: expected {len(header)} fields, got {len(row)}")
        ids.append(row[pos[cols["id"]]].strip())
        t = _number(r_no, cols["time"], row[pos[cols["time"]]])
        if t <= 0:
            raise NegativeTime(r_no, row[pos[cols["time"]]])
        time.append(t)
        event.append(_flag(r_no, cols["event"], row[pos[cols["event"]]]))
        treat.append(_flag(r_no, cols["treat"], row[pos[cols["treat"]]]))
        covs.append([_number(r_no, c, row[pos[c]]) for c in cov_map.values()])
        if potentials:
            pot.append([_number(r_no, p, row[pos[p]]) for p in POTENTIAL])

    n = len(ids)
    return Dataset(
        ids,
        np.array(time, dtype=float),
        np.array(event, dtype=np.int64),
        np.array(treat, dtype=np.int64),
        np.array(covs, dtype=float).reshape(n, len(cov_map)),
        list(cov_map.keys()),
        np.array(pot, dtype=float) if potentials else None,
    )


def write_csv(dataset: Dataset, path, header_comment: str | None = None,
              potential_outcomes: bool = True) -> None:
    """Write ``dataset`` so that :func:`read_csv` reproduces it exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        extra = list(POTENTIAL) if (potential_outcomes and dataset.potential_times is not None) else []
        w.writerow(list(REQUIRED) + list(dataset.covariate_names) + extra)
        for i in range(dataset.n):
            row = [dataset.ids[i], repr(float(dataset.time[i])), int(dataset.event[i]),
                   int(dataset.treatment[i])]
            row += [repr(float(v)) for v in dataset.covariates[i]]
            if extra:
                row += [repr(float(v)) for v in dataset.potential_times[i]]
            w.writerow(row)
