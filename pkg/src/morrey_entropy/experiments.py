"""Batch experiments: JSON configuration, regime reports, (j, k) sweeps, slope fits."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._numbers import as_rational, fmt
from .entropy import (
    EntropyBoundSeries,
    _step3_bound,
    covering_epsilon,
    packing_lower_bound,
    schuett_reference,
    volume_lower_bound,
)
from .operators import EmbeddingSpec
from .regimes import ParamTuple, classify, is_compact, two_sided_condition

SWEEP_SCHEMA = "morrey-entropy-sweep/1"
SWEEP_COLUMNS = ("j", "k", "lower", "upper", "schuett_ref", "methods")
KNOWN_METHODS = ("volume", "packing", "covering", "schuett", "step3")
MAX_LATTICE_BITS = 12


class ConfigError(ValueError):
    """The experiment configuration is malformed."""


def _tuple_from_record(rec: dict) -> ParamTuple:
    rec = dict(rec)
    d = rec.pop("d", 1)
    q1, q2 = rec.pop("q1", math.inf), rec.pop("q2", math.inf)
    u1, p1, u2, p2 = (rec.pop(k) for k in ("u1", "p1", "u2", "p2"))
    if "delta" in rec:
        t = ParamTuple.from_delta(d, rec.pop("delta"), u1, p1, u2, p2, q1, q2)
    elif "s1" in rec:
        half = Fraction(int(d), 2)
        t = ParamTuple(d, as_rational(rec.pop("s1")) + half, u1, p1,
                       as_rational(rec.pop("s2", 0)) + half, u2, p2, q1, q2)
    else:
        t = ParamTuple(d, rec.pop("sigma1"), u1, p1, rec.pop("sigma2", 0), u2, p2, q1, q2)
    if rec:
        raise ConfigError(f"unknown parameter keys {sorted(rec)}")
    return t


@dataclass(frozen=True)
class ExperimentConfig:
    """A parsed experiment description.

    ``params`` holds the raw parameter records (parsing errors are reported
    per record by :func:`run_classify`); ``k_unit = "D"`` multiplies every
    ``k`` by the lattice size ``2**(jd)`` of the level being swept.
    """

    params: tuple[dict, ...]
    j_min: int = 1
    j_max: int = 3
    ks: tuple[int, ...] = (1, 2, 4, 8)
    k_unit: str = "1"
    methods: tuple[str, ...] = ("volume", "packing", "covering", "schuett", "step3")
    seed: int = 0
    samples: int = 256
    out: str | None = None

    def __post_init__(self):
        if not self.params:
            raise ConfigError("config needs at least one parameter tuple")
        if not 0 <= self.j_min <= self.j_max:
            raise ConfigError("need 0 <= j_min <= j_max")
        if any(k < 1 for k in self.ks) or list(self.ks) != sorted(set(self.ks)):
            raise ConfigError("k values must be positive and strictly increasing")
        if self.k_unit not in ("1", "D"):
            raise ConfigError("k_unit must be '1' or 'D'")
        bad = set(self.methods) - set(KNOWN_METHODS)
        if bad:
            raise ConfigError(f"unknown methods {sorted(bad)}")
        if self.seed < 0 or self.samples < 0:
            raise ConfigError("seed and samples must be nonnegative")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        doc = dict(doc)
        params = doc.pop("params", None)
        if isinstance(params, dict):
            params = [params]
        if not isinstance(params, list):
            raise ConfigError("'params' must be an object or a list of objects")
        kw: dict = {"params": tuple(params)}
        levels = doc.pop("levels", None)
        if levels is not None:
            kw["j_min"], kw["j_max"] = int(levels["min"]), int(levels["max"])
        k = doc.pop("k", None)
        if isinstance(k, list):
            kw["ks"] = tuple(int(x) for x in k)
        elif isinstance(k, dict):
            kw["ks"] = tuple(range(int(k["start"]), int(k["stop"]) + 1, int(k.get("step", 1))))
        elif k is not None:
            raise ConfigError("'k' must be a list or {start, stop, step}")
        if "k_unit" in doc:
            kw["k_unit"] = str(doc.pop("k_unit"))
        if "methods" in doc:
            kw["methods"] = tuple(doc.pop("methods"))
        for name in ("seed", "samples"):
            if name in doc:
                kw[name] = int(doc.pop(name))
        if "out" in doc:
            kw["out"] = str(doc.pop("out"))
        if doc:
            raise ConfigError(f"unknown config keys {sorted(doc)}")
        return cls(**kw)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def tuple_at(self, i: int = 0) -> ParamTuple:
        try:
            return _tuple_from_record(self.params[i])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"invalid parameter tuple {i}: {exc}") from exc

    def ks_for(self, j: int, d: int) -> list[int]:
        unit = 1 << (j * d) if self.k_unit == "D" else 1
        return [unit * k for k in self.ks]

    def check_lattice(self, d: int) -> None:
        if self.j_max * d > MAX_LATTICE_BITS:
            raise ConfigError(f"j_max*d = {self.j_max * d} exceeds {MAX_LATTICE_BITS}")


def _num(x) -> float | str:
    return "inf" if x == math.inf else float(x)


def classify_record(t: ParamTuple) -> dict:
    """JSON-ready classification of one tuple with every threshold term."""
    reg = classify(t)
    th = t.thresholds()
    return {
        "params": t.as_dict(),
        "kind": reg.kind.value,
        "exponent": float(reg.exponent),
        "exponent_exact": fmt(reg.exponent),
        "compact": is_compact(t),
        "delta": float(t.delta),
        "thresholds": {name: float(v) for name, v in th.items()},
        "max_threshold": max(th, key=lambda n: th[n]),
        "two_sided_condition": two_sided_condition(t),
        "gap": reg.gap,
    }


def run_classify(config: ExperimentConfig) -> list[dict]:
    """One record per parameter tuple, in order; invalid tuples give ``{"error": ...}``."""
    out = []
    for i, rec in enumerate(config.params):
        try:
            out.append(classify_record(_tuple_from_record(rec)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            out.append({"index": i, "error": f"{type(exc).__name__}: {exc}", "params": rec})
    return out


def cell_seed(seed: int, j: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, j, k]).generate_state(1)[0])


@dataclass(frozen=True)
class _Cell:
    j: int
    k: int
    lower: float
    upper: float
    schuett: float | None
    methods: tuple[str, ...]


def _run_cell(spec: EmbeddingSpec, t: ParamTuple, j: int, k: int, config: ExperimentConfig) -> _Cell:
    lo, up, tags = 0.0, math.inf, []
    m = config.methods
    if "volume" in m:
        lo = max(lo, volume_lower_bound(spec, k))
        tags.append("volume")
    if "packing" in m:
        lo = max(lo, packing_lower_bound(spec, k, config.samples, cell_seed(config.seed, j, k)))
        tags.append("packing")
    if "step3" in m:
        s3 = _step3_bound(spec, k)
        if s3 is not None:
            lo = max(lo, s3)
            tags.append("step3")
    if "covering" in m:
        up, hit = covering_epsilon(spec, k)
        tags.append("covering!limit" if hit else "covering")
    ref = None
    if "schuett" in m:
        ref = schuett_reference(t.u1, t.u2, spec.size, k)
    return _Cell(j, k, lo, up, ref, tuple(tags))


def _fmt_float(x: float | None) -> str:
    if x is None or x == math.inf:
        return ""
    return f"{x:.12g}"


def sweep_rows(config: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Compute every ``(j, k)`` cell of the sweep for the first parameter tuple."""
    t = config.tuple_at(0)
    config.check_lattice(t.d)
    jobs = []
    for j in range(config.j_min, config.j_max + 1):
        spec = EmbeddingSpec.level_embedding(t.d, j, (t.u1, t.p1), (t.u2, t.p2))
        for k in config.ks_for(j, t.d):
            jobs.append((spec, j, k))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(lambda a: _run_cell(a[0], t, a[1], a[2], config), jobs))
    else:
        cells = [_run_cell(spec, t, j, k, config) for spec, j, k in jobs]
    rows = []
    for j in sorted({c.j for c in cells}):
        group = sorted((c for c in cells if c.j == j), key=lambda c: c.k)
        series = EntropyBoundSeries.from_bounds(
            None, [c.k for c in group], [c.lower for c in group], [c.upper for c in group],
            [c.methods for c in group])
        for c, e in zip(group, series.entries):
            rows.append({"j": j, "k": e.k, "lower": e.lower, "upper": e.upper,
                         "schuett_ref": c.schuett, "methods": "+".join(e.methods)})
    return rows


def render_sweep_csv(config: ExperimentConfig, rows: list[dict]) -> str:
    buf = io.StringIO()
    t = config.tuple_at(0)
    params = ",".join(f"{k}={v}" for k, v in t.as_dict().items())
    buf.write(f"# {SWEEP_SCHEMA} seed={config.seed} samples={config.samples} {params}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([r["j"], r["k"], _fmt_float(r["lower"]), _fmt_float(r["upper"]),
                    _fmt_float(r["schuett_ref"]), r["methods"]])
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def run_sweep(config: ExperimentConfig, out: str | os.PathLike | None = None, threads: int = 1) -> str:
    """Run the sweep; write ``sweep.csv`` atomically into ``out`` when given. Returns the CSV text."""
    text = render_sweep_csv(config, sweep_rows(config, threads))
    out = out if out is not None else config.out
    if out is not None:
        write_atomic(Path(out) / "sweep.csv", text)
    return text


def read_sweep_csv(path_or_text: str | os.PathLike) -> list[dict]:
    """Parse a sweep table (path or literal CSV text); empty cells become ``None``."""
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(path_or_text).read_text()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = []
    for r in csv.DictReader(lines):
        row = {}
        for key, val in r.items():
            if key in ("j", "k"):
                row[key] = int(val)
            elif key == "methods":
                row[key] = val
            else:
                row[key] = float(val) if val != "" else None
        rows.append(row)
    return rows


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    k_range: tuple[int, int]
    n: int
    mode: str = "power"
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared must lie in [0, 1]")

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "k_range": list(self.k_range), "n": self.n, "mode": self.mode,
                "flags": list(self.flags)}


def fit_series(ks, values, mode: str = "power") -> FitResult:
    """Least squares of ``log(value)`` against ``log k`` (power) or ``k`` (geometric)."""
    if mode not in ("power", "geometric"):
        raise ValueError("mode must be 'power' or 'geometric'")
    ks = np.asarray(ks, dtype=float)
    vals = np.asarray(values, dtype=float)
    if len(ks) < 3:
        raise ValueError("need at least 3 points to fit")
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise ValueError("values must be positive and finite")
    x = np.log(ks) if mode == "power" else ks
    y = np.log(vals)
    if np.ptp(x) == 0:
        raise ValueError("all points share the same abscissa")
    k_range = (int(ks.min()), int(ks.max()))
    if np.ptp(y) == 0:
        return FitResult(0.0, float(y[0]), 0.0, k_range, len(ks), mode, ("constant",))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    return FitResult(float(slope), float(intercept), min(max(r2, 0.0), 1.0), k_range, len(ks), mode)


def run_fit(csv_source, column: str = "lower", k_window: tuple[int, int] | None = None,
            mode: str = "power", j: int | None = None) -> FitResult:
    """Fit one column of a sweep table over ``k_window`` (inclusive), optionally for one ``j``."""
    rows = read_sweep_csv(csv_source)
    if rows and column not in rows[0]:
        raise ValueError(f"unknown column {column!r}")
    sel = [r for r in rows
           if (j is None or r["j"] == j)
           and (k_window is None or k_window[0] <= r["k"] <= k_window[1])
           and r[column] is not None]
    if len(sel) < 3:
        raise ValueError(f"need at least 3 rows in the window, got {len(sel)}")
    return fit_series([r["k"] for r in sel], [r[column] for r in sel], mode)
