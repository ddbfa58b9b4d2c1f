"""Sweep configuration, single-point records and CSV output."""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .analysis import RELATIVE_SWITCH
from .errors import ConfigError, PhaseFluctError
from .evolution import EvolutionSettings
from .fock import DEFAULT_LEAKAGE_THRESHOLD
from .markers import UNDEF
from .pipeline import exact_point
from .processes import PROCESS_ROLES, PROCESSES, ProcessSpec, closed_form, default_cutoffs

THREADS_ENV = "PHASEFLUCT_THREADS"

CSV_COLUMNS = (
    "process", "formalism", "alpha_sq", "theta", "g", "t", "gt",
    "N_bar", "var_N", "d", "mean_C", "mean_S", "mean_C2", "mean_S2",
    "var_C", "var_S", "T", "U", "S_param", "Q",
    "U_formula", "S_formula", "Q_formula", "d_formula",
    "rel_err_U", "validity_flag", "leakage", "error",
)


@dataclass(frozen=True)
class TimeGrid:
    """Interaction times: either explicit ``values`` or a lin/log range."""

    min: float = 0.0
    max: float = 0.0
    count: int = 1
    scale: str = "lin"
    values: Optional[tuple] = None

    def times(self) -> tuple:
        if self.values is not None:
            return tuple(float(v) for v in self.values)
        if self.count == 1:
            return (float(self.min),)
        if self.scale == "log":
            grid = np.geomspace(self.min, self.max, self.count)
        else:
            grid = np.linspace(self.min, self.max, self.count)
        return tuple(float(v) for v in grid)


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep settings.  Build with :func:`config_from_dict`."""

    process: str
    alpha_sq: tuple
    theta: tuple
    g: float
    t: TimeGrid
    formalism: str = "bp"
    cutoffs: Optional[tuple] = None
    accuracy: float = 1e-10
    leakage: float = DEFAULT_LEAKAGE_THRESHOLD
    comparison_tol: float = 1e-3
    output: Optional[str] = None

    def cutoffs_for(self, alpha_sq: float) -> tuple:
        if self.cutoffs is not None:
            return self.cutoffs
        return default_cutoffs(self.process, alpha_sq)

    def evolution_settings(self) -> EvolutionSettings:
        return EvolutionSettings(accuracy=self.accuracy, leakage_threshold=self.leakage)

    def points(self) -> list:
        """All (alpha_sq, theta, t) tuples in lexicographic order."""
        return sorted(
            (a, th, t)
            for a in set(self.alpha_sq)
            for th in set(self.theta)
            for t in set(self.t.times())
        )


def _number(data, key, kind=float):
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", field=key)
    return kind(value)


def _number_list(data, key):
    value = data.get(key)
    if value is None:
        raise ConfigError(f"missing required field {key!r}", field=key)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key} must be a non-empty list of numbers", field=key)
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key} entries must be numbers, got {v!r}", field=key)
    return tuple(float(v) for v in value)


def _time_grid(value) -> TimeGrid:
    if isinstance(value, (int, float, list)) and not isinstance(value, bool):
        values = _number_list({"t": value}, "t")
        if any(v < 0 for v in values):
            raise ConfigError("t values must be non-negative", field="t")
        return TimeGrid(min=min(values), max=max(values), count=len(values),
                        values=values)
    if not isinstance(value, dict):
        raise ConfigError("t must be a list of times or a table", field="t")
    unknown = set(value) - {"min", "max", "count", "scale"}
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in t", field="t")
    for key in ("min", "max", "count"):
        if key not in value:
            raise ConfigError(f"missing required field t.{key}", field=f"t.{key}")
    t_min = _number(value, "min")
    t_max = _number(value, "max")
    count = value["count"]
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError(f"t.count must be an integer >= 1, got {count!r}",
                          field="t.count")
    scale = value.get("scale", "lin")
    if scale not in ("lin", "log"):
        raise ConfigError(f"t.scale must be 'lin' or 'log', got {scale!r}",
                          field="t.scale")
    if t_min < 0:
        raise ConfigError("t.min must be non-negative", field="t.min")
    if t_min > t_max:
        raise ConfigError("t.min must not exceed t.max", field="t.max")
    if scale == "log" and t_min <= 0:
        raise ConfigError("log time grid needs t.min > 0", field="t.min")
    return TimeGrid(t_min, t_max, count, scale)


_TOP_LEVEL = {"process", "formalism", "alpha_sq", "theta", "g", "t", "cutoffs",
              "tolerances", "output"}


def config_from_dict(data: dict) -> SweepConfig:
    """Validate a parsed configuration mapping and fill in defaults."""
    unknown = set(data) - _TOP_LEVEL
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"unknown configuration key {name!r}", field=name)
    process = data.get("process")
    if process not in PROCESSES:
        raise ConfigError(
            f"process must be one of {PROCESSES}, got {process!r}", field="process"
        )
    formalism = str(data.get("formalism", "bp")).lower()
    if formalism not in ("sg", "bp"):
        raise ConfigError(f"formalism must be 'sg' or 'bp', got {formalism!r}",
                          field="formalism")
    alpha_sq = _number_list(data, "alpha_sq")
    if any(a < 0 for a in alpha_sq):
        raise ConfigError("alpha_sq entries must be non-negative", field="alpha_sq")
    theta = _number_list(data, "theta") if "theta" in data else (0.0,)
    if "g" not in data:
        raise ConfigError("missing required field 'g'", field="g")
    g = _number(data, "g")
    if g < 0:
        raise ConfigError("g must be non-negative", field="g")
    if "t" not in data:
        raise ConfigError("missing required field 't'", field="t")
    grid = _time_grid(data["t"])

    cutoffs = data.get("cutoffs")
    if cutoffs is not None:
        n_modes = len(PROCESS_ROLES[process])
        if (not isinstance(cutoffs, list) or len(cutoffs) != n_modes
                or any(isinstance(c, bool) or not isinstance(c, int) or c < 1
                       for c in cutoffs)):
            raise ConfigError(
                f"cutoffs must be {n_modes} positive integers for {process}",
                field="cutoffs",
            )
        cutoffs = tuple(cutoffs)

    tols = data.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ConfigError("tolerances must be a table", field="tolerances")
    extra = set(tols) - {"accuracy", "leakage", "comparison"}
    if extra:
        name = sorted(extra)[0]
        raise ConfigError(f"unknown tolerance {name!r}", field=f"tolerances.{name}")
    resolved = {}
    for key, default in (("accuracy", 1e-10), ("leakage", DEFAULT_LEAKAGE_THRESHOLD),
                         ("comparison", 1e-3)):
        value = _number(tols, key) if key in tols else default
        if value <= 0:
            raise ConfigError(f"tolerances.{key} must be positive",
                              field=f"tolerances.{key}")
        resolved[key] = value

    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output must be a path string", field="output")

    return SweepConfig(
        process=process,
        alpha_sq=alpha_sq,
        theta=theta,
        g=g,
        t=grid,
        formalism=formalism,
        cutoffs=cutoffs,
        accuracy=resolved["accuracy"],
        leakage=resolved["leakage"],
        comparison_tol=resolved["comparison"],
        output=output,
    )


def load_config_dict(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        where = f" (line {line})" if line else ""
        raise ConfigError(f"{path}: TOML parse error{where}: {exc}", line=line) from exc


def parse_config(path) -> SweepConfig:
    return config_from_dict(load_config_dict(path))


@dataclass(frozen=True)
class SweepRecord:
    process: str
    formalism: str
    alpha_sq: float
    theta: float
    g: float
    t: float
    gt: float
    N_bar: object = UNDEF
    var_N: object = UNDEF
    d: object = UNDEF
    mean_C: object = UNDEF
    mean_S: object = UNDEF
    mean_C2: object = UNDEF
    mean_S2: object = UNDEF
    var_C: object = UNDEF
    var_S: object = UNDEF
    T: object = UNDEF
    U: object = UNDEF
    S_param: object = UNDEF
    Q: object = UNDEF
    U_formula: object = UNDEF
    S_formula: object = UNDEF
    Q_formula: object = UNDEF
    d_formula: object = UNDEF
    rel_err_U: object = UNDEF
    validity_flag: bool = False
    leakage: object = UNDEF
    error: str = ""

    def csv_row(self) -> list:
        return [format_value(getattr(self, name)) for name in CSV_COLUMNS]


def format_value(value) -> str:
    if value is UNDEF or value is None:
        return "undef"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    value = float(value)
    if not math.isfinite(value):
        return "undef"
    return format(value, ".17g")


def _relative(a, b):
    if a is UNDEF or b is UNDEF:
        return UNDEF
    delta = abs(a - b)
    return delta if abs(b) < RELATIVE_SWITCH else delta / abs(b)


def run_point(
    spec: ProcessSpec,
    formalism: str = "bp",
    settings: Optional[EvolutionSettings] = None,
    cutoffs: Optional[Sequence[int]] = None,
) -> SweepRecord:
    """Exact pipeline plus closed forms for one parameter point."""
    formula = closed_form(spec, warn=False)
    point = exact_point(spec, formalism, cutoffs=cutoffs, settings=settings)
    m, cn = point.moments, point.cn
    return SweepRecord(
        process=spec.kind,
        formalism=formalism.lower(),
        alpha_sq=spec.alpha_sq,
        theta=spec.theta,
        g=spec.g,
        t=spec.t,
        gt=spec.gt,
        N_bar=m.mean_N,
        var_N=m.var_N,
        d=cn.d,
        mean_C=m.mean_C,
        mean_S=m.mean_S,
        mean_C2=m.mean_C2,
        mean_S2=m.mean_S2,
        var_C=m.var_C,
        var_S=m.var_S,
        T=cn.T,
        U=cn.U,
        S_param=cn.S_param,
        Q=cn.Q,
        U_formula=formula.U,
        S_formula=formula.S_param,
        Q_formula=formula.Q,
        d_formula=formula.d,
        rel_err_U=_relative(cn.U, formula.U),
        validity_flag=spec.beyond_validity,
        leakage=point.leakage,
    )


def _failed_record(spec: ProcessSpec, formalism: str, exc: Exception) -> SweepRecord:
    return SweepRecord(
        process=spec.kind, formalism=formalism, alpha_sq=spec.alpha_sq,
        theta=spec.theta, g=spec.g, t=spec.t, gt=spec.gt,
        validity_flag=spec.beyond_validity,
        error=f"{type(exc).__name__}: {exc}".replace("\n", " ").replace(",", ";"),
    )


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SweepSummary:
    rows: int
    failures: int
    max_rel_err_U: float
    all_d_negative: bool
    output: Optional[str] = None
    error_kinds: tuple = field(default_factory=tuple)


def run_sweep(config: SweepConfig, threads: Optional[int] = None):
    """Evaluate every grid point; returns ``(records, summary)``.

    Points run concurrently but records come back in lexicographic
    ``(alpha_sq, theta, t)`` order.  Failures become rows with ``error``
    set; the sweep carries on.
    """
    settings = config.evolution_settings()

    def work(point):
        a2, theta, t = point
        spec = ProcessSpec.create(config.process, a2, theta, config.g, t)
        try:
            return run_point(spec, config.formalism, settings, config.cutoffs_for(a2))
        except PhaseFluctError as exc:
            return _failed_record(spec, config.formalism, exc)

    points = config.points()
    workers = min(threads or thread_count(), max(len(points), 1))
    if workers == 1:
        records = [work(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(work, points))

    ok = [r for r in records if not r.error]
    rel = [r.rel_err_U for r in ok if r.rel_err_U is not UNDEF]
    summary = SweepSummary(
        rows=len(records),
        failures=len(records) - len(ok),
        max_rel_err_U=max(rel) if rel else math.nan,
        all_d_negative=all(r.d < 0 for r in ok if r.t > 0 and r.alpha_sq > 0),
        output=config.output,
        error_kinds=tuple(sorted({r.error.split(":")[0] for r in records if r.error})),
    )
    if config.output:
        write_csv(records, config.output)
    return records, summary


def records_to_csv(records) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for rec in records:
        buf.write(",".join(rec.csv_row()) + "\n")
    return buf.getvalue()


def write_csv(records, path) -> None:
    Path(path).write_bytes(records_to_csv(records).encode("ascii"))


__all__ = [
    "CSV_COLUMNS", "SweepConfig", "SweepRecord", "SweepSummary", "TimeGrid",
    "config_from_dict", "load_config_dict", "parse_config", "records_to_csv",
    "run_point", "run_sweep", "write_csv",
]
