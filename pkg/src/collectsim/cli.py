"""Experiment runner.

Parses a flat key=value config, sweeps loads across policies and seeds,
evaluates the closed-form bounds, and writes comma-separated result tables
(atomically, 6 significant digits). Verbs: ``run`` (simulate + bounds),
``bounds`` (formulas only), ``trace`` (single run with a per-message dump).

Config grammar: one ``section.key = value`` per line, ``#`` starts a
comment, blank lines ignored. SNR is given in dB here and converted to a
linear ratio at this boundary; the decoding threshold and path-loss exponent
are linear. Recognized keys and defaults are listed in KEYS.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .bounds import bound_report
from .commmodel import reception_radius
from .core import ConfigurationError, ScenarioConfig
from .engine import EventTrace, StopRule, run
from .policies import PolicyKind, make_policy
from .stats import SimResult, TraceStats, pool_stats, trace_stats

MAX_MESSAGES_PER_CELL = 200_000

# key -> (required, default, help)
KEYS = {
    "scenario.area": (True, None, "region area, squared distance units"),
    "scenario.speed": (True, None, "collector speed (inf allowed)"),
    "scenario.reception_time": (True, None, "time to receive one message"),
    "scenario.snr_db": (True, None, "reference SNR at unit distance, dB"),
    "scenario.snr_threshold": (False, "2.0", "decoding threshold, linear"),
    "scenario.path_loss": (False, "4.0", "path-loss exponent in [2, 6]"),
    "scenario.collectors": (False, "1", "number of collectors"),
    "policy.kinds": (False, "grid_partitioning",
                     "comma-separated policy names"),
    "policy.inner": (False, "grid_partitioning",
                     "per-subregion policy for multi_partitioning"),
    "sweep.loads": (True, None, "comma-separated loads in (0, 1.2]"),
    "sweep.snr_db": (False, "", "optional SNR sweep (bounds verb only)"),
    "run.messages": (False, "20000", "completed messages per (policy,load,seed)"),
    "run.seeds": (False, "1,2,3", "comma-separated non-negative seeds"),
    "run.warmup": (False, "0.2", "warmup fraction of completed messages"),
}

RESULT_COLUMNS = (
    "policy", "load", "arrival_rate", "collectors", "seeds", "messages",
    "mean_delay", "delay_ci", "mean_travel_wait", "travel_wait_ci",
    "mean_service_wait", "service_wait_ci", "mean_occupancy", "occupancy_ci",
    "rho_measured", "stability", "delay_over_bound",
    "pk_wait", "single_lb", "partitioning_delay", "multi_lb_mdm",
    "multi_lb_partition", "multi_lb_avg", "multi_partitioning_delay",
)

BOUNDS_COLUMNS = (
    "snr_db", "reception_radius", "load", "arrival_rate", "collectors",
    "pk_wait", "single_lb", "partitioning_delay", "multi_lb_mdm",
    "multi_lb_partition", "multi_lb_avg", "multi_partitioning_delay",
)

MESSAGE_COLUMNS = ("id", "arrival_time", "x", "y", "reception_start",
                   "departure_time", "wait_travel", "wait_service")


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated experiment description (SNR already in dB as given)."""

    area: float
    speed: float
    reception_time: float
    snr_db: float
    snr_threshold: float
    path_loss: float
    collectors: int
    policies: tuple[PolicyKind, ...]
    inner: PolicyKind
    loads: tuple[float, ...]
    snr_db_sweep: tuple[float, ...]
    seeds: tuple[int, ...]
    messages: int
    warmup: float


@dataclass(frozen=True)
class ResultRow:
    """One pooled table row: a (policy, load) cell plus its bound columns."""

    policy: str
    load: float
    result: SimResult
    bounds: object  # BoundReport

    def cells(self) -> list[str]:
        r, b = self.result, self.bounds
        denominator = b.single_lb if r.collectors == 1 else b.multi_lb_avg
        ratio = (r.mean_delay / denominator
                 if math.isfinite(denominator) and denominator > 0
                 else math.nan)
        values = [
            self.policy, _fmt(self.load), _fmt(r.arrival_rate),
            str(r.collectors), ";".join(str(s) for s in r.seeds),
            str(r.messages_counted),
            _fmt(r.mean_delay), _fmt(r.delay_ci),
            _fmt(r.mean_travel_wait), _fmt(r.travel_wait_ci),
            _fmt(r.mean_service_wait), _fmt(r.service_wait_ci),
            _fmt(r.mean_occupancy), _fmt(r.occupancy_ci),
            _fmt(r.rho_measured), r.stability, _fmt(ratio),
            _fmt(b.pk_wait), _fmt(b.single_lb), _fmt(b.partitioning_delay),
            _fmt(b.multi_lb_mdm), _fmt(b.multi_lb_partition),
            _fmt(b.multi_lb_avg), _fmt(b.multi_partitioning_delay),
        ]
        return values


def _fmt(value, digits: int = 6) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.{digits}g}"


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


# --------------------------------------------------------------------------
# config parsing


def parse_config_text(text: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        if key in mapping:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        mapping[key] = value
    return mapping


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {value!r}")


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {value!r}")


def _parse_float_list(key: str, value: str) -> tuple[float, ...]:
    if not value.strip():
        return ()
    return tuple(_parse_float(key, part.strip())
                 for part in value.split(","))


def _parse_int_list(key: str, value: str) -> tuple[int, ...]:
    if not value.strip():
        return ()
    return tuple(_parse_int(key, part.strip()) for part in value.split(","))


def build_spec(mapping: dict[str, str]) -> ExperimentSpec:
    """Validate a parsed config mapping into an ExperimentSpec."""
    for key in mapping:
        if key not in KEYS:
            raise ConfigurationError(f"{key}: unknown configuration key")
    values: dict[str, str] = {}
    for key, (required, default, _) in KEYS.items():
        if key in mapping:
            values[key] = mapping[key]
        elif required:
            raise ConfigurationError(f"{key}: required key is missing")
        else:
            values[key] = default

    try:
        policies = tuple(PolicyKind(p.strip())
                         for p in values["policy.kinds"].split(",") if p.strip())
    except ValueError as exc:
        raise ConfigurationError(f"policy.kinds: {exc}")
    if not policies:
        raise ConfigurationError("policy.kinds: at least one policy required")
    try:
        inner = PolicyKind(values["policy.inner"])
    except ValueError as exc:
        raise ConfigurationError(f"policy.inner: {exc}")

    loads = _parse_float_list("sweep.loads", values["sweep.loads"])
    for load in loads:
        if not 0.0 < load <= 1.2:
            raise ConfigurationError(
                f"sweep.loads: load {load} outside (0, 1.2]")
    seeds = _parse_int_list("run.seeds", values["run.seeds"])
    if not seeds:
        raise ConfigurationError("run.seeds: at least one seed required")
    for seed in seeds:
        if seed < 0:
            raise ConfigurationError(f"run.seeds: seed {seed} is negative")
    messages = _parse_int("run.messages", values["run.messages"])
    if not 0 < messages <= MAX_MESSAGES_PER_CELL:
        raise ConfigurationError(
            f"run.messages: must lie in [1, {MAX_MESSAGES_PER_CELL}], "
            f"got {messages}")
    warmup = _parse_float("run.warmup", values["run.warmup"])
    if not 0.0 <= warmup < 1.0:
        raise ConfigurationError(
            f"run.warmup: must lie in [0, 1), got {warmup}")
    collectors = _parse_int("scenario.collectors", values["scenario.collectors"])

    spec = ExperimentSpec(
        area=_parse_float("scenario.area", values["scenario.area"]),
        speed=_parse_float("scenario.speed", values["scenario.speed"]),
        reception_time=_parse_float("scenario.reception_time",
                                    values["scenario.reception_time"]),
        snr_db=_parse_float("scenario.snr_db", values["scenario.snr_db"]),
        snr_threshold=_parse_float("scenario.snr_threshold",
                                   values["scenario.snr_threshold"]),
        path_loss=_parse_float("scenario.path_loss", values["scenario.path_loss"]),
        collectors=collectors,
        policies=policies,
        inner=inner,
        loads=loads,
        snr_db_sweep=_parse_float_list("sweep.snr_db", values["sweep.snr_db"]),
        seeds=seeds,
        messages=messages,
        warmup=warmup,
    )
    # fail fast on scenario-level problems (positivity, path-loss range)
    if spec.loads:
        scenario_config(spec, spec.loads[0], spec.seeds[0])
    return spec


def load_spec(path: str | Path) -> ExperimentSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}")
    return build_spec(parse_config_text(text))


def scenario_config(spec: ExperimentSpec, load: float, seed: int,
                    snr_db: float | None = None) -> ScenarioConfig:
    """Concrete scenario for one sweep point: the arrival rate is derived
    from the requested per-collector load."""
    return ScenarioConfig(
        area=spec.area,
        arrival_rate=load * spec.collectors / spec.reception_time,
        reception_time=spec.reception_time,
        speed=spec.speed,
        snr_ref=db_to_linear(snr_db if snr_db is not None else spec.snr_db),
        snr_threshold=spec.snr_threshold,
        path_loss=spec.path_loss,
        collectors=spec.collectors,
        seed=seed,
    )


# --------------------------------------------------------------------------
# output helpers


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_messages(trace: EventTrace, path: str | Path) -> Path:
    """Write one row per completed message, sorted by departure time."""
    path = Path(path)
    lines = [",".join(MESSAGE_COLUMNS)]
    for m in sorted(trace.completed, key=lambda m: m.departure_time):
        lines.append(",".join((
            str(m.id), _fmt(m.arrival_time, 12), _fmt(m.location.x, 12),
            _fmt(m.location.y, 12), _fmt(m.reception_start, 12),
            _fmt(m.departure_time, 12), _fmt(m.wait_travel, 12),
            _fmt(m.wait_service, 12))))
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


# --------------------------------------------------------------------------
# experiment execution


def _run_cell(args) -> tuple[str, float, TraceStats]:
    spec, kind, load, seed = args
    config = scenario_config(spec, load, seed)
    policy = make_policy(kind, config, inner=spec.inner)
    trace = run(config, policy, StopRule(max_messages=spec.messages))
    return kind.value, load, trace_stats(trace, warmup_fraction=spec.warmup)


def run_experiment(spec: ExperimentSpec, out_dir: str | Path,
                   parallel: int = 1) -> Path:
    """Simulate every (policy, load, seed) cell, pool seeds, and write
    results.csv with one row per (policy, load)."""
    jobs = [(spec, kind, load, seed)
            for kind in spec.policies
            for load in spec.loads
            for seed in spec.seeds]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_run_cell, jobs, chunksize=1))
    else:
        outcomes = [_run_cell(job) for job in jobs]

    grouped: dict[tuple[str, float], list[TraceStats]] = {}
    for policy_name, load, part in outcomes:
        grouped.setdefault((policy_name, load), []).append(part)

    lines = [",".join(RESULT_COLUMNS)]
    for kind in spec.policies:
        for load in spec.loads:
            parts = grouped[(kind.value, load)]
            pooled = pool_stats(parts)
            report = bound_report(scenario_config(spec, load, spec.seeds[0]))
            row = ResultRow(policy=kind.value, load=load, result=pooled,
                            bounds=report)
            lines.append(",".join(row.cells()))
    out = Path(out_dir) / "results.csv"
    atomic_write_text(out, "\n".join(lines) + "\n")
    return out


def bounds_table(spec: ExperimentSpec, out_dir: str | Path) -> Path:
    """Evaluate the closed forms only (no simulation) over the load sweep,
    optionally crossed with an SNR sweep."""
    snrs = spec.snr_db_sweep if spec.snr_db_sweep else (spec.snr_db,)
    lines = [",".join(BOUNDS_COLUMNS)]
    for snr_db in snrs:
        for load in spec.loads:
            config = scenario_config(spec, load, spec.seeds[0], snr_db=snr_db)
            b = bound_report(config)
            lines.append(",".join((
                _fmt(snr_db), _fmt(b.reception_radius), _fmt(load),
                _fmt(config.arrival_rate), str(config.collectors),
                _fmt(b.pk_wait), _fmt(b.single_lb),
                _fmt(b.partitioning_delay), _fmt(b.multi_lb_mdm),
                _fmt(b.multi_lb_partition), _fmt(b.multi_lb_avg),
                _fmt(b.multi_partitioning_delay))))
    out = Path(out_dir) / "bounds.csv"
    atomic_write_text(out, "\n".join(lines) + "\n")
    return out


def trace_run(spec: ExperimentSpec, out_dir: str | Path) -> Path:
    """Run the first (policy, load, seed) cell and dump its messages."""
    if not spec.loads:
        raise ConfigurationError("sweep.loads: trace needs at least one load")
    kind, load, seed = spec.policies[0], spec.loads[0], spec.seeds[0]
    config = scenario_config(spec, load, seed)
    policy = make_policy(kind, config, inner=spec.inner)
    trace = run(config, policy, StopRule(max_messages=spec.messages))
    return dump_messages(trace, Path(out_dir) / "messages.csv")


# --------------------------------------------------------------------------
# entry point


def _header_lines(spec: ExperimentSpec) -> list[str]:
    radius = reception_radius(db_to_linear(spec.snr_db), spec.snr_threshold,
                              spec.path_loss)
    return [
        f"scenario: area={_fmt(spec.area)} speed={_fmt(spec.speed)} "
        f"reception_time={_fmt(spec.reception_time)} "
        f"collectors={spec.collectors}",
        f"reception_radius = {radius:.3g} (snr {_fmt(spec.snr_db)} dB, "
        f"threshold {_fmt(spec.snr_threshold)}, "
        f"path loss {_fmt(spec.path_loss)})",
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="collectsim",
        description="Mobile-collector delay experiments: simulation sweeps "
                    "and closed-form bounds.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, text in (("run", "simulate the sweep and write results.csv"),
                       ("bounds", "evaluate formulas only, write bounds.csv"),
                       ("trace", "run one cell and dump messages.csv")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seeds", default=None,
                       help="override run.seeds, e.g. 4,5,6")
        p.add_argument("--parallel", type=int, default=1,
                       help="worker processes for independent cells")

    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.config)
        if args.seeds is not None:
            seeds = _parse_int_list("--seeds", args.seeds)
            if not seeds:
                raise ConfigurationError("--seeds: at least one seed required")
            spec = replace(spec, seeds=seeds)
        for line in _header_lines(spec):
            print(line)
        if args.verb == "run":
            out = run_experiment(spec, args.out, parallel=args.parallel)
        elif args.verb == "bounds":
            out = bounds_table(spec, args.out)
        else:
            out = trace_run(spec, args.out)
        print(f"wrote {out}")
        return 0
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
