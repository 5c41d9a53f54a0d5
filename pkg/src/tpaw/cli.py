"""Command-line front end: ``tpaw {eval,optimize,simulate,figures}``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags. Every CSV starts with a
comment header holding the command and the resolved settings; such a file
is itself accepted by ``--config``, which reproduces it.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence

from . import analytics, optimizer, simulator, special, variants
from ._backend import NAME as BACKEND
from .errors import ConstraintViolation, InfeasibleObjective, NumericalFailure, TPAWError
from .model import DEFAULT_D0, DEFAULT_TAU0, EnvironmentParams, Strategy, derive_constants
from .optimizer import Objective, ObjectiveKind
from .variants import Variant, VariantKind

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

HEADER_PREFIX = "# config: "
COMMAND_PREFIX = "# command: "

FIG4_CASES = ((0.05, 0.05), (0.1, 0.1), (0.05, 0.2), (0.2, 0.05), (0.15, 0.15))
FIG_GAMMAS = {"fig2": 0.0, "fig3": 0.5}


class UsageError(Exception):
    """Invalid setting; reported with exit code 2."""


def _bool(text: str) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text: str) -> float:
    return float(str(text).strip())


def _int(text: str) -> int:
    return int(float(text)) if "e" in str(text).lower() else int(text)


def _csv_list(kind: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        return tuple(kind(x) for x in str(text).split(",") if x.strip())

    return parse


def _pairs(text: str) -> tuple:
    out = []
    for item in str(text).split(";"):
        if item.strip():
            a, b = item.split(":")
            out.append((float(a), float(b)))
    return tuple(out)


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ";".join(f"{_fmt(a)}:{_fmt(b)}" for a, b in value)
        return ",".join(_fmt(v) for v in value)
    if value is None:
        return ""
    return str(value)


@dataclass(frozen=True)
class Option:
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str
    commands: tuple


ENV_CMDS = ("eval", "optimize", "simulate")
OPTIONS = (
    Option("alpha", _float, 0.2, "adversary hashpower share", ENV_CMDS),
    Option("beta", _float, 0.2, "victim pool hashpower share", ENV_CMDS),
    Option("gamma", _float, 0.0, "network influence in fork races", ENV_CMDS),
    Option("rational", _bool, True, "pool manager extends the adversary's released block", ENV_CMDS + ("figures",)),
    Option("d0", _int, DEFAULT_D0, "canonical blocks per difficulty epoch", ENV_CMDS + ("figures",)),
    Option("tau0", _float, DEFAULT_TAU0, "target epoch duration", ENV_CMDS + ("figures",)),
    Option("p1", _float, 0.5, "pool allocation before finding a block", ("eval", "simulate")),
    Option("p2", _float, 1.0, "pool allocation while withholding", ("eval", "simulate")),
    Option("theta", _float, 1.0, "withholding budget lambda1*T ('inf' allowed)", ("eval", "simulate")),
    Option("variant", str, "tpaw", "strategy family: " + ", ".join(v.value for v in Variant), ("eval", "optimize")),
    Option("c", lambda t: None if str(t).strip() in ("", "none") else _float(t), None,
           "fork-win probability override for c-model variants", ("eval", "optimize")),
    Option("objective", str, "rho_a", "objective: " + ", ".join(k.value for k in ObjectiveKind), ("optimize",)),
    Option("n_starts", _int, 100, "local searches per region", ("optimize", "figures")),
    Option("grid_step", lambda t: None if str(t).strip() in ("", "none") else _float(t), None,
           "sweep all (alpha, beta) multiples of this step with alpha+beta < 0.5", ("optimize",)),
    Option("mode", str, "cycle", "cycle or timeline", ("simulate",)),
    Option("cycles", _int, 1_000_000, "cycles to simulate (cycle mode)", ("simulate",)),
    Option("epochs", _int, 2, "difficulty epochs (timeline mode)", ("simulate",)),
    Option("policy", str, "rescale", "timeline withholding policy: rescale or fixed", ("simulate",)),
    Option("step", _float, 0.01, "grid step for figure heatmaps", ("figures",)),
    Option("panels", _csv_list(str), ("fig2", "fig3", "fig4", "fig5"), "figure groups to produce", ("figures",)),
    Option("gamma_step", _float, 0.05, "gamma spacing for fig4", ("figures",)),
    Option("fig4_cases", _pairs, FIG4_CASES, "fig4 (alpha:beta) cases separated by ';'", ("figures",)),
)
OPTION_BY_NAME = {o.name: o for o in OPTIONS}
GLOBAL_KEYS = ("seed",)


def read_config(path: str | os.PathLike) -> tuple[dict, str | None]:
    """Settings from a ``key = value`` file, or from the header of a CSV written by this tool."""
    values: dict[str, str] = {}
    command = None
    text = Path(path).read_text(encoding="utf-8")
    from_header = any(line.startswith(HEADER_PREFIX) for line in text.splitlines())
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if from_header:
            if line.startswith(COMMAND_PREFIX):
                command = line[len(COMMAND_PREFIX):].strip()
                continue
            elif line.startswith(HEADER_PREFIX):
                line = line[len(HEADER_PREFIX):]
            elif line.startswith("#"):
                continue
            else:
                break
        elif not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values, command


def resolve(command: str, file_values: dict, flag_values: dict) -> dict:
    """Defaults < config file < flags, restricted to ``command``'s settings."""
    names = [o.name for o in OPTIONS if command in o.commands]
    resolved: dict[str, Any] = {o.name: o.default for o in OPTIONS if command in o.commands}
    resolved["seed"] = 0
    for key, raw in file_values.items():
        if key in GLOBAL_KEYS:
            resolved[key] = _int(raw)
        elif key in names:
            try:
                resolved[key] = OPTION_BY_NAME[key].parse(raw)
            except ValueError as exc:
                raise UsageError(f"config value {key}={raw!r}: {exc}") from None
        elif key not in ("out", "workers", "config"):
            raise UsageError(f"unknown setting {key!r} for {command}")
    resolved.update({k: v for k, v in flag_values.items() if k in resolved})
    return resolved


def header_lines(command: str, settings: dict) -> list[str]:
    lines = [f"{COMMAND_PREFIX}{command}"]
    lines += [f"{HEADER_PREFIX}{k}={_fmt(settings[k])}" for k in sorted(settings)]
    lines.append(f"# generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')} backend={BACKEND}")
    return lines


class CsvSink:
    """CSV writer that emits the header block and flushes every row."""

    def __init__(self, stream, command: str, settings: dict, columns: Sequence[str]):
        self.stream = stream
        for line in header_lines(command, settings):
            stream.write(line + "\n")
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(columns)
        self.columns = tuple(columns)
        stream.flush()

    def row(self, values: dict) -> None:
        self.writer.writerow([_fmt(values.get(c)) for c in self.columns])
        self.stream.flush()


def _env(settings: dict) -> EnvironmentParams:
    return EnvironmentParams(
        alpha=settings["alpha"], beta=settings["beta"], gamma=settings["gamma"],
        rational_manager=settings["rational"], d0=settings["d0"], tau0=settings["tau0"],
    )


def _kind(settings: dict) -> VariantKind:
    try:
        tag = Variant(settings["variant"])
    except ValueError:
        raise UsageError(f"unknown variant {settings['variant']!r}") from None
    return VariantKind(tag, settings.get("c"))


def _safe(f: Callable[[], float]) -> float:
    try:
        return f()
    except (TPAWError, ZeroDivisionError):
        return math.nan


# ---------------------------------------------------------------------- eval

EVAL_COLUMNS = ("variant", "alpha", "beta", "gamma", "rational", "p1", "p2", "theta", "c",
                "rho_a", "rho_pool", "rho_rest", "delta", "r1", "rs", "ru",
                "rer_a", "rer_pool", "rer_rest", "revenue_change_t1", "profit_lag")


def cmd_eval(settings: dict, out) -> None:
    env = _env(settings)
    kind = _kind(settings)
    s = Strategy(settings["p1"], settings["p2"], settings["theta"])
    report = variants.make_variant(kind, env, s).report()
    honest = analytics.honest_report(env)
    shares = special.share_terms(derive_constants(env, s))
    row = {
        "variant": kind.tag.value, "alpha": env.alpha, "beta": env.beta, "gamma": env.gamma,
        "rational": env.rational_manager, "p1": s.p1, "p2": s.p2, "theta": s.theta,
        "c": kind.c_for(env) if kind.tag.uses_c_model else None,
        "rho_a": report.rho_a, "rho_pool": report.rho_pool, "rho_rest": report.rho_rest,
        "r1": shares.r1, "rs": shares.rs, "ru": shares.ru,
    }
    for entity, col in ((analytics.Entity.ADVERSARY, "rer_a"), (analytics.Entity.POOL, "rer_pool"),
                        (analytics.Entity.REST, "rer_rest")):
        row[col] = _safe(lambda e=entity: analytics.rer(report, honest, e))
    if isinstance(report, analytics.RevenueReport):
        row["delta"] = report.delta
        row["revenue_change_t1"] = analytics.revenue_change_at_t1(env, report)
        row["profit_lag"] = analytics.profit_lag_from_report(env, report) / env.tau0
    else:
        row["delta"] = row["revenue_change_t1"] = row["profit_lag"] = math.nan
    CsvSink(out, "eval", settings, EVAL_COLUMNS).row(row)


# ------------------------------------------------------------------ optimize

OPTIMIZE_COLUMNS = ("alpha", "beta", "gamma", "objective", "variant", "p1_opt", "p2_opt", "theta_opt",
                    "value", "rer_vs_honest", "profit_lag", "n_starts", "seed", "error")


def _optimum_row(env: EnvironmentParams, objective: Objective, result) -> dict:
    """Summary of one optimum; ``profit_lag`` is in units of ``tau0``."""
    report = variants.VariantEvaluator(_report_kind(objective.variant, result.best), env, result.best).report()
    row = {
        "p1_opt": result.best.p1, "p2_opt": result.best.p2, "theta_opt": result.best.theta,
        "value": result.best_value,
        "rer_vs_honest": _safe(lambda: analytics.rer(report, analytics.honest_report(env), analytics.Entity.ADVERSARY)),
        "profit_lag": math.nan,
    }
    if isinstance(report, analytics.RevenueReport):
        row["profit_lag"] = analytics.profit_lag_from_report(env, report) / env.tau0
    return row


def _report_kind(kind: VariantKind, s: Strategy) -> VariantKind:
    """Variant that evaluates ``s``: the theta=inf optimum of T-PAW lives on the PAW path."""
    if math.isinf(s.theta) and kind.tag is Variant.TPAW_EXACT:
        return VariantKind(Variant.PAW_EXACT)
    if math.isinf(s.theta) and kind.tag is Variant.TPAW_C:
        return VariantKind(Variant.PAW_C, kind.c_override)
    if s.theta == 0 and kind.tag in (Variant.TPAW_EXACT, Variant.TPAW_C):
        return VariantKind(Variant.HONEST)
    return kind


def _optimize_task(args) -> dict:
    alpha, beta, base, objective, n_starts, seed = args
    row = {"alpha": alpha, "beta": beta, "gamma": base.gamma, "objective": objective.kind.value,
           "variant": objective.variant.tag.value, "n_starts": n_starts, "seed": seed, "error": ""}
    try:
        env = base.replace(alpha=alpha, beta=beta)
        row.update(_optimum_row(env, objective, optimizer.maximize(env, objective, n_starts, seed)))
    except (TPAWError, ValueError, ArithmeticError) as exc:
        row.update({"p1_opt": math.nan, "p2_opt": math.nan, "theta_opt": math.nan, "value": math.nan,
                    "rer_vs_honest": math.nan, "profit_lag": math.nan, "error": f"{type(exc).__name__}: {exc}"})
    return row


def ordered_map(func: Callable, tasks: Sequence, workers: int) -> Iterator:
    """``map`` over a process pool when ``workers > 1``; results come back in task order."""
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield func(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(func, tasks)


def cmd_optimize(settings: dict, out, workers: int) -> None:
    base = _env(settings)
    try:
        objective = Objective(ObjectiveKind(settings["objective"]), _kind(settings))
    except ValueError:
        raise UsageError(f"unknown objective {settings['objective']!r}") from None
    if settings["grid_step"] is None:
        grid = [(base.alpha, base.beta)]
    else:
        if not 0 < settings["grid_step"] < 0.5:
            raise UsageError("grid_step must lie in (0, 0.5)")
        grid = optimizer.simplex_grid(settings["grid_step"])
    if settings["n_starts"] < 1:
        raise UsageError("n_starts must be >= 1")
    if settings["grid_step"] is None:
        objective.check(base)  # a point run reports validation failures as such
    sink = CsvSink(out, "optimize", settings, OPTIMIZE_COLUMNS)
    tasks = [(a, b, base, objective, settings["n_starts"], settings["seed"]) for a, b in grid]
    for row in ordered_map(_optimize_task, tasks, workers):
        sink.row(row)


# ------------------------------------------------------------------ simulate

CYCLE_COLUMNS = ("quantity", "estimate", "stderr", "analytic", "z", "within_4se")
TIMELINE_COLUMNS = ("epoch", "duration", "difficulty", "block_rate", "canonical",
                    "cum_adversary", "cum_pool", "cum_rest", "cum_orphan_inclusive",
                    "analytic_first_epoch_duration", "revenue_change_adversary")


def cmd_simulate(settings: dict, out) -> None:
    env = _env(settings)
    s = Strategy(settings["p1"], settings["p2"], settings["theta"])
    seed = settings["seed"]
    if settings["mode"] == "cycle":
        if settings["cycles"] < 1:
            raise UsageError("cycles must be >= 1")
        est = simulator.estimate_ratios(env, s, settings["cycles"], seed)
        sink = CsvSink(out, "simulate", settings, CYCLE_COLUMNS)
        rows = list(est.items()) + list(est.cycle_means.items())
        for name, e in rows:
            sink.row({"quantity": name, "estimate": e.value, "stderr": e.stderr, "analytic": e.analytic,
                      "z": e.z, "within_4se": bool(abs(e.z) < 4) if math.isfinite(e.z) else None})
        for case, count in zip(simulator.TerminalCase, est.case_counts):
            sink.row({"quantity": f"count_{case.name.lower()}", "estimate": count})
    elif settings["mode"] == "timeline":
        if settings["policy"] not in simulator.POLICIES:
            raise UsageError(f"policy must be one of {simulator.POLICIES}")
        if settings["epochs"] < 1:
            raise UsageError("epochs must be >= 1")
        tl = simulator.simulate_timeline(env, s, settings["epochs"], seed, settings["policy"])
        first = analytics.revenue_report(env, s).delta * env.tau0
        sink = CsvSink(out, "simulate", settings, TIMELINE_COLUMNS)
        for i in range(settings["epochs"]):
            sink.row({
                "epoch": i, "duration": tl.epoch_durations[i], "difficulty": tl.difficulty_path[i],
                "block_rate": tl.epoch_rates[i], "canonical": tl.canonical_per_epoch[i],
                "cum_adversary": tl.cumulative_reward["a"][i], "cum_pool": tl.cumulative_reward["p"][i],
                "cum_rest": tl.cumulative_reward["r"][i], "cum_orphan_inclusive": tl.cumulative_reward["o"][i],
                "analytic_first_epoch_duration": first, "revenue_change_adversary": tl.revenue_change_at(env, i),
            })
    else:
        raise UsageError(f"mode must be cycle or timeline, got {settings['mode']!r}")


# ------------------------------------------------------------------- figures

HEATMAP_PANELS = {
    "a": ("paw", "rer_a"), "b": ("tpaw", "rer_a"), "c": ("paw", "rer_rest"), "d": ("tpaw", "rer_rest"),
    "e": ("paw", "revenue_change_t1"), "f": ("tpaw", "revenue_change_t1"),
}
HEATMAP_COLUMNS = ("alpha", "beta", "value", "profit_lag", "error")
RATIO_COLUMNS = ("alpha", "beta", "rer_tpaw", "rer_paw", "ratio", "error")
OPTVALS_COLUMNS = ("alpha", "beta", "p1_opt", "p2_opt", "theta_opt", "red_region", "error")
FIG4_COLUMNS = ("alpha", "beta", "gamma", "rer_paw", "rer_tpaw", "p1_paw", "p2_paw",
                "p1_tpaw", "p2_tpaw", "theta_tpaw", "error")
FIG5_COLUMNS = ("alpha", "beta", "value", "p1_opt", "p2_opt", "theta_opt", "profit_lag", "error")


def _pair_task(args) -> dict:
    """T-PAW and PAW revenue-ratio optima at one environment."""
    env, n_starts, seed = args
    out: dict[str, Any] = {"alpha": env.alpha, "beta": env.beta, "gamma": env.gamma, "error": ""}
    try:
        for tag in (Variant.TPAW_EXACT, Variant.PAW_EXACT):
            res = optimizer.maximize(env, Objective(ObjectiveKind.RHO_A, VariantKind(tag)), n_starts, seed)
            report = variants.VariantEvaluator(_report_kind(VariantKind(tag), res.best), env, res.best).report()
            out[tag.value] = {
                "best": res.best,
                "rer_a": analytics.rer(report, analytics.honest_report(env), analytics.Entity.ADVERSARY),
                "rer_rest": analytics.rer(report, analytics.honest_report(env), analytics.Entity.REST),
                "revenue_change_t1": analytics.revenue_change_at_t1(env, report),
                "profit_lag": analytics.profit_lag_from_report(env, report) / env.tau0,
            }
    except (TPAWError, ValueError, ArithmeticError) as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def _change_task(args) -> dict:
    """Relative revenue change at t1, maximized for one variant."""
    env, tag, n_starts, seed = args
    row: dict[str, Any] = {"alpha": env.alpha, "beta": env.beta, "error": ""}
    try:
        objective = Objective(ObjectiveKind.RELATIVE_REVENUE_CHANGE_AT_T1, VariantKind(tag))
        res = optimizer.maximize(env, objective, n_starts, seed)
        row.update(_optimum_row(env, objective, res))
        row.pop("rer_vs_honest")
    except (TPAWError, ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _envs(grid: Iterable[tuple[float, float]], gamma: float, settings: dict) -> list[EnvironmentParams]:
    return [EnvironmentParams(a, b, gamma, settings["rational"], d0=settings["d0"], tau0=settings["tau0"])
            for a, b in grid]


def _figure_heatmaps(prefix: str, gamma: float, settings: dict, out_dir: Path, workers: int) -> list[Path]:
    grid = optimizer.simplex_grid(settings["step"])
    paths = []
    with ExitStack() as stack:
        sinks = {}
        for panel, cols in list((p, HEATMAP_COLUMNS) for p in HEATMAP_PANELS) + [("g", RATIO_COLUMNS), ("h", OPTVALS_COLUMNS)]:
            path = out_dir / f"{prefix}{panel}.csv"
            paths.append(path)
            f = stack.enter_context(open(path, "w", encoding="utf-8", newline=""))
            sinks[panel] = CsvSink(f, f"figures {prefix}{panel}", settings, cols)
        tasks = [(env, settings["n_starts"], settings["seed"]) for env in _envs(grid, gamma, settings)]
        for res in ordered_map(_pair_task, tasks, workers):
            base = {"alpha": res["alpha"], "beta": res["beta"], "error": res["error"]}
            if res["error"]:
                for sink in sinks.values():
                    sink.row(base)
                continue
            for panel, (tag, metric) in HEATMAP_PANELS.items():
                sinks[panel].row(dict(base, value=res[tag][metric], profit_lag=res[tag]["profit_lag"]))
            t, p = res["tpaw"]["rer_a"], res["paw"]["rer_a"]
            sinks["g"].row(dict(base, rer_tpaw=t, rer_paw=p, ratio=t / p if p != 0 else math.nan))
            best = res["tpaw"]["best"]
            sinks["h"].row(dict(base, p1_opt=best.p1, p2_opt=best.p2, theta_opt=best.theta,
                                red_region=bool(best.theta < 1 and best.p2 == 1)))
    return paths


def _figure4(settings: dict, out_dir: Path, workers: int) -> list[Path]:
    n = int(round(1.0 / settings["gamma_step"]))
    gammas = [round(i / n, 12) for i in range(n + 1)]
    envs = [env for a, b in settings["fig4_cases"] for env in _envs([(a, b)] * len(gammas), 0.0, settings)]
    envs = [e.replace(gamma=g) for e, g in zip(envs, gammas * len(settings["fig4_cases"]))]
    path = out_dir / "fig4.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        sink = CsvSink(f, "figures fig4", settings, FIG4_COLUMNS)
        tasks = [(env, settings["n_starts"], settings["seed"]) for env in envs]
        for res in ordered_map(_pair_task, tasks, workers):
            row = {"alpha": res["alpha"], "beta": res["beta"], "gamma": res["gamma"], "error": res["error"]}
            if not res["error"]:
                tp, pw = res["tpaw"], res["paw"]
                row.update(rer_paw=pw["rer_a"], rer_tpaw=tp["rer_a"], p1_paw=pw["best"].p1, p2_paw=pw["best"].p2,
                           p1_tpaw=tp["best"].p1, p2_tpaw=tp["best"].p2, theta_tpaw=tp["best"].theta)
            sink.row(row)
    return [path]


def _figure5(settings: dict, out_dir: Path, workers: int) -> list[Path]:
    grid = optimizer.simplex_grid(settings["step"])
    paths = []
    for panel, tag in (("a", Variant.PAW_EXACT), ("b", Variant.TPAW_EXACT)):
        path = out_dir / f"fig5{panel}.csv"
        with open(path, "w", encoding="utf-8", newline="") as f:
            sink = CsvSink(f, f"figures fig5{panel}", settings, FIG5_COLUMNS)
            tasks = [(env, tag, settings["n_starts"], settings["seed"]) for env in _envs(grid, 0.0, settings)]
            for row in ordered_map(_change_task, tasks, workers):
                sink.row(row)
        paths.append(path)
    return paths


def cmd_figures(settings: dict, out_dir: Path, workers: int) -> list[Path]:
    if not 0 < settings["step"] < 0.5:
        raise UsageError("step must lie in (0, 0.5)")
    if not 0 < settings["gamma_step"] <= 1:
        raise UsageError("gamma_step must lie in (0, 1]")
    unknown = set(settings["panels"]) - {"fig2", "fig3", "fig4", "fig5"}
    if unknown:
        raise UsageError(f"unknown panels {sorted(unknown)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for group in settings["panels"]:
        if group in FIG_GAMMAS:
            written += _figure_heatmaps(group, FIG_GAMMAS[group], settings, out_dir, workers)
        elif group == "fig4":
            written += _figure4(settings, out_dir, workers)
        else:
            written += _figure5(settings, out_dir, workers)
    return written


# ---------------------------------------------------------------------- main

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="key = value settings file (or a CSV written by this tool)")
    p.add_argument("--seed", type=int, default=d, help="random seed (u64)")
    p.add_argument("--out", default=d, help="output file (directory for 'figures'); default stdout / ./figures")
    p.add_argument("--workers", type=int, default=d, help="worker processes for sweeps (default: CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tpaw", description="T-PAW block-withholding numerical lab")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"eval": "evaluate one strategy", "optimize": "maximize an objective at a point or over a grid",
             "simulate": "Monte Carlo cycle or timeline simulation", "figures": "reproduce figure data as CSV"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        _add_globals(p, suppress=True)
        for o in OPTIONS:
            if name in o.commands:
                p.add_argument(f"--{o.name.replace('_', '-')}", dest=o.name, type=o.parse,
                               default=argparse.SUPPRESS, help=f"{o.help} (default: {_fmt(o.default)})")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config, out, workers = args.pop("config"), args.pop("out"), args.pop("workers")
    workers = workers if workers is not None else (os.cpu_count() or 1)
    flags = {k: v for k, v in args.items() if v is not None}
    try:
        file_values: dict = {}
        if config is not None:
            file_values, file_command = read_config(config)
            if file_command is not None and not file_command.startswith(command):
                raise UsageError(f"config was written by '{file_command}', not '{command}'")
        settings = resolve(command, file_values, flags)
        if command == "figures":
            written = cmd_figures(settings, Path(out or "figures"), workers)
            for path in written:
                print(path)
            return EXIT_OK
        with ExitStack() as stack:
            stream = sys.stdout if out in (None, "-") else stack.enter_context(
                open(out, "w", encoding="utf-8", newline=""))
            if command == "eval":
                cmd_eval(settings, stream)
            elif command == "optimize":
                cmd_optimize(settings, stream, workers)
            else:
                cmd_simulate(settings, stream)
        return EXIT_OK
    except (UsageError, ConstraintViolation, InfeasibleObjective) as exc:
        print(f"tpaw: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"tpaw: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except KeyboardInterrupt:
        print("tpaw: interrupted; rows written so far were flushed", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
