"""Command-line front end: rank candidates, inspect compile statistics,
or evaluate one specification at a fixed rationality coefficient.

All inputs come from a single JSON run configuration so experiments stay
version controllable; the TSV output is deterministic byte for byte
(wall-clock timings appear only in the structured format).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from .compiler import unroll, with_discount
from .dynamics import Gridworld, load_world
from .errors import ConfigError, DomainError, ImpossibleTransitionError, \
    SpecInferError
from .monitor import parse_spec
from .pipeline import TSV_COLUMNS, GridCoinCache, demo_log_likelihood, \
    load_demos, rank
from .planner import sat_prob, value_backup


@dataclass
class RunConfig:
    world: Gridworld
    tau: int
    demos: list
    specs: list[tuple[str, str]]  # (name, combinator expression)
    log_priors: dict[str, float] | None
    fit_tol: float
    discount: tuple[int, int, float] | None

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path}: {e}") from None
        base = path.parent
        for key in ("world", "demos", "tau", "specs"):
            if key not in data:
                raise ConfigError(f"config is missing the {key!r} field")
        tau = data["tau"]
        if not isinstance(tau, int) or tau < 1:
            raise ConfigError("tau must be an integer >= 1")
        fit_tol = float(data.get("fit_tol", 1e-4))
        if fit_tol <= 0:
            raise ConfigError("fit_tol must be positive")
        world = load_world(base / data["world"])
        demos = load_demos(base / data["demos"], world)
        specs = []
        log_priors = {}
        for entry in data["specs"]:
            if "name" not in entry or "expr" not in entry:
                raise ConfigError("each spec needs 'name' and 'expr' fields")
            specs.append((entry["name"], entry["expr"]))
            if "log_prior" in entry:
                log_priors[entry["name"]] = float(entry["log_prior"])
        if len({name for name, _ in specs}) != len(specs):
            raise ConfigError("spec names must be unique")
        discount = None
        if "discount" in data:
            d = data["discount"]
            try:
                discount = (int(d["gamma_num"]), int(d["q_gamma"]),
                            float(d.get("eps", 1e-2)))
            except (KeyError, TypeError, ValueError):
                raise ConfigError(
                    "discount needs integer gamma_num and q_gamma "
                    "(and optionally eps)") from None
        return cls(world, tau, demos, specs, log_priors or None, fit_tol,
                   discount)

    def monitors(self):
        return [(name, parse_spec(expr, self.world))
                for name, expr in self.specs]

    def dynamics(self):
        """The (possibly discounted) dynamics and the effective horizon."""
        pa = self.world.pa
        if self.discount is not None:
            gamma_num, q_gamma, eps = self.discount
            pa, tau = with_discount(pa, gamma_num, q_gamma, eps)
            return pa, tau
        return pa, self.tau


@contextmanager
def _stage(name):
    """Re-raise library errors tagged with the pipeline stage that failed."""
    try:
        yield
    except ImpossibleTransitionError:
        raise  # carries its own stage: encoding demonstrations
    except SpecInferError as exc:
        raise _StageError(name, exc) from exc


class _StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage


def _emit(rows: list[dict], columns, fmt: str, stream):
    if fmt == "structured":
        for row in rows:
            stream.write(json.dumps(row, sort_keys=True) + "\n")
        return
    stream.write("\t".join(columns) + "\n")
    for row in rows:
        cells = []
        for col in columns:
            v = row[col]
            cells.append(f"{v:.6f}" if isinstance(v, float) else str(v))
        stream.write("\t".join(cells) + "\n")


def cmd_rank(config: RunConfig, jobs: int, fmt: str, stream) -> int:
    with _stage("parse"):
        monitors = config.monitors()
        pa, tau = config.dynamics()
    cache = GridCoinCache(config.world) if config.discount is None else None
    with _stage("rank"):
        report = rank(monitors, pa, tau, config.demos, tol=config.fit_tol,
                      log_priors=config.log_priors, jobs=jobs,
                      coin_source=cache)
    _emit(report.to_records(), TSV_COLUMNS, fmt, stream)
    return 0


def cmd_stats(config: RunConfig, jobs: int, fmt: str, stream) -> int:
    with _stage("parse"):
        monitors = config.monitors()
        pa, tau = config.dynamics()

    def compile_one(item):
        name, m = item
        b = unroll(pa, m, tau)
        explicit = (tau * config.world.n_cells * len(pa.action_ids())
                    * (1 << b.monitor.n_history_bits))
        rec = {
            "spec": name,
            "internal_nodes": b.stats.internal_nodes,
            "total_nodes": b.stats.total_nodes,
            "node_bound": b.stats.node_bound,
            "explicit_product": explicit,
            "compile_seconds": b.stats.seconds,
        }
        return rec

    with _stage("compile"):
        if jobs > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(compile_one, monitors))
        else:
            rows = [compile_one(item) for item in monitors]
    columns = ["spec", "internal_nodes", "total_nodes", "node_bound",
               "explicit_product"]
    if fmt == "tsv":
        for row in rows:
            del row["compile_seconds"]
    _emit(rows, columns, fmt, stream)
    return 0


def cmd_eval(config: RunConfig, spec_name: str, theta: float, fmt: str,
             stream) -> int:
    with _stage("parse"):
        monitors = dict(config.monitors())
        pa, tau = config.dynamics()
    if spec_name not in monitors:
        raise _StageError("parse", DomainError(f"unknown spec {spec_name!r}"))
    with _stage("compile"):
        b = unroll(pa, monitors[spec_name], tau)
    with _stage("fit"):
        vt = value_backup(b, theta)
        p = sat_prob(b, vt)
    with _stage("encode"):
        lls = [demo_log_likelihood(b, vt, d, demo_index=i)
               for i, d in enumerate(config.demos)]
    record = {
        "spec": spec_name,
        "theta": theta,
        "root_value": vt.root_value,
        "sat_prob": p,
        "demo_log_likelihoods": lls,
    }
    if fmt == "structured":
        stream.write(json.dumps(record, sort_keys=True) + "\n")
    else:
        stream.write(f"spec\t{spec_name}\n")
        stream.write(f"theta\t{theta:.6f}\n")
        stream.write(f"root_value\t{vt.root_value:.6f}\n")
        stream.write(f"sat_prob\t{p:.6f}\n")
        for i, ll in enumerate(lls):
            stream.write(f"demo_{i}\t{ll:.6f}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specinfer",
        description="Rank task specifications against demonstrations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("rank", "fit every candidate and print the posterior table"),
            ("stats", "print per-candidate compile statistics"),
            ("eval", "evaluate one candidate at a fixed rationality")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--jobs", type=int, default=1,
                       help="candidates compiled concurrently")
        p.add_argument("--format", choices=("tsv", "structured"),
                       default="tsv")
        if name == "eval":
            p.add_argument("--spec", required=True, help="candidate name")
            p.add_argument("--theta", type=float, default=0.0,
                           help="rationality coefficient")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.load(args.config)
        if args.command == "rank":
            return cmd_rank(config, args.jobs, args.format, sys.stdout)
        if args.command == "stats":
            return cmd_stats(config, args.jobs, args.format, sys.stdout)
        if args.command == "eval":
            if not math.isfinite(args.theta) or args.theta < 0:
                raise _StageError(
                    "parse", DomainError("theta must be finite and >= 0"))
            return cmd_eval(config, args.spec, args.theta, args.format,
                            sys.stdout)
        raise AssertionError(args.command)
    except _StageError as e:
        print(f"error {e}", file=sys.stderr)
        return 1
    except ImpossibleTransitionError as e:
        where = f" (demo {e.demo_index}, step {e.step})" \
            if e.demo_index is not None else ""
        print(f"error [encode] {e}{where}", file=sys.stderr)
        return 1
    except SpecInferError as e:
        print(f"error [parse] {e}", file=sys.stderr)
        return 1
    except Exception as e:  # internal failure
        print(f"internal error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
