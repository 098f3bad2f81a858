"""Command-line front end: single runs, benchmark grids, CSV/JSON output.

Exit codes: 0 success, 2 usage or validation problem, 3 runtime failure.
Raw benchmark CSVs carry 17 significant digits (round-trippable); aggregate
tables carry 4. All seeds are derived from the master seed with fixed spawn
keys, so repeated invocations reproduce every draw-dependent number exactly
(wall-time columns are physical measurements and necessarily vary).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .diagnostics import diagnose
from .errors import BlockGibbsError, DimensionMismatchError
from .model_core import Dataset, GroupStructure, ModelKind, ModelSpec
from .rng_dist import RngStream
from .samplers import ChainOutput, KernelKind, RunConfig, map_jobs, run_chain
from .simgen import Scenario, ScenarioSpec, SimulatedDataset

__all__ = ["main", "entry", "read_dataset_csv", "write_dataset_csv",
           "run_bench", "BenchGrid", "BenchRow"]


class UsageError(Exception):
    """Bad flags or inconsistent inputs; mapped to exit code 2."""


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _f4(x: float) -> str:
    return format(float(x), ".4g")


# ---------------------------------------------------------------------------
# dataset CSV
# ---------------------------------------------------------------------------

def _parse_group_sizes(text: str) -> list[int]:
    try:
        sizes = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"could not parse group sizes '{text}'") from exc
    if not sizes or any(s < 1 for s in sizes):
        raise UsageError(f"group sizes must be positive integers, got '{text}'")
    return sizes


def read_dataset_csv(path: str, y_col: int = 0,
                     group_sizes: list[int] | None = None
                     ) -> tuple[Dataset, GroupStructure | None]:
    """Read a numeric CSV: one column is the response, the rest the design.

    A leading comment line of the form ``# groups: 5,5,5`` supplies group
    sizes; an explicit `group_sizes` argument overrides it. Errors name the
    offending row and column (1-based).
    """
    rows: list[list[float]] = []
    sidecar: list[int] | None = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"cannot read dataset file: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if body.startswith("groups:"):
                    sidecar = _parse_group_sizes(body[len("groups:"):])
                continue
            cells = text.split(",")
            values = []
            for j, cell in enumerate(cells):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise UsageError(
                        f"{path}: row {line_no}, column {j + 1}: "
                        f"non-numeric cell '{cell.strip()}'") from None
            if rows and len(values) != len(rows[0]):
                raise UsageError(
                    f"{path}: row {line_no} has {len(values)} cells, "
                    f"expected {len(rows[0])}")
            rows.append(values)
    if not rows:
        raise UsageError(f"{path}: no data rows")
    width = len(rows[0])
    if width < 2:
        raise UsageError(f"{path}: need a response column plus at least one "
                         f"predictor, found {width} column(s)")
    if not 0 <= y_col < width:
        raise UsageError(f"--y-col {y_col} out of range for {width} columns")
    arr = np.asarray(rows, dtype=np.float64)
    y = arr[:, y_col]
    x = np.delete(arr, y_col, axis=1)
    dataset = Dataset(y=y, x=x)

    sizes = group_sizes if group_sizes is not None else sidecar
    groups = None
    if sizes is not None:
        total = sum(sizes)
        if total != dataset.p:
            raise UsageError(f"group sizes sum {total} != p {dataset.p}")
        groups = GroupStructure(np.asarray(sizes, dtype=np.int64))
    return dataset, groups


def write_dataset_csv(data: Dataset | SimulatedDataset, path: str) -> None:
    """Write a dataset in the CSV schema `read_dataset_csv` accepts."""
    groups = None
    if isinstance(data, SimulatedDataset):
        groups = data.groups
        data = data.dataset
    with open(path, "w", newline="") as fh:
        if groups is not None:
            sizes = ",".join(str(int(s)) for s in groups.group_sizes)
            fh.write(f"# groups: {sizes}\n")
        for i in range(data.n):
            cells = [_f17(data.y[i])] + [_f17(v) for v in data.x[i]]
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockgibbs",
        description="Gibbs samplers for Bayesian shrinkage regression models")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, bench: bool) -> None:
        p.add_argument("--model", required=True,
                       choices=[k.value for k in ModelKind])
        p.add_argument("--scenario", choices=[s.value for s in Scenario],
                       help="generate data from a built-in scenario")
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--xi", type=float, default=0.0)
        p.add_argument("--lambda", dest="lam", type=float,
                       default=1.0 if bench else None,
                       help="group-lasso penalty")
        p.add_argument("--lambda1", type=float, default=1.0 if bench else None,
                       help="first penalty (sparse group / fused)")
        p.add_argument("--lambda2", type=float, default=1.0 if bench else None,
                       help="second penalty (sparse group / fused)")
        p.add_argument("--iters", type=int, default=None,
                       help="chain length (default 10000)")
        p.add_argument("--burnin", type=int, default=None,
                       help="discarded initial iterations (default 1000)")
        p.add_argument("--thin", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--long-run", action="store_true",
                       help="use 100000 iterations with 10000 burn-in")

    run_p = sub.add_parser("run", help="run one chain and report diagnostics")
    add_common(run_p, bench=False)
    run_p.add_argument("--kernel", required=True,
                       choices=[k.value for k in KernelKind])
    run_p.add_argument("--data", help="dataset CSV (response column plus design)")
    run_p.add_argument("--y-col", type=int, default=0,
                       help="index of the response column in --data")
    run_p.add_argument("--groups", help="comma-separated group sizes for --data")
    run_p.add_argument("--n", type=int, help="rows for a generated scenario")
    run_p.add_argument("--K", type=int, help="groups for scenario s1 (p = 5K)")
    run_p.add_argument("--p", type=int, help="columns for scenarios s2/wide/tall")
    run_p.add_argument("--store-beta", action="store_true",
                       help="store coefficient draws as well")
    run_p.add_argument("--report", help="write the JSON report here (default stdout)")
    run_p.add_argument("--draws", help="write stored draws to this CSV")

    bench_p = sub.add_parser("bench", help="replicated benchmark grid")
    add_common(bench_p, bench=True)
    bench_p.add_argument("--kernels", default="2bg,3bg",
                         help="comma-separated kernel list")
    bench_p.add_argument("--n", type=_int_list, required=True,
                         help="comma-separated row counts")
    bench_p.add_argument("--K", type=_int_list,
                         help="comma-separated group counts for s1 (p = 5K)")
    bench_p.add_argument("--p", type=_int_list,
                         help="comma-separated column counts for s2/wide/tall")
    bench_p.add_argument("--reps", type=int, default=100,
                         help="datasets per grid cell")
    bench_p.add_argument("--jobs", type=int, default=1,
                         help="parallel worker processes")
    bench_p.add_argument("--out-raw", required=True,
                         help="per-replication CSV output path")
    bench_p.add_argument("--out-agg", required=True,
                         help="aggregate CSV output path")
    return parser


def _resolve_run_config(args, store_beta: bool = False) -> RunConfig:
    if args.long_run:
        iters = 100_000 if args.iters is None else args.iters
        burnin = 10_000 if args.burnin is None else args.burnin
    else:
        iters = 10_000 if args.iters is None else args.iters
        burnin = 1_000 if args.burnin is None else args.burnin
    try:
        return RunConfig(n_iter=iters, burn_in=burnin, seed=args.seed,
                         store_beta=store_beta, thin=args.thin)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _resolve_model(args, groups: GroupStructure | None) -> ModelSpec:
    kind = ModelKind(args.model)
    try:
        if kind is ModelKind.GROUP_LASSO:
            if args.lam is None:
                raise UsageError("group-lasso requires --lambda")
            if groups is None:
                raise UsageError("group-lasso requires group sizes "
                                 "(--groups or a grouped scenario)")
            return ModelSpec.group_lasso(args.lam, groups, args.alpha, args.xi)
        if kind is ModelKind.SPARSE_GROUP_LASSO:
            if args.lambda1 is None or args.lambda2 is None:
                raise UsageError("sparse-group-lasso requires --lambda1 and --lambda2")
            if groups is None:
                raise UsageError("sparse-group-lasso requires group sizes "
                                 "(--groups or a grouped scenario)")
            return ModelSpec.sparse_group_lasso(args.lambda1, args.lambda2,
                                                groups, args.alpha, args.xi)
        if args.lambda1 is None or args.lambda2 is None:
            raise UsageError("fused-lasso requires --lambda1 and --lambda2")
        return ModelSpec.fused_lasso(args.lambda1, args.lambda2,
                                     args.alpha, args.xi)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _scenario_spec(scenario: str, n: int, k: int | None, p: int | None,
                   seed: int) -> ScenarioSpec:
    sc = Scenario(scenario)
    if sc is Scenario.GROUPED_POLY:
        if k is None:
            raise UsageError("scenario s1 requires --K")
        p_val = 5 * k
    else:
        if p is None:
            raise UsageError(f"scenario {sc.value} requires --p")
        p_val = p
    try:
        return ScenarioSpec(scenario=sc, n=n, p=p_val, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _report_dict(output: ChainOutput) -> dict:
    rep = diagnose(output)
    return {
        "model": output.model.kind.value,
        "kernel": output.kernel.value,
        "n": output.n,
        "p": output.p,
        "seed": output.seed,
        "iters": output.config.n_iter,
        "burnin": output.config.burn_in,
        "rho1": rep.rho1,
        "ess": rep.ess,
        "wall_time_seconds": output.wall_time_seconds,
        "ess_per_second": rep.ess_per_second,
        "sigma2_mean": rep.sigma2.mean,
        "sigma2_q025": rep.sigma2.q025,
        "sigma2_q975": rep.sigma2.q975,
    }


def _write_draws_csv(output: ChainOutput, path: str) -> None:
    with open(path, "w", newline="") as fh:
        header = ["sigma2"]
        if output.beta_draws is not None:
            header += [f"beta_{j}" for j in range(output.p)]
        fh.write(",".join(header) + "\n")
        for i in range(output.sigma2_draws.shape[0]):
            cells = [_f17(output.sigma2_draws[i])]
            if output.beta_draws is not None:
                cells += [_f17(v) for v in output.beta_draws[i]]
            fh.write(",".join(cells) + "\n")


def _cmd_run(args) -> int:
    if (args.data is None) == (args.scenario is None):
        raise UsageError("provide exactly one of --data or --scenario")
    if args.data is not None:
        group_sizes = _parse_group_sizes(args.groups) if args.groups else None
        dataset, groups = read_dataset_csv(args.data, args.y_col, group_sizes)
    else:
        if args.n is None:
            raise UsageError("--scenario requires --n")
        spec_cell = _scenario_spec(args.scenario, args.n, args.K, args.p, args.seed)
        sim = spec_cell.generate(RngStream.from_key(args.seed, 0))
        dataset, groups = sim.dataset, sim.groups

    model = _resolve_model(args, groups)
    config = _resolve_run_config(args, store_beta=args.store_beta)
    try:
        model.validate_for(dataset)
    except (ValueError, DimensionMismatchError) as exc:
        raise UsageError(str(exc)) from exc

    output = run_chain(KernelKind(args.kernel), model, dataset, config,
                       rng=RngStream.from_key(args.seed, 1))
    report = _report_dict(output)
    text = json.dumps(report, indent=2)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.draws:
        _write_draws_csv(output, args.draws)
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

RAW_COLUMNS = ["model", "kernel", "scenario", "n", "p", "rep", "seed",
               "rho1", "ess", "wall_time_seconds", "ess_per_second",
               "status", "error"]
AGG_COLUMNS = ["model", "kernel", "n", "p", "reps_ok", "rho1_mean", "rho1_se",
               "log10_ess_per_sec_mean", "log10_ess_per_sec_se"]


@dataclass(frozen=True)
class BenchGrid:
    """A validated benchmark grid: model, kernels, cells, replications."""

    model: str
    scenario: str
    kernels: tuple[str, ...]
    cells: tuple[tuple[int, int], ...]
    reps: int
    n_iter: int
    burn_in: int
    thin: int
    master_seed: int
    alpha: float
    xi: float
    lam: float | None
    lam1: float | None
    lam2: float | None

    def __post_init__(self):
        if self.reps < 1:
            raise UsageError("--reps must be >= 1")
        if not self.kernels:
            raise UsageError("need at least one kernel")
        for k in self.kernels:
            if k not in {kk.value for kk in KernelKind}:
                raise UsageError(f"unknown kernel '{k}'")
        for n, p in self.cells:
            try:
                ScenarioSpec(Scenario(self.scenario), n, p, seed=0)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc


@dataclass(frozen=True)
class BenchRow:
    """One chain's result inside a grid: one row per replication x kernel."""

    model: str
    kernel: str
    scenario: str
    n: int
    p: int
    rep: int
    seed: int
    rho1: float | None = None
    ess: float | None = None
    wall_time_seconds: float | None = None
    ess_per_second: float | None = None
    status: str = "ok"
    error: str = ""

    def to_csv_dict(self) -> dict:
        def fmt(v):
            return "" if v is None else _f17(v)

        return {
            "model": self.model, "kernel": self.kernel,
            "scenario": self.scenario, "n": self.n, "p": self.p,
            "rep": self.rep, "seed": self.seed, "rho1": fmt(self.rho1),
            "ess": fmt(self.ess),
            "wall_time_seconds": fmt(self.wall_time_seconds),
            "ess_per_second": fmt(self.ess_per_second),
            "status": self.status, "error": self.error,
        }


def _derive_seed(*entropy: int) -> int:
    seq = np.random.SeedSequence([int(e) for e in entropy])
    return int(seq.generate_state(1, np.uint64)[0])


def _grid_model(grid: BenchGrid, groups: GroupStructure | None) -> ModelSpec:
    kind = ModelKind(grid.model)
    if kind is ModelKind.GROUP_LASSO:
        return ModelSpec.group_lasso(grid.lam, groups, grid.alpha, grid.xi)
    if kind is ModelKind.SPARSE_GROUP_LASSO:
        return ModelSpec.sparse_group_lasso(grid.lam1, grid.lam2, groups,
                                            grid.alpha, grid.xi)
    return ModelSpec.fused_lasso(grid.lam1, grid.lam2, grid.alpha, grid.xi)


def _run_bench_job(job: tuple[BenchGrid, int, int]) -> list[BenchRow]:
    """One replication: generate the dataset once, run every kernel on it."""
    grid, cell_index, rep = job
    n, p = grid.cells[cell_index]
    data_seed = _derive_seed(grid.master_seed, cell_index, rep, 0)
    sim = ScenarioSpec(Scenario(grid.scenario), n, p, seed=data_seed).generate()
    rows = []
    for k_idx, kernel in enumerate(grid.kernels):
        chain_seed = _derive_seed(grid.master_seed, cell_index, rep, 1 + k_idx)
        base = dict(model=grid.model, kernel=kernel, scenario=grid.scenario,
                    n=n, p=p, rep=rep, seed=chain_seed)
        try:
            model = _grid_model(grid, sim.groups)
            config = RunConfig(n_iter=grid.n_iter, burn_in=grid.burn_in,
                               seed=chain_seed, thin=grid.thin)
            output = run_chain(KernelKind(kernel), model, sim.dataset, config)
            rep_diag = diagnose(output)
            rows.append(BenchRow(**base, rho1=rep_diag.rho1, ess=rep_diag.ess,
                                 wall_time_seconds=output.wall_time_seconds,
                                 ess_per_second=rep_diag.ess_per_second))
        except Exception as exc:  # record the failure, keep the grid going
            rows.append(BenchRow(**base, status="error",
                                 error=str(exc).replace("\n", " ")))
    return rows


def _bench_cells(args) -> tuple[tuple[int, int], ...]:
    sc = Scenario(args.scenario)
    if sc is Scenario.GROUPED_POLY:
        if not args.K:
            raise UsageError("scenario s1 requires --K")
        dims = [5 * k for k in args.K]
    else:
        if not args.p:
            raise UsageError(f"scenario {sc.value} requires --p")
        dims = list(args.p)
    return tuple((n, p) for n in args.n for p in dims)


def _aggregate(rows: list[BenchRow]) -> list[dict]:
    seen: list[tuple] = []
    by_cell: dict[tuple, list[BenchRow]] = {}
    for row in rows:
        key = (row.model, row.kernel, row.n, row.p)
        if key not in by_cell:
            by_cell[key] = []
            seen.append(key)
        by_cell[key].append(row)

    def mean_se(v: np.ndarray) -> tuple[float, float]:
        if v.size == 0:
            return math.nan, math.nan
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        return float(v.mean()), se

    out = []
    for key in seen:
        ok = [r for r in by_cell[key] if r.status == "ok"]
        rho1_mean, rho1_se = mean_se(np.array([r.rho1 for r in ok]))
        leps_mean, leps_se = mean_se(
            np.array([math.log10(r.ess_per_second) for r in ok]))
        out.append({
            "model": key[0], "kernel": key[1], "n": key[2], "p": key[3],
            "reps_ok": len(ok),
            "rho1_mean": _f4(rho1_mean), "rho1_se": _f4(rho1_se),
            "log10_ess_per_sec_mean": _f4(leps_mean),
            "log10_ess_per_sec_se": _f4(leps_se),
        })
    return out


def _grid_from_args(args) -> BenchGrid:
    if args.scenario is None:
        raise UsageError("bench requires --scenario")
    kind = ModelKind(args.model)
    if kind is not ModelKind.FUSED_LASSO and Scenario(args.scenario) is Scenario.ADJACENT_SIMILAR:
        raise UsageError("scenario s2 has no group structure; "
                         "use s1/wide/tall for the group models")
    if args.long_run:
        n_iter = 100_000 if args.iters is None else args.iters
        burn_in = 10_000 if args.burnin is None else args.burnin
    else:
        n_iter = 10_000 if args.iters is None else args.iters
        burn_in = 1_000 if args.burnin is None else args.burnin
    return BenchGrid(
        model=args.model, scenario=args.scenario,
        kernels=tuple(k.strip() for k in args.kernels.split(",") if k.strip()),
        cells=_bench_cells(args), reps=args.reps, n_iter=n_iter,
        burn_in=burn_in, thin=args.thin, master_seed=args.seed,
        alpha=args.alpha, xi=args.xi, lam=args.lam, lam1=args.lambda1,
        lam2=args.lambda2)


def run_bench(args) -> tuple[list[BenchRow], list[dict]]:
    """Execute the benchmark grid; returns (raw rows, aggregate rows)."""
    grid = _grid_from_args(args)
    jobs = [(grid, ci, rep)
            for ci in range(len(grid.cells)) for rep in range(grid.reps)]
    nested = map_jobs(_run_bench_job, jobs, jobs=args.jobs)
    rows = [row for group in nested for row in group]
    return rows, _aggregate(rows)


def _write_csv(path: str, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _cmd_bench(args) -> int:
    rows, agg = run_bench(args)
    _write_csv(args.out_raw, RAW_COLUMNS, [r.to_csv_dict() for r in rows])
    _write_csv(args.out_agg, AGG_COLUMNS, agg)
    n_err = sum(1 for r in rows if r.status != "ok")
    print(f"wrote {len(rows)} rows ({n_err} failed) to {args.out_raw}; "
          f"aggregates to {args.out_agg}")
    return 0 if n_err < len(rows) else 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_bench(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlockGibbsError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
