"""Monte Carlo experiment harness and command-line entry point.

Four experiments are available, each producing one CSV row per
(solver, N, SNR, trial):

``se-vs-snr``
    Spectral efficiency of each solver over an SNR sweep.
``iters-vs-n``
    Iterations to reach each termination tolerance versus IRS size.
``time-vs-n``
    Wall time per solve versus IRS size, after a discarded warm-up solve.
``oracle-check``
    DSM against the exhaustive grid at tiny N.

Each trial's channels and initial phases are derived from the master seed,
N and the trial index only, so any subset of trials reruns identically and
every solver within a trial sees the same inputs.  Results do not depend on
SNR draws: the same realizations are reused across the SNR sweep.

Usage::

    irsdsm-bench se-vs-snr --n 16 64 --snr-db 0 10 20 --trials 200 --out se.csv
    irsdsm-bench oracle-check --config oracle.ini
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import sys
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .channel import SystemConfig, db_to_linear, gen_channel_set, trial_seed
from .mimo import end_to_end_rate
from .solvers import (
    DEFAULT_GA_STEPS,
    GRID_BUDGET,
    GridBudgetError,
    SolverOptions,
    dsm_solve,
    ga_solve,
    grid_search,
    tune_ga_step_pooled,
)
from .spgm import TWO_PI, spgm_objective

__all__ = [
    "EXPERIMENTS",
    "SOLVERS",
    "CSV_HEADER",
    "ExperimentSpec",
    "ResultRow",
    "default_spec",
    "validate_spec",
    "draw_trial",
    "tune_for_n",
    "run_se_vs_snr",
    "run_iters_vs_n",
    "run_time_vs_n",
    "run_oracle_check",
    "run_experiment",
    "oracle_gaps",
    "write_rows",
    "read_rows",
    "main",
]

EXPERIMENTS = ("se_vs_snr", "iters_vs_n", "time_vs_n", "oracle_check")
SOLVERS = ("dsm", "ga", "grid", "random_baseline")
CSV_HEADER = (
    "experiment", "solver", "N", "snr_db", "trial", "seed", "sum_rate",
    "psi_final", "iterations", "wall_time_s", "converged",
)

# seed namespaces mixed into trial_seed
_TRIAL_KEY, _TUNE_KEY, _WARMUP_KEY = 0, 1, 2

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_IO = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to regenerate one experiment's rows.

    ``system`` supplies K, L, the Rician factor and the master seed; its N
    and snr fields are ignored in favour of ``n_values`` and
    ``snr_values_db``.  ``epsilons`` lists the termination tolerances swept
    by ``iters_vs_n`` and ``time_vs_n``; the other experiments use
    ``solver_opts.epsilon``.
    """

    experiment: str
    n_values: tuple[int, ...] = (8, 16, 32, 64)
    snr_values_db: tuple[float, ...] = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
    trials: int = 200
    solvers: tuple[str, ...] = ("dsm", "ga", "random_baseline")
    system: SystemConfig = field(default_factory=SystemConfig)
    solver_opts: SolverOptions = field(default_factory=SolverOptions)
    epsilons: tuple[float, ...] = ()
    ga_candidates: tuple[float, ...] = DEFAULT_GA_STEPS
    tune_trials: int = 5
    output_path: str | None = None

    @property
    def master_seed(self) -> int:
        return self.system.seed

    def sweep_epsilons(self) -> tuple[float, ...]:
        return tuple(self.epsilons) or (self.solver_opts.epsilon,)


def default_spec(experiment: str, **overrides) -> ExperimentSpec:
    """Desk-scale defaults for each experiment."""
    experiment = experiment.replace("-", "_")
    base: dict = {"experiment": experiment}
    if experiment == "se_vs_snr":
        base.update(n_values=(16, 64), solvers=("dsm", "ga", "random_baseline"))
    elif experiment in ("iters_vs_n", "time_vs_n"):
        base.update(n_values=(8, 16, 32, 64), snr_values_db=(10.0,),
                    solvers=("dsm", "ga"), epsilons=(1e-2, 1e-3))
    elif experiment == "oracle_check":
        base.update(n_values=(3,), snr_values_db=(10.0,), solvers=("dsm", "grid"),
                    system=SystemConfig(K=2, L=2, N=3),
                    solver_opts=SolverOptions(grid_q=128))
    base.update(overrides)
    return ExperimentSpec(**base)


def validate_spec(spec: ExperimentSpec) -> None:
    """Raise ValueError (or GridBudgetError) for specs that cannot run."""
    if spec.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {spec.experiment!r}; choose from {EXPERIMENTS}")
    if int(spec.trials) != spec.trials or spec.trials < 1:
        raise ValueError(f"trials must be a positive integer, got {spec.trials!r}")
    if not spec.n_values:
        raise ValueError("n_values must not be empty")
    if not spec.snr_values_db:
        raise ValueError("snr_values_db must not be empty")
    for n in spec.n_values:
        if int(n) != n or n < 1:
            raise ValueError(f"N values must be positive integers, got {n!r}")
    unknown = set(spec.solvers) - set(SOLVERS)
    if unknown or not spec.solvers:
        raise ValueError(f"unknown solvers {sorted(unknown)}; choose from {SOLVERS}")
    if spec.experiment == "oracle_check":
        if "grid" not in spec.solvers:
            raise ValueError("oracle_check needs the grid solver")
        if max(spec.n_values) > 4:
            raise ValueError("oracle_check supports N <= 4 only")
    if spec.experiment == "iters_vs_n" and "grid" in spec.solvers:
        raise ValueError("grid search has no iteration count; drop it from iters_vs_n")
    for eps in spec.sweep_epsilons():
        if not eps > 0:
            raise ValueError(f"epsilon must be > 0, got {eps!r}")
    if "ga" in spec.solvers and not spec.ga_candidates:
        raise ValueError("ga needs at least one candidate step")
    if "grid" in spec.solvers:
        q = spec.solver_opts.grid_q
        for n in spec.n_values:
            if q**n > GRID_BUDGET:
                raise GridBudgetError(
                    f"grid search at N={n}, Q={q} needs {q}**{n} evaluations, "
                    f"over the budget of {GRID_BUDGET:.0e}"
                )


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    solver: str
    N: int
    snr_db: float
    trial: int
    seed: int
    sum_rate: float
    psi_final: float
    iterations: int
    wall_time_s: float
    converged: bool

    def as_csv(self) -> list[str]:
        return [
            self.experiment, self.solver, str(self.N), repr(float(self.snr_db)),
            str(self.trial), str(self.seed), repr(float(self.sum_rate)),
            repr(float(self.psi_final)), str(self.iterations),
            repr(float(self.wall_time_s)), "true" if self.converged else "false",
        ]

    @classmethod
    def from_csv(cls, record: dict) -> "ResultRow":
        flag = record["converged"].strip().lower()
        if flag not in ("true", "false"):
            raise ValueError(f"bad converged flag {record['converged']!r}")
        return cls(
            experiment=record["experiment"],
            solver=record["solver"],
            N=int(record["N"]),
            snr_db=float(record["snr_db"]),
            trial=int(record["trial"]),
            seed=int(record["seed"]),
            sum_rate=float(record["sum_rate"]),
            psi_final=float(record["psi_final"]),
            iterations=int(record["iterations"]),
            wall_time_s=float(record["wall_time_s"]),
            converged=flag == "true",
        )


def write_rows(rows: Iterable[ResultRow], target) -> int:
    """Write rows as CSV to a path or an open text file; returns the count."""
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            return write_rows(rows, fh)
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    count = 0
    for row in rows:
        writer.writerow(row.as_csv())
        count += 1
    return count


def read_rows(source) -> list[ResultRow]:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_rows(fh)
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [ResultRow.from_csv(rec) for rec in reader]


def _config_for(spec: ExperimentSpec, n: int) -> SystemConfig:
    return dataclasses.replace(spec.system, N=int(n))


def draw_trial(spec: ExperimentSpec, n: int, trial: int, namespace: int = _TRIAL_KEY):
    """Return (seed, channels, theta_init) for one trial."""
    seed = trial_seed(spec.master_seed, namespace, int(n), int(trial))
    rng = np.random.default_rng(seed)
    channels = gen_channel_set(_config_for(spec, n), rng)
    theta_init = rng.uniform(0.0, TWO_PI, size=int(n))
    return seed, channels, theta_init


def _opts(spec: ExperimentSpec, **kw) -> SolverOptions:
    return dataclasses.replace(spec.solver_opts, **kw)


def tune_for_n(spec: ExperimentSpec, n: int, epsilon: float) -> float:
    """GA step for IRS size ``n``, tuned on instances disjoint from the trials."""
    instances = []
    for t in range(spec.tune_trials):
        _, channels, theta_init = draw_trial(spec, n, t, namespace=_TUNE_KEY)
        instances.append((channels, theta_init))
    return tune_ga_step_pooled(instances, _opts(spec, epsilon=epsilon), spec.ga_candidates)


def _solve(name, channels, theta_init, opts, snr):
    """Run one solver; returns (theta, iterations, wall_time, converged)."""
    if name == "dsm":
        out = dsm_solve(channels, opts, theta_init)
        return out.theta, out.iterations, out.wall_time, out.converged
    if name == "ga":
        out = ga_solve(channels, opts, theta_init)
        return out.theta, out.iterations, out.wall_time, out.converged
    if name == "random_baseline":
        return np.asarray(theta_init, dtype=float), 0, 0.0, True
    if name == "grid":
        start = time.perf_counter()
        theta, _ = grid_search(channels, _grid_opts(opts), snr)
        return theta, opts.grid_q ** channels.N, time.perf_counter() - start, True
    raise ValueError(f"unknown solver {name!r}")


def _grid_opts(opts: SolverOptions) -> SolverOptions:
    return dataclasses.replace(opts, grid_objective="sum_capacity")


def _row(spec_id, solver, n, snr_db, trial, seed, channels, theta, iters, wall, conv, snr):
    rate = end_to_end_rate(channels, theta, snr).sum_rate
    return ResultRow(
        experiment=spec_id, solver=solver, N=int(n), snr_db=float(snr_db),
        trial=int(trial), seed=int(seed), sum_rate=rate,
        psi_final=spgm_objective(channels, theta), iterations=int(iters),
        wall_time_s=float(wall), converged=bool(conv),
    )


def run_se_vs_snr(spec: ExperimentSpec) -> Iterator[ResultRow]:
    validate_spec(spec)
    eps = spec.solver_opts.epsilon
    for n in spec.n_values:
        step = tune_for_n(spec, n, eps) if "ga" in spec.solvers else spec.solver_opts.ga_step
        opts = _opts(spec, epsilon=eps, ga_step=step)
        for trial in range(spec.trials):
            seed, channels, theta_init = draw_trial(spec, n, trial)
            # SPGM solvers do not depend on SNR: solve once, rate at every SNR
            fixed = {
                name: _solve(name, channels, theta_init, opts, None)
                for name in spec.solvers if name != "grid"
            }
            for snr_db in spec.snr_values_db:
                snr = db_to_linear(snr_db)
                for name in spec.solvers:
                    res = fixed[name] if name != "grid" else _solve(name, channels, theta_init, opts, snr)
                    yield _row(spec.experiment, name, n, snr_db, trial, seed, channels, *res, snr)


def _sweep_id(base: str, eps: float) -> str:
    return f"{base}@eps={eps:g}"


def _run_eps_sweep(spec: ExperimentSpec, warm_up: bool) -> Iterator[ResultRow]:
    validate_spec(spec)
    snr_db = spec.snr_values_db[0]
    snr = db_to_linear(snr_db)
    for eps in spec.sweep_epsilons():
        exp_id = _sweep_id(spec.experiment, eps)
        for n in spec.n_values:
            step = tune_for_n(spec, n, eps) if "ga" in spec.solvers else spec.solver_opts.ga_step
            opts = _opts(spec, epsilon=eps, ga_step=step)
            if warm_up:
                _, channels, theta_init = draw_trial(spec, n, 0, namespace=_WARMUP_KEY)
                for name in spec.solvers:
                    _solve(name, channels, theta_init, opts, snr)
            for trial in range(spec.trials):
                seed, channels, theta_init = draw_trial(spec, n, trial)
                for name in spec.solvers:
                    res = _solve(name, channels, theta_init, opts, snr)
                    yield _row(exp_id, name, n, snr_db, trial, seed, channels, *res, snr)


def run_iters_vs_n(spec: ExperimentSpec) -> Iterator[ResultRow]:
    """Iteration counts per tolerance; the experiment column carries ``@eps=``."""
    return _run_eps_sweep(spec, warm_up=False)


def run_time_vs_n(spec: ExperimentSpec) -> Iterator[ResultRow]:
    """Wall times per tolerance, each (epsilon, N) preceded by an untimed warm-up."""
    return _run_eps_sweep(spec, warm_up=True)


def run_oracle_check(spec: ExperimentSpec) -> Iterator[ResultRow]:
    validate_spec(spec)
    opts = _opts(spec, grid_objective="sum_capacity")
    for n in spec.n_values:
        if "ga" in spec.solvers:
            opts = dataclasses.replace(opts, ga_step=tune_for_n(spec, n, opts.epsilon))
        for trial in range(spec.trials):
            seed, channels, theta_init = draw_trial(spec, n, trial)
            fixed = {
                name: _solve(name, channels, theta_init, opts, None)
                for name in spec.solvers if name != "grid"
            }
            for snr_db in spec.snr_values_db:
                snr = db_to_linear(snr_db)
                for name in spec.solvers:
                    res = fixed[name] if name != "grid" else _solve(name, channels, theta_init, opts, snr)
                    yield _row(spec.experiment, name, n, snr_db, trial, seed, channels, *res, snr)


_RUNNERS = {
    "se_vs_snr": run_se_vs_snr,
    "iters_vs_n": run_iters_vs_n,
    "time_vs_n": run_time_vs_n,
    "oracle_check": run_oracle_check,
}


def run_experiment(spec: ExperimentSpec) -> Iterator[ResultRow]:
    validate_spec(spec)
    return _RUNNERS[spec.experiment](spec)


def oracle_gaps(rows: Sequence[ResultRow], solver: str = "dsm") -> dict[str, np.ndarray]:
    """Per-(N, SNR, trial) relative gaps of ``solver`` against the grid.

    Returns arrays ``rate_gap = (R_grid - R) / R_grid`` and
    ``psi_gap = (psi_grid - psi) / psi_grid``, in matching order.  The psi
    gap is taken at the grid's rate-optimal point and is usually negative,
    since the grid does not maximize psi.
    """
    grid = {(r.N, r.snr_db, r.trial): r for r in rows if r.solver == "grid"}
    rate_gap, psi_gap = [], []
    for r in rows:
        if r.solver != solver:
            continue
        g = grid.get((r.N, r.snr_db, r.trial))
        if g is None:
            continue
        rate_gap.append((g.sum_rate - r.sum_rate) / g.sum_rate)
        psi_gap.append((g.psi_final - r.psi_final) / g.psi_final)
    return {"rate_gap": np.array(rate_gap), "psi_gap": np.array(psi_gap)}


# ---------------------------------------------------------------- CLI


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _words(text: str) -> tuple[str, ...]:
    return tuple(t for t in text.replace(",", " ").split())


# config key -> (parser, destination)
_CONFIG_KEYS = {
    "n": (_ints, "n_values"),
    "snr_db": (_floats, "snr_values_db"),
    "trials": (int, "trials"),
    "epsilon": (_floats, "epsilon"),
    "solvers": (_words, "solvers"),
    "seed": (int, "seed"),
    "q": (int, "q"),
    "out": (str, "out"),
    "k": (int, "K"),
    "l": (int, "L"),
    "rician_beta_db": (float, "rician_beta_db"),
    "max_iters": (int, "max_iters"),
    "ga_steps": (_floats, "ga_steps"),
    "tune_trials": (int, "tune_trials"),
}


def _read_config(path: str) -> dict:
    """Parse an INI-style ``key = value`` file; a section header is optional."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    parser = configparser.ConfigParser()
    parser.read_string("[bench]\n" + text if not text.lstrip().startswith("[") else text)
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            norm = key.replace("-", "_").lower()
            if norm not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r} in {path}")
            conv, dest = _CONFIG_KEYS[norm]
            out[dest] = conv(value)
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsdsm-bench",
        description="Monte Carlo benchmarks for IRS phase-shift optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name.replace("_", "-"))
        p.add_argument("--n", type=int, nargs="+", dest="n_values", help="IRS sizes")
        p.add_argument("--snr-db", type=float, nargs="+", dest="snr_values_db",
                       help="SNR points in dB")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
        p.add_argument("--epsilon", type=float, nargs="+",
                       help="termination tolerance(s) on the objective change")
        p.add_argument("--solvers", nargs="+", type=str,
                       help=f"subset of {', '.join(SOLVERS)}")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--q", type=int, help="grid levels per phase")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--config", help="key = value file; its entries override flags")
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    values = {k: v for k, v in vars(args).items() if v is not None}
    if "config" in values:
        values.update(_read_config(values.pop("config")))
    if "solvers" in values:
        values["solvers"] = tuple(
            w for item in values["solvers"] for w in item.replace(",", " ").split()
        )
    experiment = args.command.replace("-", "_")
    spec = default_spec(experiment)
    system = spec.system
    sys_kw = {}
    for src, dst in (("seed", "seed"), ("K", "K"), ("L", "L")):
        if src in values:
            sys_kw[dst] = values[src]
    if "rician_beta_db" in values:
        sys_kw["rician_beta"] = db_to_linear(values["rician_beta_db"])
    system = dataclasses.replace(system, **sys_kw)
    opt_kw = {}
    if "q" in values:
        opt_kw["grid_q"] = values["q"]
    if "max_iters" in values:
        opt_kw["max_iters"] = values["max_iters"]
    epsilons = spec.epsilons
    if "epsilon" in values:
        eps = tuple(values["epsilon"]) if isinstance(values["epsilon"], Sequence) else (values["epsilon"],)
        opt_kw["epsilon"] = eps[0]
        epsilons = eps
    opts = dataclasses.replace(spec.solver_opts, **opt_kw)
    kw = dict(system=system, solver_opts=opts, epsilons=epsilons)
    for key in ("n_values", "snr_values_db", "trials", "solvers"):
        if key in values:
            kw[key] = tuple(values[key]) if key != "trials" else values[key]
    if "ga_steps" in values:
        kw["ga_candidates"] = tuple(values["ga_steps"])
    if "tune_trials" in values:
        kw["tune_trials"] = values["tune_trials"]
    if "out" in values:
        kw["output_path"] = values["out"]
    return dataclasses.replace(spec, **kw)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
        validate_spec(spec)
    except GridBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: invalid experiment: {exc}", file=sys.stderr)
        return EXIT_INVALID

    rows = run_experiment(spec)
    try:
        if spec.output_path and spec.output_path != "-":
            count = write_rows(rows, spec.output_path)
        else:
            count = write_rows(rows, sys.stdout)
    except OSError as exc:
        print(f"error: cannot write {spec.output_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {count} rows", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
