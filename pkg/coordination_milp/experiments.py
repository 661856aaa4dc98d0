import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from coordination_milp.coordinate import scenario_conflicts, scenario_discretization, solve_scenario
from coordination_milp.milp import SolveStatus, export_model, solve_milp
from coordination_milp.model import build_model
from coordination_milp.support.arrivals import gen_abstract_scenario
from coordination_milp.support.plotting import Series, line_chart
from coordination_milp.utils import SolverConfig

logger = logging.getLogger(__name__)

DEFAULT_TAUS = (0.25, 0.5, 1.0, 2.0)
DEFAULT_COUNTS = (1, 2, 3, 4)
TIMESTEP_ROBOTS = 5
TIMESTEP_INSTANCES = 20
RUNTIME_INSTANCES = 10
RUNTIME_TAU = 1.0
RUNTIME_HORIZON = 30.0


def default_zones(n: int) -> int:
    return min(n * (n - 1) // 2, n)


class TimestepRow(NamedTuple):
    instance: int
    tau: float
    mean_sojourn: float
    loss: float
    wall_time: float


class RuntimeRow(NamedTuple):
    robots: int
    instance: int
    status: str
    solve_time: float
    build_export_time: float
    censored: bool


class ExperimentResult(NamedTuple):
    rows: List[NamedTuple]
    summary: Dict
    chart: str

    def write(self, directory: str, name: str):
        os.makedirs(directory, exist_ok=True)
        if self.rows:
            fields = self.rows[0]._fields
        else:
            fields = TimestepRow._fields if name == "timestep" else RuntimeRow._fields
        with open(os.path.join(directory, "{}.csv".format(name)), "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(fields)
            for row in self.rows:
                writer.writerow([_csv_value(v) for v in row])
        with open(os.path.join(directory, "summary.json"), "w") as f:
            json.dump(self.summary, f, indent=2, sort_keys=True)
            f.write("\n")
        with open(os.path.join(directory, "{}.svg".format(name)), "w") as f:
            f.write(self.chart)


def _csv_value(value):
    if isinstance(value, float):
        return "{:.9g}".format(value)
    if isinstance(value, bool):
        return int(value)
    return value


def trend(x: Sequence[float], y: Sequence[float]) -> Dict[str, Optional[float]]:
    """
    Affine slope and Spearman rank correlation, None where undefined
    """
    slope = None
    spearman = None
    if len(x) >= 2:
        slope = float(np.polyfit(x, y, 1)[0])
        if len(set(y)) > 1:
            spearman = float(stats.spearmanr(x, y).correlation)
    return {"slope": slope, "spearman": spearman}


def _run_instances(func, instances: int, threads: int):
    if threads <= 1:
        return [func(i) for i in range(instances)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(executor.map(func, range(instances)))
    return results


def _instance_config(config: SolverConfig) -> SolverConfig:
    # instances run in parallel, each solve stays single threaded
    return config._replace(threads=1)


def run_timestep_experiment(
    instances: int = TIMESTEP_INSTANCES,
    taus: Sequence[float] = DEFAULT_TAUS,
    seed: int = 0,
    robots: int = TIMESTEP_ROBOTS,
    zones: Optional[int] = None,
    config: SolverConfig = SolverConfig(),
    threads: int = 1,
) -> ExperimentResult:
    """
    Relative loss of the optimal mean sojourn time against the finest step duration.

    Instance i uses seed + i. An instance with any non-optimal solve is dropped.
    """
    taus = [float(t) for t in taus]
    if not taus:
        raise ValueError("At least one step duration is needed")
    if taus != sorted(taus) or len(set(taus)) != len(taus):
        raise ValueError("Step durations must be strictly ascending, got {}".format(taus))
    zones = default_zones(robots) if zones is None else zones
    base_config = _instance_config(config)

    def run(instance: int) -> Optional[List[TimestepRow]]:
        scenario = gen_abstract_scenario(robots, zones, seed + instance)
        conflicts = scenario_conflicts(scenario)
        sojourns = []
        for tau in taus:
            result = solve_scenario(scenario, base_config._replace(tau=tau), conflicts)
            if result.report.status is not SolveStatus.OPTIMAL:
                logger.warning(
                    "Dropping instance %d: tau=%s ended %s", instance, tau, result.report.status.label
                )
                return None
            sojourns.append((tau, result.metrics.mean_sojourn, result.report.wall_time))
        baseline = sojourns[0][1]
        return [
            TimestepRow(instance, tau, sojourn, (sojourn - baseline) / baseline, wall)
            for tau, sojourn, wall in sojourns
        ]

    results = _run_instances(run, instances, threads)
    rows = [row for rs in results if rs is not None for row in rs]
    rows.sort(key=lambda r: (r.instance, r.tau))
    dropped = [i for i, rs in enumerate(results) if rs is None]

    means, stds = [], []
    for tau in taus:
        losses = np.array([r.loss for r in rows if r.tau == tau])
        means.append(float(losses.mean()) if len(losses) else math.nan)
        stds.append(float(losses.std()) if len(losses) else math.nan)
    summary = {
        "robots": robots,
        "zones": zones,
        "seed": seed,
        "instances": instances,
        "dropped": dropped,
        "baseline_tau": taus[0],
        "taus": taus,
        "mean_loss": means,
        "std_loss": stds,
    }
    if rows:
        summary.update(trend(taus, means))
    else:
        summary.update({"slope": None, "spearman": None})
    logger.info("Time step experiment: %d instances kept, %d dropped", instances - len(dropped), len(dropped))
    chart = line_chart(
        "Relative optimality loss vs step duration",
        "step duration (s)",
        "relative loss",
        [Series("mean loss", taus, means, stds)] if rows else [],
    )
    return ExperimentResult(rows, summary, chart)


def run_runtime_experiment(
    counts: Sequence[int] = DEFAULT_COUNTS,
    tau: float = RUNTIME_TAU,
    instances: int = RUNTIME_INSTANCES,
    seed: int = 0,
    horizon: float = RUNTIME_HORIZON,
    config: SolverConfig = SolverConfig(),
    threads: int = 1,
) -> ExperimentResult:
    """
    Built-in solver wall time per robot count next to the model build plus MPS export time.

    A solve that hits a limit is kept as a censored observation at its wall time.
    """
    counts = [int(n) for n in counts]
    if counts != sorted(counts) or any(n < 1 for n in counts):
        raise ValueError("Robot counts must be positive and ascending, got {}".format(counts))
    run_config = _instance_config(config)._replace(tau=tau, horizon=horizon)

    rows = []
    for n in counts:

        def run(instance: int, n=n) -> RuntimeRow:
            scenario = gen_abstract_scenario(n, default_zones(n), seed + instance, tau=tau, horizon=horizon)
            conflicts = scenario_conflicts(scenario)
            start = time.perf_counter()
            model = build_model(
                scenario.robots,
                conflicts,
                scenario_discretization(scenario, run_config),
                run_config.model_options(),
            )
            export_model(model, "mps")
            build_export = time.perf_counter() - start
            report = solve_milp(model, run_config.solve_limits(), run_config.engine)
            return RuntimeRow(
                n,
                instance,
                report.status.label,
                report.wall_time,
                build_export,
                report.status not in (SolveStatus.OPTIMAL, SolveStatus.INFEASIBLE),
            )

        rows.extend(_run_instances(run, instances, threads))
        logger.info("Runtime experiment: N=%d done", n)
    rows.sort(key=lambda r: (r.robots, r.instance))

    solve_means = [float(np.mean([r.solve_time for r in rows if r.robots == n])) for n in counts]
    build_means = [float(np.mean([r.build_export_time for r in rows if r.robots == n])) for n in counts]
    censored = [sum(1 for r in rows if r.robots == n and r.censored) for n in counts]
    summary = {
        "tau": tau,
        "horizon": horizon,
        "seed": seed,
        "instances": instances,
        "counts": counts,
        "mean_solve_time": solve_means,
        "mean_build_export_time": build_means,
        "censored": censored,
        "monotone": all(a <= b for a, b in zip(solve_means, solve_means[1:])),
    }
    summary.update(trend(counts, solve_means))
    chart = line_chart(
        "Mean computation time per robot count",
        "robots",
        "time (s)",
        [
            Series("solve", counts, solve_means),
            Series("build + export", counts, build_means),
        ],
    )
    return ExperimentResult(rows, summary, chart)
