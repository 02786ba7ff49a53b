"""
Experiment pipeline shared by the CLI and the HTTP routers:
canonicalize -> classify -> transform -> simulate -> analyze -> export
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..analysis import Verdict, follower_gap, omega_bounds, verify_convergence, verify_monotone_eps_star
from ..config import get_settings
from ..configfile import dump_config, load_config
from ..digraph import is_strongly_connected, random_quasi_strongly_connected
from ..exceptions import AttsyncError, ConfigError
from ..quaternion import canonicalize, classify_subspace, random_unit_quaternions
from ..schemas import (
    CaseOutcome,
    CheckReport,
    EdgeSpec,
    GoldensReport,
    IntegratorSettings,
    RunSummary,
    SimConfig,
    SweepReport,
    SweepTrial,
    VerdictModel,
)
from ..simulator import Trace, simulate
from ..transform import find_transform
from . import exporter

logger = logging.getLogger(__name__)
settings = get_settings()

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
GOLDEN_CASES = ("case1", "case2", "case2_broken")
CASE2_ROOTS = (2, 3, 4)
BROKEN_MIN_DISAGREEMENT = 0.1


def bundled_config(name: str) -> SimConfig:
    path = DATA_DIR / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"no bundled config named '{name}'")
    return load_config(path)


def _verdict_model(verdict: Verdict) -> VerdictModel:
    return VerdictModel(
        passed=verdict.passed,
        message=verdict.message,
        first_violation=verdict.first_violation,
        c1_estimate=verdict.c1_estimate,
    )


def check(config: SimConfig) -> CheckReport:
    """Connectivity, canonical subspaces, initial-condition class and transform; no simulation"""
    g = config.graph()
    roots = g.root_analysis
    states = config.initial_quaternions()
    if config.canonicalize_init:
        states = [canonicalize(q) for q in states]

    report = CheckReport(
        case=config.name,
        n=g.n,
        strong=is_strongly_connected(g),
        quasi_strong=bool(roots.roots),
        roots=list(roots.roots),
        non_roots=list(roots.non_roots),
        root_subgraph_strong=is_strongly_connected(roots.root_subgraph) if roots.root_subgraph else None,
        degrees=g.degrees.tolist(),
        subspaces=[classify_subspace(q).value for q in states],
    )
    if roots.roots:
        result = find_transform(states, roots)
        report.initial_class = str(result.cls)
        report.transform_v = list(result.v.as_tuple())
        report.transformed_scalars = result.scalars.tolist()
        report.transform_constants = dict(result.constants)
    logger.info(f"Checked '{config.name}': roots={report.roots} class={report.initial_class}")
    return report


def summarize(trace: Trace) -> RunSummary:
    g, roots = trace.graph, trace.roots
    final = trace.final
    weight_bound, root_count_bound = omega_bounds(g, roots)
    convergence = verify_convergence(trace)
    transform = trace.transform
    return RunSummary(
        case=trace.name,
        strong=is_strongly_connected(g),
        quasi_strong=bool(roots.roots),
        roots=list(roots.roots),
        initial_class=str(transform.cls) if transform is not None and transform.cls is not None else None,
        transform_v=list(transform.v.as_tuple()) if transform is not None else None,
        protocol=trace.protocol,
        steps=trace.steps,
        samples=len(trace.samples),
        final_disagreement=final.metrics.disagreement,
        final_eps_star=final.metrics.eps_star_all,
        follower_gap=follower_gap(final.state, roots),
        max_omega_observed=max(m.max_omega_norm for m in trace.metrics()),
        omega_weight_bound=weight_bound,
        omega_root_count_bound=root_count_bound,
        monotone=_verdict_model(verify_monotone_eps_star(trace)),
        convergence=_verdict_model(convergence),
        wall_time=trace.wall_time,
    )


def _output_dir(config: SimConfig, out_dir: str | Path | None) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if config.output_path:
        return Path(config.output_path)
    return Path(settings.OUTPUT_DIR) / config.name


def run(config: SimConfig, out_dir: str | Path | None = None, svg: bool | None = None) -> tuple[Trace, RunSummary]:
    """Simulate, analyze and write trace.csv, metrics.csv, summary files and optional SVGs"""
    trace = simulate(config)
    summary = summarize(trace)

    directory = _output_dir(config, out_dir)
    files = [
        exporter.export_csv(trace, directory / "trace.csv"),
        exporter.export_metrics_csv(trace, directory / "metrics.csv"),
    ]
    exporter.write_config_copy(dump_config(config), directory)
    if config.emit_svg if svg is None else svg:
        files += exporter.export_svg(trace, directory)
    summary.files = [str(p) for p in files]
    exporter.write_summary(summary, directory)
    logger.info(
        f"Run '{config.name}' done: disagreement={summary.final_disagreement:.3e}, "
        f"convergence={'pass' if summary.convergence.passed else 'fail'}"
    )
    return trace, summary


def _golden_reasons(case: str, trace: Trace, summary: RunSummary) -> list[str]:
    """Failed acceptance criteria for one bundled case (empty when it passes)"""
    reasons = []
    tol = settings.CONVERGENCE_TOL
    if case in ("case1", "case2"):
        if summary.final_disagreement >= tol:
            reasons.append(f"final disagreement {summary.final_disagreement:.3g} >= {tol:g}")
        if not summary.convergence.passed:
            reasons.append(f"convergence: {summary.convergence.message}")
    if case == "case1":
        if not summary.strong:
            reasons.append("graph is not strongly connected")
        if not summary.monotone.passed:
            reasons.append(f"monotonicity: {summary.monotone.message}")
        if summary.final_eps_star <= 0.0:
            reasons.append(f"final eps* {summary.final_eps_star:.3g} is not positive")
    elif case == "case2":
        if tuple(summary.roots) != CASE2_ROOTS:
            reasons.append(f"roots {summary.roots} != {list(CASE2_ROOTS)}")
        sub = trace.roots.root_subgraph
        if sub is None or not is_strongly_connected(sub):
            reasons.append("induced root graph is not strongly connected")
        if summary.follower_gap >= tol:
            reasons.append(f"non-roots are {summary.follower_gap:.3g} away from the roots")
    elif case == "case2_broken":
        if summary.quasi_strong:
            reasons.append("graph should not be quasi-strongly connected")
        if summary.final_disagreement <= BROKEN_MIN_DISAGREEMENT:
            reasons.append(f"final disagreement {summary.final_disagreement:.3g} <= {BROKEN_MIN_DISAGREEMENT:g}")
    return reasons


def _run_golden(case: str, out_dir: Path) -> CaseOutcome:
    try:
        config = bundled_config(case)
        trace, summary = run(config, out_dir / case)
    except AttsyncError as e:
        logger.error(f"Golden case {case} failed: {e.one_line()}")
        return CaseOutcome(case=case, passed=False, reasons=[e.one_line()])
    reasons = _golden_reasons(case, trace, summary)
    return CaseOutcome(case=case, passed=not reasons, reasons=reasons, summary=summary)


def goldens(out_dir: str | Path | None = None) -> GoldensReport:
    """Run the bundled cases concurrently and check their acceptance criteria"""
    out_dir = Path(settings.OUTPUT_DIR if out_dir is None else out_dir)
    with ThreadPoolExecutor(max_workers=settings.GOLDENS_WORKERS) as pool:
        outcomes = list(pool.map(lambda case: _run_golden(case, out_dir), GOLDEN_CASES))
    for outcome in outcomes:
        logger.info(f"Golden {outcome.case}: {'PASS' if outcome.passed else 'FAIL'}")
    return GoldensReport(passed=all(o.passed for o in outcomes), cases=outcomes)


def random_config(rng: np.random.Generator, n: int, t_final: float, name: str) -> SimConfig:
    g = random_quasi_strongly_connected(rng, n)
    initial = [tuple(float(c) for c in row) for row in random_unit_quaternions(rng, n)]
    return SimConfig(
        name=name,
        n=n,
        edges=[EdgeSpec(j=j, i=i, weight=w) for j, i, w in g.edges()],
        initial=initial,
        integrator=IntegratorSettings(t_final=t_final, record_every=10),
    )


def _sweep_trial(trial: int, config: SimConfig) -> SweepTrial:
    trace = simulate(config)
    verdict = verify_convergence(trace)
    return SweepTrial(
        trial=trial,
        n=config.n,
        edges=len(config.edges),
        roots=list(trace.roots.roots),
        passed=verdict.passed,
        final_disagreement=trace.final.metrics.disagreement,
        message=verdict.message,
    )


def sweep(trials: int = 8, nodes: int = 6, seed: int = 0, t_final: float = 100.0) -> SweepReport:
    """Random quasi-strongly connected graphs with random initial attitudes, simulated concurrently"""
    rng = np.random.default_rng(seed)
    configs = [random_config(rng, nodes, t_final, f"sweep-{seed}-{k}") for k in range(trials)]
    with ThreadPoolExecutor(max_workers=settings.SWEEP_WORKERS) as pool:
        results = list(pool.map(_sweep_trial, range(trials), configs))
    report = SweepReport(seed=seed, trials=results)
    logger.info(f"Sweep seed={seed}: {sum(t.passed for t in results)}/{trials} converged")
    return report
