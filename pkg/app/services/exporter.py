"""
Trace export: long-format CSV, metrics CSV, SVG plots and run summaries
"""
import logging
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from ..analysis import eps_star_series
from ..config import get_settings
from ..exceptions import ExportError
from ..schemas import RunSummary
from ..simulator import Trace

logger = logging.getLogger(__name__)
settings = get_settings()

TRACE_COLUMNS = ["t", "agent", "eps", "q1", "q2", "q3", "w1", "w2", "w3"]
METRIC_COLUMNS = ["t", "eps_star_roots", "eps_star_all", "k_index", "W1", "W2", "V", "disagreement", "max_omega"]

# fixed ids and no timestamp so identical traces render to identical bytes
matplotlib.rcParams["svg.hashsalt"] = "attsync"
_SVG_METADATA = {"Date": None}


def _require_samples(trace: Trace):
    if not trace.samples:
        raise ExportError(f"trace '{trace.name}' has no samples")


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e.strerror or e}")
    logger.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def trace_frame(trace: Trace) -> pd.DataFrame:
    """One row per (sample, agent)"""
    att = trace.attitudes() + 0.0  # no "-0" in the CSV
    omg = trace.omegas() + 0.0
    k, n = att.shape[0], trace.graph.n
    return pd.DataFrame(
        {
            "t": np.repeat(trace.times(), n),
            "agent": np.tile(np.arange(1, n + 1), k),
            "eps": att[..., 0].ravel(),
            "q1": att[..., 1].ravel(),
            "q2": att[..., 2].ravel(),
            "q3": att[..., 3].ravel(),
            "w1": omg[..., 0].ravel(),
            "w2": omg[..., 1].ravel(),
            "w3": omg[..., 2].ravel(),
        },
        columns=TRACE_COLUMNS,
    )


def metrics_frame(trace: Trace) -> pd.DataFrame:
    frame = pd.DataFrame([m.as_row() for m in trace.metrics()], columns=METRIC_COLUMNS)
    frame["k_index"] = frame["k_index"].astype("Int64")  # empty when there is no root
    return frame


def export_csv(trace: Trace, path: str | Path) -> Path:
    _require_samples(trace)
    return _write_frame(trace_frame(trace), path)


def export_metrics_csv(trace: Trace, path: str | Path) -> Path:
    _require_samples(trace)
    return _write_frame(metrics_frame(trace), path)


def read_trace_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """(times, attitudes of shape (samples, N, 4)) from a file written by export_csv"""
    frame = pd.read_csv(path, float_precision="round_trip").sort_values(["t", "agent"], kind="stable")
    times = frame["t"].unique()
    n = int(frame["agent"].max())
    att = frame[["eps", "q1", "q2", "q3"]].to_numpy().reshape(len(times), n, 4)
    return times, att


def export_svg(trace: Trace, directory: str | Path) -> list[Path]:
    """attitudes.svg (eps and q components per agent) and diagnostics.svg (eps* and disagreement)"""
    _require_samples(trace)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    t = trace.times()
    att = trace.attitudes()
    labels = [f"agent {i}" for i in range(1, trace.graph.n + 1)]

    # Figure objects, not pyplot: exports run on worker threads
    fig = Figure(figsize=(10, 7))
    axes = fig.subplots(2, 2, sharex=True)
    for ax, comp, name in zip(axes.ravel(), range(4), ("eps", "q1", "q2", "q3")):
        ax.plot(t, att[:, :, comp])
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    axes[1, 0].set_xlabel("t [s]")
    axes[1, 1].set_xlabel("t [s]")
    fig.legend(labels, loc="upper center", ncol=len(labels))
    paths = [_save(fig, directory / "attitudes.svg")]

    gaps = np.array([m.disagreement for m in trace.metrics()])
    fig = Figure(figsize=(8, 6))
    top, bottom = fig.subplots(2, 1, sharex=True)
    top.plot(t, eps_star_series(trace), label="eps* (all agents)")
    if trace.roots.roots:
        top.plot(t, eps_star_series(trace, trace.roots.roots), "--", label="eps* (roots)")
    top.set_ylabel("eps*")
    top.legend()
    top.grid(True, alpha=0.3)
    bottom.semilogy(t, np.maximum(gaps, np.finfo(float).tiny))
    bottom.set_ylabel("disagreement")
    bottom.set_xlabel("t [s]")
    bottom.grid(True, alpha=0.3)
    paths.append(_save(fig, directory / "diagnostics.svg"))
    return paths


def _save(fig: Figure, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata=_SVG_METADATA, bbox_inches="tight")
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e.strerror or e}")
    logger.info(f"Wrote {path}")
    return path


def write_config_copy(text: str, directory: str | Path) -> Path:
    path = Path(directory) / "config.cfg"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e.strerror or e}")
    return path


def write_summary(summary: RunSummary, directory: str | Path) -> list[Path]:
    """summary.json plus a human-readable summary.txt"""
    directory = Path(directory)
    json_path, text_path = directory / "summary.json", directory / "summary.txt"
    lines = [
        f"case               {summary.case}",
        f"strong             {summary.strong}",
        f"quasi-strong       {summary.quasi_strong}",
        f"roots              {summary.roots}",
        f"initial class      {summary.initial_class or '-'}",
        f"transform v        {summary.transform_v or '-'}",
        f"protocol           {summary.protocol.value}",
        f"steps / samples    {summary.steps} / {summary.samples}",
        f"final disagreement {summary.final_disagreement:.6g}",
        f"final eps* (C1)    {summary.final_eps_star:.6g}",
        f"follower gap       {summary.follower_gap:.6g}",
        f"max |omega|        {summary.max_omega_observed:.6g} (bounds: {summary.omega_weight_bound:g}, "
        f"{summary.omega_root_count_bound})",
        f"monotone eps*      {'pass' if summary.monotone.passed else 'FAIL'}: {summary.monotone.message}",
        f"convergence        {'pass' if summary.convergence.passed else 'FAIL'}: {summary.convergence.message}",
        f"wall time          {summary.wall_time:.3f}s",
    ]
    try:
        directory.mkdir(parents=True, exist_ok=True)
        json_path.write_text(summary.model_dump_json(indent=2), encoding="utf-8")
        text_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise ExportError(f"cannot write summary in {directory}: {e.strerror or e}")
    return [json_path, text_path]
