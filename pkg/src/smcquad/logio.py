"""CSV logs, run summaries and per-figure data files."""
from __future__ import annotations

import io
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .simulation import COLUMNS, TimeSeriesLog

DEFAULT_THRESHOLDS = {"z": 0.01, "phi": 0.005, "theta": 0.005, "psi": 0.005}

#: Series in each figure data file, time first.
FIGURES = {
    "fig2": ("t", "z", "z_ref", "u1"),
    "fig3": ("t", "theta", "theta_ref", "u3"),
    "fig4": ("t", "phi", "phi_ref", "u2"),
    "fig5": ("t", "w1", "w2", "w3", "w4"),
    "fig6": ("t", "s_z"),
    "fig7": ("t", "s_theta", "s_phi"),
    "fig8": ("t", "m_hat", "m_true", "s_z"),
    "fig9": ("t", "m_hat", "m_true", "s_z"),
    "fig10": ("t", "z", "z_meas", "z_hat", "z_dot", "z_dot_hat"),
}


class UnknownFigure(ValueError):
    pass


class EmptyWindow(ValueError):
    pass


class LogFormatError(ValueError):
    pass


def log_to_csv(log: TimeSeriesLog) -> str:
    """CSV text of a log: documented header, then one row per record at 17 significant digits."""
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack([log[c] for c in COLUMNS]), fmt="%.17g", delimiter=",",
               header=",".join(COLUMNS), comments="")
    return buf.getvalue()


def write_log(log: TimeSeriesLog, path: str | os.PathLike) -> None:
    try:
        Path(path).write_text(log_to_csv(log))
    except OSError as exc:
        raise OSError(f"cannot write log {path}: {exc.strerror or exc}") from exc


def read_log(path: str | os.PathLike) -> TimeSeriesLog:
    try:
        with open(path) as fh:
            header = fh.readline().rstrip("\n").split(",")
            if tuple(header) != COLUMNS:
                raise LogFormatError(f"{path}: header does not match the log column list")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise OSError(f"cannot read log {path}: {exc.strerror or exc}") from exc
    if data.size == 0:
        data = np.empty((0, len(COLUMNS)))
    return TimeSeriesLog({c: data[:, i].copy() for i, c in enumerate(COLUMNS)})


@dataclass(frozen=True)
class RunSummary:
    rms_error: dict[str, float]
    # None means the error never settles below its threshold inside the window
    convergence_time: dict[str, float | None]
    max_surface_after_convergence: dict[str, float | None]
    final_m_hat: float
    final_m_error: float
    flag_counts: dict[str, int]
    window_start: float
    duration: float
    wall_time: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def _convergence_time(t: np.ndarray, err: np.ndarray, threshold: float) -> float | None:
    bad = np.nonzero(np.abs(err) >= threshold)[0]
    if len(bad) == 0:
        return float(t[0])
    if bad[-1] == len(t) - 1:
        return None
    return float(t[bad[-1] + 1])


def summarize(log: TimeSeriesLog, thresholds: dict[str, float] | None = None,
              warmup: float = 0.0) -> RunSummary:
    """Tracking and estimation metrics over ``t >= warmup``."""
    thresholds = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    t = log["t"]
    if len(t) == 0 or warmup > t[-1]:
        raise EmptyWindow(f"warm-up {warmup} s leaves no samples (log ends at "
                          f"{t[-1] if len(t) else 0.0} s)")
    win = t >= warmup
    tw = t[win]
    rms, conv, smax = {}, {}, {}
    for axis in ("z", "phi", "theta", "psi"):
        err = (log[axis] - log[axis + "_ref"])[win]
        rms[axis] = float(np.sqrt(np.mean(err * err)))
        conv[axis] = _convergence_time(tw, err, thresholds[axis])
        surf = log["s_" + axis][win]
        smax[axis] = None if conv[axis] is None else float(np.max(np.abs(surf[tw >= conv[axis]])))
    return RunSummary(
        rms_error=rms,
        convergence_time=conv,
        max_surface_after_convergence=smax,
        final_m_hat=float(log["m_hat"][-1]),
        final_m_error=float(abs(log["m_true"][-1] - log["m_hat"][-1])),
        flag_counts={f: int(np.count_nonzero(log[f][win])) for f in ("tilt_guard", "saturated", "infeasible")},
        window_start=float(tw[0]),
        duration=float(t[-1]),
        wall_time=log.meta.get("wall_time"),
    )


def emit_figure_data(log: TimeSeriesLog, figure_id: str, path: str | os.PathLike) -> Path:
    """Write the series of one figure as whitespace-separated columns with a ``#`` header."""
    try:
        cols = FIGURES[figure_id]
    except KeyError:
        raise UnknownFigure(f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURES)}") from None
    data = np.column_stack([log[c] for c in cols])
    try:
        np.savetxt(path, data, fmt="%.17g", delimiter=" ", header=" ".join(cols), comments="# ")
    except OSError as exc:
        raise OSError(f"cannot write figure data {path}: {exc.strerror or exc}") from exc
    return Path(path)
