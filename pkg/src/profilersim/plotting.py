"""Trace plotting: rendered four-panel figures and gnuplot scripts.

Panel layout mirrors the standard profiler report: (a) sea-water density,
(b) density gradient seen by the supervisor, (c) sinking speed against its
reference, (d) depth, all versus time.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .control import Mode
from .scenario import RunResult


def render_figure(result: RunResult, out_path: str | Path, dpi: int = 120) -> Path:
    """Render the four-panel trace figure to an image file."""
    recs = result.records
    t = [r.t for r in recs]
    fig, axes = plt.subplots(4, 1, sharex=True, figsize=(8.0, 9.0))
    ax_rho, ax_grad, ax_v, ax_z = axes

    ax_rho.plot(t, [r.rho_true for r in recs], lw=1.2, label="true")
    ax_rho.plot(t, [r.rho_meas for r in recs], lw=0.8, ls="--", label="measured")
    ax_rho.set_ylabel(r"$\rho$ (kg/m$^3$)")
    ax_rho.legend(loc="best", fontsize=8)

    ax_grad.plot(t, [r.grad_est for r in recs], lw=1.0)
    threshold = result.scenario.supervisor.trigger_threshold
    ax_grad.axhline(threshold, color="0.4", lw=0.8, ls=":")
    ax_grad.axhline(-threshold, color="0.4", lw=0.8, ls=":")
    ax_grad.set_ylabel(r"$d\rho/dz$ (kg/m$^4$)")

    ax_v.plot(t, [r.v for r in recs], lw=1.2, label="v")
    ax_v.plot(t, [r.v_ref for r in recs], lw=0.8, ls="--", label="v_ref")
    ax_v.set_ylabel("speed (m/s)")
    ax_v.legend(loc="best", fontsize=8)

    ax_z.plot(t, [r.z for r in recs], lw=1.2)
    ax_z.invert_yaxis()
    ax_z.set_ylabel("depth (m)")
    ax_z.set_xlabel("time (s)")

    for lo, hi in _measure_spans(recs):
        for ax in axes:
            ax.axvspan(lo, hi, color="tab:orange", alpha=0.12, lw=0)

    fig.suptitle(f"scenario: {result.scenario.name}")
    fig.align_ylabels(axes)
    fig.tight_layout(rect=(0, 0, 1, 0.97))
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
    return out_path


def _measure_spans(records) -> list[tuple[float, float]]:
    spans = []
    start = None
    for r in records:
        if r.mode == Mode.MEASURE and start is None:
            start = r.t
        elif r.mode != Mode.MEASURE and start is not None:
            spans.append((start, r.t))
            start = None
    if start is not None:
        spans.append((start, records[-1].t))
    return spans


GNUPLOT_TEMPLATE = """\
# Four-panel trace plot for scenario '{name}'
# Usage: gnuplot {script_name}
set datafile separator ","
set terminal pngcairo size 900,1000
set output "{png_name}"
set multiplot layout 4,1 title "scenario: {name}"
set key top right
set xlabel ""
set ylabel "rho (kg/m^3)"
plot "{csv_name}" every ::1 using 1:6 with lines title "true", \\
     "{csv_name}" every ::1 using 1:7 with lines dashtype 2 title "measured"
set ylabel "drho/dz (kg/m^4)"
plot "{csv_name}" every ::1 using 1:8 with lines notitle, \\
     {threshold} with lines dashtype 3 lc "gray" notitle
set ylabel "speed (m/s)"
plot "{csv_name}" every ::1 using 1:3 with lines title "v", \\
     "{csv_name}" every ::1 using 1:11 with lines dashtype 2 title "v_ref"
set ylabel "depth (m)"
set xlabel "time (s)"
set yrange [*:*] reverse
plot "{csv_name}" every ::1 using 1:2 with lines notitle
unset multiplot
"""


def write_gnuplot_script(csv_name: str, out_path: str | Path, name: str,
                         threshold: float) -> Path:
    """Emit a standalone gnuplot script that plots the trace CSV."""
    out_path = Path(out_path)
    out_path.write_text(GNUPLOT_TEMPLATE.format(
        name=name, script_name=out_path.name, csv_name=csv_name,
        png_name=out_path.stem + ".png", threshold=threshold))
    return out_path
