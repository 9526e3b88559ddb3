"""PlotSpec builders for fitted densities, PIT-ECDF verdicts and calibration curves."""

from __future__ import annotations

import numpy as np

from .calibration import CalibrationCurve
from .estimators import DensityEstimate, HistogramEstimate, KdeEstimate, QuantileDotPlot
from .plotspec import Layer, PlotSpec
from .uniformity import GofVerdict


def step_coords(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Polyline vertices of the right-continuous step function through (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.repeat(x, 2)[1:], np.repeat(y, 2)[:-1]


def density_plot(est: DensityEstimate, label: str = "y", truth=None) -> PlotSpec:
    """Drawable geometry of a fitted density; ``truth`` optionally overlays a reference pdf."""
    if isinstance(est, KdeEstimate):
        plot = PlotSpec(title=f"KDE (bw {est.bandwidth:.4g}, {est.bandwidth_method})", xlabel=label, ylabel="density")
        plot.add(Layer("lines", {"x": est.grid, "y": est.density}))
        lo, hi = est.display_range
    elif isinstance(est, HistogramEstimate):
        plot = PlotSpec(title=f"Histogram ({est.n_bins} bins, {est.rule})", xlabel=label, ylabel="density")
        e = est.edges
        plot.add(Layer("bars", {"x0": e[:-1], "x1": e[1:], "y0": np.zeros(est.n_bins), "y1": est.densities}))
        lo, hi = float(e[0]), float(e[-1])
    elif isinstance(est, QuantileDotPlot):
        plot = PlotSpec(title=f"Quantile dot plot ({est.n_q} quantiles)", xlabel=label, ylabel="")
        y = (est.level + 0.5) * est.binwidth
        plot.add(Layer("dots", {"x": est.centers, "y": y, "r": np.full(est.n_q, est.radius)}))
        lo, hi = float(est.centers[0] - est.radius), float(est.centers[-1] + est.radius)
    else:
        raise TypeError(f"unknown estimate type {type(est).__name__}")
    if truth is not None and not isinstance(est, QuantileDotPlot):
        xs = np.linspace(lo, hi, 512)
        plot.add(Layer("lines", {"x": xs, "y": truth(xs)}, role="reference", label="true density"))
    return plot


def pit_ecdf_plot(verdict: GofVerdict) -> PlotSpec:
    """ECDF (or ECDF minus z) of the PIT values with its simultaneous band."""
    arr = verdict.plot_arrays()
    diff = verdict.style == "ecdf_difference"
    b = verdict.bands
    plot = PlotSpec(
        title=f"PIT-ECDF {'difference ' if diff else ''}({'pass' if verdict.passed else 'FAIL'})",
        xlabel="z",
        ylabel="ECDF - z" if diff else "ECDF",
    )
    z = np.concatenate([[0.0], arr["z"]])
    plot.add(
        Layer(
            "ribbons",
            {"x": z, "lo": np.concatenate([[0.0], arr["lower"]]), "hi": np.concatenate([[0.0], arr["upper"]])},
            role="band",
            label=f"{int(round(100 * (1 - b.alpha)))}% simultaneous band",
        )
    )
    if diff:
        plot.add(Layer("hlines", {"y": [0.0]}, role="reference"))
    else:
        plot.add(Layer("lines", {"x": [0.0, 1.0], "y": [0.0, 1.0]}, role="reference"))
    outside = (verdict.ecdf.ecdf < b.lower) | (verdict.ecdf.ecdf > b.upper)
    plot.add(Layer("steps", {"x": z, "y": np.concatenate([[0.0], arr["ecdf"]])}, role="observed"))
    if outside.any():
        plot.add(Layer("points", {"x": arr["z"][outside], "y": arr["ecdf"][outside]}, role="observed", flags=np.ones(int(outside.sum()))))
    plot.annotations["gof"] = verdict.to_dict()
    return plot


def calibration_plot(curve: CalibrationCurve) -> PlotSpec:
    """Calibration curve against the diagonal, with its bands or intervals."""
    title = "PAV-adjusted calibration" if curve.kind == "pav" else "Binned calibration"
    if curve.label:
        title += f": {curve.label}"
    plot = PlotSpec(title=title, xlabel="predicted probability", ylabel="CEP" if curve.kind == "pav" else "event rate")
    plot.xlim, plot.ylim = (0.0, 1.0), (0.0, 1.0)
    if curve.lo is not None:
        if curve.kind == "pav":
            xs, lo = step_coords(curve.x, curve.lo)
            _, hi = step_coords(curve.x, curve.hi)
            plot.add(Layer("ribbons", {"x": xs, "lo": lo, "hi": hi}, role="band"))
        else:
            plot.add(Layer("intervals", {"x": curve.x, "lo": curve.lo, "hi": curve.hi}, role="band"))
    plot.add(Layer("lines", {"x": [0.0, 1.0], "y": [0.0, 1.0]}, role="reference"))
    kind = "steps" if curve.kind == "pav" else "lines"
    plot.add(Layer(kind, {"x": curve.x, "y": curve.y}, role="observed"))
    if curve.outside_flags is not None and curve.outside_flags.any():
        f = curve.outside_flags
        plot.add(Layer("points", {"x": curve.x[f], "y": curve.y[f]}, role="observed", flags=np.ones(int(f.sum()))))
    plot.annotations["calibration"] = {"n_flagged": curve.n_flagged, "level": curve.level}
    return plot
