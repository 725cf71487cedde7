"""Build and save the three figure kinds.

All input parsing happens before a figure is created, so a bad file
never leaves a partial image behind. Rendering is deterministic: fixed
style, fixed dpi, Agg backend, constant PNG metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import csvio

KINDS = ("power_sweep", "fluence_sweep", "histogram")

# Operating-fluence region boundaries (J/cm2): Region I below 0.3,
# Region II up to 0.45, Region III above.
REGION_BOUNDARIES = (0.3, 0.45)
_REGION_COLORS = ("#d9e8f5", "#ddf0dd", "#f5dddd")

_PNG_METADATA = {"Software": "ionload-figures"}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input files, figure kind, output path, style."""

    kind: str
    input_csv: Path
    output: Path
    fit_report: Path | None = None
    dpi: int = 120
    figsize: tuple[float, float] = (6.0, 4.0)
    title: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if self.dpi < 10:
            raise ValueError(f"dpi must be at least 10, got {self.dpi}")


@dataclass(frozen=True)
class RenderResult:
    output: Path
    details: dict = field(default_factory=dict)


def _power_sweep_figure(spec: FigureSpec):
    data = csvio.read_power_sweep(spec.input_csv)
    fit = csvio.read_fit_report(spec.fit_report) if spec.fit_report else None

    fig, ax = plt.subplots(figsize=spec.figsize)
    ax.errorbar(
        data.power_mw,
        data.mean_ions,
        yerr=data.sem_ions,
        fmt="o",
        ms=4,
        capsize=2,
        color="#1f4e79",
        label="simulated",
    )
    details = {"n_points": len(data.power_mw), "p_sat_mW": None}
    if fit is not None and "a" in fit and "b" in fit:
        a, b = float(fit["a"]), float(fit["b"])
        xs = np.linspace(min(data.power_mw), max(data.power_mw), 400)
        ax.plot(xs, a * (1.0 - np.exp(-b * xs)), "-", color="#c05020",
                label=f"$a(1-e^{{-bP}})$, a={a:.2f}, b={b:.2f}/mW")
        p_sat = float(fit.get("p_sat_mW", 1.0 / b))
        ax.axvline(p_sat, linestyle="--", color="0.3",
                   label=f"$P_{{sat}}$ = {p_sat:.2f} mW")
        details["p_sat_mW"] = p_sat
    ax.set_xlabel("second-step power (mW)")
    ax.set_ylabel("ions per pulse")
    ax.set_title(spec.title or "Loading rate vs second-step power")
    ax.legend(loc="lower right", fontsize=8)
    return fig, details


def _fluence_sweep_figure(spec: FigureSpec):
    data = csvio.read_fluence_sweep(spec.input_csv)

    fig, ax = plt.subplots(figsize=spec.figsize)
    lo, hi = min(data.fluence_j_cm2), max(data.fluence_j_cm2)
    margin = 0.03 * max(hi - lo, 1e-6)
    xlim = (lo - margin, hi + margin)
    b1, b2 = REGION_BOUNDARIES
    edges = (xlim[0], b1, b2, xlim[1])
    for i, label in enumerate(("I", "II", "III")):
        left, right = edges[i], edges[i + 1]
        if right <= left:
            continue
        ax.axvspan(left, right, color=_REGION_COLORS[i], zorder=0)
        ax.text(0.5 * (left + right), 0.96, label, transform=ax.get_xaxis_transform(),
                ha="center", va="top", fontsize=10, color="0.35")
    ax.errorbar(
        data.fluence_j_cm2,
        data.mean_ions,
        yerr=data.sem_ions,
        fmt="s-",
        ms=4,
        capsize=2,
        color="#1f4e79",
        zorder=3,
    )
    ax.set_xlim(*xlim)
    ax.set_xlabel("ablation fluence (J/cm$^2$)")
    ax.set_ylabel("ions per pulse")
    ax.set_title(spec.title or "Loading rate vs ablation fluence")
    return fig, {"boundaries": REGION_BOUNDARIES, "n_points": len(data.fluence_j_cm2)}


def _poisson_pmf(k: np.ndarray, lam: float) -> np.ndarray:
    if lam <= 0.0:
        return np.where(k == 0, 1.0, 0.0)
    log_pmf = k * math.log(lam) - lam - np.array([math.lgamma(int(x) + 1) for x in k])
    return np.exp(log_pmf)


def _histogram_figure(spec: FigureSpec):
    counts = csvio.read_pulse_counts(spec.input_csv)
    fit = csvio.read_fit_report(spec.fit_report) if spec.fit_report else None
    lam = float(fit["lambda"]) if fit is not None and "lambda" in fit else (
        sum(counts) / len(counts)
    )

    ks = np.arange(0, max(counts) + 1)
    probs = np.bincount(counts, minlength=ks.size) / len(counts)

    fig, ax = plt.subplots(figsize=spec.figsize)
    ax.bar(ks, probs, width=0.85, color="#6b9ec8", edgecolor="#1f4e79",
           label="simulated")
    ax.plot(ks, _poisson_pmf(ks, lam), "o-", color="#c05020", ms=4,
            label=f"Poisson, $\\hat\\lambda$ = {lam:.2f}")
    ax.annotate(f"$\\hat\\lambda$ = {lam:.2f}", xy=(0.97, 0.85),
                xycoords="axes fraction", ha="right", fontsize=10)
    ax.set_xticks(ks)
    ax.set_xlabel("ions loaded per pulse")
    ax.set_ylabel("probability")
    ax.set_title(spec.title or "Loading probability per pulse")
    ax.legend(loc="upper right", fontsize=8)
    return fig, {
        "lambda_hat": lam,
        "n_pulses": len(counts),
        "max_count": int(max(counts)),
    }


_BUILDERS = {
    "power_sweep": _power_sweep_figure,
    "fluence_sweep": _fluence_sweep_figure,
    "histogram": _histogram_figure,
}


def build_figure(spec: FigureSpec):
    """(figure, details) without saving; the caller owns the figure."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> RenderResult:
    fig, details = build_figure(spec)
    try:
        fig.savefig(spec.output, dpi=spec.dpi, metadata=_PNG_METADATA)
    finally:
        plt.close(fig)
    return RenderResult(output=Path(spec.output), details=details)
