"""Static figures written next to the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import BenchReport  # noqa: E402
from .spectrum import DoaEstimate, PseudoSpectrum  # noqa: E402

plt.rcParams["axes.grid"] = True
plt.rcParams["figure.autolayout"] = True


def plot_spectrum(spec: PseudoSpectrum, path, estimate: DoaEstimate | None = None) -> None:
    """Pseudospectrum in dB: a line over azimuth for one elevation row, else a heat map."""
    db = 10 * np.log10(spec.as_grid().astype(np.float64) / spec.values.max())
    fig, ax = plt.subplots(figsize=(7, 4))
    if spec.grid.shape[1] == 1:
        ax.plot(spec.grid.azimuth, db[:, 0], lw=1.2)
        if estimate is not None:
            for p in estimate.peaks:
                ax.axvline(p.azimuth, color="tab:red", ls="--", lw=0.8)
        ax.set_xlabel("azimuth (deg)")
        ax.set_ylabel("normalised power (dB)")
        ax.set_xlim(spec.grid.azimuth[0], spec.grid.azimuth[-1])
    else:
        mesh = ax.pcolormesh(spec.grid.azimuth, spec.grid.elevation, db.T, shading="auto",
                             cmap="viridis", rasterized=True)
        fig.colorbar(mesh, ax=ax, label="normalised power (dB)")
        if estimate is not None:
            ax.plot([p.azimuth for p in estimate.peaks], [p.elevation for p in estimate.peaks],
                    "r+", ms=10)
        ax.set_xlabel("azimuth (deg)")
        ax.set_ylabel("elevation (deg)")
    ax.set_title(f"{spec.algorithm.upper()} pseudospectrum ({spec.precision})")
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_bench(report: BenchReport, path) -> None:
    labels = [f"{r.az_count}x{r.el_count}" for r in report.ranges]
    x = np.arange(len(labels))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    ax1.plot(x, [r.single_ms for r in report.ranges], "o-", label="1 worker")
    ax1.plot(x, [r.multi_ms for r in report.ranges], "s-",
             label=f"{report.ranges[0].workers if report.ranges else '?'} workers")
    ax1.set_xticks(x, labels)
    ax1.set_ylabel("median time (ms)")
    ax1.legend()
    ax2.bar(x, [r.speedup for r in report.ranges], color="tab:green")
    ax2.axhline(1.0, color="k", lw=0.8)
    ax2.set_xticks(x, labels)
    ax2.set_ylabel("speedup")
    fig.suptitle(f"{report.algorithm.upper()} scan-range scaling")
    fig.savefig(path, dpi=120)
    plt.close(fig)
