"""Optional figure rendering for CLI reports (Agg backend, file output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_fit",
    "plot_spectrum",
    "plot_stages",
    "plot_timeseries",
    "plot_trials",
]

_LEVEL_LABELS = ("|00>", "|01>", "|10>", "|11>")


def plot_timeseries(series, path) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    t_ms = series.times * 1e3
    ax1.plot(t_ms, series.mz, lw=0.8)
    ax1.set_ylabel("Mz")
    if series.populations is not None:
        for k in range(series.populations.shape[1]):
            ax2.plot(t_ms, series.populations[:, k], lw=0.8, label=_LEVEL_LABELS[k])
        ax2.legend(fontsize=8, ncol=4)
    ax2.set_xlabel("t (ms)")
    ax2.set_ylabel("population")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fit(series, fit, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.4))
    t = np.asarray(series.times)
    ax.plot(t * 1e3, series.mz, ".", ms=2, label="data")
    rate = 0.0 if np.isinf(fit.t2_estimate) else 1.0 / fit.t2_estimate
    model = fit.amplitude * np.cos(fit.rabi_estimate * t + fit.phase) * np.exp(-rate * t)
    ax.plot(t * 1e3, model + fit.offset, lw=0.8, label="fit")
    ax.set_xlabel("t (ms)")
    ax.set_ylabel("Mz")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_spectrum(points, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.4))
    freq_mhz = [p.frequency_hz / 1e6 for p in points]
    ax.plot(freq_mhz, [p.delta_rxx for p in points], lw=0.8)
    ax.set_xlabel("drive frequency (MHz)")
    ax.set_ylabel("Delta Rxx")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trials(records, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.4))
    errors = [r.frobenius_error_raw for r in records]
    ax.hist(errors, bins=max(10, len(errors) // 10), color="tab:blue", alpha=0.8)
    ax.set_xlabel("Frobenius error (raw estimate)")
    ax.set_ylabel("trials")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_stages(stages, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.4))
    width = 0.8 / len(stages)
    x = np.arange(4)
    for idx, (label, pops) in enumerate(stages):
        ax.bar(x + idx * width, pops, width=width, label=label)
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(_LEVEL_LABELS)
    ax.set_ylabel("population")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
