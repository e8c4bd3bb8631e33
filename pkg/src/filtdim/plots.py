"""Figure rendering for the CLI report paths.

Each CLI command that writes delimited output also renders a matplotlib
figure next to it (PNG, same stem).  Figures are diagnostic companions to
the CSV data, never a replacement for it.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finish(fig, ax, path):
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_estimate(series_by_kind: dict, estimates: dict, path) -> None:
    """ln P against ln eps, one line per partition kind, with fitted slopes."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for kind, series in series_by_kind.items():
        finite = np.isfinite(series.values)
        est = estimates[kind]
        ax.plot(series.lam[finite], series.values[finite], "o-", ms=4,
                label=f"{kind}: slope {est.slope:.4f}")
    ax.set_xlabel(r"$\ln\,\varepsilon$")
    ax.set_ylabel(r"$\ln\,P(\varepsilon)$")
    ax.legend(fontsize=8)
    _finish(fig, ax, path)


def plot_derivative_check(rows: list, path) -> None:
    """Analytic log-log slope against lambda with its admissible band."""
    lam = [r["lambda"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(lam, [r["slope"] for r in rows], "o-", ms=4, label="analytic slope")
    ax.plot(lam, [r["fd_slope"] for r in rows], "x", ms=5, label="finite difference")
    ax.plot(lam, [r["lower_bound"] for r in rows], "--", color="gray", label="bounds")
    ax.plot(lam, [r["upper_bound"] for r in rows], "--", color="gray")
    ax.set_xlabel(r"$\lambda = \ln\,\varepsilon$")
    ax.set_ylabel(r"$d\,\ln\|g_{e^\lambda}*\mu\|_q\,/\,d\lambda$")
    ax.legend(fontsize=8)
    _finish(fig, ax, path)


def plot_schedule(report, path) -> None:
    """Difference growth along the schedule with the fitted statistic."""
    n = report.n[1:]
    diffs = report.diffs
    finite = diffs > 0.0
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if report.schedule.kind == "power":
        ax.plot(np.log(n[finite]), np.log(diffs[finite]), "o-", ms=4)
        ax.set_xlabel(r"$\ln n$")
        title = f"power t={report.schedule.t:g}: m_hat={report.m_hat:.3f}"
    else:
        ax.plot(n[finite], np.log(diffs[finite]), "o-", ms=4)
        ax.set_xlabel(r"$n$")
        title = f"geometric: slope={report.m_hat:.3f}"
    ax.set_ylabel(r"$\ln\,\Delta_n$")
    ct = report.critical_t
    ct_text = "inf" if math.isinf(ct) else f"{ct:.3f}"
    ax.set_title(f"{title}, critical t={ct_text}", fontsize=9)
    _finish(fig, ax, path)


def plot_compare(eps: np.ndarray, curves: dict, path) -> None:
    """All requested partition curves on a shared log-log grid."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    lam = np.log(eps)
    for kind, values in curves.items():
        vals = np.asarray(values, dtype=float)
        ok = vals > 0.0
        ax.plot(lam[ok], np.log(vals[ok]), "o-", ms=3, label=kind)
    ax.set_xlabel(r"$\ln\,\varepsilon$")
    ax.set_ylabel(r"$\ln\,P(\varepsilon)$")
    ax.legend(fontsize=8)
    _finish(fig, ax, path)
