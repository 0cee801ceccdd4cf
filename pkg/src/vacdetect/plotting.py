"""Optional PNG figures for the CLI (``--figure``); the data files stay primary."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_traces(path, time_grid, traces: dict, steady: float | None = None, title: str = "mean current"):
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in traces.items():
        ax.plot(time_grid, values, label=label)
    if steady is not None:
        ax.axhline(steady, color="k", ls=":", lw=1, label="steady (Markov)")
    ax.set_xlabel("t")
    ax.set_ylabel("<i(t)>")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_sweep(path, rows: list[dict], axis: str, columns=("mean_current", "oracle_mean_current")):
    x = np.array([r[axis] for r in rows], float)
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in columns:
        if rows and col in rows[0]:
            ax.plot(x, [r[col] for r in rows], "o-", label=col)
    ax.set_xlabel(axis)
    ax.legend()
    _save(fig, path)


def plot_correlation(path, rows: list[dict]):
    tau = np.array([r["tau"] for r in rows], float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(tau, [max(r["smooth_abs"], 1e-300) for r in rows], label="|smooth| (Markov)")
    if rows and "oracle_smooth_abs" in rows[0]:
        ax.semilogy(tau, [max(r["oracle_smooth_abs"], 1e-300) for r in rows], "--", label="|smooth| (oracle)")
    ax.set_xlabel("tau")
    ax.set_ylabel("|correlation|")
    ax.legend()
    _save(fig, path)


def plot_checks(path, rows: list[dict]):
    names = [r["check"] for r in rows]
    errors = [r["error"] for r in rows]
    tols = [r["tolerance"] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    idx = np.arange(len(rows))
    ax.bar(idx, errors, color=["tab:green" if r["passed"] else "tab:red" for r in rows])
    ax.scatter(idx, tols, marker="_", s=400, color="k", label="tolerance")
    ax.set_xticks(idx, names, rotation=30, ha="right")
    ax.set_ylabel("error")
    ax.legend()
    _save(fig, path)
