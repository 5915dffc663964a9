"""SVG figures for CLI reports.  Output is byte-stable for identical inputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "motion-spherical",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (5.0, 3.4),
    "lines.linewidth": 1.2,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def plot_spectrum(tau, rho, path) -> Path:
    """Branches (rho^2, lambda_s rho^u) of the embedded spectrum."""
    rho = np.asarray(rho, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for s, lam in enumerate(tau.lambdas()):
            ax.plot(rho ** 2, lam * rho ** tau.u, label=f"s={s}")
        ax.set_xlabel(r"$\xi_1$")
        ax.set_ylabel(r"$\xi_2$")
        ax.set_title(f"spectrum of {tau}")
        if tau.a_tau < 8:
            ax.legend(frameon=False, fontsize=7)
        fig.tight_layout()
        return _save(fig, path)


def plot_branch_samples(samples, path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for s in range(samples.values.shape[1]):
            ax.plot(samples.rho, np.abs(samples.values[:, s]), label=f"s={s}")
        ax.set_yscale("symlog", linthresh=1e-6)
        ax.set_xlabel(r"$\rho$")
        ax.set_ylabel(r"$|v_s(\rho)|$")
        ax.set_title(title or f"branch samples, {samples.tau}")
        if samples.values.shape[1] < 8:
            ax.legend(frameon=False, fontsize=7)
        fig.tight_layout()
        return _save(fig, path)


def plot_extension(field, xi1, xi2, path, rho_max: float | None = None) -> Path:
    """|u| on a grid with the spectrum branches drawn on top."""
    X1, X2, U = field.grid(xi1, xi2)
    tau = field.tau
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        im = ax.pcolormesh(X1, X2, np.abs(U), shading="auto", cmap="viridis", rasterized=False)
        fig.colorbar(im, ax=ax, label="|u|")
        rmax = rho_max or float(np.sqrt(max(np.max(xi1), 0.0)))
        r = np.linspace(0.0, rmax, 200)
        for lam in tau.lambdas():
            ax.plot(r ** 2, lam * r ** tau.u, color="w", lw=0.6)
        ax.set_xlim(np.min(xi1), np.max(xi1))
        ax.set_ylim(np.min(xi2), np.max(xi2))
        ax.set_xlabel(r"$\xi_1$")
        ax.set_ylabel(r"$\xi_2$")
        ax.set_title(f"{field.builder} extension, {tau}")
        fig.tight_layout()
        return _save(fig, path)


def plot_decay(rows, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for n, marker in ((3, "o"), (4, "s")):
            fam = [r for r in rows if r["n"] == n]
            if not fam:
                continue
            ax.semilogy([r["casimir"] for r in fam], [max(r["sup"], 1e-300) for r in fam], marker, ls="", ms=4, label=f"n={n}")
            ax.axvline(fam[0]["threshold_casimir"], ls=":", lw=0.8, color="C0" if n == 3 else "C1")
        ax.set_xlabel("Casimir level")
        ax.set_ylabel("sup |u|")
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def plot_verification(results, path) -> Path:
    """measured / tolerance per criterion on a log axis; bars right of 1 fail."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 4.0))
        labels, ratios, colors = [], [], []
        for r in results:
            tol = r.tolerance if r.tolerance and np.isfinite(r.tolerance) else None
            ratio = (r.measured / tol) if tol else (0.0 if r.passed else 1e3)
            ratios.append(max(ratio, 1e-16) if np.isfinite(ratio) else 1e3)
            labels.append(f"{r.number} {r.title}")
            colors.append("C2" if r.passed else "C3")
        y = np.arange(len(results))[::-1]
        ax.barh(y, ratios, color=colors)
        ax.set_xscale("log")
        ax.axvline(1.0, color="k", lw=0.8)
        ax.set_yticks(y)
        ax.set_yticklabels(labels, fontsize=7)
        ax.set_xlabel("measured / tolerance")
        fig.tight_layout()
        return _save(fig, path)
