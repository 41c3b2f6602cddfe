"""Optional PNG rendering of report tables (needs the ``plot`` extra)."""

from __future__ import annotations

from typing import Dict, List

import numpy as np


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise ImportError("figures need matplotlib: pip install 'artifact[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: str) -> str:
    fig.savefig(path, dpi=110, metadata={"Software": None})
    return path


def render_pair(tables: Dict[str, "object"], prefix: str, title: str = "") -> List[str]:
    """Render whichever panels are present in ``tables``; returns written paths."""
    plt = _pyplot()
    written = []

    if "polar" in tables:
        a = tables["polar"].array()
        fig, ax = plt.subplots(figsize=(5, 4))
        ex = a[:, 3] > 0
        ax.scatter(a[~ex, 2], a[~ex, 1], s=4, c="0.6")
        ax.scatter(a[ex, 2], a[ex, 1], s=6, c="C3")
        ax.set_yscale("log")
        ax.set_xlabel("W")
        ax.set_ylabel("S")
        ax.set_title(title)
        written.append(_save(fig, f"{prefix}__polar.png"))
        plt.close(fig)

    if "spectral_density" in tables:
        dens = tables["spectral_density"].array()
        fig, ax = plt.subplots(figsize=(5, 4))
        if "spectral_weights" in tables:
            w = tables["spectral_weights"].array()
            ax.hist(w[:, 0], bins=20, range=(0, 1), weights=w[:, 1] * 20, color="0.8")
        ax.plot(dens[:, 0], dens[:, 1], c="C0")
        ax.set_xlim(0, 1)
        ax.set_xlabel("w")
        ax.set_title(title)
        written.append(_save(fig, f"{prefix}__spectral.png"))
        plt.close(fig)

    if "levels_empirical" in tables or "levels_cf" in tables:
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        for kind, style in (("levels_empirical", "-"), ("levels_cf", "--")):
            if kind not in tables:
                continue
            a = tables[kind].array()
            for c in np.unique(a[:, 0]):
                sel = a[:, 0] == c
                ax.plot(a[sel, 2], a[sel, 3], style, c="C0" if style == "-" else "C1", lw=1)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(title)
        written.append(_save(fig, f"{prefix}__levels.png"))
        plt.close(fig)

    if "chi" in tables or "eta" in tables:
        fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.5))
        if "chi" in tables:
            a = tables["chi"].array()
            left.plot(a[:, 0], a[:, 1])
            left.set_xlabel("u")
            left.set_ylabel("chi(u)")
        if "eta" in tables:
            a = tables["eta"].array()
            right.plot(a[:, 0], a[:, 1], label="Hill")
            right.plot(a[:, 0], a[:, 2], label="MLE")
            right.axhline(1.0, c="0.5", lw=0.8)
            right.set_xlabel("k")
            right.legend()
        fig.suptitle(title)
        written.append(_save(fig, f"{prefix}__coeffs.png"))
        plt.close(fig)

    if "eta_test" in tables or "indep_test" in tables:
        fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.5))
        if "eta_test" in tables:
            a = tables["eta_test"].array()
            left.plot(a[:, 0], a[:, 1], "o-", ms=3, label="eta MLE")
            left.plot(a[:, 0], a[:, 7], c="C3", label="critical")
            left.set_xlabel("k")
            left.legend()
        if "indep_test" in tables:
            a = tables["indep_test"].array()
            right.plot(a[:, 0], a[:, 1], "o-", ms=3, label="T_I")
            right.plot(a[:, 0], a[:, 2], "s-", ms=3, label="T_S")
            if a.size:
                right.axhline(a[0, 3], c="C0", ls=":")
                right.axhline(a[0, 4], c="C1", ls=":")
            right.set_xlabel("k")
            right.legend()
        fig.suptitle(title)
        written.append(_save(fig, f"{prefix}__tests.png"))
        plt.close(fig)

    return written
