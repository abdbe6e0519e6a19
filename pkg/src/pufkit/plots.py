"""Matplotlib renderings for report outputs (rate regions, error profiles)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .analysis import RatePoint, RegionBoundary

__all__ = ["render_rate_regions", "render_error_profile"]


def render_rate_regions(
    fcs: RegionBoundary,
    cs: RegionBoundary,
    code_point: RatePoint,
    fl_point: RatePoint,
    path,
) -> None:
    """Region boundaries plus the code operating point and finite-length point."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(
        [q.secret_key_rate for q in fcs.points],
        [q.privacy_leakage_rate for q in fcs.points],
        label="FCS region boundary",
    )
    ax.plot(
        [q.secret_key_rate for q in cs.points],
        [q.privacy_leakage_rate for q in cs.points],
        label="CS region boundary",
        linestyle="--",
    )
    ax.plot(
        code_point.secret_key_rate,
        code_point.privacy_leakage_rate,
        "o",
        label="BCH operating point",
    )
    ax.plot(
        fl_point.secret_key_rate,
        fl_point.privacy_leakage_rate,
        "s",
        label="finite-length point",
    )
    ax.set_xlabel("secret-key rate [bits/source-bit]")
    ax.set_ylabel("privacy-leakage rate [bits/source-bit]")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_error_profile(p, path, title: str | None = None) -> None:
    """Histogram of per-coefficient bit-error probabilities."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(p, bins=40)
    ax.axvline(float(max(p)), color="tab:red", linestyle=":", label=f"max = {max(p):.4f}")
    ax.set_xlabel("bit-error probability")
    ax.set_ylabel("coefficient count")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
