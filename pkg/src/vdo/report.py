"""Figure rendering for bench and tamper reports.

Figures are rendered headless (Agg) to PNG files next to the delimited
output; the CSV stays the authoritative record. Each figure reads off one
claim: variant overhead ordering, growth with n, insensitivity to p, and
per-class tamper detection rates.
"""

from __future__ import annotations

import math
import statistics
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bench import VARIANTS, BenchRecord, median_by_config  # noqa: E402
from .tamper import TAMPER_CLASSES, TamperReport  # noqa: E402

_VARIANT_COLORS = {"baseline": "#7f7f7f", "hash_only": "#1f77b4", "attested": "#d62728"}

_RC = {
    "figure.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "axes.titlesize": 10,
}


def _median_times_by_n(records: list[BenchRecord], variant: str) -> dict[int, float]:
    groups: dict[int, list[float]] = {}
    for r in records:
        if r.variant == variant:
            groups.setdefault(r.n, []).append(r.wall_time_s)
    return {n: statistics.median(times) for n, times in sorted(groups.items())}


def render_bench_figures(
    records: list[BenchRecord], out_dir: Path | str, stem: str = "bench"
) -> list[Path]:
    """Render overhead/scaling/p-sensitivity figures; returns written paths."""
    if not records:
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    medians = median_by_config(records)

    with plt.rc_context(_RC):
        # Per-variant median wall time against element count.
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for variant in VARIANTS:
            by_n = _median_times_by_n(records, variant)
            if by_n:
                ax.plot(
                    list(by_n),
                    list(by_n.values()),
                    marker="o",
                    label=variant,
                    color=_VARIANT_COLORS[variant],
                )
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
        ax.set_xlabel("elements n")
        ax.set_ylabel("median wall time (s)")
        ax.set_title("Forward-pass overhead by variant")
        ax.legend()
        path = out_dir / f"{stem}_overhead.png"
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

        # Attested latency and artifact size against n.
        attested_n = sorted({r.n for r in records if r.variant == "attested"})
        if len(attested_n) > 1:
            times = _median_times_by_n(records, "attested")
            sizes: dict[int, list[int]] = {}
            for r in records:
                if r.variant == "attested":
                    sizes.setdefault(r.n, []).append(r.artifact_bytes)
            fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
            ax1.plot(list(times), list(times.values()), marker="o", color="#d62728")
            ax1.set_xscale("log", base=2)
            ax1.set_yscale("log")
            ax1.set_xlabel("elements n")
            ax1.set_ylabel("median wall time (s)")
            ax1.set_title("Attested latency vs n")
            median_sizes = {n: statistics.median(v) for n, v in sorted(sizes.items())}
            ax2.plot(list(median_sizes), list(median_sizes.values()), marker="s", color="#2ca02c")
            ax2.set_xscale("log", base=2)
            ax2.set_xlabel("elements n")
            ax2.set_ylabel("median artifact size (bytes)")
            ax2.set_title("Proof artifact size vs n")
            path = out_dir / f"{stem}_scaling.png"
            fig.savefig(path, bbox_inches="tight")
            plt.close(fig)
            written.append(path)

        # Median time against p at the largest shape present.
        p_values = sorted({(r.p_num, r.p_den) for r in records}, key=lambda t: t[0] / t[1])
        if len(p_values) > 1:
            largest = max({r.shape for r in records}, key=math.prod)
            fig, ax = plt.subplots(figsize=(5.0, 3.4))
            for variant in VARIANTS:
                xs, ys = [], []
                for p_num, p_den in p_values:
                    key = (variant, largest, p_num, p_den)
                    if key in medians:
                        xs.append(p_num / p_den)
                        ys.append(medians[key][0])
                if xs:
                    ax.plot(xs, ys, marker="o", label=variant, color=_VARIANT_COLORS[variant])
            ax.set_xlabel("dropout probability p")
            ax.set_ylabel("median wall time (s)")
            ax.set_title(f"p-sensitivity at shape {'x'.join(map(str, largest))}")
            ax.set_ylim(bottom=0)
            ax.legend()
            path = out_dir / f"{stem}_p_sensitivity.png"
            fig.savefig(path, bbox_inches="tight")
            plt.close(fig)
            written.append(path)

    return written


def render_tamper_figure(report: TamperReport, out_path: Path | str) -> Path:
    """Bar chart of per-class detection rates."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    classes = [c for c in TAMPER_CLASSES if any(t.attack == c for t in report.trials)]
    rates = [100.0 * report.rate(c) for c in classes]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        bars = ax.bar(classes, rates, color="#1f77b4", width=0.6)
        ax.axhline(100.0, color="#d62728", linestyle="--", linewidth=1)
        for bar, rate in zip(bars, rates):
            ax.text(
                bar.get_x() + bar.get_width() / 2,
                rate - 6 if rate > 10 else rate + 2,
                f"{rate:.1f}%",
                ha="center",
                color="white" if rate > 10 else "black",
                fontsize=8,
            )
        ax.set_ylim(0, 105)
        ax.set_ylabel("detection rate (%)")
        ax.set_title("Tamper detection by attack class")
        fig.savefig(out_path, bbox_inches="tight")
        plt.close(fig)
    return out_path
