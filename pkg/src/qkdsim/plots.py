"""Figure rendering for the report path.

Figures land in the output directory next to the JSON/CSV files: a per-run
correlator chart and, for sweeps, the S and key-rate trade-off curve.
Matplotlib is imported lazily with the Agg backend so headless runs and
--no-figures sessions never touch a display.
"""

from __future__ import annotations

from pathlib import Path

from .analysis import CHSH_PAIRS, TSIRELSON


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_run_figure(report: dict, out_dir) -> Path:
    """Per-pair correlator bars with the headline figures annotated."""
    plt = _plt()
    labels = [f"{a},{b}" for a, b in CHSH_PAIRS]
    series = []
    for mode in ("exact", "empirical"):
        block = report["chsh"][mode]
        if block:
            series.append((mode, [block["correlators"][f"{a}{b}"] for a, b in CHSH_PAIRS]))

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    width = 0.8 / max(1, len(series))
    for i, (mode, values) in enumerate(series):
        offsets = [j + (i - (len(series) - 1) / 2) * width for j in range(len(labels))]
        ax.bar(offsets, values, width=width * 0.92, label=mode)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.set_ylim(-1.1, 1.1)
    ax.axhline(0.0, color="0.4", lw=0.8)
    ax.set_ylabel("correlator E(A,B)")
    ax.set_title(
        f"{report['config']['protocol']} run, attack {report['config']['attack']['name']}"
    )
    ax.legend(loc="lower right")

    lines = []
    for mode in ("exact", "empirical"):
        chsh = report["chsh"][mode]
        rate = report["rate"][mode]
        if chsh and rate:
            lines.append(
                f"{mode}: S={chsh['s_value']:.4f}  Q={rate['qber']:.4f}  "
                f"r={rate['dw_rate']:.4f}  R={rate['throughput_R']:.4f}"
            )
    ax.text(
        0.02,
        0.97,
        "\n".join(lines),
        transform=ax.transAxes,
        va="top",
        fontsize=9,
        family="monospace",
        bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8},
    )
    fig.tight_layout()
    path = Path(out_dir) / "correlators.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_sweep_figure(rows, param_name: str, out_dir) -> Path:
    """S and the clamped key rate against the swept parameter."""
    plt = _plt()
    xs = [row["parameter"] for row in rows]
    numeric = all(isinstance(x, (int, float)) for x in xs)
    positions = xs if numeric else range(len(xs))

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    ax.plot(positions, [row["S"] for row in rows], "o-", color="tab:blue", label="S")
    ax.axhline(2.0, color="tab:blue", lw=0.8, ls=":", alpha=0.7)
    ax.axhline(TSIRELSON, color="tab:blue", lw=0.8, ls="--", alpha=0.7)
    ax.set_ylabel("CHSH S", color="tab:blue")
    ax.set_ylim(0, 3.0)
    ax.set_xlabel(param_name)
    if not numeric:
        ax.set_xticks(list(positions))
        ax.set_xticklabels(xs, rotation=20, ha="right")

    ax2 = ax.twinx()
    ax2.plot(positions, [row["r"] for row in rows], "s-", color="tab:red", label="r")
    ax2.set_ylabel("key rate r (clamped)", color="tab:red")
    ax2.set_ylim(-0.05, 1.05)

    ax.set_title(f"sweep over {param_name}")
    fig.tight_layout()
    path = Path(out_dir) / "sweep.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
