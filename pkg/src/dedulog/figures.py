"""Figure rendering for experiment reports. File output only (Agg)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_ABLATION_ORDER = ("base", "se", "se-syn")
_ABLATION_TITLES = {"base": "Base", "se": "SE", "se-syn": "SE+SYN"}


def _cell_title(name: str) -> str:
    return "Depth=" + name.split("=", 1)[1] if name.startswith("depth=") else name


def render_report_figures(report, out_dir: str | Path) -> list[Path]:
    """Accuracy-per-cell bars (grouped per run) and executability bars."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    order = [a for a in _ABLATION_ORDER if a in report.runs] or sorted(report.runs)
    cells = report.cell_names()

    if cells:
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        width = 0.8 / max(1, len(order))
        for k, run_name in enumerate(order):
            run = report.runs[run_name]
            values = [run.cells[c].accuracy if c in run.cells else 0.0 for c in cells]
            positions = [i + k * width for i in range(len(cells))]
            ax.bar(positions, values, width=width, label=_ABLATION_TITLES.get(run_name, run_name))
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(cells))])
        ax.set_xticklabels([_cell_title(c) for c in cells])
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("accuracy")
        ax.set_title(f"Accuracy by {report.group_label} ({report.dataset['name']})")
        if len(order) > 1:
            ax.legend()
        fig.tight_layout()
        path = out / "accuracy.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)

    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    values = [report.runs[name].executability for name in order]
    ax.bar(range(len(order)), values, color="#4878d0")
    ax.set_xticks(range(len(order)))
    ax.set_xticklabels([_ABLATION_TITLES.get(n, n) for n in order])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("executability")
    ax.set_title(f"Executability ({report.dataset['name']})")
    fig.tight_layout()
    path = out / "executability.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths
