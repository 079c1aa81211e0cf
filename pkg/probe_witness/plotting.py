import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

from .errors import UsageError
from .interference import InterferencePattern

logger = logging.getLogger()


def plot_fringe(
    table: Sequence[tuple[float, float]],
    path: Path,
    *,
    title: str = "",
    pattern: Optional[InterferencePattern] = None,
) -> Path:
    """
    Writes the fringe table as an SVG plot. Needs the optional `plot` extra (matplotlib).
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        from matplotlib import pyplot
    except ImportError as e:
        raise UsageError("SVG output needs matplotlib; install the 'plot' extra") from e

    # fixed metadata keeps repeated runs byte-identical
    matplotlib.rcParams["svg.hashsalt"] = "probe-witness"
    phis = [phi for phi, _ in table]
    values = [value for _, value in table]

    fig, ax = pyplot.subplots(figsize=(6, 4))
    ax.plot(phis, values, marker=".", linestyle="-")
    ax.axvline(0.0, color="grey", linewidth=0.8)
    ax.set_xlabel("external phase phi [rad]")
    ax.set_ylabel("detection intensity")
    if pattern is not None:
        title = f"{title}  V={pattern.visibility:.3f}  alpha={pattern.alpha:.3f}".strip()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    pyplot.close(fig)
    logger.info(f"Wrote fringe plot {path}")
    return path
