import io
import logging
from dataclasses import dataclass
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from echcap.models import EchcapError

logger = logging.getLogger(__name__)

# fixed hash salt for stable SVG ids
SVG_PARAMS = {"svg.hashsalt": "echcap", "svg.fonttype": "none", "path.simplify": False}


class PlotError(EchcapError, ValueError):
    """Raised for empty or malformed plot datasets."""
    pass


@dataclass(frozen=True)
class LabeledCurve:
    label: str
    points: np.ndarray


def emit_plot(curves: Sequence[LabeledCurve], title: str = "",
              xlabel: str = "x", ylabel: str = "y") -> str:
    """Render polylines into a deterministic SVG document.

    Every curve becomes a group with id ``curve-<index>`` in input order.
    """
    if not curves:
        raise PlotError("nothing to plot")
    with matplotlib.rc_context(SVG_PARAMS):
        fig = Figure(figsize=(6.0, 6.0))
        ax = fig.add_subplot()
        for i, curve in enumerate(curves):
            pts = np.asarray(curve.points, dtype=float).reshape(-1, 2)
            if len(pts) < 2:
                raise PlotError(f"curve {curve.label!r} needs at least two points")
            (line,) = ax.plot(pts[:, 0], pts[:, 1], label=curve.label, linewidth=1.0)
            line.set_gid(f"curve-{i}")
        ax.set_xlim(left=0.0)
        ax.set_ylim(bottom=0.0)
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right")
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    logger.debug(f"Rendered {len(curves)} curves to SVG")
    return buffer.getvalue()
