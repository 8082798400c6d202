"""Least-squares slopes on log-log data."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Slope and intercept of ``log y`` against ``log x``."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    if len(x) < 2:
        raise ValueError("need at least two points for a fit")
    if np.any(~np.isfinite(y)):
        raise ValueError("values must be positive and finite")
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)
