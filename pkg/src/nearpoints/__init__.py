"""Counting rational points near manifolds: exact enumeration and verification tools."""

from .chart import BumpWeight, ChartError, ChartSpec, PolynomialMap, default_weight
from .counting import CountResult, count, count_N0, selberg_sandwich_sum
from .fixtures import builtin_chart, chart_a, chart_b, chart_c, linear_chart
from .harness import regime_threshold, serre_probe, sweep, theorem_bound

__version__ = "0.1.0"
