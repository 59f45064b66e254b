"""Discrete quadratic Wasserstein distance between time signals.

A signal is turned into a probability density on its own time grid by a
positivity scaling followed by normalization.  The distance between two
such densities is

    d_W(f, g) = sum_i |t_i - T_i|^2 ftilde_i,      T_i = Ginv(F_i),

where F and G are the discrete CDFs of the normalized signals and Ginv is
the piecewise-linear inverse of G.  The map T = Ginv o F is the 1-D
optimal transport (monotone rearrangement) between the two densities.

Inverse-CDF convention: the graph {(G_i, t_i)} is augmented with the
anchor point (0, t_1) and interpolated linearly; where the CDF repeats a
value (zero-weight samples) the smallest time attaining that level is
returned, and probabilities clamp to [t_1, t_n].  Exact CDF level hits
return the grid time exactly, which makes d_W(f, f) = 0 bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComputeError
from .signals import Gather, TimeGrid, Trace

SCALING_KINDS = ("linear", "square", "exponential", "absolute", "linexp")

# exp(710) overflows float64; stay a little below.
_EXP_ARG_LIMIT = 700.0


@dataclass(frozen=True)
class Scaling:
    """Positivity scaling applied to a signal before normalization.

    kind "linear"      : f + c       (c > -min f; c=None means choose per pair)
    kind "square"      : f^2
    kind "exponential" : exp(c * f)  (c > 0)
    kind "absolute"    : |f|
    kind "linexp"      : exp(c * f) where f < 0, else f + 1/c   (c > 0)
    """

    kind: str
    c: float | None = None

    def __post_init__(self):
        if self.kind not in SCALING_KINDS:
            raise ValueError(f"unknown scaling kind {self.kind!r}, expected one of {SCALING_KINDS}")
        if self.kind in ("exponential", "linexp"):
            if self.c is None or not self.c > 0:
                raise ValueError(f"{self.kind} scaling needs a constant c > 0, got {self.c}")
        if self.kind == "linear" and self.c is not None and not np.isfinite(self.c):
            raise ValueError(f"linear shift constant must be finite, got {self.c}")


def auto_shift_constant(f: Trace, g: Trace, margin: float) -> float:
    """Shift constant for the linear scaling of the pair (f, g).

    Returns margin - min(min f, min g) when that minimum is <= 0, else just
    margin, so both shifted signals stay >= margin > 0.
    """
    if not margin > 0:
        raise ValueError(f"margin must be positive, got {margin}")
    low = min(float(f.values.min()), float(g.values.min()))
    if low <= 0:
        return margin - low
    return margin


def default_margin(f: Trace, g: Trace) -> float:
    """Default positivity margin: 1% of the larger amplitude, at least 0.01."""
    amp = max(float(np.abs(f.values).max()), float(np.abs(g.values).max()), 1.0)
    return 1e-2 * amp


def _scaled_values(values: np.ndarray, scaling: Scaling) -> np.ndarray:
    if scaling.kind == "linear":
        if scaling.c is None:
            raise ValueError("linear scaling with c=None must be resolved per pair first")
        out = values + scaling.c
        if out.min() <= 0:
            raise ComputeError(
                f"linear shift c={scaling.c} leaves non-positive samples "
                f"(min f + c = {out.min():.3g})"
            )
        return out
    if scaling.kind == "square":
        return values * values
    if scaling.kind == "exponential":
        arg = scaling.c * values
        if arg.max() > _EXP_ARG_LIMIT:
            raise ComputeError(
                f"exponential scaling overflows: max c*f = {arg.max():.3g} > {_EXP_ARG_LIMIT}"
            )
        return np.exp(arg)
    if scaling.kind == "absolute":
        return np.abs(values)
    # linexp: exponential below zero, shifted linear above
    neg = values < 0
    out = values + 1.0 / scaling.c
    out[neg] = np.exp(scaling.c * values[neg])
    return out


def apply_scaling(trace: Trace, scaling: Scaling) -> Trace:
    """New trace holding the scaled samples."""
    return Trace(trace.grid, _scaled_values(trace.values, scaling))


@dataclass(frozen=True, eq=False)
class NormalizedDensity:
    """Nonnegative weights summing to one on a time grid, with their CDF."""

    grid: TimeGrid
    weights: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        c = np.asarray(self.cdf, dtype=np.float64)
        if w.shape != (self.grid.n,) or c.shape != (self.grid.n,):
            raise ValueError("weights/cdf shape must match the grid")
        if w.min() < 0:
            raise ValueError(f"negative weight {w.min()}")
        if abs(float(w.sum()) - 1.0) > 1e-12 or abs(float(c[-1]) - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        w.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "cdf", c)


def normalize(trace: Trace) -> NormalizedDensity:
    """Normalize nonnegative samples to unit total mass and accumulate the CDF."""
    v = trace.values
    if v.min() < 0:
        raise ComputeError(
            f"cannot normalize a signal with negative samples (min {v.min():.3g}); "
            "apply a positivity scaling first"
        )
    total = float(v.sum())
    if not total > 0:
        raise ComputeError("cannot normalize a signal with zero total mass")
    weights = v / total
    return NormalizedDensity(grid=trace.grid, weights=weights, cdf=np.cumsum(weights))


def quantiles(density: NormalizedDensity, ps) -> np.ndarray:
    """Piecewise-linear inverse CDF evaluated at probabilities ps.

    Exact level hits return the smallest grid time attaining the level;
    probabilities between levels interpolate linearly; results clamp to
    the grid span.
    """
    ps = np.asarray(ps, dtype=np.float64)
    # Accumulated CDFs can overshoot 1 by a few ulp; only reject real misuse.
    if ps.size and (ps.min() < -1e-9 or ps.max() > 1 + 1e-9):
        raise ValueError(f"probabilities must lie in [0, 1], got range "
                         f"[{ps.min()}, {ps.max()}]")
    ps = np.clip(ps, 0.0, None)
    t = density.grid.times()
    levels = np.concatenate(([0.0], density.cdf))
    knots = np.concatenate(([t[0]], t))
    # The accumulated CDF can fall a few ulp short of 1; clamp from above.
    p_eff = np.minimum(ps, levels[-1])
    idx = np.searchsorted(levels, p_eff, side="left")
    idx = np.minimum(idx, len(levels) - 1)
    lo = np.maximum(idx - 1, 0)
    span = levels[idx] - levels[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(span > 0, (p_eff - levels[lo]) / span, 0.0)
    out = knots[lo] + frac * (knots[idx] - knots[lo])
    exact = levels[idx] == p_eff
    out = np.where(exact, knots[idx], out)
    return np.clip(out, t[0], t[-1])


def inverse_cdf(density: NormalizedDensity, p: float) -> float:
    return float(quantiles(density, np.asarray([p]))[0])


@dataclass(frozen=True, eq=False)
class TransportEvaluation:
    """Optimal transport map values T_i and the resulting squared distance."""

    map_values: np.ndarray
    distance: float


def transport_eval(f_density: NormalizedDensity, g_density: NormalizedDensity) -> TransportEvaluation:
    """Monotone transport from f to g and the weighted squared displacement."""
    if f_density.grid != g_density.grid:
        raise ValueError("transport needs both densities on the same time grid")
    T = quantiles(g_density, f_density.cdf)
    diff = f_density.grid.times() - T
    dist = float(np.sum(diff * diff * f_density.weights))
    return TransportEvaluation(map_values=T, distance=dist)


def _resolve_scaling(f: Trace, g: Trace, scaling: Scaling) -> Scaling:
    if scaling.kind == "linear" and scaling.c is None:
        return Scaling("linear", auto_shift_constant(f, g, default_margin(f, g)))
    return scaling


def w2_distance(f: Trace, g: Trace, scaling: Scaling) -> float:
    """Quadratic Wasserstein distance between two traces after scaling.

    f plays the role of the transported (simulated) signal: its weights
    carry the sum.  A linear scaling with c=None picks the shift constant
    per pair via auto_shift_constant with the default margin.
    """
    if f.grid != g.grid:
        raise ValueError("w2_distance needs both traces on the same time grid")
    sc = _resolve_scaling(f, g, scaling)
    fd = normalize(apply_scaling(f, sc))
    gd = normalize(apply_scaling(g, sc))
    return transport_eval(fd, gd).distance


def multi_trace_w2(f: Gather, g: Gather, scaling: Scaling) -> float:
    """Sum of per-trace distances over label-matched gathers."""
    if set(f.labels) != set(g.labels):
        raise ValueError("gathers carry different trace labels")
    return float(sum(w2_distance(tr, g.trace_for(lab), scaling) for lab, tr in f.items()))


def l2_distance(f: Trace, g: Trace) -> float:
    """Plain sum of squared sample differences (no dt weighting)."""
    if f.grid != g.grid:
        raise ValueError("l2_distance needs both traces on the same time grid")
    diff = f.values - g.values
    return float(np.sum(diff * diff))


def multi_trace_l2(f: Gather, g: Gather) -> float:
    if set(f.labels) != set(g.labels):
        raise ValueError("gathers carry different trace labels")
    return float(sum(l2_distance(tr, g.trace_for(lab)) for lab, tr in f.items()))
