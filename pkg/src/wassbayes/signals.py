"""Time grids, single-receiver traces, and multi-receiver gathers.

All containers are immutable after construction and safe to share between
threads.  Samples are stored as float64 and rejected at construction if any
entry is non-finite, so distances and likelihoods downstream never see
NaN or Inf.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

Label = tuple[int, int, int]  # (source index, receiver index, component index)


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time axis t_k = t0 + k * dt for k = 0 .. n - 1."""

    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"time grid needs at least 2 samples, got n={self.n}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"time step must be positive and finite, got dt={self.dt}")
        if not np.isfinite(self.t0):
            raise ValueError(f"grid origin must be finite, got t0={self.t0}")

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.n - 1)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)


def make_grid(t0: float, t_end: float, n: int) -> TimeGrid:
    """Grid with n samples whose first and last times are t0 and t_end."""
    if n < 2:
        raise ValueError(f"need at least 2 samples, got n={n}")
    if not t_end > t0:
        raise ValueError(f"grid span must be positive, got [{t0}, {t_end}]")
    return TimeGrid(t0=float(t0), dt=(float(t_end) - float(t0)) / (n - 1), n=int(n))


@dataclass(frozen=True, eq=False)
class Trace:
    """Samples of one signal on a shared time grid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen_array(self.values)
        if vals.ndim != 1:
            raise ValueError(f"trace values must be 1-D, got shape {vals.shape}")
        if vals.shape[0] != self.grid.n:
            raise ValueError(
                f"trace has {vals.shape[0]} samples but grid expects {self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("trace contains non-finite samples")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.grid.n

    def times(self) -> np.ndarray:
        return self.grid.times()


def trace_stats(trace: Trace) -> tuple[float, float, float]:
    """(min, max, total mass) of the raw samples."""
    v = trace.values
    return float(v.min()), float(v.max()), float(v.sum())


@dataclass(frozen=True, eq=False)
class Gather:
    """An ordered collection of traces on one grid, keyed by (source, receiver, component)."""

    traces: tuple[Trace, ...]
    labels: tuple[Label, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        traces = tuple(self.traces)
        labels = tuple(tuple(int(i) for i in lab) for lab in self.labels)
        if not traces:
            raise ValueError("gather must hold at least one trace")
        if len(traces) != len(labels):
            raise ValueError(
                f"{len(traces)} traces but {len(labels)} labels"
            )
        grid = traces[0].grid
        for tr in traces[1:]:
            if tr.grid != grid:
                raise ValueError("all traces in a gather must share one time grid")
        index = {}
        for k, lab in enumerate(labels):
            if lab in index:
                raise ValueError(f"duplicate trace label {lab}")
            index[lab] = k
        object.__setattr__(self, "traces", traces)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", index)

    @property
    def grid(self) -> TimeGrid:
        return self.traces[0].grid

    @property
    def n_traces(self) -> int:
        return len(self.traces)

    def trace_for(self, label: Label) -> Trace:
        return self.traces[self._index[tuple(label)]]

    def items(self):
        return zip(self.labels, self.traces)

    def values_matrix(self) -> np.ndarray:
        """Stacked samples, one row per trace, in stored order."""
        return np.stack([tr.values for tr in self.traces])

    def with_values(self, matrix: np.ndarray) -> "Gather":
        """Same labels and grid, new samples (one row per trace)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (self.n_traces, self.grid.n):
            raise ValueError(
                f"expected value matrix of shape {(self.n_traces, self.grid.n)}, "
                f"got {matrix.shape}"
            )
        traces = tuple(Trace(self.grid, row) for row in matrix)
        return Gather(traces=traces, labels=self.labels)


def merge_gathers(gathers) -> Gather:
    """Concatenate gathers on a shared grid; labels must stay unique."""
    gathers = list(gathers)
    if not gathers:
        raise ValueError("nothing to merge")
    traces = []
    labels = []
    for g in gathers:
        traces.extend(g.traces)
        labels.extend(g.labels)
    return Gather(traces=tuple(traces), labels=tuple(labels))


def _label_name(label: Label) -> str:
    return f"s{label[0]}_r{label[1]}_c{label[2]}"


def _parse_label_name(name: str) -> Label:
    parts = name.split("_")
    if len(parts) != 3 or parts[0][:1] != "s" or parts[1][:1] != "r" or parts[2][:1] != "c":
        raise ValueError(f"malformed trace column name {name!r}")
    return (int(parts[0][1:]), int(parts[1][1:]), int(parts[2][1:]))


def write_gather_csv(gather: Gather, path) -> None:
    """Plain CSV: a time column followed by one column per trace."""
    names = ",".join(_label_name(lab) for lab in gather.labels)
    times = gather.grid.times()
    matrix = gather.values_matrix()
    with open(path, "w", newline="") as fh:
        fh.write(f"time,{names}\n")
        for k in range(gather.grid.n):
            row = ",".join(repr(float(v)) for v in matrix[:, k])
            fh.write(f"{float(times[k])!r},{row}\n")


def read_gather_csv(path) -> Gather:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if header[0] != "time":
        raise ValueError(f"first column must be 'time', got {header[0]!r}")
    labels = tuple(_parse_label_name(name) for name in header[1:])
    data = np.array([[float(x) for x in row] for row in rows])
    times = data[:, 0]
    if len(times) < 2:
        raise ValueError("gather file holds fewer than 2 samples")
    grid = TimeGrid(t0=float(times[0]), dt=float((times[-1] - times[0]) / (len(times) - 1)),
                    n=len(times))
    traces = tuple(Trace(grid, data[:, 1 + k]) for k in range(len(labels)))
    return Gather(traces=traces, labels=labels)


def write_gather_json(gather: Gather, path) -> None:
    doc = {
        "grid": {"t0": gather.grid.t0, "dt": gather.grid.dt, "n": gather.grid.n},
        "labels": [list(lab) for lab in gather.labels],
        "values": [tr.values.tolist() for tr in gather.traces],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def read_gather_json(path) -> Gather:
    with open(path) as fh:
        doc = json.load(fh)
    grid = TimeGrid(t0=doc["grid"]["t0"], dt=doc["grid"]["dt"], n=doc["grid"]["n"])
    labels = tuple(tuple(int(i) for i in lab) for lab in doc["labels"])
    traces = tuple(Trace(grid, vals) for vals in doc["values"])
    return Gather(traces=traces, labels=labels)
