"""Three-layer fully connected generator with exact analytic backprop.

The network flattens an L-vertex boundary loop into a 2L vector
(x0, y0, x1, y1, ...), passes it through two ReLU hidden layers, and emits
2N outputs reshaped to N generated points. Optional output clamping of the
y coordinates acts as a hard gate: clamped coordinates pass zero gradient.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ParseError, ShapeMismatchError
from .fileio import atomic_write_bytes
from .geometry import PointSet

_ARRAY_ORDER = ("w1", "b1", "w2", "b2", "w3", "b3")
_CHECKPOINT_FORMAT = "loop2mesh-checkpoint"
_CHECKPOINT_VERSION = 1


@dataclass
class NetworkParams:
    """Weights/biases; layer l computes ``w_l @ x + b_l`` on column vectors."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        for name in _ARRAY_ORDER:
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            setattr(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"parameter {name} contains non-finite entries")
        if self.w1.ndim != 2 or self.w2.ndim != 2 or self.w3.ndim != 2:
            raise ShapeMismatchError("weight matrices must be 2-D")
        if self.w1.shape[1] % 2 or self.w3.shape[0] % 2:
            raise ShapeMismatchError("input and output widths must be even (2 per point)")
        ok = (self.b1.shape == (self.w1.shape[0],)
              and self.w2.shape[1] == self.w1.shape[0]
              and self.b2.shape == (self.w2.shape[0],)
              and self.w3.shape[1] == self.w2.shape[0]
              and self.b3.shape == (self.w3.shape[0],))
        if not ok:
            raise ShapeMismatchError("parameter shapes are mutually inconsistent")

    @property
    def loop_size(self) -> int:
        return self.w1.shape[1] // 2

    @property
    def h1(self) -> int:
        return self.w1.shape[0]

    @property
    def h2(self) -> int:
        return self.w2.shape[0]

    @property
    def n_points(self) -> int:
        return self.w3.shape[0] // 2

    def arrays(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(self, name)) for name in _ARRAY_ORDER]

    def copy(self) -> "NetworkParams":
        return NetworkParams(*(getattr(self, n).copy() for n in _ARRAY_ORDER))


def init_params(seed: int, loop_size: int, h1: int, h2: int, n_points: int) -> NetworkParams:
    """Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.

    Draw order is fixed (w1, w2, w3) so a seed fully determines the result.
    """
    if min(loop_size, h1, h2, n_points) < 1:
        raise InvalidInputError("all layer sizes must be positive")
    rng = np.random.default_rng(seed)

    def xavier(fan_out: int, fan_in: int) -> np.ndarray:
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    w1 = xavier(h1, 2 * loop_size)
    w2 = xavier(h2, h1)
    w3 = xavier(2 * n_points, h2)
    return NetworkParams(w1, np.zeros(h1), w2, np.zeros(h2), w3, np.zeros(2 * n_points))


@dataclass(frozen=True)
class ForwardTrace:
    """Intermediate activations captured before clamping, plus the clamp gate."""

    x: np.ndarray       # flattened input (2L,)
    z1: np.ndarray
    a1: np.ndarray
    z2: np.ndarray
    a2: np.ndarray
    output: np.ndarray  # raw pre-clamp output (2N,)
    gate: np.ndarray    # 1.0 where gradient flows, 0.0 at clamped coordinates


def forward(params: NetworkParams, loop: PointSet,
            y_clamp: tuple[float, float] | None = None) -> tuple[PointSet, ForwardTrace]:
    """Run the generator on an L-point loop; prediction inherits the loop's frame.

    With ``y_clamp=(lo, hi)`` the y outputs are clipped after the trace is
    captured; coordinates at or beyond the bounds get a zero gradient gate.
    """
    if len(loop) != params.loop_size:
        raise ShapeMismatchError(f"loop has {len(loop)} points, network expects {params.loop_size}")
    x = loop.xy.reshape(-1)
    z1 = params.w1 @ x + params.b1
    a1 = np.maximum(z1, 0.0)
    z2 = params.w2 @ a1 + params.b2
    a2 = np.maximum(z2, 0.0)
    out = params.w3 @ a2 + params.b3
    gate = np.ones_like(out)
    final = out
    if y_clamp is not None:
        lo, hi = float(y_clamp[0]), float(y_clamp[1])
        if not lo <= hi:
            raise InvalidInputError(f"empty clamp range {y_clamp}")
        final = out.copy()
        ys = out[1::2]
        final[1::2] = np.clip(ys, lo, hi)
        gate[1::2] = ((ys > lo) & (ys < hi)).astype(np.float64)
    trace = ForwardTrace(x, z1, a1, z2, a2, out, gate)
    return PointSet(final.reshape(-1, 2), loop.frame), trace


@dataclass
class ParamGrads:
    """Gradient arrays mirroring NetworkParams."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    @classmethod
    def zeros_like(cls, params: NetworkParams) -> "ParamGrads":
        return cls(*(np.zeros_like(getattr(params, n)) for n in _ARRAY_ORDER))

    def arrays(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(self, name)) for name in _ARRAY_ORDER]

    def accumulate(self, other: "ParamGrads") -> None:
        for name in _ARRAY_ORDER:
            getattr(self, name).__iadd__(getattr(other, name))

    def scale(self, factor: float) -> None:
        for name in _ARRAY_ORDER:
            getattr(self, name).__imul__(factor)


def backward(params: NetworkParams, trace: ForwardTrace, d_output: np.ndarray) -> ParamGrads:
    """Exact gradients of a scalar loss given d(loss)/d(raw output).

    ReLU passes gradient only where its pre-activation is strictly positive;
    the clamp gate zeroes the cotangent of clamped output coordinates.
    """
    d_output = np.asarray(d_output, dtype=np.float64)
    if d_output.shape != trace.output.shape:
        raise ShapeMismatchError(
            f"cotangent shape {d_output.shape} does not match output {trace.output.shape}")
    g3 = d_output * trace.gate
    gw3 = np.outer(g3, trace.a2)
    gb3 = g3.copy()
    da2 = params.w3.T @ g3
    dz2 = da2 * (trace.z2 > 0.0)
    gw2 = np.outer(dz2, trace.a1)
    gb2 = dz2
    da1 = params.w2.T @ dz2
    dz1 = da1 * (trace.z1 > 0.0)
    gw1 = np.outer(dz1, trace.x)
    gb1 = dz1
    return ParamGrads(gw1, gb1, gw2, gb2, gw3, gb3)


def save_checkpoint(path, params: NetworkParams, meta: dict | None = None) -> None:
    """Write a versioned single-file checkpoint.

    Layout: one sorted-keys JSON header line (format, version, shapes, meta),
    then the raw little-endian float64 bytes of each array in fixed order.
    Identical params + meta always produce identical bytes.
    """
    header = {
        "format": _CHECKPOINT_FORMAT,
        "version": _CHECKPOINT_VERSION,
        "dtype": "<f8",
        "shapes": {name: list(arr.shape) for name, arr in params.arrays()},
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    blob += b"".join(np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, arr in params.arrays())
    atomic_write_bytes(path, blob)


def load_checkpoint(path) -> tuple[NetworkParams, dict]:
    """Read a checkpoint written by save_checkpoint; round-trips bit-exactly."""
    blob = open(path, "rb").read()
    nl = blob.find(b"\n")
    if nl < 0:
        raise ParseError(f"{path}: not a checkpoint (missing header line)")
    try:
        header = json.loads(blob[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: invalid checkpoint header: {exc}") from exc
    if header.get("format") != _CHECKPOINT_FORMAT:
        raise ParseError(f"{path}: unrecognised checkpoint format")
    if header.get("version") != _CHECKPOINT_VERSION:
        raise ParseError(f"{path}: unsupported checkpoint version {header.get('version')!r}")
    offset = nl + 1
    arrays = {}
    for name in _ARRAY_ORDER:
        if name not in header["shapes"]:
            raise ParseError(f"{path}: checkpoint header missing array {name!r}")
        shape = tuple(header["shapes"][name])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(blob):
            raise ParseError(f"{path}: checkpoint truncated in array {name!r}")
        arrays[name] = np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
    if offset != len(blob):
        raise ParseError(f"{path}: {len(blob) - offset} trailing bytes after parameter arrays")
    return NetworkParams(**arrays), header["meta"]
