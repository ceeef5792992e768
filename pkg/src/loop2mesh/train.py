"""Training orchestration.

Full-batch Adam on the generator under the composite objective, with three
coordinate-handling modes:

raw          train directly on chord-normalised coordinates.
stand        per-sample standardisation fitted on the ground-truth mesh and
             applied to both loop and mesh.
stand-clamp  as ``stand``, plus hard clamping of predicted y coordinates.

A full run is a pure function of (dataset, config): logs, parameters and
checkpoints are bit-reproducible.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidInputError, ParseError, ShapeMismatchError, TrainingDivergedError
from .fileio import atomic_write_text
from .geometry import (
    AirfoilLoop,
    Frame,
    PointSet,
    StandardizeTransform,
    apply_standardize,
    fit_standardize,
    invert_standardize,
    standardize_loop,
)
from .ingest import Dataset
from .losses import LossWeights, composite, mean_pairwise_distance
from .net import NetworkParams, ParamGrads, backward, forward, init_params, load_checkpoint, save_checkpoint


class TrainMode(enum.Enum):
    RAW = "raw"
    STANDARDISED = "stand"
    STANDARDISED_CLAMPED = "stand-clamp"


def default_interior_weight(mode: TrainMode) -> float:
    """10 when containment relies on the penalty, 0 once clamping confines y."""
    return 0.0 if mode is TrainMode.STANDARDISED_CLAMPED else 10.0


@dataclass(frozen=True)
class TrainConfig:
    mode: TrainMode = TrainMode.RAW
    n_points: int = 400
    loop_size: int = 35
    upsample_count: int = 1500
    h1: int = 256
    h2: int = 512
    weights: LossWeights = field(default_factory=LossWeights)
    clamp_y: tuple[float, float] = (-1.0, 1.0)
    lr: float = 1e-3
    epochs: int = 5000
    seed: int = 0

    def validate(self) -> None:
        if not isinstance(self.mode, TrainMode):
            raise ConfigError(f"mode must be one of {[m.value for m in TrainMode]}")
        for name in ("n_points", "loop_size", "upsample_count", "h1", "h2", "epochs"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.loop_size < 3:
            raise ConfigError(f"loop_size must be at least 3, got {self.loop_size}")
        if not (math.isfinite(self.lr) and self.lr > 0.0):
            raise ConfigError(f"lr must be positive, got {self.lr}")
        lo, hi = self.clamp_y
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ConfigError(f"clamp_y must be a non-empty interval, got {self.clamp_y}")
        if not isinstance(self.weights, LossWeights):
            raise ConfigError("weights must be a LossWeights instance")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "n_points": self.n_points,
            "loop_size": self.loop_size,
            "upsample_count": self.upsample_count,
            "h1": self.h1,
            "h2": self.h2,
            "weights": self.weights.to_dict(),
            "clamp_y": [self.clamp_y[0], self.clamp_y[1]],
            "lr": self.lr,
            "epochs": self.epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {"mode", "n_points", "loop_size", "upsample_count", "h1", "h2",
                 "weights", "clamp_y", "lr", "epochs", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw: dict = {}
        if "mode" in d:
            try:
                kw["mode"] = TrainMode(d["mode"])
            except ValueError:
                raise ConfigError(f"unknown mode {d['mode']!r}; expected one of "
                                  f"{[m.value for m in TrainMode]}") from None
        for name in ("n_points", "loop_size", "upsample_count", "h1", "h2", "epochs", "seed"):
            if name in d:
                kw[name] = int(d[name])
        if "lr" in d:
            kw["lr"] = float(d["lr"])
        if "clamp_y" in d:
            lo, hi = d["clamp_y"]
            kw["clamp_y"] = (float(lo), float(hi))
        if "weights" in d:
            try:
                kw["weights"] = LossWeights.from_dict(d["weights"])
            except InvalidInputError as exc:
                raise ConfigError(str(exc)) from exc
        cfg = cls(**kw)
        cfg.validate()
        return cfg


@dataclass
class AdamState:
    """First/second moment accumulators, aligned with NetworkParams.arrays()."""

    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def zeros(cls, params: NetworkParams) -> "AdamState":
        return cls([np.zeros_like(a) for _, a in params.arrays()],
                   [np.zeros_like(a) for _, a in params.arrays()])


def adam_step(params: NetworkParams, grads: ParamGrads, state: AdamState, *,
              lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8, t: int = 1) -> tuple[NetworkParams, AdamState]:
    """One bias-corrected Adam update (t is the 1-based step count).

    Parameters and state are updated in place and returned.
    """
    if t < 1:
        raise InvalidInputError(f"step count t must be >= 1, got {t}")
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for (_, p), (_, g), m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        if g.shape != p.shape:
            raise ShapeMismatchError("gradient shape does not match parameter shape")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params, state


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    chamfer: float
    repulsion: float
    interior: float
    total: float
    mean_pairwise: float


@dataclass(frozen=True)
class TrainLog:
    records: tuple[EpochRecord, ...]

    CSV_HEADER = ("epoch", "chamfer", "repulsion", "interior", "total", "mean_pairwise_distance")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        for r in self.records:
            writer.writerow([r.epoch, repr(r.chamfer), repr(r.repulsion),
                             repr(r.interior), repr(r.total), repr(r.mean_pairwise)])
        return buf.getvalue()

    def to_csv(self, path) -> None:
        atomic_write_text(path, self.to_csv_text())


@dataclass
class TrainResult:
    params: NetworkParams
    transforms: Optional[list[StandardizeTransform]]  # one per sample; None in raw mode
    log: TrainLog


def train(dataset: Dataset, config: TrainConfig) -> TrainResult:
    """Train the generator on a dataset; deterministic given (dataset, config).

    Gradients are averaged over samples each epoch (full batch, one Adam step
    per epoch). A non-finite epoch total aborts with the offending epoch.
    """
    config.validate()
    if config.loop_size != dataset.loop_size:
        raise ConfigError(f"config loop_size {config.loop_size} != dataset loop size {dataset.loop_size}")
    params = init_params(config.seed, config.loop_size, config.h1, config.h2, config.n_points)
    state = AdamState.zeros(params)
    standardise = config.mode is not TrainMode.RAW
    clamp = config.clamp_y if config.mode is TrainMode.STANDARDISED_CLAMPED else None

    inputs: list[PointSet] = []
    refs: list[PointSet] = []
    polys: list[AirfoilLoop] = []
    transforms: list[StandardizeTransform] = []
    for s in dataset.samples:
        if standardise:
            t = fit_standardize(s.target)
            transforms.append(t)
            inputs.append(apply_standardize(t, s.loop.as_pointset()))
            refs.append(apply_standardize(t, s.target))
            polys.append(standardize_loop(t, s.loop))
        else:
            inputs.append(s.loop.as_pointset())
            refs.append(s.target)
            polys.append(s.loop)

    n_samples = len(dataset.samples)
    records: list[EpochRecord] = []
    for epoch in range(1, config.epochs + 1):
        acc = ParamGrads.zeros_like(params)
        sums = np.zeros(5)  # chamfer, repulsion, interior, total, mean pairwise
        for inp, ref, poly in zip(inputs, refs, polys):
            try:
                pred, trace = forward(params, inp, y_clamp=clamp)
            except InvalidInputError as exc:
                # the only non-finite source here is numeric blow-up
                raise TrainingDivergedError(
                    epoch, f"non-finite network output at epoch {epoch}") from exc
            bd = composite(pred, ref, poly, config.weights)
            acc.accumulate(backward(params, trace, bd.grad.reshape(-1)))
            sums += (bd.chamfer, bd.repulsion, bd.interior, bd.total,
                     mean_pairwise_distance(pred.xy))
        sums /= n_samples
        record = EpochRecord(epoch, *map(float, sums))
        if not math.isfinite(record.total):
            raise TrainingDivergedError(epoch, f"total loss became non-finite at epoch {epoch}")
        acc.scale(1.0 / n_samples)
        adam_step(params, acc, state, lr=config.lr, t=epoch)
        records.append(record)
    return TrainResult(params, transforms if standardise else None, TrainLog(tuple(records)))


def predict(params: NetworkParams, transform: StandardizeTransform | None,
            loop: AirfoilLoop, config: TrainConfig) -> PointSet:
    """Generate a cloud for a loop and map it back to original coordinates."""
    if params.n_points != config.n_points or params.loop_size != config.loop_size:
        raise ShapeMismatchError("checkpoint dimensions do not match the configuration")
    if loop.frame is not Frame.ORIGINAL:
        raise InvalidInputError("predict expects a loop in original coordinates")
    if config.mode is TrainMode.RAW:
        if transform is not None:
            raise InvalidInputError("raw mode takes no standardise transform")
        inp = loop.as_pointset()
        clamp = None
    else:
        if transform is None:
            raise InvalidInputError("standardised modes require the sample's transform")
        inp = apply_standardize(transform, loop.as_pointset())
        clamp = config.clamp_y if config.mode is TrainMode.STANDARDISED_CLAMPED else None
    pred, _ = forward(params, inp, y_clamp=clamp)
    if transform is not None:
        pred = invert_standardize(transform, pred)
    return pred


def save_trained(path, result: TrainResult, config: TrainConfig, sample_names: list[str]) -> None:
    """Checkpoint the trained parameters plus config and per-sample transforms."""
    transforms = result.transforms or [None] * len(sample_names)
    meta = {
        "config": config.to_dict(),
        "samples": [{"name": name, "transform": (t.to_dict() if t is not None else None)}
                    for name, t in zip(sample_names, transforms)],
    }
    save_checkpoint(path, result.params, meta)


def load_trained(path) -> tuple[NetworkParams, TrainConfig, list[tuple[str, StandardizeTransform | None]]]:
    params, meta = load_checkpoint(path)
    try:
        config = TrainConfig.from_dict(meta["config"])
        samples = [(str(rec["name"]),
                    StandardizeTransform.from_dict(rec["transform"]) if rec["transform"] else None)
                   for rec in meta["samples"]]
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        raise ParseError(f"{path}: invalid checkpoint metadata: {exc}") from exc
    if params.n_points != config.n_points or params.loop_size != config.loop_size:
        raise ParseError(f"{path}: checkpoint arrays disagree with its stored config")
    return params, config, samples
