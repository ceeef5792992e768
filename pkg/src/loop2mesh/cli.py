"""Command line interface: train / predict / evaluate / sweep.

Exit codes: 0 success, 2 configuration error, 3 input parse error,
4 training divergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    DegenerateDataError,
    DegenerateDensityError,
    EmptyDatasetError,
    FrameMismatchError,
    InvalidGeometryError,
    InvalidInputError,
    ParseError,
    ShapeMismatchError,
    TrainingDivergedError,
)
from .evaluation import KLRow, evaluate, kl_csv_text, kl_sweep, write_kl_csv
from .fileio import atomic_write_text
from .geometry import PointSet, points_in_polygon, resample_loop
from .ingest import build_dataset, fit_chord, load_manifest, parse_airfoil_dat, parse_msh_nodes
from .losses import LossWeights
from .svg import render_svg
from .train import (
    TrainConfig,
    TrainMode,
    default_interior_weight,
    load_trained,
    predict,
    save_trained,
    train,
)

log = logging.getLogger(__name__)

LOOP_STROKE = "red"
PRED_FILL = "blue"
TRUTH_FILL = "green"


def _comma_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _comma_ints(text: str) -> list[int]:
    vals = _comma_floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data


def _resolve_config(args) -> TrainConfig:
    """Merge defaults <- config file <- command line flags, then validate."""
    raw: dict = {}
    if getattr(args, "config", None):
        raw = _load_config_file(args.config)
    weights = dict(raw.get("weights", {}))
    flag_map = {
        "mode": "mode", "nodes": "n_points", "epochs": "epochs", "seed": "seed",
        "lr": "lr", "h1": "h1", "h2": "h2",
        "loop_size": "loop_size", "upsample_count": "upsample_count",
    }
    for flag, key in flag_map.items():
        val = getattr(args, flag, None)
        if val is not None:
            raw[key] = val
    if getattr(args, "clamp_y", None) is not None:
        vals = _comma_floats(args.clamp_y)
        if len(vals) != 2:
            raise ConfigError(f"--clamp-y expects 'lo,hi', got {args.clamp_y!r}")
        raw["clamp_y"] = vals
    if getattr(args, "ratio", None) is not None:
        weights["repulsion"] = args.ratio
    if getattr(args, "interior_weight", None) is not None:
        weights["interior"] = args.interior_weight
    mode = raw.get("mode", TrainConfig().mode.value)
    if "interior" not in weights:
        try:
            weights["interior"] = default_interior_weight(TrainMode(mode))
        except ValueError:
            raise ConfigError(f"unknown mode {mode!r}; expected one of "
                              f"{[m.value for m in TrainMode]}") from None
    raw["weights"] = weights
    try:
        return TrainConfig.from_dict(raw)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_hashes(manifest_path, entries) -> list[dict]:
    records = [{"path": str(manifest_path), "sha256": _sha256(manifest_path)}]
    for _, dat, msh in entries:
        records.append({"path": str(dat), "sha256": _sha256(dat)})
        records.append({"path": str(msh), "sha256": _sha256(msh)})
    return records


def _write_run_manifest(path, command: str, config: TrainConfig,
                        inputs: list[dict], outputs: dict) -> None:
    doc = {
        "command": command,
        "tool": {"name": "loop2mesh", "version": __version__},
        "seed": config.seed,
        "config": config.to_dict(),
        "inputs": inputs,
        "outputs": outputs,
    }
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _points_csv_text(ps: PointSet) -> str:
    lines = ["x,y"]
    lines += [f"{repr(float(x))},{repr(float(y))}" for x, y in ps.xy]
    return "\n".join(lines) + "\n"


def _read_points_csv(path) -> PointSet:
    rows: list[tuple[float, float]] = []
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    for lineno, record in enumerate(csv.reader(text.splitlines()), start=1):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if lineno == 1 and record[:2] == ["x", "y"]:
            continue
        if len(record) != 2:
            raise ParseError(f"{path}: row {lineno}: expected two fields, got {len(record)}")
        try:
            rows.append((float(record[0]), float(record[1])))
        except ValueError:
            raise ParseError(f"{path}: row {lineno}: non-numeric coordinate {record!r}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return PointSet(np.asarray(rows, dtype=np.float64))


def _parse_viewport(text: str) -> tuple[float, float, float, float]:
    vals = _comma_floats(text)
    if len(vals) != 4:
        raise ConfigError(f"--viewport expects 'xmin,xmax,ymin,ymax', got {text!r}")
    return vals[0], vals[1], vals[2], vals[3]


def _bbox_viewport(*clouds: np.ndarray, pad: float = 0.05) -> tuple[float, float, float, float]:
    allpts = np.vstack(clouds)
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    extent = np.maximum(hi - lo, 1e-9)
    return (float(lo[0] - pad * extent[0]), float(hi[0] + pad * extent[0]),
            float(lo[1] - pad * extent[1]), float(hi[1] + pad * extent[1]))


def _load_entries(args, config: TrainConfig):
    entries = load_manifest(args.manifest)
    holdout = set(getattr(args, "holdout", None) or [])
    if holdout:
        known = {name for name, _, _ in entries}
        missing = holdout - known
        if missing:
            raise ConfigError(f"holdout names not in manifest: {sorted(missing)}")
        entries = [e for e in entries if e[0] not in holdout]
        if not entries:
            raise ConfigError("holdout excludes every sample")
    return entries


# ---------------------------------------------------------------- commands

def cmd_train(args) -> int:
    config = _resolve_config(args)
    entries = _load_entries(args, config)
    out_dir = Path(args.out_dir)
    ckpt_path = out_dir / "checkpoint.l2m"
    log_path = out_dir / "trainlog.csv"
    dataset = build_dataset(entries, loop_size=config.loop_size,
                            target_count=config.upsample_count, seed=config.seed)
    _write_run_manifest(out_dir / "run_manifest.json", "train", config,
                        _input_hashes(args.manifest, entries),
                        {"checkpoint": ckpt_path.name, "trainlog": log_path.name})
    result = train(dataset, config)
    save_trained(ckpt_path, result, config, [s.name for s in dataset.samples])
    result.log.to_csv(log_path)
    last = result.log.records[-1]
    print(f"trained {len(dataset.samples)} sample(s) for {last.epoch} epochs: "
          f"chamfer={last.chamfer:.6g} repulsion={last.repulsion:.6g} "
          f"interior={last.interior:.6g} total={last.total:.6g}")
    print(f"wrote {ckpt_path}")
    print(f"wrote {log_path}")
    return 0


def _prepare_loop(dat_path, config: TrainConfig):
    contour = parse_airfoil_dat(Path(dat_path).read_text())
    chord = fit_chord(contour)
    return resample_loop(chord.apply(contour), config.loop_size), chord


def cmd_predict(args) -> int:
    params, config, samples = load_trained(args.checkpoint)
    loop, chord = _prepare_loop(args.dat, config)
    transform = None
    if config.mode is not TrainMode.RAW:
        by_name = dict(samples)
        if args.sample is not None:
            if args.sample not in by_name:
                raise ConfigError(f"checkpoint has no sample named {args.sample!r}; "
                                  f"knows {sorted(by_name)}")
            transform = by_name[args.sample]
        else:
            transform = samples[0][1]
        if transform is None:
            raise ParseError(f"{args.checkpoint}: missing standardise transform for sample")
    pred = predict(params, transform, loop, config)

    out_dir = Path(args.out_dir)
    csv_path = out_dir / "points.csv"
    svg_path = out_dir / "scatter.svg"
    atomic_write_text(csv_path, _points_csv_text(pred))

    layers = [(pred.xy, PRED_FILL, 2.0)]
    clouds = [pred.xy, loop.vertices]
    if args.truth is not None:
        truth = chord.apply(parse_msh_nodes(Path(args.truth).read_text()))
        layers.insert(0, (truth.xy, TRUTH_FILL, 1.5))
        clouds.append(truth.xy)
    viewport = _parse_viewport(args.viewport) if args.viewport else _bbox_viewport(*clouds)
    render_svg(svg_path, viewport=viewport,
               polylines=[(loop.vertices, LOOP_STROKE, 1.5, True)],
               point_layers=layers)

    interior = int(points_in_polygon(pred.xy, loop).sum())
    print(f"wrote {csv_path} ({len(pred)} points)")
    print(f"wrote {svg_path}")
    print(f"interior: {interior}")
    return 0


def cmd_evaluate(args) -> int:
    if (args.pred is None) == (args.checkpoint is None):
        raise ConfigError("provide exactly one of --pred or --checkpoint")
    ratio = args.ratio
    if args.checkpoint is not None:
        params, config, samples = load_trained(args.checkpoint)
        if args.dat is None:
            raise ConfigError("--checkpoint needs --dat to build the input loop")
        loop, chord = _prepare_loop(args.dat, config)
        transform = samples[0][1] if config.mode is not TrainMode.RAW else None
        if config.mode is not TrainMode.RAW and transform is None:
            raise ParseError(f"{args.checkpoint}: missing standardise transform")
        pred = predict(params, transform, loop, config)
        truth = chord.apply(parse_msh_nodes(Path(args.truth).read_text()))
        if ratio is None:
            ratio = config.weights.repulsion
    else:
        pred = _read_points_csv(args.pred)
        truth = parse_msh_nodes(Path(args.truth).read_text())
        if args.dat is not None:
            chord = fit_chord(parse_airfoil_dat(Path(args.dat).read_text()))
            truth = chord.apply(truth)
        if ratio is None:
            ratio = 0.0

    scores = evaluate(pred, truth, epsilon=args.epsilon, grid=args.grid)
    rows = [KLRow(ratio, "c", len(pred), scores["center"]),
            KLRow(ratio, "w", len(pred), scores["whole"])]
    out_path = Path(args.out) if args.out else Path(args.out_dir) / "kl.csv"
    write_kl_csv(rows, out_path)
    for row in rows:
        print(f"ratio={row.ratio:g} region={row.region} nodes={row.nodes} kl={row.kl:.6f}")
    print(f"wrote {out_path}")
    return 0


def _cell_hash(config: TrainConfig, input_hashes: list[dict]) -> str:
    doc = json.dumps({"config": config.to_dict(),
                      "inputs": [rec["sha256"] for rec in input_hashes]},
                     sort_keys=True)
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()[:16]


def cmd_sweep(args) -> int:
    ratios = _comma_floats(args.ratios)
    node_counts = _comma_ints(args.nodes)
    if not ratios or not node_counts:
        raise ConfigError("sweep needs at least one ratio and one node count")
    args.nodes = None  # per-cell counts; keep them out of the base config
    args.ratio = getattr(args, "ratio", None)
    base = _resolve_config(args)
    entries = _load_entries(args, base)
    out_dir = Path(args.out_dir)
    ckpt_dir = out_dir / "checkpoints"
    panel_dir = out_dir / "panels"
    input_hashes = _input_hashes(args.manifest, entries)

    dataset = build_dataset(entries, loop_size=base.loop_size,
                            target_count=base.upsample_count, seed=base.seed)
    sample = dataset.samples[0]
    predictions: dict[tuple[float, int], PointSet | None] = {}
    failures: list[str] = []
    for ratio in ratios:
        for nodes in node_counts:
            try:
                weights = LossWeights(base.weights.chamfer, ratio,
                                      base.weights.interior, base.weights.epsilon)
                cell_cfg = TrainConfig(mode=base.mode, n_points=nodes, loop_size=base.loop_size,
                                       upsample_count=base.upsample_count, h1=base.h1, h2=base.h2,
                                       weights=weights, clamp_y=base.clamp_y, lr=base.lr,
                                       epochs=base.epochs, seed=base.seed)
                tag = _cell_hash(cell_cfg, input_hashes)
                ckpt_path = ckpt_dir / f"ckpt_{tag}.l2m"
                if ckpt_path.exists():
                    log.info("cell ratio=%g nodes=%d: reusing checkpoint %s", ratio, nodes, ckpt_path.name)
                    params, cfg, samples = load_trained(ckpt_path)
                    transform = samples[0][1]
                else:
                    log.info("cell ratio=%g nodes=%d: training", ratio, nodes)
                    result = train(dataset, cell_cfg)
                    save_trained(ckpt_path, result, cell_cfg,
                                 [s.name for s in dataset.samples])
                    params, cfg = result.params, cell_cfg
                    transform = result.transforms[0] if result.transforms else None
                pred = predict(params, transform, sample.loop, cfg)
            except (ConfigError, ParseError, InvalidInputError, TrainingDivergedError,
                    ShapeMismatchError, DegenerateDataError) as exc:
                failures.append(f"ratio={ratio:g} nodes={nodes}: {exc}")
                log.warning("cell ratio=%g nodes=%d failed: %s", ratio, nodes, exc)
                predictions[(ratio, nodes)] = None
                continue
            predictions[(ratio, nodes)] = pred
            render_svg(panel_dir / f"cell_r{ratio:g}_n{nodes}.svg",
                       viewport=_bbox_viewport(pred.xy, sample.loop.vertices),
                       polylines=[(sample.loop.vertices, LOOP_STROKE, 1.5, True)],
                       point_layers=[(pred.xy, PRED_FILL, 2.0)])

    rows = kl_sweep(predictions, sample.target, epsilon=args.epsilon, grid=args.grid)
    kl_path = out_dir / "kl.csv"
    write_kl_csv(rows, kl_path)
    _write_run_manifest(out_dir / "run_manifest.json", "sweep", base, input_hashes,
                        {"kl": kl_path.name, "checkpoints": ckpt_dir.name, "panels": panel_dir.name})
    sys.stdout.write(kl_csv_text(rows))
    if failures:
        print(f"{len(failures)} cell(s) failed:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
    print(f"wrote {kl_path}")
    return 0


# ---------------------------------------------------------------- parser

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int, help="RNG seed (init + upsampling)")
    p.add_argument("--mode", choices=[m.value for m in TrainMode],
                   help="coordinate handling mode")
    p.add_argument("--ratio", type=float, help="repulsion weight of the composite loss")
    p.add_argument("--epochs", type=int, help="training epochs")
    p.add_argument("--lr", type=float, help="Adam learning rate")
    p.add_argument("--h1", type=int, help="first hidden width")
    p.add_argument("--h2", type=int, help="second hidden width")
    p.add_argument("--interior-weight", type=float, dest="interior_weight",
                   help="interior penalty weight (default: 10, or 0 when clamped)")
    p.add_argument("--clamp-y", dest="clamp_y",
                   help="y clamp interval 'lo,hi' (stand-clamp mode)")
    p.add_argument("--loop-size", type=int, dest="loop_size", help="loop vertex count L")
    p.add_argument("--upsample-count", type=int, dest="upsample_count",
                   help="target cloud size M")
    p.add_argument("--holdout", action="append",
                   help="sample name to exclude from training (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loop2mesh",
                                     description="Generate dense 2D mesh point clouds around airfoil loops.")
    parser.add_argument("--version", action="version", version=f"loop2mesh {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a generator from a dataset manifest")
    p_train.add_argument("manifest", help="JSON manifest of {name, dat, msh} records")
    p_train.add_argument("--out-dir", default="runs/train")
    p_train.add_argument("--nodes", type=int, help="generated point count")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="generate points for an airfoil contour")
    p_pred.add_argument("--checkpoint", required=True)
    p_pred.add_argument("--dat", required=True, help="airfoil .dat contour")
    p_pred.add_argument("--truth", help="optional .msh overlay")
    p_pred.add_argument("--sample", help="sample name whose transform to use")
    p_pred.add_argument("--viewport", help="fixed plot viewport 'xmin,xmax,ymin,ymax'")
    p_pred.add_argument("--out-dir", default="runs/predict")
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="score a prediction against a truth mesh")
    p_eval.add_argument("--pred", help="points CSV (from predict)")
    p_eval.add_argument("--checkpoint", help="checkpoint to predict with (needs --dat)")
    p_eval.add_argument("--dat", help="contour used for chord normalisation")
    p_eval.add_argument("--truth", required=True, help="truth .msh")
    p_eval.add_argument("--ratio", type=float, help="ratio label for the CSV rows")
    p_eval.add_argument("--grid", type=int, default=100)
    p_eval.add_argument("--epsilon", type=float, default=1e-10)
    p_eval.add_argument("--out", help="KL CSV path (default <out-dir>/kl.csv)")
    p_eval.add_argument("--out-dir", default="runs/evaluate")
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="train/evaluate a (ratio x nodes) grid")
    p_sweep.add_argument("manifest")
    p_sweep.add_argument("--ratios", required=True, help="comma list, e.g. 0,1,2,3")
    p_sweep.add_argument("--nodes", required=True, help="comma list of point counts")
    p_sweep.add_argument("--out-dir", default="runs/sweep")
    p_sweep.add_argument("--grid", type=int, default=100)
    p_sweep.add_argument("--epsilon", type=float, default=1e-10)
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FrameMismatchError, ShapeMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, InvalidGeometryError, DegenerateDataError, DegenerateDensityError,
            InvalidInputError, EmptyDatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
