#!/usr/bin/env python3
"""Generate a small synthetic airfoil dataset (contours + fluid meshes).

Writes <out>/naca<code>.dat, <out>/naca<code>.msh per code plus manifest.json
suitable for `loop2mesh train <out>/manifest.json`.
"""

import argparse
from pathlib import Path

from loop2mesh.synth import write_sample_dataset


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path, help="output directory")
    ap.add_argument("--codes", default="2220", help="comma list of 4-digit sections")
    ap.add_argument("--contour-points", type=int, default=121)
    ap.add_argument("--mesh-nodes", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    manifest = write_sample_dataset(
        args.out_dir,
        codes=tuple(args.codes.split(",")),
        contour_points=args.contour_points,
        mesh_nodes=args.mesh_nodes,
        seed=args.seed,
    )
    print(f"wrote {manifest}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
