"""Command-line interface: segment, synth, eval, serve.

``segment`` drives the engine in-process and writes the final polygon, the
filled mask, the optimization trace (JSON lines), and a summary; with a
ground-truth mask it also reports the Jaccard distance.  ``synth`` writes
synthetic image/mask pairs, ``eval`` scores a mask against a truth mask, and
``serve`` runs the HTTP session service.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .imaging import load_grayscale
from .optimize import OptimizerConfig
from .sessions import SegmentationSession, circle_points
from .subdivision import ControlPolygon, scheme_from_name
from .synth import (
    blob_mask,
    compose_image,
    disc_mask,
    ellipse_mask,
    jaccard_distance,
    load_mask_png,
    save_gray_png,
    save_mask_png,
)


def _floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"{what} needs {n} comma-separated values, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{what}: {exc}") from exc


def _parse_alpha(text: str) -> tuple[str, float | None]:
    if text == "two-phase":
        return "two-phase", None
    if text.startswith("fixed:"):
        try:
            v = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad fixed blend value in {text!r}") from exc
        if not (0.0 <= v <= 1.0):
            raise argparse.ArgumentTypeError(f"blend value must be in [0, 1], got {v}")
        return "fixed", v
    raise argparse.ArgumentTypeError(f"--alpha must be 'two-phase' or 'fixed:V', got {text!r}")


def _load_points(path: str) -> np.ndarray:
    with open(path) as f:
        data = json.load(f)
    pts = data["points"] if isinstance(data, dict) else data
    arr = np.asarray(pts, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{path}: expected [[row, col], ...], got shape {arr.shape}")
    return arr


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subdivseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image with a subdivision snake")
    seg.add_argument("--image", required=True, help="input raster image")
    seg.add_argument("--scheme", choices=["four-point", "cubic-bspline"], default="four-point")
    seg.add_argument("--omega", type=float, default=None, help="four-point tension weight")
    init = seg.add_mutually_exclusive_group(required=True)
    init.add_argument("--init", metavar="FILE", help="JSON points the initial curve passes through")
    init.add_argument(
        "--init-circle",
        metavar="ROW,COL,RADIUS,N",
        help="circle initialization: center row,col, radius, point count",
    )
    seg.add_argument("--alpha", type=_parse_alpha, default=("two-phase", None), help="'two-phase' or 'fixed:V'")
    seg.add_argument("--depth", type=int, default=4, help="subdivision depth for sampling")
    seg.add_argument("--box", metavar="R0,R1,C0,C1", default=None, help="region box (1-based, inclusive)")
    seg.add_argument("--polarity", choices=["dark", "bright"], default="dark", help="object vs background")
    seg.add_argument("--q", type=int, default=None, help="derivative filter half-width")
    seg.add_argument("--max-iters", type=int, default=200)
    seg.add_argument("--truth", default=None, help="ground-truth mask PNG to score against")
    seg.add_argument("--out", required=True, help="output directory")

    syn = sub.add_parser("synth", help="write a synthetic image and ground-truth mask")
    syn.add_argument("--shape", choices=["disc", "ellipse", "blob"], required=True)
    syn.add_argument("--dims", required=True, metavar="ROWS,COLS")
    syn.add_argument("--center", default=None, metavar="ROW,COL")
    syn.add_argument("--radius", type=float, default=None, help="disc radius")
    syn.add_argument("--radii", default=None, metavar="A,B", help="ellipse semi-axes (row, col)")
    syn.add_argument("--polygon", default=None, help="control-point JSON for a blob")
    syn.add_argument("--scheme", choices=["four-point", "cubic-bspline"], default="four-point")
    syn.add_argument("--fg", type=float, default=30.0)
    syn.add_argument("--bg", type=float, default=220.0)
    syn.add_argument("--out-image", required=True)
    syn.add_argument("--out-mask", required=True)

    ev = sub.add_parser("eval", help="Jaccard distance between two mask PNGs")
    ev.add_argument("--mask", required=True)
    ev.add_argument("--truth", required=True)

    srv = sub.add_parser("serve", help="run the HTTP session service")
    srv.add_argument("--bind", default="127.0.0.1:8000", metavar="HOST:PORT")
    return parser


def _cmd_segment(args) -> int:
    intensity = load_grayscale(args.image)
    if args.init is not None:
        points = _load_points(args.init)
    else:
        row, col, radius, n = _floats(args.init_circle, 4, "--init-circle")
        points = circle_points(row, col, radius, int(n))
    mode, value = args.alpha
    config = OptimizerConfig(
        alpha_mode=mode,
        alpha_fixed=value if value is not None else 0.5,
        max_iters=args.max_iters,
    )
    box = None
    if args.box is not None:
        box = tuple(int(v) for v in _floats(args.box, 4, "--box"))
    session = SegmentationSession(
        intensity,
        points,
        scheme=args.scheme,
        omega=args.omega,
        depth=args.depth,
        box=box,
        polarity=args.polarity,
        q=args.q,
        config=config,
    )
    state = session.run()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "polygon.json").write_text(json.dumps(state["polygon"], indent=2) + "\n")
    with open(out / "trace.jsonl", "w") as f:
        for rec in session.trace:
            f.write(json.dumps(rec) + "\n")
    mask = session.result_mask()
    save_mask_png(out / "mask.png", mask)

    summary = {
        "status": state["status"],
        "iters": state["iters"],
        "alpha": state["alpha"],
        "energies": state["energies"],
        "area": state["area"],
    }
    if args.truth is not None:
        summary["jaccard"] = jaccard_distance(mask, load_mask_png(args.truth))
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return 0


def _cmd_synth(args) -> int:
    rows, cols = (int(v) for v in _floats(args.dims, 2, "--dims"))
    shape = (rows, cols)
    center = (
        tuple(_floats(args.center, 2, "--center"))
        if args.center is not None
        else ((1 + rows) / 2.0, (1 + cols) / 2.0)
    )
    if args.shape == "disc":
        if args.radius is None:
            raise ValueError("--shape disc needs --radius")
        r = args.radius
        if not (1 <= center[0] - r and center[0] + r <= rows and 1 <= center[1] - r and center[1] + r <= cols):
            raise ValueError(f"disc radius {r} at {center} does not fit in {shape}")
        mask = disc_mask(shape, center, r)
    elif args.shape == "ellipse":
        if args.radii is None:
            raise ValueError("--shape ellipse needs --radii")
        a, b = _floats(args.radii, 2, "--radii")
        if not (1 <= center[0] - a and center[0] + a <= rows and 1 <= center[1] - b and center[1] + b <= cols):
            raise ValueError(f"ellipse radii ({a},{b}) at {center} do not fit in {shape}")
        mask = ellipse_mask(shape, center, a, b)
    else:
        if args.polygon is None:
            raise ValueError("--shape blob needs --polygon FILE")
        pts = _load_points(args.polygon)
        if pts[:, 0].min() < 1 or pts[:, 0].max() > rows or pts[:, 1].min() < 1 or pts[:, 1].max() > cols:
            raise ValueError(f"blob control points leave the {shape} canvas")
        mask = blob_mask(ControlPolygon(pts, scheme_from_name(args.scheme)), shape)
    save_gray_png(args.out_image, compose_image(mask, args.fg, args.bg))
    save_mask_png(args.out_mask, mask)
    print(json.dumps({"pixels": int(mask.sum()), "rows": rows, "cols": cols}))
    return 0


def _cmd_eval(args) -> int:
    j = jaccard_distance(load_mask_png(args.mask), load_mask_png(args.truth))
    print(json.dumps({"jaccard": j}))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"--bind must be HOST:PORT, got {args.bind!r}")
    uvicorn.run(create_app(), host=host, port=int(port))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "segment": _cmd_segment,
        "synth": _cmd_synth,
        "eval": _cmd_eval,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, IOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
