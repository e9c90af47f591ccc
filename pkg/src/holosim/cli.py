"""Command-line interface.

Subcommands: ``simulate`` (scene file to full artifact set), ``propagate``
(move a dumped field between planes), ``mvs-design`` (projector feasibility
numbers) and ``sweep`` (focus curve plus per-slice correlation table).

Exit codes: 0 success, 1 pipeline failure, 2 usage or option errors.  All
units are SI (meters, radians).  ``HOLOSIM_THREADS`` sets the default worker
count; ``--threads 1`` forces the fully serial reference ordering (results
are identical either way, only wall time changes).
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import HolosimError
from . import pipeline
from .scene_io import load_scene_config, read_field

__all__ = ["main", "build_parser"]


def _default_threads() -> int:
    raw = os.environ.get("HOLOSIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parse_window(text: str) -> tuple[float, float, float, float]:
    parts = text.split(":")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("window must be cx:cy:w:h in meters")
    try:
        cx, cy, w, h = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad window value: {exc}") from exc
    return cx, cy, w, h


def _parse_screen(text: str) -> tuple[float, float]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("screen must be WxH in meters, e.g. 1.0x1.0")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad screen size: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holosim",
        description="Scalar-diffraction simulator: scanned volumetric projector "
        "plus live transmission-hologram screen.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the full pipeline on a scene file")
    sim.add_argument("--scene", required=True, help="scene file path")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=0, help="diffuse-phase seed")
    sim.add_argument("--dump-fields", action="store_true", help="also write field dumps")
    sim.add_argument("--threads", type=int, default=None, help="worker threads")
    sim.add_argument("--zmin", type=float, default=None, help="sweep start (m)")
    sim.add_argument("--zmax", type=float, default=None, help="sweep end (m)")
    sim.add_argument("--steps", type=int, default=41, help="sweep plane count")
    sim.add_argument(
        "--wavelengths",
        default=None,
        help="comma-separated wavelength override (m)",
    )
    sim.add_argument(
        "--window",
        type=_parse_window,
        default=None,
        help="viewing window cx:cy:w:h (m) for power-capture reporting",
    )
    sim.add_argument("-v", "--verbose", action="store_true")

    prop = sub.add_parser("propagate", help="propagate a dumped field")
    prop.add_argument("--in", dest="input", required=True, help="field dump path")
    prop.add_argument("--dz", type=float, required=True, help="signed distance (m)")
    prop.add_argument("--method", choices=("as", "fresnel"), default="as")
    prop.add_argument("--out", required=True, help="output directory")
    prop.add_argument("--pad-factor", type=int, choices=(1, 2, 4), default=2)
    prop.add_argument("--no-band-limit", action="store_true")

    design = sub.add_parser("mvs-design", help="projector design feasibility numbers")
    design.add_argument("--focal", type=float, required=True, help="focal length (m)")
    design.add_argument("--znear", type=float, required=True, help="nearest depth (m)")
    design.add_argument("--zfar", type=float, required=True, help="farthest depth (m)")
    design.add_argument("--screen", type=_parse_screen, required=True, help="WxH (m)")
    design.add_argument("--watch", type=float, required=True, help="watch distance (m)")
    design.add_argument("--out", default=None, help="optional output directory")

    sweep = sub.add_parser("sweep", help="focus curve and per-slice correlation")
    sweep.add_argument("--scene", required=True)
    sweep.add_argument("--zmin", type=float, required=True)
    sweep.add_argument("--zmax", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--threads", type=int, default=None)

    return parser


def _cmd_simulate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if (args.zmin is None) != (args.zmax is None):
        parser.error("--zmin and --zmax must be given together")
    if args.zmin is not None and not 0 < args.zmin < args.zmax:
        parser.error("need 0 < zmin < zmax")
    if args.steps < 2:
        parser.error("--steps must be at least 2")
    wavelengths = None
    if args.wavelengths is not None:
        try:
            wavelengths = tuple(float(t) for t in args.wavelengths.split(",") if t)
        except ValueError:
            parser.error("--wavelengths must be comma-separated numbers")
        if not wavelengths or any(w <= 0 for w in wavelengths):
            parser.error("--wavelengths must be positive numbers")

    config = load_scene_config(args.scene)
    z_sweep = (args.zmin, args.zmax) if args.zmin is not None else None
    results = pipeline.run_simulation(
        config,
        args.out,
        seed=args.seed,
        z_sweep=z_sweep,
        steps=args.steps,
        dump_fields=args.dump_fields,
        threads=args.threads if args.threads else _default_threads(),
        wavelengths=wavelengths,
        window=args.window,
        verbose=args.verbose,
    )
    for r in results:
        print(
            f"wavelength {r.wavelength:g} m: focus z={r.report.focus_depth:g} m "
            f"xy=({r.report.focus_xy[0]:g}, {r.report.focus_xy[1]:g}) m "
            f"peak/mean={r.report.peak_to_mean:.4g} -> {r.report_path}"
        )
    return 0


def _cmd_propagate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.method == "fresnel" and args.dz == 0.0:
        parser.error("fresnel propagation needs a nonzero --dz")
    field = read_field(args.input)
    moved = pipeline.run_propagate(
        field,
        args.dz,
        args.method,
        args.out,
        pad_factor=args.pad_factor,
        band_limit=not args.no_band_limit,
    )
    print(
        f"propagated {args.input} by {args.dz:g} m ({args.method}); "
        f"output pitch {moved.pitch:g} m, plane_z {moved.plane_z:g} m"
    )
    return 0


def _cmd_mvs_design(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    design = pipeline.run_mvs_design(
        args.focal, args.znear, args.zfar, args.screen, args.watch, args.out
    )
    for key, value in design.items():
        print(f"{key} = {value}")
    return 0


def _cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not 0 < args.zmin < args.zmax:
        parser.error("need 0 < zmin < zmax (empty or reversed depth range)")
    if args.steps < 2:
        parser.error("--steps must be at least 2")
    config = load_scene_config(args.scene)
    scan, rows = pipeline.run_sweep(
        config,
        args.out,
        (args.zmin, args.zmax),
        args.steps,
        seed=args.seed,
        threads=args.threads if args.threads else _default_threads(),
    )
    print(f"best focus z={scan.z:g} m peak={scan.peak:g}")
    for index, depth, z_recon, score in rows:
        print(f"slice {index}: depth={depth:g} m, recon at {z_recon:g} m, ncc={score:.4f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "propagate": _cmd_propagate,
        "mvs-design": _cmd_mvs_design,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args, parser)
    except pipeline.StageFailure as exc:
        print(f"holosim {args.command}: {exc}", file=sys.stderr)
        return 1
    except (HolosimError, OSError, ValueError) as exc:
        print(f"holosim {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
