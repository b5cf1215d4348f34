"""Command-line driver: inpaint, replay, analyze, bench and scene export."""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    chessboard_configs,
    chessboard_csv,
    equivalence_scan,
    parse_sides,
    parse_variants,
)
from .core import ImageFormatError, PatchSpec, load_image, load_mask, mask_image, save_image, synthesize
from .engine import (
    DeadlockError,
    EmptyTrainingSetError,
    EngineConfig,
    inpaint_rgb,
    write_commit_csv,
    write_energy_csv,
)
from .scenes import load_scene, scene_names

log = logging.getLogger("fdinpaint")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_DEADLOCK = 3


class UsageError(ValueError):
    pass


# -- small parsers -------------------------------------------------------------

def parse_rect(text: str) -> tuple[int, int, int, int]:
    """``x,y,w,h`` with x the column and y the row of the top-left corner."""
    try:
        x, y, w, h = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,w,h integers, got {text!r}") from None
    if w <= 0 or h <= 0 or x < 0 or y < 0:
        raise argparse.ArgumentTypeError(f"rectangle {text!r} needs x,y >= 0 and w,h > 0")
    return x, y, w, h


def parse_pixel(text: str) -> tuple[int, int]:
    try:
        r, c = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected row,col integers, got {text!r}") from None
    return r, c


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_pixels(data: np.ndarray) -> str:
    """Hash of shape, dtype and samples, independent of the file encoding."""
    arr = np.ascontiguousarray(data)
    h = hashlib.sha256(f"{arr.shape}|{arr.dtype.str}|".encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# -- manifests -----------------------------------------------------------------

def _writable(path) -> Path:
    """``path`` as a Path, with its parent directory created."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_manifest(path, entries: dict) -> Path:
    path = _writable(path)
    lines = [f"{k}={v}" for k, v in entries.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_manifest(path) -> dict:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _flag(value: str) -> bool:
    return value.lower() in ("1", "true", "yes")


def config_entries(cfg: EngineConfig) -> dict:
    return {
        "patch_side": cfg.patch_side,
        "order": cfg.order,
        "max_scans": cfg.max_scans,
        "rel_tol": repr(cfg.rel_tol),
        "initial_fill_value": cfg.initial_fill_value,
        "invert_energy_priority": cfg.invert_energy_priority,
        "propagation": cfg.propagation,
        "content_only": cfg.content_only,
        "tset_rects": ";".join(",".join(str(v) for v in r) for r in cfg.tset_rects),
    }


# -- inpaint -------------------------------------------------------------------

def _build_config(args, shape) -> EngineConfig:
    try:
        spec = PatchSpec.from_side(args.patch_side)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    region = None
    if args.tset_mask:
        region = load_mask(args.tset_mask, shape).omega
    return EngineConfig(
        half_width=spec.half_width,
        order=args.order,
        max_scans=args.max_scans,
        rel_tol=args.rel_tol,
        initial_fill_value=args.initial_fill,
        invert_energy_priority=args.invert_energy_priority,
        propagation=not args.no_propagation,
        content_only=args.content_only,
        tset_rects=tuple(args.tset_rect or ()),
        tset_region=region,
    )


def run_inpaint(args) -> dict:
    """Run one inpainting job and write its outputs; returns the manifest entries."""
    t0 = time.perf_counter()
    img = load_image(args.image)
    mask = load_mask(args.mask, img.shape[:2])
    cfg = _build_config(args, img.shape[:2])
    out_path = Path(args.out) if args.out else Path(args.image).with_name(Path(args.image).stem + "_inpainted.png")
    result, traces = inpaint_rgb(img, mask, cfg, luma_only=args.luma_only)
    save_image(result, _writable(out_path))
    wall = time.perf_counter() - t0

    entries = {
        "tool": "fdinpaint",
        "version": __version__,
        "command": "inpaint",
        "image": str(Path(args.image).resolve()),
        "image_sha256": sha256_file(args.image),
        "mask": str(Path(args.mask).resolve()),
        "mask_sha256": sha256_file(args.mask),
        "tset_mask": str(Path(args.tset_mask).resolve()) if args.tset_mask else "",
        "tset_mask_sha256": sha256_file(args.tset_mask) if args.tset_mask else "",
        "luma_only": args.luma_only,
    }
    entries.update(config_entries(cfg))
    entries["out"] = str(out_path.resolve())
    entries["out_pixels_sha256"] = sha256_pixels(result.data)
    entries["scans"] = ",".join(str(t.scans) for t in traces)
    if args.energy_csv:
        text = _energy_text(traces)
        _writable(args.energy_csv).write_text(text)
        entries["energy_csv"] = str(Path(args.energy_csv).resolve())
        entries["energy_csv_sha256"] = sha256_text(text)
    if args.commit_csv:
        _writable(args.commit_csv).write_text("".join(write_commit_csv(t) for t in traces))
        entries["commit_csv"] = str(Path(args.commit_csv).resolve())
    if args.figure:
        from .plotting import plot_energy_trend, plot_panels

        fig = Path(args.figure)
        curves = {(f"channel {n}" if len(traces) > 1 else "run"): t.scan_energies for n, t in enumerate(traces)}
        plot_energy_trend(curves, fig)
        holed = img.to_array()
        holed[mask.omega] = 0
        panels_path = fig.with_name(fig.stem + "_panels" + fig.suffix)
        plot_panels({"input": holed, "result": result.data}, panels_path, img.maxval)
        entries["figure"] = str(fig.resolve())
        entries["figure_panels"] = str(panels_path.resolve())
    entries["wall_time_s"] = f"{wall:.3f}"
    manifest = Path(args.manifest) if args.manifest else out_path.with_name(out_path.name + ".manifest")
    write_manifest(manifest, entries)
    entries["manifest"] = str(manifest)
    return entries


def _energy_text(traces) -> str:
    if len(traces) == 1:
        return write_energy_csv(traces[0])
    # one column per channel, padded with the channel's final value
    scans = max(t.scans for t in traces)
    lines = ["scan," + ",".join(f"total_e_t_c{n}" for n in range(len(traces)))]
    for s in range(scans):
        vals = [repr(float(t.scan_energies[min(s, t.scans - 1)])) for t in traces]
        lines.append(f"{s + 1}," + ",".join(vals))
    return "\n".join(lines) + "\n"


def cmd_inpaint(args) -> int:
    entries = run_inpaint(args)
    print(f"wrote {entries['out']} ({entries['scans']} scans, {entries['wall_time_s']} s)")
    print(f"manifest {entries['manifest']}")
    return EXIT_OK


def cmd_replay(args) -> int:
    m = read_manifest(args.manifest)
    if m.get("command") != "inpaint":
        raise UsageError("manifest does not describe an inpaint run")
    for key in ("image", "mask", "tset_mask"):
        if m.get(key) and sha256_file(m[key]) != m[f"{key}_sha256"]:
            print(f"input {m[key]} has changed since the manifest was written", file=sys.stderr)
            return EXIT_MISMATCH
    rects = [parse_rect(r) for r in m.get("tset_rects", "").split(";") if r]
    out = args.out or m["out"]
    ns = argparse.Namespace(
        image=m["image"], mask=m["mask"], tset_rect=rects, tset_mask=m.get("tset_mask") or None,
        patch_side=int(m["patch_side"]), order=int(m["order"]), max_scans=int(m["max_scans"]),
        rel_tol=float(m["rel_tol"]), initial_fill=int(m["initial_fill_value"]),
        invert_energy_priority=_flag(m["invert_energy_priority"]),
        no_propagation=not _flag(m["propagation"]), content_only=_flag(m["content_only"]),
        luma_only=_flag(m.get("luma_only", "false")), out=out,
        energy_csv=(args.energy_csv or m.get("energy_csv")) if m.get("energy_csv") else None,
        commit_csv=None, figure=None,
        manifest=args.new_manifest or str(Path(out).with_name(Path(out).name + ".replay.manifest")),
    )
    entries = run_inpaint(ns)
    same = entries["out_pixels_sha256"] == m["out_pixels_sha256"]
    if "energy_csv_sha256" in m:
        same = same and entries.get("energy_csv_sha256") == m["energy_csv_sha256"]
    print(("reproduced" if same else "MISMATCH") + f": {entries['out']}")
    return EXIT_OK if same else EXIT_MISMATCH


# -- analyze -------------------------------------------------------------------

def _emit(text: str, out) -> None:
    if out:
        _writable(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_equivalence(args) -> int:
    try:
        sides = parse_sides(args.sides)
        variants = parse_variants(args.variants)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.scene:
        scene = load_scene(args.scene)
        img, probe = scene.image, args.probe or scene.probe
    elif args.image:
        img, probe = load_image(args.image), args.probe
    else:
        raise UsageError("give --image or --scene")
    if img.channels != 1:
        raise UsageError("equivalence analysis needs a grayscale image")
    if probe is None:
        probe = (img.height // 2, img.width // 2)
    report = equivalence_scan(img, probe, sides, variants)
    _emit(report.to_csv(), args.out)
    if args.figure:
        from .plotting import plot_equivalence

        plot_equivalence(report, args.figure)
    return EXIT_OK


def cmd_chessboard(args) -> int:
    size = args.size
    board = synthesize("chessboard", (size, size), cell=args.cell)
    missing = args.missing or (size // 2 - 1, size // 2 - 1)
    configs = chessboard_configs(board, missing)
    _emit(chessboard_csv(configs, args.cell, missing), args.out)
    return EXIT_OK


# -- bench / scenes ------------------------------------------------------------

def cmd_bench(args) -> int:
    if args.list:
        for name in scene_names():
            print(f"{name:14s} {load_scene(name).description}")
        return EXIT_OK
    if not args.scenario:
        raise UsageError("give --scenario NAME or --list")
    if args.scenario not in scene_names():
        raise UsageError(f"unknown scenario {args.scenario!r}; try --list")
    scene = load_scene(args.scenario)
    spec = PatchSpec.from_side(args.patch_side)
    cfg = EngineConfig(half_width=spec.half_width, order=args.order, max_scans=args.max_scans,
                       content_only=args.content_only)
    print(f"scenario {scene.name}: {scene.image.height}x{scene.image.width}, "
          f"{int(scene.missing.sum())} missing pixels")
    print("run  scans  commits  seconds  commits/s  final_e_t")
    for run in range(1, args.repeat + 1):
        t0 = time.perf_counter()
        _, traces = inpaint_rgb(scene.image, scene.mask, cfg)
        dt = time.perf_counter() - t0
        trace = traces[0]
        n = len(trace.commits)
        print(f"{run:3d}  {trace.scans:5d}  {n:7d}  {dt:7.3f}  {n / dt:9.1f}  {trace.scan_energies[-1]:.6g}")
    return EXIT_OK


def cmd_scene(args) -> int:
    if args.name not in scene_names():
        raise UsageError(f"unknown scene {args.name!r}; choose from {', '.join(scene_names())}")
    scene = load_scene(args.name)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [save_image(scene.image, out / f"{scene.name}.png"),
             save_image(mask_image(scene.mask), out / f"{scene.name}_mask.png")]
    for p in paths:
        print(p)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdinpaint", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("inpaint", help="fill the masked region of an image")
    q.add_argument("--image", required=True, help="input PGM or PNG")
    q.add_argument("--mask", required=True, help="mask image, nonzero = missing")
    q.add_argument("--tset-rect", type=parse_rect, action="append", metavar="X,Y,W,H",
                   help="restrict source windows to this rectangle (repeatable)")
    q.add_argument("--tset-mask", help="restrict source windows to the nonzero area of this image")
    q.add_argument("--patch-side", type=int, default=3, help="odd window side (default 3)")
    q.add_argument("--order", type=int, default=1, choices=(1, 2, 3), help="highest difference order")
    q.add_argument("--max-scans", type=int, default=10)
    q.add_argument("--rel-tol", type=float, default=1e-4, help="stop when energy drops by less")
    q.add_argument("--initial-fill", type=int, default=0, help="value placed in the hole before filling")
    q.add_argument("--out", help="output image (default: <image>_inpainted.png)")
    q.add_argument("--energy-csv", help="write scan,total_e_t rows here")
    q.add_argument("--commit-csv", help="write one row per committed pixel here")
    q.add_argument("--manifest", help="manifest path (default: <out>.manifest)")
    q.add_argument("--figure", help="energy trend figure; a _panels image is written beside it")
    q.add_argument("--invert-energy-priority", action="store_true",
                   help="rank well-matched pixels first")
    q.add_argument("--no-propagation", action="store_true",
                   help="keep confidence of known pixels fixed at 1")
    q.add_argument("--content-only", action="store_true", help="match on pixel values alone")
    q.add_argument("--luma-only", action="store_true", help="match RGB images on luma once")
    q.set_defaults(func=cmd_inpaint)

    q = sub.add_parser("replay", help="re-run a manifest and check the output matches")
    q.add_argument("manifest")
    q.add_argument("--out", help="write the replayed image here instead of the recorded path")
    q.add_argument("--energy-csv", help="write the replayed energy rows here")
    q.add_argument("--new-manifest", help="manifest for the replayed run")
    q.set_defaults(func=cmd_replay)

    q = sub.add_parser("analyze", help="tie counting and chessboard configurations")
    asub = q.add_subparsers(dest="analysis", required=True)
    e = asub.add_parser("equivalence", help="tied candidates against support side")
    e.add_argument("--image", help="grayscale image")
    e.add_argument("--scene", help="bundled scene instead of --image")
    e.add_argument("--probe", type=parse_pixel, metavar="ROW,COL", help="pixel treated as missing")
    e.add_argument("--sides", default="3:21:2", help="start:stop:step (inclusive) or a list")
    e.add_argument("--variants", default="ec,ec+s1", help="comma list of ec, ec+s1, ec+s2, ec+s3; all share the candidate pool "
                        "of the highest order listed")
    e.add_argument("--out", help="CSV path (default stdout)")
    e.add_argument("--figure", help="ties and trustability figure")
    e.set_defaults(func=cmd_equivalence)
    c = asub.add_parser("chessboard", help="the nine placements of a missing pixel in a 3x3 window")
    c.add_argument("--cell", type=int, default=5)
    c.add_argument("--size", type=int, default=50)
    c.add_argument("--missing", type=parse_pixel, metavar="ROW,COL",
                   help="missing pixel (default: the corner just above-left of the centre)")
    c.add_argument("--out", help="CSV path (default stdout)")
    c.set_defaults(func=cmd_chessboard)

    q = sub.add_parser("bench", help="time a bundled scene")
    q.add_argument("--scenario")
    q.add_argument("--list", action="store_true")
    q.add_argument("--repeat", type=int, default=1)
    q.add_argument("--patch-side", type=int, default=3)
    q.add_argument("--order", type=int, default=1, choices=(1, 2, 3))
    q.add_argument("--max-scans", type=int, default=10)
    q.add_argument("--content-only", action="store_true")
    q.set_defaults(func=cmd_bench)

    q = sub.add_parser("scene", help="write a bundled scene and its mask as PNG files")
    q.add_argument("name")
    q.add_argument("--out-dir", default=".")
    q.set_defaults(func=cmd_scene)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DeadlockError as exc:
        print(f"fdinpaint: deadlock: {exc} ({exc.missing} pixels still missing)", file=sys.stderr)
        return EXIT_DEADLOCK
    except (UsageError, EmptyTrainingSetError, ImageFormatError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"fdinpaint: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
