"""Command-line surface: analyze | embed | extract | verify | sweep.

Exit codes: 0 success, 1 usage, 2 infeasible payload, 3 solver failure,
4 I/O or format trouble.  Worker count for sweeps is capped by the
SCALESTEG_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from .channel_analysis import build_embed_plan, compute_dpi, design_params, verify_plan
from .errors import CapacityError, FormatError, KeyMismatchError, SolverError
from .pipeline import (
    COST_VARIANTS,
    RunConfig,
    assemble_costs,
    embed_message,
    extract_message,
    verify_roundtrip,
)
from .pixelgrid import load_image, save_image
from .resampler import ChannelSpec
from .stego_codec import StcCode

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3, 4

SWEEP_SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _channel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--channel", choices=["nearest", "bilinear", "bicubic"], required=True)
    p.add_argument("--antialias", action="store_true", help="anti-aliasing kernel variant")
    p.add_argument("--sf", required=True, help="scaling factor in (0,1], e.g. 0.5 or 1/2")
    p.add_argument("--bicubic-a", type=float, default=-0.5,
                   help="bicubic kernel parameter (default -0.5; OpenCV uses -0.75)")


def _spec_from(args) -> ChannelSpec:
    return ChannelSpec(args.channel, args.antialias, Fraction(args.sf), args.bicubic_a)


def _config_from(args) -> RunConfig:
    return RunConfig(
        channel=_spec_from(args),
        payload=getattr(args, "payload", 0.0) or 0.0,
        cost=getattr(args, "cost", "hill-pro"),
        override_s=getattr(args, "interval", None),
        seed=getattr(args, "seed", 0),
    )


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="scalesteg",
                 description="robust image steganography across scaling channels")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="channel geometry report for a cover")
    p.add_argument("image")
    _channel_args(p)
    p.add_argument("--interval", type=int, help="override sampling interval")
    p.add_argument("--costs", choices=COST_VARIANTS, help="also dump per-site costs")
    p.add_argument("--plan", help="dump the full site-level plan JSON here")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("embed", help="embed a message file into a proxy stego")
    p.add_argument("cover")
    p.add_argument("message")
    _channel_args(p)
    p.add_argument("--cost", choices=COST_VARIANTS, default="hill-pro")
    p.add_argument("--interval", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--key", required=True, help="write the stego key JSON here")
    p.add_argument("--out", required=True, help="proxy stego output (.pgm/.png)")
    p.add_argument("--emit-delta", help="also dump the sparse delta as JSON")

    p = sub.add_parser("extract", help="recover the message from a scaled stego")
    p.add_argument("scaled_stego")
    p.add_argument("--key", required=True)
    p.add_argument("--out", help="write message bytes here (default stdout)")

    p = sub.add_parser("verify", help="embed, resize through the real channel, extract")
    p.add_argument("cover")
    _channel_args(p)
    p.add_argument("--payload", type=float, default=0.05,
                   help="bits per pre-scaled-image pixel")
    p.add_argument("--cost", choices=COST_VARIANTS, default="hill-pro")
    p.add_argument("--interval", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("sweep", help="grid of verify runs over an image directory")
    p.add_argument("cover_dir")
    p.add_argument("--channels", default="nearest,bilinear,bicubic,aa-bilinear,aa-bicubic",
                   help="comma list; prefix aa- selects anti-aliasing")
    p.add_argument("--sfs", default="0.3,0.5,0.7")
    p.add_argument("--payload", type=float, default=0.02)
    p.add_argument("--costs", default="hill-pro", help="comma list of cost variants")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    return ap


def _cmd_analyze(args) -> int:
    img = load_image(args.image)
    spec = _spec_from(args)
    params = design_params(spec)
    plan = build_embed_plan(img, spec, args.interval)
    diag = verify_plan(plan)
    dpi = compute_dpi(spec, plan.cover_dims, [tuple(x) for x in plan.lattice_coords()])
    hist = {int(k): int(v) for k, v in zip(*np.unique(dpi, return_counts=True))}
    bounds = {}
    for site in plan.sites:
        for b, wet in ((site.bound_plus, site.wet_plus), (site.bound_minus, site.wet_minus)):
            if not wet:
                bounds[b] = bounds.get(b, 0) + 1
    report = {
        "channel": spec.to_json_obj(),
        "design_params": {
            "p": params.p, "s": params.s, "n_target": params.n_target,
            "rate_bound_bits_per_scaled_pixel": params.rate_bound,
            "reference_rate_label": params.rate_label,
        },
        "cover_dims": list(plan.cover_dims),
        "scaled_dims": list(plan.scaled_dims),
        "sites": plan.n_sites,
        "wet_plus": diag.wet_plus,
        "wet_minus": diag.wet_minus,
        "wet_both": diag.wet_both,
        "capacity_bits": plan.capacity_bits,
        "dpi_histogram": hist,
        "bound_histogram": bounds,
        "plan_ok": diag.ok,
    }
    if args.costs:
        report["costs"] = assemble_costs(plan, img, args.costs).to_json_obj()
    if args.plan:
        Path(args.plan).write_text(json.dumps(plan.to_json_obj()))
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def _cmd_embed(args) -> int:
    cover = load_image(args.cover)
    message = Path(args.message).read_bytes()
    spec = _spec_from(args)
    res = embed_message(cover, spec, message, args.cost, args.interval,
                        StcCode(), args.seed)
    save_image(res.proxy_stego, args.out)
    Path(args.key).write_text(json.dumps(res.key, indent=1))
    if args.emit_delta:
        Path(args.emit_delta).write_text(json.dumps(res.delta.to_json_obj()))
    plan = res.plan
    scaled_px = plan.scaled_dims[0] * plan.scaled_dims[1]
    print(f"capacity_bits={plan.capacity_bits} used_bits={res.used_bits} "
          f"payload_y={res.used_bits / scaled_px:.5f}bpp "
          f"l1={res.l1_distortion} changed_pixels={res.changed_pixels} "
          f"wet_retries={res.wet_retries}")
    return EXIT_OK


def _cmd_extract(args) -> int:
    stego = load_image(args.scaled_stego)
    key = json.loads(Path(args.key).read_text())
    message = extract_message(stego, key)
    if args.out:
        Path(args.out).write_bytes(message)
    else:
        sys.stdout.buffer.write(message)
    return EXIT_OK


def _cmd_verify(args) -> int:
    cover = load_image(args.cover)
    report = verify_roundtrip(cover, _config_from(args))
    text = json.dumps(report.to_json_obj(), indent=1)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK if report.recovered else EXIT_SOLVER


_CHANNEL_NAMES = {
    "nearest": ("nearest", False),
    "bilinear": ("bilinear", False),
    "bicubic": ("bicubic", False),
    "aa-bilinear": ("bilinear", True),
    "aa-bicubic": ("bicubic", True),
}

_SWEEP_FIELDS = [
    "schema_version", "image", "channel", "antialias", "sf", "cost", "payload",
    "seed", "recovered", "capacity_bits", "used_bits", "l1", "changed_pixels",
    "wet_sites", "runtime_s",
]


def _cmd_sweep(args) -> int:
    images = sorted(
        p for p in Path(args.cover_dir).iterdir()
        if p.suffix.lower() in (".pgm", ".png")
    )
    if not images:
        print(f"no input images under {args.cover_dir}", file=sys.stderr)
        return EXIT_IO
    jobs = []
    for img in images:
        for ch in args.channels.split(","):
            family, aa = _CHANNEL_NAMES[ch.strip()]
            for sfs in args.sfs.split(","):
                if family == "nearest" and aa:
                    continue
                for cost in args.costs.split(","):
                    jobs.append((img, family, aa, sfs.strip(), cost.strip()))

    def run(job):
        img, family, aa, sfs, cost = job
        row = {
            "schema_version": SWEEP_SCHEMA_VERSION,
            "image": img.name,
            "channel": family,
            "antialias": int(aa),
            "sf": sfs,
            "cost": cost,
            "payload": args.payload,
            "seed": args.seed,
        }
        import time
        t0 = time.perf_counter()
        try:
            cfg = RunConfig(ChannelSpec(family, aa, Fraction(sfs)),
                            payload=args.payload, cost=cost, seed=args.seed)
            rep = verify_roundtrip(load_image(str(img)), cfg)
            row.update(recovered=int(rep.recovered), capacity_bits=rep.capacity_bits,
                       used_bits=rep.used_bits, l1=rep.l1_distortion,
                       changed_pixels=rep.changed_pixels, wet_sites=rep.wet_sites)
        except Exception as exc:  # per-image failures recorded, sweep continues
            row.update(recovered=0, capacity_bits=-1, used_bits=-1, l1=-1,
                       changed_pixels=-1, wet_sites=-1)
            row["image"] = f"{img.name} [ERROR {type(exc).__name__}: {exc}]"
        row["runtime_s"] = round(time.perf_counter() - t0, 3)
        return row

    workers = int(os.environ.get("SCALESTEG_THREADS", "0")) or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(run, jobs))
    rows.sort(key=lambda r: (r["image"], r["channel"], r["antialias"], r["sf"], r["cost"]))
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_SWEEP_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    ok = sum(r["recovered"] == 1 for r in rows)
    print(f"{ok}/{len(rows)} runs recovered; wrote {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "analyze": _cmd_analyze,
        "embed": _cmd_embed,
        "extract": _cmd_extract,
        "verify": _cmd_verify,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except CapacityError as exc:
        print(f"infeasible payload: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except KeyMismatchError as exc:
        print(f"extraction failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (FormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
