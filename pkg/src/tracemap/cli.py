"""Command line entry point.

    tracemap FOLDER [options]        analyse a folder of traceroute files
    tracemap run FOLDER [options]    same, explicit form
    tracemap gen OUT_DIR [options]   write a synthetic corpus
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import geodb
from .clean import Reason
from .pathmap import Direction
from .pipeline import EXIT_CONFIG, RunConfig, default_jobs, run
from .render import BadColor, RenderConfig
from .tracegen import REUNION_LEAVING, GenSpec, generate


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def run_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tracemap", description="Clean, geolocate and map a folder of traceroute results.")
    p.add_argument("folder", type=Path, help="folder of traceroute files (searched recursively)")
    p.add_argument("--out", type=Path, default=Path("tracemap_out"), help="output directory (default: %(default)s)")
    p.add_argument("--geo-prefixes", type=Path, default=geodb.SAMPLE_PREFIXES, help="CSV of prefix,country rows")
    p.add_argument("--geo-points", type=Path, default=geodb.SAMPLE_POINTS, help="CSV of country,x,y rows")
    p.add_argument("--map", type=Path, default=geodb.SAMPLE_MAP, help="base map PNG")
    p.add_argument("--adjacency", type=Path, help="CSV of physically connected country pairs")
    p.add_argument("--focus", help="country code whose first exits / last entries are mapped")
    p.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.LEAVING.value)
    p.add_argument("--redraw", action="store_true", help="link thickness proportional to its use")
    p.add_argument("--color", default="blue", help="HTML color name or #RRGGBB for plain links")
    p.add_argument("--mpls-color", default="red", help="color for explicit MPLS links")
    p.add_argument("--invisible-color", default="orange", help="color for invisible-MPLS candidates")
    p.add_argument("--min-width", type=_positive, default=1)
    p.add_argument("--max-width", type=_positive, default=12)
    p.add_argument("--format", choices=["png", "svg"], default="png")
    p.add_argument("--jobs", type=_positive, default=default_jobs(), help="worker processes (default: %(default)s)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def gen_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tracemap gen", description="Write a seeded synthetic traceroute corpus.")
    p.add_argument("out_dir", type=Path)
    p.add_argument("--spec", type=Path, help="JSON file with GenSpec fields (flags below override it)")
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["json", "plain", "mixed"])
    p.add_argument("--path", action="append", default=[], metavar="CC,CC,...:WEIGHT", help="country path and weight")
    p.add_argument("--defect", action="append", default=[], metavar="REASON=RATE")
    p.add_argument("--rtt", action="append", default=[], metavar="CC-CC=BASE[:JITTER]")
    p.add_argument("--mpls-pair", action="append", default=[], metavar="CC-CC")
    p.add_argument("--exact", action="store_true", help="allocate paths and defects exactly instead of sampling")
    return p


def _parse_path(text):
    seq, _, weight = text.rpartition(":")
    if not seq:
        seq, weight = text, "1"
    return tuple(c.strip().upper() for c in seq.split(",")), float(weight)


def _parse_rtt(text):
    pair, _, value = text.partition("=")
    a, b = pair.upper().split("-")
    base, _, jitter = value.partition(":")
    return (a, b), (float(base), float(jitter or 0))


def build_genspec(args) -> GenSpec:
    fields = {}
    if args.spec:
        fields = json.loads(args.spec.read_text())
        fields["rtt_model"] = {tuple(k.split("-")): tuple(v) for k, v in fields.get("rtt_model", {}).items()}
        for key in ("hops_per_country", "inter_rtt", "intra_rtt"):
            if key in fields:
                fields[key] = tuple(fields[key])
    if args.count is not None:
        fields["trace_count"] = args.count
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.format:
        fields["format"] = args.format
    if args.path:
        fields["country_path_distribution"] = [_parse_path(p) for p in args.path]
    if args.defect:
        rates = dict(fields.get("defect_rates", {}))
        for d in args.defect:
            name, _, rate = d.partition("=")
            rates[Reason(name)] = float(rate)
        fields["defect_rates"] = rates
    if args.rtt:
        model = dict(fields.get("rtt_model", {}))
        model.update(_parse_rtt(r) for r in args.rtt)
        fields["rtt_model"] = model
    if args.mpls_pair:
        fields["mpls_pairs"] = [tuple(p.upper().split("-")) for p in args.mpls_pair]
    if args.exact:
        fields["allocation"] = "exact"
    fields.setdefault("trace_count", 100)
    fields.setdefault("country_path_distribution", REUNION_LEAVING)
    return GenSpec(**fields)


def main_gen(argv) -> int:
    args = gen_parser().parse_args(argv)
    try:
        spec = build_genspec(args)
        records = generate(spec, args.out_dir)
    except (ValueError, KeyError, OSError) as e:
        print(f"tracemap gen: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {len(records)} files to {args.out_dir}")
    return 0


def main_run(argv) -> int:
    args = run_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="tracemap: %(message)s")
    try:
        render = RenderConfig(
            base_map=args.map,
            line_color=args.color,
            mpls_explicit_color=args.mpls_color,
            mpls_invisible_color=args.invisible_color,
            proportional=args.redraw,
            min_thickness_px=args.min_width,
            max_thickness_px=args.max_width,
            output_format=args.format,
        )
    except (BadColor, ValueError) as e:
        print(f"tracemap: {e}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = RunConfig(
        input_folder=args.folder,
        output_dir=args.out,
        prefix_file=args.geo_prefixes,
        points_file=args.geo_points,
        adjacency_file=args.adjacency,
        focus_country=args.focus.upper() if args.focus else None,
        direction=Direction(args.direction),
        render=render,
        worker_count=args.jobs,
    )
    return run(cfg)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "gen":
        return main_gen(argv[1:])
    if argv and argv[0] == "run":
        argv = argv[1:]
    return main_run(argv)


if __name__ == "__main__":
    sys.exit(main())
