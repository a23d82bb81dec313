"""Command-line interface: ``selfish-ca {run,render,tournament,decode}``.

Every output file records the tool version and the flags that determine its
content. ``--workers`` and output paths are left out of that record because
they cannot change the results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .core import (
    DEFAULT_SEPARATION,
    classify_neighborhood,
    compose,
    decode_elementary,
    evolve,
    sample_mixed_assignment,
    standard_initial,
)
from .metrics import DEFAULT_BLOCK_LENGTH, summarize
from .render import ImageSpec, render_ppm
from .rng import MASK64, SplitMix64, derive_seed
from .tournament import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_SEPARATIONS,
    DEFAULT_STEPS,
    ExperimentPlan,
    default_workers,
    run_tournament,
)

TOOL = "selfish-ca"
CSV_HEADER = (
    "black_rule,grey_rule,sample,separation,seed,steps,outcome,"
    "black_count,grey_count,white_count,row_entropy,block_entropy_k,lz_complexity"
)


# -- argument types ---------------------------------------------------------


def _int_in(lo: int, hi: int | None = None):
    def parse(text: str) -> int:
        try:
            value = int(text, 0)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if value < lo or (hi is not None and value > hi):
            bound = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
            raise argparse.ArgumentTypeError(f"{value} out of range {bound}")
        return value

    parse.__name__ = "integer"
    return parse


rule_number = _int_in(0, 255)
positive = _int_in(1)
non_negative = _int_in(0)
seed_value = _int_in(0, MASK64)


def rule_set(text: str) -> tuple[int, ...]:
    """Parse ``"90,110"`` or ``"0-255"`` or a mix of both."""
    rules: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, _, hi = part.partition("-")
            a, b = rule_number(lo), rule_number(hi)
            if b < a:
                raise argparse.ArgumentTypeError(f"empty rule range {part!r}")
            rules.update(range(a, b + 1))
        else:
            rules.add(rule_number(part))
    if not rules:
        raise argparse.ArgumentTypeError("empty rule set")
    return tuple(sorted(rules))


def int_list(text: str) -> tuple[int, ...]:
    values = tuple(positive(p) for p in text.split(",") if p.strip())
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def tape_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}")
    try:
        start, stop = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}") from None
    if stop <= start:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return start, stop


def _format_rules(rules: tuple[int, ...]) -> str:
    parts, i = [], 0
    while i < len(rules):
        j = i
        while j + 1 < len(rules) and rules[j + 1] == rules[j] + 1:
            j += 1
        parts.append(str(rules[i]) if i == j else f"{rules[i]}-{rules[j]}")
        i = j + 1
    return ",".join(parts)


# -- provenance and file handling ---------------------------------------------


def provenance_flags(args: argparse.Namespace) -> str:
    keys = {
        "run": ("black", "grey", "solo", "steps", "sep", "seed", "sample", "k", "scale", "window"),
        "render": ("black", "grey", "solo", "steps", "sep", "seed", "sample", "scale", "window"),
        "tournament": ("black_rules", "grey_rules", "samples", "steps", "seps", "seed", "k"),
    }[args.command]
    parts = [args.command]
    for key in keys:
        value = getattr(args, key)
        if value is None:
            continue
        if key.endswith("_rules"):
            value = _format_rules(value)
        elif key == "seps":
            value = ",".join(map(str, value))
        elif key == "window":
            value = f"{value[0]}:{value[1]}"
        parts.append(f"--{key.replace('_', '-')} {value}")
    return " ".join(parts)


def provenance(args: argparse.Namespace) -> dict:
    return {"tool": TOOL, "version": __version__, "flags": provenance_flags(args), "master_seed": args.seed}


def _check_writable(path: Path, flag: str) -> None:
    if path.is_dir():
        raise OSError(f"{flag}: {path} is a directory")
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"{flag}: cannot write to directory {parent}")


def _commit(staged: dict[Path, Path]) -> None:
    for tmp, final in staged.items():
        os.replace(tmp, final)


def _discard(staged) -> None:
    for tmp in staged:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass


def _tmp_path(path: Path) -> Path:
    return path.with_name(f".{path.name}.{os.getpid()}.tmp")


# -- commands ---------------------------------------------------------------


def _diagram_and_meta(args: argparse.Namespace):
    black, grey = decode_elementary(args.black), decode_elementary(args.grey)
    seed = derive_seed(args.seed, args.black, args.grey, args.sample)
    mixed = sample_mixed_assignment(SplitMix64(seed))
    rule = compose(black, grey, mixed)
    initial = standard_initial(f"solo-{args.solo}" if args.solo else "interaction", args.sep)
    diagram = evolve(initial, rule, args.steps)
    meta = {
        "black_rule": args.black,
        "grey_rule": args.grey,
        "solo": args.solo,
        "steps": args.steps,
        "separation": None if args.solo else args.sep,
        "seed": args.seed,
        "sample": args.sample,
        "derived_seed": seed,
        "mixed_outcomes": list(mixed.outcomes),
        "zero_overridden": rule.zero_overridden,
    }
    return diagram, meta


def cmd_run(args: argparse.Namespace) -> int:
    out, metrics_path = Path(args.out), Path(args.metrics)
    _check_writable(out, "--out")
    _check_writable(metrics_path, "--metrics")
    diagram, meta = _diagram_and_meta(args)
    image = render_ppm(diagram, ImageSpec(scale=args.scale, window=args.window))
    report = summarize(diagram, args.k, diagram_lz=True)
    doc = {"provenance": provenance(args), "run": meta, "image": _image_meta(image), "metrics": report.to_dict()}
    staged = {_tmp_path(out): out, _tmp_path(metrics_path): metrics_path}
    try:
        tmp_img, tmp_json = list(staged)
        image.save(tmp_img)
        with open(tmp_json, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        _commit(staged)
    finally:
        _discard(staged)
    if image.clipped:
        print(f"warning: live cells lie outside window {image.window}", file=sys.stderr)
    print(f"{out}: {image.width}x{image.height}, outcome {report.outcome.value}")
    return 0


def _image_meta(image) -> dict:
    return {"width": image.width, "height": image.height, "window": list(image.window), "clipped": image.clipped}


def cmd_render(args: argparse.Namespace) -> int:
    out = Path(args.out)
    if args.out != "-":
        _check_writable(out, "--out")
    diagram, _ = _diagram_and_meta(args)
    image = render_ppm(diagram, ImageSpec(scale=args.scale, window=args.window))
    if image.clipped:
        print(f"warning: live cells lie outside window {image.window}", file=sys.stderr)
    if args.out == "-":
        sys.stdout.buffer.write(image.data)
        sys.stdout.buffer.flush()
        return 0
    staged = {_tmp_path(out): out}
    try:
        image.save(next(iter(staged)))
        _commit(staged)
    finally:
        _discard(staged)
    return 0


def _csv_lines(pair) -> list[str]:
    b, g, steps = pair.black_rule, pair.grey_rule, pair.steps
    lines = []
    for s, d, seed, (white, grey, black), rh, bh, lz in zip(
        pair.samples.tolist(),
        pair.separations.tolist(),
        pair.seeds.tolist(),
        pair.counts.tolist(),
        pair.row_entropy.tolist(),
        pair.block_entropy.tolist(),
        pair.lz_complexity.tolist(),
    ):
        if black and grey:
            outcome = "coexist"
        elif black:
            outcome = "black_only"
        elif grey:
            outcome = "grey_only"
        else:
            outcome = "extinct"
        lines.append(f"{b},{g},{s},{d},{seed},{steps},{outcome},{black},{grey},{white},{rh!r},{bh!r},{lz}\n")
    return lines


def cmd_tournament(args: argparse.Namespace) -> int:
    plan = ExperimentPlan(
        black_rules=args.black_rules,
        grey_rules=args.grey_rules,
        samples_per_pair=args.samples,
        steps=args.steps,
        separations=args.seps,
        master_seed=args.seed,
        k=args.k,
    )
    out, summary_path = Path(args.out), Path(args.summary)
    _check_writable(out, "--out")
    _check_writable(summary_path, "--summary")
    partial = out.with_name(out.name + ".partial")
    prov = provenance(args)
    started = time.perf_counter()
    written = 0
    pairs = []
    fh = open(partial, "w", newline="")
    try:
        fh.write(f"# {TOOL} v{__version__} flags: {prov['flags']}\n")
        fh.write(CSV_HEADER + "\n")
        for result in run_tournament(plan, args.workers):
            fh.writelines(_csv_lines(result))
            written += len(result)
            pairs.append(result.summary().to_dict())
            if args.progress and len(pairs) % 256 == 0:
                print(f"{len(pairs)}/{len(plan.pairs)} pairs", file=sys.stderr)
        fh.write(f"# records: {written}\n")
    except BaseException:
        fh.write(f"# PARTIAL: aborted after {written} records\n")
        fh.close()
        raise
    fh.close()
    summary = {
        "provenance": prov,
        "plan": {
            "black_rules": _format_rules(plan.black_rules),
            "grey_rules": _format_rules(plan.grey_rules),
            "samples_per_pair": plan.samples_per_pair,
            "steps": plan.steps,
            "separations": list(plan.separations),
            "master_seed": plan.master_seed,
            "k": plan.k,
        },
        "record_count": written,
        "pairs": pairs,
    }
    staged = {_tmp_path(summary_path): summary_path}
    try:
        with open(next(iter(staged)), "w") as sfh:
            json.dump(summary, sfh)
            sfh.write("\n")
        os.replace(partial, out)
        _commit(staged)
    finally:
        _discard(staged)
    elapsed = time.perf_counter() - started
    print(f"{written} records for {len(pairs)} pairs in {elapsed:.1f}s -> {out}, {summary_path}", file=sys.stderr)
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    black, grey = decode_elementary(args.black), decode_elementary(args.grey)
    seed = derive_seed(args.seed, args.black, args.grey, args.sample)
    rule = compose(black, grey, sample_mixed_assignment(SplitMix64(seed)))
    out = []
    for name, elem in (("black", black), ("grey", grey)):
        entries = " ".join(f"{k >> 2 & 1}{k >> 1 & 1}{k & 1}->{elem.bits[k]}" for k in range(7, -1, -1))
        out.append(f"# {name} rule {elem.number}: {entries}")
    out.append(f"# mixed outcomes from seed {args.seed} sample {args.sample} (stream seed {seed})")
    if rule.zero_overridden:
        out.append("# note: an elementary rule maps 000 to 1; forced to 0 here")
    for nbhd, value in rule.items():
        line = f"{nbhd} -> {value}"
        if classify_neighborhood(nbhd) == "mixed":
            line += f"  [mixed, seed {args.seed}]"
        out.append(line)
    text = "\n".join(out) + "\n"
    sys.stdout.buffer.write(text.encode("utf-8"))
    sys.stdout.buffer.flush()
    return 0


# -- parser -----------------------------------------------------------------


def _add_rule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--black", type=rule_number, default=90, help="black organism rule, Wolfram number")
    p.add_argument("--grey", type=rule_number, default=110, help="grey organism rule, Wolfram number")
    p.add_argument("--seed", type=seed_value, default=DEFAULT_SEED, help="master seed")
    p.add_argument("--sample", type=non_negative, default=0, help="sample index for the contact table")


def _add_evolution_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solo", choices=("black", "grey"), default=None, help="run one organism alone from a single cell; None means an interaction run")
    p.add_argument("--steps", type=non_negative, default=DEFAULT_STEPS, help="time steps")
    p.add_argument("--sep", type=positive, default=DEFAULT_SEPARATION, help="grey seed offset from the black seed")
    p.add_argument("--scale", type=positive, default=1, help="pixels per cell")
    p.add_argument("--window", type=tape_range, default=None, help="tape range START:STOP to draw, e.g. --window=-50:90; None means the light cone")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description="Competing elementary cellular automata on a shared tape.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evolve one run, write a PPM image and a metrics JSON file", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_rule_flags(p)
    _add_evolution_flags(p)
    p.add_argument("--k", type=positive, default=DEFAULT_BLOCK_LENGTH, help="block length for block entropy")
    p.add_argument("--out", default="diagram.ppm", help="PPM output path")
    p.add_argument("--metrics", default="metrics.json", help="metrics JSON output path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("render", help="evolve one run and write only the PPM image", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_rule_flags(p)
    _add_evolution_flags(p)
    p.add_argument("--out", default="diagram.ppm", help="PPM output path, '-' for stdout")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("tournament", help="run every black/grey rule pair and write CSV + summary JSON", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--black-rules", type=rule_set, default="0-255", help="black rules, e.g. 0-255 or 30,90,110")
    p.add_argument("--grey-rules", type=rule_set, default="0-255", help="grey rules, same syntax")
    p.add_argument("--samples", type=positive, default=DEFAULT_SAMPLES, help="random contact tables per pair")
    p.add_argument("--steps", type=positive, default=DEFAULT_STEPS, help="time steps per trial")
    p.add_argument("--seps", type=int_list, default=",".join(map(str, DEFAULT_SEPARATIONS)), help="comma-separated seed separations")
    p.add_argument("--seed", type=seed_value, default=DEFAULT_SEED, help="master seed")
    p.add_argument("--k", type=positive, default=DEFAULT_BLOCK_LENGTH, help="block length for block entropy")
    p.add_argument("--workers", type=positive, default=default_workers(), help="worker processes")
    p.add_argument("--out", default="results.csv", help="per-trial CSV output path")
    p.add_argument("--summary", default="summary.json", help="per-pair summary JSON output path")
    p.add_argument("--progress", action="store_true", help="report progress on stderr")
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("decode", help="print the composed 27-entry rule table", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_rule_flags(p)
    p.set_defaults(func=cmd_decode)
    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "tournament":
        smallest_window = 2 * args.steps + min(args.seps) + 1
        if args.k > smallest_window:
            parser.error(f"argument --k: {args.k} exceeds the smallest analysis window ({smallest_window} cells)")
        if args.k > 39:
            parser.error("argument --k: must be <= 39")
    elif args.command == "run":
        width = 2 * args.steps + (1 if args.solo else args.sep + 1)
        if args.k > width:
            parser.error(f"argument --k: {args.k} exceeds the analysis window ({width} cells)")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
