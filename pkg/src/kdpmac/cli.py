"""Command-line entry point.

Exit codes: 0 success, 1 verification or scenario mismatch, 2 usage or
input error, 3 key generation failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import example
from .family import FamilyError, format_index_set, format_sset_table, parse_sizes, parse_sset_table
from .hierarchy import HierarchyError, format_hierarchy, load_hierarchy, parse_hierarchy
from .keyderive import (
    DEFAULT_KEY_LEN,
    MaterialError,
    Rule,
    ZeroKeyCollision,
    delta_set,
    format_key_matrix,
    is_zero_key,
    parse_key_matrix,
)
from .provisioning import BundleError, bundle_filename, make_bundles, read_bundle, write_bundle
from .scheme import build_scheme
from .simulator import ScenarioError, all_pairs_scenario, parse_scenario, run_scenario
from .verifier import policy_matrix, random_instance_check, verify_scheme

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_GENERATION = 0, 1, 2, 3

HIERARCHY_FILE = "hierarchy.txt"
SSETS_FILE = "ssets.txt"
KEYS_FILE = "keys.txt"
BUNDLE_DIR = "bundles"


class InputError(Exception):
    pass


def _load_hierarchy(ref: str):
    if ref == "fig1":
        return parse_hierarchy(example.fig1_text())
    return load_hierarchy(ref)


def _seed(text: str) -> bytes:
    try:
        seed = bytes.fromhex(text)
    except ValueError:
        raise InputError(f"seed must be hex, got {text!r}") from None
    if not seed:
        raise InputError("seed must be nonempty")
    return seed


def cmd_gen(args: argparse.Namespace) -> int:
    h = _load_hierarchy(args.hierarchy)
    sizes = parse_sizes(args.sizes, h.user_count) if args.sizes else None
    material = None
    key_len = args.key_len
    if args.material == "paper":
        if key_len not in (None, 1):
            raise InputError("the fixed example material has 1-byte elements")
        key_len = 1
        material = example.material()
    elif key_len is None:
        key_len = DEFAULT_KEY_LEN
    scheme = build_scheme(h, sizes, key_len, _seed(args.seed), Rule(args.rule), material)

    out = Path(args.out)
    (out / BUNDLE_DIR).mkdir(parents=True, exist_ok=True)
    (out / HIERARCHY_FILE).write_text(format_hierarchy(h), encoding="utf-8")
    (out / SSETS_FILE).write_text(format_sset_table(scheme.family, scheme.ssets), encoding="utf-8")
    (out / KEYS_FILE).write_text(format_key_matrix(scheme.matrix), encoding="utf-8")
    bundles = make_bundles(h, scheme.family, scheme.ssets, scheme.material, scheme.matrix)
    for b in bundles:
        write_bundle(b, out / BUNDLE_DIR / bundle_filename(b.user))

    print(f"material_size {scheme.material_size}")
    print(f"sset_size_total {scheme.ssets.total_size()}")
    print(f"nonzero_keys {len(scheme.matrix.nonzero_pairs())}")
    if scheme.retries:
        print(f"reseeded {scheme.retries}")
    return EXIT_OK


def _load_state(out: str):
    d = Path(out)
    h = load_hierarchy(d / HIERARCHY_FILE)
    family, ssets = parse_sset_table((d / SSETS_FILE).read_text(encoding="utf-8"))
    km = parse_key_matrix((d / KEYS_FILE).read_text(encoding="utf-8"))
    if not (h.user_count == ssets.user_count == km.user_count):
        raise InputError("state files disagree on the number of users")
    return h, family, ssets, km


def cmd_key(args: argparse.Namespace) -> int:
    h, _, ssets, km = _load_state(args.out)
    for uid in (args.i, args.j):
        if not 1 <= uid <= h.user_count:
            raise InputError(f"user id {uid} out of range 1..{h.user_count}")
    delta = delta_set(ssets, args.i, args.j, km.rule)
    key = km.key(args.i, args.j)
    print(f"delta {format_index_set(delta)}")
    print(f"key {key.hex()}")
    if is_zero_key(key):
        print("forbidden")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.trials is not None:
        agg = random_instance_check(
            args.m_max, args.trials, int.from_bytes(_seed(args.seed), "big"), args.shape, Rule(args.rule)
        )
        text = agg.format()
        ok = agg.all_passed
    elif args.paper:
        scheme = build_scheme(example.fig1_hierarchy(), example.SIZES, 1, material=example.material())
        report = verify_scheme(
            scheme.matrix,
            policy_matrix(scheme.hierarchy),
            scheme.material_size,
            scheme.ssets,
            example.errata(scheme.matrix, scheme.ssets),
        )
        text, ok = report.format(), report.policy_match
    elif args.out:
        h, family, ssets, km = _load_state(args.out)
        report = verify_scheme(km, policy_matrix(h), family.ground_size, ssets)
        text, ok = report.format(), report.policy_match
    else:
        raise InputError("verify needs --out, --trials or --paper")
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_simulate(args: argparse.Namespace) -> int:
    h, _, ssets, km = _load_state(args.out)
    bundles = [read_bundle(Path(args.out) / BUNDLE_DIR / bundle_filename(u)) for u in h.users]
    if args.scenario:
        steps = parse_scenario(Path(args.scenario).read_text(encoding="utf-8"))
    else:
        steps = all_pairs_scenario(h)
    transcript = run_scenario(bundles, ssets, steps, km.rule)
    sys.stdout.write(transcript.format())
    return EXIT_OK if transcript.passed else EXIT_MISMATCH


def cmd_paper_example(args: argparse.Namespace) -> int:
    h = example.fig1_hierarchy()
    scheme = build_scheme(h, example.SIZES, 1, material=example.material(), rule=Rule(args.rule))
    m = h.user_count
    out = ["[material]"]
    out += [f"k{x} = {bits}" for x, bits in enumerate(example.MATERIAL_BITS, start=1)]
    out.append("[blocks]")
    out += [f"D{u} = {{{format_index_set(scheme.family.block(u))}}}" for u in h.users]
    out.append("[ssets]")
    out += [f"S{u} = {{{format_index_set(scheme.ssets.of(u))}}}" for u in h.users]
    out.append("[deltas]")
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i != j:
                d = delta_set(scheme.ssets, i, j, scheme.rule)
                out.append(f"dS{i}{j} = {{{','.join(map(str, sorted(d)))}}}")
    out.append("[keys]")
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i != j:
                out.append(f"k{i}{j} = {example.bits(scheme.matrix.key(i, j))}")
    out.append("[errata]")
    errata = example.errata(scheme.matrix, scheme.ssets)
    out += [f"{e.entry} recomputed {e.recomputed} printed {e.printed}" for e in errata]
    out.append("[verification]")
    report = verify_scheme(
        scheme.matrix, policy_matrix(h), scheme.material_size, scheme.ssets, errata
    )
    sys.stdout.write("\n".join(out) + "\n" + report.format())
    return EXIT_OK if report.policy_match else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdpmac",
        description="Hierarchical key pre-distribution for mandatory access control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rule_choices = [r.value for r in Rule]

    p = sub.add_parser("gen", help="generate S-sets, key matrix and user bundles")
    p.add_argument("--hierarchy", required=True, help="hierarchy file, or 'fig1' for the bundled example")
    p.add_argument("--sizes", help="comma list, uniform:<b>, or paper (default uniform:2)")
    p.add_argument("--key-len", type=int, help=f"key element length in bytes (default {DEFAULT_KEY_LEN})")
    p.add_argument("--seed", default="00", help="hex seed for key material")
    p.add_argument("--rule", choices=rule_choices, default=Rule.CONTAINMENT.value)
    p.add_argument("--material", choices=["random", "paper"], default="random")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("key", help="show one pair key and its delta set")
    p.add_argument("--out", required=True, help="directory written by gen")
    p.add_argument("i", type=int, help="receiving user")
    p.add_argument("j", type=int, help="sending user")
    p.set_defaults(func=cmd_key)

    p = sub.add_parser("verify", help="check keys against the access policy")
    p.add_argument("--out", help="directory written by gen")
    p.add_argument("--paper", action="store_true", help="verify the bundled worked example")
    p.add_argument("--trials", type=int, help="run this many random instances instead")
    p.add_argument("--m-max", type=int, default=64)
    p.add_argument("--shape", choices=["tree", "dag"], default="tree")
    p.add_argument("--seed", default="00")
    p.add_argument("--rule", choices=rule_choices, default=Rule.CONTAINMENT.value)
    p.add_argument("--report", help="also write the report to this file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="exchange messages using only the bundles")
    p.add_argument("--out", required=True, help="directory written by gen")
    p.add_argument("--scenario", help="scenario file (default: every ordered pair)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("paper-example", help="reproduce the seven-user worked example")
    p.add_argument("--rule", choices=rule_choices, default=Rule.CONTAINMENT.value)
    p.set_defaults(func=cmd_paper_example)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ZeroKeyCollision as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (InputError, HierarchyError, FamilyError, MaterialError, BundleError, ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
