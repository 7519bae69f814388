r"""Command-line surface.

Subcommands: invariants, reparam, kbound, entropy-scan, psi-trace,
fuchsian-gen, selftest.  Exit codes: 0 success, 1 mathematical-relation
failure, 2 input or schema failure.  All commands are deterministic given
the config and seed; CSV output is byte-stable apart from the timestamp
header line.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

from . import __version__
from .config import ConfigError, RunConfig, invariants_to_dict, params_to_dict
from .linalg import DegenerateError
from .pants import check_closed_leaf, xi_forward, xi_inverse

EXIT_OK = 0
EXIT_RELATION = 1
EXIT_SCHEMA = 2


def _open_out(path):
    if not path or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_csv(path, header, rows, cfg):
    fh, owned = _open_out(path)
    try:
        fh.write(f"# tool: hitchin {__version__}\n")
        fh.write(f"# config_hash: {cfg.config_hash()}\n")
        fh.write(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if owned:
            fh.close()


def cmd_invariants(cfg, out_path):
    decomp = cfg.decomposition()
    invariants = cfg.invariants(decomp)
    report = check_closed_leaf(decomp, invariants)
    rows = [
        (kind, ident, relation, k, format(float(v), ".12g"))
        for kind, ident, relation, k, v in report.rows()
    ]
    _write_csv(out_path, ("kind", "id", "relation", "k", "value"), rows, cfg)
    tol = 0 if cfg.exact else cfg.closed_leaf_tol
    for (cid, k), r in sorted(report.equality_residuals.items()):
        if r > tol:
            print(
                f"closed leaf equality fails: curve {cid}, k={k}, residual {float(r):.3g}",
                file=sys.stderr,
            )
            return EXIT_RELATION
    for (j, slot, k), v in sorted(report.gap_values.items()):
        if v <= tol:
            print(
                f"closed leaf inequality fails: pants {j}, slot {slot}, k={k}, value {float(v):.3g}",
                file=sys.stderr,
            )
            return EXIT_RELATION
    return EXIT_OK


def cmd_reparam(cfg, direction, out_path):
    decomp = cfg.decomposition()
    if direction == "forward":
        invariants = cfg.invariants(decomp)
        params = xi_forward(
            decomp, invariants, cfg.gluing(decomp), tol=None if cfg.exact else cfg.closed_leaf_tol
        )
        payload = {"n": cfg.n, "genus": cfg.genus, "parameters": params_to_dict(params)}
    else:
        params = cfg.hitchin_params(decomp)
        invariants, gluing = xi_inverse(params)
        payload = {
            "n": cfg.n,
            "genus": cfg.genus,
            "parameters": {
                "invariants": invariants_to_dict(invariants),
                "gluing": {str(c): [str(v) for v in vals] for c, vals in sorted(gluing.items())},
            },
        }
    fh, owned = _open_out(out_path)
    try:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    finally:
        if owned:
            fh.close()
    return EXIT_OK


def cmd_kbound(cfg, out_path):
    from .degeneration import compute_K, compute_L

    decomp = cfg.decomposition()
    params = cfg.hitchin_params(decomp)
    invariants, _ = xi_inverse(params)
    k_val, per_edge = compute_K(decomp, invariants)
    l_val = compute_L(params.boundary, cfg.n)
    rows = [
        (j, kind, format(v, ".12g")) for (j, kind), v in sorted(per_edge.items())
    ]
    rows.append(("min", "K", format(k_val, ".12g")))
    rows.append(("min", "L", format(l_val, ".12g")))
    _write_csv(out_path, ("pants", "edge", "value"), rows, cfg)
    return EXIT_OK


def cmd_entropy_scan(cfg, out_path):
    from .degeneration import CSV_COLUMNS, internal_sequence_scan

    decomp = cfg.decomposition()
    params = cfg.hitchin_params(decomp)
    direction = {}
    for label, value in cfg.direction.items():
        direction[label] = value
    rows = internal_sequence_scan(params, direction, cfg.steps)
    _write_csv(out_path, CSV_COLUMNS, [r.csv_row() for r in rows], cfg)
    ok = sum(1 for r in rows if r.flags_ok)
    if ok < 0.9 * len(rows):
        print(f"scan failed on {len(rows) - ok} of {len(rows)} rows", file=sys.stderr)
        return EXIT_RELATION
    return EXIT_OK


def cmd_psi_trace(cfg, word, out_path):
    from .degeneration import compute_K, compute_L, length_lower_bound
    from .fuchsian import fuchsian_invariants
    from .tracer import PsiTracer, r_and_s, validate_psi

    surface = cfg.surface()
    tracer = PsiTracer(surface, n=cfg.n, depth_cap=cfg.depth_cap)
    word = word or cfg.word
    if not word:
        raise ConfigError("psi-trace needs a word ([tracer].word or --word)")
    psi = tracer.trace(word)
    if psi.is_closed_leaf:
        _write_csv(
            out_path,
            ("index", "pred", "edge", "succ", "type", "t"),
            [("closed-leaf", psi.closed_leaf_curve, "", "", "", "")],
            cfg,
        )
        print(f"word {word!r} is a closed-leaf power (curve {psi.closed_leaf_curve})")
        return EXIT_OK
    violations = validate_psi(psi, surface.decomp)
    if violations:
        for v in violations:
            print(f"encoding violation: {v}", file=sys.stderr)
        return EXIT_RELATION
    counts = r_and_s(psi)
    invariants = fuchsian_invariants(surface, cfg.n)
    k_val, _ = compute_K(surface.decomp, invariants)
    params = xi_forward(surface.decomp, invariants, cfg.gluing(surface.decomp))
    l_val = compute_L(params.boundary, cfg.n)
    bound = length_lower_bound(counts, k_val, l_val)
    rows = [
        (i, f"{tp.pred[0]}:{tp.pred[1]}", f"{tp.edge[0]}:{tp.edge[1]}",
         f"{tp.succ[0]}:{tp.succ[1]}", tp.type, tp.t)
        for i, tp in enumerate(psi.tuples)
    ]
    _write_csv(out_path, ("index", "pred", "edge", "succ", "type", "t"), rows, cfg)
    print(f"r = {counts.r}, s = {counts.s}, length bound = {bound:.9g}")
    return EXIT_OK


def cmd_fuchsian_gen(cfg, out_path):
    from .fuchsian import fuchsian_invariants

    surface = cfg.surface()
    invariants = fuchsian_invariants(surface, cfg.n)
    params = xi_forward(surface.decomp, invariants, cfg.gluing(surface.decomp))
    payload = {
        "n": cfg.n,
        "genus": 2,
        "backend": "float64",
        "decomposition": {"standard_genus": 2},
        "surface": cfg.raw.get("surface", {}),
        "parameters": {
            "invariants": invariants_to_dict(invariants),
            "boundary": params_to_dict(params)["boundary"],
            "internal": params_to_dict(params)["internal"],
            "gluing": params_to_dict(params)["gluing"],
        },
    }
    fh, owned = _open_out(out_path)
    try:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    finally:
        if owned:
            fh.close()
    return EXIT_OK


def cmd_selftest(cfg):
    failures = []
    for name, fn in _selftest_bank():
        try:
            fn()
            print(f"PASS {name}")
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures.append((name, exc))
            print(f"FAIL {name}: {exc}")
    if failures:
        print(f"{len(failures)} selftest failure(s)", file=sys.stderr)
        return EXIT_RELATION
    return EXIT_OK


def _selftest_bank():
    """Named identity checks binding all modules together."""
    import random
    from fractions import Fraction

    from . import invariants as inv_mod
    from .flags import extract_triple_ratios, reconstruct_triple, sym_power, veronese_flag
    from .linalg import Flag, is_generic_triple, wedge_det

    rng = random.Random(0)

    def rand_flag(n):
        while True:
            vecs = [[Fraction(rng.randint(-6, 6)) for _ in range(n)] for _ in range(n)]
            try:
                return Flag.from_basis(vecs)
            except DegenerateError:
                continue

    def rand_lines_and_base(n, count):
        while True:
            lines = [
                tuple(Fraction(rng.randint(-9, 9)) for _ in range(n)) for _ in range(count)
            ]
            base = [
                tuple(Fraction(rng.randint(-9, 9)) for _ in range(n))
                for _ in range(n - 2)
            ]
            try:
                vals = [
                    inv_mod.cross_ratio(
                        [lines[0], lines[1], lines[2], lines[3]], base
                    )
                ]
                if any(inv_mod.is_infinite(v) for v in vals):
                    continue
                return lines, base
            except DegenerateError:
                continue

    def check_wedge_antisymmetry():
        for n in (2, 3, 4, 5):
            vecs = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
            d1 = wedge_det(vecs)
            swapped = [vecs[1], vecs[0]] + vecs[2:]
            assert wedge_det(swapped) == -d1, "swap must flip the sign"

    def check_cross_ratio_swap_identity():
        # (L1,L2,L3,L4)_M = 1 - (L2,L1,L3,L4)_M
        for n in (2, 3, 4):
            for _ in range(20):
                lines, base = rand_lines_and_base(n, 4)
                v = inv_mod.cross_ratio(lines, base)
                w = inv_mod.cross_ratio([lines[1], lines[0], lines[2], lines[3]], base)
                if inv_mod.is_infinite(v) or inv_mod.is_infinite(w):
                    continue
                assert v == 1 - w, f"swap identity: {v} != 1 - {w}"

    def check_cross_ratio_reversal_identity():
        for n in (2, 3, 4):
            for _ in range(20):
                lines, base = rand_lines_and_base(n, 4)
                v = inv_mod.cross_ratio(lines, base)
                w = inv_mod.cross_ratio(list(reversed(lines)), base)
                assert v == w, "reversal identity"

    def check_cross_ratio_cocycle():
        for n in (2, 3):
            for _ in range(20):
                lines, base = rand_lines_and_base(n, 5)
                l1, l2, l3, l4, l5 = lines
                try:
                    a = inv_mod.cross_ratio([l1, l2, l3, l5], base)
                    b = inv_mod.cross_ratio([l1, l3, l4, l5], base)
                    c = inv_mod.cross_ratio([l1, l2, l4, l5], base)
                except DegenerateError:
                    continue
                if any(inv_mod.is_infinite(v) for v in (a, b, c)):
                    continue
                assert a * b == c, "cocycle identity"

    def check_triple_cyclic_symmetry():
        for n in (3, 4):
            while True:
                f, g, h = rand_flag(n), rand_flag(n), rand_flag(n)
                if is_generic_triple(f, g, h):
                    break
            for idx in inv_mod.triple_index_set(n):
                x, y, z = idx
                lhs = inv_mod.triple_ratio(f, g, h, idx)
                rhs = inv_mod.triple_ratio(g, h, f, (y, z, x))
                assert lhs == rhs, "cyclic symmetry of the triple ratio"

    def check_reconstruction_round_trip():
        n = 3
        while True:
            f, g, h = rand_flag(n), rand_flag(n), rand_flag(n)
            if is_generic_triple(f, g, h):
                break
        ratios = extract_triple_ratios(f, g, h)
        g2 = reconstruct_triple(f, h, g.subspace(1), ratios)
        assert g2 == g, "triple reconstruction round trip"

    def check_sym_power_multiplicative():
        a = ((Fraction(2), Fraction(1)), (Fraction(1), Fraction(1)))
        b = ((Fraction(1), Fraction(2)), (Fraction(1), Fraction(3)))
        from .linalg import mat_mul

        ab = mat_mul(a, b)
        for n in (3, 4, 5):
            assert mat_mul(sym_power(a, n), sym_power(b, n)) == sym_power(ab, n)

    def check_veronese_triple_ratios():
        for n in (3, 4):
            flags = [
                veronese_flag((Fraction(t), Fraction(1)), n) for t in (0, 1, 3)
            ]
            for idx in inv_mod.triple_index_set(n):
                assert inv_mod.triple_ratio(*flags, idx) == 1

    def check_reparam_round_trip():
        from .pants import (
            HitchinParams,
            internal_labels,
            standard_genus2,
            xi_forward,
            xi_inverse,
        )

        decomp = standard_genus2()
        n = 4
        labels = internal_labels(n)
        boundary = {
            c: tuple(Fraction(rng.randint(1, 9)) for _ in range(n - 1)) for c in range(3)
        }
        internal = tuple(
            {lab: Fraction(rng.randint(-4, 4)) for lab in labels} for _ in range(2)
        )
        gluing = {c: tuple(Fraction(0) for _ in range(n - 1)) for c in range(3)}
        params = HitchinParams(
            n=n, decomp=decomp, boundary=boundary, internal=internal, gluing=gluing
        )
        invs, glu = xi_inverse(params)
        back = xi_forward(decomp, invs, glu)
        assert back.boundary == params.boundary and back.internal == params.internal

    def check_backend_agreement():
        for _ in range(20):
            lines, base = rand_lines_and_base(3, 4)
            v = inv_mod.cross_ratio(lines, base)
            fl = [tuple(float(x) for x in l) for l in lines]
            fb = [tuple(float(x) for x in b) for b in base]
            w = inv_mod.cross_ratio(fl, fb)
            if inv_mod.is_infinite(v) or inv_mod.is_infinite(w):
                continue
            assert abs(float(v) - w) <= 1e-8 * max(1.0, abs(w)), "backend agreement"

    def check_entropy_monotone():
        from .degeneration import entropy_upper_bound

        values = [entropy_upper_bound(10.0**k, 1.0, 2) for k in range(1, 7)]
        assert all(a > b for a, b in zip(values, values[1:])), "entropy bound monotone"
        assert values[-1] < 0.01, "entropy bound limit"

    return [
        ("wedge antisymmetry", check_wedge_antisymmetry),
        ("cross-ratio swap identity (1 - value)", check_cross_ratio_swap_identity),
        ("cross-ratio reversal identity", check_cross_ratio_reversal_identity),
        ("cross-ratio cocycle identity", check_cross_ratio_cocycle),
        ("triple-ratio cyclic symmetry", check_triple_cyclic_symmetry),
        ("triple reconstruction round trip", check_reconstruction_round_trip),
        ("symmetric power multiplicativity", check_sym_power_multiplicative),
        ("rational-normal-curve triple ratios", check_veronese_triple_ratios),
        ("reparameterization round trip", check_reparam_round_trip),
        ("exact/float backend agreement", check_backend_agreement),
        ("entropy bound monotonicity", check_entropy_monotone),
    ]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hitchin",
        description="Flag invariants, pants coordinates, and degeneration bounds",
    )
    parser.add_argument("--version", action="version", version=f"hitchin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (
        "invariants",
        "reparam",
        "kbound",
        "entropy-scan",
        "psi-trace",
        "fuchsian-gen",
        "selftest",
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", default="", help="path to the JSON config")
        p.add_argument("--backend", choices=("exact", "float64"), default=None)
        p.add_argument("--out", default="", help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=None)
        if name == "reparam":
            p.add_argument(
                "--direction", choices=("forward", "inverse"), required=True
            )
        if name == "psi-trace":
            p.add_argument("--word", default="")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = RunConfig.load(args.config)
        else:
            cfg = RunConfig.from_dict({})
        if args.backend:
            cfg.backend = args.backend
        if args.seed is not None:
            cfg.seed = args.seed
        out = args.out or cfg.output_path
        if args.command == "invariants":
            return cmd_invariants(cfg, out)
        if args.command == "reparam":
            return cmd_reparam(cfg, args.direction, out)
        if args.command == "kbound":
            return cmd_kbound(cfg, out)
        if args.command == "entropy-scan":
            return cmd_entropy_scan(cfg, out)
        if args.command == "psi-trace":
            return cmd_psi_trace(cfg, args.word, out)
        if args.command == "fuchsian-gen":
            return cmd_fuchsian_gen(cfg, out)
        if args.command == "selftest":
            return cmd_selftest(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, FileNotFoundError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except DegenerateError as exc:
        print(f"relation failure: {exc}", file=sys.stderr)
        return EXIT_RELATION


if __name__ == "__main__":
    sys.exit(main())
