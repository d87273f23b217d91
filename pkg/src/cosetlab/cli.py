"""Command-line frontend: samplers, products, membership, exact enumeration
and concentration sweeps, all seed-reproducible.

Data goes to --out (default stdout); diagnostics go to stderr.  Exit codes:
0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .blockmat import BlockMatrix, BlockSpec, PermutationWord, embed
from .cosets import FAMILY_KINDS, GroupFamily, circ_N, circ_colligation, circ_infinite
from .experiments import (
    ConcentrationReport,
    ExperimentConfig,
    run_block_decay,
    run_concentration,
    write_report,
)
from .geometry import sym_membership
from .haar import RandomStream, haar_orthogonal, haar_unitary, uniform_permutation
from .hypergroup_exact import ENUMERATION_BUDGET, exact_convolution

__all__ = ["main"]


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract wants config errors -> 1
    def error(self, message):
        raise ConfigError(message)


def _write_text(text: str, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(out_path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise RuntimeError(f"cannot write to {out_path}: {exc}") from exc


def _load_element(source: str, degree: int) -> BlockMatrix:
    """Parse an element source: 'identity', a permutation, or a matrix JSON path."""
    if source == "identity":
        return BlockMatrix.identity(degree)
    if source.startswith("(") or source[0].isdigit():
        return BlockMatrix.from_permutation(PermutationWord.parse(source, degree=degree))
    try:
        with open(source) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"matrix file not found: {source}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed matrix JSON in {source}: {exc}") from exc
    mat = BlockMatrix.from_json_dict(data)
    if mat.dim != degree:
        raise ConfigError(f"{source}: dimension {mat.dim}, expected {degree}")
    return mat


def _cmd_sample(args) -> int:
    rng = RandomStream(args.seed, args.stream)
    if args.kind == "orthogonal":
        mat = BlockMatrix(haar_orthogonal(args.dim, rng))
    elif args.kind == "unitary":
        mat = BlockMatrix(haar_unitary(args.dim, rng))
    else:
        mat = BlockMatrix.from_permutation(uniform_permutation(args.dim, rng))
    _write_text(json.dumps(mat.to_json_dict()) + "\n", args.out)
    return 0


def _cmd_product(args) -> int:
    window = args.alpha + args.m * args.k
    g = _load_element(args.g, window)
    h = _load_element(args.h, window)
    if args.N is None:
        if args.m != 1:
            raise ConfigError("the size-stable product needs m=1; pass --N for the finite product")
        if args.family == "unitary_conjugation":
            rep = circ_colligation(g, h, alpha=args.alpha)
        else:
            rep = circ_infinite(g, h, alpha=args.alpha)
    else:
        fam = GroupFamily(args.family, BlockSpec(args.alpha, args.k, args.N, args.m))
        rep = circ_N(g, h, fam).representative
    _write_text(json.dumps(rep.to_json_dict()) + "\n", args.out)
    return 0


def _cmd_membership(args) -> int:
    spec = BlockSpec(args.alpha, args.k, args.N, args.m)
    fam = GroupFamily("symmetric", spec)
    x = _load_element(args.x, spec.dim)
    rep = _load_element(args.target, spec.dim)
    from .cosets import CosetTarget

    verdict = sym_membership(x, CosetTarget(rep, fam))
    _write_text(("true" if verdict else "false") + "\n", args.out)
    return 0


def _cmd_exact_sym(args) -> int:
    spec = BlockSpec(args.alpha, args.k, args.N, args.m)
    fam = GroupFamily("symmetric", spec)

    def load(src):
        elem = _load_element(src, spec.window) if _degree_of(src, spec) == spec.window \
            else _load_element(src, spec.dim)
        return elem if elem.dim == spec.dim else embed(elem, spec)

    g = load(args.g)
    h = load(args.h)
    dist = exact_convolution(g, h, fam, budget=args.budget)
    _write_text(json.dumps(dist.to_json_dict(), indent=2) + "\n", args.out)
    return 0


def _degree_of(source: str, spec: BlockSpec) -> int:
    # window-degree words are accepted and embedded; anything else must be full size
    if source == "identity":
        return spec.window
    if source.startswith("(") or source[0].isdigit():
        try:
            word = PermutationWord.parse(source)
        except ValueError:
            return spec.dim
        return spec.window if word.degree <= spec.window else spec.dim
    return spec.dim


def _cmd_block_decay(args) -> int:
    rows = run_block_decay(args.k, args.N, args.samples, args.seed)
    write_report(rows, args.out, args.format)
    return 0


def _cmd_concentration(args) -> int:
    data = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config JSON in {args.config}: {exc}") from exc
    overrides = {
        "family": args.family, "alpha": args.alpha, "k": args.k, "m": args.m,
        "N_list": args.N or None, "epsilon_list": args.epsilon or None,
        "samples": args.samples, "seed": args.seed,
        "g_spec": args.g, "h_spec": args.h, "measure": args.measure,
        "restarts": args.restarts, "max_iters": args.max_iters, "tol": args.tol,
    }
    data.update({key: val for key, val in overrides.items() if val is not None})
    if data.get("seed") is None:
        raise ConfigError("concentration needs an explicit --seed (or a seed in the config)")
    try:
        cfg = ExperimentConfig.from_json_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    report = run_concentration(cfg, threads=args.threads)
    write_report(report, args.out, args.format)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="cosetlab",
                     description="Double-coset products and concentration experiments.")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    def add(name, fn, help_, example):
        p = sub.add_parser(name, help=help_, epilog=f"example: {example}",
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(fn=fn)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        return p

    p = add("sample", _cmd_sample, "emit one Haar/uniform group element as matrix JSON",
            "cosetlab sample --kind orthogonal --dim 4 --seed 7")
    p.add_argument("--kind", choices=("orthogonal", "unitary", "permutation"), required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, required=True, help="required: reproducibility by default")
    p.add_argument("--stream", type=int, default=0)

    p = add("product", _cmd_product, "emit a product representative",
            'cosetlab product --family symmetric --alpha 1 --k 1 --N 3 --g "(1 2)" --h "(1 2)"')
    p.add_argument("--family", choices=FAMILY_KINDS, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--N", type=int, default=None,
                   help="tail size; omit for the size-stable corner product")
    p.add_argument("--g", required=True, help="'identity', a permutation, or a matrix JSON path")
    p.add_argument("--h", required=True)

    p = add("membership", _cmd_membership, "exact symmetric double-coset membership",
            'cosetlab membership --alpha 1 --k 1 --N 3 --x identity --target "(1 2)"')
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--x", required=True)
    p.add_argument("--target", required=True, help="full-size coset representative")

    p = add("exact-sym", _cmd_exact_sym, "exact convolution atoms for the symmetric family",
            'cosetlab exact-sym --alpha 1 --k 1 --N 3 --g "(1 2)" --h "(1 2)"')
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--g", required=True, help="window or full-size permutation")
    p.add_argument("--h", required=True)
    p.add_argument("--budget", type=int, default=ENUMERATION_BUDGET)

    p = add("block-decay", _cmd_block_decay, "corner-block norm decay of Haar orthogonal matrices",
            "cosetlab block-decay --k 2 --N 20 --N 200 --samples 200 --seed 3")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--N", type=int, action="append", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = add("concentration", _cmd_concentration, "Monte Carlo concentration sweep",
            "cosetlab concentration --family unitary_orthogonal --alpha 1 --k 1 --m 1 "
            "--N 8 --N 32 --epsilon 0.4 --samples 50 --seed 42")
    p.add_argument("--config", default=None, help="JSON config; inline flags win")
    p.add_argument("--family", choices=FAMILY_KINDS)
    p.add_argument("--alpha", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int, action="append")
    p.add_argument("--epsilon", type=float, action="append")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--g", default=None, help="matrix source for g")
    p.add_argument("--h", default=None)
    p.add_argument("--measure", choices=("tau_tilde", "tau_full"))
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "fn", None) is None:
            parser.print_help(sys.stderr)
            return 1
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures: I/O, numerical, interrupts
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
