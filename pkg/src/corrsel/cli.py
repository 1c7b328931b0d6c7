"""``corrsel`` command line: gen, select, eval, bench.

Exit codes: 0 ok, 2 usage, 3 generation, 4 selection, 5 evaluation.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import io as cio
from .exceptions import CorrselError, GenerationFailure, InvalidInput
from .metrics import DEFAULT_TAUS, bench, evaluate
from .params import PARAMS_BY_METHOD, params_to_dict, parse_param_value
from .selectors import METHODS, run_selector
from .synthgen import SceneSpec, generate_scene, parse_transform

EXIT_OK, EXIT_USAGE, EXIT_GEN, EXIT_SELECT, EXIT_EVAL = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _parse_size(text: str) -> tuple[float, float]:
    try:
        w, h = (float(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad image size {text!r}, expected WxH") from None
    return w, h


def _build_params(method: str, pairs, prefix: str | None = None):
    cls = PARAMS_BY_METHOD[method]
    values = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {pair!r}")
        if prefix is not None:
            scope, dot, key = key.partition(".")
            if not dot:
                raise UsageError(f"bench --param expects method.key=value, got {pair!r}")
            if scope != prefix:
                continue
        try:
            values[key] = parse_param_value(cls, key, value)
        except InvalidInput as exc:
            raise UsageError(str(exc)) from None
    try:
        return cls(**values)
    except InvalidInput as exc:
        raise UsageError(str(exc)) from None


def _scene_spec(args, n: int | None = None) -> SceneSpec:
    try:
        transform = parse_transform(args.transform)
        quality = None if args.quality == "none" else args.quality
        return SceneSpec(n=n if n is not None else args.n, inlier_ratio=args.inlier_ratio,
                         noise_sigma=args.noise, transform=transform,
                         image_size=_parse_size(args.image_size), quality_model=quality,
                         affine_frames=args.affine, seed=args.seed)
    except InvalidInput as exc:
        raise UsageError(str(exc)) from None


def _add_scene_flags(p, with_n: bool = True):
    if with_n:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--inlier-ratio", type=float, default=0.5)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--transform", default="translation:30,10")
    p.add_argument("--image-size", default="640x480")
    p.add_argument("--quality", choices=("correlated", "uncorrelated", "none"), default="correlated")
    p.add_argument("--affine", action="store_true", help="attach local affine frames")
    p.add_argument("--seed", type=int, default=0)


def cmd_gen(args) -> int:
    spec = _scene_spec(args)
    try:
        cs, gt = generate_scene(spec)
    except GenerationFailure as exc:
        print(f"GenerationFailure: {exc}", file=sys.stderr)
        return EXIT_GEN
    cio.write_scene(args.out, cs, gt, args.name or Path(args.out).stem)
    return EXIT_OK


def cmd_select(args) -> int:
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}; choose from {', '.join(METHODS)}")
    params = _build_params(args.method, args.param)
    try:
        cs, _, _ = cio.read_scene(args.scene)
    except (OSError, InvalidInput) as exc:
        raise UsageError(f"cannot read scene: {exc}") from None
    try:
        result = run_selector(args.method, cs, params, args.seed)
    except CorrselError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SELECT
    Path(args.out).write_text(cio.dumps_result(result, params_to_dict(params), args.seed))
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        cs, gt, _ = cio.read_scene(args.scene)
        result, _ = cio.read_result(args.result)
    except (OSError, InvalidInput) as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    try:
        report = evaluate(cs, result, gt, t_gt=args.t_gt, taus=DEFAULT_TAUS)
    except CorrselError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EVAL
    text = cio.eval_csv(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}")
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad sizes {args.sizes!r}") from None
    if not sizes or min(sizes) < 1:
        raise UsageError("sizes must be positive integers")
    if args.repeats < 1:
        raise UsageError("repeats must be at least 1")
    params = {m: _build_params(m, args.param, prefix=m) for m in methods}
    template = _scene_spec(args, n=sizes[0])
    try:
        rows = bench(methods, sizes, args.repeats, template, seed=args.seed, params=params)
    except GenerationFailure as exc:
        print(f"GenerationFailure: {exc}", file=sys.stderr)
        return EXIT_GEN
    text = cio.bench_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corrsel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic scene file")
    _add_scene_flags(g)
    g.add_argument("--name", default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("select", help="run one selector on a scene file")
    s.add_argument("--method", required=True)
    s.add_argument("--scene", required=True)
    s.add_argument("--param", action="append", metavar="KEY=VALUE")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_select)

    e = sub.add_parser("eval", help="score a result file against its scene")
    e.add_argument("--scene", required=True)
    e.add_argument("--result", required=True)
    e.add_argument("--t-gt", type=float, default=10.0)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="time selectors over generated scenes")
    b.add_argument("--methods", required=True)
    b.add_argument("--sizes", required=True)
    b.add_argument("--repeats", type=int, default=10)
    b.add_argument("--param", action="append", metavar="METHOD.KEY=VALUE")
    b.add_argument("--out", default=None)
    _add_scene_flags(b, with_n=False)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
