"""Command-line front end.

Automorphism arguments are either paths to files or inline text, with
``;`` allowed as a line separator::

    fpsaut decompose --ring q -n 1 -D 8 'X1 -> X1 + X1^2'
    fpsaut verify cert.txt target.txt

Results go to stdout (or ``-o``).  Status lines go to stderr and start with
a token: ``OK`` on success, otherwise the error class name such as
``UnsupportedCharacteristic`` or ``VerificationFailed``.  The exit status is
0 exactly on success.
"""

from __future__ import annotations

import argparse
import os
import sys

from .autgroup import (CommutatorCertificate, commutator, compose, invert, random_gi,
                       verify_certificate)
from .decompose import ALGORITHMS, decompose
from .errors import ContextMismatch, FpsError
from .parsing import parse_automorphism
from .ring import parse_ring
from .series import MAX_PREC, SeriesContext


class UsageError(Exception):
    token = "UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(arg: str) -> str:
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def _context(args, required=True):
    if args.nvars is None or args.prec is None:
        if required:
            raise UsageError("-n and -D are required")
        return None
    if args.nvars < 1:
        raise UsageError("-n must be at least 1")
    if not 1 <= args.prec <= MAX_PREC:
        raise UsageError(f"-D must lie in [1, {MAX_PREC}]")
    return SeriesContext(parse_ring(args.ring), args.nvars, args.prec)


def _emit(args, text):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(message):
    print(message, file=sys.stderr)


def _autos(args, ctx):
    return [parse_automorphism(_read(a), ctx) for a in args.maps]


def cmd_compose(args):
    ctx = _context(args)
    _emit(args, compose(*_autos(args, ctx)).to_text() + "\n")
    return 0


def cmd_invert(args):
    ctx = _context(args)
    (alpha,) = _autos(args, ctx)
    _emit(args, invert(alpha).to_text() + "\n")
    return 0


def cmd_commutator(args):
    ctx = _context(args)
    x, y = _autos(args, ctx)
    _emit(args, commutator(x, y).to_text() + "\n")
    return 0


def cmd_decompose(args):
    ctx = _context(args)
    alpha = parse_automorphism(_read(args.map), ctx)
    cert = decompose(alpha, args.algorithm)
    result = verify_certificate(cert, alpha)
    if not result:
        _status(f"VerificationFailed: {result.discrepancy}")
        return 1
    _emit(args, cert.to_text())
    _status(f"OK: {len(cert)} pair(s), verified")
    return 0


def cmd_verify(args):
    cert = CommutatorCertificate.from_text(_read(args.certificate))
    ctx = _context(args, required=False)
    if ctx is not None and ctx != cert.ctx:
        raise ContextMismatch(f"flags give {ctx} but the certificate is over {cert.ctx}")
    target = parse_automorphism(_read(args.target), cert.ctx)
    result = verify_certificate(cert, target)
    if not result:
        _status(f"VerificationFailed: {result.discrepancy}")
        return 1
    _status(f"OK: {len(cert)} pair(s), verified")
    return 0


def cmd_random(args):
    ctx = _context(args)
    _emit(args, random_gi(ctx, seed=args.seed).to_text() + "\n")
    return 0


def build_parser():
    parser = _Parser(prog="fpsaut", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--ring", default="q", help="ring descriptor: q (default), or fp:<p> / dual:<p> for a prime p")
        p.add_argument("-n", dest="nvars", type=int, help="number of variables")
        p.add_argument("-D", dest="prec", type=int, help="truncation degree")
        p.add_argument("-o", dest="output", help="write the result to this file")
        return p

    p = common(sub.add_parser("compose", help="compose automorphisms, leftmost outermost"))
    p.add_argument("maps", nargs="+")
    p.set_defaults(func=cmd_compose)
    p = common(sub.add_parser("invert", help="invert an automorphism"))
    p.add_argument("maps", nargs=1)
    p.set_defaults(func=cmd_invert)
    p = common(sub.add_parser("commutator", help="[x,y] = x*y*x^-1*y^-1"))
    p.add_argument("maps", nargs=2)
    p.set_defaults(func=cmd_commutator)
    p = common(sub.add_parser("decompose", help="write a commutator certificate"))
    p.add_argument("map")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="auto")
    p.set_defaults(func=cmd_decompose)
    p = common(sub.add_parser("verify", help="check a certificate against a target"))
    p.add_argument("certificate")
    p.add_argument("target")
    p.set_defaults(func=cmd_verify)
    p = common(sub.add_parser("random", help="seeded random automorphism with identity linear part"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_random)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (FpsError, UsageError) as exc:
        _status(f"{exc.token}: {exc}")
        return 2 if isinstance(exc, UsageError) else 1
    except ValueError as exc:
        _status(f"{type(exc).__name__}: {exc}")
        return 1
    except OSError as exc:
        _status(f"IOError: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
