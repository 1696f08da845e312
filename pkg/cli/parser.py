"""argparse definition of the fracmin command line"""
import argparse
from typing import List, Optional, Union

import numpy as np

from utils.errors import MalformedInputError


class FracminArgumentParser(argparse.ArgumentParser):
    """Usage errors become MalformedInputError so they map onto exit status 1.

    Prefix matching is off: the top-level parser would otherwise read a
    subcommand's ``--s`` as an abbreviation of ``--seed`` or ``--samples``.
    """

    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message: str):
        raise MalformedInputError(f"{self.prog}: {message}")


def float_list(text: str) -> List[float]:
    """'0.3,0.5' -> [0.3, 0.5]; 'log:10:1000:7' -> 7 log-spaced values; 'lin:a:b:k' likewise"""
    try:
        if text.startswith(("log:", "lin:")):
            kind, start, stop, count = text.split(":")
            space = np.geomspace if kind == "log" else np.linspace
            return [float(v) for v in space(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse number list '{text}'") from exc


def point(text: str) -> Union[str, List[float]]:
    """'origin' is resolved once the dimension is known"""
    return "origin" if text == "origin" else float_list(text)


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="base seed (default FRACMIN_SEED)")
    parser.add_argument("--tol", type=float, default=default, help="relative quadrature tolerance")
    parser.add_argument("--threads", type=int, default=default, help="worker threads (default FRACMIN_THREADS)")
    parser.add_argument("--out", type=str, default=default, help="output file; a .manifest.json is written next to it")
    parser.add_argument("--samples", type=int, default=default, help="Monte-Carlo samples per shell/stratum")
    parser.add_argument("--log-level", type=str, default=default, help="stderr log level")


def _dimension(parser: argparse.ArgumentParser, s_default: Optional[float] = 0.5) -> None:
    parser.add_argument("--n", type=int, default=1, help="dimension of x' (ambient R^{n+1})")
    parser.add_argument("--s", type=float, default=s_default, help="fractional order in (0, 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = FracminArgumentParser(prog="fracmin", description="Fractional s-mean curvature numerics")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=FracminArgumentParser)
    sub.required = True

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        return p

    p = command("curvature", "H_{s,E}(x) of a set at a boundary point")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--set", type=str, help="geomset-v1 document")
    src.add_argument("--shape", choices=["halfspace", "ball", "barrier"], help="built-in shape")
    _dimension(p)
    p.add_argument("--point", type=point, default=None, help="'origin' or comma list; default: a natural boundary point")
    p.add_argument("--radius", type=float, default=1.0, help="ball radius")
    p.add_argument("--alpha", type=float, default=0.5, help="barrier exponent")
    p.add_argument("--eps", type=float, default=1.0, help="barrier scale")
    p.add_argument("--r", type=float, default=1.0, help="|x'| of the default barrier point")
    p.add_argument("--method", choices=["auto", "indicator"], default="auto")
    p.add_argument("--subtract-linear", action="store_true", help="graph formula with the linear part removed")

    p = command("barrier", "curvature profile, beta and supersolution radius of F_eps")
    _dimension(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--r-grid", type=float_list, default=float_list("log:10:1000:9"))
    p.add_argument("--method", choices=["direct", "decomposed"], default="direct")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--beta-only", action="store_true", help="print beta_{n,s,alpha} only")
    mode.add_argument("--fit", action="store_true", help="profile with fitted decay exponents (default)")
    mode.add_argument("--find-R", dest="find_r", action="store_true", help="certified supersolution radius (n = 1)")
    p.add_argument("--cap", type=float, default=None, help="search cap for --find-R")

    p = command("beta", "sweep of beta_{n,s,alpha} against the sign of s - alpha")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--s-values", type=float_list, default=float_list("0.3,0.5,0.7,0.9"))
    p.add_argument("--alpha-values", type=float_list, default=float_list("lin:0.05:0.95:19"))

    p = command("slide", "replay the sliding argument on a candidate set")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--set", type=str, help="geomset-v1 document with far_field (and cylinder)")
    src.add_argument("--fixture", choices=["halfspace", "notched", "sheet"])
    _dimension(p, s_default=0.7)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--j-max", type=int, default=4)
    p.add_argument("--witness-mode", choices=["density", "c1"], default="density")
    p.add_argument("--cone-samples", type=int, default=2048)
    p.add_argument("--horizon", type=float, default=None, help="sampler horizon on |x'|")
    p.add_argument("--resolution", type=float, default=None, help="sampler column spacing")

    p = command("density", "volume density ratios at a boundary point")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--set", type=str)
    src.add_argument("--fixture", choices=["halfspace", "touched-ball"])
    _dimension(p)
    p.add_argument("--point", type=point, default=None)
    p.add_argument("--rho-grid", type=float_list, default=float_list("log:0.01:1:5"))
    p.add_argument("--mode", choices=["both-sides", "complement-only"], default="both-sides")
    p.add_argument("--ball", type=float_list, default=None, help="touching ball as 'c_1,...,c_N,radius'")

    p = command("perimeter", "fractional s-perimeter inside a ball container")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--set", type=str)
    src.add_argument("--shape", choices=["halfspace", "ball"])
    _dimension(p)
    p.add_argument("--radius", type=float, default=1.0, help="radius of the built-in ball")
    p.add_argument("--container-radius", type=float, default=1.0, help="container B_R(0)")

    p = command("check", "invariant suites at reduced size; exit 3 when any fails")
    p.add_argument("--suite", action="append", default=None,
                   help="suite name (repeatable); default: all")
    return parser
