"""Command-line front end.

    feigenbaum --n 64 --verify 16 --json
    feigenbaum --digits 100 --constant alpha
    feigenbaum --n 32 --verify-oracle 12 --progress

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import resource
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from gmpy2 import mpfr

from . import _parallel
from .checkpoint import CheckpointDir
from .deltasolver import solve_delta
from .errors import CheckpointError, ConvergenceError, NumericalError
from .gsolver import GSolveConfig, default_target_digits, solve_g
from .mpnum import PrecisionContext, to_decimal
from .oracle import alpha_oracle, delta_oracle, superstable_params

log = logging.getLogger("feigenbaum")

REPORT_FORMAT = 1
DIGITS_PER_NODE_FLOOR = 1.5
SIGN_CONVENTION = "alpha is reported as |alpha|; the fixed-point function has g(1) = 1/alpha < 0"

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

_NUM_RE = re.compile(r"^\s*([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?\s*$")


def n_for_digits(digits: int) -> int:
    """Collocation size for a digit request: ceil(digits / 1.5), up to a multiple of 8."""
    n = math.ceil(digits / DIGITS_PER_NODE_FLOOR)
    return max(8, 8 * math.ceil(n / 8))


def _significand(s: str) -> tuple[str, str, int]:
    """(sign, significant digits, decimal exponent of the leading digit)."""
    m = _NUM_RE.match(s)
    if not m or not (m.group(2) or m.group(3)):
        raise ValueError(f"not a decimal number: {s!r}")
    sign, ip, fp, ex = m.group(1), m.group(2) or "", m.group(3) or "", m.group(4)
    digits = ip + fp
    lead = len(digits) - len(digits.lstrip("0"))
    if lead == len(digits):
        return "", "", 0
    exp = len(ip) - lead - 1 + (int(ex) if ex else 0)
    return ("-" if sign == "-" else ""), digits[lead:], exp


def digit_agreement(a: str, b: str) -> int:
    """Number of leading significant digits two decimal strings share."""
    sa, da, ea = _significand(a)
    sb, db, eb = _significand(b)
    if not da or not db or sa != sb or ea != eb:
        return 0
    k = 0
    for x, y in zip(da, db):
        if x != y:
            break
        k += 1
    return k


@dataclass
class RunReport:
    n: int
    target_digits: int
    work_bits: int
    alpha: str | None = None
    delta: str | None = None
    sign_convention: str = SIGN_CONVENTION
    achieved_digits_alpha: int | None = None
    achieved_digits_delta: int | None = None
    icum_iterations: list = field(default_factory=list)
    arnoldi_iterations: int | None = None
    verify: dict | None = None
    oracle: dict | None = None
    config: dict = field(default_factory=dict)
    # wall times, memory and thread count: the only fields that vary between runs
    runtime: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = {"format": REPORT_FORMAT}
        d.update({k: v for k, v in asdict(self).items() if v is not None})
        return json.dumps(d, indent=2)

    def to_text(self) -> str:
        out = [f"n = {self.n}  (target {self.target_digits} digits, {self.work_bits} bits)"]
        if self.alpha is not None:
            out.append(f"alpha = {self.alpha}")
        if self.delta is not None:
            out.append(f"delta = {self.delta}")
        if self.verify:
            out.append(f"verified against n = {self.verify['reference_n']}: "
                       + ", ".join(f"{k} {v} digits" for k, v in self.verify["digits"].items()))
        if self.oracle:
            out.append(f"oracle (depth {self.oracle['depth']}): "
                       + ", ".join(f"{k} {v} digits" for k, v in self.oracle["digits"].items()))
        out.append("ICUM iterations per rung: "
                   + ", ".join(f"n={r['n']}:{r['iterations']}" for r in self.icum_iterations))
        if self.arnoldi_iterations is not None:
            out.append(f"Arnoldi iterations: {self.arnoldi_iterations}")
        out.append(f"wall time: {self.runtime.get('total_seconds', 0):.2f}s, "
                   f"peak memory: {self.runtime.get('peak_memory_mb', 0):.1f} MB")
        out.append(f"({self.sign_convention})")
        return "\n".join(out)


@dataclass
class Computed:
    n: int
    digits: int
    ctx: PrecisionContext
    alpha: mpfr
    delta: mpfr | None
    rungs: list
    arnoldi: int | None
    seconds: dict


def compute(n: int, want_delta: bool, target_digits: int | None = None, cfg: GSolveConfig | None = None,
            checkpoints=None) -> Computed:
    digits = target_digits or default_target_digits(n)
    cfg = cfg or GSolveConfig(n, digits)
    t0 = time.perf_counter()
    sol = solve_g(n, cfg=cfg, checkpoints=checkpoints)
    t1 = time.perf_counter()
    delta = arnoldi = None
    if want_delta:
        res = solve_delta(sol.series, n, digits, ctx=sol.ctx)
        delta, arnoldi = res.delta, res.iterations
    t2 = time.perf_counter()
    with sol.ctx.active():
        alpha = abs(sol.alpha)
    return Computed(n, digits, sol.ctx, alpha, delta, sol.rungs, arnoldi,
                    {"g_seconds": t1 - t0, "delta_seconds": t2 - t1,
                     "rung_seconds": {str(r.n): r.seconds for r in sol.rungs}})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="feigenbaum",
        description="Compute the Feigenbaum constants alpha and delta to high precision.",
    )
    size = p.add_mutually_exclusive_group(required=True)
    size.add_argument("--n", type=int, help="collocation size (number of Chebyshev nodes)")
    size.add_argument("--digits", type=int, help="decimal digits wanted; picks n automatically")
    p.add_argument("--constant", choices=("alpha", "delta", "both"), default="both")
    p.add_argument("--jacobian-digits", type=int, help="precision of the approximate inverse Jacobian")
    p.add_argument("--max-icum-iters", type=int, help="iteration cap for the top rung")
    p.add_argument("--fd-exp", type=int, help="finite-difference step 10^-FD_EXP")
    p.add_argument("--checkpoint-dir", help="save and reuse rung coefficients here")
    p.add_argument("--verify", type=int, nargs="?", const=16, metavar="DN",
                   help="rerun at n+DN (default 16) and report matching digits")
    p.add_argument("--verify-oracle", type=int, metavar="DEPTH",
                   help="compare against the logistic-map cascade to this depth")
    p.add_argument("--json", action="store_true", help="print the report as one JSON object")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--progress", action="store_true", help="per-iteration progress on stderr")
    return p


def run(args: argparse.Namespace) -> RunReport:
    t_start = time.perf_counter()
    if args.n is not None:
        n = args.n
        target = default_target_digits(n)
        shown = target
    else:
        n = n_for_digits(args.digits)
        target = max(args.digits, default_target_digits(n))
        shown = args.digits
    want_alpha = args.constant in ("alpha", "both")
    want_delta = args.constant in ("delta", "both")

    cfg = GSolveConfig(n, target, jacobian_digits=args.jacobian_digits,
                       fd_step_exponent=args.fd_exp, max_icum_iters=args.max_icum_iters)
    store = CheckpointDir(args.checkpoint_dir) if args.checkpoint_dir else None
    main = compute(n, want_delta, target, cfg, store)

    def fmt(x, digits):
        return to_decimal(x, digits) if x is not None else None

    report = RunReport(
        n=n, target_digits=target, work_bits=main.ctx.work_bits,
        alpha=fmt(main.alpha, shown) if want_alpha else None,
        delta=fmt(main.delta, shown) if want_delta else None,
        icum_iterations=[{"n": r.n, "iterations": r.iterations, "refreshes": r.refreshes,
                          "reused": r.reused} for r in main.rungs],
        arnoldi_iterations=main.arnoldi,
        config={"jacobian_digits": cfg.jacobian_digits, "fd_step_exponent": cfg.fd_step_exponent,
                "max_icum_iters": cfg.max_icum_iters, "guard_bits": cfg.guard_bits,
                "constant": args.constant},
    )
    runtime = dict(main.seconds)

    if args.verify is not None:
        if args.verify < 1:
            raise ValueError("--verify needs a positive size increment")
        t0 = time.perf_counter()
        ref_n = n + args.verify
        ref = compute(ref_n, want_delta, None, None, store)
        ref_digits = max(ref.digits, target)
        digits = {}
        if want_alpha:
            digits["alpha"] = digit_agreement(to_decimal(main.alpha, target), to_decimal(ref.alpha, ref_digits))
        if want_delta:
            digits["delta"] = digit_agreement(to_decimal(main.delta, target), to_decimal(ref.delta, ref_digits))
        report.verify = {"reference_n": ref_n, "digits": digits}
        report.achieved_digits_alpha = digits.get("alpha")
        report.achieved_digits_delta = digits.get("delta")
        runtime["verify_seconds"] = time.perf_counter() - t0

    if args.verify_oracle is not None:
        t0 = time.perf_counter()
        seq = superstable_params(args.verify_oracle)
        oa, od = alpha_oracle(seq), delta_oracle(seq)
        with seq.ctx.active():
            oa_abs = abs(oa.value)
        digits = {}
        if want_alpha:
            digits["alpha"] = digit_agreement(to_decimal(main.alpha, 30), to_decimal(oa_abs, 30))
        if want_delta:
            digits["delta"] = digit_agreement(to_decimal(main.delta, 30), to_decimal(od.value, 30))
        report.oracle = {"depth": args.verify_oracle, "alpha": to_decimal(oa_abs, 15),
                         "delta": to_decimal(od.value, 15), "digits": digits}
        if args.verify is None:
            report.achieved_digits_alpha = digits.get("alpha")
            report.achieved_digits_delta = digits.get("delta")
        runtime["oracle_seconds"] = time.perf_counter() - t0

    runtime["threads"] = args.threads
    runtime["total_seconds"] = time.perf_counter() - t_start
    runtime["peak_memory_mb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    report.runtime = runtime
    return report


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.threads < 1:
        print("feigenbaum: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.n is not None and args.n < 2:
        print("feigenbaum: --n must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    if args.digits is not None and args.digits < 1:
        print("feigenbaum: --digits must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    handler = None
    if args.progress:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.DEBUG)
    try:
        with _parallel.threads(args.threads):
            report = run(args)
    except (ConvergenceError, NumericalError, ArithmeticError) as exc:
        print(f"feigenbaum: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CheckpointError, OSError) as exc:
        print(f"feigenbaum: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"feigenbaum: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if handler is not None:
            log.removeHandler(handler)
            log.setLevel(logging.NOTSET)
    print(report.to_json() if args.json else report.to_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
