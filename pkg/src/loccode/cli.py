"""Command-line interface: build, nest, verify, measure, params, simulate.

stdout carries data (code files, CSV, tables); stderr carries diagnostics.
Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath

from . import analysis, codes, nesting, params
from .codes import DEFAULT_BUDGET, BudgetExceededError, LinearCode
from .local import Corrector, bottom_corrector, full_read_corrector

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    constants: str | None = None
    output: str | None = None
    threads: int = 1

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        return cls(
            seed=args.seed,
            budget=args.budget,
            constants=getattr(args, "constants", None),
            output=getattr(args, "output", None),
            threads=args.threads if args.threads is not None else default_threads(),
        )


def default_threads() -> int:
    env = os.environ.get("LOCCODE_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise CliError(f"LOCCODE_THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise CliError("LOCCODE_THREADS must be positive")
        return value
    return os.cpu_count() or 1


# -- argument types ---------------------------------------------------------

def fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def big_int_arg(text: str) -> int:
    """Integers, also written as b^e or b**e (for lengths like 2^500)."""
    m = re.fullmatch(r"\s*(\d+)\s*(?:\^|\*\*)\s*(\d+)\s*", text)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def code_spec(text: str) -> LinearCode:
    """Factor specs for tensor builds: parity<n>, hamming<r>, or a .pchk path."""
    m = re.fullmatch(r"(parity|hamming)(\d+)", text)
    if m:
        size = int(m.group(2))
        try:
            return codes.parity_code(size) if m.group(1) == "parity" else codes.hamming_code(size)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    if Path(text).is_file():
        return codes.read_pchk(text)
    raise argparse.ArgumentTypeError(f"expected parity<n>, hamming<r> or a .pchk file, got {text!r}")


# -- shared helpers ---------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 15)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def note(msg: str) -> None:
    print(msg, file=sys.stderr)


def load_code(path: str) -> LinearCode:
    try:
        code = codes.read_pchk(path)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    return codes.detect_tensor_layout(code) or code


def load_chain(path: str, budget: int, repetitions: int | None = None) -> nesting.NestingChain:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    levels = nesting.parse_chain(text, Path(path).parent)
    if repetitions is None:
        return nesting.iterate_nesting(levels, budget)
    if len(levels) < 2:
        raise CliError("--repetitions needs a chain with at least two levels")
    inner = nesting.iterate_nesting(levels[:-1], budget)
    return nesting.boost(levels[-1], inner, t=repetitions, budget=budget)


def load_corrector(args: argparse.Namespace, cfg: RunConfig) -> Corrector:
    if (args.chain is None) == (args.code is None):
        raise CliError("give exactly one of --chain or --code")
    if args.chain is not None:
        chain = load_chain(args.chain, cfg.budget, args.repetitions)
        code, corrector = chain.code, chain.corrector
    else:
        if args.repetitions is not None:
            raise CliError("--repetitions applies to --chain only")
        code = load_code(args.code)
        corrector = None
    if args.procedure == "bottom":
        return bottom_corrector(code)
    if args.procedure == "full":
        return full_read_corrector(code, cfg.budget)
    if corrector is None:
        raise CliError("--procedure nested needs --chain")
    return corrector


# -- build ------------------------------------------------------------------

def cmd_build(args: argparse.Namespace, cfg: RunConfig) -> int:
    kind = args.kind
    if kind == "parity":
        code = codes.parity_code(_need(args.n, "--n"))
    elif kind == "hamming":
        code = codes.hamming_code(_need(args.r, "--r"))
    elif kind == "ldpc":
        code = codes.random_ldpc(_need(args.n, "--n"), _need(args.rows, "--rows"), _need(args.row_weight, "--row-weight"), cfg.seed)
    else:
        code = codes.tensor_product(_need(args.a, "--a"), _need(args.b, "--b"))
    emit(codes.format_pchk(code), cfg.output)
    summary = [f"n = {code.n}", f"k = {code.k}"]
    try:
        summary.append(f"distance = {codes.min_distance(code, cfg.budget)}")
    except BudgetExceededError:
        summary.append("distance = (beyond budget)")
    except ValueError:
        summary.append("distance = (no nonzero codewords)")
    out = sys.stdout if cfg.output is not None else sys.stderr
    print("\n".join(summary), file=out)
    return EXIT_OK


def _need(value, flag: str):
    if value is None:
        raise CliError(f"{flag} is required for this construction")
    return value


# -- nest -------------------------------------------------------------------

def cmd_nest(args: argparse.Namespace, cfg: RunConfig) -> int:
    chain = load_chain(args.chain, cfg.budget)
    code = chain.code
    if cfg.output is not None:
        codes.write_pchk(code, cfg.output)
    lines = [
        f"levels = {len(chain.levels)}",
        f"n = {code.n}",
        f"k = {code.k}",
        f"rate = {code.rate}",
        f"rate_bound = {chain.rate_bound}",
        f"radius = {chain.radius}",
    ]
    first = chain.levels[0].code.n
    lines.append(f"level 1: n = {first} queries = {first}")
    terms = [str(first)]
    for j, (level, t) in enumerate(zip(chain.levels[1:], chain.reps), start=2):
        lines.append(
            f"level {j}: n = {level.code.n} t = {t} q = {level.tester.q} "
            f"queries = {t * level.tester.q} rate_bound = {chain.rate_bounds[j - 1]} radius = {chain.radii[j - 1]}"
        )
        terms.append(f"{t}*{level.tester.q}")
    lines.append(f"queries = n1 + Σ t_j*q_j = {' + '.join(terms)} = {chain.query_bound}")
    print("\n".join(lines))
    return EXIT_OK


# -- verify / measure -------------------------------------------------------

def _write_reports(reports: list[analysis.VerificationReport], args: argparse.Namespace) -> None:
    csv_text = analysis.reports_to_csv(reports)
    if args.csv is not None:
        Path(args.csv).write_text(csv_text, encoding="utf-8", newline="\n")
    if args.json is not None:
        body = "[" + ",".join(r.to_json() for r in reports) + "]\n"
        Path(args.json).write_text(body, encoding="utf-8", newline="\n")
    if args.csv is None and args.json is None:
        sys.stdout.write(csv_text)


def _report_lines(r: analysis.VerificationReport) -> None:
    status = "PASS" if r.passed else "FAIL"
    note(f"{status} {r.kind} code={r.code} min={r.min_success} sweep={r.sweep_size} exhaustive={int(r.exhaustive)}")
    if r.ci is not None:
        note(f"  99% Clopper-Pearson interval [{r.ci[0]:.6f}, {r.ci[1]:.6f}] over {r.samples} samples")
    if r.counterexample:
        note(f"  counterexample: {r.counterexample}")


def _tester_for(args: argparse.Namespace) -> tuple[LinearCode, object]:
    if args.code is None:
        raise CliError("tester checks need --code")
    code = load_code(args.code)
    tester = nesting.make_tester(code, args.tester)
    return tester.code, tester


def cmd_verify(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.tester is not None:
        code, tester = _tester_for(args)
        result = analysis.measure_testability(
            code, tester, mode="mc" if args.mc else "exact", samples=args.samples, seed=cfg.seed, budget=cfg.budget
        )
        reports = [analysis.report_testability(code, tester, result, args.kappa_threshold, cfg.seed)]
    else:
        m = load_corrector(args, cfg)
        model = analysis.CorruptionModel(args.model, args.weight, cfg.seed)
        reports = [analysis.verify_completeness(m, cfg.budget, cfg.seed, cfg.threads, args.samples)]
        if args.mc:
            reports.append(
                analysis.mc_soundness(m, model, args.radius, args.pairs, args.samples, cfg.threads)
            )
        else:
            reports.append(analysis.soundness_sweep(m, model, args.radius, cfg.budget, cfg.threads, args.trials))
    for r in reports:
        _report_lines(r)
    _write_reports(reports, args)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_measure(args: argparse.Namespace, cfg: RunConfig) -> int:
    code, tester = _tester_for(args)
    result = analysis.measure_testability(code, tester, mode=args.mode, samples=args.samples, seed=cfg.seed, budget=cfg.budget)
    print(f"code = {code.name}")
    print(f"tester = {tester.name} q = {tester.q}")
    print(f"kappa = {result.kappa}")
    print(f"kappa_clamped = {result.clamped}")
    print(f"witness = {result.witness} reject = {result.witness_reject} distance = {result.witness_distance}")
    print(f"words = {result.words} exhaustive = {int(result.exhaustive)}")
    return EXIT_OK


# -- params -----------------------------------------------------------------

def cmd_params(args: argparse.Namespace, cfg: RunConfig) -> int:
    try:
        constants = params.Constants.load(cfg.constants)
    except (OSError, ValueError) as exc:
        raise CliError(f"bad constants file: {exc}") from None
    print(params.BANNER)
    if args.dellm is not None:
        fam = params.dellm_params(args.dellm, constants)
        print(f"epsilon = {fam.epsilon}")
        print(f"p = {fam.p}")
        print(f"delta = {fam.delta}")
        print(f"kappa = {fam.kappa}")
        print(f"q = {fam.q}")
        print("j\tn_j")
        for j in range(1, args.levels + 1):
            print(f"{j}\t{fam.block_length(j)}")
    elif args.family is not None:
        fam = params.family_params(args.family, constants)
        print(f"N = {fam.N}")
        print(f"log N = {fmt(fam.log_n)}")
        print(f"p = {fam.p}")
        print(f"p(p^2+1) = {fam.p * (fam.p**2 + 1)}")
        print(f"m = {fam.m}")
        print(f"epsilon_ltc = {fmt(fam.epsilon_ltc)}")
        print(f"delta_ltc = {fmt(fam.delta_ltc)}")
        print(f"kappa_ltc = {fmt(fam.kappa_ltc)}")
        print(f"q_ltc = {fmt(fam.q_ltc)}")
        print("j\tn_j\tratio")
        for j, nj in enumerate(fam.lengths, start=1):
            print(f"{j}\t{nj}\t{params.length_ratio(fam.p, j)}")
    elif args.headline is not None:
        out = params.headline_bounds(
            args.headline, constants, q=args.q, kappa=args.kappa, rate=args.rate, epsilon=args.epsilon
        )
        for key, value in out.items():
            print(f"{key} = {fmt(value)}")
    else:
        rate, delta = args.gv
        point = params.gv_epsilon(rate, delta)
        print(f"epsilon = {fmt(point.epsilon)}")
        print(f"feasible = {'yes' if point.feasible else 'no (infeasible pair)'}")
    return EXIT_OK


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace, cfg: RunConfig) -> int:
    m = load_corrector(args, cfg)
    model = analysis.CorruptionModel(args.model, args.weight, cfg.seed)
    rows = analysis.simulate(m, model, args.trials, cfg.threads)
    emit(analysis.simulation_to_csv(rows), cfg.output)
    total = max(len(rows), 1)
    good = sum(r["corrected"] + r["bottom"] for r in rows)
    note(f"trials = {len(rows)} corrected_or_bottom = {good}/{total}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="enumeration budget (default 2^24)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default LOCCODE_THREADS or CPU count)")

    parser = argparse.ArgumentParser(prog="loccode", description="Relaxed locally correctable codes by nesting.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="write a parity-check file")
    p.add_argument("kind", choices=("parity", "hamming", "ldpc", "tensor"))
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--row-weight", type=int)
    p.add_argument("--a", type=code_spec, help="first tensor factor (parity<n>, hamming<r> or file)")
    p.add_argument("--b", type=code_spec, help="second tensor factor")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("nest", parents=[common], help="fold a chain descriptor into one code")
    p.add_argument("chain")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_nest)

    def procedure_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--chain")
        p.add_argument("--code")
        p.add_argument("--procedure", choices=("full", "nested", "bottom"), default="nested")
        p.add_argument("--repetitions", type=int, help="override t at the last level")
        p.add_argument("--model", choices=analysis.CORRUPTION_KINDS, default="exhaustive")
        p.add_argument("--weight", type=int, default=0, help="errors per corrupted word")

    p = sub.add_parser("verify", parents=[common], help="check corrector or tester contracts")
    procedure_flags(p)
    p.add_argument("--tester", choices=sorted(nesting.TESTER_KINDS), help="check a tester instead of a corrector")
    p.add_argument("--kappa-threshold", type=fraction_arg, default=Fraction(0))
    p.add_argument("--radius", type=fraction_arg, help="soundness radius (default: the corrector's)")
    p.add_argument("--trials", type=int, default=200, help="corrupted words for random models")
    p.add_argument("--mc", action="store_true", help="Monte Carlo instead of exact probabilities")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--pairs", type=int, default=8, help="(w, i) pairs in Monte Carlo soundness")
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("measure", parents=[common], help="measure tester testability")
    p.add_argument("--code", required=True)
    p.add_argument("--tester", choices=sorted(nesting.TESTER_KINDS), default="parity")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("params", parents=[common], help="evaluate parameter formulas")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dellm", type=fraction_arg, metavar="EPS")
    g.add_argument("--family", type=big_int_arg, metavar="N")
    g.add_argument("--headline", type=big_int_arg, metavar="N")
    g.add_argument("--gv", type=fraction_arg, nargs=2, metavar=("R", "DELTA"))
    p.add_argument("--levels", type=int, default=3, help="rows of the --dellm table")
    p.add_argument("--q", type=fraction_arg, default=Fraction(1))
    p.add_argument("--kappa", type=fraction_arg, default=Fraction(1))
    p.add_argument("--rate", type=fraction_arg)
    p.add_argument("--epsilon", type=fraction_arg)
    p.add_argument("--constants", help="JSON file of hidden constants")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("simulate", parents=[common], help="per-trial corruption experiment as CSV")
    procedure_flags(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        if cfg.threads < 1:
            raise CliError("--threads must be positive")
        return args.func(args, cfg)
    except CliError as exc:
        note(f"error: {exc}")
        return exc.code
    except BudgetExceededError as exc:
        note(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    except (ValueError, IndexError, ArithmeticError) as exc:
        note(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
