"""Command-line front end: ``analyze``, ``pattern``, ``simulate``, ``sweep``, ``verify``.

Rational flags are written ``a/b``.  Unless ``--exact`` or ``--float`` is
given, a run is exact when every numeric flag is an integer or a fraction and
floating-point otherwise.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 computation
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import __version__
from .params import MixtureSpec, ModelParams, ParameterError, PatternSpec
from .scalar import EXACT, FLOAT, format_scalar, json_scalar, parse_scalar

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3

SWEEP_COLUMNS = ("r", "s", "N", "rho", "gamma_equiv", "mu", "sigma2", "method", "mode")
SWEEP_VARS = ("gamma", "rho", "N", "rs")


class UsageError(Exception):
    """Invalid flags; reported with exit code 2."""


# -- flag parsing ----------------------------------------------------------------


def _looks_exact(text: str) -> bool:
    s = text.strip()
    return "/" in s or s.lstrip("+-").isdigit()


def _mode(args, *texts) -> str:
    if getattr(args, "exact", False):
        return EXACT
    if getattr(args, "float", False):
        return FLOAT
    return EXACT if all(_looks_exact(t) for t in texts if t is not None) else FLOAT


def _num(text: str, mode: str, name: str):
    try:
        return parse_scalar(text, mode)
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _size(text: str, allow_inf: bool = False, minimum: int = 2):
    s = text.strip().lower()
    if allow_inf and s in ("inf", "oo", "infinity"):
        return math.inf
    try:
        v = int(s)
    except ValueError:
        raise UsageError(f"--N must be an integer{' or inf' if allow_inf else ''}, got {text!r}") from None
    if v < minimum:
        raise UsageError(f"--N must be at least {minimum}, got {v}")
    return v


def _params(rho, eps, mode) -> ModelParams:
    try:
        # N is validated separately, it may be infinite here
        return ModelParams(rho, eps, 2, mode)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


def _txt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _show(x) -> str:
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{x}  (~{float(x):.12g})"
    if isinstance(x, float):
        return format(x, ".15g")
    return str(x)


def _echo(**kw) -> str:
    return "parameters: " + " ".join(f"{k}={_txt(v)}" for k, v in kw.items())


def _jsonable(kw: dict) -> dict:
    out = {}
    for k, v in kw.items():
        if isinstance(v, (Fraction, float)):
            out[k] = json_scalar(v)
        elif v == math.inf:
            out[k] = "inf"
        else:
            out[k] = v
    return out


def _emit(args, params: dict, values: dict, extra_text: list | None = None):
    if args.json:
        print(json.dumps({"parameters": _jsonable(params),
                          **{k: (json_scalar(v) if isinstance(v, (Fraction, float, int)) and not isinstance(v, bool)
                                 else v) for k, v in values.items()}}, indent=2))
        return
    print(_echo(**params))
    for k, v in values.items():
        if isinstance(v, (list, dict)):
            continue
        print(f"{k} = {_show(v)}")
    for line in extra_text or ():
        print(line)


# -- analyze -----------------------------------------------------------------------


def cmd_analyze(args) -> int:
    from .asymptotics import mixture_limit
    from .markov import mixture_lumped_chains, mixture_ensemble_stats, stationary

    mode = _mode(args, args.rho, args.eps, args.gamma)
    rho, eps, gamma = (_num(args.rho, mode, "rho"), _num(args.eps, mode, "eps"), _num(args.gamma, mode, "gamma"))
    N = _size(args.N, allow_inf=True)
    try:
        MixtureSpec(gamma)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    coins = _params(rho, eps, mode).coins
    if N == math.inf and mode != EXACT:
        raise UsageError("--N inf needs exact (rational) parameters")
    echo = dict(rho=rho, eps=eps, gamma=gamma, N=N, mode=mode)

    if N == math.inf:
        st = mixture_limit(gamma, coins)
        values = {"mu": st.mu, "sigma2": st.sigma2, "N_mu_one": st.mu_one,
                  "N_sigma2_one": st.sigma2_one, "N2_sigma12": st.sigma12}
        _emit(args, echo, values)
        return EXIT_OK

    st = mixture_ensemble_stats(N, gamma, coins)
    one, pair = mixture_lumped_chains(N, gamma, coins)
    pi1 = stationary(one.P).pi
    pi2 = stationary(pair.P).pi
    values = {"mu": st.mu, "sigma2": st.sigma2, "mu_one": st.mu_one, "sigma2_one": st.sigma2_one,
              "sigma12": st.sigma12, "sample_variance_slope": st.sample_variance_slope,
              "sigma2_positive": bool(st.sigma2 > 0),
              "pi_one": [json_scalar(x) for x in pi1],
              "pi_pair": {f"{a},{b}": json_scalar(pi2[3 * a + b]) for a in range(3) for b in range(3)}}
    text = ["stationary law of one player's capital mod 3: "
            + ", ".join(f"pi({k}) = {_txt(x)}" for k, x in enumerate(pi1)),
            "stationary law of a pair, P(x1 = x2 = 0) = " + _txt(pi2[0])]
    _emit(args, echo, values, text)
    return EXIT_OK


# -- pattern -----------------------------------------------------------------------


def cmd_pattern(args) -> int:
    from .asymptotics import pattern_limit
    from .patterns import pattern_ensemble_stats

    mode = _mode(args, args.rho, args.eps)
    rho, eps = _num(args.rho, mode, "rho"), _num(args.eps, mode, "eps")
    try:
        spec = PatternSpec(args.r, args.s)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    if args.N is None and not args.limit:
        raise UsageError("give --N, --limit, or both")
    N = _size(args.N) if args.N is not None else None
    if args.limit and mode != EXACT:
        raise UsageError("--limit needs exact (rational) parameters")
    coins = _params(rho, eps, mode).coins
    echo = dict(rho=rho, eps=eps, r=spec.r, s=spec.s, N=N if N is not None else "inf", mode=mode,
                gamma_equiv=spec.gamma_equiv)
    values: dict = {}
    text = []
    if N is not None:
        by = {m: pattern_ensemble_stats(spec.r, spec.s, N, coins, m) for m in ("cycle", "phase")}
        c, p = by["cycle"], by["phase"]
        values.update({"mu": c.mu, "sigma2": c.sigma2, "sigma12": c.sigma12,
                       "sample_variance_slope": c.sample_variance_slope,
                       "mu_phase_chain": p.mu, "sigma2_phase_chain": p.sigma2})
        if mode == EXACT:
            agree = c.mu == p.mu and c.sigma2 == p.sigma2
        else:
            agree = abs(c.mu - p.mu) <= 1e-10 and abs(c.sigma2 - p.sigma2) <= 1e-10 * max(1.0, abs(c.sigma2))
        values["methods_agree"] = bool(agree)
        text.append("methods: one-period sums (mu, sigma2) and phase-augmented chain (*_phase_chain)")
    if args.limit:
        lim = pattern_limit(spec.r, spec.s, coins)
        values.update({"mu_limit": lim.mu, "sigma2_limit": lim.sigma2})
    _emit(args, echo, values, text)
    if N is not None and not values["methods_agree"]:
        print("error: the two methods disagree", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


# -- simulate ----------------------------------------------------------------------


def _trace_points(text: str | None, n: int) -> tuple:
    if not text:
        return ()
    if text.startswith("every:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad --trace {text!r}") from None
        if k < 1:
            raise UsageError("--trace every:K needs K >= 1")
        return tuple(range(k, n + 1, k))
    try:
        pts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--trace must be 'every:K' or a comma list of turns, got {text!r}") from None
    if min(pts) < 1 or max(pts) > n:
        raise UsageError("--trace turns must lie in [1, n]")
    return pts


def cmd_simulate(args) -> int:
    from .simulator import PURE_APRIME, PURE_B, SimConfig, default_threads, simulate

    rho, eps = _num(args.rho, FLOAT, "rho"), _num(args.eps, FLOAT, "eps")
    N = _size(args.N)
    if args.n < 1 or args.R < 1:
        raise UsageError("--n and --R must be at least 1")
    chosen = [args.gamma is not None, args.r is not None or args.s is not None, args.game is not None]
    if sum(chosen) != 1:
        raise UsageError("choose exactly one schedule: --gamma, --r/--s, or --game")
    try:
        if args.gamma is not None:
            schedule = MixtureSpec(_num(args.gamma, FLOAT, "gamma"))
        elif args.game is not None:
            schedule = {"A'": PURE_APRIME, "A": PURE_APRIME, "B": PURE_B}[args.game]
        else:
            if args.r is None or args.s is None:
                raise UsageError("a pattern needs both --r and --s")
            schedule = PatternSpec(args.r, args.s)
        params = ModelParams(rho, eps, N, FLOAT)
        cfg = SimConfig(params, schedule, args.n, args.R, args.seed, _trace_points(args.trace, args.n))
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    if args.trace and not args.trace_out:
        raise UsageError("--trace needs --trace-out")
    trace_fh = _open_out(args.trace_out) if args.trace_out else None
    threads = args.threads or default_threads()
    res = simulate(cfg, threads)
    out = res.to_dict()
    out["threads"] = threads
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        desc = cfg.describe()
        sch = desc.pop("schedule")
        print(_echo(**desc, **{f"schedule_{k}": v for k, v in sch.items()}))
        print(f"rng = {out['rng']}")
        for k in ("mean_slope", "variance_slope", "sample_variance_slope"):
            e = out[k]
            print(f"{k} = {e['value']:.10g} +/- {e['se']:.3g}")
    if trace_fh is not None:
        with trace_fh:
            trace_fh.write(res.trace_csv())
    return EXIT_OK


# -- sweep -------------------------------------------------------------------------


def _open_out(path: str):
    if path == "-":
        return _Stdout()
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path!r}: {exc.strerror}") from None


class _Stdout(io.StringIO):
    def close(self):
        sys.stdout.write(self.getvalue())
        super().close()


def _range_values(text: str, mode: str, name: str) -> list:
    """``a,b,c`` or inclusive ``start:stop:step``."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"--range {text!r}: expected start:stop:step")
        a, b, h = (_num(p, mode, "range") for p in parts)
        if not h > 0 or b < a:
            raise UsageError(f"--range {text!r}: need step > 0 and stop >= start")
        count = int(math.floor((b - a) / h + 1e-9)) + 1
        vals = [a + k * h for k in range(count)]
        if mode == FLOAT:
            vals = [round(v, 12) for v in vals]
        return vals
    return [_num(p, mode, name) for p in text.split(",") if p.strip()]


def _rs_values(text: str) -> list:
    """``r-s`` pairs separated by commas, or ``lo:hi`` for the full square grid."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return [(r, s) for r in range(lo, hi + 1) for s in range(lo, hi + 1)]
        return [tuple(int(x) for x in item.split("-")) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"--range {text!r}: expected 'r-s,r-s,...' or 'lo:hi'") from None


def _sweep_row(task):
    from .asymptotics import mixture_limit
    from .markov import mixture_ensemble_stats
    from .patterns import pattern_ensemble_stats

    kind, rho, eps, mode, N, gamma, r, s = task
    coins = ModelParams(rho, eps, 2, mode).coins
    if kind == "mixture":
        if N == math.inf:
            st, method = mixture_limit(gamma, coins), "limit"
        else:
            st, method = mixture_ensemble_stats(N, gamma, coins), "mixture"
        g, rr, ss = gamma, "", ""
    else:
        st = pattern_ensemble_stats(r, s, N, coins)
        method = "limit" if N == math.inf else "engine"
        g, rr, ss = Fraction(r, r + s), r, s
    return {"r": rr, "s": ss, "N": "inf" if N == math.inf else N, "rho": format_scalar(rho),
            "gamma_equiv": format_scalar(g), "mu": format_scalar(st.mu), "sigma2": format_scalar(st.sigma2),
            "method": method, "mode": mode}


def cmd_sweep(args) -> int:
    from .simulator import default_threads

    if args.var not in SWEEP_VARS:
        raise UsageError(f"--var must be one of {SWEEP_VARS}")
    texts = [args.rho, args.eps]
    if args.gamma is not None:
        texts.append(args.gamma)
    if args.var in ("gamma", "rho"):
        texts.extend(p for p in args.range.replace(":", ",").split(",") if p.strip())
    mode = _mode(args, *texts)
    rho, eps = _num(args.rho, mode, "rho"), _num(args.eps, mode, "eps")
    gamma = _num(args.gamma, mode, "gamma") if args.gamma is not None else None
    pattern = args.var == "rs" or args.r is not None or args.s is not None
    if pattern and gamma is not None:
        raise UsageError("a sweep is over a mixture (--gamma) or a pattern (--r/--s), not both")
    if not pattern and gamma is None and args.var != "gamma":
        raise UsageError("a mixture sweep needs --gamma")
    if pattern and args.var == "gamma":
        raise UsageError("--var gamma applies to mixtures only")
    if pattern and args.var != "rs":
        try:
            PatternSpec(args.r, args.s)
        except (ParameterError, TypeError):
            raise UsageError("a pattern sweep needs --r and --s") from None

    if args.var == "N":
        Ns = [_size(p, allow_inf=True) for p in args.range.split(",")] if ":" not in args.range else \
            [int(v) for v in _range_values(args.range, EXACT, "range")]
        for v in Ns:
            if v != math.inf and v < 2:
                raise UsageError("N values must be at least 2")
    else:
        if args.N is None:
            raise UsageError("--N is required unless sweeping N")
        Ns = [_size(args.N, allow_inf=True)]
    if math.inf in Ns and mode != EXACT:
        raise UsageError("N = inf needs exact (rational) parameters")

    kind = "pattern" if pattern else "mixture"
    tasks = []
    if args.var == "gamma":
        for g in _range_values(args.range, mode, "range"):
            tasks.append((kind, rho, eps, mode, Ns[0], g, None, None))
    elif args.var == "rho":
        for x in _range_values(args.range, mode, "range"):
            tasks.append((kind, x, eps, mode, Ns[0], gamma, args.r, args.s))
    elif args.var == "N":
        for n in Ns:
            tasks.append((kind, rho, eps, mode, n, gamma, args.r, args.s))
    else:
        for r, s in _rs_values(args.range):
            tasks.append(("pattern", rho, eps, mode, Ns[0], None, r, s))
    if not tasks:
        raise UsageError("--range is empty")
    for t in tasks:
        try:
            ModelParams(t[1], t[2], 2, mode)
            if t[0] == "mixture":
                MixtureSpec(t[5])
            else:
                PatternSpec(t[6], t[7])
        except (ParameterError, TypeError) as exc:
            raise UsageError(f"invalid grid point: {exc}") from None

    fh = _open_out(args.out)
    threads = args.threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    with fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(_echo(var=args.var, range=args.range, rho=rho, eps=eps,
                gamma=gamma if gamma is not None else "-", N=args.N or "-", mode=mode,
                rows=len(rows), out=args.out), file=sys.stderr)
    return EXIT_OK


# -- verify ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .checks import REGISTRY, case_ids, run_case

    if args.formula:
        return _evaluate_formula(args)
    if args.list:
        for k, c in REGISTRY.items():
            print(f"{k}{'  [slow]' if c.slow else ''}  {c.description}")
        return EXIT_OK
    if args.case:
        unknown = [c for c in args.case if c not in REGISTRY]
        if unknown:
            raise UsageError(f"unknown case(s): {', '.join(unknown)}; see --list")
        ids = args.case
    else:
        ids = case_ids(include_slow=args.all)
    results = []
    for cid in ids:
        try:
            res = run_case(cid)
        except Exception as exc:  # a crashing check counts as a failure, the suite goes on
            from .checks import CheckResult

            res = CheckResult(cid, False, detail=f"error: {type(exc).__name__}: {exc}")
        results.append(res)
        if not args.json:
            print(res.line(), flush=True)
    failed = [r.case_id for r in results if not r.passed]
    if args.json:
        print(json.dumps({"parameters": {"cases": ids}, "results": [r.to_dict() for r in results],
                          "failed": failed}, indent=2))
    else:
        print(f"summary: {len(results) - len(failed)}/{len(results)} passed"
              + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_FAIL if failed else EXIT_OK


def _evaluate_formula(args) -> int:
    from .formulas import FORMULAS, evaluate

    if args.formula not in FORMULAS:
        raise UsageError(f"unknown formula id {args.formula!r}; known: {', '.join(FORMULAS)}")
    inputs = {}
    for item in args.at or ():
        if "=" not in item:
            raise UsageError(f"--at expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        if k in ("r", "s", "N"):
            try:
                inputs[k] = int(v)
            except ValueError:
                raise UsageError(f"{k} must be an integer") from None
        elif k == "kind":
            inputs[k] = v
        else:
            inputs[k] = _num(v, EXACT if _looks_exact(v) else FLOAT, k)
    try:
        res = evaluate(args.formula, **inputs)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        print(json.dumps(res.to_dict(), indent=2, default=str))
    else:
        print(_echo(formula=args.formula, **inputs))
        v = res.value
        if isinstance(v, tuple):
            print("value = (" + ", ".join(_txt(x) for x in v) + ")")
        elif isinstance(v, dict):
            for k, x in v.items():
                print(f"value{k} = {_txt(x)}")
        else:
            print(f"value = {_show(v)}")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _mode_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="exact rational arithmetic (decimals read as rationals)")
    g.add_argument("--float", action="store_true", help="floating-point arithmetic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parrondo-ensemble", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="random mixture of A' and B")
    p.add_argument("--rho", required=True)
    p.add_argument("--eps", default="0")
    p.add_argument("--gamma", default="1/2", help="probability of playing A' (default 1/2)")
    p.add_argument("--N", required=True, help="number of players, or 'inf' for the exact limit")
    _mode_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pattern", help="periodic pattern (A')^r B^s")
    p.add_argument("--rho", required=True)
    p.add_argument("--eps", default="0")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--N")
    p.add_argument("--limit", action="store_true", help="also report the N -> oo values")
    _mode_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("simulate", help="seeded Monte Carlo replications")
    p.add_argument("--rho", required=True)
    p.add_argument("--eps", default="0")
    p.add_argument("--N", required=True)
    p.add_argument("--gamma")
    p.add_argument("--r", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--game", choices=("A'", "A", "B"), help="play a single game")
    p.add_argument("--n", type=int, default=10 ** 5, help="turns per replication")
    p.add_argument("--R", type=int, default=100, help="replications")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help="worker threads (default: $PARRONDO_THREADS or 1)")
    p.add_argument("--trace", help="'every:K' or comma-separated turns at which to record S_n")
    p.add_argument("--trace-out", help="CSV file for the replication-averaged trace ('-' for stdout)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="CSV table over a parameter grid")
    p.add_argument("--var", required=True, choices=SWEEP_VARS)
    p.add_argument("--range", required=True,
                   help="'a,b,c', inclusive 'start:stop:step'; for rs 'r-s,...' or 'lo:hi'")
    p.add_argument("--out", default="-", help="output CSV ('-' for stdout)")
    p.add_argument("--rho", default="1/3")
    p.add_argument("--eps", default="0")
    p.add_argument("--gamma")
    p.add_argument("--r", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--N")
    p.add_argument("--threads", type=int)
    _mode_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run registered reproduction and property checks")
    p.add_argument("--case", action="append", help="case id (repeatable)")
    p.add_argument("--all", action="store_true", help="include the slow Monte Carlo cases")
    p.add_argument("--list", action="store_true", help="list case ids")
    p.add_argument("--formula", help="evaluate a closed form by id instead of running checks")
    p.add_argument("--at", nargs="*", help="formula inputs as name=value")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
