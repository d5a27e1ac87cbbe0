"""Command-line interface.

Every command writes JSON lines (default) or CSV to stdout. Each record
carries ``schema_version`` and the parameters it was computed from. Errors go
to stderr as a single JSON object and the process exits nonzero.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .combinatorics import FOCK, MODEL_KINDS
from .ensemble import estimate_moments, sawtooth_check
from .errors import DivergenceError, InvalidArgument, PdbosonError, SizeLimitError, UnsupportedError
from .exact import coefficient_series
from .io import read_matrix
from .linalg import RngStream, check_unitary, haar_random_unitary
from .models import build_model, check_overlap, photon_number
from .permanents import permanent_definition, permanent_fast
from .sampler import (empirical_distribution, mcmc_sample, total_variation,
                      truncated_distribution)
from .truncated import (build_m_gfp, error_bound, gbs_classical_bruteforce, gfp_normalization,
                        truncated_terms)

SCHEMA_VERSION = 1
MAX_TRIALS = 10 ** 6
MAX_N = 64
MAX_SAMPLES = 10 ** 7

# most specific first: DivergenceError subclasses InvalidArgument
EXIT_CODES = {DivergenceError: 5, InvalidArgument: 2, SizeLimitError: 3, UnsupportedError: 4}


class UsageError(InvalidArgument):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _ints(text: str) -> list:
    try:
        return [int(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError:
        raise InvalidArgument(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list:
    try:
        return [float(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError:
        raise InvalidArgument(f"expected comma-separated numbers, got {text!r}") from None


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _plain(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (tuple, list, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def emit(records, fmt: str, stream) -> None:
    records = [{"schema_version": SCHEMA_VERSION, **{k: _plain(v) for k, v in r.items()}}
               for r in records]
    if fmt == "jsonl":
        for r in records:
            stream.write(json.dumps(r, allow_nan=True) + "\n")
        return
    fields = []
    for r in records:
        fields.extend(k for k in r if k not in fields)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, restval="", lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: " ".join(map(str, v)) if isinstance(v, list) else v for k, v in r.items()})
    stream.write(buf.getvalue())


# --------------------------------------------------------------------------
# Shared argument groups
# --------------------------------------------------------------------------

def _add_common(p, seed_required=False):
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--config", help="flat key=value file; explicit flags override it")
    p.add_argument("--seed", type=int, required=seed_required)


def _add_model(p):
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--m", type=int, help="detected photons")
    p.add_argument("--n", type=int, help="sources (sbs) or modes (gbs)")
    p.add_argument("--modes", help="fock input modes, comma-separated (default 0..m-1)")
    p.add_argument("--alpha", type=float, default=math.pi / 4)
    p.add_argument("--r", type=float, default=0.1)
    p.add_argument("--phase", type=float, default=0.0)


def _add_unitary(p):
    p.add_argument("--N", type=int, help="interferometer modes when drawing a Haar unitary")
    p.add_argument("--unitary", help="matrix file to use instead of a random unitary")
    p.add_argument("--output", help="detector modes, comma-separated (default 0..m-1)")


def _model_from(args):
    modes = _ints(args.modes) if args.modes else None
    if args.model == FOCK and modes is None and args.m is None:
        raise InvalidArgument("fock model needs --m or --modes")
    if args.model != FOCK and args.n is None:
        raise InvalidArgument(f"{args.model} model needs --n")
    model = build_model(args.model, n=args.n if args.model != FOCK else args.m, modes=modes,
                        alpha=args.alpha, r=args.r, phase=args.phase)
    m = photon_number(model, args.m)
    return model, m


def _unitary_from(args):
    if args.unitary:
        return check_unitary(read_matrix(args.unitary))
    if args.N is None or args.seed is None:
        raise InvalidArgument("a random unitary needs --N and --seed (or pass --unitary)")
    if not 1 <= args.N <= MAX_N:
        raise SizeLimitError(f"--N must lie in [1, {MAX_N}]")
    return haar_random_unitary(args.N, RngStream(args.seed))


def _output_from(args, m):
    return tuple(_ints(args.output)) if args.output else tuple(range(m))


def _model_params(args, model, m):
    rec = {"model": model.kind, "m": m}
    if model.kind == FOCK:
        rec["modes"] = list(model.modes)
    else:
        rec["n"] = model.n
        rec["mean_photons"] = model.mean_photons
    return rec


def _check_trials(trials):
    if not 2 <= trials <= MAX_TRIALS:
        raise SizeLimitError(f"--trials must lie in [2, {MAX_TRIALS}]")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_permanent(args):
    A = read_matrix(args.matrix)
    value = permanent_definition(A) if args.method == "definition" else permanent_fast(A)
    value = complex(value)
    return [{"n": A.shape[0], "method": args.method, "re": value.real, "im": value.imag}]


def cmd_prob(args):
    check_overlap(args.x)
    model, m = _model_from(args)
    U = _unitary_from(args)
    output = _output_from(args, m)
    series = coefficient_series(U, model, output)
    k = m if args.k is None else args.k
    terms = truncated_terms(U, model, output, k)
    truncated = float(np.dot(terms, args.x ** np.arange(len(terms))))
    return [{**_model_params(args, model, m), "N": U.shape[0], "seed": args.seed,
             "output": list(output), "x": args.x, "k": k,
             "exact": series.evaluate(args.x), "truncated": truncated}]


def cmd_coeffs(args):
    model, m = _model_from(args)
    U = _unitary_from(args)
    output = _output_from(args, m)
    series = coefficient_series(U, model, output)
    base = {**_model_params(args, model, m), "N": U.shape[0], "seed": args.seed, "output": list(output)}
    return [{**base, "j": j, "c": float(c)} for j, c in enumerate(series.c)]


def cmd_scan_variance(args):
    _check_trials(args.trials)
    records = []
    for m in _ints(args.m):
        for n in _ints(args.n) if args.model != FOCK else [m]:
            for N in _ints(args.N) if args.N else [2 * n]:
                if N > MAX_N:
                    raise SizeLimitError(f"N={N} exceeds {MAX_N}")
                report = estimate_moments(args.model, m, n, N, args.trials, args.seed, args.workers)
                records.extend(report.rows())
    return records


def cmd_sawtooth(args):
    _check_trials(args.trials)
    rep = sawtooth_check(args.n, args.m, args.N, args.trials, args.seed, args.workers)
    base = {"n": rep.n, "m": rep.m, "N": rep.N, "trials": rep.trials, "seed": rep.seed}
    nan = float("nan")
    return [{**base, "j": j, "gbs_mean_abs": float(rep.mean_abs[j]),
             "fock_mean_abs": float(rep.control_mean_abs[j]),
             "gbs_odd_ratio": rep.ratios.get(j, nan), "fock_odd_ratio": rep.control_ratios.get(j, nan)}
            for j in range(rep.m + 1)]


def cmd_verify_gfp(args):
    _check_trials(args.trials)
    gen = RngStream(args.seed).generator()
    records = []
    for n in _ints(args.n):
        for m in _ints(args.m):
            if m > n:
                continue
            stated = corrected = 0.0
            for _ in range(args.trials):
                Mabs = gen.random((m, n))
                perm = float(permanent_fast(build_m_gfp(Mabs, n, m)))
                brute = gbs_classical_bruteforce(Mabs, n, m)
                stated = max(stated, abs(perm / (2 ** m * math.factorial(m)) - brute) / brute)
                corrected = max(corrected, abs(perm / gfp_normalization(n, m) - brute) / brute)
            records.append({"n": n, "m": m, "trials": args.trials, "seed": args.seed,
                            "normalization": gfp_normalization(n, m),
                            "max_rel_err_stated": stated, "max_rel_err_corrected": corrected})
    return records


def cmd_error_bound(args):
    return [{"x": x, "k": k, "bound": error_bound(x, k)}
            for x in _floats(args.x) for k in _ints(args.k)]


def cmd_sample(args):
    if not 0 <= args.count <= MAX_SAMPLES:
        raise SizeLimitError(f"--count must lie in [0, {MAX_SAMPLES}]")
    model, m = _model_from(args)
    U = _unitary_from(args)
    k = m if args.k is None else args.k
    res = mcmc_sample(U, model, args.x, k, args.count, args.burn_in, args.thinning, args.seed, m)
    records = [{"record": "sample", "index": i, "pattern": list(s)} for i, s in enumerate(res.samples)]
    summary = {"record": "summary", **_model_params(args, model, m), "N": U.shape[0], "x": args.x,
               "k": k, "seed": args.seed, "count": args.count, "burn_in": args.burn_in,
               "thinning": args.thinning, "acceptance_rate": res.acceptance_rate}
    if args.tv and res.samples:
        try:
            target = truncated_distribution(U, model, args.x, k, m)
            summary["tv"] = total_variation(empirical_distribution(res.samples), target.probs,
                                            fill_missing=True)
            summary["clipped_mass"] = target.clipped_mass
        except SizeLimitError:
            summary["tv"] = None
    records.append(summary)
    return records


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdboson", description="Boson sampling with partially distinguishable photons.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("permanent", help="permanent of a matrix file")
    _add_common(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--method", choices=("fast", "definition"), default="fast")
    p.set_defaults(func=cmd_permanent)

    for name, func, helptext in (("prob", cmd_prob, "exact and truncated probability"),
                                 ("coeffs", cmd_coeffs, "coefficients c_j of P(x)")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        _add_model(p)
        _add_unitary(p)
        if name == "prob":
            p.add_argument("--x", type=float, required=True)
            p.add_argument("--k", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("scan-variance", help="Haar moments of c_j over a grid")
    _add_common(p, seed_required=True)
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--m", required=True, help="comma-separated")
    p.add_argument("--n", default="0", help="comma-separated (ignored for fock)")
    p.add_argument("--N", help="comma-separated (default 2n)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_scan_variance)

    p = sub.add_parser("sawtooth", help="odd-j suppression of GBS coefficients")
    _add_common(p, seed_required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sawtooth)

    p = sub.add_parser("verify-gfp", help="signed padded-matrix identity on random instances")
    _add_common(p, seed_required=True)
    p.add_argument("--n", default="2,4,6,8")
    p.add_argument("--m", default="2,4")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=cmd_verify_gfp)

    p = sub.add_parser("error-bound", help="truncation error bound table")
    _add_common(p)
    p.add_argument("--x", required=True, help="comma-separated")
    p.add_argument("--k", required=True, help="comma-separated")
    p.set_defaults(func=cmd_error_bound)

    p = sub.add_parser("sample", help="MCMC samples from the truncated distribution")
    _add_common(p, seed_required=True)
    _add_model(p)
    _add_unitary(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--thinning", type=int, default=1)
    p.add_argument("--no-tv", dest="tv", action="store_false", help="skip the enumerated TV report")
    p.set_defaults(func=cmd_sample)
    return parser


def _config_tokens(path) -> list:
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidArgument(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            tokens += ["--" + key.replace("_", "-"), value]
    return tokens


def _expand_config(argv: list) -> list:
    """Insert config-file flags right after the subcommand so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a path")
    cmd = next((j for j, a in enumerate(argv) if not a.startswith("-")), None)
    if cmd is None:
        return argv
    return argv[:cmd + 1] + _config_tokens(argv[i + 1]) + argv[cmd + 1:]


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_expand_config(argv))
        emit(args.func(args), args.format, stdout)
        return 0
    except (PdbosonError, ValueError, ArithmeticError, OSError) as exc:
        code = next((c for cls, c in EXIT_CODES.items() if isinstance(exc, cls)), 1)
        err = {"schema_version": SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc),
               "exit_code": code}
        stderr.write(json.dumps(err) + "\n")
        return code


def main():
    sys.exit(run_command())
