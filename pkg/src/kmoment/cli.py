"""Command-line interface.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 usage or data error.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .conversion import (CorrelationSequence, DegreeError, MomentSequence, corr_to_moment,
                         moment_to_corr)
from .grid import GridSizeError, GridSpec
from .identities import SUITES, run_suites
from .io import (SchemaError, SequenceFile, dumps, file_digest, read_sequence,
                 report_to_dict, write_sequence)
from .oracles import (ModelSpec, bernoulli_correlations, dirichlet_subprob_moments,
                      fixed_config_moments, fixed_measure_moments, mc_correlations,
                      poisson_correlations, sample_bernoulli, sample_poisson)
from .realizability import (FAIL, INCONCLUSIVE, PASS, TestSetConfig, check_corr_multi,
                            check_corr_simple, check_multi_config, check_prob,
                            check_simple_config, check_subprob, check_subprob_alt,
                            check_thm_suff)

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
VERDICT_EXIT = {PASS: EXIT_PASS, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}

MOMENT_KINDS = ("subprob", "subprob-alt", "prob", "multi-config", "simple-config")
CORR_KINDS = ("corr-multi", "corr-simple", "thm-suff")

# extra degree each kind needs on top of 2r
KIND_EXTRA = {"subprob": 2, "subprob-alt": 1, "prob": 2, "simple-config": 2, "corr-simple": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _test_set(spec: str, seed: int) -> TestSetConfig:
    if spec == "indicators":
        return TestSetConfig(seed=seed)
    if spec.startswith("indicators+random:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad --test-set value {spec!r}") from None
        if k < 0:
            raise UsageError("random test-vector count must be >= 0")
        return TestSetConfig(n_random=k, seed=seed)
    raise UsageError(f"--test-set must be 'indicators' or 'indicators+random:K', got {spec!r}")


def _floats(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(",", " ").split()])
    except ValueError:
        raise UsageError(f"{name} must be a list of numbers") from None


def _vector(args, name: str):
    inline = getattr(args, name)
    path = getattr(args, f"{name}_file")
    if inline is None and path is None:
        return None
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            return _floats(fh.read().replace("[", " ").replace("]", " "), name)
    return _floats(inline, f"--{name}")


# ----------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    kind = args.kind
    sf = read_sequence(args.input)
    seq = sf.sequence
    if kind in MOMENT_KINDS and not isinstance(seq, MomentSequence):
        raise UsageError(f"check {kind} needs a moment-basis file, got basis {sf.basis!r}")
    if kind in CORR_KINDS and not isinstance(seq, CorrelationSequence):
        raise UsageError(f"check {kind} needs a correlation-basis file, got basis {sf.basis!r}")
    test_set = _test_set(args.test_set, args.seed)
    extra = KIND_EXTRA.get(kind, args.kmax if kind == "multi-config" else args.nmax)
    r = args.degree
    if r is None:
        r = max(0, min(3, (seq.truncation - extra) // 2))
    need = 2 * r + extra
    if need > seq.truncation:
        raise DegreeError(f"check {kind} at degree r={r} needs truncation D >= {need}, "
                          f"file has D = {seq.truncation}", need)
    horizon = args.horizon
    common = dict(r=r, tol=args.tol)
    start = time.perf_counter()
    if kind == "subprob":
        report = check_subprob(seq, test_set=test_set, **common)
    elif kind == "subprob-alt":
        report = check_subprob_alt(seq, test_set=test_set, **common)
    elif kind == "prob":
        report = check_prob(seq, test_set=test_set, tol_eq=args.tol_eq, **common)
    elif kind == "multi-config":
        report = check_multi_config(seq, k_max=args.kmax, test_set=test_set, horizon=horizon,
                                    **common)
    elif kind == "simple-config":
        report = check_simple_config(seq, test_set=test_set, tol_eq=args.tol_eq, horizon=horizon,
                                     sites=sf.grid.sites, **common)
    elif kind == "corr-multi":
        report = check_corr_multi(seq, n_max=args.nmax, test_set=test_set, horizon=horizon,
                                  **common)
    elif kind == "corr-simple":
        report = check_corr_simple(seq, test_set=test_set, tol_eq=args.tol_eq, horizon=horizon,
                                   sites=sf.grid.sites, **common)
    else:
        report = check_thm_suff(seq, sf.grid, n_max=args.nmax, horizon=horizon, **common)
    seconds = time.perf_counter() - start
    config = {
        "kind": kind, "degree": r, "tol": args.tol, "tol_eq": args.tol_eq, "kmax": args.kmax,
        "nmax": args.nmax, "horizon": horizon, "test_set": args.test_set, "seed": args.seed,
        "test_set_policy": test_set.describe(),
    }
    doc = report_to_dict(report, file_digest(args.input), config,
                         None if args.no_timing else seconds)
    text = dumps(doc)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    if not args.quiet:
        print(f"{kind}: {report.verdict}")
        for rec in report.failures:
            print(f"  failed: {rec.label}")
        bad_diag = [d.label for d in report.diagnostics if not d.passed]
        if report.determinacy is not None and not report.determinacy.consistent:
            bad_diag.append("determinacy growth")
        for label in bad_diag:
            print(f"  diagnostic not satisfied: {label}")
    return VERDICT_EXIT[report.verdict]


# ----------------------------------------------------------------------------
# convert, generate, verify


def cmd_convert(args) -> int:
    sf = read_sequence(args.input)
    if args.direction == "corr-to-moment":
        if not isinstance(sf.sequence, CorrelationSequence):
            raise UsageError(f"corr-to-moment needs a correlation-basis file, got {sf.basis!r}")
        out = corr_to_moment(sf.sequence)
    else:
        if not isinstance(sf.sequence, MomentSequence):
            raise UsageError(f"moment-to-corr needs a moment-basis file, got {sf.basis!r}")
        out = moment_to_corr(sf.sequence)
    write_sequence(args.output, SequenceFile(sf.grid, out, sf.provenance))
    return EXIT_PASS


def _grid_for(args, m: int, sigma=None) -> GridSpec:
    sites = args.sites.split(",") if args.sites else [f"s{i}" for i in range(m)]
    if len(sites) != m:
        raise UsageError(f"--sites lists {len(sites)} sites, model has {m}")
    return GridSpec(sites, sigma=sigma)


def cmd_generate(args) -> int:
    D = args.truncation
    if D < 0:
        raise UsageError("--truncation must be >= 0")
    provenance = {"model": args.model}
    model = args.model
    if model == "poisson":
        sigma = _vector(args, "sigma")
        if sigma is None:
            raise UsageError("poisson needs --sigma or --sigma-file")
        ModelSpec("poisson", {"sigma": sigma})
        provenance["sigma"] = sigma.tolist()
        grid = _grid_for(args, len(sigma), sigma)
        if args.samples:
            counts = sample_poisson(sigma, np.random.default_rng(args.seed), args.samples)
            seq = mc_correlations(counts, D)[0]
        else:
            seq = poisson_correlations(sigma, D)
    elif model == "bernoulli":
        p = _vector(args, "p")
        if p is None:
            raise UsageError("bernoulli needs --p or --p-file")
        ModelSpec("bernoulli", {"p": p})
        provenance["p"] = p.tolist()
        grid = _grid_for(args, len(p))
        if args.samples:
            counts = sample_bernoulli(p, np.random.default_rng(args.seed), args.samples)
            seq = mc_correlations(counts, D)[0]
        else:
            seq = bernoulli_correlations(p, D)
    elif model == "fixed-measure":
        eta = _vector(args, "eta")
        if eta is None:
            raise UsageError("fixed-measure needs --eta or --eta-file")
        if np.any(eta < 0):
            raise UsageError("--eta must be nonnegative")
        provenance["eta"] = eta.tolist()
        grid = _grid_for(args, len(eta))
        seq = fixed_measure_moments(eta, D)
    elif model == "fixed-config":
        counts = _vector(args, "counts")
        if counts is None:
            raise UsageError("fixed-config needs --counts or --counts-file")
        if np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise UsageError("--counts must be nonnegative integers")
        counts = counts.astype(np.int64)
        provenance["counts"] = counts.tolist()
        grid = _grid_for(args, len(counts))
        seq = fixed_config_moments(counts, D)
    else:
        alpha = _vector(args, "concentration")
        if alpha is None:
            raise UsageError("dirichlet-subprob needs --concentration")
        mass = _mass_law(args.mass)
        if not args.samples:
            raise UsageError("dirichlet-subprob needs --samples N")
        params = {"concentration": alpha, "mass": mass}
        ModelSpec("dirichlet-subprob", params, args.seed, args.samples)
        provenance.update(concentration=alpha.tolist(), mass=list(mass))
        grid = _grid_for(args, len(alpha))
        seq = dirichlet_subprob_moments(params, np.random.default_rng(args.seed), args.samples, D)
    if args.samples:
        provenance.update(seed=args.seed, samples=args.samples, rng="numpy PCG64")
    write_sequence(args.output, SequenceFile(grid, seq, provenance))
    return EXIT_PASS


def _mass_law(text: str) -> tuple:
    parts = text.split(":")
    try:
        if parts[0] == "constant" and len(parts) == 2:
            return ("constant", float(parts[1]))
        if parts[0] == "beta" and len(parts) == 3:
            return ("beta", float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise UsageError(f"--mass must be 'constant:c' or 'beta:a:b', got {text!r}")


def cmd_verify(args) -> int:
    names = args.suites or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    ok = True
    for result in run_suites(names):
        print(result.line())
        ok = ok and result.passed
    return EXIT_PASS if ok else EXIT_FAIL


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmoment", description="Realizability checks for moment and "
                     "correlation sequences of random measures on a finite grid.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="run a realizability check on a sequence file")
    p.add_argument("kind", choices=MOMENT_KINDS + CORR_KINDS)
    p.add_argument("input")
    p.add_argument("--degree", type=int, default=None, help="basis degree r (default: largest fitting, at most 3)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--tol-eq", type=float, default=1e-9)
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--nmax", type=int, default=2)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--test-set", default="indicators")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.add_argument("--quiet", "-q", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="omit the timing field from the report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("convert", help="convert between moment and correlation files")
    p.add_argument("direction", choices=("corr-to-moment", "moment-to-corr"))
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("generate", help="write an oracle sequence file")
    p.add_argument("model", choices=("poisson", "bernoulli", "fixed-measure", "fixed-config",
                                     "dirichlet-subprob"))
    p.add_argument("--truncation", "-D", type=int, required=True)
    p.add_argument("--output", "-o", required=True)
    for name in ("sigma", "p", "eta", "counts", "concentration"):
        p.add_argument(f"--{name}", default=None)
        p.add_argument(f"--{name}-file", default=None)
    p.add_argument("--mass", default="constant:1")
    p.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sites", default=None, help="comma-separated site identifiers")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="run the identity suites")
    p.add_argument("suites", nargs="*", metavar="SUITE",
                   help=f"any of {', '.join(SUITES)} (default: all)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegreeError as exc:
        msg = str(exc)
        if exc.required is not None and "D >=" not in msg:
            msg += f" (minimal D required: {exc.required})"
        print(f"kmoment: error: {msg}", file=sys.stderr)
    except (UsageError, SchemaError, GridSizeError, ValueError, OSError) as exc:
        print(f"kmoment: error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
