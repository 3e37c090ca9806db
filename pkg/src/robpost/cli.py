"""Command-line interface.

Subcommands: ``sample`` runs the Gibbs chain, ``abc`` the rejection
baseline, ``approx`` prints the closed-form NIG approximation for the
Gaussian (median, MAD) case, and ``validate`` runs a named invariant suite.

Outputs are a chain CSV (header ``iter,<param names...>``) and a summary
JSON.  Numbers are serialized with 17 significant digits so files round
trip exactly.  Exit codes: 0 success, 2 usage or configuration error, 3
infeasible constraints.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import make_family
from .errors import (
    ConfigError,
    InfeasibleIntervalError,
    InitializationError,
    ParameterError,
    RobpostError,
)
from .posterior_updates import MAD_TO_SIGMA, NigParams, nig_approx_medmad
from .sampler import (
    GENERATOR_NAME,
    AbcConfig,
    GibbsConfig,
    MedianIqrSummary,
    MedianMadSummary,
    QuantileSummary,
    abc_rejection,
    run_chain,
    summarize,
)
from .validation import SUITES, run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_OUT_DIR_ENV = "ROBPOST_OUT_DIR"


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _resolve_out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(_OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write_chain_csv(path: Path, iters, draws, names) -> None:
    with open(path, "w") as fh:
        fh.write("iter," + ",".join(names) + "\n")
        for it, row in zip(iters, draws):
            fh.write(str(int(it)) + "," + ",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
    else:
        path.write_text(text + "\n")


def _versions() -> dict:
    import scipy

    return {"robpost": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"could not parse float list {text!r}") from exc


def _constraint_from_args(args) -> object:
    if args.stats == "medmad":
        if args.m is None or args.s is None:
            raise ConfigError("--stats medmad needs --m and --s")
        if args.s <= 0:
            raise ConfigError(f"--s must be positive, got {args.s}")
        return MedianMadSummary(n=args.n, median=args.m, mad=args.s)
    if args.stats == "mediqr":
        if args.m is None or args.i is None:
            raise ConfigError("--stats mediqr needs --m and --i")
        if args.i <= 0:
            raise ConfigError(f"--i must be positive, got {args.i}")
        return MedianIqrSummary(n=args.n, median=args.m, iqr=args.i)
    if args.stats == "quantiles":
        if not args.probs or not args.values:
            raise ConfigError("--stats quantiles needs --probs and --values")
        probs = _parse_floats(args.probs)
        values = _parse_floats(args.values)
        if len(probs) != len(values):
            raise ConfigError("--probs and --values must have the same length")
        return QuantileSummary(n=args.n, probs=probs, values=values)
    raise ConfigError(f"unknown stats variant {args.stats!r}")


def _load_config_file(path: str, parser_defaults: dict) -> dict:
    """Read a JSON run-config; unknown keys are rejected."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"could not read config file {path}: {exc}") from exc
    unknown = set(payload) - set(parser_defaults)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)} in {path}")
    return payload


def _apply_config_file(args, parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """File values fill in anything the command line did not set explicitly."""
    if not getattr(args, "config", None):
        return
    defaults = {a.dest: a.default for a in parser._actions if a.dest != "help"}
    payload = _load_config_file(args.config, defaults)
    given = {a.dest for a in parser._actions if _flag_present(a, argv)}
    for key, value in payload.items():
        if key not in given:
            setattr(args, key, value)


def _flag_present(action: argparse.Action, argv: list[str]) -> bool:
    return any(opt in argv for opt in action.option_strings)


def cmd_sample(args, parser, argv) -> int:
    _apply_config_file(args, parser, argv)
    constraint = _constraint_from_args(args)
    theta0 = None
    if args.theta0:
        theta0 = make_family(args.family, *_parse_floats(args.theta0))
    base_cfg = dict(
        iterations=args.iters,
        burn_in=args.burn_in,
        thin=args.thin,
        mh_scale=args.scale,
        n_pairs=args.n_pairs,
        init_mode=args.init,
        theta0=theta0,
    )
    outputs = []
    for c in range(args.chains):
        cfg = GibbsConfig(seed=args.seed + c, **base_cfg)
        outputs.append(run_chain(args.family, constraint, config=cfg))

    out = _resolve_out(args.out)
    for c, res in enumerate(outputs):
        path = out if args.chains == 1 else out.with_name(f"{out.stem}_c{c}{out.suffix}")
        _write_chain_csv(path, res.iters, res.draws, res.param_names)

    all_draws = np.vstack([res.draws for res in outputs])
    summary = {
        "command": "sample",
        "family": args.family,
        "stats": args.stats,
        "n": args.n,
        "chains": args.chains,
        "iterations": args.iters,
        "burn_in": outputs[0].burn_in,
        "thin": args.thin,
        "seed": args.seed,
        "generator": GENERATOR_NAME,
        "posterior": summarize(all_draws, outputs[0].param_names),
        "accept_rates": outputs[0].accept_rates,
        "wall_clock_s": sum(res.wall_clock for res in outputs),
        "versions": _versions(),
    }
    if outputs[0].kd_census is not None:
        summary["kd_census"] = {
            f"{key}": count for key, count in sorted(outputs[0].kd_census.items())
        }
    _write_json(_resolve_out(args.summary_out), summary)
    return EXIT_OK


def cmd_abc(args, parser, argv) -> int:
    _apply_config_file(args, parser, argv)
    constraint = _constraint_from_args(args)
    cfg = AbcConfig(n_sims=args.n_sims, keep=args.keep, seed=args.seed)
    res = abc_rejection(args.family, constraint, abc_config=cfg)
    out = _resolve_out(args.out)
    if out is not None:
        _write_chain_csv(out, np.arange(len(res.draws)), res.draws, res.param_names)
    summary = {
        "command": "abc",
        "family": args.family,
        "stats": args.stats,
        "n": args.n,
        "n_sims": args.n_sims,
        "keep": args.keep,
        "seed": args.seed,
        "generator": res.generator,
        "distance_standardization": [_fmt(v) for v in res.standardization],
        "max_kept_distance": _fmt(res.distances.max()),
        "posterior": summarize(res.draws, res.param_names),
        "wall_clock_s": res.wall_clock,
        "versions": _versions(),
    }
    _write_json(_resolve_out(args.summary_out), summary)
    return EXIT_OK


def cmd_approx(args, parser, argv) -> int:
    _apply_config_file(args, parser, argv)
    if args.family != "gaussian":
        raise ConfigError("the closed-form approximation exists only for --family gaussian")
    if args.n > 0 and args.s <= 0:
        raise ConfigError(f"--s must be positive, got {args.s}")
    mu0, nu, alpha, beta = _parse_floats(args.prior)
    prior = NigParams(mu0, nu, alpha, beta)
    approx = nig_approx_medmad(args.m, args.s, args.n, prior)
    payload = {
        "command": "approx",
        "m": _fmt(args.m),
        "s": _fmt(args.s),
        "n": args.n,
        "c_times_s": _fmt(MAD_TO_SIGMA * args.s),
        "prior": {k: _fmt(getattr(prior, k)) for k in ("mu0", "nu", "alpha", "beta")},
        "posterior_approx": {
            "M": _fmt(approx.mu0),
            "C": _fmt(approx.nu),
            "A": _fmt(approx.alpha),
            "B": _fmt(approx.beta),
        },
        "analytic_summaries": {
            "mu_mean": _fmt(approx.mu0),
            "mu_sd": _fmt(
                approx.mu_marginal_scale()
                * (approx.alpha / (approx.alpha - 1.0)) ** 0.5
                if approx.alpha > 1
                else float("nan")
            ),
            "sigma2_mean": _fmt(approx.sigma2_mean()),
        },
        "versions": _versions(),
    }
    _write_json(_resolve_out(args.out), payload)
    return EXIT_OK


def cmd_validate(args, parser, argv) -> int:
    report = run_suite(args.suite, seed=args.seed)
    _write_json(_resolve_out(args.out), report)
    return EXIT_OK if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robpost",
        description="Posterior sampling from robust summary statistics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; explicit flags win")
    common.add_argument("--family", choices=("gaussian", "cauchy", "weibull3"),
                        default="gaussian")
    common.add_argument("--stats", choices=("medmad", "mediqr", "quantiles"),
                        default="medmad")
    common.add_argument("--m", type=float, help="observed median")
    common.add_argument("--s", type=float, help="observed MAD")
    common.add_argument("--i", type=float, help="observed IQR")
    common.add_argument("--probs", help="comma-separated quantile levels")
    common.add_argument("--values", help="comma-separated observed quantiles")
    common.add_argument("--n", type=int, default=100, help="sample size behind the summary")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="chain CSV path")
    common.add_argument("--summary-out", help="summary JSON path (stdout if omitted)")

    p_sample = sub.add_parser("sample", parents=[common], help="run the Gibbs sampler")
    p_sample.add_argument("--iters", type=int, default=10_000)
    p_sample.add_argument("--burn-in", type=int, default=None)
    p_sample.add_argument("--thin", type=int, default=1)
    p_sample.add_argument("--chains", type=int, default=1)
    p_sample.add_argument("--scale", type=float, default=1.0, help="latent MH scale")
    p_sample.add_argument("--n-pairs", type=int, default=None,
                          help="pair updates per sweep (median/MAD engine)")
    p_sample.add_argument("--init", choices=("linear", "deterministic"), default="linear")
    p_sample.add_argument("--theta0", help="comma-separated starting parameters")
    p_sample.set_defaults(func=cmd_sample, subparser=p_sample)

    p_abc = sub.add_parser("abc", parents=[common], help="run the ABC-rejection baseline")
    p_abc.add_argument("--n-sims", type=int, default=10_000)
    p_abc.add_argument("--keep", type=int, default=1_000)
    p_abc.set_defaults(func=cmd_abc, subparser=p_abc)

    p_approx = sub.add_parser("approx", parents=[common],
                              help="closed-form NIG approximation (Gaussian, median/MAD)")
    p_approx.add_argument("--prior", default="0,0.001,0.001,0.001",
                          help="NIG prior as mu0,nu,alpha,beta")
    p_approx.set_defaults(func=cmd_approx, subparser=p_approx)

    p_val = sub.add_parser("validate", help="run a named invariant suite")
    p_val.add_argument("suite", choices=sorted(SUITES))
    p_val.add_argument("--seed", type=int, default=0)
    p_val.add_argument("--out", help="report JSON path (stdout if omitted)")
    p_val.set_defaults(func=cmd_validate, subparser=p_val)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, args.subparser, argv)
    except (ConfigError, ParameterError, ValueError) as exc:
        if isinstance(exc, (InitializationError, InfeasibleIntervalError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RobpostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
