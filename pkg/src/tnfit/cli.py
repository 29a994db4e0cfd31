"""Command-line front end.

Subcommands wire the library to files and seeds: ``sample`` draws data,
``fit`` estimates parameters from a one-column file, ``simulate`` and
``bound-dist`` run the Monte Carlo studies as streaming CSV, ``asymptotics``
reports the limit matrices for a given truth, and ``classify`` runs the
repeated-split discriminant study. Every subcommand is deterministic given
its flags; --seed is the only entropy source. Exit codes: 0 success, 1
usage error, 2 data/domain error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from typing import IO, Iterator

import numpy as np

from . import __version__
from .asymptotics import jacobian, musigma_limit_cov
from .classify import run_split_study
from .simulate import (
    BOUND_CSV_HEADER,
    DEFAULT_BASE_SEED,
    SIM_CSV_HEADER,
    StudyPlan,
    default_cases,
    log_spaced_sizes,
    run_bound_dist_study,
    run_consistency_study,
    write_records_csv,
)
from .solver import EsConfig, fit
from .truncnorm import TnParams, sample

__all__ = ["main"]


class CliError(Exception):
    """Data or domain error: exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_floats(text: str, count: int, what: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise CliError(f"{what} needs {count} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise CliError(f"bad {what}: {exc}") from None


def _parse_theta(text: str) -> TnParams:
    mu, sigma, tau_l, tau_u = _parse_floats(text, 4, "--theta (mu,sigma,tau-l,tau-u)")
    return TnParams(mu=mu, sigma=sigma, tau_l=tau_l, tau_u=tau_u)


def _config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver options")
    g.add_argument("--tol", type=float, default=1e-6, help="log-likelihood change tolerance")
    g.add_argument("--max-iters", type=int, default=500, help="iteration cap")
    g.add_argument("--mu-box", default="-10,10", help="mu projection box LO,HI")
    g.add_argument("--sigma-box", default="1e-3,10", help="sigma projection box LO,HI")
    g.add_argument("--width-cap", type=float, default=10.0,
                   help="bound-correction cap, in multiples of sigma")


def _config_from(args) -> EsConfig:
    mu_box = _parse_floats(args.mu_box, 2, "--mu-box")
    sigma_box = _parse_floats(args.sigma_box, 2, "--sigma-box")
    return EsConfig(
        tol_rel_loglik=args.tol,
        max_iters=args.max_iters,
        mu_box=(mu_box[0], mu_box[1]),
        sigma_box=(sigma_box[0], sigma_box[1]),
        width_cap_multiplier=args.width_cap,
    )


@contextlib.contextmanager
def _open_out(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_values(path: str) -> np.ndarray:
    values = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise CliError(str(exc)) from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise CliError(f"{path}:{lineno}: not a number: {text!r}") from None
    if not values:
        raise CliError(f"{path}: no observations")
    return np.array(values)


def _read_labeled(path: str) -> list[tuple[str, float]]:
    rows = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise CliError(str(exc)) from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if lineno == 1:
                if [c.strip().lower() for c in text.split(",")] != ["label", "value"]:
                    raise CliError(f"{path}:1: expected header 'label,value', got {text!r}")
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise CliError(f"{path}:{lineno}: expected 'label,value', got {text!r}")
            try:
                rows.append((parts[0].strip(), float(parts[1])))
            except ValueError:
                raise CliError(f"{path}:{lineno}: not a number: {parts[1]!r}") from None
    if not rows:
        raise CliError(f"{path}: no data rows")
    return rows


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def _cmd_sample(args) -> int:
    theta = _parse_theta(args.theta)
    if args.n < 1:
        raise CliError(f"--n must be >= 1, got {args.n}")
    draws = sample(theta, args.n, args.seed)
    with _open_out(args.output) as out:
        for v in draws:
            out.write(_fmt17(v) + "\n")
    return 0


def _cmd_fit(args) -> int:
    data = _read_values(args.input)
    init = None if args.init == "stats" else _parse_theta(args.init)
    res = fit(data, init=init, config=_config_from(args))
    th = res.theta_hat
    report = {
        "mu_hat": th.mu,
        "sigma_hat": th.sigma,
        "tau_l_hat": th.tau_l,
        "tau_u_hat": th.tau_u,
        "residual_norm": res.residual_norm,
        "iterations": res.iterations,
        "status": res.status.value,
        "at_boundary": res.at_boundary,
    }
    with _open_out(args.output) as out:
        for key, val in report.items():
            out.write(f"{key}={_fmt17(val) if isinstance(val, float) else val}\n")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    return 0


def _plan_from(args, default_sizes: list[int], default_reps: int) -> StudyPlan:
    all_cases = default_cases()
    if args.cases == "all":
        ids = list(range(1, len(all_cases) + 1))
    else:
        try:
            ids = [int(c) for c in args.cases.split(",")]
        except ValueError:
            raise CliError(f"--cases must be integer ids or 'all', got {args.cases!r}") from None
        if any(not 1 <= c <= len(all_cases) for c in ids):
            raise CliError(f"--cases ids must lie in 1..{len(all_cases)}")
    if args.n is None:
        sizes = default_sizes
    else:
        try:
            sizes = [int(v) for v in args.n.split(",")]
        except ValueError:
            raise CliError(f"--n must be comma-separated integers, got {args.n!r}") from None
    reps = default_reps if args.reps is None else args.reps
    try:
        return StudyPlan(
            cases=tuple(all_cases[c - 1] for c in ids),
            n_grid=tuple(sizes),
            reps_per_cell=reps,
            base_seed=args.seed,
            init_mode="truth" if args.init == "truth" else "sample_stats",
            case_ids=tuple(ids),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _cmd_simulate(args) -> int:
    plan = _plan_from(args, log_spaced_sizes(), 100)
    records = run_consistency_study(plan, _config_from(args), threads=args.threads)
    with _open_out(args.output) as out:
        write_records_csv(records, out, SIM_CSV_HEADER)
    return 0


def _cmd_bound_dist(args) -> int:
    plan = _plan_from(args, [30, 50, 100], 2000)
    records = run_bound_dist_study(plan, _config_from(args), threads=args.threads)
    with _open_out(args.output) as out:
        write_records_csv(records, out, BOUND_CSV_HEADER)
    return 0


def _cmd_asymptotics(args) -> int:
    theta0 = _parse_theta(args.theta0)
    lim = musigma_limit_cov(theta0)
    jac = jacobian(theta0)
    matrices = {
        "sigma": lim.sigma_mat,
        "gamma": lim.gamma_mat,
        "musigma_cov": lim.musigma_cov,
        "jacobian": jac,
    }
    with _open_out(args.output) as out:
        if args.format == "json":
            json.dump({k: v.tolist() for k, v in matrices.items()}, out, indent=2)
            out.write("\n")
        else:
            out.write("matrix,row,col,value\n")
            for name, mat in matrices.items():
                for i in range(mat.shape[0]):
                    for j in range(mat.shape[1]):
                        out.write(f"{name},{i},{j},{_fmt17(mat[i, j])}\n")
    return 0


def _cmd_classify(args) -> int:
    data = _read_labeled(args.input)
    known = [k.strip() for k in args.known.split(",") if k.strip()]
    holdout = [h.strip() for h in args.holdout.split(",") if h.strip()]
    if not known:
        raise CliError("--known needs at least one label")
    tqda, qda = run_split_study(
        data,
        known_labels=known,
        holdout_labels=holdout,
        n_splits=args.splits,
        seed=args.seed,
        cutoff=args.cutoff,
        config=_config_from(args),
        threads=args.threads,
    )
    with _open_out(args.output) as out:
        out.write("method,true_label,predicted,mean,sd\n")
        for summary in (tqda, qda):
            for method, true_label, pred, mean, sd in summary.rows():
                out.write(f"{method},{true_label},{pred},{_fmt17(mean)},{_fmt17(sd)}\n")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="tnfit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tnfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample",
                       help="draw a truncated normal sample, one value per line")
    p.add_argument("--theta", required=True, help="mu,sigma,tau-l,tau-u")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_BASE_SEED)
    p.add_argument("--output", default="-")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("fit",
                       help="estimate parameters from a one-column file of observations")
    p.add_argument("--input", required=True)
    p.add_argument("--init", default="stats",
                   help="'stats' (sample statistics) or explicit mu,sigma,tau-l,tau-u")
    p.add_argument("--output", default="-")
    p.add_argument("--json", default=None, help="also write the report as JSON")
    _config_flags(p)
    p.set_defaults(func=_cmd_fit)

    for name, helptext, func in (
        ("simulate", "consistency study CSV", _cmd_simulate),
        ("bound-dist", "bound-statistic study CSV (adds z_l,z_u)", _cmd_bound_dist),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--cases", default="all", help="benchmark case ids, e.g. 3 or 1,4,6")
        p.add_argument("--n", default=None, help="sample sizes, e.g. 10,32,100")
        p.add_argument("--reps", type=int, default=None, help="replicates per cell")
        p.add_argument("--seed", type=int, default=DEFAULT_BASE_SEED)
        p.add_argument("--init", choices=("stats", "truth"), default="stats")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--output", default="-")
        _config_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("asymptotics",
                       help="limit matrices (Sigma, Gamma, Gamma Sigma Gamma^t, Jacobian)")
    p.add_argument("--theta0", required=True, help="mu,sigma,tau-l,tau-u of the truth")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default="-")
    p.set_defaults(func=_cmd_asymptotics)

    p = sub.add_parser("classify",
                       help="repeated-split TQDA vs QDA-with-atypicality study")
    p.add_argument("--input", required=True, help="CSV with header label,value")
    p.add_argument("--known", required=True, help="comma-separated training class labels")
    p.add_argument("--holdout", default="", help="labels that appear only in test sets")
    p.add_argument("--splits", type=int, default=500)
    p.add_argument("--seed", type=int, default=DEFAULT_BASE_SEED)
    p.add_argument("--cutoff", type=float, default=0.05)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", default="-")
    _config_flags(p)
    p.set_defaults(func=_cmd_classify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except CliError as exc:
        print(f"tnfit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"tnfit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
