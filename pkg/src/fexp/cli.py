"""Command-line front end.

    fexp exponents --p-fwd 1 --sigma2-fwd 1 --p-fb 1 --sigma2-fb 1
    fexp simulate  --scheme AsScheme --n 10 --delta 0.3 --trials 1000000 --seed 1
    fexp sweep     --scheme AsScheme --delta 0.3 --n-list 1000,10000,100000 --trials 0
    fexp verify    --output report.json
    fexp bsc       --eps 0.1 --eps-fb 0.1

Settings resolve as built-in defaults < ``--config`` JSON file < flags.
Data goes to ``--output`` (or stdout); diagnostics go to stderr.
Exit codes: 0 ok, 1 a check failed, 2 bad configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional

from . import __version__
from .errors import ConfigurationError, DomainError, NumericalError
from .exponents import all_bounds, bsc_bounds, fit_exponent_slope
from .gaussian import ChannelParams
from .schemes import SchemeConfig, audit_power, default_tilt, estimate_error
from .schemes.estimate import THREADS_ENV
from .schemes.oracles import log_error_closed_form, reference_exponent

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
COMMANDS = ("exponents", "simulate", "sweep", "verify", "bsc")
CSV_HEADER = ("scheme", "n", "p_fwd", "sigma2_fwd", "p_fb", "sigma2_fb", "delta", "trials",
              "p_hat", "ci_low", "ci_high", "log_pe_closed_form", "seed")


@dataclass
class ExperimentConfig:
    command: str
    p_fwd: float = 1.0
    sigma2_fwd: float = 1.0
    p_fb: float = 1.0
    sigma2_fb: float = 1.0
    scheme: str = "AsScheme"
    n: int = 10
    delta: float = 0.3
    delta_fb_power: Optional[float] = None
    threshold_coef: float = 1.0
    n_list: List[int] = field(default_factory=list)
    trials: int = 100_000
    seed: int = 0
    tilt: str = "none"
    fb_budget: str = "symmetric"
    eps: float = 0.1
    eps_fb: float = 0.1
    e_nofb: float = 0.0
    quick: bool = False
    output: Optional[str] = None
    format: str = "json"

    def params(self) -> ChannelParams:
        return ChannelParams(self.p_fwd, self.sigma2_fwd, self.p_fb, self.sigma2_fb)

    def scheme_config(self, n: Optional[int] = None) -> SchemeConfig:
        return SchemeConfig(self.scheme, self.n if n is None else n, self.delta,
                            self.delta_fb_power, self.threshold_coef)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json")
        if self.tilt not in ("none", "auto"):
            raise ConfigurationError("tilt must be 'none' or 'auto'")
        if int(self.seed) != self.seed:
            raise ConfigurationError("seed must be an integer")
        if self.command in ("exponents", "simulate", "sweep"):
            self.params()
        if self.command == "simulate":
            if self.trials < 1:
                raise ConfigurationError("simulate needs trials >= 1")
            self.scheme_config()
        if self.command == "sweep":
            if self.trials < 0:
                raise ConfigurationError("sweep needs trials >= 0 (0 selects oracle mode)")
            if len(self.n_list) < 3:
                raise ConfigurationError("sweep needs at least 3 blocklengths")
            if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
                raise ConfigurationError("n_list must be strictly increasing")
            for n in self.n_list:
                self.scheme_config(n)
        if self.command == "verify" and self.trials < 1:
            raise ConfigurationError("verify needs trials >= 1")


# ----------------------------------------------------------------- output

def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _header(cfg: ExperimentConfig) -> dict:
    return {"version": __version__, "config": asdict(cfg)}


def _csv(cfg: ExperimentConfig, header, rows, trailer: Optional[dict] = None) -> str:
    buf = io.StringIO()
    buf.write(f"# fexp {__version__}\n")
    buf.write(f"# config {json.dumps(asdict(cfg), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in header])
    if trailer is not None:
        buf.write(f"# summary {json.dumps(trailer, sort_keys=True)}\n")
    return buf.getvalue()


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _row(cfg: ExperimentConfig, scfg: SchemeConfig, trials, p_hat, lo, hi, log_pe) -> dict:
    return {"scheme": scfg.scheme_kind.value, "n": scfg.n, "p_fwd": cfg.p_fwd,
            "sigma2_fwd": cfg.sigma2_fwd, "p_fb": cfg.p_fb, "sigma2_fb": cfg.sigma2_fb,
            "delta": scfg.delta, "trials": trials, "p_hat": p_hat, "ci_low": lo,
            "ci_high": hi, "log_pe_closed_form": log_pe, "seed": cfg.seed}


# ----------------------------------------------------------------- commands

def cmd_exponents(cfg: ExperimentConfig) -> int:
    bounds = [b.as_dict() for b in all_bounds(cfg.params(), cfg.fb_budget)]
    if cfg.format == "csv":
        _emit(cfg, _csv(cfg, ("label", "value", "kind", "regime"), bounds))
    else:
        _emit(cfg, _dump_json({**_header(cfg), "bounds": bounds}))
    return EXIT_OK


def _simulate_row(cfg: ExperimentConfig, scfg: SchemeConfig):
    params = cfg.params()
    tilt = default_tilt(params, scfg) if cfg.tilt == "auto" else None
    est = estimate_error(scfg, params, cfg.trials, cfg.seed, tilt)
    log_pe = log_error_closed_form(params, scfg)
    return _row(cfg, scfg, cfg.trials, est.p_hat, est.ci_low, est.ci_high, log_pe), est


def cmd_simulate(cfg: ExperimentConfig) -> int:
    scfg = cfg.scheme_config()
    row, est = _simulate_row(cfg, scfg)
    audit = audit_power(scfg, cfg.params(), cfg.trials, cfg.seed).as_dict()
    if cfg.format == "csv":
        _emit(cfg, _csv(cfg, CSV_HEADER, [row], {"power_audit": audit}))
    else:
        _emit(cfg, _dump_json({**_header(cfg), "rows": [row], "estimate": est.as_dict(),
                               "power_audit": audit}))
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig) -> int:
    params = cfg.params()
    rows, points = [], []
    for n in cfg.n_list:
        scfg = cfg.scheme_config(n)
        if cfg.trials == 0:
            log_pe = log_error_closed_form(params, scfg)
            p = math.exp(log_pe)
            rows.append(_row(cfg, scfg, 0, p, p, p, log_pe))
            points.append((n, log_pe))
        else:
            row, _ = _simulate_row(cfg, scfg)
            rows.append(row)
            if row["p_hat"] <= 0:
                raise NumericalError(f"no errors observed at n={n}; cannot fit a slope",
                                     {"n": n, "trials": cfg.trials})
            points.append((n, math.log(row["p_hat"])))
        print(f"sweep: n={n} done", file=sys.stderr)
    fit = fit_exponent_slope(points)
    summary = {**fit.as_dict(),
               "paper_reference_exponent": reference_exponent(
                   params, cfg.scheme_config(cfg.n_list[0]))}
    if cfg.format == "csv":
        _emit(cfg, _csv(cfg, CSV_HEADER, rows, summary))
    else:
        _emit(cfg, _dump_json({**_header(cfg), "rows": rows, "summary": summary}))
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig) -> int:
    from .verify.suite import SuiteSize, mc_agreement_check, run_bound_suite

    size = SuiteSize.quick() if cfg.quick else SuiteSize()
    bounds = run_bound_suite(cfg.seed, size)
    mc = mc_agreement_check(cfg.seed, cfg.trials)
    passed = bounds["passed"] and mc["passed"]
    for name, c in {**bounds["checks"], "mc_agreement": mc}.items():
        print(f"verify: {name}: {'pass' if c['passed'] else 'FAIL'}", file=sys.stderr)
    _emit(cfg, _dump_json({**_header(cfg), "bound_checks": bounds, "mc_agreement": mc,
                           "passed": passed}))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_bsc(cfg: ExperimentConfig) -> int:
    bounds = [b.as_dict() for b in bsc_bounds(cfg.eps, cfg.eps_fb, cfg.e_nofb)]
    if cfg.format == "csv":
        _emit(cfg, _csv(cfg, ("label", "value", "kind", "regime"), bounds))
    else:
        _emit(cfg, _dump_json({**_header(cfg), "bounds": bounds}))
    return EXIT_OK


HANDLERS = {"exponents": cmd_exponents, "simulate": cmd_simulate, "sweep": cmd_sweep,
            "verify": cmd_verify, "bsc": cmd_bsc}


def run_command(cfg: ExperimentConfig) -> int:
    cfg.validate()
    return HANDLERS[cfg.command](cfg)


# ----------------------------------------------------------------- parsing

def _int_list(text: str) -> List[int]:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fexp", description=(
        "Error exponents for one-bit signalling over a Gaussian channel with "
        f"noisy active feedback. Threads: set {THREADS_ENV}."))
    p.add_argument("--version", action="version", version=f"fexp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        # every override defaults to None so that unset flags do not mask the config file
        sp.add_argument("--config", help="JSON file with any ExperimentConfig fields")
        sp.add_argument("--output", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--seed", type=int)

    def channel(sp):
        sp.add_argument("--p-fwd", type=float)
        sp.add_argument("--sigma2-fwd", type=float)
        sp.add_argument("--p-fb", type=float)
        sp.add_argument("--sigma2-fb", type=float)

    def scheme(sp):
        sp.add_argument("--scheme", choices=("NoFeedback", "AsScheme", "BuildingBlock",
                                             "ThreePhase"))
        sp.add_argument("--delta", type=float)
        sp.add_argument("--delta-fb-power", type=float)
        sp.add_argument("--threshold-coef", type=float)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--tilt", choices=("none", "auto"))

    sp = sub.add_parser("exponents", help="table of analytic exponent bounds")
    common(sp)
    channel(sp)
    sp.add_argument("--fb-budget", choices=("symmetric", "literal"))

    sp = sub.add_parser("simulate", help="MC estimate and power audit at one blocklength")
    common(sp)
    channel(sp)
    scheme(sp)
    sp.add_argument("--n", type=int)

    sp = sub.add_parser("sweep", help="error probability over blocklengths plus slope fit")
    common(sp)
    channel(sp)
    scheme(sp)
    sp.add_argument("--n-list", type=_int_list, help="comma-separated, strictly increasing")

    sp = sub.add_parser("verify", help="bound-verification suite and MC-vs-oracle checks")
    common(sp)
    sp.add_argument("--trials", type=int, help="MC trials per agreement case")
    sp.add_argument("--quick", action="store_const", const=True,
                    help="reduced instance counts")

    sp = sub.add_parser("bsc", help="binary symmetric channel bounds")
    common(sp)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--eps-fb", type=float)
    sp.add_argument("--e-nofb", type=float)
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(args.command)
    known = set(asdict(cfg))
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config {args.config}: {e}") from e
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        if data.get("command", args.command) != args.command:
            raise ConfigurationError("config command differs from the subcommand")
        cfg = replace(cfg, **data)
    flags = {k: v for k, v in vars(args).items()
             if k in known and k != "command" and v is not None}
    return replace(cfg, **flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run_command(resolve_config(args))
    except (ConfigurationError, DomainError, TypeError) as e:
        print(f"fexp: configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        print(f"fexp: numerical error: {e}", file=sys.stderr)
        for k, v in getattr(e, "diagnostics", {}).items():
            print(f"  {k}: {v}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
