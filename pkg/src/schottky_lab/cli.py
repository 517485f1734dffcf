"""Command-line front end.

Every command writes ``<command>.json`` (result plus the full resolved
configuration) and, where tabular data exists, CSV files with one header row
into the output directory.  Exit status: 0 success, 2 undecided verdict,
1 error.
"""
import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import critical, geodesic, kernels, series, transfer
from .config import SCHEMA_VERSION, RunConfig, describe_defaults
from .errors import ConfigError, SchottkyLabError
from .profiles import CuspMetric, UProfile, curvature_scan, verification_grid
from .schottky import SchottkyModel

EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED = 0, 1, 2

COMMANDS = {
    "curvature-scan": "curvature of the height profile on a sigma grid",
    "geodesic-check": "geodesic lengths against 2 height(D) over a separation grid",
    "parabolic-series": "rank-k parabolic series with tail bounds and verdict",
    "group-series": "Poincare series of the two-generator group",
    "rho": "leading eigenvalue and eigenfunction of the transfer operator",
    "find-delta": "critical exponent at depth a",
    "find-astar": "critical depth a* where rho(a, 1/2) crosses 1",
    "monotonicity": "empirical certificate that deepening the cusp grows the series",
    "classify": "regime at depth a: type, gap condition, measure finiteness",
    "atlas": "regimes and rho surface over a grid of depths",
}

# flag -> (section, key)
FLAGS = {
    "variant": ("profile", "variant"), "alpha": ("profile", "alpha"),
    "kappa": ("profile", "kappa"), "epsilon0": ("profile", "epsilon0"),
    "s_p": ("model", "s_p"), "l_h": ("model", "l_h"), "c": ("model", "c"),
    "c_bracket": ("model", "c_bracket"), "calibrate": ("model", "calibrate"),
    "a": ("solver", "a"), "a_prime": ("solver", "a_prime"), "s": ("solver", "s"),
    "level": ("solver", "level"), "depth": ("solver", "depth"), "M": ("solver", "M"),
    "rank": ("solver", "rank"), "K": ("solver", "K"), "a_grid": ("solver", "a_grid"),
    "D_grid": ("solver", "D_grid"), "out": ("output", "dir"),
}


# -- plumbing ---------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Artifacts:
    def __init__(self, cfg, command):
        self.dir = cfg.get("output", "dir")
        self.formats = set(cfg.get("output", "formats"))
        self.command = command
        self.cfg = cfg
        self.files = []

    def csv(self, name, header, rows):
        if "csv" not in self.formats:
            return
        os.makedirs(self.dir, exist_ok=True)
        path = os.path.join(self.dir, name)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x
                            for x in row])
        self.files.append(name)

    def report(self, result):
        doc = _clean({"schema_version": SCHEMA_VERSION, "command": self.command,
                      "backend": kernels.BACKEND, "config": self.cfg.as_dict(),
                      "result": result, "artifacts": self.files})
        text = json.dumps(doc, indent=2, sort_keys=True)
        if "json" in self.formats:
            os.makedirs(self.dir, exist_ok=True)
            with open(os.path.join(self.dir, f"{self.command}.json"), "w",
                      encoding="utf-8") as fh:
                fh.write(text + "\n")
        return doc


def build_profile(cfg):
    p = cfg["profile"]
    variant = p["variant"]
    kappa = p["kappa"]
    if kappa == "auto":
        kappa = 0.15 if variant == "remark24" else 0.9
    if variant == "pure_log":
        return UProfile.pure_log(kappa)
    if variant == "remark24":
        return UProfile.remark24(kappa)
    eps = None if p["epsilon0"] == "auto" else p["epsilon0"]
    return UProfile.lemma22(p["alpha"], kappa, eps)


def build_model(cfg, calibrate=None):
    m = cfg["model"]
    model = SchottkyModel(CuspMetric(0.0, build_profile(cfg)), m["s_p"], m["l_h"], m["c"])
    k = 1
    if m["calibrate"] if calibrate is None else calibrate:
        k, model = critical.calibrate_h(model, M=cfg.get("solver", "M"))
    return model, k


def resolve_a(cfg, model, key="a", trace=None):
    value = cfg.get("solver", key)
    if value == "auto":
        return critical.find_a_star(model, cfg.get("solver", "a_max"),
                                    cfg.get("solver", "tol_astar"), trace=trace)
    return float(value)


def _trace_csv(art, trace):
    art.csv(f"{art.command}-trace.csv", ["a", "s", "rho", "level"], trace.rows)


# -- commands -----------------------------------------------------------------

def cmd_curvature_scan(cfg, art):
    sv = cfg["solver"]
    prof = build_profile(cfg)
    scan = curvature_scan(prof, verification_grid(sv["sigma_points"], sv["sigma_min"],
                                                  sv["sigma_max"]))
    art.csv("curvature.csv", ["sigma", "u", "du", "d2u", "K"],
            zip(*(scan[k] for k in ("sigma", "u", "du", "d2u", "K"))))
    K = scan["K"]
    bound = -prof.kappa ** 2
    return {"profile": prof.as_dict(), "log_s_alpha": prof.log_s_alpha,
            "K_max": float(K.max()), "K_min": float(K.min()),
            "pinched": bool(K.max() <= bound), "bound": bound}, EXIT_OK


def cmd_geodesic_check(cfg, art):
    metric = CuspMetric(float(cfg.get("solver", "a")) if cfg.get("solver", "a") != "auto"
                        else 0.0, build_profile(cfg))
    table = geodesic.deviation_scan(metric, cfg.get("solver", "D_grid"))
    hyperbolic = metric.profile.variant == "pure_log"
    ref = np.arccosh(1.0 + table.D ** 2 / 2.0) if hyperbolic else np.full(table.D.shape, np.nan)
    art.csv("geodesic.csv", ["D", "length", "model", "deviation", "hyperbolic"],
            zip(table.D, table.length, table.model, table.deviation, ref))
    result = {"a": metric.a, "profile": metric.profile.as_dict(), **table.summary(),
              "bounded": table.bounded()}
    if hyperbolic:
        result["max_error_vs_arccosh"] = float(np.max(np.abs(table.length - ref)))
    return result, EXIT_OK


def cmd_parabolic_series(cfg, art):
    sv = cfg["solver"]
    a = 0.0 if sv["a"] == "auto" else float(sv["a"])
    metric = CuspMetric(a, build_profile(cfg))
    est = series.parabolic_series(metric, sv["rank"], sv["s"], sv["M"],
                                  scale=cfg.get("model", "s_p"))
    result = {"series": est.as_dict(), "total": est.total, "interval": est.interval}
    try:
        result["exponent"] = series.exponent_estimate(
            lambda s: series.parabolic_series(metric, sv["rank"], s, sv["M"]))
    except SchottkyLabError as exc:
        result["exponent"] = f"unresolved: {exc}"
    result["ps_finiteness"] = series.ps_finiteness(metric, 0.5, sv["M"])
    return result, EXIT_UNDECIDED if est.verdict == series.UNDECIDED else EXIT_OK


def cmd_group_series(cfg, art):
    sv = cfg["solver"]
    model, k = build_model(cfg)
    a = resolve_a(cfg, model)
    est = series.group_series(model.with_a(a), sv["s"], sv["K"], sv["M_words"], sv["M"])
    result = {"calibration_power": k, "l_h": model.l_h, "a": a, "series": est.as_dict(),
              "direct_sum": est.direct_sum, "formula_sum": est.formula_sum,
              "ratio": est.ratio, "interval": est.interval}
    return result, EXIT_UNDECIDED if est.verdict == series.UNDECIDED else EXIT_OK


def _operator(cfg, model, a, s):
    sv = cfg["solver"]
    if sv["level"] == 0:
        return transfer.build_level0(model, a, s, sv["M"])
    return transfer.build_level1(model, a, s, sv["depth"], sv["M_cyl"], sv["M"])


def cmd_rho(cfg, art):
    sv = cfg["solver"]
    model, k = build_model(cfg)
    a = resolve_a(cfg, model)
    tm = _operator(cfg, model, a, sv["s"])
    result = {"calibration_power": k, "l_h": model.l_h, "a": a, "s": sv["s"],
              "level": sv["level"], "states": tm.size}
    if tm.infinite:
        result.update(rho=math.inf, verdict=series.DIVERGES)
        return result, EXIT_OK
    spectral = transfer.power_iterate(tm)
    diag = transfer.divergence_diagnostic(tm, spectral=spectral)
    result.update(transfer.spectral_report(tm, spectral))
    result["divergence"] = diag.as_dict()
    art.csv("eigenfunction.csv", ["state", "phi"], zip(tm.states, spectral.eigenfunction))
    if cfg.get("output", "dump_matrix"):
        art.csv("matrix.csv", ["row", "col", "value"], tm.triplets())
    return result, EXIT_UNDECIDED if diag.verdict == series.UNDECIDED else EXIT_OK


def cmd_find_delta(cfg, art):
    sv = cfg["solver"]
    model, k = build_model(cfg)
    trace = critical.Trace()
    a = resolve_a(cfg, model, trace=trace)
    delta = critical.find_delta(model, a, sv["tol_delta"], sv["level"], trace=trace)
    _trace_csv(art, trace)
    return {"calibration_power": k, "l_h": model.l_h, "a": a, "delta": delta,
            "level": sv["level"]}, EXIT_OK


def cmd_find_astar(cfg, art):
    sv = cfg["solver"]
    model, k = build_model(cfg)
    trace = critical.Trace()
    a_star = critical.find_a_star(model, sv["a_max"], sv["tol_astar"], trace=trace)
    _trace_csv(art, trace)
    return {"calibration_power": k, "l_h": model.l_h, "a_star": a_star,
            "rho_at_a_star": critical.rho(model, a_star, 0.5)}, EXIT_OK


def cmd_monotonicity(cfg, art):
    sv = cfg["solver"]
    model, k = build_model(cfg)
    a_star = None
    if sv["a"] == "auto" or sv["a_prime"] == "auto":
        a_star = critical.find_a_star(model, sv["a_max"], sv["tol_astar"])
    a = max(0.0, a_star - 0.5) if sv["a"] == "auto" else float(sv["a"])
    a_prime = a_star + 0.5 if sv["a_prime"] == "auto" else float(sv["a_prime"])
    cert = critical.monotonicity_certificate(model, a, a_prime, sv["k_max"], sv["M"])
    art.csv("certificate.csv", ["k", "R_k"],
            zip(range(1, len(cert.ratios) + 1), cert.ratios))
    return {"calibration_power": k, "a": a, "a_prime": a_prime, "a_star": a_star,
            "C_emp": cert.C_emp, "rho_emp": cert.rho_emp}, EXIT_OK


_ATLAS_HEADER = ["a", "alpha", "c", "l_h", "delta", "rho_at_half", "type", "pgc",
                 "ps_measure", "divergence_verdict", "parabolic_verdict", "level"]


def _atlas_row(r):
    return [getattr(r, k) for k in _ATLAS_HEADER]


def cmd_classify(cfg, art):
    sv, mv = cfg["solver"], cfg["model"]
    model, _ = build_model(cfg, calibrate=False)
    trace = critical.Trace()
    a = sv["a"] if sv["a"] == "auto" else float(sv["a"])
    bracket = critical.classify_bracket(model, a, (mv["c"], mv["c_bracket"]), sv["level"],
                                        sv["band"], calibrate=mv["calibrate"], trace=trace)
    art.csv("regime.csv", _ATLAS_HEADER, [_atlas_row(r) for r in bracket.rows])
    _trace_csv(art, trace)
    return bracket.as_dict(), EXIT_OK if bracket.agreed else EXIT_UNDECIDED


def cmd_atlas(cfg, art):
    sv = cfg["solver"]
    model, k = build_model(cfg)
    trace = critical.Trace()
    a_star = critical.find_a_star(model, sv["a_max"], sv["tol_astar"], trace=trace)
    grid = sv["a_grid"]
    if grid == "auto":
        grid = [max(0.0, a_star + d) for d in np.linspace(-2.0, 12.0, 15)]
        grid = sorted(set(grid) | {a_star})
    reports = critical.atlas(model, grid, sv["level"], sv["band"], trace=trace)
    art.csv("atlas.csv", _ATLAS_HEADER, [_atlas_row(r) for r in reports])
    s_grid = np.linspace(0.5, 0.6, 21)
    art.csv("rho_surface.csv", ["a", "s", "rho"],
            [(r.a, s, critical.rho(model, r.a, s)) for r in reports for s in s_grid])
    _trace_csv(art, trace)
    undecided = any(series.UNDECIDED in (r.type, r.ps_measure) for r in reports)
    return {"calibration_power": k, "l_h": model.l_h, "a_star": a_star,
            "rows": [r.as_dict() for r in reports]}, \
        EXIT_UNDECIDED if undecided else EXIT_OK


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


# -- entry point --------------------------------------------------------------

def _parser():
    parser = argparse.ArgumentParser(
        prog="schottky-lab",
        description="Critical exponents and regimes of a cusped Schottky group model.",
        epilog="configuration keys and defaults:\n" + describe_defaults(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sectioned key = value file")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration key")
    common.add_argument("--quiet", action="store_true", help="do not print the JSON report")
    for flag in FLAGS:
        common.add_argument("--" + flag.replace("_", "-"), dest=flag, default=None,
                            help=f"sets {'.'.join(FLAGS[flag])}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=COMMANDS[name], description=COMMANDS[name])
    return parser


def load_config(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig.defaults()
    for item in args.set:
        key, sep, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not (sep and dot):
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        cfg.set(section.strip(), name.strip(), value)
    for flag, (section, key) in FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            try:
                cfg.set(section, key, value)
            except ConfigError as exc:
                raise ConfigError(f"--{flag.replace('_', '-')}: {exc}") from None
    return cfg


def run(command, cfg):
    """Execute ``command``; returns ``(exit status, report document)``."""
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    art = Artifacts(cfg, command)
    result, status = HANDLERS[command](cfg, art)
    return status, art.report(result)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args)
        status, doc = run(args.command, cfg)
    except (SchottkyLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.quiet:
        print(json.dumps(doc["result"], indent=2, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
