"""Command line driver: load an operator description, run one pipeline
command, and emit deterministic report files.

Commands
  bands              sweep the quasimomentum window, write the band table
  gaps               sweep, merge ranges, list gaps, attach the criteria
  verify-asymptotics residual diagnostics against the comparison curves
  chardet            multiplier table of the transfer matrix over a
                     lambda grid spanning the comparison curves
  check-conditions   finite-gap criteria from the averaged matrix alone

Every run writes meta.json with the resolved configuration next to the
command's own output file.  Output is byte-reproducible: fixed column
order, fixed float formatting, no timestamps.  Exit codes: 0 ok, 1 bad
input, 2 numerical failure, 3 violated hypothesis (for example a
non-Hermitian averaged matrix where self-adjointness is required).
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .asymptotics import fit_error_constants, mu_pred, verify_eigenvalue_asymptotics
from .coeffs import load_operator_spec, mean_matrix
from .defaults import DEFAULT_T_POINTS, TOLERANCES, truncation_for
from .galerkin import BlochProblem, assemble_bloch_matrix, convergence_check
from .monodromy import char_poly_in_u
from .spectrum import (
    certified_window,
    check_theorem3,
    merge_and_gaps,
    sweep_bands,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_HYPOTHESIS = 3

_LABELS = {EXIT_INPUT: "input", EXIT_NUMERICAL: "numerical", EXIT_HYPOTHESIS: "hypothesis"}
_COMMANDS = ("bands", "gaps", "verify-asymptotics", "chardet", "check-conditions")

# fixed interior quasimomentum for the diagnostics and convergence
# certificates; away from t = 0 and t = pi where even-order predictors
# are not meaningful
DIAGNOSTIC_T = 1.0


class _Failure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation: one input file, one command, one output dir."""

    input: str
    command: str
    k_min: int = -3
    k_max: int = 3
    t_points: int = DEFAULT_T_POINTS
    truncation: object = "auto"
    out: str = "out"
    format: str = "csv"
    tol: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValueError("unknown command %r" % (self.command,))
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if self.t_points < 17:
            raise ValueError("t_points must be at least 17")
        if self.truncation != "auto":
            if int(self.truncation) != self.truncation or self.truncation < 8:
                raise ValueError("explicit truncation must be an integer >= 8")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        for key in self.tol:
            if key not in TOLERANCES:
                raise ValueError("unknown tolerance %r (known: %s)"
                                 % (key, ", ".join(sorted(TOLERANCES))))


def _fmt(x):
    return "%.17g" % float(x)


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _jsonable(obj):
    # reports carry numpy scalars and tuples; emit plain JSON types only
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _hypothesis(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        raise _Failure(EXIT_HYPOTHESIS, str(exc))


def _require_selfadjoint(spec, tol):
    if not spec.self_adjoint_declared:
        raise _Failure(EXIT_HYPOTHESIS,
                       "this command needs an operator declared self-adjoint")
    # the declaration is trusted nowhere else, so probe one fiber up front;
    # the usual cause is an odd-order input missing its completion terms
    probe = assemble_bloch_matrix(
        BlochProblem(spec=spec, t=DIAGNOSTIC_T, K=max(8, 2 * spec.p_max)))
    defect = float(np.abs(probe - probe.conj().T).max(initial=0.0))
    scale = max(1.0, float(np.abs(probe).max(initial=0.0)))
    if defect > tol["tau_herm"] * scale:
        raise _Failure(EXIT_HYPOTHESIS,
                       "declared self-adjoint but the fiber matrix has Hermitian "
                       "defect %.3e; odd-order operators need their lower-order "
                       "completion terms spelled out in the input" % defect)


def _resolve_truncation(config, spec):
    if config.truncation == "auto":
        return truncation_for(max(abs(config.k_min), abs(config.k_max)), spec.p_max)
    return int(config.truncation)


def _tolerances(config):
    resolved = dict(TOLERANCES)
    resolved.update({k: float(v) for k, v in config.tol.items()})
    return resolved


def _certificate(spec, K, ks, tol):
    report = convergence_check(spec, DIAGNOSTIC_T, K, ks, tau_conv=tol["tau_conv"])
    return {
        "t": report.t,
        "K": report.K,
        "K_fine": report.K_fine,
        "k_window": list(report.k_window),
        "max_drift": report.max_drift,
        "tau_conv": report.tau_conv,
        "passed": report.passed,
    }


def _band_rows(bands):
    for band in bands:
        for t, lam in band.samples:
            yield ["%d" % band.k, "%d" % band.j, _fmt(t), _fmt(lam)]


def _band_summary(band):
    return {
        "k": band.k,
        "j": band.j,
        "lo": band.lo,
        "hi": band.hi,
        "continuity_ok": band.continuity_ok,
        "tracking_ambiguous": band.tracking_ambiguous,
    }


def _criteria_doc(report):
    return {
        "a_applies": report.a_applies,
        "b_applies": report.b_applies,
        "c_applies": report.c_applies,
        "c_witness": list(report.c_witness) if report.c_witness else None,
        "min_diam": report.min_diam,
        "min_triple": list(report.min_triple) if report.min_triple else None,
        "alpha_bound": report.alpha_bound,
        "prediction": report.prediction,
    }


def _cmd_bands(spec, config, out_dir, meta, tol):
    _require_selfadjoint(spec, tol)
    _hypothesis(mean_matrix, spec)
    K = meta["config"]["truncation"]
    ks = range(config.k_min, config.k_max + 1)
    bands = sweep_bands(spec, ks, K=K, t_points=config.t_points)
    meta["convergence"] = _certificate(spec, K, ks, tol)
    if config.format == "csv":
        _write_csv(out_dir / "bands.csv", ["k", "j", "t", "lam"], _band_rows(bands))
    else:
        doc = [dict(_band_summary(b), samples=[[t, lam] for t, lam in b.samples])
               for b in bands]
        _write_json(out_dir / "bands.json", doc)


def _cmd_gaps(spec, config, out_dir, meta, tol):
    _require_selfadjoint(spec, tol)
    avg = _hypothesis(mean_matrix, spec)
    K = meta["config"]["truncation"]
    ks = range(config.k_min, config.k_max + 1)
    bands = sweep_bands(spec, ks, K=K, t_points=config.t_points)
    report = merge_and_gaps(bands, certified_window(bands), tau_merge=tol["tau_merge"])
    criteria = check_theorem3(avg, spec.n, spec.m)
    meta["convergence"] = _certificate(spec, K, ks, tol)
    _write_json(out_dir / "gaps.json", {
        "window": list(report.window),
        "merged": [list(iv) for iv in report.merged],
        "gaps": [list(iv) for iv in report.gaps],
        "criteria": _criteria_doc(criteria),
        "bands": [_band_summary(b) for b in report.bands],
    })


def _cmd_verify(spec, config, out_dir, meta, tol):
    _require_selfadjoint(spec, tol)
    _hypothesis(mean_matrix, spec)
    ks = range(config.k_min, config.k_max + 1)
    if any(abs(k) < 2 for k in ks):
        raise _Failure(EXIT_HYPOTHESIS,
                       "asymptotic diagnostics need |k| >= 2 for every k in range")
    K = meta["config"]["truncation"]
    diags = verify_eigenvalue_asymptotics(spec, DIAGNOSTIC_T, ks, K=K)
    meta["t"] = DIAGNOSTIC_T
    meta["fitted_constants"] = fit_error_constants(diags)
    meta["convergence"] = _certificate(spec, K, ks, tol)
    header = ["k", "j", "t", "lambda_computed", "mu_pred", "residual",
              "normalized_residual", "eigfn_deviation", "normalized_eigfn_dev",
              "bk_term", "case_id", "ambiguous"]
    rows = [["%d" % d.k, "%d" % d.j, _fmt(d.t), _fmt(d.lambda_computed),
             _fmt(d.mu_pred), _fmt(d.residual), _fmt(d.normalized_residual),
             _fmt(d.eigfn_deviation), _fmt(d.normalized_eigfn_dev),
             _fmt(d.bk_term), d.case_id, "%d" % d.ambiguous]
            for d in diags]
    _write_csv(out_dir / "diagnostics.csv", header, rows)


def _cmd_chardet(spec, config, out_dir, meta, tol):
    avg = _hypothesis(mean_matrix, spec)
    probes = [-np.pi / 2, 0.0, np.pi / 2, np.pi, 1.5 * np.pi]
    values = [mu_pred(avg, spec.n, k, t, j)
              for k in range(config.k_min, config.k_max + 1)
              for t in probes
              for j in range(1, spec.m + 1)]
    lo, hi = min(values), max(values)
    if not lo < hi:
        raise _Failure(EXIT_HYPOTHESIS, "degenerate lambda window for the multiplier table")
    grid = np.linspace(lo, hi, config.t_points)
    meta["lambda_window"] = [lo, hi]
    rows = []
    for lam in grid:
        cp = char_poly_in_u(spec, float(lam), tau_wr=tol["tau_wr"])
        roots = sorted(cp.roots, key=lambda u: (u.real, u.imag))
        for u in roots:
            rows.append([_fmt(lam), _fmt(u.real), _fmt(u.imag),
                         _fmt(abs(abs(u) - 1.0)), "%d" % cp.steps,
                         _fmt(cp.liouville_defect)])
    header = ["lam", "root_re", "root_im", "offcircle", "steps", "liouville_defect"]
    _write_csv(out_dir / "chardet.csv", header, rows)


def _cmd_check(spec, config, out_dir, meta, tol):
    avg = _hypothesis(mean_matrix, spec)
    criteria = _hypothesis(check_theorem3, avg, spec.n, spec.m)
    _write_json(out_dir / "criteria.json", _criteria_doc(criteria))


_DISPATCH = {
    "bands": _cmd_bands,
    "gaps": _cmd_gaps,
    "verify-asymptotics": _cmd_verify,
    "chardet": _cmd_chardet,
    "check-conditions": _cmd_check,
}


def run(config):
    """Execute one command; returns the process exit code."""
    try:
        try:
            if not Path(config.input).is_file():
                raise ValueError("input file not found: %s" % config.input)
            spec = load_operator_spec(config.input)
        except (OSError, ValueError) as exc:
            raise _Failure(EXIT_INPUT, str(exc))
        tol = _tolerances(config)
        out_dir = Path(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "config": {
                "input": str(config.input),
                "command": config.command,
                "k_min": config.k_min,
                "k_max": config.k_max,
                "t_points": config.t_points,
                "truncation": _resolve_truncation(config, spec),
                "format": config.format,
                "out": str(config.out),
            },
            "tolerances": tol,
        }
        try:
            _DISPATCH[config.command](spec, config, out_dir, meta, tol)
        except _Failure:
            raise
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise _Failure(EXIT_NUMERICAL, str(exc))
        _write_json(out_dir / "meta.json", meta)
        return EXIT_OK
    except _Failure as exc:
        print("blochspec error [%s]: %s" % (_LABELS[exc.code], exc.message),
              file=sys.stderr)
        return exc.code


def _parse_tol(pairs):
    tol = {}
    for item in pairs or []:
        if "=" not in item:
            raise ValueError("tolerance overrides look like KEY=VALUE, got %r" % item)
        key, _, val = item.partition("=")
        tol[key.strip().lower()] = float(val)
    return tol


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="blochspec",
        description="Spectral bands, gaps, and asymptotic diagnostics for "
                    "periodic self-adjoint operator pencils.")
    parser.add_argument("--input", required=True, help="operator description (JSON)")
    parser.add_argument("--command", required=True, choices=_COMMANDS)
    parser.add_argument("--k-min", type=int, default=-3)
    parser.add_argument("--k-max", type=int, default=3)
    parser.add_argument("--t-points", type=int, default=DEFAULT_T_POINTS,
                        help="quasimomentum grid size (also the lambda grid size "
                             "for chardet)")
    parser.add_argument("--truncation", default="auto",
                        help="harmonic cutoff K, or 'auto' for the policy value")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--format", default="csv", choices=("csv", "json"),
                        help="band table format (structured reports are always JSON)")
    parser.add_argument("--tol", action="append", metavar="KEY=VAL",
                        help="tolerance override, repeatable")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        truncation = args.truncation
        if truncation != "auto":
            truncation = int(truncation)
        config = RunConfig(input=args.input, command=args.command,
                           k_min=args.k_min, k_max=args.k_max,
                           t_points=args.t_points, truncation=truncation,
                           out=args.out, format=args.format,
                           tol=_parse_tol(args.tol))
    except ValueError as exc:
        print("blochspec error [input]: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
