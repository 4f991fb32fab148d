"""Command-line front end.

Loads a matrix family (builtin crystal or JSON file), runs the detection /
classification / asymptotics pipelines, and emits deterministic CSV or JSON
suitable for external plotting. Exit codes: 0 success, 1 usage or parse
error, 2 no degeneracy found at the anchor, 3 domain error, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import crystal_optics, degeneracy, dp_asymptotics, ep_asymptotics
from . import family as family_mod
from .errors import (
    ChartError,
    ClassificationError,
    ConvergenceError,
    DegenerateModelError,
    DimensionError,
    DomainError,
    EigenCouplingError,
    FamilyParseError,
    FrameError,
    IndeterminateRankError,
    ModelError,
    MultiplicityError,
    ResolutionError,
    TrackingError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_DEGENERACY = 2
EXIT_DOMAIN = 3
EXIT_NO_CONVERGENCE = 4

_USAGE_ERRORS = (
    FamilyParseError, DimensionError, ChartError, DegenerateModelError,
    ResolutionError, ModelError,
)
_DEGENERACY_ERRORS = (
    MultiplicityError, ClassificationError, IndeterminateRankError, FrameError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # accept values like "-0.1,0.1" after --window / --offset / --loop
        self._negative_number_matcher = re.compile(r"^-\d|^-\.\d")

    def error(self, message):
        raise _UsageError(message)


def _fmt(x: float) -> str:
    # 17 significant digits: lossless round trip for doubles
    return f"{float(x):.17g}"


def _cnum(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _floats(text: str, what: str):
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise _UsageError(f"cannot parse {what} '{text}': {exc}") from exc


def _load_family(source: str) -> family_mod.MatrixFamily:
    builtins = crystal_optics.builtin_specs()
    if source in builtins:
        return crystal_optics.family_adapter(builtins[source])
    path = Path(source)
    if not path.exists():
        raise _UsageError(
            f"family '{source}' is neither a builtin "
            f"({', '.join(sorted(builtins))}) nor an existing file"
        )
    return family_mod.parse_family(path.read_text(encoding="utf-8"))


def _anchor_cluster(fam, at, tol_cluster, tol_rank):
    """Classify the tightest eigenvalue cluster of A(at)."""
    a = family_mod.evaluate(fam, at)
    clusters = degeneracy.find_double_eigenvalues(a, tol_cluster)
    if not clusters:
        raise ClassificationError(
            f"no eigenvalue cluster at ({', '.join(str(float(x)) for x in at)})")
    cluster = min(clusters, key=lambda c: c.internal_gap)
    kind = degeneracy.classify(a, cluster.center, tol_rank)
    return a, cluster, kind


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _emit_json(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        _write_text(out, text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(x) if not isinstance(x, str) else x for x in row)
                 for row in rows)
    return "\n".join(lines) + "\n"


def cmd_classify(opts) -> int:
    fam = _load_family(opts["family"])
    at = np.asarray(_floats(opts["at"], "--at"))
    _, cluster, kind = _anchor_cluster(fam, at, opts["tol_cluster"], opts["tol_rank"])
    report = {
        "lambda0": _cnum(cluster.center),
        "kind": kind.kind,
        "geometric_multiplicity": kind.geometric_multiplicity,
        "cluster_gap": cluster.internal_gap,
        "external_gap": cluster.external_gap,
        "codimension": degeneracy.codimension("complex-nonsymmetric", kind.kind),
    }
    _emit_json(report, opts.get("out"))
    return EXIT_OK


def _window_axes(window, res):
    vals = _floats(window, "--window") if isinstance(window, str) else list(window)
    if len(vals) == 2:
        lo1, hi1 = lo2, hi2 = vals
    elif len(vals) == 4:
        lo1, hi1, lo2, hi2 = vals
    else:
        raise _UsageError("--window needs 'lo,hi' or 'lo1,hi1,lo2,hi2'")
    if res < 2:
        raise _UsageError("--res must be at least 2")
    return np.linspace(lo1, hi1, res), np.linspace(lo2, hi2, res)


def _exact_pair(a, model_pair):
    """Exact eigenvalues assigned to a model pair + assignment margin."""
    values = np.linalg.eigvals(a)
    m = len(values)
    costs = sorted(
        (abs(values[i] - model_pair[0]) + abs(values[j] - model_pair[1]), i, j)
        for i in range(m) for j in range(m) if i != j
    )
    best = costs[0]
    margin = costs[1][0] - best[0] if len(costs) > 1 else float("inf")
    return values[best[1]], values[best[2]], margin


def cmd_surface(opts) -> int:
    if not opts.get("out"):
        raise _UsageError("surface requires --out for the CSV file")
    fam = _load_family(opts["family"])
    p0 = np.asarray(_floats(opts["at"], "--at"))
    if fam.n_params != 2:
        raise _UsageError("surface grids need a two-parameter family")
    a0, cluster, kind = _anchor_cluster(fam, p0, opts["tol_cluster"], opts["tol_rank"])
    if kind.kind == "EP":
        chain = degeneracy.jordan_chain(a0, cluster.center, opts["tol_rank"])
        model = ep_asymptotics.sensitivities(fam, chain, p0)

        def sheets_at(dp):
            sh = ep_asymptotics.surface_eval(model, dp)
            return (sh.re_plus, sh.re_minus, sh.im_plus, sh.im_minus), sh.paired()
    else:
        frame = degeneracy.dp_frame(a0, cluster.center, tol_rank=opts["tol_rank"])
        model = dp_asymptotics.dp_sensitivities(fam, frame, p0)

        def sheets_at(dp):
            sp = dp_asymptotics.split_multiparam(model, dp)
            return ((sp.re_plus, sp.re_minus, sp.im_plus, sp.im_minus),
                    (sp.lam_plus, sp.lam_minus))

    axis1, axis2 = _window_axes(opts["window"], opts["res"])
    rows = []
    for dp1 in axis1:
        for dp2 in axis2:
            dp = np.array([dp1, dp2])
            point = p0 + dp
            (re_p, re_m, im_p, im_m), pair = sheets_at(dp)
            exact_a, exact_b, margin = _exact_pair(family_mod.evaluate(fam, point), pair)
            rows.append((
                point[0], point[1], re_p, re_m, im_p, im_m,
                max(exact_a.real, exact_b.real), min(exact_a.real, exact_b.real),
                max(exact_a.imag, exact_b.imag), min(exact_a.imag, exact_b.imag),
                1.0 if margin < 1e-3 else 0.0,
            ))
    header = ["p1", "p2", "re_plus", "re_minus", "im_plus", "im_minus",
              "re_plus_exact", "re_minus_exact", "im_plus_exact",
              "im_minus_exact", "pair_margin_flag"]
    _write_text(opts["out"], _csv(header, rows))
    return EXIT_OK


def cmd_loop(opts) -> int:
    if not opts.get("out"):
        raise _UsageError("loop requires --out for the CSV file")
    if not opts.get("loop"):
        raise _UsageError("loop requires --loop a,b,r")
    vals = _floats(opts["loop"], "--loop")
    if len(vals) != 3:
        raise _UsageError("--loop needs exactly three values a,b,r")
    fam = _load_family(opts["family"])
    p0 = np.asarray(_floats(opts["at"], "--at"))
    a0, cluster, kind = _anchor_cluster(fam, p0, opts["tol_cluster"], opts["tol_rank"])
    if kind.kind != "EP":
        raise ClassificationError("loop trajectories need an EP anchor")
    chain = degeneracy.jordan_chain(a0, cluster.center, opts["tol_rank"])
    model = ep_asymptotics.sensitivities(fam, chain, p0)
    spec = ep_asymptotics.LoopSpec(a=vals[0], b=vals[1], r=vals[2],
                                   samples=opts["samples"])
    report = ep_asymptotics.loop_trajectory(model, spec)
    rows = [
        (report.phis[k], report.lam_plus[k].real, report.lam_plus[k].imag,
         report.lam_minus[k].real, report.lam_minus[k].imag)
        for k in range(len(report.phis))
    ]
    _write_text(opts["out"], _csv(
        ["phi", "re_plus", "im_plus", "re_minus", "im_minus"], rows))
    side = {
        "regime": report.regime,
        "sigma": report.sigma,
        "sigma_sign": report.sigma_sign,
        "winding_number": report.winding,
        "n_curves": report.n_curves,
        "axis_crossings": [
            {"axis": c.axis, "ordinate": c.ordinate} for c in report.crossings
        ],
    }
    out = Path(opts["out"])
    _emit_json(side, str(out.with_suffix(".json") if out.suffix == ".csv"
                         else Path(str(out) + ".json")))
    return EXIT_OK


def cmd_find_ep(opts) -> int:
    fam = _load_family(opts["family"])
    guess = np.asarray(_floats(opts["at"], "--at"))
    result = degeneracy.find_ep(fam, guess, tol_cluster=opts["tol_cluster"])
    report = {
        "p_star": [float(x) for x in result.p_star],
        "lambda0": _cnum(result.lam0),
        "iterations": result.iterations,
        "residual_history": [float(x) for x in result.residual_history],
        "gap": result.gap,
    }
    _emit_json(report, opts.get("out"))
    return EXIT_OK


def cmd_scenario(opts) -> int:
    fam = _load_family(opts["family"])
    p0 = np.asarray(_floats(opts["at"], "--at"))
    a0, cluster, kind = _anchor_cluster(fam, p0, opts["tol_cluster"], opts["tol_rank"])
    offset = (_floats(opts["offset"], "--offset")
              if opts.get("offset") else [0.0] * (fam.n_params - 1))
    if len(offset) != fam.n_params - 1:
        raise _UsageError(f"--offset needs {fam.n_params - 1} components")
    if kind.kind == "EP":
        chain = degeneracy.jordan_chain(a0, cluster.center, opts["tol_rank"])
        model = ep_asymptotics.sensitivities(fam, chain, p0)
        section = ep_asymptotics.cross_section(model, offset)
        if opts.get("format") == "csv":
            if not opts.get("out"):
                raise _UsageError("--format csv requires --out")
            rows = [
                (section.sample_p1[k], *section.sample_sheets[k])
                for k in range(len(section.sample_p1))
            ]
            _write_text(opts["out"], _csv(
                ["p1", "re_plus", "re_minus", "im_plus", "im_minus"], rows))
            return EXIT_OK
        report = {
            "kind": "EP",
            "gamma": section.gamma,
            "crossing": section.crossing,
            "p1_cross": section.p1_cross,
            "re_level": section.re_level,
            "im_level": section.im_level,
            "re_slopes": list(section.re_slopes) if section.re_slopes else None,
            "im_slopes": list(section.im_slopes) if section.im_slopes else None,
            "vertical_tangents": section.vertical_tangents,
        }
        _emit_json(report, opts.get("out"))
        return EXIT_OK
    frame = degeneracy.dp_frame(a0, cluster.center, tol_rank=opts["tol_rank"])
    model = dp_asymptotics.dp_sensitivities(fam, frame, p0)
    if opts.get("offset"):
        if opts.get("format") == "csv":
            if not opts.get("out"):
                raise _UsageError("--format csv requires --out")
            rows = []
            for dp1 in np.linspace(-0.1, 0.1, 401):
                split = dp_asymptotics.split_multiparam(
                    model, np.concatenate(([dp1], offset)))
                rows.append((p0[0] + dp1, split.re_plus, split.re_minus,
                             split.im_plus, split.im_minus))
            _write_text(opts["out"], _csv(
                ["p1", "re_plus", "re_minus", "im_plus", "im_minus"], rows))
            return EXIT_OK
        rep = dp_asymptotics.avoided_crossing_1p(model, offset)
        roots = [x for x in (rep.dp1_a, rep.dp1_b) if x is not None] or None
        cvals = [x for x in (rep.c_a, rep.c_b) if x is not None] or None
        report = {
            "kind": "DP-1p",
            "scenario": rep.scenario,
            "discriminant": rep.disc,
            "c0": _cnum(rep.c0), "c1": _cnum(rep.c1), "c2": _cnum(rep.c2),
            "dp1_roots": roots,
            "c_values": cvals,
        }
    else:
        if fam.n_params != 2:
            raise _UsageError("two-parameter classification needs n = 2; "
                              "pass --offset for the one-parameter scenario")
        rep = dp_asymptotics.surface_classification_2p(model)
        lines = (None if rep.line_a is None
                 else [[float(x) for x in rep.line_a], [float(x) for x in rep.line_b]])
        signs = None if rep.sign_a is None else [rep.sign_a, rep.sign_b]
        report = {
            "kind": "DP",
            "type": rep.kind,
            "discriminant": rep.disc,
            "c11": _cnum(rep.c11), "c12": _cnum(rep.c12), "c22": _cnum(rep.c22),
            "lines": lines,
            "line_signs": signs,
            "chart_degenerate": rep.chart_degenerate,
        }
    _emit_json(report, opts.get("out"))
    return EXIT_OK


_COMMANDS = {
    "classify": cmd_classify,
    "surface": cmd_surface,
    "loop": cmd_loop,
    "find-ep": cmd_find_ep,
    "scenario": cmd_scenario,
}

_DEFAULTS = {
    "window": "-0.1,0.1",
    "res": 41,
    "tol_cluster": 1e-6,
    "tol_rank": 1e-8,
    "samples": 720,
    "format": "json",
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="eigencoupling", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", help="builtin name or family JSON path")
        p.add_argument("--at", help="anchor point (find-ep: starting guess), comma-separated")
        p.add_argument("--window", help="grid window 'lo,hi' or 'lo1,hi1,lo2,hi2'")
        p.add_argument("--res", type=int, help="grid resolution per axis")
        p.add_argument("--tol-cluster", type=float, dest="tol_cluster")
        p.add_argument("--tol-rank", type=float, dest="tol_rank")
        p.add_argument("--loop", help="loop parameters a,b,r")
        p.add_argument("--samples", type=int, help="loop sample count")
        p.add_argument("--offset", help="fixed offsets of parameters 2..n")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--config", help="JSON config file; flags override it")
    return parser


def _merge_options(args: argparse.Namespace) -> dict:
    opts = dict(_DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise _UsageError(f"config file '{args.config}' not found")
        try:
            cfg = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise _UsageError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise _UsageError("config file must hold a JSON object")
        opts.update({str(k).replace("-", "_"): v for k, v in cfg.items()})
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        opts[key] = value
    for key in ("family", "at"):
        if not opts.get(key):
            raise _UsageError(f"--{key} is required")
    return opts


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        opts = _merge_options(args)
        return _COMMANDS[args.command](opts)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DEGENERACY_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_DEGENERACY
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, TrackingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, ConvergenceError) and exc.residual_history:
            history = ", ".join(f"{x:.3e}" for x in exc.residual_history)
            print(f"residual history: {history}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except EigenCouplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
