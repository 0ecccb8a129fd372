"""Command-line experiments.

One experiment per subcommand, no interactive mode. Every output carries a
header echoing the full configuration as canonical JSON; rerunning from
that header (``qmetric rerun``) reproduces byte-identical bodies. CSV uses
'.' decimals and 12 significant digits. Timestamps appear only under
--stamp.

Exit codes: 0 ok, 2 precondition violated, 3 resource cap exceeded,
4 internal numerical failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys

import numpy as np

from . import __version__, approxdim, entropy, metricspace, nctorus, weyl
from .errors import PreconditionError, QMetricError

# fitted once at desk scale from the Cesàro rate experiment; used to place
# the upper-certificate scale C log n / n in torus-dim
RATE_CONSTANT = 0.2


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _config_json(command: str, params: dict) -> str:
    cfg = {"command": command}
    cfg.update({k: params[k] for k in sorted(params)})
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def _emit(out_path, header_lines: list[str], body_lines: list[str]) -> None:
    text = "".join(line + "\n" for line in header_lines + body_lines)
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _header(command: str, params: dict, stamp: bool) -> list[str]:
    lines = [f"# qmetric {__version__}", f"# config-json: {_config_json(command, params)}"]
    if stamp:
        lines.append(f"# stamp: {datetime.datetime.now().isoformat()}")
    return lines


def _emit_json(path, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------- weyl-dim


def run_weyl_dim(params: dict) -> tuple[list[str], dict]:
    p = params["p"]
    lam = params["lam"]
    delta = params["delta"]
    n_min, n_max = params["n_min"], params["n_max"]
    if n_min < 1 or n_max < n_min:
        raise PreconditionError("need 1 <= n_min <= n_max")
    lower_rows, upper_rows = [], []
    body = ["series,n,delta,dim"]
    for n in range(n_min, n_max + 1):
        window = weyl.WeylWindow(p, -n, n)
        family = weyl.weyl_unitary_family(window)
        lip_max = max(weyl.monomial_lip_norm(window, exps, lam) for exps in family)
        m = p ** (2 * (2 * n + 1))
        d_lower = approxdim.dim_exact_orthonormal(m, delta)
        delta_lower = delta / lip_max
        lower_rows.append(approxdim.DimBracket(delta_lower, d_lower, d_lower, "gns-lower"))
        delta_upper = 2.0 * lam ** (n + 1) / (1.0 - lam)
        upper_rows.append(approxdim.DimBracket(delta_upper, m, m, "cstar-upper"))
        body.append(f"lower,{n},{fmt(delta_lower)},{d_lower}")
        body.append(f"upper,{n},{fmt(delta_upper)},{m}")
    enough = len(lower_rows) >= 3
    summary = {
        "slope_lower": approxdim.mdim_regression(lower_rows)[0] if enough else None,
        "slope_upper": approxdim.mdim_regression(upper_rows)[1] if enough else None,
        "target": 4.0 * np.log(p) / np.log(1.0 / lam),
    }
    return body, summary


# ---------------------------------------------------------------- torus-dim


def run_torus_dim(params: dict) -> tuple[list[str], dict]:
    p = params["p"]
    delta = params["delta"]
    n_min, n_max = params["n_min"], params["n_max"]
    if n_min < 1 or n_max < n_min:
        raise PreconditionError("need 1 <= n_min <= n_max")
    element_summary = {}
    if params.get("element"):
        with open(params["element"], "r", encoding="utf-8") as fh:
            poly = nctorus.polynomial_from_json(fh.read())
        if poly.phase.p != p:
            raise PreconditionError("element lives on a torus of different rank")
        lo, hi = nctorus.lip_bounds(poly)
        element_summary = {"element_lip_lower": lo, "element_lip_upper": hi}
        if params.get("element_out"):
            smoothed = nctorus.cesaro_mean(poly, n_max)
            with open(params["element_out"], "w", encoding="utf-8") as fh:
                fh.write(nctorus.polynomial_to_json(smoothed) + "\n")
    body = ["series,n,delta,dim"]
    lower_rows, upper_rows = [], []
    for n in range(n_min, n_max + 1):
        m = (2 * n + 1) ** p
        lip_max = n * np.sqrt(p)  # max |k|_2 over the box
        d_lower = approxdim.dim_exact_orthonormal(m, delta)
        delta_lower = delta / lip_max
        lower_rows.append(approxdim.DimBracket(delta_lower, d_lower, d_lower, "gns-lower"))
        # upper certificate at the Cesàro rate scale; log(n+1)/n keeps the
        # grid strictly decreasing and the window certificate valid by
        # monotonicity of D in δ
        delta_upper = RATE_CONSTANT * np.log(n + 1.0) / n
        upper_rows.append(approxdim.DimBracket(delta_upper, m, m, "cstar-upper"))
        body.append(f"lower,{n},{fmt(delta_lower)},{d_lower}")
        body.append(f"upper,{n},{fmt(delta_upper)},{m}")
    enough = len(lower_rows) >= 3
    summary = {
        "slope_lower": approxdim.mdim_regression(lower_rows)[0] if enough else None,
        "slope_upper": approxdim.mdim_regression(upper_rows)[1] if enough else None,
        "target": float(p),
    }
    summary.update(element_summary)
    return body, summary


# ------------------------------------------------------------ shift-entropy


def run_shift_entropy(params: dict) -> tuple[list[str], dict]:
    p, n_max, delta = params["p"], params["n_max"], params["delta"]
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    body = ["n,lower,upper"]
    last = None
    for n in range(1, n_max + 1):
        lo, hi = entropy.shift_entropy_bracket(p, n, delta)
        body.append(f"{n},{fmt(lo)},{fmt(hi)}")
        last = (lo, hi)
    summary = {
        "target": 2.0 * np.log(p),
        "final_lower": last[0],
        "final_upper": last[1],
    }
    return body, summary


# ------------------------------------------------------------ toral-entropy


def _parse_matrix(text: str) -> np.ndarray:
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise PreconditionError(f"--T entries must be integers: {text!r}") from exc
    side = int(round(len(vals) ** 0.5))
    if side * side != len(vals):
        raise PreconditionError(f"--T needs a square number of entries, got {len(vals)}")
    return np.array(vals, dtype=np.int64).reshape(side, side)


def run_toral_entropy(params: dict) -> tuple[list[str], dict]:
    T = _parse_matrix(params["T"])
    m, n, tail = params["m"], params["n"], params["tail"]
    series = entropy.lattice_orbit_card(T, m, n)
    est = entropy.entropy_slope(series, tail)
    body = ["n,card,log_diff"]
    for i, c in enumerate(series.counts, start=1):
        diff = fmt(est.diffs[i - 2]) if i >= 2 else ""
        body.append(f"{i},{c},{diff}")
    summary = {
        "eigen_entropy": entropy.eigen_entropy(T),
        "slope": est.slope,
        "tail": tail,
    }
    return body, summary


# ------------------------------------------------------------ kolmogorov


def run_kolmogorov(params: dict) -> tuple[list[str], dict]:
    if params.get("points"):
        pts = metricspace.load_points_csv(params["points"])
        space = metricspace.FiniteMetricSpace.from_points(pts)
    elif params.get("matrix"):
        space = metricspace.FiniteMetricSpace.from_matrix(
            metricspace.load_matrix_csv(params["matrix"])
        )
    else:
        raise PreconditionError("kolmogorov needs --points or --matrix")
    deltas = metricspace.parse_delta_grid(params["delta_grid"])
    result = metricspace.box_dimension(space, deltas)
    body = ["delta,sep,spn,cover,sep_exact"]
    for s in result.stats:
        body.append(f"{fmt(s.delta)},{s.sep},{s.spn},{s.cover},{int(s.sep_exact)}")
    summary = {
        "slope_sep": result.slope,
        "slope_spn": result.slope_spn,
        "slope_cover": result.slope_cover,
    }
    return body, summary


# ------------------------------------------------------------ cesaro-rate


def run_cesaro_rate(params: dict) -> tuple[list[str], dict]:
    try:
        ns = sorted({int(x) for x in params["n_list"].split(",")})
    except ValueError as exc:
        raise PreconditionError(f"--n-list must be integers: {params['n_list']!r}") from exc
    if any(n < 2 for n in ns):
        raise PreconditionError("Cesàro rate orders must be >= 2")
    body = ["n,abs_moment,moment_ratio"]
    ratios = []
    for n in ns:
        mom = nctorus.fejer_abs_moment(n)
        ratio = mom * n / np.log(n)
        ratios.append(ratio)
        body.append(f"{n},{fmt(mom)},{fmt(ratio)}")
    summary = {"fitted_constant": float(max(ratios))}
    return body, summary


# ------------------------------------------------------------ lattice-growth


def run_lattice_growth(params: dict) -> tuple[list[str], dict]:
    T = _parse_matrix(params["T"])
    m, n = params["m"], params["n"]
    dpad = params["delta_pad"]
    series = entropy.lattice_orbit_card(T, m, n)
    diffs = series.log_diffs()
    body = ["n,card,box_bound,log_diff"]
    for i, c in enumerate(series.counts, start=1):
        bound = entropy.box_bound_card(T, m, i, dpad)
        diff = fmt(diffs[i - 2]) if i >= 2 else ""
        body.append(f"{i},{c},{fmt(bound)},{diff}")
    summary = {
        "eigen_entropy": entropy.eigen_entropy(T),
        "dominates": all(
            entropy.box_bound_card(T, m, i, dpad) >= c
            for i, c in enumerate(series.counts, start=1)
        ),
    }
    return body, summary


# ------------------------------------------------------------ dim-bracket


def run_dim_bracket(params: dict) -> tuple[list[str], dict]:
    with open(params["vectors"], "r", encoding="utf-8") as fh:
        fam = approxdim.family_from_json(fh.read())
    deltas = metricspace.parse_delta_grid(params["delta_grid"])
    brackets = [
        approxdim.dim_bracket(fam, d, params["norm_tag"], strict=not params["nonstrict"])
        for d in deltas
    ]
    body = ["delta,lower,upper,norm_tag"] + approxdim.brackets_to_csv_rows(brackets)
    summary = {"rows": len(brackets)}
    return body, summary


RUNNERS = {
    "weyl-dim": run_weyl_dim,
    "torus-dim": run_torus_dim,
    "shift-entropy": run_shift_entropy,
    "toral-entropy": run_toral_entropy,
    "kolmogorov": run_kolmogorov,
    "cesaro-rate": run_cesaro_rate,
    "lattice-growth": run_lattice_growth,
    "dim-bracket": run_dim_bracket,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmetric",
        description="dimension and entropy experiments on finite quantum metric spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None, help="CSV output path (default stdout)")
        sp.add_argument("--json-out", default=None, help="JSON summary path (default stdout)")
        sp.add_argument("--stamp", action="store_true", help="add a timestamp header line")

    sp = sub.add_parser("weyl-dim", help="UHF dimension certificates and regression")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--lam", type=float, default=0.5)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--n-min", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=3)
    common(sp)

    sp = sub.add_parser("torus-dim", help="torus dimension certificates and regression")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--n-min", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--element", default=None, help="twisted-polynomial JSON to bracket")
    sp.add_argument("--element-out", default=None, help="write its Cesàro mean as JSON")
    common(sp)

    sp = sub.add_parser("shift-entropy", help="shift entropy brackets")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--n-max", "--n", dest="n_max", type=int, default=5)
    sp.add_argument("--delta", type=float, default=0.5)
    common(sp)

    sp = sub.add_parser("toral-entropy", help="lattice growth and eigenvalue entropy")
    sp.add_argument("--T", required=True, help="comma-separated row-major entries")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=14)
    sp.add_argument("--tail", type=int, default=5)
    common(sp)

    sp = sub.add_parser("kolmogorov", help="net statistics and box dimension")
    sp.add_argument("--points", default=None, help="CSV of points, one per row")
    sp.add_argument("--matrix", default=None, help="CSV distance matrix")
    sp.add_argument("--delta-grid", required=True, help="a:b:steps geometric grid")
    common(sp)

    sp = sub.add_parser("cesaro-rate", help="Fejér moment rate table")
    sp.add_argument("--n-list", default="16,32,64,128,256,512,1024,2048,4096")
    common(sp)

    sp = sub.add_parser("lattice-growth", help="growth series with box bounds")
    sp.add_argument("--T", required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=10)
    sp.add_argument("--delta-pad", type=float, default=0.05)
    common(sp)

    sp = sub.add_parser("dim-bracket", help="dimension brackets for a vector family")
    sp.add_argument("--vectors", required=True, help="JSON family path")
    sp.add_argument("--delta-grid", required=True)
    sp.add_argument("--norm-tag", default="cstar")
    sp.add_argument("--nonstrict", action="store_true")
    common(sp)

    sp = sub.add_parser("rerun", help="re-execute the config echoed in an output file")
    sp.add_argument("source", help="file produced by a previous run")
    sp.add_argument("--out", default=None)
    sp.add_argument("--json-out", default=None)
    return parser


_CONFIG_KEYS = {
    "weyl-dim": ["p", "lam", "delta", "n_min", "n_max"],
    "torus-dim": ["p", "delta", "n_min", "n_max", "element", "element_out"],
    "shift-entropy": ["p", "n_max", "delta"],
    "toral-entropy": ["T", "m", "n", "tail"],
    "kolmogorov": ["points", "matrix", "delta_grid"],
    "cesaro-rate": ["n_list"],
    "lattice-growth": ["T", "m", "n", "delta_pad"],
    "dim-bracket": ["vectors", "delta_grid", "norm_tag", "nonstrict"],
}


def _dispatch(command: str, params: dict, out, json_out, stamp: bool) -> None:
    body, summary = RUNNERS[command](params)
    header = _header(command, params, stamp)
    _emit(out, header, body)
    if json_out is not None:
        _emit_json(json_out, summary)


def extract_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# config-json: "):
                return json.loads(line[len("# config-json: ") :])
    raise PreconditionError(f"no config-json header in {path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rerun":
            cfg = extract_config(args.source)
            command = cfg.pop("command")
            if command not in RUNNERS:
                raise PreconditionError(f"unknown command {command!r} in config")
            _dispatch(command, cfg, args.out, args.json_out, stamp=False)
        else:
            params = {k: getattr(args, k) for k in _CONFIG_KEYS[args.command]}
            _dispatch(args.command, params, args.out, args.json_out, args.stamp)
    except QMetricError as exc:
        print(f"qmetric: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"qmetric: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
