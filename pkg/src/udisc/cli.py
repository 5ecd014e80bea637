"""Command-line front end.

Every subcommand reads a problem file (JSON, see README), runs one
computation and prints a report. Exit codes: 0 success, 1 computation error
or failed validation, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import channels as ch
from . import divergences as dv
from . import stategame as sg
from .linalg import DimensionMismatch, DomainError, NonHermitian, as_operator, as_state
from .sdp import SolverError

SCHEMA_VERSION = "1"
KINDS = ("states", "channels", "operators")
FLOAT_DIGITS = 12
DEFAULT_TOL = 1e-6


class InputError(ValueError):
    """Malformed problem file or arguments; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# -- problem files -------------------------------------------------------------------


def parse_matrix(obj: Any, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InputError(path, "expected a non-empty list of rows")
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise InputError(f"{path}[{i}]", "expected a row (list of [re, im] pairs)")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{path}[{i}]", f"row has {len(row)} entries, expected {width}")
        vals = []
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
            ):
                raise InputError(f"{path}[{i}][{j}]", "expected a [re, im] pair of numbers")
            vals.append(complex(entry[0], entry[1]))
        rows.append(vals)
    return np.array(rows, dtype=complex)


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[_round(z.real), _round(z.imag)] for z in row] for row in m]


def load_problem(text: str) -> dict:
    """Parse and validate a problem file; raises :class:`InputError`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("$", f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(raw, dict):
        raise InputError("$", "top level must be an object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError("schema_version", f"expected {SCHEMA_VERSION!r}, got {version!r}")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise InputError("kind", f"expected one of {KINDS}, got {kind!r}")
    out: dict = {"kind": kind, "params": {}}
    if kind in ("states", "operators"):
        mats = raw.get("matrices")
        if not isinstance(mats, list) or not mats:
            raise InputError("matrices", "expected a non-empty list of matrices")
        parsed = [parse_matrix(m, f"matrices[{i}]") for i, m in enumerate(mats)]
        d = parsed[0].shape
        for i, m in enumerate(parsed):
            if m.shape[0] != m.shape[1]:
                raise InputError(f"matrices[{i}]", f"matrix is {m.shape[0]}x{m.shape[1]}, not square")
            if m.shape != d:
                raise InputError(f"matrices[{i}]", f"shape {m.shape} differs from {d}")
            try:
                as_state(m) if kind == "states" else as_operator(m)
            except (NonHermitian, DomainError) as exc:
                raise InputError(f"matrices[{i}]", str(exc)) from None
        if kind == "operators":
            for i, m in enumerate(parsed):
                if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -1e-9:
                    raise InputError(f"matrices[{i}]", "operator is not PSD")
        out["matrices"] = parsed
        count = len(parsed)
    else:
        chans = raw.get("channels")
        if not isinstance(chans, list) or not chans:
            raise InputError("channels", "expected a non-empty list of channels")
        parsed = []
        for i, c in enumerate(chans):
            if not isinstance(c, dict) or "kraus" not in c:
                raise InputError(f"channels[{i}]", "expected an object with a 'kraus' list")
            ks = c["kraus"]
            if not isinstance(ks, list) or not ks:
                raise InputError(f"channels[{i}].kraus", "expected a non-empty list of matrices")
            ops = [parse_matrix(k, f"channels[{i}].kraus[{j}]") for j, k in enumerate(ks)]
            try:
                parsed.append(ch.Channel(ops))
            except (DomainError, DimensionMismatch) as exc:
                raise InputError(f"channels[{i}]", str(exc)) from None
        dims = {(c.dim_in, c.dim_out) for c in parsed}
        if len(dims) != 1:
            raise InputError("channels", "channels have different dimensions")
        out["channels"] = parsed
        count = len(parsed)
    priors = raw.get("priors")
    if priors is None:
        out["priors"] = [1.0 / count] * count
    else:
        if not isinstance(priors, list) or len(priors) != count:
            raise InputError("priors", f"expected a list of {count} numbers")
        if not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in priors):
            raise InputError("priors", "priors must be numbers")
        if any(p <= 0 for p in priors) or abs(sum(priors) - 1) > 1e-10:
            raise InputError("priors", "priors must be positive and sum to 1")
        out["priors"] = [float(p) for p in priors]
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise InputError("params", "expected an object")
    out["params"] = params
    return out


# -- reports ---------------------------------------------------------------------------


def _round(x: float):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return float(f"{x:.{FLOAT_DIGITS}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj) and obj.ndim == 2:
            return matrix_to_json(obj)
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(obj)
    return obj


def _flatten(prefix: str, obj, out: dict):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(obj, list) and obj and not all(isinstance(v, (int, float, str)) for v in obj):
        out[prefix] = json.dumps(obj, separators=(",", ":"))
    elif isinstance(obj, list):
        out[prefix] = ";".join(str(v) for v in obj)
    else:
        out[prefix] = obj


def emit(report: dict, fmt: str = "json") -> str:
    """Serialize a report deterministically; CSV writes one row per sweep entry."""
    clean = _clean(report)
    if fmt == "json":
        return json.dumps(clean, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    base = {"command": clean.get("command")}
    _flatten("param", clean.get("parameters", {}), base)
    rows = clean.get("rows") or [clean.get("results", {})]
    flat_rows = []
    for row in rows:
        r = dict(base)
        _flatten("", row, r)
        flat_rows.append(r)
    fields: list[str] = []
    for r in flat_rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in flat_rows:
        w.writerow(r)
    return buf.getvalue()


def _check(name: str, lhs: float, rhs: float, tol: float, relation: str = "<=") -> dict:
    if relation == "<=":
        passed = lhs <= rhs + tol
    else:
        passed = abs(lhs - rhs) <= tol
    return {"name": name, "relation": relation, "lhs": lhs, "rhs": rhs, "tolerance": tol, "passed": bool(passed)}


# -- parameter resolution ----------------------------------------------------------------


def _param(args, prob, name, default=None, cast=float):
    val = getattr(args, name, None)
    if val is None:
        val = prob["params"].get(name, default)
    if val is None:
        return None
    try:
        return cast(val)
    except (TypeError, ValueError):
        raise InputError(f"params.{name}", f"cannot interpret {val!r}") from None


def _eta_list(args, prob) -> list[float]:
    raw = args.eta if args.eta is not None else prob["params"].get("eta", 0.0)
    if isinstance(raw, str):
        try:
            vals = [float(v) for v in raw.split(",") if v.strip()]
        except ValueError:
            raise InputError("--eta", f"cannot parse {raw!r}") from None
    elif isinstance(raw, list):
        vals = [float(v) for v in raw]
    else:
        vals = [float(raw)]
    for v in vals:
        if not 0 <= v < 1:
            raise InputError("eta", f"{v} is outside [0, 1)")
    return vals


def _require(prob, kind, command):
    allowed = (kind,) if isinstance(kind, str) else kind
    if prob["kind"] not in allowed:
        raise InputError("kind", f"{command} needs a problem of kind {' or '.join(allowed)}")


# -- subcommands ----------------------------------------------------------------------------


def cmd_divergence(args, prob):
    _require(prob, "states", "divergence")
    mats = prob["matrices"]
    if len(mats) != 2:
        raise InputError("matrices", "divergence needs exactly two states")
    kind = args.kind or prob["params"].get("kind", "umegaki")
    alpha = _param(args, prob, "alpha", 2.0)
    eps = _param(args, prob, "eps", 0.1)
    params = {"kind": kind}
    if kind == "hypothesis":
        value = dv.hypothesis_testing_divergence(mats[0], mats[1], eps)
        params["eps"] = eps
    elif kind in dv.DIVERGENCES:
        value = dv.divergence(kind, mats[0], mats[1], alpha if kind in ("sandwiched", "geometric") else None)
        if kind in ("sandwiched", "geometric"):
            params["alpha"] = alpha
    else:
        raise InputError("--kind", f"unknown divergence {kind!r}")
    return params, {"value": value}, {}, None


def cmd_radius(args, prob):
    _require(prob, "states", "radius")
    kind = args.kind or prob["params"].get("kind", "umegaki")
    if kind not in dv.DIVERGENCES:
        raise InputError("--kind", f"unknown divergence {kind!r}")
    alpha = _param(args, prob, "alpha", 2.0) if kind in ("sandwiched", "geometric") else None
    res = dv.radius(prob["matrices"], kind, alpha)
    params = {"kind": kind, "alpha": alpha} if alpha is not None else {"kind": kind}
    results = {"value": res.value, "per_state_divergences": res.per_state_divergences}
    certs = {"tau": res.optimizer_tau} if res.optimizer_tau is not None else {}
    return params, results, {"iterations": res.iterations, "method": res.method}, certs


def cmd_state_game(args, prob):
    _require(prob, "states", "state-game")
    e = sg.Ensemble(tuple(prob["matrices"]), tuple(prob["priors"]))
    rows, certs = [], {}
    gaps, iters = [], []
    for eta in _eta_list(args, prob):
        cfg = sg.GameConfig(eta=eta)
        primal = sg.succ_prob_primal(e, cfg)
        dual = sg.succ_prob_dual(e, cfg)
        rows.append(
            {
                "eta": eta,
                "success_probability": primal.success_probability,
                "dual_value": dual.success_probability,
                "classical_success": sg.classical_success(e.priors, eta),
            }
        )
        gaps.append(primal.gap)
        iters.append(primal.iterations)
        certs[f"eta={eta:g}"] = {"povm": primal.optimal_povm, "dual_certificate": dual.dual_certificate}
    diag = {"gap": max(gaps), "iterations": iters}
    if len(rows) == 1:
        return {"eta": rows[0]["eta"]}, rows[0], diag, certs
    return {"eta": [r["eta"] for r in rows]}, rows, diag, certs


def cmd_qre(args, prob):
    _require(prob, ("states", "operators"), "qre")
    res = sg.q_re(prob["matrices"])
    star = sg.eta_star(prob["matrices"])
    results = {"value": res.value, "dual_value": res.dual_value, "eta_star": star}
    return {}, results, {"gap": res.gap}, {"P": res.P, "Y": res.Y}


def cmd_advantage(args, prob):
    _require(prob, "states", "advantage")
    rows = []
    for eta in _eta_list(args, prob):
        ratio, q = sg.advantage_ratio(prob["matrices"], eta)
        rows.append({"eta": eta, "ratio_at_uniform": ratio, "q_re": q})
    if len(rows) == 1:
        return {"eta": rows[0]["eta"]}, rows[0], {}, None
    return {"eta": [r["eta"] for r in rows]}, rows, {}, None


def cmd_channel_divergence(args, prob):
    _require(prob, "channels", "channel-divergence")
    cs = prob["channels"]
    if len(cs) != 2:
        raise InputError("channels", "channel-divergence needs exactly two channels")
    alpha = _param(args, prob, "alpha", 2.0)
    value = ch.channel_geometric_renyi(cs[0], cs[1], alpha)
    return {"alpha": alpha}, {"value": value}, {}, None


def cmd_channel_bound(args, prob):
    _require(prob, "channels", "channel-bound")
    alpha = _param(args, prob, "alpha", None)
    l = _param(args, prob, "l", None, int)
    if alpha is None:
        l = 1 if l is None else l
        alpha = 1 + 2.0**-l
    n = _param(args, prob, "n", 1, int)
    rows = []
    sdp_res = ch.channel_radius_sdp(prob["channels"], alpha)
    for eta in _eta_list(args, prob):
        bound = ch.channel_exponent_bound(prob["channels"], prob["priors"], eta, n, alpha)
        rows.append({"eta": eta, "sdp_value": sdp_res.value, "bound": bound})
    params = {"alpha": alpha, "n": n}
    certs = {"J_T": sdp_res.J_T} if sdp_res.J_T is not None else {}
    diag = {"gap": sdp_res.gap, "iterations": sdp_res.iterations}
    if len(rows) == 1:
        params["eta"] = rows[0]["eta"]
        return params, rows[0], diag, certs
    params["eta"] = [r["eta"] for r in rows]
    return params, rows, diag, certs


def cmd_simulate(args, prob):
    _require(prob, "channels", "simulate")
    cs = prob["channels"]
    n = _param(args, prob, "n", 1, int)
    seed = _param(args, prob, "seed", 0, int)
    samples = _param(args, prob, "samples", 50, int)
    d_ref = _param(args, prob, "d_ref", 2, int)
    alpha = _param(args, prob, "alpha", 1.5)
    tol = _param(args, prob, "tol", DEFAULT_TOL)
    eta = _eta_list(args, prob)[0]
    rng = np.random.default_rng(seed)
    bound = ch.channel_exponent_bound(cs, prob["priors"], eta, n, alpha)
    exps = []
    for _ in range(samples):
        p = ch.random_protocol(n, cs[0].dim_in, cs[0].dim_out, d_ref, rng)
        succ = ch.protocol_success(ch.simulate_protocol(p, cs), prob["priors"], eta)
        exps.append(sg.exponent(succ, n))
    worst = max(exps)
    checks = [_check("channel_bound", worst, bound, tol)]
    params = {"n": n, "seed": seed, "samples": samples, "d_ref": d_ref, "alpha": alpha, "eta": eta, "tol": tol}
    results = {"max_exponent": worst, "bound": bound, "violations": sum(x > bound + tol for x in exps)}
    return params, results, {"exponents": exps}, None, checks


def cmd_validate(args, prob):
    tol = _param(args, prob, "tol", DEFAULT_TOL)
    seed = _param(args, prob, "seed", 0, int)
    checks = []
    if prob["kind"] == "channels":
        cs = prob["channels"]
        n = _param(args, prob, "n", 1, int)
        samples = _param(args, prob, "samples", 20, int)
        for x, c in enumerate(cs):
            checks.append(_check(f"self_divergence[{x}]", ch.channel_geometric_renyi(c, c, 2.0), 0.0, tol, "=="))
        rng = np.random.default_rng(seed)
        for eta in _eta_list(args, prob):
            bound = ch.channel_exponent_bound(cs, prob["priors"], eta, n, 1.5)
            worst = -np.inf
            for _ in range(samples):
                p = ch.random_protocol(n, cs[0].dim_in, cs[0].dim_out, 2, rng)
                succ = ch.protocol_success(ch.simulate_protocol(p, cs), prob["priors"], eta)
                worst = max(worst, sg.exponent(succ, n))
            checks.append(_check(f"channel_bound[eta={eta:g}]", worst, bound, tol))
        seq, _ = ch.channel_radius_sequence(cs, 2)
        checks.append(_check("alpha_sequence_monotone", seq[1][1], seq[0][1], tol))
        return {"tol": tol, "seed": seed, "n": n}, {"passed": all(c["passed"] for c in checks)}, {}, None, checks
    _require(prob, ("states", "operators"), "validate")
    mats = prob["matrices"]
    if prob["kind"] == "states":
        e = sg.Ensemble(tuple(mats), tuple(prob["priors"]))
        base = None
        for eta in _eta_list(args, prob):
            cfg = sg.GameConfig(eta=eta)
            primal = sg.succ_prob_primal(e, cfg).success_probability
            dual = sg.succ_prob_dual(e, cfg).success_probability
            checks.append(_check(f"duality[eta={eta:g}]", primal, dual, tol, "=="))
            if base is None:
                base = sg.succ_prob_primal(e, sg.GameConfig(0.0)).success_probability
            checks.append(_check(f"eta_scaling[eta={eta:g}]", primal, (1 - eta) * base, tol, "=="))
            _, gamma = sg.hypothesis_test_certificate(e, cfg)
            checks.append(_check(f"certificate[eta={eta:g}]", gamma, primal, tol, "=="))
            for alpha in (1.5, 2.0):
                bound = sg.radius_exponent_bound(e, sg.GameConfig(eta=eta, alpha=alpha))
                if np.isfinite(bound):
                    checks.append(_check(f"radius_bound[eta={eta:g},alpha={alpha:g}]", sg.exponent(primal), bound, tol))
    q = sg.q_re(mats)
    checks.append(_check("qre_duality", q.value, q.dual_value, tol, "=="))
    checks.append(_check("qre_lower", max(np.trace(m).real for m in mats), q.value, tol))
    return {"tol": tol, "seed": seed}, {"passed": all(c["passed"] for c in checks)}, {}, None, checks


COMMANDS = {
    "divergence": cmd_divergence,
    "radius": cmd_radius,
    "state-game": cmd_state_game,
    "qre": cmd_qre,
    "advantage": cmd_advantage,
    "channel-divergence": cmd_channel_divergence,
    "channel-bound": cmd_channel_bound,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError("argv", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="udisc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--input", required=True, help="problem file (JSON)")
        sp.add_argument("--output", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--eta", help="abstention weight; a comma list runs a sweep")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--l", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--eps", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--certificates", action="store_true", help="include optimizers in the report")
        if name in ("divergence", "radius"):
            sp.add_argument("--kind", help="sandwiched, geometric, umegaki, bs (divergence also: hypothesis)")
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        try:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError("--input", f"cannot read file: {exc.strerror}") from None
        prob = load_problem(text)
        out = COMMANDS[args.command](args, prob)
    except InputError as exc:
        stderr.write(f"input error: {exc}\n")
        return 2
    except (SolverError, DomainError, DimensionMismatch, np.linalg.LinAlgError, ValueError) as exc:
        stderr.write(f"computation error: {exc}\n")
        return 1
    params, results, diag, certs = out[:4]
    checks = out[4] if len(out) > 4 else []
    report: dict = {"command": args.command, "parameters": params}
    if isinstance(results, list):
        report["rows"] = results
    else:
        report["results"] = results
    report["tolerance"] = _param(args, prob, "tol", DEFAULT_TOL)
    report["diagnostics"] = diag
    report["checks"] = checks
    if args.certificates and certs:
        report["certificates"] = certs
    text = emit(report, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 1 if any(not c["passed"] for c in checks) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
