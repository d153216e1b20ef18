"""Command-line front end: ``klocal <subcommand> [flags]``.

Exit codes: 0 when every checked identity holds, 1 when one fails, 2 for
usage or configuration errors.  Reports are JSON with a fixed key order;
floats are rounded to six significant digits so repeated runs diff cleanly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from klocal import __version__
from klocal import constructions as C
from klocal import monitored as M
from klocal import qca as Q
from klocal.phasepoly import commutes_with, from_edges

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

QCA_CASES = ("shift", "identity", "random", "random-ell1", "compact-diag", "compact-straight")


class UsageError(Exception):
    """Bad flags or configuration; mapped to exit code 2."""


def _r6(value: Any) -> Any:
    """Round floats (recursively) to six significant digits."""
    if isinstance(value, float):
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {k: _r6(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_r6(v) for v in value]
    return value


def emit_report(report: dict, out: str | None) -> str:
    """Serialize ``report`` and write it to ``out`` (or stdout)."""
    text = json.dumps(_r6(report), indent=2) + "\n"
    _write(text, out)
    return text


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _wrap(args: argparse.Namespace, checks: list[dict], extra: dict) -> tuple[dict, bool]:
    ok = all(c["pass"] for c in checks)
    report = {"version": __version__, "command": args.command, "config": _config_echo(args)}
    report.update(extra)
    report["checks"] = checks
    report["ok"] = ok
    if getattr(args, "bound", None):
        k, d = args.bound
        report["depth_lower_bound"] = {"k": k, "d": d, "D": C.depth_lower_bound(k, d)}
    return report, ok


def _family_checks(rep: dict, max_layers: int | None) -> list[dict]:
    checks = [
        {"identity": "composite equals entangler", "pass": rep["identity_ok"],
         "residual_edges": rep["residual_edges"], "residual_sign": rep["residual_sign"]},
        {"identity": "every gate symmetric", "pass": not rep["symmetry_failures"],
         "failures": rep["symmetry_failures"]},
    ]
    if max_layers is not None:
        checks.append({"identity": f"layers <= {max_layers}", "pass": rep["layers"] <= max_layers,
                       "layers": rep["layers"]})
    return checks


def _certificate(rep: dict) -> dict:
    return {"layers": rep["layers"], "max_support": rep["max_support"],
            "layer_assignment": rep["layer_assignment"]}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_verify_1d(args: argparse.Namespace) -> tuple[dict, bool]:
    gates = C.w_gates_1d(args.n)
    rep = C.family_report("1d-cluster", gates, C.cluster_entangler(args.n), C.ring_parity_symmetries(args.n))
    return _wrap(args, _family_checks(rep, 3), {"family": rep["family"], "n_qubits": rep["n_qubits"],
                                                "gates": rep["gates"], "depth_certificate": _certificate(rep)})


def cmd_verify_2d(args: argparse.Namespace) -> tuple[dict, bool]:
    surf = C.folded_triangular_torus(args.width, args.half_height)
    gates = C.w_gates_2d(surf)
    rep = C.family_report("2d-hypergraph", gates, C.hypergraph_entangler(surf), C.color_symmetries(surf))
    checks = _family_checks(rep, None)
    checks.append({"identity": "k <= 8", "pass": rep["max_support"] <= 8, "k": rep["max_support"]})
    return _wrap(args, checks, {"family": rep["family"], "n_qubits": rep["n_qubits"],
                                "gates": rep["gates"], "depth_certificate": _certificate(rep)})


def _negative_control(geom: C.SSPTGeometry) -> dict:
    for a, b in geom.edges:
        cz = from_edges(geom.n_sites, [(a, b)])
        for line in geom.lines:
            if not commutes_with(cz, line):
                return {"identity": "bare CZ breaks a line symmetry", "pass": True,
                        "edge": [a, b], "symmetry": line.label}
    return {"identity": "bare CZ breaks a line symmetry", "pass": False}


def cmd_verify_sspt(args: argparse.Namespace) -> tuple[dict, bool]:
    geom = C.folded_rotated_lattice(args.L, args.M)
    gates = C.sspt_gates(geom)
    rep = C.family_report("sspt", gates, C.cluster_2d_entangler(geom), geom.lines)
    checks = _family_checks(rep, None)
    checks.append(_negative_control(geom))
    return _wrap(args, checks, {"family": rep["family"], "n_qubits": rep["n_qubits"],
                                "gates": rep["gates"], "depth_certificate": _certificate(rep)})


def _behind_ancilla(ent, n_total: int):
    """Relabel ``ent`` onto qubits ``1..n`` of an ``n + 1`` qubit register."""
    return from_edges(n_total, [tuple(q + 1 for q in e) for e in ent.sorted_edges()], ent.sign)


def cmd_verify_one_to_all(args: argparse.Namespace) -> tuple[dict, bool]:
    if args.dim == 1:
        gates = C.one_to_all_1d(args.n)
        ent = C.cluster_entangler(args.n)
        syms = C.one_to_all_1d_symmetries(args.n)
        n_total = args.n + 1
    else:
        surf = C.triangular_torus(args.width, args.height)
        gates = C.one_to_all_2d(surf)
        ent = C.hypergraph_entangler(surf)
        syms = C.one_to_all_2d_symmetries(surf)
        n_total = surf.n_sites + 1
    shifted = _behind_ancilla(ent, n_total)
    rep = C.family_report(f"one-to-all-{args.dim}d", gates, shifted, syms)
    residual = C.compose(C.compose_all(gates, n_total), shifted)
    anc = [list(e) for e in residual.sorted_edges() if 0 in e]
    checks = _family_checks(rep, None)
    checks.append({"identity": "no residual edge touches the ancilla", "pass": not anc, "edges": anc})
    return _wrap(args, checks, {"family": rep["family"], "n_qubits": rep["n_qubits"],
                                "gates": rep["gates"], "depth_certificate": _certificate(rep)})


def build_case(case: str, width: int, seed: int) -> Q.MargolusQCA:
    """Named test QCA used by ``qca-verify`` and ``qca-index``."""
    rng = np.random.default_rng(seed)
    if case == "shift":
        return Q.shift_qca(2)
    if case == "identity":
        return Q.identity_qca(2)
    if case == "random":
        return Q.random_qca(2, 2, rng)
    if case == "random-ell1":
        return Q.random_qca(2, 1, rng)
    if case == "compact-diag":
        return Q.compactify_2d_shift(width, diagonal=True)
    if case == "compact-straight":
        return Q.compactify_2d_shift(width, diagonal=False)
    raise UsageError(f"unknown case {case!r}")


def cmd_qca_verify(args: argparse.Namespace) -> tuple[dict, bool]:
    q = build_case(args.case, args.width, args.seed)
    if args.region % 2 or args.region < 2:
        raise UsageError(f"--region must be even and >= 2, got {args.region}")
    try:
        dev = Q.verify_ring_equality(q, args.region, args.norm)
    except Q.BudgetError as exc:
        raise UsageError(str(exc)) from None
    _, layout, cert = Q.build_vr(q, args.region, dense=False)
    idx = Q.gnvw_index(q)
    checks = [
        {"identity": "W1 VR W2 equals Q on the ring", "pass": dev <= args.tol, "deviation": dev},
        {"identity": "VR has depth 2", "pass": len(cert) == 2},
    ]
    return _wrap(args, checks, {
        "case": args.case, "ring_size": layout.size, "deviation": dev,
        "index": {"num": idx.numerator, "den": idx.denominator}, "depth_certificate": cert,
    })


def cmd_qca_index(args: argparse.Namespace) -> tuple[dict, bool]:
    q = build_case(args.case, args.width, args.seed)
    idx = Q.gnvw_index(q)
    rev = Q.gnvw_index(Q.reversed_qca(q))
    checks = [{"identity": "reversed index is the reciprocal", "pass": idx * rev == 1}]
    return _wrap(args, checks, {
        "case": args.case,
        "index": {"num": idx.numerator, "den": idx.denominator},
        "reversed_index": {"num": rev.numerator, "den": rev.denominator},
    })


def cmd_monitored_sweep(args: argparse.Namespace) -> tuple[str, bool]:
    rows = M.sweep(args.ensemble, args.sizes, args.p_grid, args.realizations, args.seed,
                   exact_sign=not args.up_to_sign, workers=args.workers)
    return M.sweep_csv(rows), True


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _ensembles(text: str) -> list[str]:
    vals = [t.strip() for t in text.split(",") if t.strip()]
    bad = [v for v in vals if v not in M.ENSEMBLES]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"ensembles must be among {','.join(M.ENSEMBLES)}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="klocal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"klocal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="flat key=value file; command-line flags take precedence")
        p.add_argument("--out", help="write output here instead of stdout")
        p.set_defaults(func=func)
        return p

    def add_bound(p: argparse.ArgumentParser) -> None:
        p.add_argument("--bound", nargs=2, type=int, metavar=("K", "D"),
                       help="also report the depth lower bound ceil(log_K D)")

    p = add("verify-1d", cmd_verify_1d, "1D cluster disentangler")
    p.add_argument("--n", type=int, default=8)
    add_bound(p)

    p = add("verify-2d", cmd_verify_2d, "2D hypergraph disentangler on a folded torus")
    p.add_argument("--width", type=int, default=6)
    p.add_argument("--half-height", type=int, default=6)
    add_bound(p)

    p = add("verify-sspt", cmd_verify_sspt, "subsystem SPT disentangler")
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--M", type=int, default=8)
    add_bound(p)

    p = add("verify-one-to-all", cmd_verify_one_to_all, "ancilla-assisted protocols")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--height", type=int, default=3)
    add_bound(p)

    for name, func in (("qca-verify", cmd_qca_verify), ("qca-index", cmd_qca_index)):
        p = add(name, func, "QCA ring equality" if name == "qca-verify" else "QCA index identities")
        p.add_argument("--case", choices=QCA_CASES, default="shift")
        p.add_argument("--width", type=int, default=2, help="strip width for compactified cases")
        p.add_argument("--seed", type=int, default=0)
        if name == "qca-verify":
            p.add_argument("--region", type=int, default=2)
            p.add_argument("--norm", choices=("max", "fro", "spectral"), default="max")
            p.add_argument("--tol", type=float, default=1e-9)

    p = add("monitored-sweep", cmd_monitored_sweep, "string order sweep, CSV output")
    p.add_argument("--ensemble", type=_ensembles, default=["a"])
    p.add_argument("--sizes", type=_int_list, default=[24])
    p.add_argument("--p-grid", type=_float_list, default=[0.0, 0.1])
    p.add_argument("--realizations", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--up-to-sign", action="store_true", help="accept symmetry images up to sign")
    p.add_argument("--workers", type=int, default=None, help="processes (default: KLOCAL_THREADS or 1)")
    return parser


def read_config(path: str) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    out = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str], args: argparse.Namespace):
    conf = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
    actions = {a.dest: a for a in sub._actions}
    for key, value in conf.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        act = actions[key]
        if act.nargs == 2:
            value = value.replace(",", " ").split()
        elif act.const is True and act.nargs == 0:
            value = value.lower() in ("1", "true", "yes", "on")
        sub.set_defaults(**{key: value})
    # Defaults given as strings are converted by argparse; lists need it by hand.
    new = parser.parse_args(argv)
    for key, act in actions.items():
        val = getattr(new, key, None)
        if act.nargs == 2 and isinstance(val, list) and val and isinstance(val[0], str):
            setattr(new, key, [act.type(v) for v in val])
    return new


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            args = _apply_config(parser, argv, args)
        result, ok = args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ValueError) as exc:
        print(f"klocal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(result, str):
        _write(result, args.out)
    else:
        emit_report(result, args.out)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
