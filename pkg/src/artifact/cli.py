"""Command-line reports.

Every subcommand prints one JSON document (or CSV with ``--csv``) of the
form ``{command, params, results}``, where each result carries a verdict of
``pass``, ``fail`` or ``info``. The exit code is 0 when nothing failed, 1 when
some result failed and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import agreement as AG
from . import boxes as BX
from . import entanglement as E
from . import kvgames as KV
from . import states as S
from . import tensor as T

SIG_DIGITS = 12


def _round(x):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        r = float(f"{x:.{SIG_DIGITS}g}")
        return 0.0 if r == 0 else r
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist())
    if isinstance(x, (set, frozenset)):
        return sorted(_round(v) for v in x)
    return x


@dataclass
class Report:
    command: str
    params: dict
    results: list = field(default_factory=list)
    tol: float = T.TOL
    csv: bool = False

    def add(self, name, value, expected=None, tol=None, verdict=None, **extra):
        """Record a result; with ``expected`` the verdict compares |value - expected|."""
        rec = {"name": name, "value": value}
        if expected is not None:
            err = abs(float(value) - float(expected))
            rec["paper_expected"] = expected
            rec["abs_error"] = err
            if verdict is None:
                verdict = "pass" if err < (self.tol if tol is None else tol) else "fail"
        rec["verdict"] = verdict or "info"
        rec.update(extra)
        self.results.append(rec)
        return rec

    def check(self, name, ok: bool, value=None, **extra):
        return self.add(name, ok if value is None else value, verdict="pass" if ok else "fail", **extra)

    @property
    def ok(self) -> bool:
        return all(r["verdict"] != "fail" for r in self.results)

    def to_json(self) -> str:
        doc = {"command": self.command, "params": self.params, "results": self.results}
        return json.dumps(_round(doc), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "paper_expected", "abs_error", "verdict"])
        for r in self.results:
            rr = _round(r)
            w.writerow([rr["name"], json.dumps(rr["value"], sort_keys=True),
                        rr.get("paper_expected", ""), rr.get("abs_error", ""), rr["verdict"]])
        return buf.getvalue()


# ----------------------------------------------------------- subcommands


REFERENCE_TABLE = {"lambda_bisep": 0.547, "lambda_gme": 0.577, "triangle_bisep": 0.429, "triangle_gme": 0.491}


def cmd_thresholds(args, rep: Report):
    if args.query:
        params = dict(kv.split("=", 1) for kv in args.param)
        params = {k: float(v) if "." in v else int(v) for k, v in params.items()}
        rep.add(args.query, E.thresholds(args.query, **params), params=params)
        return
    for name, value in E.threshold_table(args.table).items():
        # the table lists three decimals
        rep.add(name, value, REFERENCE_TABLE[name], tol=5e-4)


def _witness_state(name: str, ps, d: int):
    if name == "lambda":
        p1, p2 = (ps + ps)[:2] if len(ps) == 1 else ps[:2]
        return S.network_state(S.lambda_graph(2, p1, p2)), 1.5 * (1 - 3 * p1 * p2)
    if name == "triangle":
        p = ps[0]
        return S.network_state(S.triangle_graph(2, p)), 3 / 64 * (11 + 15 * p - 63 * p ** 2 - 27 * p ** 3)
    if name == "ghz_robustness":
        return T.proj(S.ghz(3, 2)), -2.0
    if name == "w_robustness":
        return T.proj(S.w_state()), -2.0
    if name == "star_ghz":
        return T.proj(S.ghz(3, d)), 1 / d - 1
    raise ValueError(f"unknown witness {name!r}")


def cmd_witness(args, rep: Report):
    w = E.named_witness(args.name, 3, args.d)
    rho, expected = _witness_state(args.name, args.p or [1.0], args.d)
    val = E.witness_value(w, rho)
    rep.add("value", val, expected)
    rep.add("detection", "detected" if val < -args.tol else "not detected")
    for chk in E.verify_witness_decomposition(w):
        rep.check(f"decomposition_{chk.bipartition}", chk.ok(args.tol),
                  value={"reconstruction_error": chk.reconstruction_error,
                         "min_eig_P": chk.min_eig_P, "min_eig_Q": chk.min_eig_Q})
    if args.name == "w_robustness":
        cert = E.w_robustness_certificate()
        rep.check("robustness_upper_bound_ppt", cert["ok"], value=cert)
    if args.samples:
        lo, hi = E.soundness_scan(w, args.samples, args.seed)
        rep.check("soundness_min", lo >= -args.tol, value=lo, samples=args.samples, free_set=w.free_set)


def cmd_hardy(args, rep: Report):
    lambdas = args.lambdas or [args.l0, 1 - args.l0]
    box = BX.hardy_box(lambdas, args.alpha, args.delta)
    for (a, x), z in zip(BX.HARDY_ZEROS, BX.hardy_zeros(box)):
        rep.check(f"P({a[0]}{a[1]}|{x[0]}{x[1]})", abs(z) < 1e-10, value=z)
    p = box.prob((0, 0), (0, 0))
    rep.add("P(00|00)", p, BX.hardy_p0000_closed(lambdas[0], lambdas[1], args.alpha))
    rep.check("P(00|00)>0", p > args.tol, value=p)
    rep.check("nonsignalling", box.is_nonsignalling(args.tol), value=box.signalling_error())


def cmd_gmnl(args, rep: Report):
    f = BX.chsh_equiv()
    rep.add("chsh_equiv_local_max", BX.deterministic_max(f, "fully_local").value, 0.0, tol=1e-15)
    g = S.lambda_graph(2, 1.0)
    I3 = BX.lift_and_combine(g)
    svet = BX.deterministic_max(I3, "bilocal_all_bipartitions")
    rep.check("lambda_I3_svetlichny_max<=0", svet.value <= 1e-12, value=svet.value,
              per_bipartition=svet.per_bipartition)
    ns = BX.deterministic_max(I3, "ns_bilocal")
    rep.check("lambda_I3_ns_bilocal_max<=0", ns.value <= 1e-9, value=ns.value, per_bipartition=ns.per_bipartition)
    lambdas = [args.l0, 1 - args.l0]
    h = BX.hardy_box(lambdas, args.alpha)
    val = I3.evaluate(BX.network_box(g, [h, h]))
    rep.add("lambda_I3_hardy", val, h.prob((0, 0), (0, 0)) ** 2)
    rep.check("violation", val > 0, value=val)
    epr = BX.epr2_local_weight(h)
    rep.add("hardy_epr2_local_weight", epr.local_weight, bound=1 - h.prob((0, 0), (0, 0)))


def cmd_networks(args, rep: Report):
    d = args.d
    specs = [("lambda", E.thresholds("lambda_bisep", d=d), lambda p: S.lambda_graph(d, p)),
             ("triangle", E.thresholds("triangle_bisep", d=d), lambda p: S.triangle_graph(d, p)),
             ("tree", args.tree_p, lambda p: S.path_graph(args.K, d, p))]
    for kind, p, make in specs:
        dec = E.bisep_decomposition(make(p), kind)
        rep.check(f"{kind}_bisep_at_p={p:.6g}", bool(dec) and dec.verify(args.tol)["ok"],
                  value=dec.verify(args.tol) if dec else dec.constraint)
        above = E.bisep_decomposition(make(p * 1.01), kind)
        rep.check(f"{kind}_infeasible_at_1.01p", not above,
                  value=above.constraint if not above else "feasible")
    K = E.polygon_min_edges(args.polygon_p, d)
    rep.add("polygon_min_edges", K, p=args.polygon_p)
    for dd in (2, 3):
        for p in (0.2, 0.5, 0.8):
            ms, _norm = S.apply_local_filter(S.network_state(S.star_network(3, dd, p)),
                                             [S.star_filter(3, dd), None, None])
            val = E.witness_value(E.named_witness("star_ghz", 3, dd), ms.rho)
            rep.add(f"star_filter_d={dd}_p={p}", val, (dd - 1 - p * (dd * dd - 1)) / dd ** 2)
    for p1, p2 in ((0.9, 0.8), (0.5, 0.5)):
        out = S.simulate_teleportation(S.isotropic(2, p1), S.isotropic(2, p2))
        rep.add(f"teleport_{p1}_{p2}", float(np.abs(out - S.isotropic(2, p1 * p2)).max()), 0.0)
    for n in range(3, 9):
        pc = E.thresholds("complete_graph_gme", n=n)
        flips = (not E.complete_graph_gme_verdict(n, pc - 1e-6)) and E.complete_graph_gme_verdict(n, pc + 1e-6)
        rep.check(f"complete_graph_flip_n={n}", flips, value=pc)
    rep.add("complete_graph_distillation", "formula-level only")


def cmd_kv(args, rep: Report):
    g = KV.kv_game(args.v, args.eta)
    res = KV.kv_local_max(g, approximate=args.v > 4)
    bound = KV.kv_classical_bound(args.v, args.eta)
    rep.check("local_max", res.value <= bound + 1e-12, value=res.value, approximate=res.approximate)
    rep.add("paper_bound", bound)
    norm = KV.normalization(g.coefficients())
    rep.check("normalization", norm <= 1 + 1e-12, value=norm)
    if args.star:
        s = KV.star_kv(g, args.star)
        rep.add("star_normalization", KV.normalization(s.coeffs), norm ** args.star, tol=1e-12)
    rep.add("superactivation_limit", "formula-level only")


def _load_box(args) -> BX.BoxN:
    if args.box:
        with open(args.box) as fh:
            return BX.BoxN.from_json(json.load(fh))
    kind, *vals = args.make
    r, s, t, u = (float(v) for v in vals)
    rows = AG.nsccd_table(r, s, t, u) if kind == "ccd" else AG.nssd_table(r, s, t, u)
    if not AG.table_valid(rows):
        raise ValueError("parameters give negative table entries")
    return AG.table_to_box(rows)


def cmd_agree(args, rep: Report):
    box = _load_box(args)
    rec = AG.analyze(AG.AgreementBox(box), args.tol)
    for k in ("ns", "perfectly_correlated", "q_A", "q_B", "ccd", "singular", "tsirelson", "void_pattern", "boundary"):
        rep.add(k, rec[k])
    if args.make:
        kind, *vals = args.make
        r, s, t, u = (float(v) for v in vals)
        expected = AG.nsccd_expected(r, s, t, u) if kind == "ccd" else AG.nssd_expected(r, s, t, u)
        got = rec["ccd"] if kind == "ccd" else rec["singular"]
        rep.check("characterization", got == expected, value=got, expected_verdict=expected)


def cmd_ontmodel(args, rep: Report):
    box = _load_box(args)
    model = AG.ont_model_from_box(box)
    if not model:
        rep.add("rank_mismatch", {"rank_M": model.rank_M, "rank_augmented": model.rank_augmented})
        rep.add("nonsignalling", box.is_nonsignalling(args.tol))
        return
    rep.add("quasi_prob", model.quasi_prob.tolist())
    rep.add("sum", float(model.quasi_prob.sum()), 1.0)
    rep.add("roundtrip_error", float(np.abs(AG.box_from_ont_model(model).table - box.table).max()), 0.0, tol=1e-8)


COMMANDS = {
    "thresholds": cmd_thresholds, "witness": cmd_witness, "hardy": cmd_hardy, "gmnl": cmd_gmnl,
    "networks": cmd_networks, "kv": cmd_kv, "agree": cmd_agree, "ontmodel": cmd_ontmodel,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="csv", action="store_false", help="JSON output (default)")
    fmt.add_argument("--csv", dest="csv", action="store_true", help="CSV output")
    common.set_defaults(csv=False)
    common.add_argument("--tol", type=float, default=T.TOL)
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("thresholds", parents=[common], help="closed-form thresholds")
    s.add_argument("--table", default="lambdatriangle")
    s.add_argument("--query")
    s.add_argument("--param", nargs="*", default=[], help="key=value pairs for --query")

    s = sub.add_parser("witness", parents=[common], help="witness values and decompositions")
    s.add_argument("--name", required=True, choices=["lambda", "triangle", "ghz_robustness", "w_robustness", "star_ghz"])
    s.add_argument("--p", type=float, nargs="*")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--samples", type=int, default=0, help="random free states for a soundness scan")

    s = sub.add_parser("hardy", parents=[common], help="Hardy measurements")
    s.add_argument("--l0", type=float, default=0.8)
    s.add_argument("--lambdas", type=float, nargs="*")
    s.add_argument("--alpha", type=float, default=math.pi / 4)
    s.add_argument("--delta", type=float, default=0.0)

    s = sub.add_parser("gmnl", parents=[common], help="lifted network inequality")
    s.add_argument("--l0", type=float, default=0.8)
    s.add_argument("--alpha", type=float, default=math.pi / 4)

    s = sub.add_parser("networks", parents=[common], help="decompositions and network protocols")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--K", type=int, default=18)
    s.add_argument("--tree-p", type=float, default=0.9)
    s.add_argument("--polygon-p", type=float, default=0.5)

    s = sub.add_parser("kv", parents=[common], help="Khot-Vishnoi game")
    s.add_argument("--v", type=int, default=4)
    s.add_argument("--eta", type=float, default=0.25)
    s.add_argument("--star", type=int, default=0)

    for name in ("agree", "ontmodel"):
        s = sub.add_parser(name, parents=[common], help=f"{name} report for a two-party box")
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--box", help="box JSON file")
        src.add_argument("--make", nargs=5, metavar=("KIND", "R", "S", "T", "U"),
                         help="table constructor: ccd|sd followed by r s t u")
    return p


def run(argv=None) -> tuple[Report, int]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "make", None) and args.make[0] not in ("ccd", "sd"):
        parser.error("--make expects ccd or sd")
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "csv")}
    rep = Report(args.command, params, tol=args.tol, csv=args.csv)
    try:
        COMMANDS[args.command](args, rep)
    except ValueError as exc:
        parser.error(str(exc))
    return rep, (0 if rep.ok else 1)


def main(argv=None) -> int:
    rep, code = run(argv)
    sys.stdout.write(rep.to_csv() if rep.csv else rep.to_json() + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
