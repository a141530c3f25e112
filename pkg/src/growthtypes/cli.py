"""Command-line front end.

Exit codes: 0 pass, 1 usage or I/O, 2 the input fails a hypothesis,
3 a pipeline stage or check failed.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .assembly import (
    FINITE_TYPE,
    DiscreteGrowth,
    PlumbedComplex,
    check_lemma_z,
    check_prall_integration,
    dumps,
    leafed_trunk_growth,
    metric_audit,
    stretch_R,
    synthesize,
)
from .catalog import Catalog, CatalogParams, make_catalog, validate_catalog
from .exceptions import (
    BudgetOverflow,
    BudgetUnderflow,
    BudgetUnderflowAtS,
    GrowthError,
    HorizonExceeded,
    InvalidWitness,
    NoWitness,
    NotBgd,
    NotSuperlinear,
    PipelineError,
    StretchGap,
)
from .growth import GrowthFunction, check_bgd, check_tree_hypotheses, growth_type_equivalent, tabulate
from .normalize import growth_constant, normalize_bgd, suplinear_report
from .tree import SparseSet, build_tree, root_growth, verify_admissible

EXIT_OK, EXIT_IO, EXIT_HYPOTHESIS, EXIT_STAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    inputs: list = field(default_factory=list)
    horizon: int = None
    seed: int = 0
    mode: str = "infinite"
    a_max: int = 1000
    out: Path = None
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, ns):
        opts = {k: v for k, v in vars(ns).items() if k not in ("cmd", "func", "input", "horizon", "seed", "mode", "a_max", "out")}
        inputs = [ns.input] if getattr(ns, "input", None) else []
        for p in inputs:
            if not Path(p).exists():
                raise FileNotFoundError(p)
        horizon = getattr(ns, "horizon", None)
        if horizon is not None and horizon < 2:
            raise UsageError("--horizon must be >= 2")
        return cls(
            ns.cmd, inputs, horizon, getattr(ns, "seed", 0), getattr(ns, "mode", "infinite"),
            getattr(ns, "a_max", 1000), Path(ns.out) if getattr(ns, "out", None) else None, opts,
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_IO)


def load_sequence(path, horizon=None):
    data = json.loads(Path(path).read_text())
    if "kind" in data:
        h = horizon if horizon is not None else data.get("horizon")
        if h is None:
            raise UsageError("closed-form input needs a horizon")
        return tabulate(data, int(h))
    v = GrowthFunction.from_dict(data)
    if horizon is not None:
        v = v.truncate(horizon)
    return v


def load_params(path):
    if path is None:
        raise UsageError("catalog params are required (--params)")
    data = json.loads(Path(path).read_text())
    return CatalogParams.from_dict(data.get("params", data))


def _emit(cfg, report, name=None):
    text = dumps(report)
    if cfg.out is not None:
        target = cfg.out / name if name and cfg.out.suffix == "" else cfg.out
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
    sys.stdout.write(text)


def _lambda(cfg, values, default_num=31, default_den=16):
    num = cfg.options.get("lambda_num") or default_num
    den = cfg.options.get("lambda_den") or default_den
    C = cfg.options.get("growth_c") or growth_constant(values, num, den)
    return num, den, C


def cmd_check_bgd(cfg):
    v = load_sequence(cfg.inputs[0], cfg.horizon)
    try:
        w = check_bgd(v)
    except NotBgd as exc:
        _emit(cfg, {"bgd": False, "index": exc.index, "reason": exc.reason, "horizon": v.horizon})
        return EXIT_HYPOTHESIS
    _emit(cfg, {"bgd": True, "L": w.L, "horizon": v.horizon})
    return EXIT_OK


def cmd_normalize(cfg):
    v = load_sequence(cfg.inputs[0], cfg.horizon)
    L = cfg.options.get("L") or check_bgd(v).L
    rep = normalize_bgd(v, L, a_max=cfg.a_max)
    num = cfg.options.get("lambda_num") or rep.lam_num
    den = cfg.options.get("lambda_den") or rep.lam_den
    C = cfg.options.get("growth_c") or rep.growth_C
    verdict = check_tree_hypotheses(rep.output, num, den, C)
    doc = rep.to_dict()
    doc["tree_hypotheses"] = verdict.to_dict()
    _emit(cfg, doc)
    return EXIT_OK if verdict.passed else EXIT_STAGE


def cmd_suplinear(cfg):
    v = load_sequence(cfg.inputs[0], cfg.horizon)
    L = cfg.options.get("L") or check_bgd(v).L
    thr = cfg.options.get("threshold")
    rep = suplinear_report(v, L, Fraction(thr) if thr is not None else None)
    _emit(cfg, rep.to_dict())
    return EXIT_OK


def _parse_sparse(text):
    if not text:
        return SparseSet()
    pairs = []
    for item in text.split(","):
        n, _, t = item.partition(":")
        pairs.append((int(n), int(t or 1)))
    return SparseSet(tuple(pairs))


def cmd_build_tree(cfg):
    v = load_sequence(cfg.inputs[0], cfg.horizon)
    S = _parse_sparse(cfg.options.get("sparse"))
    num, den, C = _lambda(cfg, v.values)
    hyp = check_tree_hypotheses(v, num, den, C)
    if not hyp.passed:
        _emit(cfg, {"tree_hypotheses": hyp.to_dict()}, "build_tree.json")
        return EXIT_HYPOTHESIS
    tree = build_tree(v, S)
    guard = cfg.options.get("guard")
    guard = -(-tree.depth // 4) if guard is None else guard
    adm = verify_admissible(tree, guard)
    exact = root_growth(tree) == v
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        cap = cfg.options.get("export_max_vertices")
        (cfg.out / "tree.dot").write_text(tree.to_dot(cap))
        (cfg.out / "tree.jsonl").write_text(tree.to_jsonl(cap))
        (cfg.out / "tree.json").write_text(dumps(tree.to_dict()))
    report = {
        "tree_hypotheses": hyp.to_dict(),
        "admissibility": adm.to_dict(),
        "exact_growth": exact,
        "depth": tree.depth,
        "vertices": str(tree.vertex_count),
        "slips": list(tree.slips),
        "caps": list(tree.caps),
    }
    sys.stdout.write(dumps(report))
    return EXIT_OK if adm.passed and exact else EXIT_STAGE


def cmd_make_catalog(cfg):
    params = load_params(cfg.options.get("params"))
    cat = make_catalog(params, cfg.seed, cfg.options.get("doubling", False))
    verdict = validate_catalog(cat, params, cfg.options.get("doubling", False))
    text = cat.to_json(indent=1) + "\n"
    if cfg.out is not None:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if verdict.passed else EXIT_STAGE


def _csv(v, z):
    rows = ["n,v,z"]
    for n in range(min(v.horizon, z.horizon) + 1):
        rows.append(f"{n},{v[n]},{z[n]}")
    return "\n".join(rows) + "\n"


def cmd_synthesize(cfg):
    params = load_params(cfg.options.get("params"))
    v = load_sequence(cfg.inputs[0], cfg.horizon)
    catalog = None
    if cfg.options.get("catalog"):
        catalog = Catalog.from_dict(json.loads(Path(cfg.options["catalog"]).read_text()))
    out = cfg.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = synthesize(
            v, params, cfg.mode, cfg.seed, a_max=cfg.a_max,
            doubling=cfg.options.get("doubling", False), catalog=catalog,
        )
    except PipelineError as exc:
        failure = {"stage": exc.stage, "error": type(exc.cause).__name__, "message": str(exc.cause)}
        verdict = getattr(exc.cause, "verdict", None)
        if verdict is not None:
            failure["verdict"] = verdict.to_dict()
        (out / "audit.json").write_text(dumps({"passed": False, "failure": failure}))
        sys.stdout.write(dumps(failure))
        return EXIT_HYPOTHESIS if exc.stage == "check_bgd" else EXIT_STAGE
    cap = cfg.options.get("export_max_vertices")
    (out / "tree.dot").write_text(res.tree.to_dot(cap))
    (out / "tree.jsonl").write_text(res.tree.to_jsonl(cap))
    (out / "complex.json").write_text(dumps(res.complex_document()))
    (out / "z.json").write_text(dumps(res.growth.to_dict()))
    audit = res.audit_report()
    (out / "audit.json").write_text(dumps(audit))
    (out / "witness.json").write_text(dumps(res.witness_report()))
    if cfg.options.get("csv"):
        (out / "growth.csv").write_text(_csv(v, res.growth.z))
    summary = {"passed": audit["passed"], "witness": res.witness_report(), "selection": res.selection.to_dict()}
    sys.stdout.write(dumps(summary))
    return EXIT_OK if audit["passed"] else EXIT_STAGE


@dataclass(frozen=True)
class _RawGrowth:
    """A stored z table that is not monotone; enough for the slice sandwich to report it."""

    values: tuple

    @property
    def horizon(self):
        return len(self.values) - 1

    def increments(self):
        z = self.values
        return [z[0]] + [z[r] - z[r - 1] for r in range(1, len(z))]


def cmd_verify(cfg):
    d = Path(cfg.options["dir"])
    doc = json.loads((d / "complex.json").read_text())
    zdoc = json.loads((d / "z.json").read_text())
    raw = tuple(int(x) for x in zdoc["values"])
    cx = PlumbedComplex.from_dict(doc)
    horizon = len(raw) - 1
    if horizon != cx.horizon or horizon != int(doc["horizon_r"]):
        raise UsageError(f"horizon mismatch: z.json has {horizon}, complex.json has {doc['horizon_r']}")
    v = GrowthFunction.from_dict(doc["input"])
    a_max = cfg.options.get("a_max_override") or doc.get("a_max", 1000)
    try:
        growth = DiscreteGrowth.from_dict(zdoc)
    except ValueError as exc:
        lz = check_lemma_z(cx, _RawGrowth(raw)).to_dict()
        failed = {"passed": False, "message": f"z.json is not a growth table: {exc}"}
        report = {"passed": False, "checks": {"lemma_z": lz, "metric_audit": failed, "equivalence": failed}}
        _emit(cfg, report, "verify.json")
        return EXIT_STAGE
    checks = {
        "lemma_z": check_lemma_z(cx, growth).to_dict(),
        "metric_audit": metric_audit(cx, growth).to_dict(),
    }
    if doc.get("mode") == FINITE_TYPE:
        z0 = leafed_trunk_growth(cx)
        checks["prall_integration"] = check_prall_integration(
            growth, z0, growth.slice_growth(), z0.slice_growth(), cx.catalog.params.h, cx.catalog.params.H
        ).to_dict()
    try:
        w = growth_type_equivalent(growth.z, v, a_max)
        checks["equivalence"] = {"passed": True, "A": w.A, "horizon_checked": w.horizon_checked}
    except NoWitness as exc:
        checks["equivalence"] = {"passed": False, "message": str(exc)}
    report = {"passed": all(c["passed"] for c in checks.values()), "checks": checks}
    _emit(cfg, report, "verify.json")
    return EXIT_OK if report["passed"] else EXIT_STAGE


def cmd_stretch(cfg):
    v = load_sequence(cfg.inputs[0], cfg.horizon)
    o = cfg.options
    try:
        vals = [Fraction(o[k]) for k in ("a", "b", "A", "B", "C")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    a, b, A, B, C = vals
    if a <= 0 or b <= 0 or not A > B > C > 1:
        _emit(cfg, {"error": "need a, b > 0 and A > B > C > 1"})
        return EXIT_HYPOTHESIS
    try:
        R = stretch_R(a, b, A, B, C, v, o.get("r_min") or 0, o.get("r_max"), not o.get("no_middle"))
    except (HorizonExceeded, StretchGap) as exc:
        _emit(cfg, {"error": type(exc).__name__, "message": str(exc)})
        return EXIT_STAGE
    _emit(cfg, {"R": R, "a": str(a), "b": str(b), "A": str(A), "B": str(B), "C": str(C)})
    return EXIT_OK


HYPOTHESIS_ERRORS = (NotBgd, InvalidWitness, NotSuperlinear, BudgetOverflow, BudgetUnderflow, BudgetUnderflowAtS)


def build_parser():
    p = _Parser(prog="growthtypes", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(sp, inp=True):
        if inp:
            sp.add_argument("input", help="sequence JSON ({horizon, values} or a closed form)")
            sp.add_argument("--horizon", type=int)
        sp.add_argument("--out", help="output file or directory")

    def lam(sp):
        sp.add_argument("--lambda-num", type=int)
        sp.add_argument("--lambda-den", type=int)
        sp.add_argument("--growth-c", type=int)

    sp = sub.add_parser("check-bgd", help="minimal bgd constant")
    common(sp)
    sp.set_defaults(func=cmd_check_bgd)

    sp = sub.add_parser("normalize", help="tree-ready representative of a bgd sequence")
    common(sp)
    sp.add_argument("--L", type=int)
    sp.add_argument("--a-max", type=int, default=1000)
    lam(sp)
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("suplinear", help="representative with diverging increments")
    common(sp)
    sp.add_argument("--L", type=int)
    sp.add_argument("--threshold")
    sp.set_defaults(func=cmd_suplinear)

    sp = sub.add_parser("build-tree", help="admissible tree with the given growth")
    common(sp)
    sp.add_argument("--sparse", help="single-child trunk intervals as n:t,n:t")
    sp.add_argument("--guard", type=int)
    sp.add_argument("--export-max-vertices", type=int, default=100000)
    lam(sp)
    sp.set_defaults(func=cmd_build_tree)

    sp = sub.add_parser("make-catalog", help="seeded piece catalog")
    common(sp, inp=False)
    sp.add_argument("--params", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--doubling", action="store_true")
    sp.set_defaults(func=cmd_make_catalog)

    sp = sub.add_parser("synthesize", help="full pipeline with artifacts")
    common(sp)
    sp.add_argument("--params")
    sp.add_argument("--catalog")
    sp.add_argument("--mode", choices=["infinite", "finite-type"], default="infinite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--a-max", type=int, default=1000)
    sp.add_argument("--doubling", action="store_true")
    sp.add_argument("--export-max-vertices", type=int, default=100000)
    sp.add_argument("--csv", action="store_true")
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("verify", help="re-run the checks on stored artifacts")
    sp.add_argument("dir")
    sp.add_argument("--out")
    sp.add_argument("--a-max", dest="a_max_override", type=int)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("stretch", help="smallest admissible stretch length R")
    common(sp)
    for k in ("a", "b", "A", "B", "C"):
        sp.add_argument(f"--{k}", dest=k, required=True)
    sp.add_argument("--r-min", type=int, default=0)
    sp.add_argument("--r-max", type=int)
    sp.add_argument("--no-middle", action="store_true")
    sp.set_defaults(func=cmd_stretch)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_IO
    try:
        cfg = RunConfig.from_args(ns)
        return ns.func(cfg)
    except HYPOTHESIS_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (OSError, json.JSONDecodeError, UsageError, KeyError, ValueError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except GrowthError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
