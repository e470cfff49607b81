"""Batch front end: ``exactcat <command> DOCUMENT [options]``.

Exit status: 0 on success, 2 when a verdict differs from ``--expect`` (or a
task's ``expect`` field), 1 on any error.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass
from typing import Callable

from . import chain, derived, indpro, resolution
from .chain import Complex
from .core import ExactStructure
from .document import Document, parse, serialize
from .errors import ExactCatError, TaskError
from .functors import by_name

OPS = ("homology", "truncate", "cone", "resolve", "vs-build", "vs-verify", "ind-resolve",
       "ml-check", "telescope", "roos", "derive", "derive-colim", "two-term")


@dataclass
class TaskResult:
    lines: list[str]
    verdict: str | None = None


def _terms(x: Complex) -> list[str]:
    if x.is_empty():
        return ["terms: 0"]
    return [f"term {n}: {x.obj(n)}" for n in reversed(x.degrees)]


def _structure(t: dict) -> ExactStructure:
    try:
        return ExactStructure.parse(t.get("structure", "abelian"))
    except ValueError as e:
        raise TaskError(str(e)) from None


def _deformation(t: dict) -> resolution.DeformationFunctor:
    name = t.get("deformation", "free")
    table = {"free": resolution.FREE_COVER, "shuffled": resolution.SHUFFLED_COVER}
    if name not in table:
        raise TaskError(f"unknown deformation {name!r}")
    return table[name]


def _need(doc: Document, t: dict, key: str, table: str):
    if key not in t:
        raise TaskError(f"task needs a {key!r} field")
    try:
        return getattr(doc, table)[t[key]]
    except KeyError:
        raise TaskError(f"unknown {key} {t[key]!r}") from None


def _int_param(t: dict, key: str, default: int | None = None) -> int:
    v = t.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool):
        raise TaskError(f"task field {key!r} must be an integer")
    return v


def _functor(t: dict):
    try:
        return by_name(t.get("functor", "id"))
    except ValueError as e:
        raise TaskError(str(e)) from None


def op_homology(doc, t):
    x = _need(doc, t, "complex", "complexes")
    h = chain.homology(x, _structure(t))
    return TaskResult(h.lines(), "acyclic" if h.is_zero() else "nonacyclic")


def op_truncate(doc, t):
    x = _need(doc, t, "complex", "complexes")
    n = _int_param(t, "degree", 0)
    side = t.get("side", "left")
    if side == "left":
        y = chain.truncate_left(x, n)
    elif side == "right":
        y = chain.truncate_right(x, n)
    else:
        raise TaskError("side must be 'left' or 'right'")
    return TaskResult(_terms(y) + chain.homology(y).lines())


def op_cone(doc, t):
    f = _need(doc, t, "chain_map", "chain_maps")
    c = chain.cone(f)
    q = _structure(t)
    qi = chain.is_quasi_iso(f, q)
    return TaskResult(_terms(c) + chain.homology(c).lines(), "quasi-iso" if qi else "not-quasi-iso")


def op_resolve(doc, t):
    x = _need(doc, t, "complex", "complexes")
    r = resolution.resolve(x, _deformation(t))
    qi = chain.is_quasi_iso(r.eta)
    epi = all(r.eta.comp(n).is_surjective() for n in r.eta.degrees)
    lines = _terms(r.complex) + [f"comparison quasi-iso: {'yes' if qi else 'no'}",
                                 f"comparison degreewise epi: {'yes' if epi else 'no'}"]
    return TaskResult(lines, "pass" if qi and epi else "fail")


def _vs(doc, t):
    x = _need(doc, t, "complex", "complexes")
    n = _int_param(t, "stages", 2)
    if n < 0:
        raise TaskError("stages must be non-negative")
    return resolution.build_vs_system(x, n, _deformation(t))


def op_vs_build(doc, t):
    v = _vs(doc, t)
    lines = []
    for n, p in enumerate(v.stages):
        ranks = ", ".join(f"{k}:{p.obj(k).generator_count}" for k in reversed(p.degrees)) or "0"
        lines.append(f"stage {n} ranks: {ranks}")
    top = v.stages[-1]
    lines += [f"top stage {s}" for s in chain.homology(top).lines()]
    return TaskResult(lines)


def op_vs_verify(doc, t):
    rep = resolution.verify_vs_system(_vs(doc, t))
    return TaskResult(rep.lines()[:-1], "pass" if rep.ok else "fail")


def _diagram(doc, t):
    return _need(doc, t, "diagram", "diagrams")


def _name(s) -> str:
    return "{" + ",".join(map(str, s)) + "}"


def op_ind_resolve(doc, t):
    x = _diagram(doc, t)
    if not isinstance(x, indpro.IndObject) or x.is_tower:
        raise TaskError("ind-resolve needs an ind diagram over a finite poset")
    r = indpro.ind_resolution(x)
    lines = [f"{_name(s)}: cover {r.cover.obj(s)}, kernel {r.kernel.obj(s)}" for s in r.cover.shape.elements]
    checks = indpro.check_ind_resolution(r, _structure(t))
    lines += [f"{k}: {'yes' if v else 'no'}" for k, v in checks.items()]
    return TaskResult(lines, "pass" if all(checks.values()) else "fail")


def _pro_tower(doc, t):
    x = _diagram(doc, t)
    if not isinstance(x, indpro.ProObject) or not x.is_tower:
        raise TaskError("this task needs a pro tower")
    return x


def op_ml_check(doc, t):
    v = indpro.ml_check(_pro_tower(doc, t))
    return TaskResult([str(v)], v.status)


def op_telescope(doc, t):
    x = _pro_tower(doc, t)
    tel = derived.telescope(x)
    rep = derived.lim_report(x)
    lines = [f"representable: {'yes' if tel.representable else 'no'}"]
    if tel.complex is not None:
        lines += _terms(tel.complex)
    lines += rep.lines()
    return TaskResult(lines, rep.lim1)


def op_roos(doc, t):
    x = _diagram(doc, t)
    if not isinstance(x, indpro.ProObject) or x.is_tower:
        raise TaskError("roos needs a pro diagram over a finite poset")
    r = derived.roos(x)
    acyclic = chain.is_quasi_iso(r.augmentation)
    lines = _terms(r.limit) + chain.homology(r.limit).lines()
    return TaskResult(lines, "acyclic" if acyclic else "nonacyclic")


def op_derive(doc, t):
    x = _need(doc, t, "complex", "complexes")
    return TaskResult(derived.left_derive(_functor(t), x, _deformation(t)).lines())


def op_derive_colim(doc, t):
    x = _diagram(doc, t)
    if not isinstance(x, indpro.IndObject) or x.is_tower:
        raise TaskError("derive-colim needs an ind diagram over a finite poset")
    return TaskResult(derived.derive_colim(_functor(t), x).lines())


def op_two_term(doc, t):
    x = _diagram(doc, t)
    if not isinstance(x, indpro.IndObject) or x.is_tower:
        raise TaskError("two-term needs an ind diagram over a finite poset")
    res = derived.two_term_check(_functor(t), x)
    return TaskResult(res.lines()[:-1], "pass" if res.ok else "fail")


HANDLERS: dict[str, Callable[[Document, dict], TaskResult]] = {
    "homology": op_homology, "truncate": op_truncate, "cone": op_cone, "resolve": op_resolve,
    "vs-build": op_vs_build, "vs-verify": op_vs_verify, "ind-resolve": op_ind_resolve,
    "ml-check": op_ml_check, "telescope": op_telescope, "roos": op_roos, "derive": op_derive,
    "derive-colim": op_derive_colim, "two-term": op_two_term,
}


def run_task(doc: Document, name: str, task: dict) -> TaskResult:
    op = task.get("op")
    if op not in HANDLERS:
        raise TaskError(f"task {name!r}: unknown op {op!r}")
    try:
        return HANDLERS[op](doc, task)
    except TaskError as e:
        raise TaskError(f"task {name!r}: {e}") from None
    except ExactCatError as e:
        raise TaskError(f"task {name!r}: {type(e).__name__}: {e}") from None


def run(doc: Document, names: list[str] | None = None, op: str | None = None,
        overrides: dict | None = None, out=None) -> int:
    """Run tasks in declaration order; returns the exit status."""
    out = out or sys.stdout
    selected = [(n, t) for n, t in doc.tasks.items()
                if (names is None or n in names) and (op is None or t.get("op") == op)]
    if names:
        missing = [n for n in names if n not in doc.tasks]
        if missing:
            raise TaskError(f"no task named {missing[0]!r}")
    status = 0
    for name, task in selected:
        task = {**task, **(overrides or {})}
        res = run_task(doc, name, task)
        out.write(f"task {name}: {task['op']}\n")
        for line in res.lines:
            out.write(f"  {line}\n")
        if res.verdict is not None:
            out.write(f"  verdict: {res.verdict}\n")
        expect = task.get("expect")
        if expect is not None:
            if res.verdict is None:
                raise TaskError(f"task {name!r}: op {task['op']!r} has no verdict to compare with")
            if str(expect).lower() != res.verdict.lower():
                out.write(f"  expectation {expect} not met\n")
                status = 2
    return status


def _suite(seed: int, count: int, out) -> int:
    """Seeded randomized self-checks across the main invariants."""
    from .sampling import rand_chain_map, rand_complex, rand_invariant_module
    rng = random.Random(seed)
    tallies = {}

    def tally(name, ok):
        good, total = tallies.get(name, (0, 0))
        tallies[name] = (good + bool(ok), total + 1)

    for _ in range(count):
        f = rand_chain_map(rng, -1, 2, 3)
        tally("cone-duality", chain.is_quasi_iso(f) == chain.is_quasi_iso_by_homology(f))
        x = rand_complex(rng, -1, 2, 2)
        v = resolution.build_vs_system(x, 2)
        tally("vs-verify", resolution.verify_vs_system(v).ok)
        m = rand_invariant_module(rng)
        k = rng.randint(2, 12)
        rep = derived.left_derive(by_name(f"tensor{k}"), Complex.concentrated(m))
        tally("tor-oracle", rep.nonzero() == derived.tor_oracle(m, k))
    bad = 0
    for name, (good, total) in tallies.items():
        out.write(f"{name}: {good}/{total}\n")
        bad += total - good
    return 0 if bad == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exactcat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("document")
        sp.add_argument("--task", action="append", help="run only the named task (repeatable)")
        sp.add_argument("--structure", choices=["abelian", "split", "puretf"])
        sp.add_argument("--expect", help="expected verdict; exit 2 when it differs")

    sp = sub.add_parser("run", help="run every task of the document in order")
    common(sp)
    sp.add_argument("--stages", type=int)
    sp = sub.add_parser("parse", help="validate a document")
    sp.add_argument("document")
    sp.add_argument("--serialize", action="store_true", help="print the normalised document")
    for op in OPS:
        sp = sub.add_parser(op, help=f"run the document's {op} tasks, or one ad hoc with --target")
        common(sp)
        sp.add_argument("--target", help="entity to run on instead of the document's tasks")
        sp.add_argument("--stages", type=int)
        sp.add_argument("--functor")
        sp.add_argument("--degree", type=int)
        sp.add_argument("--side", choices=["left", "right"])
        sp.add_argument("--deformation", choices=["free", "shuffled"])
    sp = sub.add_parser("suite", help="seeded randomized self-checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=20)
    return p


TARGET_KEY = {"homology": "complex", "truncate": "complex", "cone": "chain_map", "resolve": "complex",
              "vs-build": "complex", "vs-verify": "complex", "derive": "complex"}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "suite":
            return _suite(args.seed, args.count, out)
        doc = parse(args.document)
        if args.command == "parse":
            if args.serialize:
                out.write(serialize(doc))
            else:
                out.write(f"ok: {len(doc.modules)} modules, {len(doc.complexes)} complexes, "
                          f"{len(doc.diagrams)} diagrams, {len(doc.tasks)} tasks\n")
            return 0
        overrides = {}
        for key in ("structure", "expect", "stages", "functor", "degree", "side", "deformation"):
            val = getattr(args, key, None)
            if val is not None:
                overrides[key] = val
        if args.command == "run":
            return run(doc, args.task, None, overrides, out)
        if getattr(args, "target", None):
            task = {"op": args.command, TARGET_KEY.get(args.command, "diagram"): args.target}
            doc.tasks["(cli)"] = task
            return run(doc, ["(cli)"], None, overrides, out)
        return run(doc, args.task, args.command, overrides, out)
    except ExactCatError as e:
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return 1


def main_exit() -> None:
    sys.exit(main())
