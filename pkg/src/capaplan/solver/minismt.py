"""A small SMT-LIB2 solver for the planning encoder's fragment.

Decides quantifier-free formulas over Bool plus linear integer/real
arithmetic: boolean structure is explored by DPLL-style splitting, leaf
conjunctions are decided exactly by the provenance-tracking arithmetic in
``theory``. Named assertions are honored and ``(get-unsat-core)`` returns
the union of the labels used to refute every explored branch, covering all
independent arithmetic conflicts, not just the first one found.

Runs as a child process speaking SMT-LIB2 on stdin/stdout (``capaplan-smt``
console script or ``python -m capaplan.solver.minismt``); any solver with
compatible ``:named`` / unsat-core behavior (e.g. z3) can be substituted
via configuration.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from ..model import format_fraction
from .sexpr import SExpr, read_forms
from .theory import Atom, Labels, feasible


class SolverScriptError(Exception):
    pass


# --- formulas (negation-normal form) --------------------------------------


@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FFalse:
    labels: Labels


@dataclass(frozen=True)
class FLit:
    var: str
    positive: bool
    labels: Labels


@dataclass(frozen=True)
class FAtom:
    atom: Atom


@dataclass(frozen=True)
class FAnd:
    items: tuple


@dataclass(frozen=True)
class FOr:
    items: tuple
    labels: Labels


Formula = Union[FTrue, FFalse, FLit, FAtom, FAnd, FOr]

_TRUE = FTrue()


class Script:
    def __init__(self) -> None:
        self.sorts: dict[str, str] = {}  # var -> Bool | Int | Real
        self.assertions: list[tuple[str, Formula]] = []
        self._anon = 0
        self.last_result: str | None = None
        self.last_model: dict[str, object] | None = None
        self.last_core: list[str] | None = None

    # --- compilation ------------------------------------------------------

    def compile_linear(self, e: SExpr) -> tuple[dict[str, Fraction], Fraction]:
        if isinstance(e, int) and not isinstance(e, bool):
            return {}, Fraction(e)
        if isinstance(e, Fraction):
            return {}, e
        if isinstance(e, str):
            if self.sorts.get(e) in ("Int", "Real"):
                return {e: Fraction(1)}, Fraction(0)
            raise SolverScriptError(f"unknown numeric symbol: {e}")
        if isinstance(e, list) and e:
            head = e[0]
            args = e[1:]
            if head == "+":
                coeffs: dict[str, Fraction] = {}
                const = Fraction(0)
                for a in args:
                    c2, k2 = self.compile_linear(a)
                    const += k2
                    for v, c in c2.items():
                        coeffs[v] = coeffs.get(v, Fraction(0)) + c
                return coeffs, const
            if head == "-":
                if len(args) == 1:
                    c2, k2 = self.compile_linear(args[0])
                    return {v: -c for v, c in c2.items()}, -k2
                coeffs, const = self.compile_linear(args[0])
                for a in args[1:]:
                    c2, k2 = self.compile_linear(a)
                    const -= k2
                    for v, c in c2.items():
                        coeffs[v] = coeffs.get(v, Fraction(0)) - c
                return coeffs, const
            if head == "*":
                if len(args) != 2:
                    raise SolverScriptError("* must be binary")
                left = self.compile_linear(args[0])
                right = self.compile_linear(args[1])
                if left[0] and right[0]:
                    raise SolverScriptError("nonlinear multiplication is unsupported")
                (coeffs, const), (factor_c, factor_k) = (
                    (left, right) if right[0] == {} else (right, left)
                )
                if factor_c:
                    raise SolverScriptError("nonlinear multiplication is unsupported")
                return {v: c * factor_k for v, c in coeffs.items()}, const * factor_k
            if head == "/":
                coeffs, const = self.compile_linear(args[0])
                _, divisor = self.compile_linear(args[1])
                if divisor == 0:
                    raise SolverScriptError("division by zero")
                return {v: c / divisor for v, c in coeffs.items()}, const / divisor
        raise SolverScriptError(f"unsupported numeric term: {e!r}")

    def _cmp(self, op: str, a: SExpr, b: SExpr, neg: bool, labels: Labels) -> Formula:
        ca, ka = self.compile_linear(a)
        cb, kb = self.compile_linear(b)
        coeffs = dict(ca)
        for v, c in cb.items():
            coeffs[v] = coeffs.get(v, Fraction(0)) - c
        rhs = kb - ka  # coeffs . x  OP  rhs
        if neg:
            op = {"<=": ">", "<": ">=", ">=": "<", ">": "<="}[op]
        if op in (">", ">="):
            coeffs = {v: -c for v, c in coeffs.items()}
            rhs = -rhs
            op = "<" if op == ">" else "<="
        return FAtom(Atom.make(op, coeffs, rhs, labels))

    def _eq(self, a: SExpr, b: SExpr, neg: bool, labels: Labels) -> Formula:
        if self._is_bool(a) or self._is_bool(b):
            fa, na = self.compile_bool(a, False, labels), self.compile_bool(a, True, labels)
            fb, nb = self.compile_bool(b, False, labels), self.compile_bool(b, True, labels)
            if not neg:  # a <-> b
                return FAnd((FOr((na, fb), labels), FOr((fa, nb), labels)))
            return FAnd((FOr((fa, fb), labels), FOr((na, nb), labels)))
        ca, ka = self.compile_linear(a)
        cb, kb = self.compile_linear(b)
        coeffs = dict(ca)
        for v, c in cb.items():
            coeffs[v] = coeffs.get(v, Fraction(0)) - c
        rhs = kb - ka
        if not neg:
            return FAtom(Atom.make("=", coeffs, rhs, labels))
        lt = FAtom(Atom.make("<", dict(coeffs), rhs, labels))
        gt = FAtom(Atom.make("<", {v: -c for v, c in coeffs.items()}, -rhs, labels))
        return FOr((lt, gt), labels)

    def _is_bool(self, e: SExpr) -> bool:
        if e in ("true", "false"):
            return True
        if isinstance(e, str) and self.sorts.get(e) == "Bool":
            return True
        if isinstance(e, list) and e and e[0] in ("and", "or", "not", "=>", "<=", "<", ">=", ">"):
            return True
        if isinstance(e, list) and e and e[0] in ("=", "distinct"):
            return True
        return False

    def compile_bool(self, e: SExpr, neg: bool, labels: Labels) -> Formula:
        if e == "true":
            return FFalse(labels) if neg else _TRUE
        if e == "false":
            return _TRUE if neg else FFalse(labels)
        if isinstance(e, str):
            if self.sorts.get(e) == "Bool":
                return FLit(e, not neg, labels)
            raise SolverScriptError(f"unknown boolean symbol: {e}")
        if not isinstance(e, list) or not e:
            raise SolverScriptError(f"unsupported boolean term: {e!r}")
        head, args = e[0], e[1:]
        if head == "!":
            inner = args[0]
            return self.compile_bool(inner, neg, labels)
        if head == "not":
            return self.compile_bool(args[0], not neg, labels)
        if head == "and":
            items = tuple(self.compile_bool(a, neg, labels) for a in args)
            return FOr(items, labels) if neg else FAnd(items)
        if head == "or":
            items = tuple(self.compile_bool(a, neg, labels) for a in args)
            return FAnd(items) if neg else FOr(items, labels)
        if head == "=>":
            flat = [self.compile_bool(a, not neg, labels) for a in args[:-1]]
            flat.append(self.compile_bool(args[-1], neg, labels))
            return FAnd(tuple(flat)) if neg else FOr(tuple(flat), labels)
        if head in ("<=", "<", ">=", ">"):
            return self._cmp(head, args[0], args[1], neg, labels)
        if head == "=":
            return self._eq(args[0], args[1], neg, labels)
        if head == "distinct":
            return self._eq(args[0], args[1], not neg, labels)
        if head == "ite":
            cond_t = self.compile_bool(args[0], False, labels)
            cond_f = self.compile_bool(args[0], True, labels)
            then_f = self.compile_bool(args[1], neg, labels)
            else_f = self.compile_bool(args[2], neg, labels)
            return FAnd((FOr((cond_f, then_f), labels), FOr((cond_t, else_f), labels)))
        raise SolverScriptError(f"unsupported boolean operator: {head!r}")

    # --- commands ---------------------------------------------------------

    def declare(self, name: str, sort: str) -> None:
        if sort not in ("Bool", "Int", "Real"):
            raise SolverScriptError(f"unsupported sort: {sort}")
        self.sorts[name] = sort

    def add_assert(self, e: SExpr) -> None:
        label = None
        if isinstance(e, list) and e and e[0] == "!":
            body = e[1]
            rest = e[2:]
            for i in range(0, len(rest) - 1, 2):
                if rest[i] == ":named":
                    label = str(rest[i + 1])
            e = body
        if label is None:
            self._anon += 1
            label = f"_a{self._anon}"
        formula = self.compile_bool(e, False, Labels({label}))
        self.assertions.append((label, formula))

    def check_sat(self) -> str:
        int_vars = {v for v, s in self.sorts.items() if s == "Int"}
        outcome = _search(
            [f for _, f in self.assertions], {}, [], int_vars
        )
        if outcome[0] == "sat":
            assignment, theory_model = outcome[1], outcome[2]
            model: dict[str, object] = {}
            for name in sorted(self.sorts):
                sort = self.sorts[name]
                if sort == "Bool":
                    model[name] = assignment.get(name, (False, None))[0]
                else:
                    model[name] = theory_model.get(name, Fraction(0))
            self.last_result = "sat"
            self.last_model = model
            self.last_core = None
            return "sat"
        core = sorted(l for l in outcome[1] if not l.startswith("_a"))
        self.last_result = "unsat"
        self.last_model = None
        self.last_core = core
        return "unsat"

    def format_model(self) -> str:
        if self.last_model is None:
            return '(error "model is not available")'
        lines = ["("]
        for name, value in self.last_model.items():
            sort = self.sorts[name]
            lines.append(f"  (define-fun {name} () {sort} {_format_value(value, sort)})")
        lines.append(")")
        return "\n".join(lines)

    def format_core(self) -> str:
        if self.last_core is None:
            return '(error "unsat core is not available")'
        return "(" + " ".join(self.last_core) + ")"


def _format_value(value, sort: str) -> str:
    if sort == "Bool":
        return "true" if value else "false"
    frac: Fraction = value if isinstance(value, Fraction) else Fraction(value)
    negative = frac < 0
    frac = abs(frac)
    if sort == "Int":
        text = str(frac.numerator)
    else:
        decimal = format_fraction(frac)
        if "/" in decimal:
            text = f"(/ {frac.numerator}.0 {frac.denominator}.0)"
        else:
            text = decimal if "." in decimal else decimal + ".0"
    return f"(- {text})" if negative else text


# --- search ---------------------------------------------------------------


def _search(
    pending: list[Formula],
    assignment: dict[str, tuple[bool, Labels]],
    atoms: list[Atom],
    int_vars: set[str],
):
    """Returns ("sat", assignment, model) or ("unsat", conflict-labels)."""
    assignment = dict(assignment)
    atoms = list(atoms)
    ors: list[FOr] = []
    queue = list(pending)
    while queue:
        f = queue.pop()
        if isinstance(f, FTrue):
            continue
        if isinstance(f, FFalse):
            return ("unsat", f.labels)
        if isinstance(f, FAnd):
            queue.extend(f.items)
            continue
        if isinstance(f, FAtom):
            atoms.append(f.atom)
            continue
        if isinstance(f, FLit):
            if f.var in assignment:
                value, reason = assignment[f.var]
                if value != f.positive:
                    return ("unsat", f.labels | reason)
                continue
            assignment[f.var] = (f.positive, f.labels)
            # re-examine deferred disjunctions under the extended assignment
            queue.extend(ors)
            ors = []
            continue
        # FOr: simplify members against the current assignment
        members = []
        reasons: Labels = Labels()
        satisfied = False
        for m in f.items:
            if isinstance(m, FLit) and m.var in assignment:
                value, reason = assignment[m.var]
                if value == m.positive:
                    satisfied = True
                    break
                reasons = reasons | reason
                continue
            if isinstance(m, FTrue):
                satisfied = True
                break
            if isinstance(m, FFalse):
                reasons = reasons | m.labels
                continue
            members.append(m)
        if satisfied:
            continue
        if not members:
            return ("unsat", f.labels | reasons)
        if len(members) == 1:
            queue.append(_with_labels(members[0], reasons))
            continue
        ors.append(FOr(tuple(members), f.labels | reasons))
    # refute early: if the unconditional atoms already conflict, every
    # branch below would fail with the same arithmetic reason
    result = feasible(atoms, int_vars)
    if not result.sat:
        return ("unsat", result.conflict)
    if ors:
        branch = min(ors, key=lambda o: len(o.items))
        rest = [o for o in ors if o is not branch]
        conflict: set[str] = set(branch.labels)
        for member in branch.items:
            outcome = _search([member] + rest, assignment, atoms, int_vars)
            if outcome[0] == "sat":
                return outcome
            conflict.update(outcome[1])
        return ("unsat", Labels(conflict))
    return ("sat", assignment, result.model)


def _with_labels(f: Formula, extra: Labels) -> Formula:
    if not extra:
        return f
    if isinstance(f, FLit):
        return FLit(f.var, f.positive, f.labels | extra)
    if isinstance(f, FAtom):
        a = f.atom
        return FAtom(Atom(a.op, a.coeffs, a.rhs, a.labels | extra))
    if isinstance(f, FOr):
        return FOr(f.items, f.labels | extra)
    if isinstance(f, FAnd):
        return FAnd(tuple(_with_labels(m, extra) for m in f.items))
    if isinstance(f, FFalse):
        return FFalse(f.labels | extra)
    return f


# --- command loop ---------------------------------------------------------


def run_script(forms, out) -> None:
    script = Script()
    for form in forms:
        if not isinstance(form, list) or not form:
            continue
        head = form[0]
        try:
            if head in ("set-option", "set-info", "set-logic", "push", "pop"):
                continue
            if head == "declare-const":
                script.declare(str(form[1]), str(form[2]))
            elif head == "declare-fun":
                if form[2] != []:
                    raise SolverScriptError("only 0-arity declare-fun is supported")
                script.declare(str(form[1]), str(form[3]))
            elif head == "assert":
                script.add_assert(form[1])
            elif head == "check-sat":
                out.write(script.check_sat() + "\n")
                out.flush()
            elif head == "get-model":
                out.write(script.format_model() + "\n")
                out.flush()
            elif head == "get-unsat-core":
                out.write(script.format_core() + "\n")
                out.flush()
            elif head == "exit":
                return
            elif head == "echo":
                out.write(str(form[1]).lstrip('"') + "\n")
                out.flush()
            else:
                out.write(f'(error "unknown command: {head}")\n')
                out.flush()
        except SolverScriptError as exc:
            out.write(f'(error "{exc}")\n')
            out.flush()


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    source = sys.stdin
    path = None
    for a in args:
        if not a.startswith("-"):
            path = a
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            run_script(read_forms(fh), sys.stdout)
    else:
        run_script(read_forms(source), sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
