"""Exact linear-arithmetic feasibility with conflict provenance.

Conjunctions of linear (in)equalities over rationals and integers are
decided by Gaussian substitution of equalities followed by Fourier-Motzkin
elimination, all over ``fractions.Fraction``. Every atom carries the set of
assertion labels it descends from; infeasibility returns the union of the
labels involved in a contradiction, per variable-connected component, so
independent conflicts are all reported.

Integer variables are checked by exact substitution and by integer bound
rounding after elimination; this decides every instance produced by the
planning encoder (whose integer properties are pinned by equalities or
finite value grids) but is not a complete integer decision procedure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

Labels = frozenset


@dataclass(frozen=True)
class Atom:
    """sum(coeffs[v] * v) op rhs, with op in {"<=", "<", "="}."""

    op: str
    coeffs: tuple[tuple[str, Fraction], ...]
    rhs: Fraction
    labels: Labels

    @staticmethod
    def make(op: str, coeffs: dict[str, Fraction], rhs: Fraction, labels: Labels) -> "Atom":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return Atom(op, items, Fraction(rhs), labels)

    def coeff_map(self) -> dict[str, Fraction]:
        return dict(self.coeffs)


@dataclass
class TheoryResult:
    sat: bool
    model: dict[str, Fraction]
    conflict: Labels


def feasible(atoms: list[Atom], int_vars: set[str]) -> TheoryResult:
    components = _components(atoms)
    conflicts: set[str] = set()
    model: dict[str, Fraction] = {}
    for comp in components:
        res = _solve_component(comp, int_vars)
        if res.sat:
            model.update(res.model)
        else:
            conflicts.update(res.conflict)
    if conflicts:
        return TheoryResult(False, {}, Labels(conflicts))
    return TheoryResult(True, model, Labels())


def _components(atoms: list[Atom]) -> list[list[Atom]]:
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        parent[find(a)] = find(b)

    for atom in atoms:
        vars_ = [v for v, _ in atom.coeffs]
        for v in vars_[1:]:
            union(vars_[0], v)
    groups: dict[str, list[Atom]] = {}
    constants: list[Atom] = []
    for atom in atoms:
        if not atom.coeffs:
            constants.append(atom)
        else:
            groups.setdefault(find(atom.coeffs[0][0]), []).append(atom)
    out = [groups[k] for k in sorted(groups)]
    for atom in constants:
        out.append([atom])
    return out


def _const_holds(atom: Atom) -> bool:
    if atom.op == "=":
        return atom.rhs == 0
    if atom.op == "<=":
        return 0 <= atom.rhs
    return 0 < atom.rhs


def _substitute(atom: Atom, var: str, expr: dict[str, Fraction], const: Fraction, labels: Labels) -> Atom:
    coeffs = atom.coeff_map()
    factor = coeffs.pop(var, Fraction(0))
    if factor == 0:
        return atom
    for v, c in expr.items():
        coeffs[v] = coeffs.get(v, Fraction(0)) + factor * c
    return Atom.make(atom.op, coeffs, atom.rhs - factor * const, atom.labels | labels)


def _solve_component(atoms: list[Atom], int_vars: set[str]) -> TheoryResult:
    work = list(atoms)
    # substitution stack: (var, expr coeffs, const, labels)
    subs: list[tuple[str, dict[str, Fraction], Fraction, Labels]] = []

    # Gaussian substitution of equalities
    while True:
        eq = next((a for a in work if a.op == "=" and a.coeffs), None)
        if eq is None:
            break
        var, coeff = min(eq.coeffs)
        rest = {v: -c / coeff for v, c in eq.coeffs if v != var}
        const = eq.rhs / coeff
        work.remove(eq)
        subs.append((var, rest, const, eq.labels))
        work = [_substitute(a, var, rest, const, eq.labels) for a in work]

    for a in [a for a in work if not a.coeffs]:
        if not _const_holds(a):
            return TheoryResult(False, {}, a.labels)
    work = [a for a in work if a.coeffs]

    # Fourier-Motzkin elimination over remaining inequalities
    elim_vars = sorted({v for a in work for v, _ in a.coeffs})
    eliminations: list[tuple[str, list[Atom], list[Atom]]] = []
    for var in elim_vars:
        lowers: list[Atom] = []  # var >= bound (from negative coeff)
        uppers: list[Atom] = []  # var <= bound (from positive coeff)
        passthrough: list[Atom] = []
        for a in work:
            c = a.coeff_map().get(var, Fraction(0))
            if c == 0:
                passthrough.append(a)
            elif c > 0:
                uppers.append(a)
            else:
                lowers.append(a)
        derived: list[Atom] = []
        for lo in lowers:
            for up in uppers:
                c_lo = lo.coeff_map()[var]
                c_up = up.coeff_map()[var]
                # (up - var*c_up)/... combine to eliminate var
                coeffs: dict[str, Fraction] = {}
                for v, c in lo.coeffs:
                    if v != var:
                        coeffs[v] = coeffs.get(v, Fraction(0)) + c / (-c_lo)
                for v, c in up.coeffs:
                    if v != var:
                        coeffs[v] = coeffs.get(v, Fraction(0)) + c / c_up
                rhs = lo.rhs / (-c_lo) + up.rhs / c_up
                op = "<" if (lo.op == "<" or up.op == "<") else "<="
                derived.append(Atom.make(op, coeffs, rhs, lo.labels | up.labels))
        eliminations.append((var, lowers, uppers))
        work = passthrough + derived
        for a in [a for a in work if not a.coeffs]:
            if not _const_holds(a):
                return TheoryResult(False, {}, a.labels)
        work = [a for a in work if a.coeffs]

    # feasible: reconstruct a concrete model
    model: dict[str, Fraction] = {}
    for var, lowers, uppers in reversed(eliminations):
        lo, lo_strict, lo_labels = None, False, Labels()
        hi, hi_strict, hi_labels = None, False, Labels()
        for a in lowers:
            c = a.coeff_map()[var]
            bound = (a.rhs - _eval_rest(a, var, model)) / c
            if lo is None or bound > lo or (bound == lo and a.op == "<"):
                lo, lo_strict, lo_labels = bound, a.op == "<", a.labels
        for a in uppers:
            c = a.coeff_map()[var]
            bound = (a.rhs - _eval_rest(a, var, model)) / c
            if hi is None or bound < hi or (bound == hi and a.op == "<"):
                hi, hi_strict, hi_labels = bound, a.op == "<", a.labels
        value = _pick(lo, lo_strict, hi, hi_strict, var in int_vars)
        if value is None:
            return TheoryResult(False, {}, lo_labels | hi_labels)
        model[var] = value
    for var, expr, const, labels in reversed(subs):
        value = const + sum(c * model.get(v, Fraction(0)) for v, c in expr.items())
        if var in int_vars and value.denominator != 1:
            return TheoryResult(False, {}, labels)
        model[var] = value
    return TheoryResult(True, model, Labels())


def _eval_rest(atom: Atom, var: str, model: dict[str, Fraction]) -> Fraction:
    return sum((c * model.get(v, Fraction(0)) for v, c in atom.coeffs if v != var), Fraction(0))


def _pick(
    lo: Optional[Fraction],
    lo_strict: bool,
    hi: Optional[Fraction],
    hi_strict: bool,
    integer: bool,
) -> Optional[Fraction]:
    if integer:
        if lo is None and hi is None:
            return Fraction(0)
        if lo is not None:
            base = -(-lo.numerator // lo.denominator)  # ceil
            if lo_strict and base == lo:
                base += 1
            value = Fraction(base)
            if hi is not None:
                top = hi.numerator // hi.denominator  # floor
                if hi_strict and top == hi:
                    top -= 1
                if base > top:
                    return None
            return value
        top = hi.numerator // hi.denominator
        if hi_strict and top == hi:
            top -= 1
        return Fraction(top)
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi - 1 if hi_strict else hi
    if hi is None:
        return lo + 1 if lo_strict else lo
    if lo > hi or (lo == hi and (lo_strict or hi_strict)):
        return None
    if not lo_strict:
        return lo
    if not hi_strict:
        if lo < hi:
            return hi
        return None
    return (lo + hi) / 2
