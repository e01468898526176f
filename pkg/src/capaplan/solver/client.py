"""Child-process SMT solver management over SMT-LIB2 text.

One process per check: the script is written to the solver's stdin, the
verdict is classified from the first ``sat``/``unsat``/``unknown`` token,
then the matching ``(get-model)`` or ``(get-unsat-core)`` follow-up is sent.
The child is always terminated and reaped, including on timeout.
"""

from __future__ import annotations

import os
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from ..model import Literal
from .sexpr import SExpr, SExprError, parse_all

ENV_SOLVER_PATH = "CAPAPLAN_SOLVER_PATH"


class SolverError(Exception):
    pass


def default_command() -> list[str]:
    override = os.environ.get(ENV_SOLVER_PATH)
    if override:
        return [override]
    return [sys.executable, "-m", "capaplan.solver.minismt"]


@dataclass(frozen=True)
class SolverConfig:
    command: tuple[str, ...] = ()
    args: tuple[str, ...] = ()
    timeout_ms: int = 30000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")

    def argv(self) -> list[str]:
        base = list(self.command) if self.command else default_command()
        return base + list(self.args)


@dataclass(frozen=True)
class Sat:
    model_text: str


@dataclass(frozen=True)
class Unsat:
    core_text: str


@dataclass(frozen=True)
class Unknown:
    pass


@dataclass(frozen=True)
class Timeout:
    pass


@dataclass(frozen=True)
class ProtocolError:
    detail: str


SolverVerdict = Union[Sat, Unsat, Unknown, Timeout, ProtocolError]


def run(config: SolverConfig, script: str) -> SolverVerdict:
    """Run one check; the script must end with ``(check-sat)``."""
    argv = config.argv()
    try:
        proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as exc:
        raise SolverError(f"failed to spawn solver {argv[0]!r}: {exc}") from exc
    timed_out = threading.Event()

    def _kill() -> None:
        timed_out.set()
        proc.kill()

    timer = threading.Timer(config.timeout_ms / 1000.0, _kill)
    timer.start()
    try:
        try:
            proc.stdin.write(script)
            if not script.rstrip().endswith("(check-sat)"):
                proc.stdin.write("\n(check-sat)\n")
            else:
                proc.stdin.write("\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            pass
        verdict_token = None
        preamble: list[str] = []
        while True:
            line = proc.stdout.readline()
            if line == "":
                break
            token = line.strip()
            if token in ("sat", "unsat", "unknown"):
                verdict_token = token
                break
            preamble.append(token)
        if verdict_token is None:
            proc.stdin.close()
            remainder = proc.stdout.read()
            proc.wait()
            if timed_out.is_set():
                return Timeout()
            detail = "\n".join(preamble + [remainder.strip()]).strip() or "no verdict produced"
            return ProtocolError(detail)
        followup = "(get-model)\n" if verdict_token == "sat" else "(get-unsat-core)\n"
        try:
            proc.stdin.write(followup)
            proc.stdin.write("(exit)\n")
            proc.stdin.flush()
            proc.stdin.close()
        except (BrokenPipeError, OSError):
            pass
        body = proc.stdout.read()
        proc.wait()
        if timed_out.is_set():
            return Timeout()
        if verdict_token == "unknown":
            return Unknown()
        if verdict_token == "sat":
            return Sat(body)
        return Unsat(body)
    finally:
        timer.cancel()
        if proc.poll() is None:
            proc.kill()
        proc.wait()
        for stream in (proc.stdin, proc.stdout, proc.stderr):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass


def _parse_value(value: SExpr, sort: str) -> Literal:
    if value == "true":
        return True
    if value == "false":
        return False
    if isinstance(value, list):
        if value and value[0] == "-":
            inner = _parse_value(value[1], sort)
            return -inner
        if len(value) == 3 and value[0] == "/":
            num = _parse_value(value[1], "Real")
            den = _parse_value(value[2], "Real")
            return Fraction(num) / Fraction(den)
        raise SolverError(f"unsupported model value: {value!r}")
    if isinstance(value, Fraction):
        return value if sort != "Int" else int(value)
    if isinstance(value, int):
        return Fraction(value) if sort == "Real" else value
    raise SolverError(f"unsupported model value: {value!r}")


def parse_model(model_text: str) -> dict[str, Literal]:
    """Extract every ``define-fun`` binding from a sat model answer."""
    try:
        forms = parse_all(model_text)
    except SExprError as exc:
        raise SolverError(f"malformed model text: {exc}") from exc
    out: dict[str, Literal] = {}

    def walk(form: SExpr) -> None:
        if not isinstance(form, list):
            return
        if len(form) >= 5 and form[0] == "define-fun" and form[2] == []:
            name, sort, value = str(form[1]), str(form[3]), form[4]
            out[name] = _parse_value(value, sort)
            return
        for item in form:
            walk(item)

    for form in forms:
        walk(form)
    return out


def parse_core(core_text: str) -> set[str]:
    """Extract the label set from an unsat-core answer."""
    try:
        forms = parse_all(core_text)
    except SExprError as exc:
        raise SolverError(f"malformed core text: {exc}") from exc
    for form in forms:
        if isinstance(form, list):
            if form and form[0] == "error":
                continue
            return {str(item) for item in form}
    return set()
