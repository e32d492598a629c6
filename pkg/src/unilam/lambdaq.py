"""The quantum circuit-description front-end and its translation.

Programs are triples [Q, L, t]: a quantum state over n wires, a bijection
from the term's free variables to wire indices, and a term.  The state is
kept as a formal weighted sum over basis kets, zero coefficients included,
so that it evolves exactly like the translation's weak linear combinations:
a gate always splits a ket into both targets, new appends a wire without
adding kets.

new(tt) allocates |0>, new(ff) allocates |1>, and tt translates to the
left injection; this is the one assignment under which the translation
equations close.  ctl(f) fires the controlled function when the control
wire is |0> (the quantum-test reading of the combinator); ctl1 fires
on |1>.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace

from .distrib import Dist, canonicalize, single
from .evaluate import DEFAULT_FUEL, normalize
from .scalars import approx, check_finite, default_eps
from . import terms as T
from .terms import Raw, Single, Sum, Scale, Zero
from .prelude import prelude_term
from .unitypes import (
    BOOL,
    SHARP_BOOL,
    TProd,
    TPureArrow,
    TSharp,
    TSum,
    TUnitArrow,
    TypeExpr,
    UNIT,
    otimes,
)

GATE_TOL = 1e-7


class QTypeError(Exception):
    """A typing-rule violation, including quantum-variable linearity."""


class StuckError(Exception):
    """A non-value configuration with no applicable rule."""


class AdequacyViolation(Exception):
    def __init__(self, step: int, before: Dist, after: Dist):
        super().__init__(
            f"translations disagree at step {step}:\n  {before}\n  {after}"
        )
        self.step = step
        self.before = before
        self.after = after


# ---------------------------------------------------------------------------
# types


class QType:
    def __str__(self) -> str:
        return pretty_qtype(self)

    def __repr__(self) -> str:
        return f"<QType {self}>"

    @property
    def quantum(self) -> bool:
        return isinstance(self, (Qbit, QTensor))


@dataclass(frozen=True)
class QUnit(QType):
    pass


@dataclass(frozen=True)
class Bit(QType):
    pass


@dataclass(frozen=True)
class QArrow(QType):
    dom: QType
    cod: QType


@dataclass(frozen=True)
class QProd(QType):
    left: QType
    right: QType


@dataclass(frozen=True)
class QLolli(QType):
    dom: QType
    cod: QType

    def __post_init__(self) -> None:
        if not (self.dom.quantum and self.cod.quantum):
            raise QTypeError("lolli connects quantum types")


@dataclass(frozen=True)
class Qbit(QType):
    pass


@dataclass(frozen=True)
class QTensor(QType):
    left: QType
    right: QType

    def __post_init__(self) -> None:
        if not (self.left.quantum and self.right.quantum):
            raise QTypeError("tensor combines quantum types")


QBIT = Qbit()
BIT = Bit()
QUNIT = QUnit()


def pretty_qtype(a: QType, prec: int = 0) -> str:
    if isinstance(a, QUnit):
        return "U"
    if isinstance(a, Bit):
        return "bit"
    if isinstance(a, Qbit):
        return "qbit"
    if isinstance(a, QArrow):
        s = f"{pretty_qtype(a.dom, 1)} -> {pretty_qtype(a.cod, 0)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(a, QLolli):
        s = f"{pretty_qtype(a.dom, 1)} -o {pretty_qtype(a.cod, 0)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(a, QProd):
        s = f"{pretty_qtype(a.left, 2)} * {pretty_qtype(a.right, 1)}"
        return f"({s})" if prec >= 2 else s
    if isinstance(a, QTensor):
        s = f"{pretty_qtype(a.left, 2)} (x) {pretty_qtype(a.right, 1)}"
        return f"({s})" if prec >= 2 else s
    raise TypeError(a)


# ---------------------------------------------------------------------------
# terms


class QTerm:
    def __str__(self) -> str:
        return pretty_qterm(self)

    def __repr__(self) -> str:
        return f"<QTerm {self}>"

    @property
    def free_vars(self) -> frozenset[str]:
        return _qfree(self)


@dataclass(frozen=True)
class QVar(QTerm):
    name: str


@dataclass(frozen=True)
class QVoid(QTerm):
    pass


@dataclass(frozen=True)
class QLam(QTerm):
    var: str
    ann: QType
    body: QTerm


@dataclass(frozen=True)
class QApp(QTerm):
    fun: QTerm
    arg: QTerm


@dataclass(frozen=True)
class QPair(QTerm):
    left: QTerm
    right: QTerm


@dataclass(frozen=True)
class QProj(QTerm):
    which: int  # 1 or 2
    of: QTerm


@dataclass(frozen=True)
class QTT(QTerm):
    pass


@dataclass(frozen=True)
class QFF(QTerm):
    pass


@dataclass(frozen=True)
class QIf(QTerm):
    cond: QTerm
    then: QTerm
    els: QTerm


@dataclass(frozen=True)
class QTens(QTerm):
    left: QTerm
    right: QTerm


@dataclass(frozen=True)
class QLetTens(QTerm):
    left: str
    right: str
    subject: QTerm
    body: QTerm


@dataclass(frozen=True)
class QNew(QTerm):
    of: QTerm


@dataclass(frozen=True)
class QGate(QTerm):
    gate: str
    of: QTerm


@dataclass(frozen=True)
class QLamQ(QTerm):
    var: str
    ann: QType
    body: QTerm


@dataclass(frozen=True)
class QAppQ(QTerm):
    fun: QTerm
    arg: QTerm


@dataclass(frozen=True)
class QCtl(QTerm):
    fire_on: int  # 0: the verbatim combinator; 1: the swapped variant
    of: QTerm


def _qfree(t: QTerm) -> frozenset[str]:
    if isinstance(t, QVar):
        return frozenset((t.name,))
    if isinstance(t, (QVoid, QTT, QFF)):
        return frozenset()
    if isinstance(t, (QLam, QLamQ)):
        return t.body.free_vars - {t.var}
    if isinstance(t, QLetTens):
        return t.subject.free_vars | (t.body.free_vars - {t.left, t.right})
    out: frozenset[str] = frozenset()
    for sub in _children(t):
        out |= sub.free_vars
    return out


def _children(t: QTerm) -> tuple[QTerm, ...]:
    if isinstance(t, (QApp, QAppQ)):
        return (t.fun, t.arg)
    if isinstance(t, (QPair, QTens)):
        return (t.left, t.right)
    if isinstance(t, QProj):
        return (t.of,)
    if isinstance(t, QIf):
        return (t.cond, t.then, t.els)
    if isinstance(t, (QNew, QGate, QCtl)):
        return (t.of,)
    return ()


def is_qvalue(t: QTerm) -> bool:
    if isinstance(t, (QVar, QLam, QLamQ, QVoid, QTT, QFF)):
        return True
    if isinstance(t, (QPair, QTens)):
        return is_qvalue(t.left) and is_qvalue(t.right)
    if isinstance(t, QCtl):
        return is_qvalue(t.of)
    return False


def qsubst(t: QTerm, x: str, v: QTerm) -> QTerm:
    if x not in t.free_vars:
        return t
    if isinstance(t, QVar):
        return v if t.name == x else t
    if isinstance(t, (QLam, QLamQ)):
        var, body = t.var, t.body
        if var in v.free_vars:
            new = T.fresh_name(var, set(v.free_vars) | set(body.free_vars) | {x})
            body = qsubst(body, var, QVar(new))
            var = new
        cls = type(t)
        return cls(var, t.ann, qsubst(body, x, v))
    if isinstance(t, QLetTens):
        subject = qsubst(t.subject, x, v)
        lv, rv, body = t.left, t.right, t.body
        if x in (lv, rv):
            return QLetTens(lv, rv, subject, body)
        for var in (lv, rv):
            if var in v.free_vars:
                new = T.fresh_name(
                    var, set(v.free_vars) | set(body.free_vars) | {x, lv, rv}
                )
                body = qsubst(body, var, QVar(new))
                if var == lv:
                    lv = new
                else:
                    rv = new
        return QLetTens(lv, rv, subject, qsubst(body, x, v))
    if isinstance(t, QApp):
        return QApp(qsubst(t.fun, x, v), qsubst(t.arg, x, v))
    if isinstance(t, QAppQ):
        return QAppQ(qsubst(t.fun, x, v), qsubst(t.arg, x, v))
    if isinstance(t, QPair):
        return QPair(qsubst(t.left, x, v), qsubst(t.right, x, v))
    if isinstance(t, QTens):
        return QTens(qsubst(t.left, x, v), qsubst(t.right, x, v))
    if isinstance(t, QProj):
        return QProj(t.which, qsubst(t.of, x, v))
    if isinstance(t, QIf):
        return QIf(qsubst(t.cond, x, v), qsubst(t.then, x, v), qsubst(t.els, x, v))
    if isinstance(t, QNew):
        return QNew(qsubst(t.of, x, v))
    if isinstance(t, QGate):
        return QGate(t.gate, qsubst(t.of, x, v))
    if isinstance(t, QCtl):
        return QCtl(t.fire_on, qsubst(t.of, x, v))
    raise TypeError(t)


def pretty_qterm(t: QTerm, prec: int = 0) -> str:
    if isinstance(t, QVar):
        return t.name
    if isinstance(t, QVoid):
        return "()"
    if isinstance(t, QTT):
        return "tt"
    if isinstance(t, QFF):
        return "ff"
    if isinstance(t, QLam):
        return _q_wrap(f"lam {t.var}:{t.ann}. {pretty_qterm(t.body)}", prec >= 1)
    if isinstance(t, QLamQ):
        return _q_wrap(f"lamq {t.var}:{t.ann}. {pretty_qterm(t.body)}", prec >= 1)
    if isinstance(t, QApp):
        return _q_wrap(
            f"{pretty_qterm(t.fun, 3)} {pretty_qterm(t.arg, 4)}", prec >= 4
        )
    if isinstance(t, QAppQ):
        return _q_wrap(
            f"{pretty_qterm(t.fun, 3)} @ {pretty_qterm(t.arg, 3)}", prec >= 3
        )
    if isinstance(t, QPair):
        return f"({pretty_qterm(t.left)}, {pretty_qterm(t.right)})"
    if isinstance(t, QProj):
        return f"pi{t.which}({pretty_qterm(t.of)})"
    if isinstance(t, QIf):
        return _q_wrap(
            f"if {pretty_qterm(t.cond, 1)} then {pretty_qterm(t.then, 1)}"
            f" else {pretty_qterm(t.els, 1)}",
            prec >= 1,
        )
    if isinstance(t, QTens):
        return _q_wrap(
            f"{pretty_qterm(t.left, 3)} (x) {pretty_qterm(t.right, 2)}", prec >= 3
        )
    if isinstance(t, QLetTens):
        return _q_wrap(
            f"let {t.left} (x) {t.right} = {pretty_qterm(t.subject, 1)}"
            f" in {pretty_qterm(t.body)}",
            prec >= 1,
        )
    if isinstance(t, QNew):
        return f"new({pretty_qterm(t.of)})"
    if isinstance(t, QGate):
        return f"{t.gate}({pretty_qterm(t.of)})"
    if isinstance(t, QCtl):
        name = "ctl" if t.fire_on == 0 else "ctl1"
        return f"{name}({pretty_qterm(t.of)})"
    raise TypeError(t)


def _q_wrap(s: str, yes: bool) -> str:
    return f"({s})" if yes else s


# ---------------------------------------------------------------------------
# gates

Matrix = tuple[tuple[complex, complex], tuple[complex, complex]]


def _unitary_defect(m: Matrix) -> float:
    conj_t = [[m[j][i].conjugate() for j in range(2)] for i in range(2)]
    worst = 0.0
    for i in range(2):
        for j in range(2):
            entry = sum(conj_t[i][k] * m[k][j] for k in range(2))
            worst = max(worst, abs(entry - (1.0 if i == j else 0.0)))
    return worst


class GateTable:
    """Named 2x2 unitaries; each entry is checked on registration."""

    def __init__(self) -> None:
        self._gates: dict[str, Matrix] = {}

    def add(self, name: str, rows) -> None:
        m: Matrix = tuple(tuple(check_finite(complex(x)) for x in row) for row in rows)
        if len(m) != 2 or any(len(r) != 2 for r in m):
            raise ValueError(f"gate {name} must be 2x2")
        defect = _unitary_defect(m)
        if defect > GATE_TOL:
            raise ValueError(f"gate {name} is not unitary (defect {defect:g})")
        self._gates[name] = m

    def __contains__(self, name: str) -> bool:
        return name in self._gates

    def __getitem__(self, name: str) -> Matrix:
        if name not in self._gates:
            raise KeyError(f"unknown gate {name}")
        return self._gates[name]

    def names(self) -> list[str]:
        return sorted(self._gates)

    @classmethod
    def default(cls) -> "GateTable":
        t = cls()
        r = 1.0 / math.sqrt(2.0)
        t.add("H", [[r, r], [r, -r]])
        t.add("X", [[0, 1], [1, 0]])
        t.add("Z", [[1, 0], [0, -1]])
        t.add("I", [[1, 0], [0, 1]])
        t.add("S", phase_gate(math.pi / 2))
        t.add("T", phase_gate(math.pi / 4))
        return t

    def load(self, doc: dict) -> None:
        for name, rows in doc.items():
            self.add(
                name,
                [
                    [complex(cell["re"], cell.get("im", 0.0)) for cell in row]
                    for row in rows
                ],
            )


def phase_gate(theta: float):
    return [[1, 0], [0, cmath.exp(1j * theta)]]


# ---------------------------------------------------------------------------
# typing


def check_classical(delta: dict[str, QType], t: QTerm) -> QType:
    """Synthesize the type of a classical judgment."""
    if isinstance(t, QVar):
        if t.name not in delta:
            raise QTypeError(f"unbound classical variable {t.name}")
        return delta[t.name]
    if isinstance(t, QVoid):
        return QUNIT
    if isinstance(t, (QTT, QFF)):
        return BIT
    if isinstance(t, QLam):
        if t.ann.quantum:
            raise QTypeError("classical binder with a quantum annotation")
        cod = check_classical({**delta, t.var: t.ann}, t.body)
        return QArrow(t.ann, cod)
    if isinstance(t, QApp):
        fun = check_classical(delta, t.fun)
        if not isinstance(fun, QArrow):
            raise QTypeError(f"applied a non-function: {t.fun} : {fun}")
        arg = check_classical(delta, t.arg)
        if arg != fun.dom:
            raise QTypeError(f"argument type {arg} differs from {fun.dom}")
        return fun.cod
    if isinstance(t, QPair):
        return QProd(
            check_classical(delta, t.left), check_classical(delta, t.right)
        )
    if isinstance(t, QProj):
        prod = check_classical(delta, t.of)
        if not isinstance(prod, QProd):
            raise QTypeError(f"projection from a non-product {prod}")
        return prod.left if t.which == 1 else prod.right
    if isinstance(t, QIf):
        if check_classical(delta, t.cond) != BIT:
            raise QTypeError("condition must be a bit")
        a = check_classical(delta, t.then)
        b = check_classical(delta, t.els)
        if a != b:
            raise QTypeError(f"branch types differ: {a} vs {b}")
        return a
    if isinstance(t, QLamQ):
        if not t.ann.quantum:
            raise QTypeError("quantum closure needs a quantum annotation")
        cod, used = check_quantum(delta, {t.var: t.ann}, t.body)
        if used != {t.var}:
            raise QTypeError(
                f"closure body must use exactly its wire, used {sorted(used)}"
            )
        return QLolli(t.ann, cod)
    if isinstance(t, QCtl):
        inner = check_classical(delta, t.of)
        if not isinstance(inner, QLolli):
            raise QTypeError(f"ctl needs a quantum function, got {inner}")
        return QLolli(QTensor(QBIT, inner.dom), QTensor(QBIT, inner.cod))
    raise QTypeError(f"not a classical term: {t}")


def check_quantum(
    delta: dict[str, QType], gamma: dict[str, QType], t: QTerm
) -> tuple[QType, frozenset[str]]:
    """Synthesize a quantum judgment; quantum variables are linear.

    Returns the type and the set of quantum variables consumed; every
    split must be disjoint and branches of a conditional must consume the
    same wires.
    """
    if isinstance(t, QVar):
        if t.name in gamma:
            return gamma[t.name], frozenset((t.name,))
        raise QTypeError(f"{t.name} is not a quantum variable in scope")
    if isinstance(t, QTens):
        lt, lu = check_quantum(delta, gamma, t.left)
        rt, ru = check_quantum(delta, gamma, t.right)
        if lu & ru:
            raise QTypeError(f"wires used twice: {sorted(lu & ru)}")
        return QTensor(lt, rt), lu | ru
    if isinstance(t, QGate, ):
        ty, used = check_quantum(delta, gamma, t.of)
        if ty != QBIT:
            raise QTypeError(f"gate on a non-qbit: {ty}")
        return QBIT, used
    if isinstance(t, QLetTens):
        st, su = check_quantum(delta, gamma, t.subject)
        if not isinstance(st, QTensor):
            raise QTypeError(f"let-tensor on a non-tensor {st}")
        inner = {**gamma, t.left: st.left, t.right: st.right}
        bt, bu = check_quantum(delta, inner, t.body)
        if not {t.left, t.right} <= bu:
            raise QTypeError("let-tensor must consume both wires")
        bu = bu - {t.left, t.right}
        if su & bu:
            raise QTypeError(f"wires used twice: {sorted(su & bu)}")
        return bt, su | bu
    if isinstance(t, QNew):
        if check_classical(delta, t.of) != BIT:
            raise QTypeError("new expects a bit")
        return QBIT, frozenset()
    if isinstance(t, QAppQ):
        fun = check_classical(delta, t.fun)
        if not isinstance(fun, QLolli):
            raise QTypeError(f"@ needs a quantum function, got {fun}")
        at, used = check_quantum(delta, gamma, t.arg)
        if at != fun.dom:
            raise QTypeError(f"quantum argument {at} differs from {fun.dom}")
        return fun.cod, used
    if isinstance(t, QIf):
        # conditional over quantum branches: both sides must consume the
        # same wires (not in the core table; needed for programs that
        # choose between allocations)
        if check_classical(delta, t.cond) != BIT:
            raise QTypeError("condition must be a bit")
        at, au = check_quantum(delta, gamma, t.then)
        bt, bu = check_quantum(delta, gamma, t.els)
        if at != bt:
            raise QTypeError(f"branch types differ: {at} vs {bt}")
        if au != bu:
            raise QTypeError("branches consume different wires")
        return at, au
    # classical redexes can sit in quantum position through new/@ heads
    raise QTypeError(f"not a quantum term: {t}")


def typecheck_program(p: "Program") -> QType:
    """Well-typedness: empty classical context, all wires at qbit."""
    gamma = {x: QBIT for x in p.wires}
    ty, used = check_quantum({}, gamma, p.term)
    if used != frozenset(p.wires):
        raise QTypeError(
            f"program must consume every wire: used {sorted(used)}"
        )
    return ty


# ---------------------------------------------------------------------------
# programs and the QRAM semantics


@dataclass(frozen=True)
class QuantumState:
    """Formal weighted sum over basis kets of n wires, zeros retained."""

    wires: int
    amps: tuple[tuple[int, complex], ...]

    @classmethod
    def from_dict(cls, wires: int, amps: dict[int, complex]) -> "QuantumState":
        return cls(wires, tuple(sorted(amps.items())))

    def as_dict(self) -> dict[int, complex]:
        return dict(self.amps)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for _, c in self.amps))

    def check_normalized(self, eps: float | None = None) -> None:
        if not approx(self.norm, 1.0, eps):
            raise ValueError(f"state has norm {self.norm!r}")

    def bit(self, ket: int, wire: int) -> int:
        return (ket >> (self.wires - wire)) & 1

    def ket_str(self, ket: int) -> str:
        return format(ket, f"0{self.wires}b") if self.wires else ""

    def __str__(self) -> str:
        if not self.amps:
            return "|empty>"
        from .scalars import format_scalar

        return " + ".join(
            f"{format_scalar(c)}|{self.ket_str(k)}>" for k, c in self.amps
        )


EMPTY_STATE = QuantumState(0, ((0, 1.0 + 0j),))


@dataclass(frozen=True)
class Program:
    state: QuantumState
    wires: dict[str, int] = field(default_factory=dict)
    term: QTerm = QVoid()

    def __post_init__(self) -> None:
        idx = sorted(self.wires.values())
        if idx != list(range(1, self.state.wires + 1)):
            raise ValueError(f"wires {self.wires} do not cover 1..{self.state.wires}")
        if frozenset(self.wires) != self.term.free_vars:
            raise ValueError("wire map must cover exactly the free variables")

    def __str__(self) -> str:
        wires = ", ".join(f"{x}:{i}" for x, i in sorted(self.wires.items()))
        return f"[{self.state}, {{{wires}}}, {self.term}]"


def _apply_1q(
    state: QuantumState, m: Matrix, wire: int
) -> QuantumState:
    """A gate formally splits every ket into both target kets."""
    out: dict[int, complex] = {}
    shift = state.wires - wire
    for ket, c in state.amps:
        b = (ket >> shift) & 1
        k0 = ket & ~(1 << shift)
        k1 = ket | (1 << shift)
        out[k0] = out.get(k0, 0j) + m[0][b] * c
        out[k1] = out.get(k1, 0j) + m[1][b] * c
    return QuantumState.from_dict(state.wires, out)


def _apply_controlled(
    state: QuantumState, m: Matrix, control: int, target: int, fire_on: int
) -> QuantumState:
    """Split only the kets whose control bit matches; others stay put."""
    out: dict[int, complex] = {}
    tshift = state.wires - target
    for ket, c in state.amps:
        if state.bit(ket, control) != fire_on:
            out[ket] = out.get(ket, 0j) + c
            continue
        b = (ket >> tshift) & 1
        k0 = ket & ~(1 << tshift)
        k1 = ket | (1 << tshift)
        out[k0] = out.get(k0, 0j) + m[0][b] * c
        out[k1] = out.get(k1, 0j) + m[1][b] * c
    return QuantumState.from_dict(state.wires, out)


def _append_wire(state: QuantumState, bit: int) -> QuantumState:
    return QuantumState.from_dict(
        state.wires + 1,
        {(k << 1) | bit: c for k, c in state.amps},
    )


class _Stepper:
    def __init__(self, program: Program, gates: GateTable):
        self.state = program.state
        self.wires = dict(program.wires)
        self.gates = gates
        self.avoid = set(program.wires) | program.term.free_vars

    def fresh_wire(self, bit: int) -> str:
        name = T.fresh_name(f"q{self.state.wires + 1}", self.avoid)
        self.avoid.add(name)
        self.state = _append_wire(self.state, bit)
        self.wires[name] = self.state.wires
        return name

    def step(self, t: QTerm) -> QTerm | None:
        if is_qvalue(t):
            return None
        if isinstance(t, (QApp, QAppQ)):
            arg = self.step(t.arg)
            if arg is not None:
                return type(t)(t.fun, arg)
            if not is_qvalue(t.arg):
                raise StuckError(f"argument is stuck: {t.arg}")
            fun = self.step(t.fun)
            if fun is not None:
                return type(t)(fun, t.arg)
            if isinstance(t, QApp) and isinstance(t.fun, QLam):
                return qsubst(t.fun.body, t.fun.var, t.arg)
            if isinstance(t, QAppQ) and isinstance(t.fun, QLamQ):
                return qsubst(t.fun.body, t.fun.var, t.arg)
            if isinstance(t, QAppQ) and isinstance(t.fun, QCtl):
                return self._step_ctl(t.fun, t.arg)
            raise StuckError(f"cannot apply {t.fun}")
        if isinstance(t, (QPair, QTens)):
            left = self.step(t.left)
            if left is not None:
                return type(t)(left, t.right)
            right = self.step(t.right)
            if right is not None:
                return type(t)(t.left, right)
            raise StuckError(f"pair components are stuck: {t}")
        if isinstance(t, QProj):
            inner = self.step(t.of)
            if inner is not None:
                return QProj(t.which, inner)
            if isinstance(t.of, QPair):
                return t.of.left if t.which == 1 else t.of.right
            raise StuckError(f"projection from a non-pair: {t.of}")
        if isinstance(t, QIf):
            cond = self.step(t.cond)
            if cond is not None:
                return QIf(cond, t.then, t.els)
            if isinstance(t.cond, QTT):
                return t.then
            if isinstance(t.cond, QFF):
                return t.els
            raise StuckError(f"condition is stuck: {t.cond}")
        if isinstance(t, QLetTens):
            subj = self.step(t.subject)
            if subj is not None:
                return QLetTens(t.left, t.right, subj, t.body)
            if isinstance(t.subject, QTens):
                return qsubst(
                    qsubst(t.body, t.left, t.subject.left),
                    t.right,
                    t.subject.right,
                )
            raise StuckError(f"let-tensor on a non-tensor: {t.subject}")
        if isinstance(t, QNew):
            inner = self.step(t.of)
            if inner is not None:
                return QNew(inner)
            if isinstance(t.of, QTT):
                return QVar(self.fresh_wire(0))
            if isinstance(t.of, QFF):
                return QVar(self.fresh_wire(1))
            raise StuckError(f"new on a non-bit: {t.of}")
        if isinstance(t, QGate):
            inner = self.step(t.of)
            if inner is not None:
                return QGate(t.gate, inner)
            if isinstance(t.of, QVar) and t.of.name in self.wires:
                self.state = _apply_1q(
                    self.state, self.gates[t.gate], self.wires[t.of.name]
                )
                return t.of
            raise StuckError(f"gate on a non-wire: {t.of}")
        raise StuckError(f"no rule applies to {t}")

    def _step_ctl(self, ctl: QCtl, arg: QTerm) -> QTerm:
        payload = ctl.of
        if not (
            isinstance(arg, QTens)
            and isinstance(arg.left, QVar)
            and isinstance(arg.right, QVar)
            and arg.left.name in self.wires
            and arg.right.name in self.wires
        ):
            raise StuckError(f"ctl expects a pair of wires, got {arg}")
        if (
            isinstance(payload, QLamQ)
            and isinstance(payload.body, QGate)
            and isinstance(payload.body.of, QVar)
            and payload.body.of.name == payload.var
        ):
            matrix = self.gates[payload.body.gate]
        elif isinstance(payload, QLamQ) and isinstance(payload.body, QVar) and (
            payload.body.name == payload.var
        ):
            matrix = ((1 + 0j, 0j), (0j, 1 + 0j))
        else:
            raise StuckError(
                f"ctl payload must be a single-gate closure, got {payload}"
            )
        self.state = _apply_controlled(
            self.state,
            matrix,
            self.wires[arg.left.name],
            self.wires[arg.right.name],
            ctl.fire_on,
        )
        return arg


def lq_step(p: Program, gates: GateTable | None = None) -> Program | None:
    """One call-by-value step; None when the term is a value."""
    gates = gates or GateTable.default()
    stepper = _Stepper(p, gates)
    term = stepper.step(p.term)
    if term is None:
        return None
    wires = {x: i for x, i in stepper.wires.items() if x in term.free_vars}
    return Program(stepper.state, wires, term)


@dataclass(frozen=True)
class RunOutcome:
    program: Program
    steps: int
    normal: bool


def lq_run(
    p: Program,
    fuel: int = DEFAULT_FUEL,
    gates: GateTable | None = None,
    on_step=None,
) -> RunOutcome:
    gates = gates or GateTable.default()
    steps = 0
    while steps < fuel:
        nxt = lq_step(p, gates)
        if nxt is None:
            return RunOutcome(p, steps, True)
        if on_step is not None:
            on_step(p, nxt)
        p = nxt
        steps += 1
    if lq_step(p, gates) is None:
        return RunOutcome(p, steps, True)
    return RunOutcome(p, steps, False)


# ---------------------------------------------------------------------------
# translation into the core calculus


def translate_type(a: QType) -> TypeExpr:
    """bit -> B, qbit -> #B, lolli through a thunk, tensors to sharp pairs."""
    if isinstance(a, QUnit):
        return UNIT
    if isinstance(a, Bit):
        return BOOL
    if isinstance(a, Qbit):
        return SHARP_BOOL
    if isinstance(a, QArrow):
        return TPureArrow(translate_type(a.dom), translate_type(a.cod))
    if isinstance(a, QProd):
        return TProd(translate_type(a.left), translate_type(a.right))
    if isinstance(a, QLolli):
        return TPureArrow(
            UNIT, TUnitArrow(translate_type(a.dom), translate_type(a.cod))
        )
    if isinstance(a, QTensor):
        return otimes(translate_type(a.left), translate_type(a.right))
    raise TypeError(a)


def gate_term(m: Matrix) -> T.Term:
    """lam x. match x { x1 -> a*inl x1 + c*inr x1 | x2 -> b*inl x2 + d*inr x2 }."""
    (a, b), (c, d) = m

    def branch(var: str, top: complex, bottom: complex) -> Raw:
        return Sum(
            Scale(top, Single(T.Inl(T.Var(var)))),
            Scale(bottom, Single(T.Inr(T.Var(var)))),
        )

    return T.Lam(
        "x",
        Single(
            T.Match(T.Var("x"), "x1", branch("x1", a, c), "x2", branch("x2", b, d))
        ),
    )


def _ctl_combinator(fire_on: int) -> T.Term:
    name = "ctl" if fire_on == 0 else "ctl1"
    out = canonicalize(prelude_term(name))
    assert len(out) == 1
    return out.summands[0][1]


def translate_term(t: QTerm, gates: GateTable | None = None) -> T.Term:
    """Literal structural translation; new is the identity."""
    gates = gates or GateTable.default()
    if isinstance(t, QVar):
        return T.Var(t.name)
    if isinstance(t, QVoid):
        return T.VOID
    if isinstance(t, QTT):
        return T.TT
    if isinstance(t, QFF):
        return T.FF
    if isinstance(t, QLam):
        return T.Lam(t.var, Single(translate_term(t.body, gates)))
    if isinstance(t, QApp):
        return T.App(translate_term(t.fun, gates), translate_term(t.arg, gates))
    if isinstance(t, (QPair, QTens)):
        return T.pair_term(
            translate_term(t.left, gates), translate_term(t.right, gates)
        )
    if isinstance(t, QProj):
        x1 = T.fresh_name("p1", t.free_vars)
        x2 = T.fresh_name("p2", t.free_vars | {x1})
        picked = x1 if t.which == 1 else x2
        return T.LetPair(
            x1, x2, translate_term(t.of, gates), Single(T.Var(picked))
        )
    if isinstance(t, QIf):
        return T.if_term(
            translate_term(t.cond, gates),
            Single(translate_term(t.then, gates)),
            Single(translate_term(t.els, gates)),
        )
    if isinstance(t, QLetTens):
        return T.LetPair(
            t.left,
            t.right,
            translate_term(t.subject, gates),
            Single(translate_term(t.body, gates)),
        )
    if isinstance(t, QNew):
        return translate_term(t.of, gates)
    if isinstance(t, QGate):
        return T.App(gate_term(gates[t.gate]), translate_term(t.of, gates))
    if isinstance(t, QLamQ):
        z = T.fresh_name("z", t.free_vars | {t.var})
        return T.Lam(z, Single(T.Lam(t.var, Single(translate_term(t.body, gates)))))
    if isinstance(t, QAppQ):
        return T.App(
            T.App(translate_term(t.fun, gates), T.VOID),
            translate_term(t.arg, gates),
        )
    if isinstance(t, QCtl):
        z = T.fresh_name("z", t.free_vars)
        return T.Lam(
            z,
            Single(
                T.App(
                    _ctl_combinator(t.fire_on),
                    T.App(translate_term(t.of, gates), T.VOID),
                )
            ),
        )
    raise TypeError(t)


def translate_program(p: Program, gates: GateTable | None = None) -> Dist:
    """Sum over the state's kets of the wire-substituted translation.

    Every ket present in the formal state contributes a summand, zero
    amplitudes included; wire k reads its bit from the ket and substitutes
    tt for 0 and ff for 1.
    """
    gates = gates or GateTable.default()
    base = translate_term(p.term, gates)
    out: Raw = Zero()
    first = True
    for ket, coeff in p.state.amps:
        t = base
        for x, wire in p.wires.items():
            bit = p.state.bit(ket, wire)
            t = T.subst_term(t, x, T.TT if bit == 0 else T.FF)
        piece: Raw = Scale(coeff, Single(t))
        out = piece if first else Sum(out, piece)
        first = False
    return canonicalize(out)


# ---------------------------------------------------------------------------
# adequacy harness


@dataclass
class AdequacyStep:
    before: Program
    after: Program
    before_nf: Dist
    after_nf: Dist
    agrees: bool
    typed: str = "skipped"


@dataclass
class AdequacyReport:
    steps: list[AdequacyStep]
    final: Program
    ok: bool

    @property
    def final_translation(self) -> Dist:
        return translate_program(self.final)


def adequacy_check(
    p: Program,
    fuel: int = DEFAULT_FUEL,
    gates: GateTable | None = None,
    eps: float | None = None,
    check_types: bool = True,
) -> AdequacyReport:
    """Run a program stepwise, comparing joint normal forms of the
    translations at every step.

    Both sides of each step evaluate to a common canonical form when the
    translation simulates the step; confluence and uniqueness of normal
    forms make the comparison sound.  Raises AdequacyViolation on the
    first disagreement.
    """
    gates = gates or GateTable.default()
    if eps is None:
        eps = default_eps()
    typecheck_program(p)
    steps: list[AdequacyStep] = []
    index = 0
    while True:
        nxt = lq_step(p, gates)
        if nxt is None:
            break
        before = normalize(translate_program(p, gates), fuel)
        after = normalize(translate_program(nxt, gates), fuel)
        if not (before.normal and after.normal):
            raise AdequacyViolation(index, before.dist, after.dist)
        agrees = before.dist.approx_eq(after.dist, eps)
        record = AdequacyStep(p, nxt, before.dist, after.dist, agrees)
        if check_types:
            record.typed = _try_translation_typing(p, gates, fuel)
        steps.append(record)
        if not agrees:
            raise AdequacyViolation(index, before.dist, after.dist)
        p = nxt
        index += 1
        if index > fuel:
            raise AdequacyViolation(index, single(T.VOID), single(T.VOID))
    return AdequacyReport(steps, p, True)


def _try_translation_typing(p: Program, gates: GateTable, fuel: int) -> str:
    """Best-effort: derive the translated typing judgment when the
    algorithmic checker covers the fragment."""
    from .judgments import Context, NoDerivation, infer

    try:
        ty, _ = check_quantum({}, {x: QBIT for x in p.wires}, p.term)
    except QTypeError:
        return "skipped"
    ctx = Context(tuple((x, SHARP_BOOL) for x in sorted(p.wires)))
    try:
        infer(ctx, Single(translate_term(p.term, gates)), translate_type(ty), fuel)
        return "derived"
    except NoDerivation:
        return "skipped"


# ---------------------------------------------------------------------------
# program documents


def program_from_doc(doc: dict, names_hint: str = "term") -> Program:
    """Load {amplitudes|kets, wires, term} documents.

    amplitudes: dense list of {re, im} over all 2^n kets (zeros kept).
    kets: sparse list of {bits, re, im} records; only listed kets are
    present in the formal state.
    """
    from .parser import Parser

    wires = {str(k): int(v) for k, v in doc.get("wires", {}).items()}
    n = len(wires)
    if "amplitudes" in doc:
        entries = doc["amplitudes"]
        if len(entries) != 2**n:
            raise ValueError(f"expected {2**n} amplitudes, got {len(entries)}")
        amps = {
            i: complex(e["re"], e.get("im", 0.0)) for i, e in enumerate(entries)
        }
    elif "kets" in doc:
        amps = {}
        for e in doc["kets"]:
            bits = str(e["bits"])
            if len(bits) != n:
                raise ValueError(f"ket {bits!r} does not address {n} wires")
            amps[int(bits, 2) if bits else 0] = complex(e["re"], e.get("im", 0.0))
    else:
        if n:
            raise ValueError("a program with wires needs amplitudes or kets")
        amps = {0: 1.0 + 0j}
    state = QuantumState.from_dict(n, amps)
    state.check_normalized()
    term = parse_qterm(doc["term"])
    return Program(state, wires, term)


def program_to_doc(p: Program) -> dict:
    return {
        "kets": [
            {"bits": p.state.ket_str(k), "re": c.real, "im": c.imag}
            for k, c in p.state.amps
        ],
        "wires": dict(sorted(p.wires.items())),
        "term": pretty_qterm(p.term),
    }


def load_program(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as fh:
        return program_from_doc(json.load(fh))


# ---------------------------------------------------------------------------
# surface syntax


def parse_qterm(src: str, gates: GateTable | None = None) -> QTerm:
    from .parser import Parser

    gates = gates or GateTable.default()
    p = Parser(src)
    out = _parse_qtensor(p, gates)
    p.finish()
    return out


def _parse_qtensor(p, gates: GateTable) -> QTerm:
    left = _parse_qat(p, gates)
    while (
        p.peek().text == "("
        and p.peek(1).text == "x"
        and p.peek(2).text == ")"
    ):
        p.next()
        p.next()
        p.next()
        left = QTens(left, _parse_qat(p, gates))
    return left


def _parse_qat(p, gates: GateTable) -> QTerm:
    left = _parse_qapp(p, gates)
    while p.at("@"):
        p.next()
        left = QAppQ(left, _parse_qapp(p, gates))
    return left


def _parse_qapp(p, gates: GateTable) -> QTerm:
    fun = _parse_qatom(p, gates)
    while _q_starts_atom(p):
        fun = QApp(fun, _parse_qatom(p, gates))
    return fun


def _q_starts_atom(p) -> bool:
    tok = p.peek()
    if tok.kind == "ident":
        return tok.text not in ("in", "then", "else")
    if tok.text == "(":
        return not (p.peek(1).text == "x" and p.peek(2).text == ")")
    return False


def _parse_qtype(p) -> QType:
    left = _parse_qtype_prod(p)
    if p.at("->"):
        p.next()
        return QArrow(left, _parse_qtype(p))
    if p.at("-o"):
        p.next()
        return QLolli(left, _parse_qtype(p))
    return left


def _parse_qtype_prod(p) -> QType:
    left = _parse_qtype_atom(p)
    while True:
        if p.at("*"):
            p.next()
            left = QProd(left, _parse_qtype_atom(p))
        elif (
            p.peek().text == "("
            and p.peek(1).text == "x"
            and p.peek(2).text == ")"
        ):
            p.next()
            p.next()
            p.next()
            left = QTensor(left, _parse_qtype_atom(p))
        else:
            return left


def _parse_qtype_atom(p) -> QType:
    tok = p.next()
    if tok.text == "U":
        return QUNIT
    if tok.text == "bit":
        return BIT
    if tok.text == "qbit":
        return QBIT
    if tok.text == "(":
        inner = _parse_qtype(p)
        p.expect(")")
        return inner
    raise p.error(f"expected a quantum-calculus type, found {tok.text!r}")


def _parse_qatom(p, gates: GateTable) -> QTerm:
    tok = p.peek()
    if tok.text == "(":
        p.next()
        if p.at(")"):
            p.next()
            return QVoid()
        first = _parse_qtensor(p, gates)
        if p.at(","):
            p.next()
            second = _parse_qtensor(p, gates)
            p.expect(")")
            return QPair(first, second)
        p.expect(")")
        return first
    if tok.kind != "ident":
        raise p.error(f"unexpected {tok.text!r} in quantum term")
    word = tok.text
    if word == "tt":
        p.next()
        return QTT()
    if word == "ff":
        p.next()
        return QFF()
    if word == "lam":
        p.next()
        var = p._ident()
        p.expect(":")
        ann = _parse_qtype(p)
        p.expect(".")
        return QLam(var, ann, _parse_qtensor(p, gates))
    if word == "lamq":
        p.next()
        var = p._ident()
        ann: QType = QBIT
        if p.at(":"):
            p.next()
            ann = _parse_qtype(p)
        p.expect(".")
        return QLamQ(var, ann, _parse_qtensor(p, gates))
    if word == "let":
        p.next()
        x = p._ident()
        p.expect("(")
        p.expect("x")
        p.expect(")")
        y = p._ident()
        p.expect("=")
        subject = _parse_qtensor(p, gates)
        p.expect("in")
        body = _parse_qtensor(p, gates)
        return QLetTens(x, y, subject, body)
    if word == "if":
        p.next()
        cond = _parse_qtensor(p, gates)
        p.expect("then")
        then = _parse_qtensor(p, gates)
        p.expect("else")
        els = _parse_qtensor(p, gates)
        return QIf(cond, then, els)
    if word in ("pi1", "pi2"):
        p.next()
        p.expect("(")
        inner = _parse_qtensor(p, gates)
        p.expect(")")
        return QProj(1 if word == "pi1" else 2, inner)
    if word == "new":
        p.next()
        p.expect("(")
        inner = _parse_qtensor(p, gates)
        p.expect(")")
        return QNew(inner)
    if word in ("ctl", "ctl1"):
        p.next()
        p.expect("(")
        inner = _parse_qtensor(p, gates)
        p.expect(")")
        return QCtl(0 if word == "ctl" else 1, inner)
    if word in gates and p.peek(1).text == "(":
        p.next()
        p.expect("(")
        inner = _parse_qtensor(p, gates)
        p.expect(")")
        return QGate(word, inner)
    p.next()
    return QVar(word)
