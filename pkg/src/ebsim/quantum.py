"""Small dense simulator for labeled two-level registers.

Registers are either photon polarizations (basis ``R``, ``L``) or electron spins
(basis ``up``, ``down``); index 0 is ``R``/``up``. States may be sub-normalized:
a conditional branch carries its probability as its squared norm (or trace),
which is how lossy scattering is bookkept.

Linear polarizations are fixed as ``H = (R + L)/sqrt2`` and ``V = (R - L)/sqrt2``.
Global phases are never normalized away; compare states through fidelities.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ._validation import (
    ConditioningError,
    DuplicateRegisterError,
    InvalidParameterError,
    RegisterError,
)

PHOTON = "photon"
SPIN = "spin"
KIND_LABELS = {PHOTON: ("R", "L"), SPIN: ("up", "down")}
MAX_REGISTERS = 8

_S2 = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * _S2
# Circular -> linear basis change (R -> H, L -> V). Under the fixed H/V convention
# this coincides with the Hadamard matrix.
QWP = H.copy()

for _m in (I2, X, Z, H, QWP):
    _m.setflags(write=False)


@dataclass(frozen=True)
class Register:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in KIND_LABELS:
            raise InvalidParameterError(f"register kind must be one of {sorted(KIND_LABELS)}, got {self.kind!r}")
        if not isinstance(self.name, str) or not self.name:
            raise InvalidParameterError("register name must be a non-empty string")

    @property
    def labels(self) -> tuple[str, str]:
        return KIND_LABELS[self.kind]


def photon(name: str) -> Register:
    return Register(name, PHOTON)


def spin(name: str) -> Register:
    return Register(name, SPIN)


@dataclass(frozen=True)
class Basis:
    """An orthonormal pair of kets, given as the columns of ``kets``."""

    name: str
    labels: tuple[str, str]
    kets: np.ndarray

    def __post_init__(self):
        kets = np.asarray(self.kets, dtype=complex)
        if kets.shape != (2, 2) or not np.allclose(kets.conj().T @ kets, I2, atol=1e-12):
            raise InvalidParameterError(f"basis {self.name!r} is not an orthonormal pair")
        kets.setflags(write=False)
        object.__setattr__(self, "kets", kets)

    def ket(self, label: str) -> np.ndarray:
        return self.kets[:, self.labels.index(label)]


CIRCULAR = Basis("circular", ("R", "L"), I2)
LINEAR = Basis("linear", ("H", "V"), H)
SPIN_Z = Basis("z", ("up", "down"), I2)
SPIN_X = Basis("x", ("+", "-"), H)


def _check_registers(registers: Iterable[Register]) -> tuple[Register, ...]:
    registers = tuple(registers)
    for reg in registers:
        if not isinstance(reg, Register):
            raise InvalidParameterError(f"expected Register, got {reg!r}")
    names = [r.name for r in registers]
    if len(set(names)) != len(names):
        raise DuplicateRegisterError(f"duplicate register names in {names}")
    if len(registers) > MAX_REGISTERS:
        raise InvalidParameterError(f"at most {MAX_REGISTERS} registers are supported")
    return registers


def _contract(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


class _RegisterState:
    registers: tuple[Register, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers)

    @property
    def n(self) -> int:
        return len(self.registers)

    def register(self, name: str) -> Register:
        return self.registers[self.index(name)]

    def index(self, name) -> int:
        if isinstance(name, Register):
            name = name.name
        try:
            return self.names.index(name)
        except ValueError:
            raise RegisterError(f"unknown register {name!r}; have {list(self.names)}") from None

    def _axes(self, names) -> list[int]:
        if isinstance(names, (str, Register)):
            names = [names]
        axes = [self.index(nm) for nm in names]
        if len(set(axes)) != len(axes):
            raise DuplicateRegisterError(f"register listed twice in {names}")
        return axes

    def _perm(self, names) -> list[int]:
        names = [nm.name if isinstance(nm, Register) else nm for nm in names]
        if sorted(names) != sorted(self.names):
            raise RegisterError(f"register mismatch: {sorted(names)} vs {sorted(self.names)}")
        return [self.index(nm) for nm in names]


class PureState(_RegisterState):
    """Amplitude vector over an ordered list of registers (first register most significant)."""

    def __init__(self, registers: Iterable[Register], amplitudes):
        self.registers = _check_registers(registers)
        amps = np.array(amplitudes, dtype=complex).ravel()
        if amps.size != 2**self.n:
            raise InvalidParameterError(
                f"{self.n} registers need {2 ** self.n} amplitudes, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidParameterError("amplitudes must be finite")
        if np.vdot(amps, amps).real > 1 + 1e-12:
            raise InvalidParameterError("squared norm exceeds 1")
        amps.setflags(write=False)
        self.amplitudes = amps

    @classmethod
    def _wrap(cls, registers, amps) -> "PureState":
        obj = cls.__new__(cls)
        obj.registers = tuple(registers)
        amps = np.ascontiguousarray(amps, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        obj.amplitudes = amps
        return obj

    @classmethod
    def basis(cls, registers: Sequence[Register], labels: Sequence[str]) -> "PureState":
        registers = _check_registers(registers)
        if len(labels) != len(registers):
            raise InvalidParameterError("need one label per register")
        idx = 0
        for reg, label in zip(registers, labels):
            if label not in reg.labels:
                raise InvalidParameterError(f"{label!r} is not a basis label of {reg.kind} register {reg.name!r}")
            idx = 2 * idx + reg.labels.index(label)
        amps = np.zeros(2 ** len(registers), dtype=complex)
        amps[idx] = 1
        return cls(registers, amps)

    @classmethod
    def qubit(cls, register: Register, a0: complex, a1: complex) -> "PureState":
        """Single-register state ``a0|0> + a1|1>`` (``R``/``up`` is index 0)."""
        return cls([register], [a0, a1])

    def __repr__(self) -> str:
        return f"PureState({list(self.names)}, {np.round(self.amplitudes, 6).tolist()})"

    @property
    def weight(self) -> float:
        """Squared norm; the probability carried by a conditional branch."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    norm_sq = weight

    def amplitude(self, *labels: str) -> complex:
        idx = 0
        for reg, label in zip(self.registers, labels):
            idx = 2 * idx + reg.labels.index(label)
        return complex(self.amplitudes[idx])

    def normalized(self) -> "PureState":
        w = self.weight
        if w <= 0:
            raise ConditioningError("cannot normalize a zero-norm state")
        return PureState._wrap(self.registers, self.amplitudes / np.sqrt(w))

    def tensor(self, other: "PureState") -> "PureState":
        regs = _check_registers(self.registers + other.registers)
        return PureState._wrap(regs, np.kron(self.amplitudes, other.amplitudes))

    def apply(self, op, names) -> "PureState":
        axes = self._axes(names)
        op = _check_op(op, len(axes))
        psi = self.amplitudes.reshape((2,) * self.n)
        return PureState._wrap(self.registers, _contract(psi, op, axes))

    def project(self, name, ket) -> "PureState":
        """Contract ``<ket|`` on one register and drop it; the result stays unnormalized."""
        ax = self.index(name)
        psi = self.amplitudes.reshape((2,) * self.n)
        out = np.tensordot(np.asarray(ket, dtype=complex).conj(), psi, axes=([0], [ax]))
        regs = self.registers[:ax] + self.registers[ax + 1:]
        return PureState._wrap(regs, out)

    def reorder(self, names) -> "PureState":
        perm = self._perm(names)
        psi = self.amplitudes.reshape((2,) * self.n).transpose(perm)
        return PureState._wrap([self.registers[p] for p in perm], psi)

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix._wrap(self.registers, np.outer(self.amplitudes, self.amplitudes.conj()))


class DensityMatrix(_RegisterState):
    """Possibly sub-normalized density operator; the trace is the branch probability."""

    def __init__(self, registers: Iterable[Register], matrix):
        self.registers = _check_registers(registers)
        rho = np.array(matrix, dtype=complex)
        dim = 2**self.n
        if rho.shape != (dim, dim):
            raise InvalidParameterError(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise InvalidParameterError("density matrix entries must be finite")
        if not np.allclose(rho, rho.conj().T, atol=1e-12, rtol=0):
            raise InvalidParameterError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if not -1e-12 <= tr <= 1 + 1e-12:
            raise InvalidParameterError(f"trace must lie in [0, 1], got {tr!r}")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise InvalidParameterError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        self.matrix = rho

    @classmethod
    def _wrap(cls, registers, matrix) -> "DensityMatrix":
        obj = cls.__new__(cls)
        obj.registers = tuple(registers)
        dim = 2 ** len(obj.registers)
        rho = np.ascontiguousarray(matrix, dtype=complex).reshape(dim, dim)
        rho.setflags(write=False)
        obj.matrix = rho
        return obj

    @classmethod
    def maximally_mixed(cls, registers: Sequence[Register]) -> "DensityMatrix":
        registers = _check_registers(registers)
        dim = 2 ** len(registers)
        return cls(registers, np.eye(dim) / dim)

    def __repr__(self) -> str:
        return f"DensityMatrix({list(self.names)}, trace={self.weight:.6g})"

    def _tensor(self) -> np.ndarray:
        return self.matrix.reshape((2,) * (2 * self.n))

    @property
    def weight(self) -> float:
        return float(np.trace(self.matrix).real)

    trace = weight

    def normalized(self) -> "DensityMatrix":
        w = self.weight
        if w <= 0:
            raise ConditioningError("cannot normalize a zero-trace state")
        return DensityMatrix._wrap(self.registers, self.matrix / w)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        regs = _check_registers(self.registers + other.registers)
        return DensityMatrix._wrap(regs, np.kron(self.matrix, other.matrix))

    def apply(self, op, names) -> "DensityMatrix":
        """``op rho op^dagger`` with ``op`` acting on the listed registers."""
        axes = self._axes(names)
        op = _check_op(op, len(axes))
        t = _contract(self._tensor(), op, axes)
        t = _contract(t, op.conj(), [self.n + a for a in axes])
        return DensityMatrix._wrap(self.registers, t)

    def project(self, name, ket) -> "DensityMatrix":
        ax = self.index(name)
        ket = np.asarray(ket, dtype=complex)
        t = np.tensordot(ket.conj(), self._tensor(), axes=([0], [ax]))
        t = np.tensordot(ket, t, axes=([0], [self.n - 1 + ax]))
        regs = self.registers[:ax] + self.registers[ax + 1:]
        return DensityMatrix._wrap(regs, t)

    def partial_trace(self, names) -> "DensityMatrix":
        axes = self._axes(names) if names else []
        t = self._tensor()
        m = self.n
        for ax in sorted(axes, reverse=True):
            t = np.trace(t, axis1=ax, axis2=ax + m)
            m -= 1
        keep = [r for i, r in enumerate(self.registers) if i not in axes]
        return DensityMatrix._wrap(keep, t)

    def reorder(self, names) -> "DensityMatrix":
        perm = self._perm(names)
        t = self._tensor().transpose(perm + [self.n + p for p in perm])
        return DensityMatrix._wrap([self.registers[p] for p in perm], t)

    def to_density(self) -> "DensityMatrix":
        return self


State = Union[PureState, DensityMatrix]


def _check_op(op, k: int) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.shape != (2**k, 2**k):
        raise InvalidParameterError(f"operator on {k} register(s) must be {2 ** k}x{2 ** k}, got {op.shape}")
    return op


@dataclass(frozen=True)
class MeasurementRecord:
    register: str
    basis: str
    outcome: str
    probability: float
    # collapsed state with the measured register kept in the outcome ket; None if probability is 0
    state: State | None
    # same, with the measured register removed
    remainder: State | None


def tensor(a: State, b: State) -> State:
    if isinstance(a, DensityMatrix) or isinstance(b, DensityMatrix):
        return a.to_density().tensor(b.to_density())
    return a.tensor(b)


def apply_gate(state: State, register, gate) -> State:
    """Apply a single-register 2x2 map (not necessarily unitary)."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise InvalidParameterError(f"gate must be 2x2, got shape {gate.shape}")
    return state.apply(gate, [register])


def apply_operator(state: State, registers, op) -> State:
    return state.apply(op, registers)


def measure(state: State, register, basis: Basis, conditional: bool = False) -> list[MeasurementRecord]:
    """Enumerate both outcomes of a projective measurement of one register.

    Probabilities are the squared norms of the projected branches, so they sum to
    the input's weight; pass ``conditional=True`` to divide by that weight.
    """
    total = state.weight
    if total <= 0:
        raise ConditioningError("cannot measure a zero-norm state")
    reg = state.register(register)
    records = []
    for label in basis.labels:
        ket = basis.ket(label)
        rest = state.project(reg.name, ket)
        p = rest.weight
        if conditional:
            p /= total
        p = min(max(p, 0.0), 1.0)
        if rest.weight > 0:
            rest = rest.normalized()
            collapsed = _insert(rest, reg, ket, state.index(reg.name))
        else:
            rest = collapsed = None
        records.append(MeasurementRecord(reg.name, basis.name, label, p, collapsed, rest))
    return records


def _insert(rest: State, reg: Register, ket, position: int) -> State:
    single = PureState._wrap([reg], ket)
    full = tensor(single, rest)
    order = list(rest.names)
    order.insert(position, reg.name)
    return full.reorder(order)


def to_density(state: State) -> DensityMatrix:
    return state.to_density()


def partial_trace(state: State, registers) -> DensityMatrix:
    """Trace out ``registers`` (an empty list returns the full projector)."""
    return state.to_density().partial_trace(registers)


def state_fidelity(state: State, target: PureState) -> float:
    """Conditioned fidelity ``<target|rho|target> / (tr rho <target|target>)``."""
    if state.weight <= 0:
        raise ConditioningError("fidelity of a zero-weight state is undefined")
    target = target.reorder(state.names)
    t = target.amplitudes
    tn = np.vdot(t, t).real
    if tn <= 0:
        raise ConditioningError("target state has zero norm")
    if isinstance(state, PureState):
        f = abs(np.vdot(t, state.amplitudes)) ** 2 / (tn * state.weight)
    else:
        f = np.vdot(t, state.matrix @ t).real / (tn * state.weight)
    return float(min(max(f, 0.0), 1.0))


BELL_SIGNS = {"Phi+": (0, 1), "Phi-": (0, -1), "Psi+": (1, 1), "Psi-": (1, -1)}


def bell_state(name: str, first: Register, second: Register) -> PureState:
    """``Phi+- = (|00> +- |11>)/sqrt2``, ``Psi+- = (|01> +- |10>)/sqrt2`` in each register's labels."""
    try:
        flip, sign = BELL_SIGNS[name]
    except KeyError:
        raise InvalidParameterError(f"unknown Bell state {name!r}") from None
    amps = np.zeros(4, dtype=complex)
    if flip:
        amps[1], amps[2] = _S2, sign * _S2
    else:
        amps[0], amps[3] = _S2, sign * _S2
    return PureState([first, second], amps)
