"""Spin-conditional transmission/reflection operators of the entanglement beam splitter.

A photon whose circular polarization does not couple to the current spin state
(``R up`` and ``L down``) sees the cold cavity; the other two combinations see the
coupled cavity. Both operators are diagonal in the fixed basis order
``(R up, R down, L up, L down)``. Scattering is sub-unitary; the missing weight
is reported as an explicit ``lost`` port with no state attached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import (
    InvalidParameterError,
    RegisterError,
    UndefinedFidelityError,
    check_unit_interval,
)
from .quantum import PHOTON, SPIN, DensityMatrix, State
from .scattering import CavityParams, ScatterAmplitudes, coupled_amplitudes, scatter_amplitudes

FULL = "full"
IDEAL = "ideal"
MODES = (FULL, IDEAL)

TRANSMITTED = "transmitted"
REFLECTED = "reflected"
LOST = "lost"
PORTS = (TRANSMITTED, REFLECTED)

BASIS_ORDER = (("R", "up"), ("R", "down"), ("L", "up"), ("L", "down"))
_UNCOUPLED = (0, 3)
_COUPLED = (1, 2)


@dataclass(frozen=True)
class EBSChannel:
    """Immutable pair of diagonal scattering operators.

    ``amps`` keeps the bare four amplitudes at the probe detuning; ``t_diag`` and
    ``r_diag`` are what actually acts on states (they differ from ``amps`` once hole
    mixing is applied or in ideal mode). ``spin`` names the spin register the
    channel acts on by default.
    """

    amps: ScatterAmplitudes
    t_diag: tuple[complex, complex, complex, complex]
    r_diag: tuple[complex, complex, complex, complex]
    mixing: float = 0.0
    mode: str = FULL
    params: CavityParams | None = None
    spin: str = "spin"

    @property
    def detuning(self) -> float:
        return self.amps.detuning

    @property
    def t_op(self) -> np.ndarray:
        return np.diag(np.array(self.t_diag, dtype=complex))

    @property
    def r_op(self) -> np.ndarray:
        return np.diag(np.array(self.r_diag, dtype=complex))

    def operator(self, port: str) -> np.ndarray:
        if port == TRANSMITTED:
            return self.t_op
        if port == REFLECTED:
            return self.r_op
        raise InvalidParameterError(f"port must be one of {PORTS}, got {port!r}")

    def idealized(self) -> "EBSChannel":
        """Keep only the target-producing part: cold-cavity transmission, hot-cavity reflection."""
        t = [0j] * 4
        r = [0j] * 4
        for i in _UNCOUPLED:
            t[i] = self.t_diag[i]
        for i in _COUPLED:
            r[i] = self.r_diag[i]
        return EBSChannel(self.amps, tuple(t), tuple(r), self.mixing, IDEAL, self.params, self.spin)

    def bound_to(self, spin: str) -> "EBSChannel":
        return EBSChannel(self.amps, self.t_diag, self.r_diag, self.mixing, self.mode, self.params, spin)

    def fidelities(self) -> tuple[float, float]:
        """Amplitude fidelities ``(F_t, F_r)`` of the operators as built (mixing included)."""
        tu, tc = abs(self.t_diag[0]), abs(self.t_diag[1])
        ru, rc = abs(self.r_diag[0]), abs(self.r_diag[1])
        return _ratio(tu, tc, "F_t"), _ratio(rc, ru, "F_r")

    def rows(self) -> list[tuple[str, str, str, float, float]]:
        """Operator matrix entries as ``(port, basis_in, basis_out, re, im)``."""
        labels = [f"{p}{'+' if s == 'up' else '-'}" for p, s in BASIS_ORDER]
        out = []
        for port in PORTS:
            op = self.operator(port)
            for j, b_in in enumerate(labels):
                for i, b_out in enumerate(labels):
                    out.append((port, b_in, b_out, float(op[i, j].real), float(op[i, j].imag)))
        return out


def _diagonals(params: CavityParams, detuning: float, mixing: float):
    if mixing == 0.0:
        tu, ru = _pair(params, detuning, 0.0)  # cold cavity
        tc, rc = _pair(params, detuning, params.g)
    else:
        tu, ru = _pair(params, detuning, mixing * params.g)
        tc, rc = _pair(params, detuning, params.g * math.sqrt(1.0 - mixing**2))
    return (tu, tc, tc, tu), (ru, rc, rc, ru)


def _pair(params: CavityParams, detuning: float, g: float) -> tuple[complex, complex]:
    t, r = coupled_amplitudes(params.with_(g=g), detuning)
    return complex(t), complex(r)


def build_channel(
    params: CavityParams,
    detuning: float = 0.0,
    mixing: float = 0.0,
    mode: str = FULL,
    spin: str = "spin",
) -> EBSChannel:
    """Channel at one probe detuning.

    With hole mixing ``mixing = eps`` the nominally uncoupled combinations see a
    coupling ``eps * g`` and the coupled ones ``g * sqrt(1 - eps**2)``.
    ``mode="ideal"`` keeps only ``t0`` on the transmission operator and ``r`` on
    the reflection operator.
    """
    mixing = check_unit_interval("mixing", mixing)
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}, got {mode!r}")
    amps = scatter_amplitudes(params, detuning)
    t_diag, r_diag = _diagonals(params, amps.detuning, mixing)
    channel = EBSChannel(amps, t_diag, r_diag, mixing, FULL, params, spin)
    return channel.idealized() if mode == IDEAL else channel


def ideal_channel(spin: str = "spin") -> EBSChannel:
    """The perfect splitter: ``t0 = -1``, ``r = 1``, ``t = r0 = 0``."""
    amps = ScatterAmplitudes(t=0j, r=1 + 0j, t0=-1 + 0j, r0=0j, detuning=0.0)
    return EBSChannel(amps, (-1 + 0j, 0j, 0j, -1 + 0j), (0j, 1 + 0j, 1 + 0j, 0j), 0.0, IDEAL, None, spin)


def apply_hole_mixing(channel: EBSChannel, mixing: float) -> EBSChannel:
    mixing = check_unit_interval("mixing", mixing)
    if mixing == channel.mixing:
        return channel
    if channel.params is None:
        raise InvalidParameterError("hole mixing needs a channel built from CavityParams")
    return build_channel(channel.params, channel.detuning, mixing, channel.mode, channel.spin)


@dataclass(frozen=True)
class PortOutcome:
    port: str
    probability: float
    # normalized post-scattering state; None for the lost port or a zero-probability port
    state: State | None


def _check_kinds(state: State, photon: str, spin: str) -> None:
    if state.register(photon).kind != PHOTON:
        raise RegisterError(f"register {photon!r} is not a photon polarization")
    if state.register(spin).kind != SPIN:
        raise RegisterError(f"register {spin!r} is not a spin")


def propagate(channel: EBSChannel, state: State, port: str, photon: str, spin: str | None = None) -> State:
    """Unnormalized branch ``op |psi>`` (or ``op rho op^dagger``) for one output port."""
    spin = channel.spin if spin is None else spin
    _check_kinds(state, photon, spin)
    return state.apply(channel.operator(port), [photon, spin])


def scatter(channel: EBSChannel, state: State, photon: str, spin: str | None = None) -> list[PortOutcome]:
    """Split ``state`` into transmitted, reflected and lost outcomes.

    Probabilities are relative to the input weight, so they sum to one.
    """
    total = state.weight
    if total <= 0:
        raise InvalidParameterError("cannot scatter a zero-weight state")
    outcomes = []
    kept = 0.0
    for port in PORTS:
        branch = propagate(channel, state, port, photon, spin)
        w = branch.weight
        kept += w
        post = branch.normalized() if w > 0 else None
        outcomes.append(PortOutcome(port, w / total, post))
    outcomes.append(PortOutcome(LOST, max(0.0, 1.0 - kept / total), None))
    return outcomes


@dataclass(frozen=True)
class FidelityReport:
    detuning: float
    F_t: float
    F_r: float


def _ratio(good: float, bad: float, name: str) -> float:
    denom = math.hypot(good, bad)
    if denom == 0:
        raise UndefinedFidelityError(f"{name} is undefined: both amplitudes vanish")
    return good / denom


def amplitude_fidelities(params: CavityParams, detuning: float = 0.0) -> FidelityReport:
    a = scatter_amplitudes(params, detuning)
    return FidelityReport(
        a.detuning,
        _ratio(abs(a.t0), abs(a.t), "F_t"),
        _ratio(abs(a.r), abs(a.r0), "F_r"),
    )


@dataclass(frozen=True)
class DephasingParams:
    """Cavity photon lifetime ``tau`` and exciton coherence time ``T2`` in the same unit."""

    tau: float
    T2: float

    def __post_init__(self):
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise InvalidParameterError(f"tau must be finite and >= 0, got {self.tau!r}")
        if not self.T2 > 0:
            raise InvalidParameterError(f"T2 must be > 0, got {self.T2!r}")

    @classmethod
    def from_ratio(cls, tau_over_t2: float) -> "DephasingParams":
        return cls(tau=float(tau_over_t2), T2=1.0)

    @property
    def coherence_factor(self) -> float:
        return math.exp(-self.tau / self.T2)


def apply_dephasing(state: State, spin: str, dephasing: DephasingParams) -> DensityMatrix:
    """Phase damping on one spin: coherences between ``up`` and ``down`` shrink by ``exp(-tau/T2)``."""
    rho = state.to_density()
    lam = dephasing.coherence_factor
    if lam == 1.0:
        return rho
    ax = rho.index(spin)
    n = rho.n
    t = np.array(rho.matrix).reshape((2,) * (2 * n))
    idx = [slice(None)] * (2 * n)
    for a, b in ((0, 1), (1, 0)):
        idx[ax], idx[n + ax] = a, b
        t[tuple(idx)] *= lam
    return DensityMatrix._wrap(rho.registers, t)
