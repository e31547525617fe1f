"""End-to-end procedures built on the beam splitter.

Every protocol enumerates all outcome branches deterministically: output port(s)
followed by the final detector or spin-measurement outcome. Each branch carries its
probability, conditioned state and fidelity to the ideal target. Photon loss appears
as flagged branches with no state, so branch probabilities always sum to one.

Two efficiency numbers are reported:

* ``detection_probability``: the photon(s) reached a detector (all non-lost branches).
* ``success_probability``: the weight carried by the target-producing parts of the
  operators (cold-cavity transmission, hot-cavity reflection). For the single-photon
  interfaces this is ``(|t0|**2 + |r|**2) / 2``.

Sign conventions: ``H = (R + L)/sqrt2`` and ``V = (R - L)/sqrt2``; a spin Hadamard maps
``up -> (up + down)/sqrt2``. ``H`` (or spin ``up``) heralds the ``+`` target, ``V`` (or
``down``) the ``-`` target. Reflected photons in the state-transfer protocols get a
bit-flip correction so both ports share the same targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._validation import InvalidParameterError, RegisterError, check_normalized
from .channel import (
    REFLECTED,
    TRANSMITTED,
    DephasingParams,
    EBSChannel,
    apply_dephasing,
    propagate,
)
from .quantum import (
    CIRCULAR,
    LINEAR,
    SPIN,
    SPIN_Z,
    H,
    PureState,
    State,
    X,
    Z,
    bell_state,
    photon,
    spin,
    state_fidelity,
)

_S2 = 1 / math.sqrt(2)
_PORT_CODES = (("T", TRANSMITTED), ("R", REFLECTED))

CONVENTIONS = {
    "linear_basis": "H=(R+L)/sqrt2, V=(R-L)/sqrt2",
    "spin_hadamard": "up->(up+down)/sqrt2, down->(up-down)/sqrt2",
    "herald_sign": "H or up -> +, V or down -> -",
}


@dataclass(frozen=True)
class Branch:
    ports: str
    outcome: str
    probability: float
    state: State | None = None
    target: PureState | None = None
    target_label: str = ""
    fidelity: float | None = None
    lost: bool = False
    inferred: str | None = None

    @property
    def label(self) -> str:
        return f"{self.ports}/{self.outcome}" if self.outcome else self.ports


@dataclass(frozen=True)
class ProtocolResult:
    name: str
    branches: tuple[Branch, ...]
    success_probability: float
    conventions: dict[str, str] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)

    @property
    def total_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches)

    @property
    def detection_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches if not b.lost)

    @property
    def loss_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches if b.lost)

    def port_probabilities(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for b in self.branches:
            if not b.lost:
                out[b.ports] = out.get(b.ports, 0.0) + b.probability
        return out

    def port_fidelity(self, ports: str) -> float:
        """Probability-weighted mean fidelity over the detector outcomes of one port combination."""
        sel = [b for b in self.branches if b.ports == ports and not b.lost and b.probability > 0]
        if not sel:
            raise InvalidParameterError(f"no populated branch with ports {ports!r}")
        p = math.fsum(b.probability for b in sel)
        return math.fsum(b.probability * b.fidelity for b in sel) / p

    def branch(self, ports: str, outcome: str = "") -> Branch:
        for b in self.branches:
            if b.ports == ports and b.outcome == outcome:
                return b
        raise KeyError(f"{ports}/{outcome}")

    def sample(self, rng: np.random.Generator, shots: int) -> list[Branch]:
        """Draw ``shots`` branches according to their probabilities."""
        p = np.array([b.probability for b in self.branches])
        idx = rng.choice(len(self.branches), size=shots, p=p / p.sum())
        return [self.branches[i] for i in idx]

    def to_report(self, fmt=lambda x: f"{x:.9g}") -> str:
        lines = [
            f"protocol = {self.name}",
            f"success_probability = {fmt(self.success_probability)}",
            f"detection_probability = {fmt(self.detection_probability)}",
            f"loss_probability = {fmt(self.loss_probability)}",
        ]
        lines += [f"metric.{k} = {fmt(v)}" for k, v in self.metrics.items()]
        lines += [f"convention.{k} = {v}" for k, v in self.conventions.items()]
        for ports, p in self.port_probabilities().items():
            lines += ["", f"[ports {ports}]", f"probability = {fmt(p)}"]
        for b in self.branches:
            lines += ["", f"[branch {b.label}]", f"ports = {b.ports}"]
            if b.outcome:
                lines.append(f"outcome = {b.outcome}")
            if b.inferred is not None:
                lines.append(f"inferred = {b.inferred}")
            lines.append(f"probability = {fmt(b.probability)}")
            lines.append(f"lost = {'true' if b.lost else 'false'}")
            if not b.lost:
                lines.append(f"target = {b.target_label}")
                lines.append("fidelity = " + ("undefined" if b.fidelity is None else fmt(b.fidelity)))
        return "\n".join(lines) + "\n"


def _qubit(reg, alpha: complex, beta: complex, density: bool) -> State:
    s = PureState.qubit(reg, alpha, beta)
    return s.to_density() if density else s


def _tensor(*states: State) -> State:
    out = states[0]
    for s in states[1:]:
        out = out.tensor(s) if type(out) is type(s) else out.to_density().tensor(s.to_density())
    return out


def _scatter_step(channel: EBSChannel, state: State, photon_name: str, dephasing: DephasingParams | None):
    """Both port branches (unnormalized) and the weight lost in this scattering event."""
    out = {}
    for code, port in _PORT_CODES:
        b = propagate(channel, state, port, photon_name, channel.spin)
        if dephasing is not None:
            b = apply_dephasing(b, channel.spin, dephasing)
        out[code] = b
    lost = state.weight - math.fsum(b.weight for b in out.values())
    return out, max(lost, 0.0)


def _finish(ports: str, outcome: str, unnorm: State, target: PureState, target_label: str,
            inferred: str | None = None) -> Branch:
    w = unnorm.weight
    if w <= 0:
        return Branch(ports, outcome, 0.0, None, target, target_label, None, inferred=inferred)
    state = unnorm.normalized()
    return Branch(ports, outcome, w, state, target, target_label, state_fidelity(state, target), inferred=inferred)


def _lost(ports: str, p: float) -> Branch:
    return Branch(ports, "", p, lost=True)


def _success(branches: Sequence[Branch]) -> float:
    return math.fsum(b.probability for b in branches if not b.lost)


# ---------------------------------------------------------------------------
# photon <-> spin interface


def _photon_to_spin(alpha, beta, channel, feedforward, dephasing, density):
    ph, s = photon("photon"), spin(channel.spin)
    state = _tensor(_qubit(ph, alpha, beta, density), _qubit(s, _S2, _S2, density))
    ports, lost = _scatter_step(channel, state, ph.name, dephasing)
    branches = []
    for code, b in ports.items():
        b = b.apply(H, [ph.name])
        if code == "R":
            b = b.apply(X, [s.name])
        for det, ket, sign in (("H", CIRCULAR.ket("R"), 1), ("V", CIRCULAR.ket("L"), -1)):
            out = b.project(ph.name, ket)
            if feedforward and sign < 0:
                out = out.apply(Z, [s.name])
                sign = 1
            target = PureState.qubit(s, alpha, sign * beta)
            label = "alpha|up> + beta|down>" if sign > 0 else "alpha|up> - beta|down>"
            branches.append(_finish(code, det, out, target, label))
    branches.append(_lost("lost", lost))
    return branches


def photon_to_spin_transfer(
    alpha: complex,
    beta: complex,
    channel: EBSChannel,
    *,
    feedforward: bool = False,
    dephasing: DephasingParams | None = None,
    density: bool = False,
) -> ProtocolResult:
    """Write ``alpha|R> + beta|L>`` onto a spin prepared in ``(up + down)/sqrt2``.

    After scattering the photon passes a Hadamard (PBS) and is detected; detector
    ``H`` leaves ``alpha|up> + beta|down>`` and ``V`` leaves ``alpha|up> - beta|down>``
    unless ``feedforward`` applies the corrective spin ``Z``.
    """
    alpha, beta = check_normalized(alpha, beta)
    branches = _photon_to_spin(alpha, beta, channel, feedforward, dephasing, density)
    ideal = _photon_to_spin(alpha, beta, channel.idealized(), feedforward, dephasing, density)
    return ProtocolResult(
        "photon_to_spin", tuple(branches), _success(ideal),
        dict(CONVENTIONS, reflected_correction="X on spin"),
    )


def _spin_to_photon(alpha, beta, channel, feedforward, dephasing, density):
    ph, s = photon("photon"), spin(channel.spin)
    state = _tensor(_qubit(ph, _S2, _S2, density), _qubit(s, alpha, beta, density))
    ports, lost = _scatter_step(channel, state, ph.name, dephasing)
    branches = []
    for code, b in ports.items():
        if code == "R":
            b = b.apply(X, [ph.name])
        b = b.apply(H, [s.name])
        for outcome, sign in (("up", 1), ("down", -1)):
            out = b.project(s.name, SPIN_Z.ket(outcome))
            if feedforward and sign < 0:
                out = out.apply(Z, [ph.name])
                sign = 1
            target = PureState.qubit(ph, alpha, sign * beta)
            label = "alpha|R> + beta|L>" if sign > 0 else "alpha|R> - beta|L>"
            branches.append(_finish(code, outcome, out, target, label))
    branches.append(_lost("lost", lost))
    return branches


def spin_to_photon_transfer(
    alpha: complex,
    beta: complex,
    channel: EBSChannel,
    *,
    feedforward: bool = False,
    dephasing: DephasingParams | None = None,
    density: bool = False,
) -> ProtocolResult:
    """Map a spin state ``alpha|up> + beta|down>`` onto an ``H``-polarized probe photon.

    The spin is rotated by a Hadamard and read out in the z basis; outcome ``up``
    leaves the photon in ``alpha|R> + beta|L>``, ``down`` in ``alpha|R> - beta|L>``.
    """
    alpha, beta = check_normalized(alpha, beta)
    branches = _spin_to_photon(alpha, beta, channel, feedforward, dephasing, density)
    ideal = _spin_to_photon(alpha, beta, channel.idealized(), feedforward, dephasing, density)
    return ProtocolResult(
        "spin_to_photon", tuple(branches), _success(ideal),
        dict(CONVENTIONS, reflected_correction="X on photon"),
    )


# ---------------------------------------------------------------------------
# QND readout

# (port, helicity) -> inferred spin
QND_RULE = {("T", "R"): "up", ("T", "L"): "down", ("R", "L"): "up", ("R", "R"): "down"}


def _spin_input(spin_state, default_name: str, density: bool) -> State:
    if isinstance(spin_state, tuple):
        a, b = check_normalized(*spin_state)
        return _qubit(spin(default_name), a, b, density)
    if spin_state.n != 1 or spin_state.registers[0].kind != SPIN:
        raise RegisterError("spin_state must be a single spin register")
    return spin_state.to_density() if density else spin_state


def _qnd(spin_state, channel, probe, dephasing, density):
    s = spin_state.registers[0]
    if s.name != channel.spin:
        channel = channel.bound_to(s.name)
    ph = photon("probe")
    ket = LINEAR.ket(probe)
    state = _tensor(_qubit(ph, ket[0], ket[1], density), spin_state)
    ports, lost = _scatter_step(channel, state, ph.name, dephasing)
    branches = []
    for code, b in ports.items():
        for helicity in CIRCULAR.labels:
            inferred = QND_RULE[(code, helicity)]
            out = b.project(ph.name, CIRCULAR.ket(helicity))
            target = PureState.basis([s], [inferred])
            branches.append(_finish(code, helicity, out, target, f"|{inferred}>", inferred))
    branches.append(_lost("lost", lost))
    return branches


def qnd_spin_readout(
    spin_state,
    channel: EBSChannel,
    probe: str = "H",
    *,
    dephasing: DephasingParams | None = None,
    density: bool = False,
) -> ProtocolResult:
    """Infer the spin from the port and helicity of a linearly polarized probe photon.

    ``spin_state`` is a single-spin :class:`PureState`/:class:`DensityMatrix` or an
    ``(alpha, beta)`` pair. Each detection branch records the inferred spin and the
    post-measurement spin state; its fidelity is the overlap with the inferred
    eigenstate. ``metrics["correctness_probability"]`` is the detection-conditioned
    mean of that overlap, which for eigenstate inputs is the probability of a correct
    readout.
    """
    if probe not in LINEAR.labels:
        raise InvalidParameterError(f"probe must be 'H' or 'V', got {probe!r}")
    spin_state = _spin_input(spin_state, channel.spin, density)
    branches = _qnd(spin_state, channel, probe, dephasing, density)
    ideal = _qnd(spin_state, channel.idealized(), probe, dephasing, density)
    detected = [b for b in branches if not b.lost and b.probability > 0]
    p_det = math.fsum(b.probability for b in detected)
    correct = math.fsum(b.probability * b.fidelity for b in detected) / p_det if p_det > 0 else 0.0
    return ProtocolResult(
        "qnd_spin_readout", tuple(branches), _success(ideal),
        dict(CONVENTIONS, inference="T,R->up T,L->down R,L->up R,R->down"),
        {"correctness_probability": correct, "error_probability": 1.0 - correct},
    )


# ---------------------------------------------------------------------------
# two-photon Bell states and remote spin entanglement


def _bell_label(ports: str, sign: int) -> str:
    kind = "Phi" if ports[0] == ports[1] else "Psi"
    return kind + ("+" if sign > 0 else "-")


def _two_photon(ch1, ch2, dephasing, density):
    p1, p2, s = photon("photon1"), photon("photon2"), spin(ch1.spin)
    state = _tensor(
        _qubit(p1, _S2, _S2, density), _qubit(p2, _S2, _S2, density), _qubit(s, _S2, _S2, density)
    )
    first, lost1 = _scatter_step(ch1, state, p1.name, dephasing)
    branches = []
    losses = []
    for c1, b1 in first.items():
        second, lost2 = _scatter_step(ch2, b1, p2.name, dephasing)
        losses.append(_lost(c1 + "x", lost2))
        for c2, b in second.items():
            ports = c1 + c2
            b = b.apply(H, [s.name])
            for outcome, sign in (("up", 1), ("down", -1)):
                out = b.project(s.name, SPIN_Z.ket(outcome))
                label = _bell_label(ports, sign)
                branches.append(_finish(ports, outcome, out, bell_state(label, p1, p2), label))
    return branches + [_lost("x", lost1)] + losses


def two_photon_bell(
    channel1: EBSChannel,
    channel2: EBSChannel,
    *,
    dephasing: DephasingParams | None = None,
    density: bool = False,
) -> ProtocolResult:
    """Entangle two ``H`` photons that scatter in sequence off one spin.

    Port combinations ``TT``/``RR`` herald ``Phi+-`` and ``TR``/``RT`` herald ``Psi+-``;
    the sign comes from the z readout of the Hadamard-rotated spin. Loss branches are
    labelled ``x`` (photon 1 lost) and ``Tx``/``Rx`` (photon 2 lost).
    """
    if channel1.spin != channel2.spin:
        raise RegisterError(
            f"both photons must scatter off the same spin, got {channel1.spin!r} and {channel2.spin!r}"
        )
    branches = _two_photon(channel1, channel2, dephasing, density)
    ideal = _two_photon(channel1.idealized(), channel2.idealized(), dephasing, density)
    return ProtocolResult("two_photon_bell", tuple(branches), _success(ideal), dict(CONVENTIONS))


def _remote(cha, chb, spin_a, spin_b, photon_state, dephasing, density):
    ph, sa, sb = photon("photon"), spin(cha.spin), spin(chb.spin)
    state = _tensor(
        _qubit(ph, *photon_state, density), _qubit(sa, *spin_a, density), _qubit(sb, *spin_b, density)
    )
    first, lost1 = _scatter_step(cha, state, ph.name, dephasing)
    branches = []
    losses = []
    for c1, b1 in first.items():
        second, lost2 = _scatter_step(chb, b1, ph.name, dephasing)
        losses.append(_lost(c1 + "x", lost2))
        for c2, b in second.items():
            ports = c1 + c2
            for det, sign in (("H", 1), ("V", -1)):
                out = b.project(ph.name, LINEAR.ket(det))
                label = _bell_label(ports, sign)
                branches.append(_finish(ports, det, out, bell_state(label, sa, sb), label))
    return branches + [_lost("x", lost1)] + losses


def remote_spin_entanglement(
    channel_a: EBSChannel,
    channel_b: EBSChannel,
    *,
    spin_a: tuple[complex, complex] = (_S2, _S2),
    spin_b: tuple[complex, complex] = (_S2, _S2),
    photon_state: tuple[complex, complex] = (_S2, _S2),
    dephasing: DephasingParams | None = None,
    density: bool = False,
) -> ProtocolResult:
    """Entangle the spins of two cavities with one photon scattered off A then B.

    The photon is finally detected in the ``H``/``V`` basis. Same-port combinations
    herald ``Phi+-`` on the spins, mixed ones ``Psi+-``; ``H`` gives ``+``.
    """
    if channel_a.spin == channel_b.spin:
        raise RegisterError(f"the two cavities must hold distinct spins, both are {channel_a.spin!r}")
    spin_a, spin_b, photon_state = (check_normalized(*v) for v in (spin_a, spin_b, photon_state))
    branches = _remote(channel_a, channel_b, spin_a, spin_b, photon_state, dephasing, density)
    ideal = _remote(channel_a.idealized(), channel_b.idealized(), spin_a, spin_b, photon_state,
                    dephasing, density)
    return ProtocolResult("remote_spin_entanglement", tuple(branches), _success(ideal), dict(CONVENTIONS))


PROTOCOLS = {
    "photon_to_spin": photon_to_spin_transfer,
    "spin_to_photon": spin_to_photon_transfer,
    "qnd_spin_readout": qnd_spin_readout,
    "two_photon_bell": two_photon_bell,
    "remote_spin_entanglement": remote_spin_entanglement,
}
