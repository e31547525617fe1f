"""Command-line front end.

    ebsim spectra  [--config FILE] [--out FILE] [--set key=value ...]
    ebsim fidelity [--config FILE] [--out FILE] [--set key=value ...]
    ebsim protocol [--config FILE] [--out FILE] [--seed N] [--ideal] [--set key=value ...]

Tables are CSV with one header row and 9 significant digits; protocol reports are
``key = value`` blocks. Exit status: 0 success, 2 configuration error, 3 I/O error.
Sampled trajectories use numpy's PCG64 generator seeded with the 64-bit ``--seed``.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from pathlib import Path

import numpy as np

from ._validation import EBSError
from .channel import DephasingParams, amplitude_fidelities, build_channel, ideal_channel
from .config import MAX_SEED, ConfigError, RunConfig, from_mapping, load_config
from .protocols import PROTOCOLS, ProtocolResult
from .scattering import SPECTRUM_COLUMNS, sweep_spectra

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

VERB_MODES = {"spectra": "spectra", "fidelity": "fidelity-sweep", "protocol": "protocol"}
FIDELITY_COLUMNS = ("axis", "F_t", "F_r")


def fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in output")
    s = f"{x:.9g}"
    return "0" if s == "-0" else s


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _clip01(x: float) -> float:
    # rounding guard for probabilities and fidelities
    return min(max(x, 0.0), 1.0)


def _grid(cfg: RunConfig) -> np.ndarray:
    start, stop = cfg.sweep_range
    return np.linspace(start, stop, cfg.points)


def run_spectra(cfg: RunConfig) -> str:
    table = sweep_spectra(cfg.cavity, _grid(cfg))
    return _csv(SPECTRUM_COLUMNS, table.rows())


def run_fidelity_sweep(cfg: RunConfig) -> str:
    rows = []
    for x in _grid(cfg):
        x = float(x)
        if cfg.sweep_axis == "detuning":
            rep = amplitude_fidelities(cfg.cavity, x)
        else:
            rep = amplitude_fidelities(cfg.cavity.with_(**{cfg.sweep_axis: x}), cfg.detuning)
        rows.append((x, _clip01(rep.F_t), _clip01(rep.F_r)))
    return _csv(FIDELITY_COLUMNS, rows)


def _channel(cfg: RunConfig, spin: str):
    if cfg.ideal:
        return ideal_channel(spin)
    return build_channel(cfg.cavity, cfg.detuning, cfg.mixing, spin=spin)


def simulate_protocol(cfg: RunConfig) -> ProtocolResult:
    dephasing = DephasingParams.from_ratio(cfg.tau_over_t2) if cfg.tau_over_t2 > 0 else None
    name = cfg.protocol
    func = PROTOCOLS[name]
    if name in ("photon_to_spin", "spin_to_photon"):
        return func(cfg.alpha, cfg.beta, _channel(cfg, "spin"), dephasing=dephasing)
    if name == "qnd_spin_readout":
        return func((cfg.alpha, cfg.beta), _channel(cfg, "spin"), cfg.probe, dephasing=dephasing)
    if name == "two_photon_bell":
        ch = _channel(cfg, "spin")
        return func(ch, ch, dephasing=dephasing)
    return func(_channel(cfg, "spin_a"), _channel(cfg, "spin_b"), dephasing=dephasing)


def run_protocol(cfg: RunConfig) -> str:
    result = simulate_protocol(cfg)
    head = [
        f"channel.mode = {'ideal' if cfg.ideal else 'full'}",
        f"channel.detuning = {fmt(cfg.detuning)}",
        f"channel.mixing = {fmt(cfg.mixing)}",
        f"channel.tau_over_t2 = {fmt(cfg.tau_over_t2)}",
    ]
    text = result.to_report(lambda x: fmt(_clip01(x)))
    text = text.replace("\n", "\n" + "\n".join(head) + "\n", 1)
    if cfg.sampling:
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
        shots = result.sample(rng, cfg.n_shots)
        lines = ["", "[trajectory]", "prng = numpy.PCG64", f"seed = {cfg.seed}", f"shots = {cfg.n_shots}"]
        lines += [f"shot.{i} = {b.label}" for i, b in enumerate(shots)]
        text += "\n".join(lines) + "\n"
    return text


RUNNERS = {"spectra": run_spectra, "fidelity-sweep": run_fidelity_sweep, "protocol": run_protocol}


def _seed(raw: str) -> int:
    try:
        value = int(raw, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {raw!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ebsim", description="Entanglement beam splitter simulator.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_ in (
        ("spectra", "transmission/reflection spectra table"),
        ("fidelity", "amplitude entanglement fidelity sweep"),
        ("protocol", "enumerate a protocol's outcome branches"),
    ):
        p = sub.add_parser(verb, help=help_)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out", help="output file (default: output.path or stdout)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one configuration key (repeatable)")
        if verb == "protocol":
            p.add_argument("--seed", type=_seed, help="sample a trajectory log with this seed")
            p.add_argument("--ideal", action="store_true", help="use the perfect splitter operators")
    return parser


def _resolve(args) -> RunConfig:
    mode = VERB_MODES[args.verb]
    base = RunConfig(mode=mode)
    cfg = load_config(args.config, base) if args.config else base
    if cfg.mode != mode:
        raise ConfigError(f"run.mode: config says {cfg.mode!r} but the command is {args.verb!r}")
    if getattr(args, "ideal", False):
        cfg = cfg.with_(ideal=True)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_(seed=args.seed)
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        overrides[key] = value
    if overrides:
        cfg = from_mapping(overrides, cfg)
    if args.out:
        cfg = cfg.with_(output=args.out)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        text = RUNNERS[cfg.mode](cfg)
    except OSError as exc:
        print(f"ebsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EBSError as exc:
        print(f"ebsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.output:
            Path(cfg.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"ebsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
