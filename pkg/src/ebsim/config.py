"""Run configuration: a flat ``key = value`` text format with dotted keys.

Example::

    # working point
    cavity.g = 2.4
    cavity.gamma = 0.1
    sweep.axis = kappa_s
    sweep.start = 0
    sweep.stop = 2
    sweep.points = 41

Blank lines and ``#`` comments are ignored. Unknown keys are errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ._validation import ConfigError, EBSError
from .scattering import CavityParams

MODES = ("spectra", "fidelity-sweep", "protocol")
AXES = ("detuning", "g", "kappa_s")
PROTOCOL_NAMES = (
    "photon_to_spin",
    "spin_to_photon",
    "qnd_spin_readout",
    "two_photon_bell",
    "remote_spin_entanglement",
)
AXIS_DEFAULT_RANGE = {"detuning": (-5.0, 5.0), "g": (0.0, 5.0), "kappa_s": (0.0, 2.0)}
DEFAULT_POINTS = {"spectra": 1001, "fidelity-sweep": 201, "protocol": 2}
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RunConfig:
    mode: str = "spectra"
    cavity: CavityParams = field(default_factory=CavityParams)
    sweep_axis: str = "detuning"
    sweep_start: float | None = None
    sweep_stop: float | None = None
    sweep_points: int | None = None
    detuning: float = 0.0
    protocol: str = "two_photon_bell"
    alpha: complex = 1 + 0j
    beta: complex = 0j
    probe: str = "H"
    mixing: float = 0.0
    tau_over_t2: float = 0.0
    ideal: bool = False
    output: str | None = None
    seed: int | None = None
    shots: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"run.mode: expected one of {MODES}, got {self.mode!r}")
        if self.sweep_axis not in AXES:
            raise ConfigError(f"sweep.axis: expected one of {AXES}, got {self.sweep_axis!r}")
        if self.mode == "spectra" and self.sweep_axis != "detuning":
            raise ConfigError("sweep.axis: spectra are always swept over detuning")
        if self.sweep_points is not None and self.sweep_points < 2:
            raise ConfigError(f"sweep.points: need at least 2 points, got {self.sweep_points}")
        start, stop = self.sweep_range
        if not (math.isfinite(start) and math.isfinite(stop)) or not start < stop:
            raise ConfigError(f"sweep.start/sweep.stop: need finite start < stop, got {start}, {stop}")
        if self.sweep_axis in ("g", "kappa_s") and start < 0:
            raise ConfigError(f"sweep.start: {self.sweep_axis} cannot be negative")
        if self.protocol not in PROTOCOL_NAMES:
            raise ConfigError(f"protocol.name: unknown protocol {self.protocol!r}; choose from {PROTOCOL_NAMES}")
        if self.probe not in ("H", "V"):
            raise ConfigError(f"protocol.probe: expected H or V, got {self.probe!r}")
        if not 0.0 <= self.mixing <= 1.0:
            raise ConfigError(f"imperfection.mixing: must lie in [0, 1], got {self.mixing}")
        if not (self.tau_over_t2 >= 0 and math.isfinite(self.tau_over_t2)):
            raise ConfigError(f"imperfection.tau_over_t2: must be finite and >= 0, got {self.tau_over_t2}")
        if self.seed is not None and not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"sampling.seed: must be an unsigned 64-bit integer, got {self.seed}")
        if self.shots is not None:
            if self.seed is None:
                raise ConfigError("sampling.shots: sampling requires sampling.seed")
            if self.shots < 1:
                raise ConfigError(f"sampling.shots: must be >= 1, got {self.shots}")
        for name in ("detuning", "mixing", "tau_over_t2"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def sweep_range(self) -> tuple[float, float]:
        lo, hi = AXIS_DEFAULT_RANGE[self.sweep_axis]
        return (
            lo if self.sweep_start is None else self.sweep_start,
            hi if self.sweep_stop is None else self.sweep_stop,
        )

    @property
    def points(self) -> int:
        return DEFAULT_POINTS[self.mode] if self.sweep_points is None else self.sweep_points

    @property
    def sampling(self) -> bool:
        return self.seed is not None

    @property
    def n_shots(self) -> int:
        return 100 if self.shots is None else self.shots

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in _to_mapping(self).items())


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _to_mapping(cfg: RunConfig) -> dict[str, str]:
    out = {"run.mode": cfg.mode}
    for f in fields(CavityParams):
        out[f"cavity.{f.name}"] = _fmt_float(getattr(cfg.cavity, f.name))
    out["sweep.axis"] = cfg.sweep_axis
    if cfg.sweep_start is not None:
        out["sweep.start"] = _fmt_float(cfg.sweep_start)
    if cfg.sweep_stop is not None:
        out["sweep.stop"] = _fmt_float(cfg.sweep_stop)
    if cfg.sweep_points is not None:
        out["sweep.points"] = str(cfg.sweep_points)
    out["probe.detuning"] = _fmt_float(cfg.detuning)
    out["protocol.name"] = cfg.protocol
    out["protocol.alpha_re"] = _fmt_float(cfg.alpha.real)
    out["protocol.alpha_im"] = _fmt_float(cfg.alpha.imag)
    out["protocol.beta_re"] = _fmt_float(cfg.beta.real)
    out["protocol.beta_im"] = _fmt_float(cfg.beta.imag)
    out["protocol.probe"] = cfg.probe
    out["imperfection.mixing"] = _fmt_float(cfg.mixing)
    out["imperfection.tau_over_t2"] = _fmt_float(cfg.tau_over_t2)
    out["run.ideal"] = "true" if cfg.ideal else "false"
    if cfg.output is not None:
        out["output.path"] = cfg.output
    if cfg.seed is not None:
        out["sampling.seed"] = str(cfg.seed)
    if cfg.shots is not None:
        out["sampling.shots"] = str(cfg.shots)
    return out


def _float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite, got {raw!r}")
    return value


def _int(key: str, raw: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _bool(key: str, raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {raw!r}")


_STR_KEYS = {
    "run.mode": "mode",
    "sweep.axis": "sweep_axis",
    "protocol.name": "protocol",
    "protocol.probe": "probe",
    "output.path": "output",
}
_FLOAT_KEYS = {
    "sweep.start": "sweep_start",
    "sweep.stop": "sweep_stop",
    "probe.detuning": "detuning",
    "imperfection.mixing": "mixing",
    "imperfection.tau_over_t2": "tau_over_t2",
}
_INT_KEYS = {"sweep.points": "sweep_points", "sampling.seed": "seed", "sampling.shots": "shots"}
_COMPLEX_KEYS = ("protocol.alpha_re", "protocol.alpha_im", "protocol.beta_re", "protocol.beta_im")
_CAVITY_KEYS = {f"cavity.{f.name}": f.name for f in fields(CavityParams)}
KNOWN_KEYS = frozenset(
    list(_STR_KEYS) + list(_FLOAT_KEYS) + list(_INT_KEYS) + list(_COMPLEX_KEYS) + list(_CAVITY_KEYS) + ["run.ideal"]
)


def parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def from_mapping(pairs: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    unknown = set(pairs) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r}")
    kw: dict = {}
    for key, attr in _STR_KEYS.items():
        if key in pairs:
            kw[attr] = pairs[key]
    for key, attr in _FLOAT_KEYS.items():
        if key in pairs:
            kw[attr] = _float(key, pairs[key])
    for key, attr in _INT_KEYS.items():
        if key in pairs:
            kw[attr] = _int(key, pairs[key])
    if "run.ideal" in pairs:
        kw["ideal"] = _bool("run.ideal", pairs["run.ideal"])
    for name in ("alpha", "beta"):
        re_key, im_key = f"protocol.{name}_re", f"protocol.{name}_im"
        if re_key in pairs or im_key in pairs:
            old = getattr(base, name)
            re = _float(re_key, pairs[re_key]) if re_key in pairs else old.real
            im = _float(im_key, pairs[im_key]) if im_key in pairs else old.imag
            kw[name] = complex(re, im)
    cav = {attr: _float(key, pairs[key]) for key, attr in _CAVITY_KEYS.items() if key in pairs}
    if cav:
        try:
            kw["cavity"] = base.cavity.with_(**cav)
        except EBSError as exc:
            raise ConfigError(f"cavity: {exc}") from None
    return replace(base, **kw)


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    return from_mapping(parse_pairs(text), base)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), base)
