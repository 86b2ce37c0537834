"""Experiment configuration: flat ``key = value`` files and shipped presets.

Example (the ``rand-10s`` preset)::

    signal.type = random
    signal.n = 128
    signal.sparsity = 4
    signal.amplitude_min = 1
    signal.amplitude_max = 2
    measurement_factor = 10
    kinds = shifted-entropy
    baselines = pseudo-inverse
    seeds = 0-49
    solver.max_sweeps = 2000

Blank lines and ``#`` comments are ignored.  ``seeds`` accepts comma
separated integers and inclusive ranges ``a-b``.  Unknown keys are errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .functionals import FunctionalKind
from .solver import SolverConfig

PRESETS = ("cusp-2s", "cusp-10s", "rand-6s", "rand-10s")
BASELINES = ("pseudo-inverse", "l0-oracle")


class ConfigError(ValueError):
    def __init__(self, message, line=None, key=None, source=None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"'{key}'")
        super().__init__((": ".join([", ".join(where), message])) if where else message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class SignalConfig:
    type: str = "random"  # random | cusp
    n: int = 128
    sparsity: int = 4
    amplitude_min: float = 1.0
    amplitude_max: float = 2.0
    # cusp only: scale of sqrt(|t - 0.37|)
    amplitude: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    signal: SignalConfig = field(default_factory=SignalConfig)
    measurement_factor: float = 10.0
    transform: str = ""  # empty: identity for random, dct for cusp
    kinds: tuple[FunctionalKind, ...] = (FunctionalKind.SHIFTED_ENTROPY,)
    baselines: tuple[str, ...] = ("pseudo-inverse",)
    seeds: tuple[int, ...] = (0,)
    solver: SolverConfig = field(default_factory=SolverConfig)
    support_eps: float = 1e-3
    output_dir: str = "runs"
    name: str = ""

    @property
    def n(self) -> int:
        return self.signal.n

    @property
    def sparsity(self) -> int:
        return self.signal.sparsity

    @property
    def m(self) -> int:
        return int(math.floor(self.measurement_factor * self.signal.sparsity + 0.5))

    @property
    def resolved_transform(self) -> str:
        if self.transform:
            return self.transform
        return "dct" if self.signal.type == "cusp" else "identity"

    def validate(self) -> "ExperimentConfig":
        sig = self.signal
        if sig.type not in ("random", "cusp"):
            raise ConfigError(f"unknown signal type {sig.type!r}", key="signal.type")
        if sig.n < 1:
            raise ConfigError("must be >= 1", key="signal.n")
        if not 1 <= sig.sparsity <= sig.n:
            raise ConfigError("need 1 <= sparsity <= n", key="signal.sparsity")
        if sig.type == "random" and not 0 < sig.amplitude_min <= sig.amplitude_max:
            raise ConfigError("need 0 < amplitude_min <= amplitude_max", key="signal.amplitude_min")
        if self.measurement_factor * sig.sparsity < 1:
            raise ConfigError("measurement_factor * sparsity must be >= 1", key="measurement_factor")
        if self.m > sig.n:
            raise ConfigError(f"resolved M={self.m} exceeds N={sig.n}", key="measurement_factor")
        if self.resolved_transform not in ("identity", "dct"):
            raise ConfigError(f"unknown transform {self.transform!r}", key="transform")
        for b in self.baselines:
            if b not in BASELINES:
                raise ConfigError(f"unknown baseline {b!r}", key="baselines")
        if not self.seeds:
            raise ConfigError("at least one seed is required", key="seeds")
        if not self.kinds and not self.baselines:
            raise ConfigError("nothing to run: no kinds and no baselines", key="kinds")
        return self

    def to_pairs(self) -> list[tuple[str, str]]:
        """Flat key/value echo; parsing it back gives an equal config."""
        sig = self.signal
        s = self.solver
        pairs = [
            ("name", self.name),
            ("signal.type", sig.type),
            ("signal.n", str(sig.n)),
            ("signal.sparsity", str(sig.sparsity)),
            ("signal.amplitude_min", repr(sig.amplitude_min)),
            ("signal.amplitude_max", repr(sig.amplitude_max)),
            ("signal.amplitude", repr(sig.amplitude)),
            ("measurement_factor", repr(self.measurement_factor)),
            ("transform", self.transform),
            ("kinds", ", ".join(k.value for k in self.kinds)),
            ("baselines", ", ".join(self.baselines)),
            ("seeds", ", ".join(str(x) for x in self.seeds)),
            ("solver.max_sweeps", str(s.max_sweeps)),
            ("solver.feas_tol", repr(s.feas_tol)),
            ("solver.delta_tol", repr(s.delta_tol)),
            ("solver.newton_tol", repr(s.newton_tol)),
            ("solver.newton_cap", str(s.newton_cap)),
            ("support_eps", repr(self.support_eps)),
            ("output_dir", self.output_dir),
        ]
        return pairs

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_pairs())


def parse_seeds(text: str) -> tuple[int, ...]:
    seeds = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    for s in seeds:
        if not 0 <= s < 2**64:
            raise ValueError(f"seed {s} is not an unsigned 64-bit integer")
    return tuple(seeds)


def _split_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


_SIGNAL_FIELDS = {f.name: f.type for f in fields(SignalConfig)}
_SOLVER_KEYS = {
    "max_sweeps": int,
    "feas_tol": float,
    "delta_tol": float,
    "newton_tol": float,
    "newton_cap": int,
}


def _apply(cfg: ExperimentConfig, key: str, raw: str) -> ExperimentConfig:
    value = raw.strip()
    if key.startswith("signal."):
        name = key[len("signal."):]
        if name not in _SIGNAL_FIELDS:
            raise KeyError(key)
        conv = {"int": int, "float": float, "str": str}[_SIGNAL_FIELDS[name]]
        return replace(cfg, signal=replace(cfg.signal, **{name: conv(value)}))
    if key.startswith("solver."):
        name = key[len("solver."):]
        if name not in _SOLVER_KEYS:
            raise KeyError(key)
        return replace(cfg, solver=replace(cfg.solver, **{name: _SOLVER_KEYS[name](value)}))
    if key == "measurement_factor":
        return replace(cfg, measurement_factor=float(value))
    if key == "transform":
        return replace(cfg, transform=value.lower())
    if key == "kinds":
        return replace(cfg, kinds=tuple(FunctionalKind.parse(k) for k in _split_list(value)))
    if key == "baselines":
        return replace(cfg, baselines=_split_list(value))
    if key == "seeds":
        return replace(cfg, seeds=parse_seeds(value))
    if key == "support_eps":
        return replace(cfg, support_eps=float(value))
    if key == "output_dir":
        return replace(cfg, output_dir=value)
    if key == "name":
        return replace(cfg, name=value)
    raise KeyError(key)


def apply_overrides(cfg: ExperimentConfig, pairs, source="override") -> ExperimentConfig:
    """Apply ``(key, value)`` pairs, reporting the offending key on failure."""
    for lineno, key, value in pairs:
        try:
            cfg = _apply(cfg, key, value)
        except KeyError:
            raise ConfigError("unknown key", line=lineno, key=key, source=source) from None
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno, key=key, source=source) from None
    return cfg


def parse_pairs(text: str, source="<config>"):
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno, source=source)
        key, value = line.split("=", 1)
        pairs.append((lineno, key.strip(), value.strip()))
    return pairs


def parse_config(text: str, source="<config>", base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = apply_overrides(base or ExperimentConfig(), parse_pairs(text, source), source)
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{exc}", source=source) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=path)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("entropic_cs.presets").joinpath(f"{name}.cfg").read_text()


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name), source=f"preset {name}")
