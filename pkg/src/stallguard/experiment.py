"""Experiment configuration (flat dotted key/value files) and the ensemble runner.

Config grammar: one ``key = value`` per line; ``#`` starts a comment; blank lines
are ignored; list values are comma-separated. Recognised keys::

    signal.preset            fig2_ar10 | eq21_ar11 | eq21_ar11_literal
    signal.coeffs            explicit AR coefficients (instead of a preset)
    signal.variance          innovation variance
    signal.initial           initial samples, one per coefficient
    channel.impulse          FIR impulse response (default 1)
    channel.noise.kind       none | uniform | gaussian
    channel.noise.sigma / channel.noise.half_width
    task                     prediction | system_id
    algo                     list drawn from lms_inf, lms_fixed, anlms
    mu, taps, init_weight
    quantize                 true | false (false: no quantizer anywhere)
    frac_bits, int_bits
    quantize_error, quantize_input
    noise.kind               none | uniform | gaussian  (AN-LMS injected noise)
    noise.sigma / noise.half_width
    noise.seed               defaults to ``seed``
    iterations               number of signal samples
    ensemble_size
    seed                     master seed
    out                      output directory
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .filters import ALGORITHMS, LearningCurve, Trajectory, learning_curve, run_filter
from .fixedpoint import QFormat
from .noise import NoiseGenerator, NoiseSpec
from .signals import PRESETS, ArModel, apply_channel, generate_ar, make_task, preset


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ExperimentConfig:
    signal_preset: str | None = "fig2_ar10"
    signal_coeffs: tuple | None = None
    signal_variance: float = 0.0
    signal_initial: tuple | None = None
    channel_impulse: tuple = (1.0,)
    channel_noise: NoiseSpec = field(default_factory=NoiseSpec)
    task: str = "prediction"
    algorithms: tuple = ("lms_inf", "lms_fixed", "anlms")
    mu: float = 0.01
    taps: int = 10
    init_weight: float = 0.01
    quantize: bool = True
    frac_bits: int = 12
    int_bits: int = 4
    quantize_error: bool = False
    quantize_input: bool = False
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec.gaussian(0.05, 0))
    iterations: int = 1000
    ensemble_size: int = 1
    seed: int = 0
    out: str = "out"

    @property
    def fmt(self) -> QFormat | None:
        return QFormat(self.frac_bits, self.int_bits) if self.quantize else None

    def ar_model(self) -> ArModel:
        if self.signal_coeffs is not None:
            return ArModel(self.signal_coeffs, self.signal_variance, self.signal_initial or ())
        return preset(self.signal_preset)

    def validate(self) -> ExperimentConfig:
        if self.signal_coeffs is None and self.signal_preset not in PRESETS:
            raise ConfigError("signal.preset", f"unknown preset {self.signal_preset!r}")
        if self.signal_coeffs is not None:
            try:
                self.ar_model()
            except ValueError as exc:
                raise ConfigError("signal.coeffs", str(exc)) from None
        if self.task not in ("prediction", "system_id"):
            raise ConfigError("task", f"must be prediction or system_id, got {self.task!r}")
        if not self.algorithms:
            raise ConfigError("algo", "no algorithms listed")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError("algo", f"unknown algorithm {a!r}")
        if not self.mu > 0:
            raise ConfigError("mu", "must be positive")
        if self.taps < 1:
            raise ConfigError("taps", "must be >= 1")
        if self.iterations <= self.taps:
            raise ConfigError("iterations", "must exceed taps")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size", "must be >= 1")
        if len(self.channel_impulse) == 0:
            raise ConfigError("channel.impulse", "must be non-empty")
        if self.quantize:
            try:
                QFormat(self.frac_bits, self.int_bits)
            except ValueError as exc:
                raise ConfigError("frac_bits", str(exc)) from None
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must fit in 64 unsigned bits")
        return self

    def digest(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _noise_from(entries, prefix, default_seed):
    kind = entries.pop(f"{prefix}.kind", None)
    sigma = entries.pop(f"{prefix}.sigma", None)
    half = entries.pop(f"{prefix}.half_width", None)
    seed = entries.pop(f"{prefix}.seed", None)
    if kind is None and sigma is None and half is None and seed is None:
        return None
    kind = kind or ("uniform" if half is not None else "gaussian")
    scale = {"gaussian": sigma, "uniform": half}.get(kind)
    try:
        if kind != "none" and scale is None:
            key = "sigma" if kind == "gaussian" else "half_width"
            raise ConfigError(f"{prefix}.{key}", f"required for {kind} noise")
        return NoiseSpec(kind, float(scale or 0.0), int(seed) if seed is not None else default_seed)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{prefix}.kind", str(exc)) from None


_SCALARS = {
    "signal.preset": ("signal_preset", str),
    "signal.coeffs": ("signal_coeffs", _floats),
    "signal.variance": ("signal_variance", float),
    "signal.initial": ("signal_initial", _floats),
    "channel.impulse": ("channel_impulse", _floats),
    "task": ("task", str),
    "algo": ("algorithms", lambda t: tuple(a.strip() for a in t.split(",") if a.strip())),
    "mu": ("mu", float),
    "taps": ("taps", int),
    "init_weight": ("init_weight", float),
    "quantize": ("quantize", _bool),
    "frac_bits": ("frac_bits", int),
    "int_bits": ("int_bits", int),
    "quantize_error": ("quantize_error", _bool),
    "quantize_input": ("quantize_input", _bool),
    "iterations": ("iterations", int),
    "ensemble_size": ("ensemble_size", int),
    "seed": ("seed", int),
    "out": ("out", str),
}


def parse_config(text: str, seed_override: int | None = None) -> ExperimentConfig:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key] = value
    kwargs = {}
    for key in list(entries):
        if key in _SCALARS:
            name, conv = _SCALARS[key]
            try:
                kwargs[name] = conv(entries.pop(key))
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
    if seed_override is not None:
        kwargs["seed"] = seed_override
    seed = kwargs.get("seed", 0)
    if "signal_coeffs" in kwargs:
        kwargs["signal_preset"] = None
    noise = _noise_from(entries, "noise", seed)
    if noise is not None:
        kwargs["noise"] = noise
    else:
        kwargs["noise"] = NoiseSpec.gaussian(0.05, seed)
    chan = _noise_from(entries, "channel.noise", seed)
    if chan is not None:
        kwargs["channel_noise"] = chan
    if entries:
        key = sorted(entries)[0]
        raise ConfigError(key, "unknown key")
    return ExperimentConfig(**kwargs).validate()


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), seed_override)


@dataclass
class AlgorithmResult:
    trajectory: Trajectory  # batched: leading ensemble axis
    curve: LearningCurve


def member_task(config: ExperimentConfig, k: int):
    """Input/desired data for ensemble member ``k`` (signal seed = seed xor k)."""
    model = config.ar_model()
    seq = generate_ar(model, config.iterations, seed=config.seed ^ k)
    chan_noise = config.channel_noise.derived(k) if config.channel_noise.kind != "none" else None
    through = apply_channel(seq, config.channel_impulse, chan_noise)
    if config.task == "prediction":
        return make_task(through, config.taps, "prediction")
    return make_task(seq, config.taps, "system_id", desired_seq=through)


def run_experiment(config: ExperimentConfig, record_weights: bool = True) -> dict:
    """Run every configured algorithm on identical per-member input/desired data.

    Returns ``{algo: AlgorithmResult}``. AN-LMS member ``k`` draws its noise from
    ``noise.seed xor k``.
    """
    config.validate()
    tasks = [member_task(config, k) for k in range(config.ensemble_size)]
    warm = np.stack([t.warmup for t in tasks])
    inputs = np.stack([t.inputs for t in tasks])
    desired = np.stack([t.desired for t in tasks])
    iterations = tasks[0].iterations
    results = {}
    for algo in config.algorithms:
        noise = None
        if algo == "anlms":
            noise = np.stack([
                NoiseGenerator(config.noise.derived(k)).sample_many(inputs.shape[1])
                for k in range(config.ensemble_size)
            ])
        traj = run_filter(
            algo, warm, inputs, desired, iterations, taps=config.taps, mu=config.mu,
            fmt=config.fmt, init_weight=config.init_weight, noise=noise,
            quantize_input=config.quantize_input, quantize_error=config.quantize_error,
            record_weights=record_weights,
        )
        results[algo] = AlgorithmResult(traj, learning_curve(traj))
    return results


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, **changes).validate()
