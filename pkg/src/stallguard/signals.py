"""AR input processes and the (optional) channel in front of the filter."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseGenerator, NoiseSpec

# noise stream ids, so one seed can drive innovations and channel noise independently
INNOVATION_STREAM = 1
CHANNEL_STREAM = 2

FIG2_INITIAL = (0.2, 0.3, 0.28, 0.26, 0.4, 0.24, 0.46, 0.6, 0.56, 0.48)


@dataclass(frozen=True)
class ArModel:
    """u(i) = sum_j coeffs[j-1] * u(i-j) + w(i), with w white Gaussian."""

    coeffs: tuple
    innovation_variance: float = 0.0
    initial_samples: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "initial_samples", tuple(float(c) for c in self.initial_samples))
        if len(self.coeffs) < 1:
            raise ValueError("AR model needs at least one coefficient")
        if len(self.initial_samples) != len(self.coeffs):
            raise ValueError(
                f"need {len(self.coeffs)} initial samples, got {len(self.initial_samples)}"
            )
        if not self.innovation_variance >= 0:
            raise ValueError("innovation_variance must be >= 0")

    @property
    def order(self) -> int:
        return len(self.coeffs)


@dataclass
class SampleSequence:
    samples: np.ndarray
    origin: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError(f"non-finite samples in sequence ({self.origin})")

    def __len__(self):
        return len(self.samples)


def _fig2_ar10() -> ArModel:
    return ArModel((0.1,) * 10, 0.0, FIG2_INITIAL)


def _eq21_ar11() -> ArModel:
    # Eleven lags of 0.1 sum to 1.1 and the recursion diverges (dominant root ~1.016);
    # equal weights 1/11 keep the unit lag-sum of the ten-lag model.
    # Initial samples: the ten-lag seed values followed by their next AR value.
    return ArModel((1.0 / 11,) * 11, 0.004, FIG2_INITIAL + (0.378,))


def _eq21_ar11_literal() -> ArModel:
    return ArModel((0.1,) * 11, 0.004, FIG2_INITIAL + (0.378,))


PRESETS = {
    "fig2_ar10": _fig2_ar10,
    "eq21_ar11": _eq21_ar11,
    "eq21_ar11_literal": _eq21_ar11_literal,
}


def preset(name: str) -> ArModel:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown signal preset {name!r}; known: {sorted(PRESETS)}") from None


def generate_ar(model: ArModel, n: int, seed: int = 0) -> SampleSequence:
    """Run the AR recursion for ``n`` samples; the first ``order`` are the seed values.

    Innovations come from a Gaussian :class:`NoiseGenerator` keyed by ``seed`` on
    the innovation stream and are not drawn at all when the variance is zero.
    """
    p = model.order
    if n < p:
        raise ValueError(f"n={n} shorter than model order {p}")
    u = np.zeros(n)
    u[:p] = model.initial_samples
    if model.innovation_variance > 0:
        spec = NoiseSpec.gaussian(float(np.sqrt(model.innovation_variance)), seed)
        w = NoiseGenerator(spec, stream=INNOVATION_STREAM).sample_many(n - p)
    else:
        w = np.zeros(n - p)
    a = np.asarray(model.coeffs)
    for i in range(p, n):
        # a[0] multiplies u(i-1): reverse the window
        u[i] = float(np.dot(a, u[i - p:i][::-1])) + w[i - p]
    return SampleSequence(u, origin=f"AR{p}(var={model.innovation_variance}, seed={seed})")


def apply_channel(seq: SampleSequence, impulse, noise: NoiseSpec | None = None) -> SampleSequence:
    """Causal FIR channel, output truncated to the input length, plus additive noise."""
    h = np.asarray(impulse, dtype=np.float64)
    if h.size == 0:
        raise ValueError("channel impulse response must be non-empty")
    y = np.convolve(seq.samples, h)[: len(seq)]
    if noise is not None and noise.kind != "none":
        y = y + NoiseGenerator(noise, stream=CHANNEL_STREAM).sample_many(len(seq))
    return SampleSequence(y, origin=f"channel({seq.origin})")


@dataclass
class TaskData:
    """Aligned filter inputs and desired responses; step k adapts on ``(inputs[k], desired[k])``."""

    warmup: np.ndarray
    inputs: np.ndarray
    desired: np.ndarray
    iterations: np.ndarray = field(default=None)


def make_task(seq: SampleSequence, taps: int, task: str = "prediction",
              desired_seq: SampleSequence | None = None) -> TaskData:
    """Lay out a sequence as a one-step prediction or system identification task.

    Iterations are 1-based sample indices; adaptation starts at sample ``taps + 1``.
    For prediction the step at sample i feeds u(i-1) and targets d(i) = u(i).
    For system identification it feeds x(i) and targets ``desired_seq[i]``.
    """
    u = seq.samples
    n = len(u)
    if n <= taps:
        raise ValueError(f"need more than {taps} samples, got {n}")
    iterations = np.arange(taps + 1, n + 1)
    if task == "prediction":
        return TaskData(u[: taps - 1], u[taps - 1: n - 1], u[taps:], iterations)
    if task == "system_id":
        if desired_seq is None or len(desired_seq) != n:
            raise ValueError("system_id needs a desired sequence of matching length")
        return TaskData(u[:taps], u[taps:], desired_seq.samples[taps:], iterations)
    raise ValueError(f"task must be 'prediction' or 'system_id', got {task!r}")
