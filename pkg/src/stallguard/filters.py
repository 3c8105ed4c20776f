"""Adaptive transversal filter engine: infinite-precision LMS, fixed-point LMS, AN-LMS.

All step functions accept a :class:`FilterState` whose arrays may carry leading
batch axes, ``weights.shape == (..., M)``; the ensemble runner steps every
member of an ensemble at once this way. Scalars broadcast.

In fixed-point mode the weights are int64 tick counts. The filter output and the
error are formed in float64 ("extended precision"); only the correction terms
and the stored weights are quantized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fixedpoint import QFormat, quantize_ticks, sat_add_ticks
from .noise import NoiseGenerator

ALGORITHMS = ("lms_inf", "lms_fixed", "anlms")


@dataclass
class FilterState:
    weights: np.ndarray
    delay_line: np.ndarray  # newest sample first
    mu: float
    fmt: QFormat | None = None
    saturated: bool = False

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"step size must be positive, got {self.mu}")
        if self.weights.shape != self.delay_line.shape:
            raise ValueError("weights and delay line must have the same shape")
        if self.fmt is not None and self.weights.dtype != np.int64:
            raise ValueError("fixed-point weights must be int64 ticks")

    @property
    def taps(self) -> int:
        return self.weights.shape[-1]

    @property
    def real_weights(self) -> np.ndarray:
        if self.fmt is None:
            return self.weights
        return self.weights * self.fmt.lsb


def init_state(taps: int, mu: float, fmt: QFormat | None = None, init_weight: float = 0.01,
               batch: tuple = ()) -> FilterState:
    if taps < 1:
        raise ValueError(f"taps must be >= 1, got {taps}")
    shape = tuple(batch) + (taps,)
    delay = np.zeros(shape)
    if fmt is None:
        return FilterState(np.full(shape, float(init_weight)), delay, mu)
    ticks, sat = quantize_ticks(np.full(shape, float(init_weight)), fmt)
    return FilterState(ticks, delay, mu, fmt, bool(np.any(sat)))


@dataclass
class StepRecord:
    iteration: int
    error: np.ndarray | float
    estimate: np.ndarray | float
    updated_mask: np.ndarray
    mult_count: int


def push(state: FilterState, x) -> None:
    """Shift ``x`` into the delay line (newest first)."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input sample")
    state.delay_line[..., 1:] = state.delay_line[..., :-1]
    state.delay_line[..., 0] = x


def predict(state: FilterState):
    return np.sum(state.real_weights * state.delay_line, axis=-1)


def _begin(state, input, desired, quantize_input, quantize_error, fmt):
    if quantize_input and fmt is not None:
        input = quantize_ticks(input, fmt)[0] * fmt.lsb
    push(state, input)
    desired = np.asarray(desired, dtype=np.float64)
    if not np.all(np.isfinite(desired)):
        raise ValueError("non-finite desired sample")
    estimate = predict(state)
    error = desired - estimate
    if quantize_error and fmt is not None:
        error = quantize_ticks(error, fmt)[0] * fmt.lsb
    return estimate, error


def _apply_ticks(state: FilterState, delta: np.ndarray) -> None:
    state.weights, sat = sat_add_ticks(state.weights, delta, state.fmt)
    state.saturated = state.saturated or bool(np.any(sat))


def step_lms_infinite(state: FilterState, input, desired, iteration: int = 0) -> StepRecord:
    """w_j += mu * u(i-j) * e, in float64 with no quantization."""
    if state.fmt is not None:
        raise ValueError("infinite-precision step on a fixed-point state")
    estimate, error = _begin(state, input, desired, False, False, None)
    m = state.taps
    correction = state.delay_line * (state.mu * np.asarray(error))[..., None]
    state.weights = state.weights + correction
    return StepRecord(iteration, error, estimate, correction != 0, 2 * m)


def step_lms_finite(state: FilterState, input, desired, fmt: QFormat | None = None,
                    iteration: int = 0, quantize_input=False, quantize_error=False) -> StepRecord:
    """Fixed-point LMS: each tap's correction is rounded to the nearest LSB.

    With ``fmt=None`` the quantizer is bypassed and this is infinite-precision LMS.
    """
    if fmt is None:
        return step_lms_infinite(state, input, desired, iteration)
    if state.fmt != fmt:
        raise ValueError("state format does not match step format")
    estimate, error = _begin(state, input, desired, quantize_input, quantize_error, fmt)
    m = state.taps
    correction = state.delay_line * (state.mu * np.asarray(error))[..., None]
    c_ticks, sat = quantize_ticks(correction, fmt)
    state.saturated = state.saturated or bool(np.any(sat))
    _apply_ticks(state, c_ticks)
    return StepRecord(iteration, error, estimate, c_ticks != 0, 2 * m)


def anlms_net_ticks(mu_u, error, noise, fmt: QFormat):
    """Net AN-LMS tap update in ticks: Q(mu*u*(e + n)) - Q(mu*u*n).

    ``mu_u`` holds the per-tap products mu*u(i-j); ``error`` and ``noise`` broadcast.
    """
    t1, s1 = quantize_ticks(mu_u * (error + noise), fmt)
    t2, s2 = quantize_ticks(mu_u * noise, fmt)
    return t1 - t2, s1 | s2


def step_anlms(state: FilterState, input, desired, fmt: QFormat | None, noise,
               iteration: int = 0, quantize_input=False, quantize_error=False) -> StepRecord:
    """AN-LMS: w_j += Q(mu*u(i-j)*(e+n)) - Q(mu*u(i-j)*n), one noise sample n per step.

    ``noise`` is a :class:`NoiseGenerator` (one scalar drawn and shared by all
    taps) or already-drawn values, one per batch member.

    With ``fmt=None`` there is no quantizer and the two noise terms cancel
    exactly, so the weight update is the plain LMS correction mu*u*e. The noise
    sample is still consumed to keep the stream aligned with the fixed-point run.
    """
    if isinstance(noise, NoiseGenerator):
        noise = noise.sample()
    noise = np.asarray(noise, dtype=np.float64)
    if not np.all(np.isfinite(noise)):
        raise ValueError("non-finite noise sample")
    m = state.taps
    if fmt is None:
        rec = step_lms_infinite(state, input, desired, iteration)
        rec.mult_count = 3 * m
        return rec
    if state.fmt != fmt:
        raise ValueError("state format does not match step format")
    estimate, error = _begin(state, input, desired, quantize_input, quantize_error, fmt)
    mu_u = state.mu * state.delay_line
    net, sat = anlms_net_ticks(mu_u, np.asarray(error)[..., None], noise[..., None], fmt)
    state.saturated = state.saturated or bool(np.any(sat))
    _apply_ticks(state, net)
    return StepRecord(iteration, error, estimate, net != 0, 3 * m)


@dataclass
class Trajectory:
    """One run of one algorithm; row k of each array belongs to ``iterations[k]``."""

    algo: str
    iterations: np.ndarray
    errors: np.ndarray
    estimates: np.ndarray
    updated: np.ndarray  # (T, M) bool
    weights: np.ndarray | None  # (T, M) real weights after each step
    inputs: np.ndarray | None = None  # (T, M) delay line used at each step
    mult_counts: np.ndarray | None = None
    saturated: bool = False

    def __len__(self):
        return len(self.iterations)


@dataclass
class LearningCurve:
    algo: str
    iterations: np.ndarray
    mean_abs_error: np.ndarray
    ensemble_size: int


def run_filter(algo: str, warmup, inputs, desired, iterations, *, taps: int, mu: float,
               fmt: QFormat | None, init_weight: float = 0.01, noise=None,
               quantize_input=False, quantize_error=False, record_weights=True):
    """Run ``algo`` over aligned task data, batched along a leading ensemble axis.

    ``warmup`` is ``(E, W)``, ``inputs``/``desired`` are ``(E, T)``; ``noise`` is
    ``(E, T)`` for ``anlms`` and ignored otherwise. ``fmt=None`` disables
    quantization for every algorithm. Returns a batched :class:`Trajectory`
    whose arrays carry the ensemble axis first.
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; known: {ALGORITHMS}")
    inputs = np.atleast_2d(inputs)
    desired = np.atleast_2d(desired)
    warmup = np.atleast_2d(warmup)
    e_count, t_count = inputs.shape
    qfmt = None if algo == "lms_inf" else fmt
    state = init_state(taps, mu, qfmt, init_weight, batch=(e_count,))
    for k in range(warmup.shape[1]):
        push(state, warmup[:, k])
    errors = np.empty((e_count, t_count))
    estimates = np.empty((e_count, t_count))
    updated = np.empty((e_count, t_count, taps), dtype=bool)
    taps_in = np.empty((e_count, t_count, taps)) if record_weights else None
    weights = np.empty((e_count, t_count, taps)) if record_weights else None
    mults = np.empty(t_count, dtype=np.int64)
    flags = dict(quantize_input=quantize_input, quantize_error=quantize_error)
    for k in range(t_count):
        it = int(iterations[k])
        if algo == "lms_inf":
            rec = step_lms_infinite(state, inputs[:, k], desired[:, k], it)
        elif algo == "lms_fixed":
            rec = step_lms_finite(state, inputs[:, k], desired[:, k], qfmt, it, **flags)
        else:
            rec = step_anlms(state, inputs[:, k], desired[:, k], qfmt, np.asarray(noise)[:, k], it,
                             **flags)
        errors[:, k] = rec.error
        estimates[:, k] = rec.estimate
        updated[:, k] = rec.updated_mask
        mults[k] = rec.mult_count
        if record_weights:
            weights[:, k] = state.real_weights
            taps_in[:, k] = state.delay_line
    return Trajectory(algo, np.asarray(iterations), errors, estimates, updated, weights, taps_in,
                      mults, state.saturated)


def split_members(batched: Trajectory) -> list:
    out = []
    for i in range(batched.errors.shape[0]):
        out.append(Trajectory(
            batched.algo, batched.iterations, batched.errors[i], batched.estimates[i],
            batched.updated[i],
            None if batched.weights is None else batched.weights[i],
            None if batched.inputs is None else batched.inputs[i],
            batched.mult_counts, batched.saturated,
        ))
    return out


def learning_curve(batched: Trajectory) -> LearningCurve:
    # ordered reduction over the ensemble axis
    return LearningCurve(batched.algo, batched.iterations,
                         np.mean(np.abs(batched.errors), axis=0), batched.errors.shape[0])
