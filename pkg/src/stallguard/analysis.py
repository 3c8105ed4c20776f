"""Closed-form quantities and Monte Carlo verifiers for noise-assisted LMS updates.

Notation used throughout: for a tap with input ``u`` and step size ``mu``,
``l = lsb / (2 * mu * |u|)`` is the threshold error. Plain fixed-point LMS leaves
that tap untouched whenever ``|e| < l``. AN-LMS moves it by one tick towards
``sign(u * e)`` exactly when the (sign-adjusted) noise sample lands in one of
the windows ``[(2k - 1) * l - |e|, (2k - 1) * l)``, which repeat with period ``2l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filters import Trajectory, anlms_net_ticks
from .fixedpoint import QFormat

STALL_MIN_STEPS = 50


def threshold_error(fmt: QFormat, mu: float, u: float) -> float:
    if not mu > 0:
        raise ValueError("mu must be positive")
    if u == 0:
        raise ValueError("no finite threshold error for a zero input")
    return fmt.lsb / (2.0 * mu * abs(u))


@dataclass(frozen=True)
class UpdateGeometry:
    l: float
    e: float

    def __post_init__(self):
        if not self.l > 0:
            raise ValueError("l must be positive")
        if self.e < 0:
            raise ValueError("e is an error magnitude and must be >= 0")

    @classmethod
    def from_tap(cls, fmt: QFormat, mu: float, u: float, e: float) -> UpdateGeometry:
        return cls(threshold_error(fmt, mu, u), abs(e))

    @property
    def period(self) -> float:
        return 2.0 * self.l

    @property
    def in_regime(self) -> bool:
        return 0 < self.e < self.l


def classify_update(n, e, u, mu, fmt: QFormat):
    """Net AN-LMS tick update predicted from the noise-window geometry alone.

    Vectorised over ``n``, ``e`` and ``u``. Requires ``0 < mu*|u*e| < lsb/2``.
    """
    n, e, u = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (n, e, u)))
    drive = mu * np.abs(u * e)
    if np.any(drive <= 0) or np.any(drive >= fmt.lsb / 2):
        raise ValueError("classify_update needs 0 < mu*|u*e| < lsb/2")
    l = fmt.lsb / (2.0 * mu * np.abs(u))
    ea = np.abs(e)
    nc = np.sign(e) * n  # reflect to the e > 0 case
    k0 = np.floor((nc + l) / (2.0 * l)) + 1.0
    hit = np.zeros(n.shape, dtype=bool)
    for k in (k0 - 1.0, k0, k0 + 1.0):
        upper = (2.0 * k - 1.0) * l
        hit |= (upper - ea <= nc) & (nc < upper)
    direction = (np.sign(u) * np.sign(e)).astype(np.int64)
    out = np.where(hit, direction, 0)
    return out if out.ndim else int(out)


def two_term_update(n, e, u, mu, fmt: QFormat):
    """Net update in ticks from direct quantization: Q(mu*u*(e+n)) - Q(mu*u*n)."""
    net, _ = anlms_net_ticks(mu * np.asarray(u, dtype=np.float64), np.asarray(e, dtype=np.float64),
                             np.asarray(n, dtype=np.float64), fmt)
    return net if net.ndim else int(net)


def update_probability_uniform(geom: UpdateGeometry) -> float:
    """Update probability e/(2l) under uniform noise covering whole periods."""
    if geom.e > geom.l:
        raise ValueError("e exceeds l: plain LMS already updates this tap")
    return geom.e / (2.0 * geom.l)


_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


def _gauss_measure(a: float, b: float) -> float:
    """P(a <= Z < b) for standard normal Z, without cancellation in the tails."""
    if a >= 0:
        return normal_sf(a) - normal_sf(b)
    if b <= 0:
        return normal_cdf(b) - normal_cdf(a)
    return 1.0 - normal_cdf(a) - normal_sf(b)


def update_probability_gaussian(geom: UpdateGeometry, sigma: float, tol: float = 1e-14) -> float:
    """Gaussian measure of the update windows, summed outward in mirror pairs.

    Windows k and 1-k sit at the same distance from zero, at ``+-(2k - 1) * l``;
    they are added as a pair, outward from zero, until the pair increment and the
    Gaussian mass beyond the last window both fall below ``tol``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not geom.in_regime:
        raise ValueError("need 0 < e < l")
    l, e = geom.l, geom.e
    terms = []
    j = 1
    while True:
        hi = (2 * j - 1) * l
        lo = hi - e
        inc = _gauss_measure(lo / sigma, hi / sigma) + _gauss_measure((-hi - e) / sigma, -hi / sigma)
        terms.append(inc)
        tail = 2.0 * normal_sf(((2 * j + 1) * l - e) / sigma)
        if inc < tol and tail < tol:
            break
        j += 1
    return min(max(math.fsum(terms), 0.0), 1.0)


def mc_update_frequency(geom: UpdateGeometry, sigma: float, samples: int, seed: int = 0,
                        fmt: QFormat | None = None, u: float = 0.5):
    """Monte Carlo frequency of a nonzero direct two-term update under Gaussian noise.

    The geometry is realised on a concrete tap (``fmt``, ``u`` and the implied
    ``mu``). Returns ``(frequency, standard_error)``.
    """
    from .noise import NoiseGenerator, NoiseSpec

    fmt = fmt or QFormat()
    mu = fmt.lsb / (2.0 * geom.l * u)
    n = NoiseGenerator(NoiseSpec.gaussian(sigma, seed)).sample_many(samples)
    hits = two_term_update(n, geom.e, u, mu, fmt) != 0
    p = hits.mean()
    return float(p), float(math.sqrt(max(p * (1 - p), 1.0 / samples) / samples))


def correlation_matrix(samples, taps: int) -> np.ndarray:
    """Time average of u(i) u(i)^T over every full ``taps``-long input window."""
    u = np.asarray(getattr(samples, "samples", samples), dtype=np.float64)
    if len(u) < taps:
        raise ValueError(f"need at least {taps} samples to form an input vector")
    # rows are newest-first windows [u(i), ..., u(i-M+1)]
    windows = np.lib.stride_tricks.sliding_window_view(u, taps)[:, ::-1]
    return windows.T @ windows / windows.shape[0]


def power_iteration(matrix, tol: float = 1e-10, max_iter: int = 10_000):
    """Dominant eigenvalue of a symmetric PSD matrix. Returns ``(lam, vec, iterations)``."""
    a = np.asarray(matrix, dtype=np.float64)
    m = a.shape[0]
    v = np.ones(m) + np.arange(m) / m
    v /= np.linalg.norm(v)
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0, v, it
        lam_new = float(v @ w)
        v = w / norm
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new, v, it
        lam = lam_new
    return lam, v, max_iter


def step_size_bound(samples, taps: int):
    """Mean-square step size limits ``(2/tr R, 2/lambda_max)`` from a sample sequence."""
    r = correlation_matrix(samples, taps)
    trace = float(np.trace(r))
    if trace == 0:
        raise ValueError("all-zero input: correlation matrix is degenerate")
    lam, _, _ = power_iteration(r)
    return 2.0 / trace, 2.0 / lam


def average_time_constant(r, mu: float) -> float:
    r = np.asarray(r, dtype=np.float64)
    if not mu > 0:
        raise ValueError("mu must be positive")
    lam_av = float(np.trace(r)) / r.shape[0]
    if lam_av == 0:
        raise ValueError("average eigenvalue is zero")
    return 1.0 / (2.0 * mu * lam_av)


@dataclass
class StallReport:
    stalled: bool
    stall_iteration: int | None = None
    plateau_error: float | None = None

    def __str__(self):
        if not self.stalled:
            return "stalled: no\n"
        return (f"stalled: yes\nstall_iteration: {self.stall_iteration}\n"
                f"plateau_error: {self.plateau_error:.12g}\n")


def detect_stall(traj: Trajectory, min_steps: int = STALL_MIN_STEPS) -> StallReport:
    """Stalled iff no tap moves from some step s to the end, with >= ``min_steps`` steps from s on."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    moved = np.asarray(traj.updated).reshape(len(traj), -1).any(axis=1)
    idx = np.nonzero(moved)[0]
    s = int(idx[-1]) + 1 if idx.size else 0
    if len(traj) - s < min_steps:
        return StallReport(False)
    plateau = float(np.mean(np.abs(traj.errors[s:])))
    return StallReport(True, int(traj.iterations[s]), plateau)


def running_threshold(traj: Trajectory, fmt: QFormat, mu: float) -> np.ndarray:
    """Per-step error level below which every tap of plain fixed-point LMS rounds to zero."""
    if traj.inputs is None:
        raise ValueError("trajectory was recorded without inputs")
    peak = np.max(np.abs(traj.inputs), axis=-1)
    with np.errstate(divide="ignore"):
        return fmt.lsb / (2.0 * mu * peak)


@dataclass
class Theorem1Result:
    trials: int
    mismatches: int
    wrong_sign: int
    oversized: int
    updates: int

    @property
    def passed(self) -> bool:
        return self.mismatches == 0 and self.wrong_sign == 0 and self.oversized == 0


def random_regime_tuples(trials: int, seed: int, fmt: QFormat):
    """Random (mu, u, e, n) with 0 < mu*|u*e| < lsb/2; noise scale up to a few periods."""
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, 7]))
    mu = 10.0 ** rng.uniform(-3, -1, trials)
    u = rng.choice([-1.0, 1.0], trials) * rng.uniform(0.05, 1.0, trials)
    l = fmt.lsb / (2.0 * mu * np.abs(u))
    # open interval (0, 1) for the error fraction
    frac = rng.uniform(0, 1, trials)
    frac = np.where(frac == 0, 0.5, frac)
    e = rng.choice([-1.0, 1.0], trials) * frac * l
    scale = rng.uniform(0.1, 6.0, trials) * l
    n = np.where(rng.random(trials) < 0.5, rng.normal(0, 1, trials) * scale,
                 rng.uniform(-1, 1, trials) * scale)
    return mu, u, e, n


def verify_theorem1(trials: int, seed: int = 0, fmt: QFormat | None = None,
                    chunk: int = 250_000) -> Theorem1Result:
    """Interval classifier vs direct two-term quantization on random in-regime tuples."""
    fmt = fmt or QFormat()
    mismatches = wrong = big = ups = 0
    done = 0
    part = 0
    while done < trials:
        m = min(chunk, trials - done)
        mu, u, e, n = random_regime_tuples(m, seed ^ (part << 32), fmt)
        direct = np.asarray(anlms_net_ticks(mu * u, e, n, fmt)[0])
        predicted = classify_update(n, e, u, mu, fmt)
        mismatches += int(np.count_nonzero(direct != predicted))
        nz = direct != 0
        ups += int(np.count_nonzero(nz))
        big += int(np.count_nonzero(np.abs(direct) > 1))
        wrong += int(np.count_nonzero(nz & (np.sign(direct) != np.sign(u * e))))
        done += m
        part += 1
    return Theorem1Result(trials, mismatches, wrong, big, ups)


@dataclass
class Theorem2Result:
    trials: int
    mean_update: float
    expected: float
    stderr: float

    @property
    def z(self) -> float:
        return abs(self.mean_update - self.expected) / self.stderr

    @property
    def passed(self) -> bool:
        return self.z <= 3.0


def verify_theorem2(trials: int, seed: int = 0, fmt: QFormat | None = None, mu: float = 0.01,
                    u: float = 0.5, e: float = 0.01, periods: int = 10) -> Theorem2Result:
    """Mean net update under uniform noise spanning ``periods`` whole periods vs mu*u*e."""
    from .noise import NoiseGenerator, NoiseSpec

    fmt = fmt or QFormat()
    geom = UpdateGeometry.from_tap(fmt, mu, u, e)
    if not geom.in_regime:
        raise ValueError("(mu, u, e) outside 0 < mu*|u*e| < lsb/2")
    half_width = periods * geom.period / 2.0
    n = NoiseGenerator(NoiseSpec.uniform(half_width, seed)).sample_many(trials)
    net = np.asarray(two_term_update(n, e, u, mu, fmt)) * fmt.lsb
    mean = float(net.mean())
    stderr = float(net.std(ddof=1) / math.sqrt(trials))
    if stderr == 0:
        stderr = fmt.lsb / math.sqrt(trials)
    return Theorem2Result(trials, mean, mu * u * e, stderr)
