"""Deterministic scenario generators for benchmarking the detector.

A :class:`ScenarioSpec` fully describes a synthetic series: a change-pattern
kind, the series length, the jump magnitude, a noise process, an optional
mean drift, and a seed.  Generation is bit-for-bit reproducible.

Seed splitting
--------------
All randomness derives from ``numpy.random.SeedSequence``.  The change sizes
of the ``rand1`` pattern are drawn from ``SeedSequence([seed])`` so the
pattern is a fixed property of the scenario, while the noise (and drift) of
replicate ``r`` comes from the child ``SeedSequence([seed, 1 + r])`` —
replicates are disjoint streams and can be generated in any order or in
parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidParameterError

SCENARIO_KINDS = ("none", "up", "updown", "rand1")

#: number of changes in the ``rand1`` pattern
RAND1_CHANGES = 19

#: warm-up samples discarded when starting an AR(2) from a zero state
AR2_BURN_IN = 1000


@dataclass(frozen=True)
class Ar1Noise:
    phi: float
    sigma_nu: float

    def __post_init__(self):
        if not 0.0 <= self.phi < 1.0:
            raise InvalidParameterError(f"phi must lie in [0, 1), got {self.phi!r}")
        if self.sigma_nu < 0.0:
            raise InvalidParameterError("sigma_nu must be >= 0")


@dataclass(frozen=True)
class Ar2Noise:
    phi1: float
    phi2: float
    sigma_nu: float

    def __post_init__(self):
        if self.sigma_nu < 0.0:
            raise InvalidParameterError("sigma_nu must be >= 0")
        _check_ar2_stationary(self.phi1, self.phi2)


@dataclass(frozen=True)
class IidNoise:
    sigma: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise InvalidParameterError("sigma must be >= 0")


@dataclass(frozen=True)
class RandomWalkDrift:
    sigma_eta: float

    def __post_init__(self):
        if self.sigma_eta < 0.0:
            raise InvalidParameterError("sigma_eta must be >= 0")


@dataclass(frozen=True)
class SinusoidalDrift:
    amplitude: float
    frequency: float

    def __post_init__(self):
        if self.frequency < 0.0:
            raise InvalidParameterError("frequency must be >= 0")


@dataclass(frozen=True)
class NoDrift:
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    """Complete description of one synthetic benchmark scenario."""

    kind: str
    n: int
    change_size: float
    noise: Ar1Noise | Ar2Noise | IidNoise
    drift: RandomWalkDrift | SinusoidalDrift | NoDrift
    seed: int

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise InvalidParameterError(
                f"unknown kind {self.kind!r}; expected one of {SCENARIO_KINDS}"
            )
        if self.n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {self.n}")
        if self.kind == "up" and self.n < 2:
            raise InvalidParameterError("kind 'up' needs n >= 2")
        if self.kind == "updown" and self.n < 4:
            raise InvalidParameterError("kind 'updown' needs n >= 4")
        if self.kind == "rand1" and self.n < 20:
            raise InvalidParameterError("kind 'rand1' needs n >= 20")
        if not math.isfinite(self.change_size):
            raise InvalidParameterError("change_size must be finite")


@dataclass(frozen=True)
class SimulatedSeries:
    """One generated replicate: observations, true mean, true changes."""

    y: np.ndarray
    mu_true: np.ndarray
    changepoints_true: list[int]


def _check_ar2_stationary(phi1: float, phi2: float) -> None:
    if not (abs(phi2) < 1.0 and phi1 + phi2 < 1.0 and phi2 - phi1 < 1.0):
        raise InvalidParameterError(
            f"AR(2) coefficients ({phi1}, {phi2}) are outside the stationary region"
        )


def scenario_changepoints(kind: str, n: int) -> list[int]:
    """True change positions of a pattern kind (new regime starts there)."""
    if kind == "none":
        return []
    if kind == "up":
        return [n // 2]
    if kind == "updown":
        return [i * n // 4 for i in (1, 2, 3)]
    if kind == "rand1":
        return [i * n // 20 for i in range(1, RAND1_CHANGES + 1)]
    raise InvalidParameterError(f"unknown kind {kind!r}")


def _change_sizes(spec: ScenarioSpec) -> np.ndarray:
    delta = spec.change_size
    if spec.kind == "none":
        return np.zeros(0)
    if spec.kind == "up":
        return np.array([delta])
    if spec.kind == "updown":
        return np.array([delta, -delta, delta])
    # rand1: signed sizes drawn once per scenario, independent of replicate
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed]))
    return rng.uniform(-2.0 * delta, 2.0 * delta, RAND1_CHANGES)


def _step_function(n: int, positions, sizes) -> np.ndarray:
    mu = np.zeros(n)
    for pos, size in zip(positions, sizes):
        mu[pos:] += size
    return mu


def generate_sinusoidal_mean(
    n: int,
    amplitude: float,
    frequency: float,
    changepoints,
    change_size,
) -> np.ndarray:
    """A sinusoidal baseline plus a cumulative step function.

    ``mu_t = amplitude * sin(2*pi*frequency*t)`` for ``t = 1..n``, shifted by
    ``change_size`` (a scalar applied to every change, or one signed size per
    change) at each listed position.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if frequency < 0.0:
        raise InvalidParameterError("frequency must be >= 0")
    positions = list(changepoints)
    sizes = np.broadcast_to(np.asarray(change_size, dtype=float), (len(positions),))
    t = np.arange(1, n + 1)
    base = amplitude * np.sin(2.0 * np.pi * frequency * t)
    return base + _step_function(n, positions, sizes)


def _ar_recursion(innovations: np.ndarray, coeffs) -> np.ndarray:
    """Run ``eps_t = sum_j coeffs[j]*eps_{t-j} + innovations[t]``."""
    a = np.concatenate(([1.0], -np.asarray(coeffs, dtype=float)))
    return lfilter([1.0], a, innovations)


def generate_ar2_noise(n: int, phi1: float, phi2: float, sigma_nu: float, seed) -> np.ndarray:
    """Stationary-ish AR(2) noise started from a zero state with burn-in.

    The recursion runs for ``AR2_BURN_IN`` extra steps from a zero state and
    the warm-up is discarded.  ``seed`` may be an int or a ready
    ``numpy.random.Generator``.  ``sigma_nu = 0`` yields the zero vector.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    _check_ar2_stationary(phi1, phi2)
    if sigma_nu < 0.0:
        raise InvalidParameterError("sigma_nu must be >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(
        np.random.SeedSequence([int(seed)])
    )
    innov = rng.standard_normal(n + AR2_BURN_IN) * sigma_nu
    return _ar_recursion(innov, (phi1, phi2))[AR2_BURN_IN:]


def _noise_for(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    noise = spec.noise
    n = spec.n
    if isinstance(noise, IidNoise):
        noise = Ar1Noise(phi=0.0, sigma_nu=noise.sigma)
    if isinstance(noise, Ar1Noise):
        phi, sd = noise.phi, noise.sigma_nu
        start = rng.standard_normal() * (sd / math.sqrt(1.0 - phi * phi))
        innov = np.concatenate(([start], rng.standard_normal(n - 1) * sd))
        return _ar_recursion(innov, (phi,))
    return generate_ar2_noise(n, noise.phi1, noise.phi2, noise.sigma_nu, rng)


def generate(spec: ScenarioSpec, replicate: int = 0) -> SimulatedSeries:
    """Generate one replicate of a scenario.

    Draw order is fixed (change sizes, then drift increments, then noise
    innovations), so identical ``(spec, replicate)`` pairs reproduce the
    same series exactly.  AR(1) noise starts from its stationary law; the
    drift starts at zero.
    """
    if replicate < 0:
        raise InvalidParameterError("replicate index must be >= 0")
    n = spec.n
    positions = scenario_changepoints(spec.kind, n)
    if len(set(positions)) != len(positions) or (positions and positions[0] < 1):
        raise InvalidParameterError("change positions collide; n is too small")
    sizes = _change_sizes(spec)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1 + replicate]))

    mu = _step_function(n, positions, sizes)
    drift = spec.drift
    if isinstance(drift, RandomWalkDrift):
        inc = rng.standard_normal(n - 1) * drift.sigma_eta
        mu = mu + np.concatenate(([0.0], np.cumsum(inc)))
    elif isinstance(drift, SinusoidalDrift):
        t = np.arange(1, n + 1)
        mu = mu + drift.amplitude * np.sin(2.0 * np.pi * drift.frequency * t)

    eps = _noise_for(spec, rng)
    return SimulatedSeries(y=mu + eps, mu_true=mu, changepoints_true=positions)


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

_NOISE_TYPES = {"ar1": Ar1Noise, "ar2": Ar2Noise, "iid": IidNoise}
_DRIFT_TYPES = {"random_walk": RandomWalkDrift, "sinusoidal": SinusoidalDrift, "none": NoDrift}


def spec_to_json(spec: ScenarioSpec) -> dict:
    """Plain-dict form of a spec, suitable for ``json.dump``."""
    noise_type = next(k for k, v in _NOISE_TYPES.items() if isinstance(spec.noise, v))
    drift_type = next(k for k, v in _DRIFT_TYPES.items() if isinstance(spec.drift, v))
    noise = {"type": noise_type, **spec.noise.__dict__}
    drift = {"type": drift_type, **spec.drift.__dict__}
    return {
        "kind": spec.kind,
        "n": spec.n,
        "change_size": spec.change_size,
        "noise": noise,
        "drift": drift,
        "seed": spec.seed,
    }


def spec_from_json(doc: dict) -> ScenarioSpec:
    """Rebuild a :class:`ScenarioSpec` from its plain-dict form."""
    try:
        noise_doc = dict(doc["noise"])
        drift_doc = dict(doc["drift"])
        noise_cls = _NOISE_TYPES[noise_doc.pop("type")]
        drift_cls = _DRIFT_TYPES[drift_doc.pop("type")]
        return ScenarioSpec(
            kind=doc["kind"],
            n=int(doc["n"]),
            change_size=float(doc["change_size"]),
            noise=noise_cls(**noise_doc),
            drift=drift_cls(**drift_doc),
            seed=int(doc["seed"]),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"malformed scenario document: {exc}") from exc
