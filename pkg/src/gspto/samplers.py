"""Seeded random sampling for the stochastic gradient estimators.

The covariance convention everywhere in this package: ``sigma`` is the
standard deviation per coordinate, i.e. Gaussian perturbations have covariance
``sigma**2 * I_d``. (Some write-ups of these methods use N(mu, sigma I) and
N(mu, sigma^2 I) interchangeably; we standardize on the latter, which is the
convention the variance analysis actually uses.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class RngStream:
    """A reproducible, splittable random stream.

    Identical ``(seed, stream_id)`` pairs always yield identical sequences;
    distinct ``stream_id`` values (one per trial) give statistically
    independent streams.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream (fresh stream) or a Generator (continue in place)."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidParameterError(f"rng must be an RngStream or numpy Generator, got {type(rng)!r}")


def sample_gaussian(mu, sigma, count, rng) -> np.ndarray:
    """``count`` independent draws from N(mu, sigma^2 I_d), shape (count, d)."""
    mu = np.asarray(mu, dtype=float)
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidParameterError(f"sigma must be a positive real, got {sigma}")
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    gen = as_generator(rng)
    return mu + sigma * gen.standard_normal((int(count), mu.shape[0]))


def sample_unit_sphere(dimension, count, rng) -> np.ndarray:
    """``count`` directions uniform on the unit sphere in R^d, shape (count, d).

    Normalized Gaussian draws; in R^1 this degenerates to +-1.
    """
    if dimension < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {dimension}")
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    gen = as_generator(rng)
    z = gen.standard_normal((int(count), int(dimension)))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # never happens in practice; avoids 0/0
    return z / norms
