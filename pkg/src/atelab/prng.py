"""Deterministic, splittable pseudo-random number streams.

Every draw in a simulation run is derived from a four-part provenance tuple
(master_seed, cell_index, replicate_index, purpose_tag).  Streams are cheap
to derive and order-independent: regenerating any single replicate, in any
order, on any machine with the same pinned generator, reproduces the same
numbers bit for bit.

The generator is numpy's PCG64 seeded through SeedSequence, which hashes the
provenance tuple into the initial state (no sequential jump-ahead needed).
Normal deviates use an inverse-CDF transform applied to a centred 52-bit
uniform grid, so draws are strictly inside (0, 1) and the mapping is an
exact, fixed function of the raw bit stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InvalidParameterError

# Purpose tags keep data-generating draws isolated from model-internal
# randomness: changing the model set must never perturb the generated data.
PURPOSE_COVARIATES = 0
PURPOSE_TREATMENT = 1
PURPOSE_NOISE = 2
PURPOSE_MODEL = 3

# Added to every purpose tag when a degenerate replicate is regenerated, so
# retry draws never collide with first-attempt draws of any purpose.
RETRY_PURPOSE_STRIDE = 16

_GRID_BITS = 52
_GRID_SIZE = 1 << _GRID_BITS


@dataclass(frozen=True)
class StreamProvenance:
    """The identity of a stream; two equal tuples give identical sequences."""

    master_seed: int
    cell_index: int
    replicate_index: int
    purpose_tag: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.master_seed, self.cell_index,
                self.replicate_index, self.purpose_tag)


class RngStream:
    """A seeded random stream plus the provenance it was derived from.

    Not shareable across concurrent tasks: each unit of work should derive
    its own stream (derivation itself is pure and safe to call anywhere).
    """

    def __init__(self, provenance: StreamProvenance):
        self.provenance = provenance
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(provenance.as_tuple())))

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream{self.provenance.as_tuple()}"

    def with_purpose(self, purpose_tag: int) -> "RngStream":
        """A fresh stream sharing this one's provenance, new purpose tag."""
        p = self.provenance
        return derive_stream(p.master_seed, p.cell_index,
                             p.replicate_index, purpose_tag)

    # -- raw uniforms -----------------------------------------------------

    def random(self, size=None) -> np.ndarray | float:
        """Uniform draws on [0, 1) with 53-bit resolution."""
        return self._gen.random(size)

    def _open_uniform(self, size) -> np.ndarray:
        # (k + 0.5) / 2^52 for k in [0, 2^52): exactly representable,
        # strictly inside (0, 1), so ndtri never sees 0 or 1.
        k = self._gen.integers(0, _GRID_SIZE, size=size, dtype=np.int64)
        return (k + 0.5) * (1.0 / _GRID_SIZE)

    # -- distributions ----------------------------------------------------

    def normal(self, mu: float, sd: float, size=None):
        """Draws from N(mu, sd^2) via the inverse normal CDF."""
        if not (sd > 0.0):
            raise InvalidParameterError(f"normal sd must be > 0, got {sd}")
        scalar = size is None
        z = ndtri(self._open_uniform(1 if scalar else size))
        out = mu + sd * z
        return float(out[0]) if scalar else out

    def bernoulli(self, p: float, size=None):
        """Draws from Bernoulli(p), exact at p = 0 and p = 1."""
        if not (0.0 <= p <= 1.0):
            raise InvalidParameterError(f"bernoulli p must be in [0,1], got {p}")
        scalar = size is None
        hits = (self._gen.random(1 if scalar else size) < p).astype(np.int64)
        return int(hits[0]) if scalar else hits

    def integers(self, low: int, high: int, size=None):
        """Uniform integers in [low, high)."""
        return self._gen.integers(low, high, size=size, dtype=np.int64)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def derive_stream(master_seed: int, cell_index: int, replicate_index: int,
                  purpose_tag: int) -> RngStream:
    """Build the stream identified by the four-part provenance tuple.

    Pure: equal inputs always give streams with identical output sequences;
    any change to any component gives a statistically independent stream.
    """
    for name, value in (("master_seed", master_seed),
                        ("cell_index", cell_index),
                        ("replicate_index", replicate_index),
                        ("purpose_tag", purpose_tag)):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
            raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
        if value < 0:
            raise InvalidParameterError(f"{name} must be >= 0, got {value}")
    return RngStream(StreamProvenance(int(master_seed), int(cell_index),
                                      int(replicate_index), int(purpose_tag)))


def sample_normal(stream: RngStream, mu: float, sd: float) -> float:
    """One draw from N(mu, sd^2); advances the stream."""
    return stream.normal(mu, sd)


def sample_bernoulli(stream: RngStream, p: float) -> int:
    """One draw from Bernoulli(p); advances the stream."""
    return stream.bernoulli(p)
