"""Power and exponential-power fitness transforms plus overflow-safe weighting.

The transforms turn a raw fitness f into the sampling weight f_N: either
``f ** N`` (power mode, nonnegative f only) or ``exp(N * f)`` (exponential
mode). Points outside the search domain S always map to weight 0. The relative
weighting divides out an anchor transform so that huge powers never overflow;
since the optimizers normalize the gradient, only the direction survives and
the two weightings produce the same updates.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass

from .errors import AnchorError, InvalidParameterError, NegativeFitnessError

log = logging.getLogger(__name__)

_MAX_FLOAT = sys.float_info.max

PGS = "pgs"
EPGS = "epgs"


@dataclass(frozen=True)
class TransformMode:
    """Which transform to apply and with what power.

    The power is a positive real; it is not restricted to integers (the attack
    presets use powers as small as 0.02). Power 0 is admitted only as a
    diagnostic (uniform weights); the optimizers refuse it.
    """

    kind: str
    power: float = 1.0
    stable_weighting: bool = True

    def __post_init__(self):
        if self.kind not in (PGS, EPGS):
            raise InvalidParameterError(f"transform kind must be 'pgs' or 'epgs', got {self.kind!r}")
        if not (math.isfinite(self.power) and self.power >= 0):
            raise InvalidParameterError(f"power must be a finite nonnegative real, got {self.power}")


def _clamped_exp(exponent: float) -> float:
    try:
        return math.exp(exponent)
    except OverflowError:
        log.warning("exp(%g) overflowed; clamping to largest finite float", exponent)
        return _MAX_FLOAT


def _clamped_pow(base: float, power: float) -> float:
    try:
        return math.pow(base, power)
    except OverflowError:
        log.warning("%g ** %g overflowed; clamping to largest finite float", base, power)
        return _MAX_FLOAT


def transform(f_value: float, in_domain: bool, mode: TransformMode) -> float:
    """Transformed fitness f_N; exactly 0 outside the domain."""
    if not in_domain:
        return 0.0
    if mode.kind == PGS:
        if f_value < 0:
            raise NegativeFitnessError(f_value)
        return _clamped_pow(f_value, mode.power)
    return _clamped_exp(mode.power * f_value)


def relative_weight(f_sample: float, f_anchor: float, mode: TransformMode) -> float:
    """Transform ratio f_N(sample) / f_N(anchor), computed without overflow.

    Equals ``transform(f_sample) / transform(f_anchor)`` in exact arithmetic.
    Exponential mode underflows gracefully to 0 for very unfavorable samples.
    """
    if mode.kind == PGS:
        if f_anchor <= 0:
            raise AnchorError(f_anchor)
        if f_sample < 0:
            raise NegativeFitnessError(f_sample)
        return _clamped_pow(f_sample / f_anchor, mode.power)
    return _clamped_exp(mode.power * (f_sample - f_anchor))
