"""The q-ary symmetric channel: transitions, capacity, likelihood weights.

The channel keeps a symbol with probability 1 - eps and otherwise replaces
it with a uniformly random different symbol. All log-likelihood weights use
the natural logarithm; only the ratio D(eps)/D(xi) enters any decision, so
the base is a documentation choice, not a behavioral one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .galois import FieldSpec


@dataclass(frozen=True)
class ChannelParams:
    """QSC parameters: a field and an error probability.

    eps must lie in [0, (q-1)/q); the upper limit is the zero-capacity
    point where the log-likelihood weight D(eps) stops being positive.
    eps = 0 is allowed for noiseless tests; the decoder clamps it before
    forming weights.
    """

    field: FieldSpec
    epsilon: float

    def __post_init__(self):
        q = self.field.q
        if not 0 <= self.epsilon < (q - 1) / q:
            raise ValueError(
                f"epsilon must be in [0, {(q - 1) / q}), got {self.epsilon}")


def transmit(x: np.ndarray, params: ChannelParams,
             rng: np.random.Generator) -> np.ndarray:
    """Send a symbol vector through the QSC.

    Each symbol is independently kept with probability 1 - eps, otherwise
    replaced by a uniformly random different symbol (in characteristic 2,
    adding a uniform nonzero offset realizes exactly that).

    Parameters
    ----------
    x : np.ndarray
        Input symbols, each in [0, q).
    params : ChannelParams
    rng : np.random.Generator
        Consumes a fixed number of draws regardless of content, so output
        is deterministic for a fixed generator state.
    """
    q = params.field.q
    flips = rng.random(x.size) < params.epsilon
    offsets = rng.integers(1, q, size=x.size, dtype=x.dtype)
    y = x.copy()
    y[flips] ^= offsets[flips]
    return y


def capacity(q: int, epsilon: float) -> float:
    """QSC capacity in symbols per channel use.

    C = 1 + eps*log_q(eps/(q-1)) + (1-eps)*log_q(1-eps), with 0*log(0)
    taken as 0 at eps = 0.
    """
    if epsilon == 0:
        return 1.0
    logq = math.log(q)
    return (1.0 + epsilon * math.log(epsilon / (q - 1)) / logq
            + (1.0 - epsilon) * math.log(1.0 - epsilon) / logq)


def weight_D(q: int, p: float) -> float:
    """Log-likelihood weight D(p) = ln(1-p) - ln(p/(q-1)).

    Positive iff p < (q-1)/q, i.e. iff the channel has positive capacity.

    Raises
    ------
    ValueError
        If p is outside the open interval (0, 1).
    """
    if not 0 < p < 1:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return math.log(1.0 - p) - math.log(p / (q - 1))


def llv(y: int, params: ChannelParams) -> tuple[int, float]:
    """Sparse log-likelihood vector of a channel observation.

    The dense vector has a single nonzero entry D(eps) at index y; the
    sparse form is the pair (y, D(eps)).
    """
    return int(y), weight_D(params.field.q, params.epsilon)


def shannon_limit(q: int, rate: float) -> float:
    """Largest eps whose capacity still reaches the given rate.

    Solves C(eps) = rate by bisection on [0, (q-1)/q], exploiting that
    the capacity is strictly decreasing; absolute tolerance 1e-6.

    Raises
    ------
    ValueError
        If rate is outside the open interval (0, 1).
    """
    if not 0 < rate < 1:
        raise ValueError(f"rate must be in (0, 1), got {rate}")
    hi = (q - 1) / q
    return float(bisect(lambda e: capacity(q, e) - rate, 0.0, hi, xtol=1e-6))


#: Flip probabilities are clamped to [PROB_FLOOR, (q-1)/q - PROB_FLOOR]
#: before entering weight_D, keeping weight ratios finite and positive.
PROB_FLOOR = 1e-12


def weight_ratio(q: int, epsilon: float, xi: float) -> float:
    """Channel-versus-vote weight D(epsilon) / D(xi), with clamping.

    Both arguments are clamped into [PROB_FLOOR, (q-1)/q - PROB_FLOOR]
    so the ratio is finite and strictly positive even at the endpoints.
    """
    lo = PROB_FLOOR
    hi = (q - 1) / q - PROB_FLOOR
    eps_c = min(max(epsilon, lo), hi)
    xi_c = min(max(xi, lo), hi)
    return weight_D(q, eps_c) / weight_D(q, xi_c)
