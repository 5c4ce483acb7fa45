"""Density evolution for symbol message passing on the q-ary symmetric channel.

Tracks a single scalar per iteration: the probability p0 that a message
equals the sent symbol (by symmetry every wrong symbol is equally likely).
A check-node step turns p0 into the distribution of the check vote, a
variable-node step turns the vote quality back into a new p0. The
variable-node step is available in two flavours:

* ``vn_step_exact`` enumerates tie multiplicities exactly; its cost grows
  quickly with dv and q, so it is guarded by a feasibility check.
* ``vn_step_bounded`` replaces the tie-multiplicity expectation with
  closed upper and lower bounds and is cheap for any dv and q > 2.

``de_run`` iterates either flavour and reports the full trajectory, from
which decoder weight schedules and convergence thresholds are derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .channel import weight_ratio

__all__ = [
    "BoundedProb",
    "CnDistribution",
    "DeTrace",
    "IterationRecord",
    "cn_step",
    "de_run",
    "multinomial_max_cdf",
    "multinomial_max_eq_count_dist",
    "psi",
    "vn_step_bounded",
    "vn_step_exact",
]

#: A channel weight within this distance of an integer is treated as
#: integral, activating the score-tie branches of the update.
WEIGHT_TIE_TOL = 1e-9

#: Exact variable-node updates are refused when the number of message
#: multisets C(dv-1+q-1, q-1) exceeds this bound.
EXACT_SIZE_LIMIT = 10_000_000


# ----------------------------------------------------------------------
# Interval container and trace records
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BoundedProb:
    """A probability known to lie in [lower, upper]."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        lo = min(max(self.lower, 0.0), 1.0)
        up = min(max(self.upper, 0.0), 1.0)
        if lo > up:
            if lo - up > 1e-9:
                raise ValueError(f"lower {lo} exceeds upper {up}")
            up = lo
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class IterationRecord:
    """One density-evolution iteration: p0 and the check vote error rate."""

    p0: BoundedProb
    xi: BoundedProb


@dataclass
class DeTrace:
    """Trajectory of a density-evolution run.

    records[l] holds p0 after l variable-node iterations together with
    the xi the next variable-node step would see; records[0] is the
    channel initialization. ``converged`` reports whether the lower p0
    trajectory reached 1 - delta_conv; ``converged_upper`` reports the
    same for the upper trajectory (they coincide in exact mode).
    """

    dv: int
    dc: int
    q: int
    epsilon: float
    mode: str
    records: list[IterationRecord] = field(default_factory=list)
    converged: bool = False
    converged_upper: bool = False
    iterations_run: int = 0

    def xi_values(self, l_max: int, bound: str = "lower") -> list[float]:
        """First l_max xi values, repeating the final one when short.

        Decoders index this schedule by iteration; ``bound`` selects the
        lower or upper end of each interval (identical in exact mode).
        """
        if bound not in ("lower", "upper"):
            raise ValueError(f"unknown bound {bound!r}")
        if not self.records:
            raise ValueError("trace holds no records")
        vals = [getattr(rec.xi, bound) for rec in self.records[:l_max]]
        while len(vals) < l_max:
            vals.append(vals[-1])
        return vals

    def to_json(self) -> dict:
        return {
            "dv": self.dv,
            "dc": self.dc,
            "q": self.q,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "converged": self.converged,
            "converged_upper": self.converged_upper,
            "iterations_run": self.iterations_run,
            "records": [
                {"p0": [r.p0.lower, r.p0.upper], "xi": [r.xi.lower, r.xi.upper]}
                for r in self.records
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DeTrace":
        records = [
            IterationRecord(BoundedProb(*rec["p0"]), BoundedProb(*rec["xi"]))
            for rec in data["records"]
        ]
        return cls(
            dv=data["dv"],
            dc=data["dc"],
            q=data["q"],
            epsilon=data["epsilon"],
            mode=data["mode"],
            records=records,
            converged=data["converged"],
            converged_upper=data["converged_upper"],
            iterations_run=data["iterations_run"],
        )


# ----------------------------------------------------------------------
# Check-node step
# ----------------------------------------------------------------------

def psi(j: int, a: int, q: int) -> float:
    """P(sum of j iid uniform nonzero q-ary symbols equals a).

    Only whether a is zero matters. Closed form, valid for j = 0 too.
    """
    if j < 0:
        raise ValueError(f"j must be nonnegative, got {j}")
    if q < 2:
        raise ValueError(f"q must be at least 2, got {q}")
    if not 0 <= a < q:
        raise ValueError(f"symbol {a} outside field of order {q}")
    r = (-1.0 / (q - 1)) ** j
    if a == 0:
        return (1.0 + (q - 1) * r) / q
    return (1.0 - r) / q


@dataclass(frozen=True)
class CnDistribution:
    """Distribution of a check vote: correct w.p. omega0, else uniform."""

    q: int
    omega0: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega0", min(max(self.omega0, 0.0), 1.0))

    @property
    def omega_other(self) -> float:
        return (1.0 - self.omega0) / (self.q - 1)

    @property
    def xi(self) -> float:
        return 1.0 - self.omega0


def cn_step(p0: float, dc: int, q: int) -> CnDistribution:
    """Distribution of the vote formed from dc - 1 incoming messages.

    Each incoming message is correct with probability p0 and otherwise
    uniform over the wrong symbols; edge labels preserve that shape, so
    the vote error rate depends only on how many inputs are wrong.
    """
    if dc < 2:
        raise ValueError(f"dc must be at least 2, got {dc}")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must be a probability, got {p0}")
    omega0 = 0.0
    for j in range(dc):
        omega0 += _binom_pmf(j, dc - 1, 1.0 - p0) * psi(j, 0, q)
    return CnDistribution(q=q, omega0=omega0)


# ----------------------------------------------------------------------
# Maximum of a uniform multinomial
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _capped_assignments(k: int, s: int, t: int) -> int:
    """Number of ways to drop s labeled balls into k cells, each cell <= t."""
    if s == 0:
        return 1
    if k <= 0 or t <= 0:
        return 0
    if t >= s:
        return k ** s
    if k * t < s:
        return 0
    # row[u] = assignments of u balls into the first i cells
    row = [0] * (s + 1)
    row[0] = 1
    for _ in range(k):
        new = [0] * (s + 1)
        for u in range(s + 1):
            acc = 0
            for x in range(min(t, u) + 1):
                acc += math.comb(u, x) * row[u - x]
            new[u] = acc
        row = new
    return row[s]


def multinomial_max_cdf(k: int, s: int, t: int) -> float:
    """P(max cell count <= t) for s balls dropped uniformly into k cells."""
    if s < 0 or k < 0:
        raise ValueError(f"need k, s >= 0, got k={k}, s={s}")
    if s == 0:
        return 1.0
    if k == 0:
        return 0.0
    return _capped_assignments(k, s, t) / k ** s


def multinomial_max_eq_count_dist(k: int, s: int, t: int) -> list[float]:
    """P(exactly r cells hold t balls, all others fewer), r = 0, 1, ...

    The returned list covers r = 0 .. min(k, s // t); its total equals
    multinomial_max_cdf(k, s, t) and entry 0 is P(max < t).
    """
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    if s < 0 or k < 0:
        raise ValueError(f"need k, s >= 0, got k={k}, s={s}")
    if k == 0:
        return [1.0] if s == 0 else [0.0]
    total = k ** s
    out = []
    for r in range(min(k, s // t) + 1):
        ways = math.comb(k, r) * _ball_picks(s, t, r)
        ways *= _capped_assignments(k - r, s - r * t, t - 1)
        out.append(ways / total)
    return out


def _ball_picks(s: int, t: int, r: int) -> int:
    """Ways to choose an ordered sequence of r disjoint t-subsets of s balls."""
    out = 1
    left = s
    for _ in range(r):
        out *= math.comb(left, t)
        left -= t
    return out


# ----------------------------------------------------------------------
# Variable-node step
# ----------------------------------------------------------------------

def _binom_pmf(j: int, n: int, p: float) -> float:
    """Binomial pmf, exact combinatorics for small n, log-space beyond."""
    if j < 0 or j > n:
        return 0.0
    if p <= 0.0:
        return 1.0 if j == 0 else 0.0
    if p >= 1.0:
        return 1.0 if j == n else 0.0
    if n <= 500:
        return math.comb(n, j) * p ** j * (1.0 - p) ** (n - j)
    return math.exp(
        math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
        + j * math.log(p) + (n - j) * math.log1p(-p))


def _integral_weight(w: float) -> int | None:
    """Round w to an int when within WEIGHT_TIE_TOL, else None.

    Weights below 1 - WEIGHT_TIE_TOL are never integral: a vanishing
    weight cannot tie the zero count of an empty cell in a meaningful
    way, and treating it as non-integral lets the correct cell keep
    winning those comparisons.
    """
    r = round(w)
    if r >= 1 and abs(w - r) <= WEIGHT_TIE_TOL:
        return r
    return None


def _validate_vn_args(xi: float, epsilon: float, dv: int, q: int) -> None:
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must be in [0, 1], got {xi}")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    if dv < 2:
        raise ValueError(f"dv must be at least 2, got {dv}")
    if q < 2:
        raise ValueError(f"q must be at least 2, got {q}")


def _check_exact_feasible(dv: int, q: int) -> None:
    if math.comb(dv - 1 + q - 1, q - 1) > EXACT_SIZE_LIMIT:
        raise ValueError(
            f"exact variable-node update infeasible for dv={dv}, q={q}; "
            "use the bounded mode")


def _max_lt_eq(k: int, s: int, t: int) -> tuple[float, float]:
    """(P(max < t), P(max = t)) for s balls uniform over k cells, t >= 1."""
    if k == 0:
        return (1.0, 0.0) if s == 0 else (0.0, 0.0)
    total = k ** s
    w_le = _capped_assignments(k, s, t)
    w_lt = _capped_assignments(k, s, t - 1)
    return w_lt / total, (w_le - w_lt) / total


def vn_step_exact(xi: float, epsilon: float, dv: int, q: int) -> float:
    """Exact probability that the next message is correct.

    The outgoing message is the symbol maximizing (vote count) + w for
    the observed symbol, w = D(epsilon)/D(xi), ties broken uniformly.
    Tie multiplicities are enumerated exactly through the distribution
    of the number of cells attaining the maximum.
    """
    _validate_vn_args(xi, epsilon, dv, q)
    _check_exact_feasible(dv, q)
    w = weight_ratio(q, epsilon, xi)
    w_int = _integral_weight(w)
    w_floor = math.floor(w)
    s_tot = dv - 1
    k = q - 1

    # correct observation: f0 votes land on the sent symbol, the rest
    # fall uniformly on the k wrong cells; the sent symbol scores f0 + w
    case_a = 0.0
    for f0 in range(s_tot + 1):
        pf = _binom_pmf(f0, s_tot, 1.0 - xi)
        if pf == 0.0:
            continue
        s = s_tot - f0
        if w_int is None:
            win = multinomial_max_cdf(k, s, f0 + w_floor)
        else:
            dist = multinomial_max_eq_count_dist(k, s, f0 + w_int)
            win = sum(p / (1 + r) for r, p in enumerate(dist))
        case_a += pf * win

    # wrong observation: one wrong cell carries the channel weight; by
    # symmetry its identity is irrelevant, so it stands for all of them
    case_b = 0.0
    p_cell1 = xi / k
    for f1 in range(s_tot + 1):
        pf1 = _binom_pmf(f1, s_tot, p_cell1)
        if pf1 == 0.0:
            continue
        rem = s_tot - f1
        pc = (1.0 - xi) / (1.0 - p_cell1) if rem else 1.0
        f0_min = f1 + (w_int if w_int is not None else w_floor) + 1
        acc = 0.0
        for f0 in range(f0_min, rem + 1):
            pf0 = _binom_pmf(f0, rem, pc)
            if pf0 == 0.0:
                continue
            # the sent symbol must also beat the q - 2 remaining cells
            dist = multinomial_max_eq_count_dist(q - 2, rem - f0, f0)
            acc += pf0 * sum(p / (1 + jo) for jo, p in enumerate(dist))
        if w_int is not None and f1 + w_int <= rem:
            a1 = f1 + w_int
            pf0 = _binom_pmf(a1, rem, pc)
            if pf0 > 0.0:
                # sent symbol ties the observed one; both join the argmax
                dist = multinomial_max_eq_count_dist(q - 2, rem - a1, a1)
                acc += pf0 * sum(p / (2 + jo) for jo, p in enumerate(dist))
        case_b += pf1 * acc

    return (1.0 - epsilon) * case_a + epsilon * case_b


def vn_step_bounded(xi: float, epsilon: float, dv: int, q: int) -> BoundedProb:
    """Upper and lower bounds on the exact variable-node update.

    Tie events are kept, but the expected reciprocal of the argmax size
    is replaced by closed bounds: the argmax holds at least two symbols
    whenever a tie occurs, and never more than the ball counts allow.
    Requires q > 2; at q = 2 the exact update is already cheap.
    """
    _validate_vn_args(xi, epsilon, dv, q)
    if q <= 2:
        raise ValueError("bounded update needs q > 2; use vn_step_exact")
    w = weight_ratio(q, epsilon, xi)
    w_int = _integral_weight(w)
    w_floor = math.floor(w)
    s_tot = dv - 1
    k = q - 1
    k2 = q - 2

    lo = up = 0.0
    w_obs = 1.0 - epsilon
    for f0 in range(s_tot + 1):
        pf = _binom_pmf(f0, s_tot, 1.0 - xi) * w_obs
        if pf == 0.0:
            continue
        s = s_tot - f0
        if w_int is None:
            win = multinomial_max_cdf(k, s, f0 + w_floor)
            lo += pf * win
            up += pf * win
        else:
            t = f0 + w_int
            p_lt, p_eq = _max_lt_eq(k, s, t)
            lo += pf * p_lt
            up += pf * (p_lt + 0.5 * p_eq)
            if p_eq > 0.0:
                r_max = min(s // t, k)
                lo += pf * p_eq / (1 + r_max)

    w_obs = epsilon
    p_cell1 = xi / k
    for f1 in range(s_tot + 1):
        pf1 = _binom_pmf(f1, s_tot, p_cell1) * w_obs
        if pf1 == 0.0:
            continue
        rem = s_tot - f1
        pc = (1.0 - xi) / (1.0 - p_cell1) if rem else 1.0
        f0_min = f1 + (w_int if w_int is not None else w_floor) + 1
        for f0 in range(f0_min, rem + 1):
            pf0 = _binom_pmf(f0, rem, pc) * pf1
            if pf0 == 0.0:
                continue
            p_lt, p_eq = _max_lt_eq(k2, rem - f0, f0)
            lo += pf0 * p_lt
            up += pf0 * (p_lt + 0.5 * p_eq)
            if p_eq > 0.0:
                r_max = min(rem // f0, k)
                lo += pf0 * p_eq / r_max
        if w_int is not None and f1 + w_int <= rem:
            a1 = f1 + w_int
            pf0 = _binom_pmf(a1, rem, pc) * pf1
            if pf0 > 0.0:
                p_lt, p_eq = _max_lt_eq(k2, rem - a1, a1)
                lo += pf0 * 0.5 * p_lt
                up += pf0 * (0.5 * p_lt + p_eq / 3.0)
                if p_eq > 0.0:
                    r_max = min(s_tot // a1, k)
                    lo += pf0 * p_eq / (1 + r_max)

    return BoundedProb(lo, up)


# ----------------------------------------------------------------------
# Full recursion
# ----------------------------------------------------------------------

def _xi_bounds(p_lo: float, p_up: float, dc: int, q: int) -> tuple[float, float]:
    """Range of the vote error rate when p0 ranges over [p_lo, p_up].

    omega0 is a polynomial in g = (q p0 - 1)/(q - 1) of degree dc - 1;
    for even degree its minimum over an interval straddling g = 0 sits
    at g = 0, otherwise extremes are at the endpoints.
    """
    o_lo = cn_step(p_lo, dc, q).omega0
    o_up = cn_step(p_up, dc, q).omega0
    o_min = min(o_lo, o_up)
    o_max = max(o_lo, o_up)
    if (dc - 1) % 2 == 0 and q * p_lo < 1.0 < q * p_up:
        o_min = min(o_min, 1.0 / q)
    return 1.0 - o_max, 1.0 - o_min


def de_run(dv: int, dc: int, q: int, epsilon: float, l_max: int = 2000,
           mode: str | None = None, delta_conv: float = 1e-9) -> DeTrace:
    """Iterate density evolution and report the trajectory.

    mode "exact" uses the exact variable-node update, "bounded" evolves
    a lower and an upper trajectory; None picks exact for q = 2 and
    bounded otherwise. The run stops once the lower trajectory reaches
    1 - delta_conv (converged), stops making progress, or hits l_max.
    """
    if q < 2:
        raise ValueError(f"q must be at least 2, got {q}")
    if dv < 2:
        raise ValueError(f"dv must be at least 2, got {dv}")
    if dc < 2:
        raise ValueError(f"dc must be at least 2, got {dc}")
    if not 0.0 <= epsilon < (q - 1) / q:
        raise ValueError(
            f"epsilon must be in [0, {(q - 1) / q}) for q={q}, got {epsilon}")
    if l_max < 1:
        raise ValueError(f"l_max must be positive, got {l_max}")
    if mode is None:
        mode = "exact" if q == 2 else "bounded"
    if mode not in ("exact", "bounded"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "bounded" and q == 2:
        raise ValueError("bounded mode needs q > 2; use exact for q = 2")
    if mode == "exact":
        _check_exact_feasible(dv, q)

    def make_record(p_lo: float, p_up: float) -> IterationRecord:
        xi_lo, xi_up = _xi_bounds(p_lo, p_up, dc, q)
        return IterationRecord(BoundedProb(p_lo, p_up), BoundedProb(xi_lo, xi_up))

    p_lo = p_up = 1.0 - epsilon
    trace = DeTrace(dv=dv, dc=dc, q=q, epsilon=epsilon, mode=mode,
                    records=[make_record(p_lo, p_up)])
    if 1.0 - p_lo < delta_conv:
        trace.converged = trace.converged_upper = True
        return trace

    for it in range(1, l_max + 1):
        rec = trace.records[-1]
        if mode == "exact":
            p_lo_new = p_up_new = vn_step_exact(rec.xi.lower, epsilon, dv, q)
        else:
            # each trajectory evolves on its own xi end, so each is a
            # genuine one-sided recursion rather than interval arithmetic
            p_lo_new = vn_step_bounded(rec.xi.upper, epsilon, dv, q).lower
            p_up_new = vn_step_bounded(rec.xi.lower, epsilon, dv, q).upper
        trace.records.append(make_record(p_lo_new, p_up_new))
        trace.iterations_run = it
        if 1.0 - p_lo_new < delta_conv:
            trace.converged = True
            break
        if p_lo_new <= p_lo and p_up_new <= p_up:
            # the one-step maps are monotone, so a non-increasing
            # trajectory can never climb to the convergence target
            break
        p_lo, p_up = p_lo_new, p_up_new

    p_up_final = trace.records[-1].p0.upper
    trace.converged_upper = trace.converged or 1.0 - p_up_final < delta_conv
    return trace
