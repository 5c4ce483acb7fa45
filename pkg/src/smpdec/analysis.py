"""Decoding threshold search and threshold table generation.

The threshold of a (dv, dc) ensemble over GF(q) is the largest channel
flip probability for which density evolution drives the symbol error
rate to zero.  ``find_threshold`` locates it by bisection on epsilon.
In bounded mode the evolution tracks an interval per iteration, so the
search produces a bracket [eps_star_lower, eps_star_upper]: the lower
value is certified by the pessimistic trajectory, the upper one by the
optimistic trajectory.  In exact mode the two coincide.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

from .de import de_run

#: Column order shared by the CSV and JSON table outputs.
TABLE_COLUMNS = ("dv", "dc", "q", "eps_star_lower", "eps_star_upper",
                 "eps_shannon")

#: Refusing tolerances finer than the bisection can honestly deliver:
#: near the threshold the recursion needs ever more iterations, and
#: below 1e-5 the l_max cap would dominate the answer.
MIN_BISECT_TOL = 1e-5


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a threshold search for one ensemble and field order."""

    dv: int
    dc: int
    q: int
    eps_star_lower: float
    eps_star_upper: float
    evaluations: int
    settings: dict

    def __post_init__(self) -> None:
        ceiling = (self.q - 1) / self.q
        if not 0.0 <= self.eps_star_lower <= self.eps_star_upper < ceiling:
            raise ValueError(
                "threshold bracket must satisfy "
                f"0 <= lower <= upper < {ceiling}: got "
                f"[{self.eps_star_lower}, {self.eps_star_upper}]")


def _bisect(predicate: Callable[[float], bool], lo: float, hi: float,
            tol: float) -> float:
    """Largest-good-point bisection on [lo, hi].

    ``lo`` is assumed good and ``hi`` bad; neither endpoint is
    evaluated.  Returns the midpoint of the final bracket.
    """
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_threshold(dv: int, dc: int, q: int, mode: str | None = None,
                   bisect_tol: float = 1e-4, l_max: int = 2000,
                   delta_conv: float = 1e-9) -> ThresholdResult:
    """Bisect for the decoding threshold of a (dv, dc) ensemble.

    epsilon = 0 is taken as converging and the channel ceiling
    (q-1)/q as not converging, so the search always starts from a
    valid bracket.  Bounded mode runs two bisections, one per
    trajectory, reusing evaluations where the probe points coincide;
    exact mode runs one and reports a degenerate bracket.
    """
    if bisect_tol < MIN_BISECT_TOL:
        raise ValueError(f"bisect_tol must be >= {MIN_BISECT_TOL}")
    if mode is None:
        mode = "exact" if q == 2 else "bounded"

    ceiling = (q - 1) / q
    cache: dict[float, tuple[bool, bool]] = {}

    def flags(eps: float) -> tuple[bool, bool]:
        if eps not in cache:
            trace = de_run(dv, dc, q, eps, mode=mode, l_max=l_max,
                           delta_conv=delta_conv)
            cache[eps] = (trace.converged, trace.converged_upper)
        return cache[eps]

    eps_lower = _bisect(lambda e: flags(e)[0], 0.0, ceiling, bisect_tol)
    if mode == "exact":
        eps_upper = eps_lower
    else:
        # The optimistic trajectory converges wherever the pessimistic
        # one does, so its threshold search can start at the certified
        # lower edge instead of zero.
        eps_upper = _bisect(lambda e: flags(e)[1],
                            max(0.0, eps_lower - bisect_tol), ceiling,
                            bisect_tol)

    return ThresholdResult(
        dv=dv, dc=dc, q=q,
        eps_star_lower=min(eps_lower, eps_upper),
        eps_star_upper=max(eps_lower, eps_upper),
        evaluations=len(cache),
        settings={"mode": mode, "bisect_tol": bisect_tol, "l_max": l_max,
                  "delta_conv": delta_conv},
    )


def table_report(ensembles: Sequence[tuple[int, int]],
                 q_values: Sequence[int], mode: str | None = None,
                 bisect_tol: float = 1e-4, l_max: int = 2000,
                 delta_conv: float = 1e-9) -> list[dict]:
    """Threshold table rows for each (dv, dc) x q cell.

    Each row carries the threshold bracket plus the Shannon limit of
    the q-ary symmetric channel at the ensemble design rate 1 - dv/dc.
    Rows follow the input order: ensembles outermost, field orders
    innermost.
    """
    from .channel import shannon_limit

    rows: list[dict] = []
    for dv, dc in ensembles:
        rate = 1.0 - dv / dc
        for q in q_values:
            res = find_threshold(dv, dc, q, mode=mode,
                                 bisect_tol=bisect_tol, l_max=l_max,
                                 delta_conv=delta_conv)
            rows.append({
                "dv": dv, "dc": dc, "q": q,
                "eps_star_lower": res.eps_star_lower,
                "eps_star_upper": res.eps_star_upper,
                "eps_shannon": shannon_limit(q, rate),
            })
    return rows


def rows_to_csv(rows: Iterable[dict], stream: TextIO) -> None:
    """Write table rows as CSV with the fixed column order."""
    writer = csv.DictWriter(stream, fieldnames=TABLE_COLUMNS,
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({col: row[col] for col in TABLE_COLUMNS})
