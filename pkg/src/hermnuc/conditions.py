"""The nine summability conditions kappa(m, p1, p2) and their verdicts.

Each supported (p1, p2) cell has a weighted symbol sum of the common shape

    kappa = sum_s sum_{nu in I_s} (k^a lnk^b)^(s r) *
            prod_{nu_j > k} (nu_j^a ln(nu_j)^b)^r * |m(nu)|^r,

where only the exponent a and the logarithm power b vary by cell (see
_REGIME_EXPONENTS), s counts the components of nu that are <= k, and the
product over large components is empty (= 1) when every component is
small.  Logarithms are guarded as ln(max(t, e)) >= 1 so the finitely many
small-argument terms cannot zero out or flip a weight; convergence is a
tail property and is unaffected.

The partition {I_s} classifies nu by how many components are "small"
(<= k); the classifier is pluggable on RegimePartition so an alternative
reading can be swapped in without touching the summation code.

Finite partial sums cannot prove convergence; verdicts are heuristic and
reported transparently: shell increments decaying at a geometric ratio
with a negligible estimated tail, a clean power-law decay with exponent
> 1, or an exhausted (finitely supported) tail give "converged";
non-decreasing increments or a power-law exponent < 1 give "diverging";
anything else is "inconclusive".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import UnsupportedExponentError
from .hermite import MultiIndex, validate_multi_index
from .symbols import Symbol

_BOUNDARY_TOL = 1e-12
_VERDICT_WINDOW = 5


def count_small_components(nu, k: int) -> int:
    """Default partition classifier: s(nu) = #{j : nu_j <= k}."""
    return sum(1 for v in nu if v <= k)


@dataclass(frozen=True)
class RegimePartition:
    """Partition of multi-index space by the number of small components."""

    k: int
    n: int
    classifier: Callable[[MultiIndex, int], int] = field(default=count_small_components)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"partition cutoff k must be >= 1, got {self.k}")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")


def classify(part: RegimePartition, nu) -> int:
    """Class index s of nu; every nu belongs to exactly one I_s, s in 0..n."""
    nu = validate_multi_index(nu)
    if len(nu) != part.n:
        raise ValueError(f"multi-index dimension {len(nu)} != partition dimension {part.n}")
    s = int(part.classifier(nu, part.k))
    if not 0 <= s <= part.n:
        raise ValueError(f"classifier returned s={s} outside 0..{part.n}")
    return s


def select_regime(p1: float, p2: float) -> int:
    """Regime id 1-9 for the (p1, p2) cell, or UnsupportedExponentError.

    Cells: p2 in [1,4) | {4} | (4,inf] crossed with p1 in (4/3,inf) |
    {4/3} | (1,4/3); boundaries are matched within 1e-12 so that float
    inputs like 1.3333333333333333 land on the p1 = 4/3 cell.
    """
    p1, p2 = float(p1), float(p2)
    if abs(p2 - 4.0) <= _BOUNDARY_TOL:
        row = 1
    elif 1.0 - _BOUNDARY_TOL <= p2 < 4.0:
        row = 0
    elif 4.0 < p2:  # includes p2 = inf
        row = 2
    else:
        raise UnsupportedExponentError(f"p2 = {p2} outside [1, inf]")
    third = 4.0 / 3.0
    if abs(p1 - third) <= _BOUNDARY_TOL:
        col = 1
    elif third < p1 < math.inf:
        col = 0
    elif 1.0 < p1 < third:
        col = 2
    else:
        raise UnsupportedExponentError(f"p1 = {p1} outside (1, inf)")
    return 3 * row + col + 1


def _regime_exponents(regime_id: int, p1: float, p2: float) -> tuple[float, int]:
    """(a, b): per-component weight is nu^a * ln(nu)^b, all raised to r."""
    inv_p1 = 0.0 if math.isinf(p1) else 1.0 / p1
    inv_p2 = 0.0 if math.isinf(p2) else 1.0 / p2
    if regime_id == 1:
        return 0.5 * (inv_p2 - inv_p1), 0
    if regime_id == 2:
        return 0.5 * (inv_p2 - 0.75), 1
    if regime_id == 3:
        return 0.5 * (inv_p2 + inv_p1 / 3.0 - 1.0), 0
    if regime_id == 4:
        return 0.5 * (0.25 - inv_p1), 1
    if regime_id == 5:
        return -0.25, 2
    if regime_id == 6:
        return (inv_p1 - 2.25) / 6.0, 1
    if regime_id == 7:
        inv_p2_conj = 1.0 - inv_p2  # p2' = 1 at p2 = inf
        return 0.5 * (inv_p2_conj / 3.0 - inv_p1), 0
    if regime_id == 8:
        return -(inv_p2 + 1.25) / 6.0, 1
    if regime_id == 9:
        return (inv_p1 - inv_p2 - 2.0) / 6.0, 0
    raise ValueError(f"regime id must be 1..9, got {regime_id}")


def _ln_plus(t: float) -> float:
    return math.log(max(t, math.e))


def kappa_weight(nu, s: int, k: int, a: float, b: int, r: float) -> float:
    """The regime weight at nu, excluding the |m(nu)|^r factor."""
    w = (k**a * _ln_plus(k) ** b) ** (s * r)
    for v in nu:
        if v > k:
            w *= (v**a * _ln_plus(v) ** b) ** r
    return w


@dataclass(frozen=True)
class ConditionReport:
    """Partial sums of one kappa condition with a convergence verdict."""

    regime_id: int
    p1: float
    p2: float
    r: float
    k: int
    N_max: int
    partial_sums: tuple[float, ...]
    verdict: str  # converged | diverging | inconclusive
    tail_estimate: float
    decay_model: str  # geometric | power | finite | none
    ln_guard: str = "ln(max(t, e))"

    @property
    def value(self) -> float:
        return self.partial_sums[-1]

    def as_dict(self) -> dict:
        return {
            "regime_id": self.regime_id,
            "p1": _jsonable(self.p1),
            "p2": _jsonable(self.p2),
            "r": self.r,
            "k": self.k,
            "N_max": self.N_max,
            "partial_sums": list(self.partial_sums),
            "verdict": self.verdict,
            "tail_estimate": _jsonable(self.tail_estimate),
            "decay_model": self.decay_model,
            "ln_guard": self.ln_guard,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _jsonable(v: float):
    return v if math.isfinite(v) else repr(v)


def _shell_indices(n: int, d: int):
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _shell_indices(n - 1, d - first):
            yield (first,) + rest


def kappa(m: Symbol, p1: float, p2: float, r: float, part: RegimePartition,
          N_max: int, tail_rtol: float = 1e-6) -> ConditionReport:
    """Partial sums of the regime condition over degree shells |nu| <= d.

    Only multiplier symbols have a kappa condition.  The verdict policy is
    described in the module docstring; tail_rtol is the relative gate for
    the geometric branch.
    """
    if m.kind != "multiplier":
        raise ValueError("kappa conditions are defined for multiplier symbols")
    if not 0 < r <= 1:
        raise ValueError(f"nuclearity order r must be in (0, 1], got {r}")
    if N_max < 0:
        raise ValueError(f"N_max must be >= 0, got {N_max}")
    if m.n != part.n:
        raise ValueError(f"symbol dimension {m.n} != partition dimension {part.n}")
    regime_id = select_regime(p1, p2)
    a, b = _regime_exponents(regime_id, p1, p2)

    increments = []
    for d in range(N_max + 1):
        shell = 0.0
        for nu in sorted(_shell_indices(part.n, d)):
            s = classify(part, nu)
            shell += kappa_weight(nu, s, part.k, a, b, r) * abs(m.value(nu)) ** r
        increments.append(shell)
    partial = tuple(float(v) for v in np.cumsum(increments))
    verdict, tail, model = _verdict(increments, partial[-1], tail_rtol)
    return ConditionReport(
        regime_id=regime_id, p1=float(p1), p2=float(p2), r=float(r), k=part.k,
        N_max=N_max, partial_sums=partial, verdict=verdict,
        tail_estimate=tail, decay_model=model,
    )


def _verdict(increments, total: float, tail_rtol: float) -> tuple[str, float, str]:
    w = _VERDICT_WINDOW
    if len(increments) < w + 1:
        return "inconclusive", math.inf, "none"
    window = increments[-w:]
    if max(window) == 0.0:
        return "converged", 0.0, "finite"
    prev = increments[-w - 1 : -1]
    ratios = [math.inf if p == 0 else c / p for c, p in zip(window, prev)]
    last = increments[-1]
    if all(rho < 1.0 for rho in ratios):
        rho = max(ratios)
        tail_geo = last / (1.0 - rho)
        if tail_geo < tail_rtol * max(total, np.finfo(float).tiny):
            return "converged", tail_geo, "geometric"
        # Slow decay: telescoping ratios hug 1; test for a power law
        # inc_d ~ C d^(-q) over the window instead.
        q, fit_err = _power_fit(increments)
        if fit_err < 0.1:
            if q > 1.1:
                n_last = len(increments) - 1
                return "converged", last * n_last / (q - 1.0), "power"
            if q < 0.95:
                return "diverging", math.inf, "power"
        return "inconclusive", tail_geo, "none"
    if all(rho >= 1.0 - 1e-9 for rho in ratios):
        return "diverging", math.inf, "none"
    return "inconclusive", math.inf, "none"


def _power_fit(increments) -> tuple[float, float]:
    """Least-squares slope of ln(inc) vs ln(d) over the verdict window."""
    w = _VERDICT_WINDOW
    ds = np.arange(len(increments) - w, len(increments), dtype=float)
    vals = np.asarray(increments[-w:], dtype=float)
    if np.any(vals <= 0) or np.any(ds <= 0):
        return 0.0, math.inf
    slope, intercept = np.polyfit(np.log(ds), np.log(vals), 1)
    resid = np.log(vals) - (slope * np.log(ds) + intercept)
    return -float(slope), float(np.max(np.abs(resid)))


def regime_table() -> list[dict]:
    """The nine cells with their exponent expressions, for the CLI."""
    cells = [
        (1, "1 <= p2 < 4", "4/3 < p1 < inf", "a = (1/2)(1/p2 - 1/p1), no ln"),
        (2, "1 <= p2 < 4", "p1 = 4/3", "a = (1/2)(1/p2 - 3/4), ln^1"),
        (3, "1 <= p2 < 4", "1 < p1 < 4/3", "a = (1/2)(1/p2 + 1/(3 p1) - 1), no ln"),
        (4, "p2 = 4", "4/3 < p1 < inf", "a = (1/2)(1/4 - 1/p1), ln^1"),
        (5, "p2 = 4", "p1 = 4/3", "a = -1/4, ln^2"),
        (6, "p2 = 4", "1 < p1 < 4/3", "a = (1/6)(1/p1 - 9/4), ln^1"),
        (7, "4 < p2 <= inf", "4/3 < p1 < inf", "a = (1/2)(1/(3 p2') - 1/p1), no ln"),
        (8, "4 < p2 <= inf", "p1 = 4/3", "a = -(1/6)(1/p2 + 5/4), ln^1"),
        (9, "4 < p2 <= inf", "1 < p1 < 4/3", "a = (1/6)(1/p1 - 1/p2 - 2), no ln"),
    ]
    return [
        {"regime_id": rid, "p2_cell": p2c, "p1_cell": p1c, "weight": w}
        for rid, p2c, p1c, w in cells
    ]
