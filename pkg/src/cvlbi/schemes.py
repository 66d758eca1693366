"""Cross-scheme comparison of cumulative Fisher information per unit time.

Five measurement schemes are compared through lower bounds on the trace norm of
their Fisher information, accumulated at the rate measurements can be performed.
All schemes are granted the same spectral bandwidth (the impartiality assumption),
so every per-scheme rate factor is the bandwidth delta_nu and the cumulative bound
is rate * single-shot bound:

    CV_INF : 2 eps^2      homodyne readout of the squeezed-resource scheme, high squeezing
    CV_0   : eps^2        same layout with a vacuum resource
    DD     : eps          direct detection
    LOCAL  : eps^2        separate local measurements plus classical communication
    GJC12  : eps / 2      distributed-single-photon scheme

The DD, LOCAL, and GJC12 values are imported constants from the published
single-photon analyses; they are not re-derived here. The CV entries can
optionally be replaced by the exact finite-eps trace norms of the closed-form
limit matrices ("exact" mode) to quantify the lowest-order truncation.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .core import ValidationError
from .fisher import LIMIT_INFINITY, LIMIT_ZERO, fisher_limit_closed_form
from .serialize import format_float

MODE_LOWEST_ORDER = "lowest-order"
MODE_EXACT = "exact"

CSV_HEADER = ("epsilon", "scheme", "bound", "mode")

#: default grid: 200 logarithmic points spanning the comparison range and the crossover
DEFAULT_GRID_MIN = 1e-4
DEFAULT_GRID_MAX = 1.0
DEFAULT_GRID_POINTS = 200


class SchemeId(enum.Enum):
    """The compared measurement schemes."""

    CV_INF = "CV_INF"
    CV_0 = "CV_0"
    DD = "DD"
    LOCAL = "LOCAL"
    GJC12 = "GJC12"


#: lowest-order single-shot trace-norm bound, as (coefficient, power of eps)
_BOUND_COEFF_POWER = {
    SchemeId.CV_INF: (2.0, 2),
    SchemeId.CV_0: (1.0, 2),
    SchemeId.DD: (1.0, 1),
    SchemeId.LOCAL: (1.0, 2),
    SchemeId.GJC12: (0.5, 1),
}

#: schemes whose bounds coincide at lowest order
COINCIDENT_SCHEMES = (SchemeId.CV_0, SchemeId.LOCAL)


@dataclass(frozen=True, eq=False)
class SchemeCurve:
    """Cumulative Fisher lower bound versus eps for one scheme."""

    scheme: SchemeId
    points: tuple
    bandwidth: float
    mode: str = MODE_LOWEST_ORDER

    def __post_init__(self):
        eps = np.array([p[0] for p in self.points], dtype=float)
        bounds = np.array([p[1] for p in self.points], dtype=float)
        if eps.size and (np.any(eps <= 0.0) or np.any(np.diff(eps) <= 0.0)):
            raise ValidationError("curve epsilons must be positive and strictly increasing")
        if np.any(bounds < 0.0):
            raise ValidationError("curve bounds must be nonnegative")
        object.__setattr__(self, "points", tuple((float(e), float(b)) for e, b in self.points))

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def bounds(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def rate_factor(scheme: SchemeId, delta_nu: float) -> float:
    """Successful measurements per unit time; delta_nu for every scheme.

    Homodyne readout is unconditional, and the photon-counting schemes discard
    identifiable failures without losing channel uses, so under equal bandwidths
    all schemes accumulate measurements at the same rate.
    """
    if scheme not in SchemeId:
        raise ValidationError(f"unknown scheme {scheme!r}")
    if not (math.isfinite(delta_nu) and delta_nu > 0.0):
        raise ValidationError("delta_nu must be > 0")
    return float(delta_nu)


def single_shot_bound(scheme: SchemeId, eps: float) -> float:
    """Lowest-order single-shot trace-norm bound for one scheme."""
    if not (math.isfinite(eps) and 0.0 < eps <= 1.0):
        raise ValidationError("eps must be in (0, 1]")
    coeff, power = _BOUND_COEFF_POWER[scheme]
    return coeff * eps**power


def exact_single_shot_trace_norm(
    scheme: SchemeId, eps: float, g1: float = 0.0, g2: float = 0.0
) -> float:
    """Exact finite-eps trace norm where a closed form exists (the CV schemes).

    Non-CV schemes fall back to the lowest-order bound; their exact Fisher
    matrices are imported constants, not modeled here.
    """
    if scheme is SchemeId.CV_INF:
        return fisher_limit_closed_form(eps, g1, g2, LIMIT_INFINITY).trace_norm
    if scheme is SchemeId.CV_0:
        return fisher_limit_closed_form(eps, g1, g2, LIMIT_ZERO).trace_norm
    return single_shot_bound(scheme, eps)


def default_eps_grid() -> np.ndarray:
    return np.geomspace(DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS)


def _validate_grid(eps_grid) -> np.ndarray:
    grid = np.asarray(eps_grid, dtype=float)
    if grid.ndim != 1:
        raise ValidationError("eps grid must be one-dimensional")
    if grid.size and (
        not np.all(np.isfinite(grid))
        or np.any(grid <= 0.0)
        or np.any(grid > 1.0)
        or np.any(np.diff(grid) <= 0.0)
    ):
        raise ValidationError("eps grid must be strictly increasing within (0, 1]")
    return grid


def cumulative_curves(
    eps_grid,
    delta_nu: float = 1.0,
    exact_cv: bool = False,
    g1: float = 0.0,
    g2: float = 0.0,
) -> list[SchemeCurve]:
    """Cumulative Fisher lower-bound curves, one per scheme, over a shared grid.

    With ``exact_cv`` the CV schemes use the exact finite-eps trace norms at the
    given coherence (tagged "exact" in the output); all other entries are the
    lowest-order bounds. Scheme order is fixed; point order follows the grid.
    """
    grid = _validate_grid(eps_grid)
    curves = []
    for scheme in SchemeId:
        exact = exact_cv and scheme in (SchemeId.CV_INF, SchemeId.CV_0)
        rate = rate_factor(scheme, delta_nu)
        points = []
        for eps in grid:
            shot = (
                exact_single_shot_trace_norm(scheme, eps, g1, g2)
                if exact
                else single_shot_bound(scheme, eps)
            )
            points.append((float(eps), rate * shot))
        curves.append(
            SchemeCurve(
                scheme=scheme,
                points=tuple(points),
                bandwidth=float(delta_nu),
                mode=MODE_EXACT if exact else MODE_LOWEST_ORDER,
            )
        )
    return curves


def pairwise_crossings(lo: float = 0.0, hi: float = 1.0) -> list[dict]:
    """Analytic crossing points of the lowest-order bounds within (lo, hi].

    For bounds c_a eps^p and c_b eps^q with p != q the curves meet at
    eps = (c_a / c_b)^(1/(q - p)); equal-power pairs never cross (or coincide
    everywhere, reported separately).
    """
    crossings = []
    schemes = list(SchemeId)
    for i, first in enumerate(schemes):
        for second in schemes[i + 1 :]:
            ca, pa = _BOUND_COEFF_POWER[first]
            cb, pb = _BOUND_COEFF_POWER[second]
            if pa == pb:
                continue
            eps_star = (ca / cb) ** (1.0 / (pb - pa))
            if lo <= eps_star <= hi and eps_star > 0.0:
                crossings.append(
                    {"schemes": [first.value, second.value], "epsilon": float(eps_star)}
                )
    crossings.sort(key=lambda c: (c["epsilon"], c["schemes"]))
    return crossings


def _ranking(values: dict) -> list[list[str]]:
    """Schemes sorted by descending bound, exact ties grouped together."""
    ordered = sorted(values.items(), key=lambda kv: (-kv[1], kv[0].value))
    groups: list[list] = []
    for scheme, value in ordered:
        if groups and math.isclose(value, groups[-1][0], rel_tol=1e-12, abs_tol=0.0):
            groups[-1][1].append(scheme.value)
        else:
            groups.append([value, [scheme.value]])
    return [sorted(g[1]) if len(g[1]) > 1 else g[1] for g in groups]


#: the lowest-order ranking that holds for all eps below the first crossover
SMALL_EPS_RANKING = [["DD"], ["GJC12"], ["CV_INF"], ["CV_0", "LOCAL"]]


def ordering_report(eps_grid, delta_nu: float = 1.0) -> dict:
    """Machine-readable per-eps scheme ranking with analytic crossing points.

    Each grid entry carries the descending ranking (ties grouped) and whether it
    matches the small-eps ordering DD > GJC12 > CV_INF > CV_0 = LOCAL. Crossings
    are restricted to the grid's span; an empty grid yields an empty report.
    """
    grid = _validate_grid(eps_grid)
    if grid.size == 0:
        return {"delta_nu": float(delta_nu), "entries": [], "crossings": [], "coincident": []}
    entries = []
    for eps in grid:
        values = {s: rate_factor(s, delta_nu) * single_shot_bound(s, eps) for s in SchemeId}
        ranking = _ranking(values)
        entries.append(
            {
                "epsilon": float(eps),
                "ranking": ranking,
                "matches_small_eps_ordering": ranking == SMALL_EPS_RANKING,
            }
        )
    return {
        "delta_nu": float(delta_nu),
        "entries": entries,
        "crossings": pairwise_crossings(float(grid[0]), float(grid[-1])),
        "coincident": [[s.value for s in COINCIDENT_SCHEMES]],
    }


def curves_to_csv(curves: list[SchemeCurve]) -> str:
    """Normative CSV emission: header epsilon,scheme,bound,mode, one row per point."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for curve in curves:
        for eps, bound in curve.points:
            writer.writerow(
                [format_float(eps, 10), curve.scheme.value, format_float(bound, 10), curve.mode]
            )
    return buffer.getvalue()


def curves_from_csv(text: str) -> list[SchemeCurve]:
    """Parse the normative CSV back into curves (grid order preserved per scheme)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValidationError(f"expected CSV header {','.join(CSV_HEADER)}")
    by_scheme: dict[tuple, list] = {}
    for eps_s, scheme_s, bound_s, mode in rows[1:]:
        key = (SchemeId(scheme_s), mode)
        by_scheme.setdefault(key, []).append((float(eps_s), float(bound_s)))
    return [
        SchemeCurve(scheme=scheme, points=tuple(points), bandwidth=float("nan"), mode=mode)
        for (scheme, mode), points in by_scheme.items()
    ]
