"""Closed-form spectral-norm bounds and slack reporting against exact values.

Slack convention: slack = bound - exact.  Negative slack beyond -1e-9 on an
asserted bound is a hard failure.  Bounds are always evaluated from the
exact closed-form angle c (recovered from the uniform-weight random-scan
norm), never from the heuristic inclination estimate, whose direction as an
upper bound would flip the deterministic-scan inequality.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .geometry import friedrichs_angle_from_norm, inclination_lower_bound
from .measure import TargetDistribution
from .operators import (
    DeterministicScan,
    RandomScan,
    dsg,
    l2_norm_centered,
    rsg,
)

SLACK_TOL = 1e-9
#: Permutations are enumerated exhaustively up to this dimension, sampled beyond.
EXHAUSTIVE_PERM_DIM = 5


@dataclass(frozen=True)
class BoundEntry:
    name: str
    bound: float
    exact: float
    inputs: dict = field(default_factory=dict)
    sharp: bool = False

    @property
    def slack(self) -> float:
        return self.bound - self.exact


@dataclass(frozen=True)
class BoundReport:
    angle: float
    entries: tuple[BoundEntry, ...]

    def violations(self, tol: float = SLACK_TOL) -> list[BoundEntry]:
        return [e for e in self.entries if e.slack < -tol]


def _check_c(c: float, d: int) -> None:
    if not -1.0 / (d - 1.0) - 1e-9 <= c <= 1.0 + 1e-9:
        raise ValidationError("angle c=%g out of range [-1/(d-1), 1] for d=%d" % (c, d))


def rsg_norm_bound(c: float, d: int, weights: Sequence[float]) -> float:
    """Upper bound on ||RSG - Pi|| with alpha = d * min_i w_i.

    Equals the exact norm at uniform weights and never drops below the
    universal lower bound 1/d.
    """
    scan = weights if isinstance(weights, RandomScan) else RandomScan(tuple(weights))
    if scan.d != d:
        raise ValidationError("weights have length %d, expected %d" % (scan.d, d))
    _check_c(c, d)
    alpha = d * min(scan.weights)
    return ((d - 1.0) / d) * alpha * (c + 1.0 / (d - 1.0)) + 1.0 - alpha


def dsg_norm_bound_from_c(c: float, d: int) -> float:
    """Upper bound sqrt(1 - ((d-1)^2/(4 d^4)) (1-c)^2) on ||DSG - Pi||."""
    if d < 2:
        raise ValidationError("d must be >= 2, got %d" % d)
    _check_c(c, d)
    inner = 1.0 - ((d - 1.0) ** 2 / (4.0 * d ** 4)) * (1.0 - c) ** 2
    return math.sqrt(max(inner, 0.0))


def dsg_norm_bound_from_l(ell: float, d: int) -> float:
    """Upper bound sqrt(1 - ell^2/d^2); ell must be a certified lower bound
    on the true inclination (not the optimizer's upper-bound estimate)."""
    if not 0.0 <= ell <= 1.0:
        raise ValidationError("ell must lie in [0, 1], got %g" % ell)
    if d < 2:
        raise ValidationError("d must be >= 2, got %d" % d)
    return math.sqrt(max(1.0 - ell ** 2 / d ** 2, 0.0))


def rapid_mixing_transfer(beta: float, gamma: float, d: int) -> float:
    """Deterministic-scan gap floor (gamma^2/32) d^(-2 beta - 2).

    Valid whenever the random-scan gap satisfies 1 - rho_RSG(d) >= gamma *
    d^(-beta): a polynomial random-scan decay rate beta degrades to at worst
    2 beta + 2 for any deterministic scan.
    """
    if beta <= 0 or gamma <= 0:
        raise ValidationError("beta and gamma must be positive")
    if d < 2:
        raise ValidationError("d must be >= 2, got %d" % d)
    return (gamma ** 2 / 32.0) * float(d) ** (-2.0 * beta - 2.0)


def sample_permutations(d: int, seed: int = 0, count: int = 24) -> list[tuple[int, ...]]:
    """All d! permutations for small d, a seeded sample beyond."""
    if d <= EXHAUSTIVE_PERM_DIM:
        return [tuple(p) for p in itertools.permutations(range(1, d + 1))]
    rng = np.random.default_rng(seed)
    out = {tuple(range(1, d + 1)), tuple(range(d, 0, -1))}
    while len(out) < count:
        out.add(tuple(int(x) + 1 for x in rng.permutation(d)))
    return sorted(out)


def verify_bounds(pi: TargetDistribution,
                  sigma_list: Sequence[Sequence[int]] | None = None,
                  weight_list: Sequence[Sequence[float]] | None = None,
                  seed: int = 0) -> BoundReport:
    """Exact norms for the requested scans versus every applicable bound.

    Asserts nothing itself; callers inspect ``violations()``.  Includes the
    uniform-weight sharpness entry and the universal 1/d lower bound.
    """
    d = pi.space.d
    c = friedrichs_angle_from_norm(pi).value
    entries: list[BoundEntry] = []

    if sigma_list is None:
        sigma_list = sample_permutations(d, seed=seed)
    if weight_list is None:
        weight_list = [RandomScan.uniform(d).weights]

    uniform = RandomScan.uniform(d)
    exact_uniform = l2_norm_centered(rsg(uniform, pi))
    entries.append(BoundEntry(
        name="rsg_uniform_sharpness",
        bound=rsg_norm_bound(c, d, uniform),
        exact=exact_uniform,
        inputs={"c": c, "d": d, "weights": uniform.weights},
        sharp=True,
    ))
    # universal floor: exact norm >= 1/d, recorded as bound=exact, exact=1/d
    entries.append(BoundEntry(
        name="rsg_lower_bound_1_over_d",
        bound=exact_uniform,
        exact=1.0 / d,
        inputs={"d": d},
    ))

    for weights in weight_list:
        scan = RandomScan(tuple(weights))
        exact = l2_norm_centered(rsg(scan, pi))
        entries.append(BoundEntry(
            name="rsg_norm_bound",
            bound=rsg_norm_bound(c, d, scan),
            exact=exact,
            inputs={"c": c, "d": d, "weights": scan.weights},
        ))

    cor2 = dsg_norm_bound_from_c(c, d)
    for sigma in sigma_list:
        scan = DeterministicScan(tuple(sigma))
        exact = l2_norm_centered(dsg(scan, pi))
        entries.append(BoundEntry(
            name="dsg_norm_bound",
            bound=cor2,
            exact=exact,
            inputs={"c": c, "d": d, "sigma": scan.order},
        ))
        entries.append(BoundEntry(
            name="dsg_norm_bound_via_certified_l",
            bound=dsg_norm_bound_from_l(inclination_lower_bound(c, d), d),
            exact=exact,
            inputs={"c": c, "d": d, "sigma": scan.order},
        ))

    return BoundReport(angle=c, entries=tuple(entries))
