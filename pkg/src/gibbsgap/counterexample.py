"""The truncated ladder chain: geometrically ergodic both ways, but with a
reversibilization whose conductance (and hence gap) collapses.

State space: the origin (0, 0) plus rungs (n, k) with 1 <= k <= n <= N,
flat-enumerated origin first, then (1,1), (2,1), (2,2), (3,1), ... with n
ascending and k ascending inside each n; 1 + N(N+1)/2 states in total.

Dynamics: from the origin jump to (n, n) with probability p(n) (n = 0 maps
back to the origin); from (n, k) walk deterministically down to (n, k-1)
and from (n, 1) back to the origin.  The default p is geometric with ratio
q, renormalized to {0..N}; the stationary law is flat across each rung:
pi(0,0) = 1/E[tau], pi(n, k) = p(n)/E[tau] with E[tau] = sum (n+1) p(n).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .operators import (
    MarkovOperator,
    additive_reversibilization,
    adjoint,
    is_reversible,
    l2_norm_centered,
    spectral_radius_centered,
)

#: Exhaustive conductance search is attempted only at or below this size.
EXHAUSTIVE_CUT_LIMIT = 20


@dataclass(frozen=True)
class LadderChainSpec:
    """Truncated ladder chain with jump distribution p on {0..N}."""

    N: int
    q: float = 0.5
    p_values: Optional[tuple[float, ...]] = None  # overrides the geometric family

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("truncation N must be >= 1, got %d" % self.N)
        if self.p_values is None:
            if not 0.0 < self.q < 1.0:
                raise ValidationError("geometric ratio q must lie in (0, 1), got %g" % self.q)
        else:
            p = tuple(float(x) for x in self.p_values)
            if len(p) != self.N + 1:
                raise ValidationError("p_values must have N + 1 = %d entries" % (self.N + 1))
            if any(x <= 0 for x in p):
                raise ValidationError("every p(n) must be > 0")
            object.__setattr__(self, "p_values", p)

    @property
    def n_states(self) -> int:
        return 1 + self.N * (self.N + 1) // 2

    def jump_pmf(self) -> np.ndarray:
        """p renormalized to {0..N}."""
        if self.p_values is not None:
            p = np.asarray(self.p_values, dtype=float)
        else:
            p = (1.0 - self.q) * self.q ** np.arange(self.N + 1)
        return p / p.sum()

    def state_index(self, n: int, k: int) -> int:
        """Flat index of (n, k); (0, 0) is state 0."""
        if n == 0 and k == 0:
            return 0
        if not (1 <= k <= n <= self.N):
            raise ValidationError("invalid ladder state (%d, %d)" % (n, k))
        return 1 + n * (n - 1) // 2 + (k - 1)

    def state_label(self, flat: int) -> tuple[int, int]:
        if flat == 0:
            return (0, 0)
        flat -= 1
        n = 1
        while flat >= n:
            flat -= n
            n += 1
        return (n, flat + 1)

    def rung(self, n: int) -> list[int]:
        """Flat indices of the cut A_n = {(n, k): k = 1..n}."""
        return [self.state_index(n, k) for k in range(1, n + 1)]


def ladder_stationary(spec: LadderChainSpec) -> np.ndarray:
    """Closed-form stationary law; flat across each rung."""
    p = spec.jump_pmf()
    e_tau = float(np.sum((np.arange(spec.N + 1) + 1) * p))
    pi = np.empty(spec.n_states)
    pi[0] = 1.0 / e_tau
    for n in range(1, spec.N + 1):
        pi[spec.rung(n)] = p[n] / e_tau
    return pi


def build_ladder(spec: LadderChainSpec) -> MarkovOperator:
    """The ladder kernel; stationarity of the closed-form law is validated
    by the MarkovOperator constructor."""
    p = spec.jump_pmf()
    m = spec.n_states
    kernel = np.zeros((m, m))
    kernel[0, 0] = p[0]
    for n in range(1, spec.N + 1):
        kernel[0, spec.state_index(n, n)] = p[n]
        for k in range(2, n + 1):
            kernel[spec.state_index(n, k), spec.state_index(n, k - 1)] = 1.0
        kernel[spec.state_index(n, 1), 0] = 1.0
    return MarkovOperator(kernel, ladder_stationary(spec), label="ladder N=%d" % spec.N)


def ladder_adjoint_kernel(spec: LadderChainSpec) -> np.ndarray:
    """Time reversal written out from the reversal rules (oracle for adjoint)."""
    p = spec.jump_pmf()
    m = spec.n_states
    kernel = np.zeros((m, m))
    kernel[0, 0] = p[0]
    for n in range(1, spec.N + 1):
        kernel[0, spec.state_index(n, 1)] = p[n]
        for k in range(2, n + 1):
            kernel[spec.state_index(n, k - 1), spec.state_index(n, k)] = 1.0
        kernel[spec.state_index(n, n), 0] = 1.0
    return kernel


def return_time_moment(spec: LadderChainSpec, b: float,
                       truncated: bool = True) -> tuple[float, bool]:
    """E[b^tau | X_0 = origin] = sum_n b^(n+1) p(n); (value, finite).

    With truncated=False and the geometric family the analytic series is
    summed: finite iff b q < 1, with value b(1-q)/(1-bq).
    """
    if b <= 1.0:
        raise ValidationError("b must be > 1, got %g" % b)
    if truncated:
        p = spec.jump_pmf()
        value = float(np.sum(b ** (np.arange(spec.N + 1) + 1.0) * p))
        return value, True
    if spec.p_values is not None:
        raise ValidationError("analytic moment only available for the geometric family")
    if b * spec.q >= 1.0:
        return math.inf, False
    return b * (1.0 - spec.q) / (1.0 - b * spec.q), True


def conductance(K: MarkovOperator, cuts: Sequence[Sequence[int]],
                exhaustive: bool = False) -> tuple[float, list[float]]:
    """Bottleneck ratios of a reversible kernel over a family of cuts.

    Returns (minimum over the family, per-cut values).  With exhaustive=True
    (refused above EXHAUSTIVE_CUT_LIMIT states) every nonempty proper subset
    is searched instead and the per-cut list is for the supplied family.
    """
    if not is_reversible(K):
        raise ValidationError("conductance is defined here for reversible kernels only")
    pi = K.stationary
    m = K.n_states

    def value(idx: np.ndarray) -> float:
        mask = np.zeros(m, dtype=bool)
        mask[idx] = True
        pa = float(pi[mask].sum())
        pac = float(pi[~mask].sum())
        if pa <= 0.0 or pac <= 0.0:
            raise ValidationError("cut must have 0 < pi(A) < 1")
        flow = float((pi[mask, None] * K.kernel[np.ix_(mask, ~mask)]).sum())
        return flow / (pa * pac)

    per_cut = [value(np.asarray(c, dtype=int)) for c in cuts]
    kappa = min(per_cut) if per_cut else math.inf
    if exhaustive:
        if m > EXHAUSTIVE_CUT_LIMIT:
            raise ValidationError("exhaustive cut search refused above %d states" % EXHAUSTIVE_CUT_LIMIT)
        states = list(range(m))
        for r in range(1, m):
            for subset in itertools.combinations(states, r):
                kappa = min(kappa, value(np.asarray(subset)))
    return kappa, per_cut


def reversibilization_gap_sweep(q: float, n_list: Sequence[int],
                                b_list: Sequence[float] = (1.5,),
                                compute_raw_gaps: bool = True) -> list[dict]:
    """Per-truncation table: gaps of K, P, P*, ladder-cut conductance, and
    exponential return-time moments.

    Checks recorded per row: the reversible-side Cheeger consistency
    gap(K) <= 2 kappa, and the lower Cheeger value kappa^2/2 (reported, not
    asserted; constant conventions vary).
    """
    if sorted(n_list) != list(n_list):
        raise ValidationError("truncations must be increasing")
    rows = []
    for n_trunc in n_list:
        spec = LadderChainSpec(N=int(n_trunc), q=q)
        p_op = build_ladder(spec)
        p_star = adjoint(p_op)
        k_op = additive_reversibilization(p_op)
        cuts = [spec.rung(n) for n in range(1, spec.N + 1)]
        cuts += [[s] for s in range(spec.n_states)]
        kappa, rung_values = conductance(k_op, cuts)
        gap_k = 1.0 - spectral_radius_centered(k_op)
        row = {
            "N": spec.N,
            "n_states": spec.n_states,
            "gap_K": gap_k,
            "kappa_upper": kappa,
            "rung_conductance": rung_values[: spec.N],
            "cheeger_upper_ok": bool(gap_k <= 2.0 * kappa + 1e-9),
            "cheeger_lower_value": kappa ** 2 / 2.0,
            "pi_origin": float(p_op.stationary[0]),
        }
        if compute_raw_gaps:
            row["gap_P"] = 1.0 - spectral_radius_centered(p_op)
            row["gap_P_star"] = 1.0 - spectral_radius_centered(p_star)
        for b in b_list:
            value, finite = return_time_moment(spec, b, truncated=True)
            row["moment_b%g" % b] = value
            _, finite_analytic = (
                return_time_moment(spec, b, truncated=False)
                if spec.p_values is None else (None, True)
            )
            row["moment_b%g_analytic_finite" % b] = finite_analytic
        rows.append(row)
    return rows
