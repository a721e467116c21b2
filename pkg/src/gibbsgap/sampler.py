"""Seeded simulation of the Gibbs samplers with CLT / tail diagnostics.

Chains are simulated directly from the dense one-step kernel, so recorded
steps match the analyzed operator exactly: one record per full sweep for a
deterministic scan, one record per single-coordinate update for a random
scan.  Replicas derive independent streams from one root seed via
numpy's SeedSequence spawning, so parallel or serial execution gives
identical results.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ValidationError
from .measure import TargetDistribution
from .operators import (
    DeterministicScan,
    MarkovOperator,
    RandomScan,
    ScanSpec,
    dsg,
    rsg,
    small_step,
)


@dataclass(frozen=True)
class ChainTrace:
    """A realized trajectory: states[t] is the state after t+1 recorded steps."""

    states: np.ndarray
    scan: ScanSpec
    seed: int
    init: int  # flat initial state X_0 (not included in states)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.int64)
        states.flags.writeable = False
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True)
class TailCheck:
    n: int
    eps: float
    frequency: float
    bound: float
    std_error: float
    passed: bool


def scan_operator(pi: TargetDistribution, scan: ScanSpec, **kw) -> MarkovOperator:
    """The dense kernel a scan simulates: full sweep for DSG, one update for RSG."""
    if isinstance(scan, DeterministicScan):
        return dsg(scan, pi, **kw)
    if isinstance(scan, RandomScan):
        return rsg(scan, pi, **kw)
    raise ValidationError("unknown scan spec %r" % (scan,))


def _step_many(cum_kernel: np.ndarray, states: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Advance a vector of chains one step using inverse-cdf sampling."""
    return (u[:, None] > cum_kernel[states]).sum(axis=1)


def run_chain(pi: TargetDistribution, scan: ScanSpec, n: int, seed: int,
              init: Union[int, str] = "stationary",
              record_intra_sweep: bool = False) -> ChainTrace:
    """Simulate n recorded steps; identical inputs give identical traces.

    init is a flat state or "stationary" (draw X_0 from pi).  With
    record_intra_sweep a deterministic scan records every single-coordinate
    update (n per-coordinate records) instead of one state per sweep.
    """
    if n < 1:
        raise ValidationError("n must be >= 1, got %d" % n)
    rng = np.random.default_rng(seed)
    if init == "stationary":
        x0 = int(rng.choice(pi.space.total_states, p=pi.pmf))
    else:
        x0 = int(init)
        if not 0 <= x0 < pi.space.total_states:
            raise ValidationError("initial state %d out of range" % x0)

    if record_intra_sweep and isinstance(scan, DeterministicScan):
        kernels = [np.cumsum(small_step(i, pi).kernel, axis=1) for i in scan.order]
        states = np.empty(n, dtype=np.int64)
        x = x0
        for t in range(n):
            cum = kernels[t % len(kernels)]
            x = int(np.searchsorted(cum[x], rng.random(), side="right"))
            states[t] = x
        return ChainTrace(states=states, scan=scan, seed=seed, init=x0)

    op = scan_operator(pi, scan)
    cum = np.cumsum(op.kernel, axis=1)
    states = np.empty(n, dtype=np.int64)
    x = x0
    for t in range(n):
        x = int(np.searchsorted(cum[x], rng.random(), side="right"))
        states[t] = x
    return ChainTrace(states=states, scan=scan, seed=seed, init=x0)


def clt_variance_bound(rho: float, f: np.ndarray, pi: TargetDistribution) -> float:
    """((1 + rho)/(1 - rho)) Var_pi(f): the asymptotic-variance ceiling.

    For a random scan pass rho = ||RSG - Pi|| (exact); for a deterministic
    scan pass a certified rho <= ||DSG - Pi||.
    """
    if not 0.0 <= rho < 1.0:
        raise ValidationError("rho must lie in [0, 1) for a finite bound, got %g" % rho)
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape[0] != pi.space.total_states:
        raise ValidationError("f has wrong length")
    mean = float(pi.pmf @ f)
    var = float(pi.pmf @ (f - mean) ** 2)
    return (1.0 + rho) / (1.0 - rho) * var


def asymptotic_variance_estimate(trace: ChainTrace, f: np.ndarray,
                                 batch_count: int | None = None) -> tuple[float, float]:
    """Nonoverlapping batch-means estimate of the asymptotic variance of f,
    with a jackknife standard error.  Default batch count is floor(sqrt(n))."""
    f = np.asarray(f, dtype=float).reshape(-1)
    y = f[trace.states]
    n = y.shape[0]
    if batch_count is None:
        batch_count = int(np.sqrt(n))
    if batch_count < 10:
        raise ValidationError("batch_count must be >= 10, got %d" % batch_count)
    if n < 10 * batch_count:
        raise ValidationError("trace of length %d too short for %d batches" % (n, batch_count))
    b = n // batch_count
    used = b * batch_count
    means = y[:used].reshape(batch_count, b).mean(axis=1)
    grand = means.mean()
    est = b * np.sum((means - grand) ** 2) / (batch_count - 1)
    # jackknife over batches
    jack = np.empty(batch_count)
    for k in range(batch_count):
        rest = np.delete(means, k)
        g = rest.mean()
        jack[k] = b * np.sum((rest - g) ** 2) / (batch_count - 2)
    se = float(np.sqrt(max((batch_count - 1) / batch_count * np.sum((jack - jack.mean()) ** 2), 0.0)))
    return float(est), se


def hoeffding_bound(rho: float, n: int, eps: float, nu_density_norm: float = 1.0) -> float:
    """Tail bound  ||d nu/d pi|| * exp(-((1-rho)/(1+rho)) n eps^2)."""
    if not 0.0 <= rho < 1.0:
        raise ValidationError("rho must lie in [0, 1), got %g" % rho)
    if eps <= 0:
        raise ValidationError("eps must be > 0")
    if nu_density_norm < 1.0:
        raise ValidationError("nu density norm must be >= 1, got %g" % nu_density_norm)
    return nu_density_norm * float(np.exp(-(1.0 - rho) / (1.0 + rho) * n * eps ** 2))


def empirical_tail(pi: TargetDistribution, scan: ScanSpec, f: np.ndarray,
                   n: int, eps: float, replicas: int, seed: int) -> TailCheck:
    """Monte Carlo frequency of {sum_{i=1..n} f(X_i) >= n (mu + eps)}.

    f must be valued in [0, 1]; the chains start from nu = pi, so the
    density-norm factor in the bound is 1.  Pass criterion: frequency <=
    bound + 3 binomial standard errors.
    """
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape[0] != pi.space.total_states:
        raise ValidationError("f has wrong length")
    if f.min() < 0.0 or f.max() > 1.0:
        raise ValidationError("f must be valued in [0, 1]")
    mu = float(pi.pmf @ f)
    if mu + eps > 1.0 + 1e-12:
        raise ValidationError("mu + eps = %g exceeds 1" % (mu + eps))
    if replicas < 1:
        raise ValidationError("replicas must be >= 1")
    op = scan_operator(pi, scan)
    rho = _scan_rho(pi, scan, op)
    cum = np.cumsum(op.kernel, axis=1)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    states = rng.choice(pi.space.total_states, size=replicas, p=pi.pmf)
    sums = np.zeros(replicas)
    for _ in range(n):
        states = _step_many(cum, states, rng.random(replicas))
        sums += f[states]
    freq = float(np.mean(sums >= n * (mu + eps) - 1e-12))
    bound = hoeffding_bound(rho, n, eps, 1.0)
    se = float(np.sqrt(max(freq * (1.0 - freq), 1.0 / replicas) / replicas))
    return TailCheck(n=n, eps=eps, frequency=freq, bound=bound, std_error=se,
                     passed=freq <= bound + 3.0 * se)


def _scan_rho(pi: TargetDistribution, scan: ScanSpec, op: MarkovOperator) -> float:
    from .operators import l2_norm_centered, spectral_radius_centered

    if isinstance(scan, RandomScan):
        return l2_norm_centered(op)
    return spectral_radius_centered(op)


def point_mass_density_norm(pi: TargetDistribution, x0: int) -> float:
    """||d delta_{x0} / d pi|| = 1/sqrt(pi(x0)); reported for point starts."""
    if not 0 <= x0 < pi.space.total_states:
        raise ValidationError("state %d out of range" % x0)
    return float(1.0 / np.sqrt(pi.pmf[x0]))


def replica_seeds(root_seed: int, replicas: int) -> list[np.random.SeedSequence]:
    """Documented splitting rule: SeedSequence(root).spawn(replicas)."""
    return np.random.SeedSequence(root_seed).spawn(replicas)
