"""Markov operators on L2(pi) as dense transition tables.

Order convention: ``dsg(sigma, pi)`` returns the kernel of the chain that
updates coordinate sigma(1) *first in time* and sigma(d) last, i.e. the
kernel matrix product K_{sigma(1)} @ K_{sigma(2)} @ ... @ K_{sigma(d)}.
Acting on a test function f (matrix-vector product, kernel @ f) this applies
the sigma(d) small step to f innermost.  Because each small step is
self-adjoint in L2(pi), the adjoint of a sweep is the sweep in reversed
update order.

All norms are taken in L2(pi): for a kernel table A the operator norm equals
the largest singular value of D^{1/2} A D^{-1/2} with D = diag(pi), which is
well defined because targets have full support.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import NumericError, StateCapError, ValidationError
from .measure import TargetDistribution

#: Row sums and stationarity are enforced to this tolerance.
STOCHASTICITY_TOL = 1e-10
#: Kernel entries more negative than this are an error; dust above it is clamped.
NEGATIVE_DUST_TOL = 1e-14
#: Default refusal threshold for dense state spaces.
DEFAULT_STATE_CAP = 20_000
#: Weight vectors must sum to 1 within this.
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MarkovOperator:
    """A dense row-stochastic kernel together with its stationary law.

    ``stationary`` is the stationary pmf over flat states.  For Gibbs
    operators it is a TargetDistribution's pmf; chains on non-product spaces
    (the ladder counterexample) supply a plain vector.
    """

    kernel: np.ndarray
    stationary: np.ndarray
    label: str = ""

    def __post_init__(self):
        kernel = np.asarray(self.kernel, dtype=float)
        pi = np.asarray(self.stationary, dtype=float).reshape(-1)
        n = pi.shape[0]
        if kernel.shape != (n, n):
            raise ValidationError(
                "kernel shape %r does not match stationary law of length %d" % (kernel.shape, n)
            )
        if np.any(pi <= 0):
            raise ValidationError("stationary law must have full support")
        low = kernel.min()
        if low < -NEGATIVE_DUST_TOL:
            raise ValidationError("kernel has entry %g below the dust tolerance" % low)
        kernel = np.clip(kernel, 0.0, None)
        row_err = np.abs(kernel.sum(axis=1) - 1.0).max()
        if row_err > STOCHASTICITY_TOL:
            raise ValidationError("kernel rows sum to 1 only within %g" % row_err)
        stat_err = np.abs(pi @ kernel - pi).max()
        if stat_err > STOCHASTICITY_TOL:
            raise ValidationError("stationarity violated: max |pi^T P - pi^T| = %g" % stat_err)
        kernel = kernel.copy()
        kernel.flags.writeable = False
        pi = pi.copy()
        pi.flags.writeable = False
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "stationary", pi)

    @property
    def n_states(self) -> int:
        return self.stationary.shape[0]


@dataclass(frozen=True)
class DeterministicScan:
    """A full sweep in a fixed update order (1-based coordinate labels)."""

    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(1, len(order) + 1)):
            raise ValidationError("scan order %r is not a permutation of 1..d" % (order,))

    @property
    def d(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class RandomScan:
    """One coordinate updated per step, chosen with positive weights."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if any(x <= 0 for x in w):
            raise ValidationError("every scan weight must be > 0, got %r" % (w,))
        if abs(sum(w) - 1.0) > WEIGHT_TOL:
            raise ValidationError("scan weights must sum to 1, got %.17g" % sum(w))

    @property
    def d(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, d: int) -> "RandomScan":
        return cls((1.0 / d,) * d)


ScanSpec = Union[DeterministicScan, RandomScan]


@dataclass(frozen=True)
class SpectralReport:
    """Exact spectral quantities of a centered operator plus bound entries."""

    label: str
    l2_norm_centered: float
    spectral_radius_centered: float
    reversible: bool
    bound_entries: tuple = ()

    @property
    def spectral_gap(self) -> float:
        return 1.0 - self.spectral_radius_centered


def _check_cap(pi: TargetDistribution, state_cap: int) -> None:
    if pi.space.total_states > state_cap:
        raise StateCapError(
            "target has %d states, above the cap of %d"
            % (pi.space.total_states, state_cap)
        )


def pi_kernel(pi_vec: np.ndarray) -> np.ndarray:
    """The rank-one kernel with every row equal to pi (the mean projector)."""
    pi_vec = np.asarray(pi_vec, dtype=float).reshape(-1)
    return np.tile(pi_vec, (pi_vec.shape[0], 1))


def small_step(i: int, pi: TargetDistribution, state_cap: int = DEFAULT_STATE_CAP) -> MarkovOperator:
    """The kernel resampling coordinate i (1-based) from pi(.|x_{-i}).

    As an operator on L2(pi) this is the orthogonal projection onto the
    subspace of functions constant in coordinate i.
    """
    d = pi.space.d
    if not 1 <= i <= d:
        raise ValidationError("coordinate index %d out of range 1..%d" % (i, d))
    _check_cap(pi, state_cap)
    return MarkovOperator(_small_step_kernel(i, pi), pi.pmf, label="P_%d" % i)


def _small_step_kernel(i: int, pi: TargetDistribution) -> np.ndarray:
    dims = pi.space.dims
    n = pi.space.total_states
    axis = i - 1
    w = pi.as_tensor()
    cond = w / w.sum(axis=axis, keepdims=True)
    # kernel(x, y) = cond(y_i | x_{-i}) if y_{-i} == x_{-i} else 0
    kernel = np.zeros((n, n))
    ni = dims[axis]
    # enumerate cells of x_{-i}: iterate over flat indices grouped by slice
    idx = np.arange(n).reshape(dims)
    moved = np.moveaxis(idx, axis, -1).reshape(-1, ni)
    cond_rows = np.moveaxis(cond, axis, -1).reshape(-1, ni)
    for cell, crow in zip(moved, cond_rows):
        kernel[np.ix_(cell, cell)] = crow[None, :]
    return kernel


def compose(ops: Sequence[MarkovOperator], label: str = "") -> MarkovOperator:
    """Kernel of running the given operators in time order."""
    if not ops:
        raise ValidationError("compose needs at least one operator")
    kernel = ops[0].kernel
    for op in ops[1:]:
        kernel = kernel @ op.kernel
    return MarkovOperator(kernel, ops[0].stationary, label=label)


def dsg(sigma: Sequence[int], pi: TargetDistribution,
        state_cap: int = DEFAULT_STATE_CAP) -> MarkovOperator:
    """Deterministic scan: one full sweep updating sigma(1) first, sigma(d) last."""
    scan = sigma if isinstance(sigma, DeterministicScan) else DeterministicScan(tuple(sigma))
    if scan.d != pi.space.d:
        raise ValidationError("scan has %d coordinates, target has %d" % (scan.d, pi.space.d))
    _check_cap(pi, state_cap)
    kernel = None
    for i in scan.order:
        k = _small_step_kernel(i, pi)
        kernel = k if kernel is None else kernel @ k
    return MarkovOperator(kernel, pi.pmf, label="DSG sigma=%s" % (scan.order,))


def rsg(weights: Union[RandomScan, Sequence[float]], pi: TargetDistribution,
        state_cap: int = DEFAULT_STATE_CAP) -> MarkovOperator:
    """Random scan: the convex combination sum_i w_i P_i; reversible w.r.t. pi."""
    scan = weights if isinstance(weights, RandomScan) else RandomScan(tuple(weights))
    if scan.d != pi.space.d:
        raise ValidationError("scan has %d weights, target has %d coordinates" % (scan.d, pi.space.d))
    _check_cap(pi, state_cap)
    kernel = np.zeros((pi.space.total_states,) * 2)
    for i, w in enumerate(scan.weights, start=1):
        kernel += w * _small_step_kernel(i, pi)
    return MarkovOperator(kernel, pi.pmf, label="RSG w=%s" % (scan.weights,))


def symmetrized_sweep(sigma: Sequence[int], pi: TargetDistribution,
                      state_cap: int = DEFAULT_STATE_CAP) -> MarkovOperator:
    """The palindromic sweep sigma(1),...,sigma(d),sigma(d-1),...,sigma(1).

    Self-adjoint in L2(pi): it is T* T for the plain sweep T up to the
    idempotence of the middle factor.
    """
    scan = sigma if isinstance(sigma, DeterministicScan) else DeterministicScan(tuple(sigma))
    if scan.d != pi.space.d:
        raise ValidationError("scan has %d coordinates, target has %d" % (scan.d, pi.space.d))
    _check_cap(pi, state_cap)
    path = list(scan.order) + list(scan.order[-2::-1])
    kernel = None
    for i in path:
        k = _small_step_kernel(i, pi)
        kernel = k if kernel is None else kernel @ k
    return MarkovOperator(kernel, pi.pmf, label="SYM sigma=%s" % (scan.order,))


def adjoint(op: MarkovOperator) -> MarkovOperator:
    """Time reversal: P*(x, y) = pi(y) P(y, x) / pi(x); the L2(pi) adjoint."""
    pi = op.stationary
    kernel = op.kernel.T * pi[None, :] / pi[:, None]
    return MarkovOperator(kernel, pi, label="adjoint(%s)" % op.label)


def additive_reversibilization(op: MarkovOperator) -> MarkovOperator:
    """(P + P*) / 2; reversible w.r.t. the stationary law by construction."""
    rev = adjoint(op)
    return MarkovOperator(0.5 * (op.kernel + rev.kernel), op.stationary,
                          label="reversibilization(%s)" % op.label)


def is_reversible(op: MarkovOperator, tol: float = STOCHASTICITY_TOL) -> bool:
    """Detailed balance check pi(x) P(x,y) = pi(y) P(y,x) within tol."""
    flow = op.stationary[:, None] * op.kernel
    return bool(np.abs(flow - flow.T).max() <= tol)


def _centered_conjugated(op: MarkovOperator) -> np.ndarray:
    """D^{1/2} (P - Pi) D^{-1/2}; its singular values give the L2(pi) norm."""
    pi = op.stationary
    s = np.sqrt(pi)
    centered = op.kernel - pi_kernel(pi)
    return centered * s[:, None] / s[None, :]


def l2_norm_centered(op: MarkovOperator) -> float:
    """||P - Pi|| in L2(pi); always <= 1 for a stationary Markov kernel."""
    a = _centered_conjugated(op)
    try:
        svals = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError("SVD failed for %s: %s" % (op.label, exc)) from exc
    return float(svals[0]) if svals.size else 0.0


def spectral_radius_centered(op: MarkovOperator) -> float:
    """Largest eigenvalue modulus of P - Pi (complex eigenvalues allowed)."""
    pi = op.stationary
    centered = op.kernel - pi_kernel(pi)
    try:
        if is_reversible(op):
            a = _centered_conjugated(op)
            vals = np.linalg.eigvalsh(0.5 * (a + a.T))
        else:
            vals = np.linalg.eigvals(centered)
    except np.linalg.LinAlgError as exc:
        raise NumericError("eigensolver failed for %s: %s" % (op.label, exc)) from exc
    return float(np.abs(vals).max()) if vals.size else 0.0


def spectral_report(op: MarkovOperator) -> SpectralReport:
    """Exact norm, radius and gap of the centered operator."""
    return SpectralReport(
        label=op.label,
        l2_norm_centered=l2_norm_centered(op),
        spectral_radius_centered=spectral_radius_centered(op),
        reversible=is_reversible(op),
    )


def power_norm_sequence(op: MarkovOperator, n_max: int) -> list[float]:
    """[||P^n - Pi|| for n = 1..n_max]; non-increasing and <= ||P - Pi||^n."""
    if n_max < 1:
        raise ValidationError("n_max must be >= 1, got %d" % n_max)
    a = _centered_conjugated(op)
    out = []
    power = np.eye(a.shape[0])
    for _ in range(n_max):
        power = power @ a
        svals = np.linalg.svd(power, compute_uv=False)
        out.append(float(svals[0]))
    return out


def tv_distance_decay(op: MarkovOperator, x0: int, n_max: int) -> list[float]:
    """Exact TV distance of row x0 of P^n to pi, for n = 1..n_max."""
    if not 0 <= x0 < op.n_states:
        raise ValidationError("state %d out of range" % x0)
    if n_max < 0:
        raise ValidationError("n_max must be >= 0")
    row = np.zeros(op.n_states)
    row[x0] = 1.0
    out = []
    for _ in range(n_max):
        row = row @ op.kernel
        out.append(float(0.5 * np.abs(row - op.stationary).sum()))
    return out


def export_kernel_csv(op: MarkovOperator, path: str) -> None:
    """Write the kernel as flat row-major CSV with a header row."""
    n = op.n_states
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "value"])
        for x in range(n):
            for y in range(n):
                writer.writerow([x, y, repr(op.kernel[x, y])])


def operator_report(op: MarkovOperator) -> dict:
    """Structured invariant-check report for an operator."""
    flow = op.stationary[:, None] * op.kernel
    return {
        "label": op.label,
        "n_states": op.n_states,
        "row_sum_error": float(np.abs(op.kernel.sum(axis=1) - 1.0).max()),
        "stationarity_error": float(np.abs(op.stationary @ op.kernel - op.stationary).max()),
        "detailed_balance_error": float(np.abs(flow - flow.T).max()),
        "reversible": is_reversible(op),
    }
