"""Subspace geometry of the Gibbs projections: angle and inclination.

M_i is the subspace of functions constant in coordinate i; the small step
P_i projects onto it orthogonally in L2(pi), and the intersection of all M_i
contains only the constants.  Two scalars summarize how the M_i sit relative
to each other:

* the generalized angle c: the supremum of the normalized cross-correlation
  of mean-zero functions f_i in M_i; computed here both in closed form from
  the uniform-weight random-scan norm and by an independent brute-force
  generalized eigenproblem over explicit bases;
* the inclination ell: the min over unit-distance-from-constants functions
  of the max distance to the M_i; estimated by a seeded multi-restart
  smoothed min-max optimizer.  The optimizer value ell_hat is only an upper
  bound on ell; certified lower bounds come from the sandwich inequality
  applied to the exact c.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import ValidationError
from .measure import TargetDistribution
from .operators import RandomScan, _small_step_kernel, l2_norm_centered, rsg

#: Rank cut for Gram-Schmidt of the M_i cap M-perp bases.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal (in L2(pi)) basis of M_i cap M-perp for one coordinate."""

    i: int
    vectors: np.ndarray  # (n_states, dim) columns, orthonormal under <.,.>_pi

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class AngleResult:
    value: float
    method: str  # "closed_form" | "brute_force"
    degenerate: bool = False
    witness: Optional[np.ndarray] = None  # block coefficient vector (brute force)


@dataclass(frozen=True)
class InclinationResult:
    value: float
    witness: np.ndarray  # function values by flat state, dist(witness, M) = 1
    restarts: int
    tol: float
    converged: bool


def subspace_basis(i: int, pi: TargetDistribution) -> SubspaceBasis:
    """Basis of mean-zero functions constant in coordinate i (1-based).

    Built by orthonormalizing the mean-centered indicators of the x_{-i}
    cells in the pi inner product, with rank tolerance RANK_TOL.
    """
    d = pi.space.d
    if not 1 <= i <= d:
        raise ValidationError("coordinate index %d out of range 1..%d" % (i, d))
    dims = pi.space.dims
    axis = i - 1
    n = pi.space.total_states
    idx = np.arange(n).reshape(dims)
    cells = np.moveaxis(idx, axis, -1).reshape(-1, dims[axis])
    span = np.zeros((n, cells.shape[0]))
    for j, cell in enumerate(cells):
        span[cell, j] = 1.0
    span -= pi.pmf @ span  # mean-center each column
    s = np.sqrt(pi.pmf)
    y = span * s[:, None]
    u, svals, _ = np.linalg.svd(y, full_matrices=False)
    rank = int(np.sum(svals > RANK_TOL))
    basis = u[:, :rank] / s[:, None]
    return SubspaceBasis(i=i, vectors=basis)


def friedrichs_angle_from_norm(pi: TargetDistribution) -> AngleResult:
    """c recovered from the exact uniform-weight random-scan norm.

    Inverts ||(1/d) sum_i P_i - Pi|| = ((d-1)/d) (c + 1/(d-1)).
    """
    d = pi.space.d
    norm = l2_norm_centered(rsg(RandomScan.uniform(d), pi))
    c = (d * norm - 1.0) / (d - 1.0)
    return AngleResult(value=float(c), method="closed_form")


def friedrichs_angle_bruteforce(pi: TargetDistribution) -> AngleResult:
    """Independent oracle for c via a dense symmetric eigenproblem.

    With orthonormal bases Y_i of the M_i cap M-perp blocks (in the
    symmetrized coordinates), the numerator quadratic form over block
    coefficients u is u^T (Y^T Y - I) u and the denominator is
    (d-1) u^T u, so c is the top eigenvalue of (Y^T Y - I) / (d-1).
    """
    d = pi.space.d
    s = np.sqrt(pi.pmf)
    blocks = []
    for i in range(1, d + 1):
        b = subspace_basis(i, pi)
        if b.dim > 0:
            blocks.append(b.vectors * s[:, None])
    if not blocks:
        # only possible when every cross-section is a single cell: the
        # supremum runs over an empty set and c is defined as 0
        return AngleResult(value=0.0, method="brute_force", degenerate=True)
    y = np.hstack(blocks)
    gram = y.T @ y
    gram = 0.5 * (gram + gram.T)
    cross = gram - np.eye(gram.shape[0])
    vals, vecs = np.linalg.eigh(cross)
    c = float(vals[-1] / (d - 1.0))
    return AngleResult(value=c, method="brute_force", witness=vecs[:, -1].copy())


def _inclination_forms(pi: TargetDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic forms A_i on the mean-zero sphere, plus the chart Q.

    In coordinates y = D^{1/2} f restricted to the orthogonal complement of
    sqrt(pi), dist(f, M_i)^2 = v^T A_i v for y = Q v.
    """
    d = pi.space.d
    n = pi.space.total_states
    s = np.sqrt(pi.pmf)
    q = scipy.linalg.null_space(s[None, :])
    forms = np.empty((d, n - 1, n - 1))
    for i in range(1, d + 1):
        k = _small_step_kernel(i, pi)
        proj = k * s[:, None] / s[None, :]
        resid = np.eye(n) - 0.5 * (proj + proj.T)
        a = q.T @ resid @ q
        forms[i - 1] = 0.5 * (a + a.T)
    return forms, q


def _max_form(forms: np.ndarray, v: np.ndarray) -> float:
    return float(max(v @ a @ v for a in forms))


def _smoothed_objective(w: np.ndarray, forms: np.ndarray, beta: float):
    nw = np.linalg.norm(w)
    v = w / nw
    q = np.einsum("i,kij,j->k", v, forms, v)
    m = q.max()
    e = np.exp(beta * (q - m))
    z = e.sum()
    val = m + np.log(z) / beta
    p = e / z
    grad_v = 2.0 * np.einsum("k,kij,j->i", p, forms, v)
    grad_w = (grad_v - (grad_v @ v) * v) / nw
    return val, grad_w


def inclination(pi: TargetDistribution, restarts: int = 32, tol: float = 1e-8,
                seed: int = 0) -> InclinationResult:
    """Best-effort upper bound on the inclination, with witness.

    Multi-restart minimization of max_i dist(f, M_i) over the unit sphere of
    mean-zero functions, via log-sum-exp smoothing with a sharpening
    temperature schedule, polished by a derivative-free local search in low
    dimension.  Restarts use seeded starts; ties resolve to the lowest
    restart index, so the result is schedule-independent.
    """
    if restarts < 1:
        raise ValidationError("restarts must be >= 1, got %d" % restarts)
    if pi.space.d < 2:
        raise ValidationError("inclination needs d >= 2")
    forms, q = _inclination_forms(pi)
    m = q.shape[1]
    if m == 0:
        # single-state space: no mean-zero directions exist
        return InclinationResult(value=0.0, witness=np.zeros(pi.space.total_states),
                                 restarts=restarts, tol=tol, converged=True)
    rng = np.random.default_rng(seed)
    best_val = np.inf
    best_v = None
    converged = False
    for _ in range(restarts):
        w = rng.standard_normal(m)
        w /= np.linalg.norm(w)
        for beta in (4.0, 32.0, 256.0, 2048.0, 16384.0):
            res = scipy.optimize.minimize(
                _smoothed_objective, w, args=(forms, beta), jac=True,
                method="L-BFGS-B", options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-12},
            )
            w = res.x / np.linalg.norm(res.x)
        if m <= 12:
            polish = scipy.optimize.minimize(
                lambda x: _max_form(forms, x / np.linalg.norm(x)), w,
                method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000},
            )
            if polish.fun < _max_form(forms, w):
                w = polish.x / np.linalg.norm(polish.x)
        val = _max_form(forms, w)
        if val < best_val - 1e-15:
            best_val = val
            best_v = w.copy()
            converged = True
    ell_hat = float(np.sqrt(max(best_val, 0.0)))
    s = np.sqrt(pi.pmf)
    witness = (q @ best_v) / s
    return InclinationResult(value=ell_hat, witness=witness, restarts=restarts,
                             tol=tol, converged=converged)


def inclination_lower_bound(c: float, d: int) -> float:
    """Certified lower bound ell >= (d-1)(1-c)/(2d) from the exact angle."""
    return max(0.0, (d - 1.0) * (1.0 - c) / (2.0 * d))


def check_sandwich(c: float, ell_hat: float, d: int, tol: float = 1e-9) -> dict:
    """Check the angle/inclination sandwich with an *upper bound* ell_hat.

    The left inequality 1 - (2d/(d-1)) ell <= c remains valid when ell is
    replaced by any upper bound, so it is asserted.  The right inequality
    c <= 1 - ell^2/(d-1) can fail spuriously with ell_hat > ell and is
    reported as advisory only.
    """
    left_lhs = 1.0 - (2.0 * d / (d - 1.0)) * ell_hat
    right_rhs = 1.0 - ell_hat ** 2 / (d - 1.0)
    return {
        "left_lhs": left_lhs,
        "left_pass": bool(left_lhs <= c + tol),
        "left_slack": c - left_lhs,
        "right_rhs": right_rhs,
        "right_advisory_pass": bool(c <= right_rhs + tol),
        "right_slack": right_rhs - c,
    }
