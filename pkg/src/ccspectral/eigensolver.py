"""Smallest eigenpairs of the generalized problem A u = lambda M u.

A is the assembled energy matrix (symmetric positive semidefinite) and M
the lumped mass diagonal.  Small problems go through a dense symmetric
solve; large ones through shift-invert Lanczos on the regularized pencil
(A + eps M, M), which is positive definite even when constants span the
kernel of A.  Both paths finish with a Rayleigh-Ritz polish against the
unshifted pencil, so the regularization never leaks into the results.
Runs are deterministic: the iterative start vector is drawn from a seeded
generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import AssembledForms

__all__ = ["Eigenpairs", "ConvergenceError", "solve_smallest", "check_minmax", "MinMaxReport"]


class ConvergenceError(RuntimeError):
    """The iterative eigensolver missed the requested residual tolerance."""


@dataclass(frozen=True)
class Eigenpairs:
    """Ascending eigenvalues, M-orthonormal vectors (columns), residuals.

    residuals[i] = ||A v_i - lambda_i M v_i||_2 with ||v_i||_M = 1.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    @property
    def k(self) -> int:
        return self.lambdas.size


def _residuals(A: sp.csr_matrix, mass: np.ndarray, lambdas: np.ndarray,
               V: np.ndarray) -> np.ndarray:
    R = A @ V - (mass[:, None] * V) * lambdas[None, :]
    return np.linalg.norm(R, axis=0)


def _m_orthonormalize(V: np.ndarray, mass: np.ndarray) -> np.ndarray:
    """Column-orthonormalize V in the M inner product via Cholesky."""
    G = V.T @ (mass[:, None] * V)
    Cho = la.cholesky(G, lower=False)
    return la.solve_triangular(Cho, V.T, trans="T", lower=False).T


def _rayleigh_ritz(A: sp.csr_matrix, mass: np.ndarray,
                   V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project (A, M) onto span(V) and solve the small dense pencil."""
    V = _m_orthonormalize(V, mass)
    Ah = V.T @ (A @ V)
    Ah = (Ah + Ah.T) / 2.0
    w, Z = la.eigh(Ah)
    return w, V @ Z


def _solve_dense(forms: AssembledForms, k: int) -> tuple[np.ndarray, np.ndarray]:
    d = 1.0 / np.sqrt(forms.mass)
    S = forms.A.toarray() * d[None, :] * d[:, None]
    S = (S + S.T) / 2.0
    w, W = la.eigh(S)
    V = d[:, None] * W[:, :k]
    return w[:k], V


def _solve_iterative(forms: AssembledForms, k: int, seed: int,
                     maxiter_per_mode: int) -> tuple[np.ndarray, np.ndarray]:
    A = forms.A
    mass = forms.mass
    n = forms.n_active
    # Eigenvalue-scale shift keeps the pencil positive definite without
    # drowning in roundoff; it is removed exactly by the final polish.
    eps = 1e-8 * float(A.diagonal().sum()) / float(mass.sum())
    K = (A + sp.diags(eps * mass)).tocsc()
    M = sp.diags(mass, format="csr")
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    ncv = min(n, max(2 * k + 10, 30))
    try:
        mu, V = spla.eigsh(K, k=k, M=M, sigma=0.0, which="LM", v0=v0,
                           ncv=ncv, maxiter=maxiter_per_mode * k, tol=0)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"shift-invert Lanczos converged {len(exc.eigenvalues)} of {k} modes "
            f"within {maxiter_per_mode * k} iterations") from exc
    order = np.argsort(mu)
    V = V[:, order]
    # Inverse-iteration polish against K, then Ritz values from the true pencil.
    lu = spla.splu(K)
    for _ in range(2):
        V = lu.solve(mass[:, None] * V)
        w, V = _rayleigh_ritz(A, mass, V)
    return w, V


def solve_smallest(forms: AssembledForms, k: int, tol: float = 1e-8,
                   method: str = "auto", dense_threshold: int = 2000,
                   seed: int = 0, maxiter_per_mode: int = 50) -> Eigenpairs:
    """Compute the k smallest eigenpairs of (A, M).

    Args:
        forms: assembled energy and mass forms.
        k: number of eigenpairs, 1 <= k <= n_active.
        tol: admissible residual ||A v - lambda M v||_2 per pair.
        method: "auto" picks dense below dense_threshold active nodes,
            otherwise shift-invert; "dense" / "shift-invert" force a path.
        dense_threshold: crossover size for the automatic choice.
        seed: seed for the iterative start vector (determinism).
        maxiter_per_mode: Lanczos iteration budget per requested mode.

    Returns Eigenpairs with ascending eigenvalues, M-orthonormal vectors and
    residuals; raises ConvergenceError if any residual exceeds tol.
    """
    n = forms.n_active
    if not 1 <= k <= n:
        raise ValueError(f"k must be between 1 and {n}, got {k}")
    if method not in ("auto", "dense", "shift-invert"):
        raise ValueError(f"unknown method {method!r}")
    use_dense = method == "dense" or (method == "auto" and n <= dense_threshold)
    if use_dense:
        w, V = _solve_dense(forms, k)
    else:
        w, V = _solve_iterative(forms, k, seed, maxiter_per_mode)
    # One more projection pass tightens clustered pairs at machine precision.
    for _ in range(3):
        res = _residuals(forms.A, forms.mass, w, V)
        if np.all(res <= tol):
            break
        w, V = _rayleigh_ritz(forms.A, forms.mass, V)
    else:
        res = _residuals(forms.A, forms.mass, w, V)
        if not np.all(res <= tol):
            raise ConvergenceError(
                f"residuals {res} exceed tol={tol} after polishing")
    gram_err = np.abs(V.T @ (forms.mass[:, None] * V) - np.eye(k)).max()
    if gram_err > 1e-8:
        raise ConvergenceError(f"M-orthonormality defect {gram_err:.3e} exceeds 1e-8")
    # Fix signs for reproducibility: largest-magnitude entry positive.
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(k)])
    signs[signs == 0] = 1.0
    V = V * signs[None, :]
    return Eigenpairs(lambdas=w.copy(), vectors=V, residuals=res)


@dataclass(frozen=True)
class MinMaxReport:
    """Outcome of the variational consistency check."""

    rayleigh_errors: np.ndarray
    random_margins: np.ndarray
    ok: bool


def check_minmax(forms: AssembledForms, pairs: Eigenpairs, n_samples: int = 50,
                 tol: float = 1e-8, seed: int = 0) -> MinMaxReport:
    """Check the min-max characterization of the computed eigenpairs.

    Verifies R[v_i] = lambda_i to tolerance, and that random vectors made
    M-orthogonal to v_1..v_{i-1} never push the Rayleigh quotient below
    lambda_i (up to tol on the scale of lambda_i).
    """
    A, mass, V, lams = forms.A, forms.mass, pairs.vectors, pairs.lambdas
    k = pairs.k
    r_err = np.empty(k)
    margins = np.empty(k)
    rng = np.random.default_rng(seed)
    for i in range(k):
        v = V[:, i]
        R = float(v @ (A @ v)) / float(v @ (mass * v))
        r_err[i] = abs(R - lams[i])
        worst = np.inf
        for _ in range(n_samples):
            z = rng.standard_normal(forms.n_active)
            if i > 0:
                z = z - V[:, :i] @ (V[:, :i].T @ (mass * z))
            denom = float(z @ (mass * z))
            if denom <= 0.0:
                continue
            worst = min(worst, float(z @ (A @ z)) / denom)
        margins[i] = worst - lams[i]
    scale = np.maximum(1.0, np.abs(lams))
    ok = bool(np.all(r_err <= tol * scale) and np.all(margins >= -tol * scale))
    return MinMaxReport(rayleigh_errors=r_err, random_margins=margins, ok=ok)
