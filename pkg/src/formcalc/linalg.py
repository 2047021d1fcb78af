"""Dense linear algebra helpers shared across modules.

Conventions used everywhere:

* grams are stored as ``G[i, j] = t(b_i, b_j)`` with ``t`` linear in the
  first slot and conjugate linear in the second;
* for coefficient vectors ``c, d`` the form value is
  ``sum_ij c_i * conj(d_j) * G[i, j]`` (see :func:`gram_inner`);
* the quadratic ``t(x, x)`` in the original coefficients is the Hermitian
  quadratic form of ``conj(G)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NotPositive


def gram_inner(G: np.ndarray, c: np.ndarray, d: np.ndarray) -> complex:
    """Form value sum_ij c_i conj(d_j) G[i, j]."""
    return complex(np.einsum("i,ij,j->", c, G, np.conj(d)))


def gram_quadratic(G: np.ndarray, c: np.ndarray) -> float:
    """Real quadratic t(x, x); imaginary part must be numerical noise."""
    v = gram_inner(G, c, c)
    return float(v.real)


def hermitian_residual(G: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(G)), 1e-300)
    return float(np.linalg.norm(G - G.conj().T)) / scale


def assert_hermitian(G: np.ndarray, tol: float = 1e-12, what: str = "gram"):
    res = hermitian_residual(G)
    if res > tol:
        raise NotPositive(f"{what} is not Hermitian (residual {res:.3e})")


def min_eigenvalue(G: np.ndarray) -> float:
    return float(scipy.linalg.eigvalsh(G)[0])


def assert_psd(G: np.ndarray, tol: float = 1e-12, what: str = "gram"):
    assert_hermitian(G, max(tol, 1e-12), what)
    lam = min_eigenvalue(G)
    scale = max(float(np.linalg.norm(G, 2)), 1.0)
    if lam < -tol * scale:
        raise NotPositive(f"{what} has negative eigenvalue {lam:.3e}")


def pivoted_cholesky(G: np.ndarray, tol: float | None = None):
    """Column-pivoted Cholesky of a Hermitian PSD matrix.

    Returns ``(L, piv, rank)`` with ``G[piv][:, piv] ~= L L^H`` on the
    leading ``rank`` block.  The pivot threshold defaults to
    ``1e-10 * max diagonal``, the kernel-quotient rule used by the
    factorization module.
    """
    A = np.array(G, dtype=complex)
    n = A.shape[0]
    piv = np.arange(n)
    dmax = float(np.max(np.abs(np.diag(A).real))) if n else 0.0
    if tol is None:
        tol = 1e-10 * max(dmax, 1e-300)
    rank = n
    for k in range(n):
        d = np.real(np.diag(A)).copy()
        j = k + int(np.argmax(d[k:]))
        pivot = d[j]
        if pivot <= tol:
            rank = k
            break
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            A[[k, j], :] = A[[j, k], :]
            piv[[k, j]] = piv[[j, k]]
        A[k, k] = np.sqrt(pivot)
        A[k + 1:, k] /= A[k, k]
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], np.conj(A[k + 1:, k]))
        A[k, k + 1:] = 0.0
    L = np.tril(A)[:, :rank]
    return L, piv, rank


def smallest_generalized_eig(Gq: np.ndarray, S: np.ndarray,
                             pivot_rel: float = 1e-12) -> float:
    """Smallest eigenvalue of the pencil (Gq, S), S Hermitian PD.

    Reduction to standard form via the Cholesky factor of S; pivot
    threshold ``pivot_rel * max diagonal`` guards near-singular basis
    grams.
    """
    S = np.asarray(S, dtype=complex)
    dmax = float(np.max(np.abs(np.diag(S).real)))
    if min_eigenvalue(S) <= pivot_rel * max(dmax, 1e-300):
        raise NotPositive("basis gram numerically singular")
    R = scipy.linalg.cholesky(S, lower=False)
    W = scipy.linalg.solve_triangular(R.conj().T, Gq, lower=True)
    W = scipy.linalg.solve_triangular(R.conj().T, W.conj().T, lower=True).conj().T
    W = 0.5 * (W + W.conj().T)
    return float(scipy.linalg.eigvalsh(W)[0])


def operator_norm(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def rank_of(M: np.ndarray, rel_tol: float = 1e-10) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def relative_residual(delta, scale_terms) -> float:
    scale = max(*[float(s) for s in scale_terms], 1e-300)
    return float(delta) / scale
