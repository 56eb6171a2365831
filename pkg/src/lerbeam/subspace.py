"""Dominant subspace of the low exposure region steering matrix.

The left singular vectors of ``A`` ordered by decreasing singular value
give the nested subspaces used by the projection precoder.  Deflating the
user steering vector against the first ``k`` of them has closed-form user
and leakage powers, implemented here next to the direct projection so the
two can be checked against each other.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

#: Singular values below ``SIGMA_TH_REL * sigma_1`` are treated as negligible.
SIGMA_TH_REL = 1e-10

#: User power of the projection below which its direction is numerically
#: meaningless (the user lies inside the removed subspace).
DEGENERATE_TOL = 1e-24


class DegenerateProjectionError(RuntimeError):
    """The user vector lies (numerically) inside the removed subspace."""


@dataclass(frozen=True)
class SubspaceBasis:
    """Thin SVD ``A = B diag(sigma) V^H`` plus user projection coefficients.

    ``right_vectors_h`` stores ``V^H`` (r x Q) as returned by LAPACK so the
    large factor is never copied.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors_h: np.ndarray
    k_init: int
    user_coeffs: np.ndarray
    sigma_th: float
    user_vector: np.ndarray
    #: ``||a_us||^2`` outside the span of all left vectors (0 when rank = N)
    residual_power: float = 0.0

    @property
    def rank(self) -> int:
        return self.singular_values.size

    @property
    def n_antennas(self) -> int:
        return self.left_vectors.shape[0]

    @property
    def right_vectors(self) -> np.ndarray:
        return self.right_vectors_h.conj().T

    def with_user(self, a_us) -> "SubspaceBasis":
        """Same LER factors, coefficients recomputed for another user vector."""
        a_us = np.asarray(a_us, dtype=np.complex128)
        c, res = _coefficients(self.left_vectors, a_us)
        return dataclasses.replace(self, user_coeffs=c, user_vector=a_us, residual_power=res)

    def spectrum(self) -> np.ndarray:
        """Singular values relative to the largest one."""
        return self.singular_values / self.singular_values[0]


def compute_basis(A, a_us, sigma_th_rel: float = SIGMA_TH_REL) -> SubspaceBasis:
    A = np.asarray(A, dtype=np.complex128)
    a_us = np.asarray(a_us, dtype=np.complex128)
    if A.ndim != 2 or A.shape[1] < 1:
        raise ValueError("A must be an N x Q matrix with Q >= 1")
    if a_us.shape != (A.shape[0],):
        raise ValueError("a_us length does not match the rows of A")
    # Direct thin SVD: the Gram route squares the spectrum and cannot
    # resolve sigma_j / sigma_1 = 1e-10 in double precision.
    B, sigma, Vh = np.linalg.svd(A, full_matrices=False)
    if not sigma[0] > 0:
        raise RuntimeError("steering matrix is numerically zero")
    sigma_th = sigma_th_rel * sigma[0]
    c, res = _coefficients(B, a_us)
    return SubspaceBasis(
        left_vectors=B,
        singular_values=sigma,
        right_vectors_h=Vh,
        k_init=int(np.count_nonzero(sigma > sigma_th)),
        user_coeffs=c,
        sigma_th=float(sigma_th),
        user_vector=a_us,
        residual_power=res,
    )


def _outside(B, a):
    """Component of ``a`` orthogonal to the columns of ``B`` (zero if B is square)."""
    if B.shape[1] >= B.shape[0]:
        return np.zeros_like(a)
    return a - B @ (B.conj().T @ a)


def _coefficients(B, a):
    out = _outside(B, a)
    return B.conj().T @ a, float(np.vdot(out, out).real)


def _check_k(basis: SubspaceBasis, k: int) -> int:
    if not 0 <= k <= basis.rank:
        raise ValueError(f"k={k} outside [0, {basis.rank}]")
    return int(k)


def project_out(a_us, basis: SubspaceBasis, k: int) -> np.ndarray:
    """Remove the components of ``a_us`` along the ``k`` dominant left vectors.

    Built from the kept components rather than by subtraction, so the
    result keeps full relative accuracy when little of ``a_us`` survives.
    """
    k = _check_k(basis, k)
    a_us = np.asarray(a_us, dtype=np.complex128)
    B = basis.left_vectors
    c = basis.user_coeffs if a_us is basis.user_vector else B.conj().T @ a_us
    return B[:, k:] @ c[k:] + _outside(B, a_us)


def projected_power(basis: SubspaceBasis, k: int) -> float:
    """``||a_proj||^2`` for ``k`` removed vectors, summed over the kept tail."""
    k = _check_k(basis, k)
    return float(np.sum(np.abs(basis.user_coeffs[k:]) ** 2)) + basis.residual_power


def is_degenerate(basis: SubspaceBasis, k: int) -> bool:
    return projected_power(basis, k) <= DEGENERATE_TOL


def _denominator(basis: SubspaceBasis, k: int) -> float:
    den = projected_power(basis, k)
    if den <= DEGENERATE_TOL:
        raise DegenerateProjectionError(
            f"user vector lies in the {k}-dimensional dominant subspace (residual {den:.3e})"
        )
    return den


def user_power_closed_form(basis: SubspaceBasis, k: int) -> float:
    """User power of the normalized projection, ``1 - sum_{j<k} |c_j|^2``.

    Evaluated as the equivalent tail sum, which does not cancel.
    """
    return _denominator(basis, _check_k(basis, k))


def ler_power_closed_form(basis: SubspaceBasis, k: int, q=None) -> np.ndarray | float:
    """Leakage power at LER column(s) ``q`` for the projection with ``k`` vectors.

    ``q=None`` returns the whole row of Q values.  Components of the user
    vector outside the column space of ``A`` are invisible to every
    ``a_q``, so the expression also holds when rank < N.
    """
    k = _check_k(basis, k)
    den = _denominator(basis, k)
    cols = slice(None) if q is None else q
    Vh_tail = basis.right_vectors_h[k:, cols]
    weights = basis.user_coeffs[k:] * basis.singular_values[k:]
    # b_j^H a_q = sigma_j conj(V[q, j]) = sigma_j Vh[j, q]
    amp = weights.conj() @ Vh_tail
    out = np.abs(amp) ** 2 / den
    return float(out) if np.ndim(out) == 0 else out
