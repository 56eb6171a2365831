"""Precoders for a user with a low exposure region (LER) constraint.

Every precoder returns a unit-norm weight vector ``w`` applied as
``w^H a(r)``; the MRT user power is therefore 1 (0 dB) and all powers are
implicitly relative to MRT.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .subspace import (
    DegenerateProjectionError,
    SubspaceBasis,
    is_degenerate,
    project_out,
    user_power_closed_form,
)

#: Relative slack when testing |w^H a_q|^2 <= t on the sampled grid.
FEASIBILITY_RTOL = 1e-9

#: Rank tolerance (relative to sigma_1) used by ZF to decide whether the
#: sampled steering vectors span the whole antenna space.
ZF_RANK_RTOL = 10 * np.finfo(float).eps


class Method(str, enum.Enum):
    MRT = "mrt"
    ZF = "zf"
    DOSP = "dosp"
    RIDGE = "ridge"
    SOCP = "socp"


class PrecoderError(RuntimeError):
    """Base class for precoder failures that map to CLI exit code 3."""


class NullProjectionError(PrecoderError):
    pass


class InfeasibleInitError(PrecoderError):
    pass


class BracketError(PrecoderError):
    pass


@dataclass(frozen=True)
class ThresholdSpec:
    """LER power threshold relative to MRT."""

    t_db_rel_mrt: float

    @property
    def t_linear(self) -> float:
        return 10.0 ** (self.t_db_rel_mrt / 10.0)

    @property
    def alpha_linear(self) -> float:
        """Off-grid tolerance, ten times the threshold."""
        return 10.0 * self.t_linear

    def bound(self) -> float:
        return self.t_linear * (1.0 + FEASIBILITY_RTOL)

    @classmethod
    def from_linear(cls, t: float) -> "ThresholdSpec":
        if not t > 0:
            raise ValueError("threshold must be positive")
        return cls(10.0 * np.log10(t))


@dataclass
class PrecoderResult:
    weights: np.ndarray
    method: Method
    k_used: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        w = np.asarray(self.weights, dtype=np.complex128)
        return {
            "method": Method(self.method).value,
            "k_used": self.k_used,
            "diagnostics": {k: _jsonable(v) for k, v in sorted(self.diagnostics.items())},
            "weights": np.column_stack([w.real, w.imag]).ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PrecoderResult":
        flat = np.asarray(data["weights"], dtype=float).reshape(-1, 2)
        return cls(
            weights=flat[:, 0] + 1j * flat[:, 1],
            method=Method(data["method"]),
            k_used=data.get("k_used"),
            diagnostics=dict(data.get("diagnostics", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def grid_max_power(w, A) -> float:
    """Largest ``|w^H a_q|^2`` over the columns of ``A``."""
    amp = np.asarray(w).conj() @ A
    return float(np.max(amp.real**2 + amp.imag**2))


def mrt(a_us) -> PrecoderResult:
    a_us = np.asarray(a_us, dtype=np.complex128)
    w = _unit(a_us.copy())
    return PrecoderResult(w, Method.MRT, diagnostics={"user_power": float(abs(np.vdot(w, a_us)) ** 2)})


def zf(A, a_us, basis: SubspaceBasis | None = None) -> PrecoderResult:
    """Normalized projection of ``a_us`` onto the nullspace of ``A^H``.

    The column space of ``A`` is taken with essentially exact-arithmetic
    rank: only directions with singular value below ``ZF_RANK_RTOL * sigma_1``
    (exact duplicates, in practice) are ignored.  With more sampled
    positions than antennas the steering vectors span everything and the
    projection vanishes.
    """
    A = np.asarray(A, dtype=np.complex128)
    a_us = np.asarray(a_us, dtype=np.complex128)
    if basis is None:
        B, sigma, _ = np.linalg.svd(A, full_matrices=False)
    else:
        B, sigma = basis.left_vectors, basis.singular_values
    rank = int(np.count_nonzero(sigma > ZF_RANK_RTOL * sigma[0]))
    if rank >= A.shape[0]:
        raise NullProjectionError(
            f"steering matrix has full rank {rank} = N; zero-forcing projection is the null vector"
        )
    Br = B[:, :rank]
    a_perp = a_us - Br @ (Br.conj().T @ a_us)
    norm = np.linalg.norm(a_perp)
    if norm <= 1e-8:
        raise NullProjectionError(f"zero-forcing projection has norm {norm:.3e}")
    w = a_perp / norm
    return PrecoderResult(
        w, Method.ZF,
        diagnostics={
            "rank": rank,
            "user_power": float(abs(np.vdot(w, a_us)) ** 2),
            "grid_max_power": grid_max_power(w, A),
        },
    )


class _LeakageTracker:
    """Incremental ``A^H a_proj`` as basis vectors are added back one by one.

    ``A^H a_proj(k) = sum_{j >= k} sigma_j c_j v_j``; lowering ``k`` by one
    adds a single length-Q term.
    """

    def __init__(self, basis: SubspaceBasis, k: int):
        self.basis = basis
        self.weights = (basis.user_coeffs * basis.singular_values).conj()
        self.k = k
        self.amp = self.weights[k:] @ basis.right_vectors_h[k:]

    def step_down(self) -> None:
        self.k -= 1
        self.amp = self.amp + self.weights[self.k] * self.basis.right_vectors_h[self.k]

    def max_power(self) -> float:
        """Grid maximum of the normalized projection.

        When almost nothing of the user vector survives the projection its
        direction is numerical noise; any unit vector orthogonal to the
        first ``k`` left vectors leaks at most ``sigma_k^2`` though, and
        that bound is returned instead.
        """
        b = self.basis
        if is_degenerate(b, self.k):
            return float(b.singular_values[self.k] ** 2) if self.k < b.rank else 0.0
        den = user_power_closed_form(b, self.k)
        return float(np.max(self.amp.real**2 + self.amp.imag**2)) / den


def _closed_form_max(basis: SubspaceBasis, k: int) -> float:
    return _LeakageTracker(basis, k).max_power()


def dosp(basis: SubspaceBasis, threshold: ThresholdSpec, A=None, search: str = "linear") -> PrecoderResult:
    """Dominant subspace projection with a decreasing search over ``k``.

    Starting from ``basis.k_init``, ``k`` is lowered while the sampled LER
    constraint still holds; the returned ``k_used`` is the last feasible
    value.  ``search="bisect"`` assumes the grid maximum is monotone in
    ``k`` on ``[0, k_init]`` and finds the same boundary in O(log k_init)
    evaluations.  If ``A`` is given, the final grid maximum is also
    evaluated directly and reported as ``grid_max_power``.
    """
    bound = threshold.bound()
    k_init = basis.k_init
    t0 = time.perf_counter()
    tracker = _LeakageTracker(basis, k_init)
    init_max = tracker.max_power()
    if init_max > bound:
        raise InfeasibleInitError(
            f"k_init={k_init} already violates the threshold: "
            f"max leakage {init_max:.3e} > t={threshold.t_linear:.3e}"
        )
    evaluations = 1
    violated_below = None
    if search == "linear":
        history = [init_max]
        while tracker.k > 0:
            tracker.step_down()
            evaluations += 1
            m = tracker.max_power()
            history.append(m)
            if m > bound:
                violated_below = m
                tracker.k += 1
                break
        k_opt = tracker.k
        max_closed = history[-2] if violated_below is not None else history[-1]
    elif search == "bisect":
        lo, hi = -1, k_init  # hi feasible, lo infeasible (-1 is a sentinel)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            evaluations += 1
            if _closed_form_max(basis, mid) <= bound:
                hi = mid
            else:
                lo = mid
        k_opt = hi
        max_closed = _closed_form_max(basis, k_opt)
        if k_opt > 0:
            violated_below = _closed_form_max(basis, k_opt - 1)
    else:
        raise ValueError(f"unknown search {search!r}")

    if is_degenerate(basis, k_opt):
        raise DegenerateProjectionError(
            f"user vector lies in the dominant subspace for every feasible k (k_opt={k_opt})"
        )
    a_proj = project_out(basis.user_vector, basis, k_opt)
    w = _unit(a_proj)
    elapsed = time.perf_counter() - t0
    diag = {
        "k_init": k_init,
        "k_opt": k_opt,
        "search": search,
        "evaluations": evaluations,
        "user_power": user_power_closed_form(basis, k_opt),
        "grid_max_power_closed_form": max_closed,
        "search_seconds": elapsed,
    }
    if violated_below is not None:
        diag["grid_max_power_below"] = violated_below
    if A is not None:
        diag["grid_max_power"] = grid_max_power(w, A)
    return PrecoderResult(w, Method.DOSP, k_used=k_opt, diagnostics=diag)


def ridge_baseline(A, a_us, threshold: ThresholdSpec, max_iter: int = 200, rtol: float = 0.01) -> PrecoderResult:
    """Regularized inverse ``(mu I + A A^H)^{-1} a_us`` with ``mu`` tuned by bisection.

    Not a method from the literature being reproduced: it is a simple third
    comparison point.  ``mu`` trades leakage (small ``mu``) against user
    power (large ``mu``, MRT in the limit); bisection on ``log mu`` puts the
    sampled grid maximum within ``rtol`` below the threshold.
    """
    A = np.asarray(A, dtype=np.complex128)
    a_us = np.asarray(a_us, dtype=np.complex128)
    t0 = time.perf_counter()
    lam, U = np.linalg.eigh(A @ A.conj().T)
    lam = np.clip(lam, 0.0, None)
    c = U.conj().T @ a_us
    M = A.conj().T @ U
    precompute = time.perf_counter() - t0
    t = threshold.t_linear
    bound = threshold.bound()

    def grid_max(log_mu: float) -> float:
        d = c / (np.exp(log_mu) + lam)
        amp = M @ d  # conj(w^H A) for w = U d
        return float(np.max(amp.real**2 + amp.imag**2) / np.sum(np.abs(d) ** 2))

    def weights(log_mu: float) -> np.ndarray:
        return _unit(U @ (c / (np.exp(log_mu) + lam)))

    lam_max = float(lam[-1])
    hi = np.log(lam_max) + np.log(1e6)
    if grid_max(hi) <= bound:
        w = _unit(a_us.copy())
        if grid_max_power(w, A) <= bound:
            return PrecoderResult(w, Method.RIDGE, diagnostics={
                "mu": float("inf"), "iterations": 0, "monotone": True,
                "user_power": 1.0, "grid_max_power": grid_max_power(w, A),
                "precompute_seconds": precompute, "label": "ridge (non-literature baseline)",
            })
    lo = np.log(lam_max) + np.log(1e-12)
    while grid_max(lo) > bound:
        lo -= np.log(1e3)
        if lo < np.log(lam_max) + np.log(1e-60):
            raise BracketError("no feasible regularization found")
    sweep = [grid_max(x) for x in np.linspace(lo, hi, 25)]
    monotone = bool(np.all(np.diff(sweep) >= -1e-9 * np.abs(np.asarray(sweep[1:]))))

    iterations = 0
    f_lo = grid_max(lo)
    while f_lo < (1.0 - rtol) * t:
        if iterations >= max_iter:
            raise BracketError(f"bisection did not reach {rtol:.0%} of t in {max_iter} iterations")
        iterations += 1
        mid = 0.5 * (lo + hi)
        f_mid = grid_max(mid)
        if f_mid <= bound:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    w = weights(lo)
    return PrecoderResult(w, Method.RIDGE, diagnostics={
        "mu": float(np.exp(lo)),
        "iterations": iterations,
        "monotone": monotone,
        "user_power": float(abs(np.vdot(w, a_us)) ** 2),
        "grid_max_power": grid_max_power(w, A),
        "precompute_seconds": precompute,
        "label": "ridge (non-literature baseline)",
    })
