"""Exact convex baseline: the phase-fixed SOCP form of the LER problem.

    maximize    Re{w^H a_us}
    subject to  |w^H a_q| <= sqrt(t),   q = 1..Q
                Re{w^H a_us} >= 0,  Im{w^H a_us} = 0
                ||w||_2 <= 1

The complex problem is lifted to ``x = [Re w; Im w]`` and solved with a
primal-dual interior-point method (Nesterov-Todd scaling, Mehrotra
predictor-corrector) over one linear cone, Q three-dimensional Lorentz
cones and one (2N+1)-dimensional Lorentz cone for the norm ball.  The
leakage cones are scaled by ``1/sqrt(t)`` so all slacks are O(1).

Conic form used internally::

    minimize c^T x  s.t.  G x + s = h,  E x = 0,  s in K
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

#: Acceptance bar for a certified optimum (relative duality gap).
CERT_GAP = 1e-6

#: When rounding stops progress before ``tol`` is met, the last iterate still
#: counts as optimal if it is within these (relative gap, residual) bounds.
ACCEPT_GAP = 1e-7
ACCEPT_RES = 1e-8


class SocpError(RuntimeError):
    pass


class SocpIterationLimit(SocpError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class SocpProblem:
    A: np.ndarray
    a_us: np.ndarray
    t_linear: float

    def __post_init__(self):
        if not self.t_linear > 0:
            raise ValueError("SOCP baseline needs t > 0 (t = 0 is zero-forcing)")
        A = np.asarray(self.A)
        if A.ndim != 2 or np.asarray(self.a_us).shape != (A.shape[0],):
            raise ValueError("inconsistent dimensions between A and a_us")

    def to_dict(self) -> dict:
        A = np.asarray(self.A, dtype=np.complex128)
        a = np.asarray(self.a_us, dtype=np.complex128)
        return {
            "format": "lerbeam-socp-problem/1",
            "n_antennas": int(A.shape[0]),
            "n_constraints": int(A.shape[1]),
            "t_linear": float(self.t_linear),
            "a_us": {"real": a.real.tolist(), "imag": a.imag.tolist()},
            "A": {"real": A.real.tolist(), "imag": A.imag.tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SocpProblem":
        A = np.asarray(d["A"]["real"]) + 1j * np.asarray(d["A"]["imag"])
        a = np.asarray(d["a_us"]["real"]) + 1j * np.asarray(d["a_us"]["imag"])
        return cls(A, a, float(d["t_linear"]))


@dataclass
class SocpSolution:
    weights: np.ndarray
    raw_weights: np.ndarray
    objective: float
    duality_gap: float
    max_constraint_violation: float
    iterations: int
    wall_time: float
    status: str
    certified: bool
    z_lin: np.ndarray = field(repr=False, default=None)
    z_soc: np.ndarray = field(repr=False, default=None)
    z_ball: np.ndarray = field(repr=False, default=None)
    y: np.ndarray = field(repr=False, default=None)
    warm_start: bool = False
    message: str = ""
    history: list = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        w = np.asarray(self.weights)
        return {
            "format": "lerbeam-socp-solution/1",
            "status": self.status,
            "certified": self.certified,
            "objective": self.objective,
            "duality_gap": self.duality_gap,
            "max_constraint_violation": self.max_constraint_violation,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "warm_start": self.warm_start,
            "message": self.message,
            "weights": np.column_stack([w.real, w.imag]).ravel().tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# -- problem data in real coordinates -------------------------------------

class _Data:
    def __init__(self, problem: SocpProblem):
        A = np.asarray(problem.A, dtype=np.complex128)
        a = np.asarray(problem.a_us, dtype=np.complex128)
        self.n = A.shape[0]
        self.q = A.shape[1]
        self.sqrt_t = float(np.sqrt(problem.t_linear))
        # Re{w^H a} = [ar, ai] . x ;  Im{w^H a} = [ai, -ar] . x
        self.p_us = np.concatenate([a.real, a.imag])
        self.e_us = np.concatenate([a.imag, -a.real])
        At = A.T
        self.P = np.hstack([At.real, At.imag]) / self.sqrt_t
        self.R = np.hstack([At.imag, -At.real]) / self.sqrt_t
        self.c = -self.p_us
        self.m = 1 + self.q + 1  # cone degree

    def G(self, x):
        lin = np.array([-self.p_us @ x])
        soc = np.column_stack([np.zeros(self.q), -(self.P @ x), -(self.R @ x)])
        ball = np.concatenate([[0.0], -x])
        return lin, soc, ball

    def GT(self, lin, soc, ball):
        return -self.p_us * lin[0] - self.P.T @ soc[:, 1] - self.R.T @ soc[:, 2] - ball[1:]

    def slack(self, x):
        lin, soc, ball = self.G(x)
        soc[:, 0] += 1.0
        ball[0] += 1.0
        return -lin, _neg_tail(soc), _neg_ball(ball)


def _neg_tail(soc):
    out = soc.copy()
    out[:, 1:] *= -1
    return out


def _neg_ball(ball):
    out = ball.copy()
    out[1:] *= -1
    return out


# -- Lorentz cone algebra (rows of a 2-D array are cones) ------------------

def _jdot(u, v):
    return u[..., 0] * v[..., 0] - np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def _tail_norm(u):
    return np.sqrt(np.sum(u[..., 1:] * u[..., 1:], axis=-1))


def _jnorm(u):
    tail = _tail_norm(u)
    return np.sqrt(np.maximum((u[..., 0] - tail) * (u[..., 0] + tail), 0.0))


def _jprod(u, v):
    out = np.empty_like(u)
    out[..., 0] = np.sum(u * v, axis=-1)
    out[..., 1:] = u[..., :1] * v[..., 1:] + v[..., :1] * u[..., 1:]
    return out


def _jdiv(lam, r):
    """Solve ``lam o x = r`` for x."""
    det = _jdot(lam, lam)
    x = np.empty_like(r)
    x0 = (lam[..., 0] * r[..., 0] - np.sum(lam[..., 1:] * r[..., 1:], axis=-1)) / det
    x[..., 0] = x0
    x[..., 1:] = (r[..., 1:] - x0[..., None] * lam[..., 1:]) / lam[..., :1]
    return x


def _max_step(u, d):
    """Largest alpha with u + alpha d in the cone (u strictly inside); inf if unbounded."""
    un = np.linalg.norm(u[..., 1:], axis=-1)
    c = (u[..., 0] - un) * (u[..., 0] + un)
    b = u[..., 0] * d[..., 0] - np.sum(u[..., 1:] * d[..., 1:], axis=-1)
    a = _jdot(d, d)
    alpha = np.full(c.shape, np.inf)
    disc = b * b - a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.maximum(disc, 0.0))
        qq = -(b + np.where(b >= 0, sq, -sq))
        r1 = np.where(qq != 0, c / qq, np.inf)
        r2 = np.where(a != 0, qq / a, np.inf)
    for r in (r1, r2):
        ok = (disc >= 0) & (r > 0)
        alpha = np.where(ok, np.minimum(alpha, r), alpha)
    lin = (a == 0) & (b < 0)
    alpha = np.where(lin, np.minimum(alpha, -c / (2 * np.where(lin, b, -1.0))), alpha)
    return float(np.min(alpha)) if alpha.size else np.inf


class _Scaling:
    """Nesterov-Todd scaling for one linear cone, Q small cones and the ball."""

    def __init__(self, s, z):
        s_lin, s_soc, s_ball = s
        z_lin, z_soc, z_ball = z
        self.d_lin = np.sqrt(s_lin / z_lin)
        self.lam_lin = np.sqrt(s_lin * z_lin)
        self.soc = self._nt(s_soc, z_soc)
        self.ball = self._nt(s_ball[None, :], z_ball[None, :])
        self.lam_soc = self._apply(self.soc, z_soc)
        self.lam_ball = self._apply(self.ball, z_ball[None, :])[0]

    @staticmethod
    def _nt(s, z):
        sn = _jnorm(s)
        zn = _jnorm(z)
        sb = s / sn[:, None]
        zb = z / zn[:, None]
        gamma = np.sqrt((1.0 + np.sum(sb * zb, axis=1)) / 2.0)
        # scaling point wb = (sb + J zb) / (2 gamma); W = beta (2 v v^T - J)
        # with v = (wb + e) / sqrt(2 (wb_0 + 1))
        wb = sb.copy()
        wb[:, 1:] -= zb[:, 1:]
        wb[:, 0] += zb[:, 0]
        wb /= (2.0 * gamma)[:, None]
        v = wb
        v[:, 0] += 1.0
        v /= np.sqrt(2.0 * v[:, 0])[:, None]
        beta = np.sqrt(sn / zn)
        return v, beta

    @staticmethod
    def _apply(nt, u):  # W u = beta (2 v v^T u - J u)
        v, beta = nt
        out = 2.0 * v * np.sum(v * u, axis=1)[:, None]
        out[:, 0] -= u[:, 0]
        out[:, 1:] += u[:, 1:]
        return beta[:, None] * out

    @staticmethod
    def _apply_inv(nt, u):  # W^-1 u = (2 Jv (Jv)^T u - J u) / beta
        v, beta = nt
        jv = v.copy()
        jv[:, 1:] *= -1
        out = 2.0 * jv * np.sum(jv * u, axis=1)[:, None]
        out[:, 0] -= u[:, 0]
        out[:, 1:] += u[:, 1:]
        return out / beta[:, None]

    def W(self, u):
        lin, soc, ball = u
        return (self.d_lin * lin, self._apply(self.soc, soc), self._apply(self.ball, ball[None, :])[0])

    def Winv(self, u):
        lin, soc, ball = u
        return (lin / self.d_lin, self._apply_inv(self.soc, soc), self._apply_inv(self.ball, ball[None, :])[0])

    def lam(self):
        return self.lam_lin, self.lam_soc, self.lam_ball


def _tmap(f, *us):
    return tuple(f(*parts) for parts in zip(*us))


def _dot(u, v):
    return float(u[0] @ v[0] + np.sum(u[1] * v[1]) + u[2] @ v[2])


def _cone_prod(u, v):
    return (u[0] * v[0], _jprod(u[1], v[1]), _jprod(u[2][None], v[2][None])[0])


def _cone_div(lam, r):
    return (r[0] / lam[0], _jdiv(lam[1], r[1]), _jdiv(lam[2][None], r[2][None])[0])


def _cone_step(u, d):
    a = np.inf
    neg = d[0] < 0
    if np.any(neg):
        a = min(a, float(np.min(-u[0][neg] / d[0][neg])))
    a = min(a, _max_step(u[1], d[1]))
    a = min(a, _max_step(u[2][None], d[2][None]))
    return a


def _identity(data: _Data):
    soc = np.zeros((data.q, 3))
    soc[:, 0] = 1.0
    ball = np.zeros(2 * data.n + 1)
    ball[0] = 1.0
    return np.ones(1), soc, ball


class _KKT:
    """Scaled KKT solver built on a QR factorization of ``W^-1 G``.

    Forming the normal matrix ``G^T W^-2 G`` squares a condition number
    that reaches 1e8 near the optimum, after which the dual equation can
    no longer be solved.  Working with the orthogonal factor keeps that
    equation backward stable.
    """

    def __init__(self, data: _Data, sc: _Scaling):
        self.data = data
        self.sc = sc
        n2 = 2 * data.n
        q = data.q
        gt = np.empty((1 + 3 * q + n2 + 1, n2))
        gt[0] = -data.p_us / sc.d_lin[0]
        # Lorentz block: W^-1 = (2 u u^T - J) / beta with u = J v
        v, beta = sc.soc
        u = v.copy()
        u[:, 1:] *= -1
        ug = -(u[:, 1, None] * data.P + u[:, 2, None] * data.R)  # u^T G per cone
        blk = gt[1:1 + 3 * q].reshape(q, 3, n2)
        blk[:, 0] = 2.0 * u[:, 0, None] * ug
        blk[:, 1] = 2.0 * u[:, 1, None] * ug - data.P
        blk[:, 2] = 2.0 * u[:, 2, None] * ug - data.R
        blk /= beta[:, None, None]
        vb, bb = sc.ball
        ub = vb[0].copy()
        ub[1:] *= -1
        ut = ub[1:]
        tail = -2.0 * np.outer(ut, ut)
        tail[np.diag_indices_from(tail)] -= 1.0
        gt[1 + 3 * q] = -2.0 * ub[0] * ut / bb[0]
        gt[2 + 3 * q:] = tail / bb[0]
        self.Q, self.R = linalg.qr(gt, mode="economic", check_finite=False)
        self.eR = self._rt_solve(data.e_us)
        self.schur = float(self.eR @ self.eR)

    def _rt_solve(self, b):
        return linalg.solve_triangular(self.R, b, trans="T", check_finite=False)

    def solve(self, rx, ry, rz):
        """Solve E^T dy + G^T dz = rx, E dx = ry, G dx - W^2 dz = rz.

        Returns ``dx, dy, dz`` and the scaled ``W dz``.
        """
        d = self.data
        sc = self.sc
        rt = _flatten(sc.Winv(rz))
        u0 = self._rt_solve(rx) + self.Q.T @ rt
        dy = (self.eR @ u0 - ry) / self.schur
        u = u0 - self.eR * dy
        dx = linalg.solve_triangular(self.R, u, check_finite=False)
        dzt = _unflatten(self.Q @ u - rt, d.q)
        return dx, dy, sc.Winv(dzt), dzt


def _flatten(u):
    return np.concatenate([u[0], u[1].ravel(), u[2]])


def _unflatten(f, q):
    return f[:1].copy(), f[1:1 + 3 * q].reshape(q, 3).copy(), f[1 + 3 * q:].copy()


def _strict_start(data: _Data, a_us, A, w0=None):
    if w0 is None:
        w0 = np.asarray(a_us, dtype=np.complex128)
    w0 = np.asarray(w0, dtype=np.complex128)
    inner = np.vdot(w0, a_us)
    if abs(inner) > 0:
        w0 = w0 * (inner / abs(inner))  # make w^H a_us real positive
    lk = np.max(np.abs(w0.conj() @ A))
    rho = 0.5 * min(1.0 / np.linalg.norm(w0), data.sqrt_t / lk if lk > 0 else np.inf)
    w = rho * w0
    return np.concatenate([w.real, w.imag])


def _analytic_mrt(problem: SocpProblem, data: _Data, t_start: float) -> SocpSolution:
    a = np.asarray(problem.a_us, dtype=np.complex128)
    w = a / np.linalg.norm(a)
    soc = np.zeros((data.q, 3))
    ball = np.concatenate([[np.linalg.norm(data.c)], data.c])
    return SocpSolution(
        weights=w, raw_weights=w.copy(), objective=float(np.vdot(w, a).real),
        duality_gap=0.0, max_constraint_violation=0.0, iterations=0,
        wall_time=time.perf_counter() - t_start, status="optimal", certified=True,
        z_lin=np.zeros(1), z_soc=soc, z_ball=ball, y=np.zeros(1),
    )


def solve_p2(problem: SocpProblem, max_iter: int = 100, tol: float = 1e-10,
             time_budget: float | None = None, cancel=None, warm_start=None,
             verbose: bool = False) -> SocpSolution:
    """Solve the SOCP to an absolute duality gap and residual of ``tol``.

    ``cancel`` is any object with ``is_set()`` (e.g. ``threading.Event``),
    polled between iterations; together with ``time_budget`` it ends the
    solve early and returns the current (primal feasible) iterate with
    ``certified=False``.  ``warm_start`` is an optional weight vector used
    as the primal starting point.
    """
    t_start = time.perf_counter()
    A = np.asarray(problem.A, dtype=np.complex128)
    a_us = np.asarray(problem.a_us, dtype=np.complex128)
    data = _Data(problem)
    if np.max(np.abs(a_us.conj() @ A)) ** 2 <= problem.t_linear:
        return _analytic_mrt(problem, data, t_start)

    x = _strict_start(data, a_us, A, warm_start)
    s = data.slack(x)
    z = _identity(data)
    y = np.zeros(1)
    e = _identity(data)
    history = []
    status = "max_iter"
    message = ""
    it = 0
    best = None
    while True:
        rx = data.c + data.e_us * y[0] + data.GT(*z)
        ry = np.array([data.e_us @ x])
        gx = data.G(x)
        rz = _tmap(lambda g, si, hi: g + si - hi, gx, s, _h(data))
        gap = _dot(s, z)
        pcost = float(data.c @ x)
        dcost = pcost - gap  # equals -h^T z at a primal-dual feasible pair
        res_p = max(abs(ry[0]), max(float(np.max(np.abs(r))) for r in rz))
        res_d = float(np.max(np.abs(rx)))
        history.append({"it": it, "pcost": pcost, "gap": gap, "res_p": res_p, "res_d": res_d})
        if verbose:
            print(f"{it:3d} pcost={pcost:+.12f} gap={gap:.3e} res_p={res_p:.2e} res_d={res_d:.2e}")
        merit = max(gap / max(1.0, abs(pcost)), res_p, res_d)
        if best is None or merit <= best[-1]:
            best = (x, y, z, s, gap, res_p, res_d, merit)
        if merit <= tol:
            status = "optimal"
            message = "tolerance reached"
            break
        if cancel is not None and cancel.is_set():
            status, message = "cancelled", "cancellation requested"
            break
        if time_budget is not None and time.perf_counter() - t_start > time_budget:
            status, message = "time_budget", f"time budget {time_budget}s exhausted"
            break
        if it >= max_iter:
            break
        it += 1

        sc = _Scaling(s, z)
        lam = sc.lam()
        try:
            kkt = _KKT(data, sc)
        except (np.linalg.LinAlgError, linalg.LinAlgError):
            status, message = "stalled", "KKT factorization failed"
            break
        mu = gap / data.m

        def direction(rc):
            # G dx - W^2 dz = -rz - W (lam \ rc)
            wl = sc.W(_cone_div(lam, rc))
            rhs_z = _tmap(lambda a, b: -a - b, rz, wl)
            dx, dy, dz, dzt = kkt.solve(-rx, -ry[0], rhs_z)
            dst = _tmap(lambda a, b: a - b, _cone_div(lam, rc), dzt)
            return dx, dy, dz, dst, dzt

        rc_aff = _tmap(lambda a: -a, _cone_prod(lam, lam))
        dx, dy, dz, dst, dzt = direction(rc_aff)
        a_aff = min(1.0, _cone_step(lam, dst), _cone_step(lam, dzt))
        s_aff = _tmap(lambda l, d: l + a_aff * d, lam, dst)
        z_aff = _tmap(lambda l, d: l + a_aff * d, lam, dzt)
        sigma = min(1.0, max(0.0, _dot(s_aff, z_aff) / gap)) ** 3
        corr = _cone_prod(dst, dzt)
        rc = _tmap(lambda ll, cc, ee: -ll - cc + sigma * mu * ee, _cone_prod(lam, lam), corr, e)
        dx, dy, dz, dst, dzt = direction(rc)
        alpha = min(1.0, 0.99 * min(_cone_step(lam, dst), _cone_step(lam, dzt)))
        if alpha < 1e-12:
            status, message = "stalled", f"step length {alpha:.2e}"
            break
        ds = sc.W(dst)  # W symmetric: ds = W^T ds~
        s_new = _tmap(lambda a, b: a + alpha * b, s, ds)
        z_new = _tmap(lambda a, b: a + alpha * b, z, dz)
        if not (_interior(s_new) and _interior(z_new)):
            status, message = "stalled", "iterate left the cone interior in floating point"
            break
        x = x + alpha * dx
        y = y + alpha * dy
        s, z = s_new, z_new

    x, y, z, s, gap, res_p, res_d, _ = best
    w_raw = x[: data.n] + 1j * x[data.n:]
    obj = float(np.vdot(w_raw, a_us).real)
    rel_gap = gap / max(1.0, abs(obj))
    if status == "stalled" and rel_gap <= ACCEPT_GAP and max(res_p, res_d) <= ACCEPT_RES:
        status = "optimal"
        message = f"numerical limit reached ({message}); relative gap {rel_gap:.1e}"
    norm = np.linalg.norm(w_raw)
    # reported weights have unit norm when the power constraint is active
    w = w_raw / norm if norm >= 1.0 - 1e-6 else w_raw.copy()
    viol = max(_violation(problem, w_raw), _violation(problem, w))
    certified = status == "optimal" and rel_gap <= CERT_GAP and viol <= 1e-8 * data.sqrt_t
    sol = SocpSolution(
        weights=w, raw_weights=w_raw, objective=obj, duality_gap=float(gap),
        max_constraint_violation=viol, iterations=it,
        wall_time=time.perf_counter() - t_start, status=status, certified=certified,
        z_lin=z[0], z_soc=z[1], z_ball=z[2], y=y, warm_start=warm_start is not None,
        message=message, history=history,
    )
    if status == "max_iter":
        raise SocpIterationLimit(f"no convergence in {max_iter} iterations", best=sol)
    return sol


def _interior(u) -> bool:
    lin, soc, ball = u
    return bool(np.all(lin > 0) and np.all(_jnorm(soc) > 0) and _jnorm(ball) > 0)


def _h(data: _Data):
    lin, soc, ball = _identity(data)
    return np.zeros(1), soc, ball


def _violation(problem: SocpProblem, w) -> float:
    A = np.asarray(problem.A)
    a = np.asarray(problem.a_us)
    st = np.sqrt(problem.t_linear)
    inner = np.vdot(w, a)
    return float(max(
        np.max(np.abs(w.conj() @ A)) - st,
        np.linalg.norm(w) - 1.0,
        -inner.real,
        abs(inner.imag),
        0.0,
    ))


def kkt_residuals(problem: SocpProblem, solution: SocpSolution) -> dict:
    """Primal, dual and complementarity residuals of a solution.

    Evaluated in the solver's internal scaling (leakage cones divided by
    sqrt(t)) using the solution's raw weights and stored multipliers.
    """
    data = _Data(problem)
    w = np.asarray(solution.raw_weights, dtype=np.complex128)
    x = np.concatenate([w.real, w.imag])
    s = data.slack(x)
    z = (np.asarray(solution.z_lin), np.asarray(solution.z_soc), np.asarray(solution.z_ball))
    y = np.asarray(solution.y)

    def cone_violation(u):
        lin = float(np.max(np.maximum(-u[0], 0.0)))
        soc = float(np.max(np.maximum(np.linalg.norm(u[1][:, 1:], axis=1) - u[1][:, 0], 0.0)))
        ball = max(np.linalg.norm(u[2][1:]) - u[2][0], 0.0)
        return max(lin, soc, ball)

    primal = max(cone_violation(s), abs(float(data.e_us @ x)))
    stationarity = data.c + data.e_us * y[0] + data.GT(*z)
    dual = max(float(np.max(np.abs(stationarity))), cone_violation(z))
    comp = abs(float(s[0] @ z[0])) + float(np.sum(np.abs(np.sum(s[1] * z[1], axis=1)))) + abs(float(s[2] @ z[2]))
    return {"primal": primal, "dual": dual, "complementarity": comp}


def socp_precoder(A, a_us, threshold, **opts):
    """Run :func:`solve_p2` and wrap the result as a ``PrecoderResult``.

    ``threshold`` is a :class:`~lerbeam.precoder.ThresholdSpec`; ``opts``
    are passed to the solver.  An iteration-limit failure still returns the
    best iterate, flagged as uncertified.
    """
    from .precoder import Method, PrecoderResult, grid_max_power

    problem = SocpProblem(A, a_us, threshold.t_linear)
    try:
        sol = solve_p2(problem, **opts)
    except SocpIterationLimit as exc:
        sol = exc.best
    diag = {
        "status": sol.status,
        "certified": sol.certified,
        "objective": sol.objective,
        "user_power": float(abs(np.vdot(sol.weights, a_us)) ** 2),
        "duality_gap": sol.duality_gap,
        "iterations": sol.iterations,
        "max_constraint_violation": sol.max_constraint_violation,
        "grid_max_power": grid_max_power(sol.weights, A),
        "solve_seconds": sol.wall_time,
        "warm_start": sol.warm_start,
    }
    return PrecoderResult(sol.weights, Method.SOCP, diagnostics=diag)
