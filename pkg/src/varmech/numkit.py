"""Small numerical kernel: finite differences, Newton, RK4, quadrature.

All geometry modules sit on top of these routines, so their conventions
are fixed here once:

* finite-difference steps are relative, ``eps * max(1, |x_i|)``, with a
  central stencil by default;
* linear systems go through LU with partial pivoting and a hard pivot
  floor, so a singular Jacobian surfaces as an exception instead of NaNs;
* the reference ODE propagator is fixed-step classical RK4.

Everything is pure and allocation-light; callers may evaluate these
routines concurrently on different points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, EvaluationError, NoConvergence, SingularJacobian

# Default relative step for first-order central differences.
FD_STEP_SCALE = 2.0 ** -17
# Wider default for the order-4 stencil (optimum grows with stencil order).
FD4_STEP_SCALE = 1e-3
# Pivot threshold: a pivot below this times the row norm is treated as zero.
PIVOT_FLOOR = 1e-14


@dataclass(frozen=True)
class DiffConfig:
    """Finite-difference settings.

    fd_step_scale: relative step; the actual step for coordinate i is
        ``fd_step_scale * max(1, |x_i|)``.
    scheme: only "central" is provided.
    """

    fd_step_scale: float = FD_STEP_SCALE
    scheme: str = "central"

    def __post_init__(self):
        if self.fd_step_scale <= 0:
            raise DomainError("fd_step_scale must be positive")
        if self.scheme != "central":
            raise DomainError(f"unknown difference scheme {self.scheme!r}")

    def step(self, x):
        return self.fd_step_scale * np.maximum(1.0, np.abs(x))


@dataclass(frozen=True)
class NewtonConfig:
    """Newton iteration settings; `jacobian` may hold an analytic callable."""

    abs_tol: float = 1e-12
    max_iter: int = 50
    jacobian: Callable | None = field(default=None, compare=False)


DEFAULT_DIFF = DiffConfig()
DEFAULT_NEWTON = NewtonConfig()


def _asvec(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _check_finite(value, where):
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"non-finite value encountered {where}")


def fd_jacobian(f, x, cfg: DiffConfig = DEFAULT_DIFF):
    """Jacobian of ``f`` at ``x`` by central differences, shape (m, n)."""
    x = _asvec(x)
    steps = cfg.step(x)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = steps[i]
        hi = _asvec(f(x + e))
        lo = _asvec(f(x - e))
        _check_finite(hi, f"in fd_jacobian, coordinate {i} (+)")
        _check_finite(lo, f"in fd_jacobian, coordinate {i} (-)")
        cols.append((hi - lo) / (2.0 * steps[i]))
    return np.column_stack(cols)


def fd_gradient(f, x, cfg: DiffConfig = DEFAULT_DIFF):
    """Gradient of a scalar function, shape (n,)."""
    x = _asvec(x)
    steps = cfg.step(x)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = steps[i]
        hi = float(f(x + e))
        lo = float(f(x - e))
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise EvaluationError(f"non-finite value in fd_gradient, coordinate {i}")
        g[i] = (hi - lo) / (2.0 * steps[i])
    return g


def fd_jacobian4(f, x, step_scale: float = FD4_STEP_SCALE):
    """Order-4 five-point Jacobian; use where nested differencing needs
    more accuracy than the plain central stencil delivers."""
    x = _asvec(x)
    steps = step_scale * np.maximum(1.0, np.abs(x))
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = steps[i]
        f1 = _asvec(f(x + 2 * e))
        f2 = _asvec(f(x + e))
        f3 = _asvec(f(x - e))
        f4 = _asvec(f(x - 2 * e))
        _check_finite(f1, f"in fd_jacobian4, coordinate {i}")
        _check_finite(f4, f"in fd_jacobian4, coordinate {i}")
        cols.append((-f1 + 8 * f2 - 8 * f3 + f4) / (12.0 * steps[i]))
    return np.column_stack(cols)


def fd_directional4(f, x, direction, step_scale: float = FD4_STEP_SCALE):
    """Order-4 derivative of ``t -> f(x + t*direction)`` at t = 0.

    ``f`` may return an array of any shape; the result has that shape.
    """
    x = _asvec(x)
    d = _asvec(direction)
    scale = max(1.0, float(np.max(np.abs(x))))
    nd = float(np.max(np.abs(d)))
    if nd == 0.0:
        probe = np.asarray(f(x), dtype=float)
        return np.zeros_like(probe)
    t = step_scale * scale / nd
    f1 = np.asarray(f(x + 2 * t * d), dtype=float)
    f2 = np.asarray(f(x + t * d), dtype=float)
    f3 = np.asarray(f(x - t * d), dtype=float)
    f4 = np.asarray(f(x - 2 * t * d), dtype=float)
    _check_finite(f1, "in fd_directional4")
    _check_finite(f4, "in fd_directional4")
    return (-f1 + 8 * f2 - 8 * f3 + f4) / (12.0 * t)


def fd_mixed_hessian(f, a, b, step_scale: float | None = None):
    """Matrix of mixed second partials ``d^2 f / da_i db_j`` of a scalar
    two-slot function, by the four-point cross stencil.

    The step default is mach**(1/4)-ish, the optimum for second
    differences rather than first ones.
    """
    a = _asvec(a)
    b = _asvec(b)
    if step_scale is None:
        step_scale = 1.2e-4
    sa = step_scale * np.maximum(1.0, np.abs(a))
    sb = step_scale * np.maximum(1.0, np.abs(b))
    out = np.empty((a.size, b.size))
    for i in range(a.size):
        ea = np.zeros_like(a)
        ea[i] = sa[i]
        for j in range(b.size):
            eb = np.zeros_like(b)
            eb[j] = sb[j]
            v = (
                float(f(a + ea, b + eb))
                - float(f(a + ea, b - eb))
                - float(f(a - ea, b + eb))
                + float(f(a - ea, b - eb))
            )
            if not np.isfinite(v):
                raise EvaluationError(
                    f"non-finite value in fd_mixed_hessian at entry ({i}, {j})"
                )
            out[i, j] = v / (4.0 * sa[i] * sb[j])
    return out


def antisymmetrize(m):
    """Antisymmetric part (M - M^T) / 2."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m - m.T)


def lu_solve(a, rhs):
    """Solve ``a x = rhs``, raising SingularJacobian on degeneracy.

    Well-conditioned systems go through the library solver; when that
    fails or returns a solution whose residual is out of proportion the
    scaled partial-pivot elimination below runs instead and raises
    SingularJacobian when the best available pivot falls below
    PIVOT_FLOOR times the infinity norm of its row, which is the signal
    that the matrix is singular at working precision.
    """
    a = np.array(a, dtype=float)
    x = np.array(rhs, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DomainError("lu_solve needs a square matrix")
    try:
        fast = np.linalg.solve(a, x)
    except np.linalg.LinAlgError:
        fast = None
    if fast is not None:
        resid = float(abs(a @ fast - x).max())
        bound = 1e-10 * max(float(abs(x).max()),
                            float(abs(a).max()) * float(abs(fast).max()),
                            1e-290)
        if resid <= bound:
            return fast
    absa = abs(a)
    row_scale = np.maximum(absa.max(axis=1), 1e-300)
    for col in range(n):
        piv = col + int((absa[col:, col] / row_scale[col:]).argmax())
        if absa[piv, col] < PIVOT_FLOOR * row_scale[piv]:
            raise SingularJacobian(
                f"pivot {a[piv, col]:.3e} below floor in column {col}"
            )
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            absa[[col, piv]] = absa[[piv, col]]
            x[col], x[piv] = x[piv], x[col]
            row_scale[col], row_scale[piv] = row_scale[piv], row_scale[col]
        factors = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col + 1 :] -= factors[:, None] * a[col, col + 1 :]
        np.abs(a[col + 1 :, col + 1 :], out=absa[col + 1 :, col + 1 :])
        x[col + 1 :] -= factors * x[col]
    for col in range(n - 1, -1, -1):
        x[col] = (x[col] - a[col, col + 1 :] @ x[col + 1 :]) / a[col, col]
    return x


def newton_solve(f, x0, cfg: NewtonConfig = DEFAULT_NEWTON, diff: DiffConfig = DEFAULT_DIFF):
    """Solve ``f(x) = 0`` from ``x0``; returns the root.

    The Jacobian comes from ``cfg.jacobian`` when supplied and from
    central differences otherwise.  Raises NoConvergence when max_iter
    runs out and SingularJacobian when a linear solve fails.
    """
    x = _asvec(x0).copy()
    r = _asvec(f(x))
    _check_finite(r, "in newton_solve residual")
    best = float(np.max(np.abs(r)))
    for it in range(cfg.max_iter):
        if best <= cfg.abs_tol:
            return x
        jac = cfg.jacobian(x) if cfg.jacobian is not None else fd_jacobian(f, x, diff)
        dx = lu_solve(jac, r)
        x = x - dx
        r = _asvec(f(x))
        _check_finite(r, "in newton_solve residual")
        best = float(np.max(np.abs(r)))
    if best <= cfg.abs_tol:
        return x
    raise NoConvergence(
        f"newton_solve stalled at residual {best:.3e} after {cfg.max_iter} iterations",
        residual=best,
        iterations=cfg.max_iter,
    )


def rk4(f, y0, t0, t1, max_step: float = 1e-3):
    """Integrate ``y' = f(t, y)`` from t0 to t1 with fixed-step RK4.

    The number of substeps is chosen so the internal step never exceeds
    ``max_step`` in magnitude.
    """
    y = _asvec(y0).copy()
    span = t1 - t0
    if span == 0.0:
        return y
    nsteps = max(1, int(np.ceil(abs(span) / max_step)))
    dt = span / nsteps
    t = t0
    for _ in range(nsteps):
        k1 = _asvec(f(t, y))
        k2 = _asvec(f(t + dt / 2, y + dt / 2 * k1))
        k3 = _asvec(f(t + dt / 2, y + dt / 2 * k2))
        k4 = _asvec(f(t + dt, y + dt * k3))
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    _check_finite(y, "in rk4")
    return y


def rk4_path(f, y0, times, max_step: float = 1e-3):
    """States of ``y' = f(t, y)`` at the increasing ``times``; the first
    entry of ``times`` is the initial time of ``y0``.  Returns an array
    of shape (len(times), len(y0))."""
    times = np.asarray(times, dtype=float)
    y = _asvec(y0).copy()
    out = np.empty((times.size, y.size))
    out[0] = y
    for k in range(1, times.size):
        y = rk4(f, y, times[k - 1], times[k], max_step=max_step)
        out[k] = y
    return out


def gauss_legendre(n):
    """Nodes and weights on [0, 1], shape ((n,), (n,))."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def fit_order(h_values, err_values):
    """Least-squares slope of log(err) against log(h).

    This is the observed convergence order of whatever produced the
    errors.  Raises DomainError on fewer than two points or nonpositive
    entries (a zero error has no logarithm; perturb or drop it first).
    """
    h = np.asarray(h_values, dtype=float)
    e = np.asarray(err_values, dtype=float)
    if h.size != e.size or h.size < 2:
        raise DomainError("fit_order needs matching arrays of at least 2 points")
    if np.any(h <= 0) or np.any(e <= 0):
        raise DomainError("fit_order needs positive step sizes and errors")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)
