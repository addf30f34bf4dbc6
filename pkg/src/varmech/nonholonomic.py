"""Discrete Lagrange-d'Alembert integration for constrained systems.

A nonholonomic system here is a discrete Lagrangian together with a
field of constraint one-forms w(q) (rows of an m-by-n matrix).  One
step solves the coupled system

    D1 L_d(q1, q2) + D2 L_d(q0, q1) = w(q1)^T lambda,
    constraint(q1, q2) = 0,

for the new point q2 and the multipliers lambda, where the discrete
constraint averages w along the segment according to a quadrature rule
and contracts with the divided difference (q2 - q1)/h.

The rules are defined by interior nodes a*qk + b*qk1 with weights; the
usual menagerie (midpoint, trapezoidal, the one-parameter family
interpolating them, and the two one-sided endpoint rules) is provided,
plus a small parser for selecting rules from strings on a command
line.  Different rules give dynamics with visibly different energy
behavior even though all are consistent discretizations of the same
constraint distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numkit
from .errors import DomainError, NumericsError, StepFailure
from .lagrangian import DiscreteLagrangian, Trajectory
from .numkit import NewtonConfig, DEFAULT_NEWTON


@dataclass(frozen=True)
class DiscretizationRule:
    """Quadrature nodes for discretizing constraint one-forms.

    Each node (a, b, weight) contributes weight * w(a*qk + b*qk1) @ v
    with v the divided difference along the segment; a + b = 1 for a
    consistent rule.
    """

    name: str
    nodes: tuple

    def points(self, qk, qk1):
        return [(a * qk + b * qk1, wt) for a, b, wt in self.nodes]


def midpoint_rule():
    return DiscretizationRule("midpoint", ((0.5, 0.5, 1.0),))


def trapezoidal_rule():
    return DiscretizationRule("trapezoidal", ((1.0, 0.0, 0.5), (0.0, 1.0, 0.5)))


def alpha_rule(alpha):
    """Two symmetric interior nodes; 0 or 1 is trapezoidal, 1/2 is midpoint."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return DiscretizationRule(
        f"alpha:{alpha:g}",
        ((1.0 - alpha, alpha, 0.5), (alpha, 1.0 - alpha, 0.5)),
    )


def euler_a_rule():
    return DiscretizationRule("euler-a", ((1.0, 0.0, 1.0),))


def euler_b_rule():
    return DiscretizationRule("euler-b", ((0.0, 1.0, 1.0),))


def rule_from_spec(spec: str) -> DiscretizationRule:
    """Parse a rule name: midpoint, trapezoidal, euler-a, euler-b, or
    alpha:<value>."""
    spec = spec.strip().lower()
    simple = {
        "midpoint": midpoint_rule,
        "trapezoidal": trapezoidal_rule,
        "euler-a": euler_a_rule,
        "euler-b": euler_b_rule,
    }
    if spec in simple:
        return simple[spec]()
    if spec.startswith("alpha:"):
        try:
            value = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise DomainError(f"bad alpha value in rule spec {spec!r}") from exc
        return alpha_rule(value)
    raise DomainError(f"unknown discretization rule {spec!r}")


@dataclass
class NonholonomicSystem:
    """Discrete Lagrangian plus constraint one-forms.

    constraint_forms(q) returns the m-by-n matrix whose rows are the
    one-forms; constraint_grad, when given, returns the (m, n, n)
    derivative tensor grad[a, s, j] = d w[a, s] / d q_j used for the
    analytic Newton Jacobian (finite differences otherwise).
    """

    lagrangian: DiscreteLagrangian
    n_constraints: int
    constraint_forms: Callable
    constraint_grad: Callable | None = None
    name: str = ""

    @property
    def dim(self):
        return self.lagrangian.dim

    def forms(self, q):
        w = np.asarray(self.constraint_forms(np.asarray(q, dtype=float)), dtype=float)
        if w.shape != (self.n_constraints, self.dim):
            raise DomainError(f"constraint matrix has shape {w.shape}, "
                              f"expected {(self.n_constraints, self.dim)}")
        return w


def discrete_constraint(system: NonholonomicSystem, rule: DiscretizationRule, qk, qk1):
    """The rule's discretization of the constraints on a segment."""
    qk = np.asarray(qk, dtype=float)
    qk1 = np.asarray(qk1, dtype=float)
    v = (qk1 - qk) / system.lagrangian.h
    out = np.zeros(system.n_constraints)
    for a, b, wt in rule.nodes:
        out += wt * (system.forms(a * qk + b * qk1) @ v)
    return out


def _constraint_jacobian(system, rule, q1, q2):
    """Derivative of the discrete constraint with respect to q2."""
    h = system.lagrangian.h
    v = (q2 - q1) / h
    if system.constraint_grad is None:
        return numkit.fd_jacobian(
            lambda q: discrete_constraint(system, rule, q1, q), q2)
    out = np.zeros((system.n_constraints, system.dim))
    for a, b, wt in rule.nodes:
        point = a * q1 + b * q2
        out += (wt / h) * system.forms(point)
        if b != 0.0:
            grad = np.asarray(system.constraint_grad(point), dtype=float)
            scale = wt * b
            for row in range(system.n_constraints):
                out[row] += scale * (v @ grad[row])
    return out


def dla_step(system: NonholonomicSystem, rule: DiscretizationRule, q0, q1,
             guess=None, cfg: NewtonConfig = DEFAULT_NEWTON):
    """One constrained step: returns (q2, multipliers).

    The Newton unknown stacks q2 with the multipliers; the initial
    guess continues the segment linearly with zero multipliers unless
    one is supplied.  Under the default configuration the convergence
    tolerance is scaled by the size of the incoming momentum, since the
    stationarity residual inherits that magnitude and its floating
    point floor sits above an absolute 1e-12 for small steps.
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    n = system.dim
    m = system.n_constraints
    lag = system.lagrangian
    d2_prev = lag.D2(q0, q1)
    w1t = system.forms(q1).T

    def residual(u):
        q2, lam = u[:n], u[n:]
        top = lag.D1(q1, q2) + d2_prev - w1t @ lam
        bottom = discrete_constraint(system, rule, q1, q2)
        return np.concatenate([top, bottom])

    def jacobian(u):
        q2 = u[:n]
        out = np.zeros((n + m, n + m))
        out[:n, :n] = lag.D12(q1, q2)
        out[:n, n:] = -w1t
        out[n:, :n] = _constraint_jacobian(system, rule, q1, q2)
        return out

    if guess is None:
        guess = np.concatenate([2 * q1 - q0, np.zeros(m)])
    if cfg.jacobian is None:
        scale = max(1.0, float(np.max(np.abs(d2_prev))))
        cfg = NewtonConfig(abs_tol=cfg.abs_tol * scale, max_iter=cfg.max_iter,
                           jacobian=jacobian)
    u = numkit.newton_solve(residual, guess, cfg)
    return u[:n], u[n:]


def dla_simulate(system: NonholonomicSystem, rule: DiscretizationRule, q0, q1,
                 steps: int, energies: dict | None = None,
                 cfg: NewtonConfig = DEFAULT_NEWTON):
    """Iterate dla_step.  Returns (trajectory, energy series, multipliers).

    The trajectory holds steps + 2 points.  Energy functions take a
    consecutive pair and are evaluated on all steps + 1 of them; the
    multiplier array has one row per solved step.  Failures are wrapped
    in StepFailure with the step index.
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    points = np.empty((steps + 2, system.dim))
    points[0], points[1] = q0, q1
    lams = np.empty((steps, system.n_constraints))
    for k in range(steps):
        try:
            q2, lam = dla_step(system, rule, points[k], points[k + 1], cfg=cfg)
        except NumericsError as exc:
            raise StepFailure(f"constrained step {k} failed: {exc}",
                              step=k, cause=exc,
                              partial=points[: k + 2].copy()) from exc
        points[k + 2] = q2
        lams[k] = lam
    traj = Trajectory(points=points, h=system.lagrangian.h)
    series = {}
    if energies:
        for name, func in energies.items():
            series[name] = np.array([func(a, b) for a, b in traj.pairs()])
    return traj, series, lams


def midpoint_energy(func: Callable, h: float) -> Callable:
    """Discretize an energy density E(q, v) at segment midpoints with
    divided-difference velocities."""

    def wrapped(q0, q1):
        q0 = np.asarray(q0, dtype=float)
        q1 = np.asarray(q1, dtype=float)
        return float(func(0.5 * (q0 + q1), (q1 - q0) / h))

    return wrapped
