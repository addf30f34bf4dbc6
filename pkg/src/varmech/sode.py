"""Second-order difference equations in explicit and implicit form.

An explicit equation advances a pair of points, q2 = gamma(q0, q1).  An
implicit one is the zero set of a map phi(q0, q1, q2) whose partial
derivative in the last slot (called C here) must be invertible for the
equation to determine q2 locally.

For implicit equations the solution set M = {phi = 0} is a submanifold
of triple space; ``tangent_basis`` returns the 2n vector fields

    A_i = d/dq0^i - (C^{-1} dphi/dq0)[:, i] . d/dq2
    B_i = d/dq1^i - (C^{-1} dphi/dq1)[:, i] . d/dq2

that span its tangent space in the chart (q0, q1).  They are the raw
material for the implicit variationality conditions in ``helmholtz``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numkit
from .errors import DomainError, OffManifold
from .numkit import DiffConfig, NewtonConfig, DEFAULT_NEWTON


@dataclass
class ExplicitSOdE:
    """Explicit recurrence q2 = gamma(q0, q1) on an n-dimensional space."""

    dim: int
    gamma: Callable

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dim must be at least 1")

    def __call__(self, q0, q1):
        q2 = np.asarray(self.gamma(np.asarray(q0, dtype=float),
                                   np.asarray(q1, dtype=float)), dtype=float)
        if q2.shape != (self.dim,):
            raise DomainError(f"gamma returned shape {q2.shape}, expected ({self.dim},)")
        return q2

    def flow(self, q0, q1):
        """The pair-space map (q0, q1) -> (q1, gamma(q0, q1))."""
        q1 = np.asarray(q1, dtype=float)
        return q1, self(q0, q1)

    def flow_map(self, z):
        """Same map in stacked coordinates z = (q0, q1) of length 2n."""
        z = np.asarray(z, dtype=float)
        n = self.dim
        return np.concatenate([z[n:], self(z[:n], z[n:])])


@dataclass
class ImplicitSOdE:
    """Implicit recurrence phi(q0, q1, q2) = 0.

    ``c`` may carry the analytic last-slot Jacobian; otherwise central
    differences are used.  The equation is well posed near points where
    that matrix is invertible.
    """

    dim: int
    phi: Callable
    c: Callable | None = None
    diff: DiffConfig = field(default_factory=DiffConfig)

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dim must be at least 1")

    def __call__(self, q0, q1, q2):
        val = np.asarray(self.phi(np.asarray(q0, dtype=float),
                                  np.asarray(q1, dtype=float),
                                  np.asarray(q2, dtype=float)), dtype=float)
        if val.shape != (self.dim,):
            raise DomainError(f"phi returned shape {val.shape}, expected ({self.dim},)")
        return val

    def C(self, q0, q1, q2):
        """Jacobian of phi in the q2 slot, shape (n, n)."""
        if self.c is not None:
            return np.asarray(self.c(q0, q1, q2), dtype=float)
        return numkit.fd_jacobian(lambda q: self(q0, q1, q), q2, self.diff)

    def is_regular(self, q0, q1, q2):
        m = self.C(q0, q1, q2)
        rows = np.linalg.norm(m, axis=1)
        bound = float(np.prod(rows))
        if bound == 0.0:
            return False
        return abs(float(np.linalg.det(m))) > 1e-12 * bound

    def require_on_manifold(self, q0, q1, q2, tol: float = 1e-8):
        res = float(np.max(np.abs(self(q0, q1, q2))))
        if res > tol:
            raise OffManifold(f"point violates phi = 0 by {res:.3e}")


def implicit_step(eq: ImplicitSOdE, q0, q1, guess=None,
                  cfg: NewtonConfig = DEFAULT_NEWTON):
    """Solve phi(q0, q1, .) = 0 for q2 by Newton.

    The default starting point is the linear predictor 2 q1 - q0, which
    selects the solution branch connected to uniform motion.
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if guess is None:
        guess = 2.0 * q1 - q0
    if cfg.jacobian is None:
        cfg = NewtonConfig(abs_tol=cfg.abs_tol, max_iter=cfg.max_iter,
                           jacobian=lambda q2: eq.C(q0, q1, q2))
    return numkit.newton_solve(lambda q2: eq(q0, q1, q2), guess, cfg, eq.diff)


def tangent_basis(eq: ImplicitSOdE, q0, q1, q2, tol: float = 1e-8):
    """Bases A, B of the tangent space of {phi = 0} at an on-manifold
    triple, each of shape (n, 3n); row i holds the coefficients of A_i
    (resp. B_i) in the coordinate frame (q0, q1, q2)."""
    eq.require_on_manifold(q0, q1, q2, tol)
    n = eq.dim
    cmat = eq.C(q0, q1, q2)
    j0 = numkit.fd_jacobian(lambda q: eq(q, q1, q2), np.asarray(q0, dtype=float), eq.diff)
    j1 = numkit.fd_jacobian(lambda q: eq(q0, q, q2), np.asarray(q1, dtype=float), eq.diff)
    # solve C X = J for both right-hand sides at once
    corr0 = np.linalg.solve(cmat, j0)
    corr1 = np.linalg.solve(cmat, j1)
    a = np.zeros((n, 3 * n))
    b = np.zeros((n, 3 * n))
    a[:, :n] = np.eye(n)
    a[:, 2 * n:] = -corr0.T
    b[:, n:2 * n] = np.eye(n)
    b[:, 2 * n:] = -corr1.T
    return a, b


def explicit_to_implicit(eq: ExplicitSOdE) -> ImplicitSOdE:
    """Rewrite q2 = gamma(q0, q1) as phi = q2 - gamma(q0, q1) = 0; the
    last-slot Jacobian is the identity, supplied analytically."""
    return ImplicitSOdE(
        dim=eq.dim,
        phi=lambda q0, q1, q2: np.asarray(q2, dtype=float) - eq(q0, q1),
        c=lambda q0, q1, q2: np.eye(eq.dim),
    )
