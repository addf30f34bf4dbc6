"""Variationality tests for second-order equations, discrete and continuous.

The central question: given a recurrence q2 = gamma(q0, q1) together
with a candidate momentum map F(q0, q1), is F the (minus) Legendre
transform of some discrete Lagrangian whose stationarity equations are
the recurrence?  Equivalently, is the image of the pair embedding

    z = (q0, q1)  |->  ((q0, F(q0, q1)), (q1, F(q1, gamma(q0, q1))))

an isotropic (for dim reasons then Lagrangian) submanifold of two
cotangent copies carrying the difference of their canonical forms?

Three families of tests are provided:

* ``dhc_explicit`` / ``dhc_implicit``: the pointwise discrete Helmholtz
  residuals, written with slot-derivative matrices of F and gamma (or,
  in the implicit case, contractions with the {phi = 0} tangent basis);
* ``isotropy_pullback``: the pullback of the ambient two-form through
  any embedding, which must vanish identically;
* ``chc_classical`` / ``chc_implicit``: the continuous counterparts
  along user-supplied jets, for comparing a discretization against the
  theory it came from.

Conventions.  The canonical one-form is p dq and the symplectic matrix
used here is S = [[0, -I], [I, 0]] in (q, p) coordinates, so that the
pullback of the canonical form through a minus Legendre transform has
coefficient +D12 on dq0^i ^ dq1^j, matching ``lagrangian_two_form``.
On the product of two cotangent copies the relevant form is the second
copy minus the first: ambient matrix diag(-S, S).

All residuals here are exact zeros for variational data, so any value
above the finite-difference noise floor (about 1e-10 with the order-4
stencils used) is meaningful.  Sample-point loops are embarrassingly
parallel; every function is pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numkit
from .errors import DomainError, SingularJacobian
from .numkit import DiffConfig, NewtonConfig, DEFAULT_NEWTON
from .sode import ExplicitSOdE, ImplicitSOdE, implicit_step, tangent_basis


# ---------------------------------------------------------------------------
# canonical matrices and sampling


def canonical_omega_matrix(n):
    """Matrix of the canonical two-form on (q, p) coordinates."""
    s = np.zeros((2 * n, 2 * n))
    s[:n, n:] = -np.eye(n)
    s[n:, :n] = np.eye(n)
    return s


def pair_omega_matrix(n):
    """Ambient form on two cotangent copies: second minus first."""
    s = canonical_omega_matrix(n)
    out = np.zeros((4 * n, 4 * n))
    out[: 2 * n, : 2 * n] = -s
    out[2 * n :, 2 * n :] = s
    return out


def sample_box(dim, count, box=1.0, seed=0, center=None, predicate=None):
    """Deterministic low-discrepancy points in ``center + [-box, box]^dim``.

    Uses the additive-recurrence sequence driven by the generalized
    golden ratio; ``seed`` shifts the starting index so different seeds
    give different but reproducible point sets.  With a ``predicate``
    the sequence is filtered until ``count`` admissible points are
    found (DomainError if the predicate keeps rejecting).
    """
    if count < 1 or dim < 1:
        raise DomainError("sample_box needs positive dim and count")
    # root of x**(dim+1) = x + 1
    g = 2.0
    for _ in range(60):
        g = (1.0 + g) ** (1.0 / (dim + 1))
    alpha = g ** -(1.0 + np.arange(dim))
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    out = np.empty((count, dim))
    found = 0
    k = 0
    limit = 1000 * count + 1000
    while found < count:
        if k > limit:
            raise DomainError("sample predicate rejected too many points")
        idx = 1 + k + seed * 7919
        point = center + box * (2.0 * np.mod(0.5 + idx * alpha, 1.0) - 1.0)
        k += 1
        if predicate is not None and not predicate(point):
            continue
        out[found] = point
        found += 1
    return out


# ---------------------------------------------------------------------------
# fiber maps


@dataclass
class FiberMap:
    """Map from pairs of points to momentum covectors.

    kind "minus" attaches F(q0, q1) at q0 (the pattern of -D1 of a
    discrete Lagrangian); kind "plus" attaches it at q1 (the pattern of
    D2).  ``func`` returns the covector components only; the base point
    is implied by the kind.
    """

    dim: int
    func: Callable
    kind: str = "minus"

    def __post_init__(self):
        if self.kind not in ("minus", "plus"):
            raise DomainError(f"kind must be 'minus' or 'plus', got {self.kind!r}")
        if self.dim < 1:
            raise DomainError("dim must be at least 1")

    def __call__(self, q0, q1):
        p = np.asarray(self.func(np.asarray(q0, dtype=float),
                                 np.asarray(q1, dtype=float)), dtype=float)
        if p.shape != (self.dim,):
            raise DomainError(f"fiber map returned shape {p.shape}, expected ({self.dim},)")
        return p

    def base(self, q0, q1):
        return np.asarray(q0 if self.kind == "minus" else q1, dtype=float)

    def slot_jacobians(self, q0, q1):
        """(dF/dq0, dF/dq1) by order-4 differences."""
        n = self.dim
        z = np.concatenate([np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)])
        j = numkit.fd_jacobian4(lambda zz: self(zz[:n], zz[n:]), z)
        return j[:, :n], j[:, n:]

    def local_diffeo_residual(self, q0, q1):
        """Smallest singular value of the fiber-slot Jacobian.

        The pair map (q0, q1) -> (base, F) is a local diffeomorphism
        exactly when this is nonzero: the free slot is q1 for minus
        maps and q0 for plus maps.
        """
        j0, j1 = self.slot_jacobians(q0, q1)
        block = j1 if self.kind == "minus" else j0
        return float(np.linalg.svd(block, compute_uv=False)[-1])


def plus_from_minus(fiber: FiberMap, eq: ExplicitSOdE, probe=None) -> FiberMap:
    """Advance a minus-type map through the recurrence: the result sends
    (q0, q1) to F(q1, gamma(q0, q1)), attached at q1.

    When ``probe = (q0, q1)`` is given, the construction verifies that
    gamma's first-slot Jacobian is invertible there, which is what makes
    the new map a genuine plus Legendre pattern; a recurrence that
    forgets q0 fails with SingularJacobian.
    """
    if fiber.kind != "minus":
        raise DomainError("plus_from_minus needs a minus-type fiber map")
    if probe is not None:
        q0, q1 = (np.asarray(p, dtype=float) for p in probe)
        j = numkit.fd_jacobian4(lambda a: eq(a, q1), q0)
        rows = np.linalg.norm(j, axis=1)
        if np.any(rows < 1e-10) or abs(np.linalg.det(j)) <= 1e-12 * float(np.prod(rows)):
            raise SingularJacobian(
                "recurrence has singular first-slot Jacobian at the probe; "
                "its advanced fiber map is not a plus Legendre pattern"
            )
    return FiberMap(dim=fiber.dim, kind="plus",
                    func=lambda q0, q1: fiber(q1, eq(q0, q1)))


# ---------------------------------------------------------------------------
# discrete Helmholtz conditions


def dhc_explicit(fiber: FiberMap, eq: ExplicitSOdE, q0, q1):
    """Pointwise discrete Helmholtz residuals for an explicit recurrence.

    With M = dF at (q0, q1), N = dF at (q1, gamma(q0, q1)) and G the
    slot Jacobians of gamma (subscripts are slots), the residuals are

        R1 = antisym(M1)                     first-slot symmetry,
        R2 = M2 + (N2 G0)^T                  cross-pair compatibility,
        R3 = antisym(N2 G1)                  advanced-pair symmetry,

    all of which vanish identically when F is the minus Legendre
    transform of a Lagrangian generating the recurrence.  R3 is the
    reduced form of the advanced-pair condition; it is equivalent to the
    full one wherever R1 vanishes on a neighbourhood.
    """
    if fiber.kind != "minus":
        raise DomainError("dhc_explicit needs a minus-type fiber map")
    n = fiber.dim
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    m1, m2 = fiber.slot_jacobians(q0, q1)
    q2 = eq(q0, q1)
    _, n2 = fiber.slot_jacobians(q1, q2)
    z = np.concatenate([q0, q1])
    jg = numkit.fd_jacobian4(lambda zz: eq(zz[:n], zz[n:]), z)
    g0, g1 = jg[:, :n], jg[:, n:]
    r1 = numkit.antisymmetrize(m1)
    r2 = m2 + (n2 @ g0).T
    r3 = numkit.antisymmetrize(n2 @ g1)
    return r1, r2, r3


def _triple_embedding(fiber: FiberMap, q0, q1, q2):
    """Both Legendre legs over a triple, as a map of (q0, q1, q2)."""
    n = fiber.dim

    def embed(z):
        a, b, c = z[:n], z[n : 2 * n], z[2 * n :]
        return np.concatenate([a, fiber(a, b), b, fiber(b, c)])

    return embed, np.concatenate([np.asarray(q0, dtype=float),
                                  np.asarray(q1, dtype=float),
                                  np.asarray(q2, dtype=float)])


def dhc_implicit(fiber: FiberMap, eq: ImplicitSOdE, q0, q1, q2, tol: float = 1e-8):
    """Discrete Helmholtz residuals for an implicit recurrence at an
    on-manifold triple.

    The two-form carried by the pair of Legendre legs is pulled back to
    triple space and contracted with the tangent basis A_i, B_i of
    {phi = 0}, which is where the inverse of the last-slot Jacobian
    enters.  Residuals are normalized so that on phi = q2 - gamma the
    first two blocks reproduce ``dhc_explicit`` exactly; the third
    block is the unreduced advanced-pair condition, which differs from
    the reduced explicit form by an antisym(dF/dQ1) term at the
    advanced pair and so coincides with it wherever the first condition
    holds there.
    """
    if fiber.kind != "minus":
        raise DomainError("dhc_implicit needs a minus-type fiber map")
    n = fiber.dim
    a, b = tangent_basis(eq, q0, q1, q2, tol)
    embed, z = _triple_embedding(fiber, q0, q1, q2)
    jac = numkit.fd_jacobian4(embed, z)
    w = jac.T @ pair_omega_matrix(n) @ jac
    r1 = 0.5 * (a @ w @ a.T)
    r2 = a @ w @ b.T
    r3 = -0.5 * (b @ w @ b.T)
    return r1, r2, r3


# ---------------------------------------------------------------------------
# isotropy of embeddings


def gamma_embedding(fiber: FiberMap, eq: ExplicitSOdE) -> Callable:
    """The pair embedding into two cotangent copies induced by a fiber
    map and a recurrence; input is stacked z = (q0, q1) of length 2n."""
    n = fiber.dim

    if fiber.kind == "minus":

        def embed(z):
            q0, q1 = z[:n], z[n:]
            return np.concatenate([q0, fiber(q0, q1), q1, fiber(q1, eq(q0, q1))])

    else:

        def embed(z):
            q0, q1 = z[:n], z[n:]
            q2 = eq(q0, q1)
            return np.concatenate([q1, fiber(q0, q1), q2, fiber(q1, q2)])

    return embed


def isotropy_pullback(embedding: Callable, z, ambient=None):
    """Pullback of the ambient two-form through an embedding at z.

    ``embedding`` maps chart points (length m) into an even-dimensional
    space carrying ``ambient`` (default: ``pair_omega_matrix`` of the
    appropriate size).  The returned m-by-m matrix vanishes exactly when
    the image is isotropic near z; if additionally m is half the ambient
    dimension the image is Lagrangian.
    """
    z = np.asarray(z, dtype=float)
    jac = numkit.fd_jacobian4(embedding, z)
    if ambient is None:
        if jac.shape[0] % 4 != 0:
            raise DomainError("ambient dimension must be a multiple of 4")
        ambient = pair_omega_matrix(jac.shape[0] // 4)
    return jac.T @ np.asarray(ambient, dtype=float) @ jac


# ---------------------------------------------------------------------------
# two-form fields on chart space


@dataclass
class TwoFormField:
    """A two-form on an m-dimensional chart, given by its coefficient
    matrix field z -> W(z) with W antisymmetric, Omega(u, v) = u^T W v."""

    dim: int
    coeff: Callable

    def __call__(self, z):
        w = np.asarray(self.coeff(np.asarray(z, dtype=float)), dtype=float)
        if w.shape != (self.dim, self.dim):
            raise DomainError(f"coefficient field returned shape {w.shape}")
        return w

    @staticmethod
    def from_constant(w):
        w = np.asarray(w, dtype=float)
        return TwoFormField(dim=w.shape[0], coeff=lambda z: w)

    @staticmethod
    def from_lagrangian(lag):
        """The pair-space two-form of a discrete Lagrangian."""
        from .lagrangian import lagrangian_two_form

        n = lag.dim
        return TwoFormField(
            dim=2 * n,
            coeff=lambda z: lagrangian_two_form(lag, z[:n], z[n:]),
        )

    @staticmethod
    def from_fiber_map(fiber: FiberMap):
        """Pullback of the canonical form through (q0, q1) -> (base, F)."""
        n = fiber.dim
        s = canonical_omega_matrix(n)

        def leg(z):
            q0, q1 = z[:n], z[n:]
            return np.concatenate([fiber.base(q0, q1), fiber(q0, q1)])

        def coeff(z):
            jac = numkit.fd_jacobian4(leg, np.asarray(z, dtype=float))
            return jac.T @ s @ jac

        return TwoFormField(dim=2 * n, coeff=coeff)


def two_form_checks(omega: TwoFormField, z, flow: Callable | None = None,
                    n_vertical: int | None = None, kernel: str = "second"):
    """Pointwise diagnostics of a two-form field at z.

    Returns a dict with:
        closure: max over index triples of the cyclic derivative sum
            (zero iff the form is closed);
        vertical: max entry of the block on the kernel subspace of the
            chosen pair projection ("second": trailing n_vertical
            coordinates, "first": leading ones);
        lie: max entry of flow-pullback minus the form (the discrete
            Lie derivative along the recurrence), when ``flow`` given;
        abs_det: |det W(z)|, reported raw so callers pick thresholds;
        flat_sigma: smallest singular value of the rows of W on the
            vertical subspace (injectivity of the flat map there).
    """
    z = np.asarray(z, dtype=float)
    m = omega.dim
    if n_vertical is None:
        n_vertical = m // 2
    if kernel not in ("first", "second"):
        raise DomainError("kernel must be 'first' or 'second'")
    w = omega(z)

    grad = numkit.fd_jacobian4(lambda zz: omega(zz).ravel(), z)  # (m*m, m)
    closure = 0.0
    for a in range(m):
        for b in range(a + 1, m):
            for c in range(b + 1, m):
                total = grad[b * m + c, a] + grad[c * m + a, b] + grad[a * m + b, c]
                closure = max(closure, abs(total))

    vert = slice(m - n_vertical, m) if kernel == "second" else slice(0, n_vertical)
    vertical = float(np.max(np.abs(w[vert, vert]))) if n_vertical else 0.0

    out = {
        "closure": closure,
        "vertical": vertical,
        "magnitude": float(np.max(np.abs(w))),
        "abs_det": abs(float(np.linalg.det(w))),
        "flat_sigma": float(np.linalg.svd(w[vert, :], compute_uv=False)[-1])
        if n_vertical
        else 0.0,
    }
    if flow is not None:
        jac = numkit.fd_jacobian4(flow, z)
        pulled = jac.T @ omega(np.asarray(flow(z), dtype=float)) @ jac
        out["lie"] = float(np.max(np.abs(pulled - w)))
    return out


# ---------------------------------------------------------------------------
# continuous Helmholtz conditions


@dataclass
class ImplicitODE:
    """Continuous implicit second-order equation phi(q, qdot, qddot) = 0
    with optional analytic acceleration Jacobian ``c``."""

    dim: int
    phi: Callable
    c: Callable | None = None

    def __call__(self, q, qd, qdd):
        return np.asarray(self.phi(np.asarray(q, dtype=float),
                                   np.asarray(qd, dtype=float),
                                   np.asarray(qdd, dtype=float)), dtype=float)

    def C(self, q, qd, qdd):
        if self.c is not None:
            return np.asarray(self.c(q, qd, qdd), dtype=float)
        return numkit.fd_jacobian4(lambda a: self(q, qd, a), np.asarray(qdd, dtype=float))

    def solve_acceleration(self, q, qd, guess=None, cfg: NewtonConfig = DEFAULT_NEWTON):
        q = np.asarray(q, dtype=float)
        qd = np.asarray(qd, dtype=float)
        if guess is None:
            guess = np.zeros(self.dim)
        if cfg.jacobian is None:
            cfg = NewtonConfig(abs_tol=cfg.abs_tol, max_iter=cfg.max_iter,
                               jacobian=lambda a: self.C(q, qd, a))
        return numkit.newton_solve(lambda a: self(q, qd, a), guess, cfg)


def chc_classical(phi: Callable, jet):
    """Classical Helmholtz residuals of a force expression phi(q, qd, qdd)
    along a jet (q, qd, qdd, qddd).

    The three residual matrices (acceleration symmetry, position block,
    velocity block) vanish identically iff phi is the Euler-Lagrange
    expression of some regular Lagrangian.  Total time derivatives are
    expanded along the supplied jet, including the third-derivative
    component, with nested order-4 stencils so the noise floor stays
    near 1e-9.
    """
    q, qd, qdd, qddd = (np.atleast_1d(np.asarray(p, dtype=float)) for p in jet)
    n = q.size
    z = np.concatenate([q, qd, qdd])
    zdot = np.concatenate([qd, qdd, qddd])
    flat = lambda zz: np.asarray(phi(zz[:n], zz[n : 2 * n], zz[2 * n :]), dtype=float)
    jac = numkit.fd_jacobian4(flat, z)
    aq, ad, add = jac[:, :n], jac[:, n : 2 * n], jac[:, 2 * n :]
    dt_jac = numkit.fd_directional4(lambda zz: numkit.fd_jacobian4(flat, zz), z, zdot)
    dt_ad, dt_add = dt_jac[:, n : 2 * n], dt_jac[:, 2 * n :]
    r1 = add - add.T
    r2 = (aq - aq.T) - 0.5 * (dt_ad - dt_ad.T)
    r3 = (ad + ad.T) - (dt_add + dt_add.T)
    return r1, r2, r3


def chc_implicit(fiber: Callable, ode: ImplicitODE, q, qd, qdd=None):
    """Helmholtz residuals for an implicit equation tested against a
    candidate velocity-space momentum map F(q, qd).

    The acceleration is solved from phi = 0 when not supplied.  The
    residuals vanish iff F fits the equation variationally; unlike the
    classical test this never needs the equation solved for qddot in
    closed form, only the acceleration Jacobian.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    qd = np.atleast_1d(np.asarray(qd, dtype=float))
    n = q.size
    if qdd is None:
        qdd = ode.solve_acceleration(q, qd)
    qdd = np.atleast_1d(np.asarray(qdd, dtype=float))

    z = np.concatenate([q, qd])
    zdot = np.concatenate([qd, qdd])
    flat = lambda zz: np.asarray(fiber(zz[:n], zz[n:]), dtype=float)
    jac = numkit.fd_jacobian4(flat, z)
    fq, fd = jac[:, :n], jac[:, n:]
    dt_jac = numkit.fd_directional4(lambda zz: numkit.fd_jacobian4(flat, zz), z, zdot)
    dt_fq, dt_fd = dt_jac[:, :n], dt_jac[:, n:]

    cmat = ode.C(q, qd, qdd)
    phi_flat = lambda zz: np.asarray(ode(zz[:n], zz[n:], qdd), dtype=float)
    jphi = numkit.fd_jacobian4(phi_flat, z)
    jq, jd = jphi[:, :n], jphi[:, n:]
    fd_cinv = np.linalg.solve(cmat.T, fd.T).T  # Fd @ C^{-1}

    r1 = fd - fd.T
    r2 = dt_fd + fq - fq.T - fd_cinv @ jd
    r3m = dt_fq - fd_cinv @ jq
    r3 = r3m - r3m.T
    return r1, r2, r3


def functional_residual_1d(f: Callable, g: Callable, points, fx: Callable | None = None):
    """Residual of the one-dimensional compatibility equation

        g(y, f(x, y)) df/dx(x, y) + g(x, y) = 0

    at the given (x, y) points.  Returns (max_abs, residual array).
    ``fx`` may supply the analytic x-derivative; otherwise an order-4
    stencil is used, keeping the noise below 1e-11 for smooth f.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    res = np.empty(points.shape[0])
    for k, (x, y) in enumerate(points):
        if fx is not None:
            dfdx = float(fx(x, y))
        else:
            dfdx = float(
                numkit.fd_directional4(
                    lambda z: np.array([f(z[0], z[1])]), np.array([x, y]),
                    np.array([1.0, 0.0])
                )[0]
            )
        res[k] = g(y, f(x, y)) * dfdx + g(x, y)
    return float(np.max(np.abs(res))), res


# ---------------------------------------------------------------------------
# condition reports


@dataclass
class ConditionResult:
    name: str
    max_residual: float
    worst_point: list
    tol: float
    passed: bool

    def to_json_dict(self):
        return {
            "name": self.name,
            "max_residual": self.max_residual,
            "worst_point": list(self.worst_point),
            "tol": self.tol,
            "pass": self.passed,
        }


@dataclass
class ConditionReport:
    """Outcome of a sampled check: one entry per condition plus a
    combined verdict.  ``verdict`` is true only if every condition
    passed at its effective tolerance."""

    check: str
    system: str
    params: dict = field(default_factory=dict)
    conditions: list = field(default_factory=list)

    @property
    def verdict(self):
        return all(c.passed for c in self.conditions)

    def to_json_dict(self):
        return {
            "check": self.check,
            "system": self.system,
            "params": self.params,
            "conditions": [c.to_json_dict() for c in self.conditions],
            "verdict": "pass" if self.verdict else "fail",
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)


def _collect(named_residuals, samples, tol, scale=1.0):
    """Fold per-sample residual dicts into ConditionResults.

    ``named_residuals`` is a list of (name, values) where values[k] is
    the residual matrix (or scalar) at samples[k].  The effective
    tolerance is tol * max(1, scale): residuals of well-scaled data are
    compared as-is, steep Jacobians widen the band proportionally.
    """
    eff = tol * max(1.0, scale)
    out = []
    for name, values in named_residuals:
        worst = 0.0
        worst_point = samples[0]
        for z, val in zip(samples, values):
            mag = float(np.max(np.abs(val)))
            if mag >= worst:
                worst = mag
                worst_point = z
        out.append(ConditionResult(
            name=name, max_residual=worst,
            worst_point=[float(v) for v in np.atleast_1d(worst_point)],
            tol=eff, passed=worst <= eff,
        ))
    return out


def check_dhc_explicit(fiber: FiberMap, eq: ExplicitSOdE, samples,
                       tol: float = 1e-6, system: str = "", params: dict | None = None):
    """Sampled discrete Helmholtz verdict for an explicit recurrence.

    ``samples`` holds stacked pair points of length 2n.  The verdict is
    existence of obstructions on the sampled set only; passing means no
    obstruction was found at these points.
    """
    n = fiber.dim
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    triples = ([], [], [])
    scale = 1.0
    for z in samples:
        r1, r2, r3 = dhc_explicit(fiber, eq, z[:n], z[n:])
        for bucket, val in zip(triples, (r1, r2, r3)):
            bucket.append(val)
        j0, j1 = fiber.slot_jacobians(z[:n], z[n:])
        scale = max(scale, float(np.max(np.abs(j0))), float(np.max(np.abs(j1))))
    report = ConditionReport(check="dhc-explicit", system=system, params=params or {})
    report.conditions = _collect(
        [("dHC1", triples[0]), ("dHC2", triples[1]), ("dHC3", triples[2])],
        samples, tol, scale,
    )
    return report


def check_dhc_implicit(fiber: FiberMap, eq: ImplicitSOdE, samples,
                       tol: float = 1e-6, system: str = "", params: dict | None = None,
                       cfg: NewtonConfig = DEFAULT_NEWTON):
    """Sampled implicit discrete Helmholtz verdict; samples are pair
    points, the third triple member is solved from phi = 0."""
    n = fiber.dim
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    triples = ([], [], [])
    scale = 1.0
    for z in samples:
        q0, q1 = z[:n], z[n:]
        q2 = implicit_step(eq, q0, q1, cfg=cfg)
        r1, r2, r3 = dhc_implicit(fiber, eq, q0, q1, q2)
        for bucket, val in zip(triples, (r1, r2, r3)):
            bucket.append(val)
        j0, j1 = fiber.slot_jacobians(q0, q1)
        scale = max(scale, float(np.max(np.abs(j0))), float(np.max(np.abs(j1))))
    report = ConditionReport(check="dhc-implicit", system=system, params=params or {})
    report.conditions = _collect(
        [("dHC1", triples[0]), ("dHC2", triples[1]), ("dHC3", triples[2])],
        samples, tol, scale,
    )
    return report


def check_isotropy(embedding: Callable, samples, tol: float = 1e-6,
                   system: str = "", params: dict | None = None,
                   ambient=None, lagrangian_dim: int | None = None):
    """Sampled isotropy verdict for an embedding of chart points.

    With ``lagrangian_dim`` (the ambient half-dimension) the report
    gains a dimension-count condition, upgrading isotropic to
    Lagrangian when the chart dimension matches.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    residuals = []
    scale = 1.0
    for z in samples:
        jac = numkit.fd_jacobian4(embedding, z)
        if ambient is None:
            amb = pair_omega_matrix(jac.shape[0] // 4)
        else:
            amb = np.asarray(ambient, dtype=float)
        residuals.append(jac.T @ amb @ jac)
        scale = max(scale, float(np.max(np.abs(jac))) ** 2)
    report = ConditionReport(check="isotropy", system=system, params=params or {})
    report.conditions = _collect([("isotropy", residuals)], samples, tol, scale)
    if lagrangian_dim is not None:
        m = samples.shape[1]
        gap = float(abs(m - lagrangian_dim))
        report.conditions.append(ConditionResult(
            name="lagrangian-dimension", max_residual=gap,
            worst_point=[float(m)], tol=0.5, passed=gap < 0.5,
        ))
    return report


def check_chc(phi: Callable, jets, tol: float = 1e-6,
              system: str = "", params: dict | None = None):
    """Classical Helmholtz verdict along a list of jets."""
    buckets = ([], [], [])
    flat_jets = []
    for jet in jets:
        r1, r2, r3 = chc_classical(phi, jet)
        for bucket, val in zip(buckets, (r1, r2, r3)):
            bucket.append(val)
        flat_jets.append(np.concatenate([np.atleast_1d(np.asarray(p, dtype=float))
                                         for p in jet]))
    report = ConditionReport(check="chc", system=system, params=params or {})
    report.conditions = _collect(
        [("cHC1", buckets[0]), ("cHC2", buckets[1]), ("cHC3", buckets[2])],
        flat_jets, tol,
    )
    return report


def check_ihc(fiber: Callable, ode: ImplicitODE, points, tol: float = 1e-6,
              system: str = "", params: dict | None = None):
    """Implicit continuous Helmholtz verdict at stacked (q, qd) points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[1] // 2
    buckets = ([], [], [])
    for z in points:
        r1, r2, r3 = chc_implicit(fiber, ode, z[:n], z[n:])
        for bucket, val in zip(buckets, (r1, r2, r3)):
            bucket.append(val)
    report = ConditionReport(check="ihc", system=system, params=params or {})
    report.conditions = _collect(
        [("IHC1", buckets[0]), ("IHC2", buckets[1]), ("IHC3", buckets[2])],
        points, tol,
    )
    return report


def check_functional(f: Callable, g: Callable, points, tol: float = 1e-10,
                     system: str = "", params: dict | None = None,
                     fx: Callable | None = None):
    """Verdict for a candidate solution pair of the one-dimensional
    compatibility equation."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    _, res = functional_residual_1d(f, g, points, fx=fx)
    report = ConditionReport(check="functional", system=system, params=params or {})
    report.conditions = _collect([("functional", list(res))], points, tol)
    return report


def check_two_form(omega: TwoFormField, samples, flow: Callable | None = None,
                   n_vertical: int | None = None, kernel: str = "second",
                   tol: float = 1e-6, system: str = "", params: dict | None = None):
    """Sampled two-form diagnostics.

    Closure, vertical-kernel and discrete-Lie are pass/fail conditions,
    with the tolerance widened in proportion to the largest form entry
    seen; the determinant and flat-map singular value are reported raw
    in params (min over samples) since their thresholds are the
    caller's call.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    names = ["closure", "vertical"] + (["lie"] if flow is not None else [])
    buckets = {name: [] for name in names}
    min_det = np.inf
    min_sigma = np.inf
    scale = 1.0
    for z in samples:
        out = two_form_checks(omega, z, flow=flow, n_vertical=n_vertical, kernel=kernel)
        for name in names:
            buckets[name].append(out[name])
        min_det = min(min_det, out["abs_det"])
        min_sigma = min(min_sigma, out["flat_sigma"])
        scale = max(scale, out["magnitude"])
    merged = dict(params or {})
    merged["min_abs_det"] = float(min_det)
    merged["min_flat_sigma"] = float(min_sigma)
    report = ConditionReport(check="two-form", system=system, params=merged)
    report.conditions = _collect([(n, buckets[n]) for n in names], samples, tol, scale)
    return report
