"""Conserved quantities from a pair of invariant two-forms.

When a recurrence preserves two two-forms on pair space and the first
is nondegenerate, the mixed endomorphism A = W1^{-1} W2 is conjugated
along the dynamics, so its trace powers and eigenvalues are constants
of motion.  This module builds A from two coefficient fields and offers
small helpers for monitoring such quantities along orbits.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import numkit
from .errors import DomainError
from .helmholtz import TwoFormField


def recursion_operator(primary: TwoFormField, secondary: TwoFormField) -> Callable:
    """The field z -> W_primary(z)^{-1} W_secondary(z).

    Raises SingularJacobian through the linear solver wherever the
    primary form is degenerate.
    """
    if primary.dim != secondary.dim:
        raise DomainError(
            f"two-forms live on different charts: {primary.dim} vs {secondary.dim}"
        )

    def operator(z):
        w1 = primary(z)
        w2 = secondary(z)
        cols = [numkit.lu_solve(w1, w2[:, j]) for j in range(secondary.dim)]
        return np.column_stack(cols)

    return operator


def trace_powers(operator: Callable, z, max_power: int = 2):
    """Traces of A(z)^k for k = 1 .. max_power."""
    if max_power < 1:
        raise DomainError("max_power must be at least 1")
    a = np.asarray(operator(z), dtype=float)
    out = np.empty(max_power)
    current = a
    out[0] = np.trace(current)
    for k in range(1, max_power):
        current = current @ a
        out[k] = np.trace(current)
    return out


def spectrum(operator: Callable, z):
    """Eigenvalues of A(z), sorted by real then imaginary part."""
    return np.sort_complex(np.linalg.eigvals(np.asarray(operator(z), dtype=float)))


def series_along_orbit(recurrence: Callable, q0, q1, steps: int,
                       observable: Callable):
    """Evaluate a pair observable along an orbit of the recurrence.

    Returns an array of steps + 1 values, one per consecutive pair.
    """
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    values = [observable(q0, q1)]
    for _ in range(steps):
        q0, q1 = q1, np.asarray(recurrence(q0, q1), dtype=float)
        values.append(observable(q0, q1))
    return np.asarray(values)


def pair_operator_on_orbit(operator: Callable, recurrence: Callable, q0, q1,
                           steps: int, max_power: int = 2):
    """Trace powers of the operator along an orbit, stacked row-wise."""
    return series_along_orbit(
        recurrence, q0, q1, steps,
        lambda a, b: trace_powers(operator, np.concatenate([a, b]), max_power),
    )
