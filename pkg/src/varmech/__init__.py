"""Discrete variational mechanics toolkit.

Integrators for discrete Lagrangian and nonholonomic systems, plus
numerical tests that decide whether a given second-order difference
equation is variational: discrete Helmholtz conditions, isotropy of
fiber-map embeddings, two-form diagnostics, recursion operators, and a
bridge to the continuous theory via exact discrete Lagrangians.
"""

__version__ = "0.1.0"
