import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from varmech.errors import DomainError, SingularJacobian
from varmech.helmholtz import TwoFormField
from varmech.invariants import (pair_operator_on_orbit, recursion_operator,
                                series_along_orbit, spectrum, trace_powers)
from varmech.systems import exact_oscillator


def oscillator_operator(h):
    ho = exact_oscillator(h)
    op = recursion_operator(TwoFormField.from_lagrangian(ho.lagrangian),
                            TwoFormField.from_lagrangian(ho.alternate_lagrangian))
    return ho, op


def test_quarter_period_operator_is_four_identity():
    _, op = oscillator_operator(math.pi / 2)
    assert_allclose(op(np.array([0.0, 1.0])), 4.0 * np.eye(2), atol=1e-12)


def test_operator_is_conserved_scalar_times_identity():
    h = 0.1
    ho, op = oscillator_operator(h)
    rng = np.random.default_rng(0)
    for _ in range(4):
        z = rng.uniform(-1, 1, 2)
        lam = 4.0 * ho.invariant(z[:1], z[1:]) / math.sin(h) ** 2
        assert_allclose(op(z), lam * np.eye(2), atol=1e-12)


def test_trace_powers_on_cosine_orbit():
    # seeding with (1, cos h) puts the conserved quadratic at sin^2 h,
    # so the operator is 4 I and its trace powers are 8 and 32
    h = 0.1
    ho, op = oscillator_operator(h)
    z = np.concatenate(ho.initial)
    assert_allclose(trace_powers(op, z, max_power=2), [8.0, 32.0], atol=1e-12)


def test_trace_powers_drift_along_orbit():
    ho, op = oscillator_operator(0.1)
    q0, q1 = ho.initial
    rows = pair_operator_on_orbit(op, ho.recurrence, q0, q1, 400, max_power=2)
    assert rows.shape == (401, 2)
    assert np.ptp(rows[:, 0]) < 1e-11
    assert np.ptp(rows[:, 1]) < 1e-10


def test_spectrum_is_conjugation_invariant():
    ho, op = oscillator_operator(0.1)
    q0, q1 = ho.initial
    q2 = ho.recurrence(q0, q1)
    before = spectrum(op, np.concatenate([q0, q1]))
    after = spectrum(op, np.concatenate([q1, q2]))
    assert_allclose(before, after, atol=1e-12)


def test_degenerate_primary_form_raises():
    ho, _ = oscillator_operator(0.1)
    op = recursion_operator(TwoFormField.from_constant(np.zeros((2, 2))),
                            TwoFormField.from_lagrangian(ho.lagrangian))
    with pytest.raises(SingularJacobian):
        op(np.array([0.1, 0.2]))


def test_dimension_mismatch_rejected():
    with pytest.raises(DomainError):
        recursion_operator(TwoFormField.from_constant(np.zeros((2, 2))),
                           TwoFormField.from_constant(np.zeros((4, 4))))
    ho, op = oscillator_operator(0.1)
    with pytest.raises(DomainError):
        trace_powers(op, np.array([0.0, 1.0]), max_power=0)


def test_series_along_orbit_values():
    ho, _ = oscillator_operator(0.1)
    q0, q1 = ho.initial
    series = series_along_orbit(ho.recurrence, q0, q1, 30, ho.invariant)
    assert series.shape == (31,)
    assert np.ptp(series) < 1e-14
    assert_allclose(series[0], math.sin(0.1) ** 2, atol=1e-15)
