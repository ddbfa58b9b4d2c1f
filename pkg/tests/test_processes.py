import math
import warnings

import numpy as np
import pytest

from phasefluct.errors import RoleMismatch
from phasefluct.evolution import evaluate, heisenberg_taylor
from phasefluct.fock import (
    build_space,
    coherent_pump_state,
    expectation,
    hermiticity_defect,
    max_entry_difference,
    max_shift,
)
from phasefluct.markers import UNDEF
from phasefluct.pipeline import evolved_state
from phasefluct.processes import (
    PROCESSES,
    ProcessSpec,
    ValidityWarning,
    closed_form,
    conserved_quantities,
    default_cutoffs,
    heisenberg_reference_operator,
    interaction_hamiltonian,
    process_space,
    pump_lowering,
)


def spec_at(kind, x, alpha_sq=1.0, theta=0.0, g=1.0):
    """Spec with g^2 t^2 |alpha|^2 = x."""
    return ProcessSpec.create(kind, alpha_sq, theta, g, math.sqrt(x / alpha_sq) / g)


# -- specs and spaces -------------------------------------------------------

def test_spec_validation():
    with pytest.raises(ValueError):
        ProcessSpec.create("fivewave", 1, 0, 1, 0.1)
    with pytest.raises(ValueError):
        ProcessSpec.create("fwm", 1, 0, 1, -0.1)
    with pytest.raises(ValueError):
        ProcessSpec.create("fwm", -1, 0, 1, 0.1)


def test_default_fwm_cutoffs():
    assert default_cutoffs("fwm", 1.0) == (23, 7, 7)
    assert process_space("shg", 1.0).mode_roles == ("pump", "harmonic")


def test_role_mismatch():
    spec = ProcessSpec.create("shg", 1, 0, 1, 0.1)
    with pytest.raises(RoleMismatch):
        interaction_hamiltonian(spec, process_space("fwm", 1.0))


# -- Hamiltonians -----------------------------------------------------------

@pytest.mark.parametrize("kind", PROCESSES)
def test_hamiltonian_hermitian(kind):
    spec = ProcessSpec.create(kind, 1, 0, 0.7, 0.1)
    H = interaction_hamiltonian(spec, process_space(spec))
    assert H.hermitian
    assert hermiticity_defect(H.matrix) <= 1e-12


def test_fwm_hamiltonian_kills_vacuum():
    spec = ProcessSpec.create("fwm", 1, 0, 1, 0.1)
    space = process_space(spec)
    np.testing.assert_array_equal(interaction_hamiltonian(spec, space) @ space.vacuum(), 0)


def test_shg_hamiltonian_on_two_photons():
    g = 0.3
    spec = ProcessSpec.create("shg", 1, 0, g, 0.1)
    space = build_space(["pump", "harmonic"], [4, 3])
    out = interaction_hamiltonian(spec, space) @ space.basis_state([2, 0])
    expected = np.zeros(space.total_dim, dtype=complex)
    expected[space.index([0, 1])] = g * math.sqrt(2)
    np.testing.assert_allclose(out, expected, atol=1e-15)


@pytest.mark.parametrize("kind", PROCESSES)
def test_conserved_quantities_commute(kind):
    spec = ProcessSpec.create(kind, 1, 0, 1, 0.1)
    space = process_space(spec)
    H = interaction_hamiltonian(spec, space)
    for q in conserved_quantities(kind, space).values():
        assert abs(H.matrix @ q.matrix - q.matrix @ H.matrix).max() <= 1e-12


@pytest.mark.parametrize("kind", PROCESSES)
def test_conservation_under_evolution(kind):
    spec = ProcessSpec.create(kind, 1.0, 0.4, 1.0, 0.05)
    space = process_space(spec)
    psi0 = coherent_pump_state(space, spec.pump)
    psi = evolved_state(spec)
    for q in conserved_quantities(kind, space).values():
        assert abs(expectation(psi, q) - expectation(psi0, q)) <= 1e-8


# -- reference operator -----------------------------------------------------

@pytest.mark.parametrize("kind", PROCESSES)
def test_reference_at_zero_time(kind):
    spec = ProcessSpec.create(kind, 1, 0, 1, 0.0)
    space = process_space(spec)
    A = pump_lowering(space)
    assert max_entry_difference(heisenberg_reference_operator(spec, space), A) == 0.0


def test_reference_at_zero_coupling():
    spec = ProcessSpec.create("fwm", 1, 0, 0.0, 0.3)
    space = process_space(spec)
    assert max_entry_difference(heisenberg_reference_operator(spec, space),
                                pump_lowering(space)) == 0.0


@pytest.mark.parametrize("kind", PROCESSES)
def test_reference_matches_nested_commutators(kind):
    spec = ProcessSpec.create(kind, 1, 0, 0.1, 0.1)
    space = process_space(spec)
    H = interaction_hamiltonian(spec, space)
    A = pump_lowering(space)
    taylor = evaluate(heisenberg_taylor(H, A, 2), spec.t)
    margin = 2 * max_shift(H) + max_shift(A)
    diff = max_entry_difference(taylor, heisenberg_reference_operator(spec, space),
                                space.interior_indices(margin))
    assert diff <= 1e-9


# -- closed forms -----------------------------------------------------------

def test_fwm_u_value():
    assert closed_form(spec_at("fwm", 4e-4)).U == pytest.approx(0.4979984, abs=5e-8)


def test_swm_u_value():
    assert closed_form(spec_at("swm", 4e-4)).U == pytest.approx(0.4879421, abs=5e-8)


def test_shg_d_value():
    spec = ProcessSpec.create("shg", 4.0, 0.0, 1e-2, 1.0)
    assert closed_form(spec).d == pytest.approx(-3.2e-3, rel=1e-12)


def test_fwm_initial_s():
    spec = ProcessSpec.create("fwm", 1.0, 0.0, 1.0, 0.0)
    s_param = closed_form(spec).S_param
    assert abs(s_param - 1 / 6) <= 1e-12
    assert round(s_param, 7) == 0.1666667


@pytest.mark.parametrize("kind", PROCESSES)
def test_initial_values(kind):
    res = closed_form(ProcessSpec.create(kind, 2.0, 0.3, 1.0, 0.0))
    assert res.U == 0.5
    assert res.d == 0.0
    assert res.N_bar == 2.0


def test_fwm_depletion_and_variance():
    res = closed_form(ProcessSpec.create("fwm", 2.0, 0.0, 1.0, 0.01))
    assert res.N_bar == pytest.approx(2 - 2e-4 * 4)
    assert res.var_N == pytest.approx(2 - 8e-4 * 4)
    assert res.d == pytest.approx(-6e-4 * 4)


def test_swm_d_formula():
    res = closed_form(ProcessSpec.create("swm", 1.0, 0.0, 1.0, 0.005))
    assert res.d == pytest.approx(-3e-4, rel=1e-12)


def test_initial_q():
    res = closed_form(ProcessSpec.create("fwm", 1.0, 0.0, 1.0, 0.0))
    assert res.Q == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("alpha_sq,theta", [(0.0, 0.0), (1.0, math.pi / 2)])
def test_q_undefined(alpha_sq, theta):
    res = closed_form(ProcessSpec.create("fwm", alpha_sq, theta, 1.0, 0.01))
    assert res.Q is UNDEF


@pytest.mark.parametrize("kind", PROCESSES)
def test_u_independent_of_theta(kind):
    us = {closed_form(ProcessSpec.create(kind, 2.0, th, 1.0, 0.01)).U
          for th in np.linspace(0, 2 * math.pi, 9)}
    assert len(us) == 1


def test_validity_warning():
    spec = ProcessSpec.create("swm", 4.0, 0.0, 1.0, 0.1)
    assert spec.beyond_validity
    with pytest.warns(ValidityWarning):
        closed_form(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        closed_form(spec, warn=False)


def test_provenance_names_every_field():
    res = closed_form(spec_at("fwm", 1e-4))
    assert {"N_bar", "var_N", "d", "U", "S_param", "Q"} <= set(res.provenance)
