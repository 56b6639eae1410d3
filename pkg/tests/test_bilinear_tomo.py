import numpy as np
import pytest

from helpers import (
    T_DEMO,
    brute_force_output,
    measured_records,
    rand_density,
    rand_unit_bloch,
    rand_unitary,
    va_spec,
)
from procmap.bilinear_tomo import (
    CROSS_PAIRS,
    NINE_STATE_LABELS,
    BilinearProcessMap,
    MElementTable,
    MixedWithoutUnitUnit,
    ZeroGamma,
    apply_bilinear,
    basis_element,
    build_M_from_dynamics,
    element_table_from_map,
    nine_state_inputs,
    predict_output,
    solve_M_elements,
    state_of_label,
)
from procmap.dynamics import ProcessSpec
from procmap.prep import prepare_projective
from procmap.qstate import (
    IDENTITY_2,
    bloch_vector,
    is_projector,
    partial_trace_env,
    state_from_bloch,
    tensor,
)
from procmap.records import MissingRecord, TomographyRecord


def loop_build_m(u: np.ndarray, gamma0: np.ndarray, na: int, nb: int) -> np.ndarray:
    """Index-by-index construction of the process tensor; the einsum oracle."""
    m = np.zeros((na,) * 6, dtype=complex)
    for r in range(na):
        for s in range(na):
            for x in range(na):
                for p in range(na):
                    for y in range(na):
                        for q in range(na):
                            acc = 0.0 + 0.0j
                            for a in range(nb):
                                for b in range(nb):
                                    for e in range(nb):
                                        acc += (
                                            u[r * nb + e, p * nb + a]
                                            * gamma0[x * nb + a, y * nb + b]
                                            * np.conj(u[s * nb + e, q * nb + b])
                                        )
                            m[r, s, x, p, y, q] = acc
    return m


def test_build_m_matches_loop_oracle():
    rng = np.random.default_rng(41)
    u = rand_unitary(rng, 4)
    gamma0 = rand_density(rng, 4)
    bmap = build_M_from_dynamics(ProcessSpec(2, 2, u, gamma0))
    oracle = loop_build_m(u, gamma0, 2, 2)
    assert np.max(np.abs(bmap.m - oracle)) < 1e-13


def test_build_m_identity_unitary_collapse():
    # With U = 1 the tensor collapses to delta(r,r') delta(s,s') (Tr_env gamma0).
    rng = np.random.default_rng(42)
    gamma0 = rand_density(rng, 4)
    bmap = build_M_from_dynamics(ProcessSpec(2, 2, np.eye(4, dtype=complex), gamma0))
    reduced = partial_trace_env(gamma0, 2, 2)
    for r in range(2):
        for s in range(2):
            for x in range(2):
                for p in range(2):
                    for y in range(2):
                        for q in range(2):
                            want = reduced[x, y] if (r == p and s == q) else 0.0
                            assert abs(bmap.m[r, s, x, p, y, q] - want) < 1e-13


def test_trace_is_system_dimension_not_one():
    # The full-index trace equals dimA * Tr[gamma0] for any unitary; the
    # published unit-trace claim drops a factor of the system dimension
    # (see the decisions ledger).
    rng = np.random.default_rng(43)
    for _ in range(20):
        spec = ProcessSpec(2, 2, rand_unitary(rng, 4), rand_density(rng, 4))
        bmap = build_M_from_dynamics(spec)
        assert abs(bmap.trace() - 2.0) < 1e-10


def test_hermiticity_holds_exactly_as_stored():
    rng = np.random.default_rng(44)
    for _ in range(20):
        spec = ProcessSpec(2, 2, rand_unitary(rng, 4), rand_density(rng, 4))
        bmap = build_M_from_dynamics(spec)
        assert bmap.is_exactly_hermitian()


def test_apply_bilinear_identity_unitary():
    # U = 1 reduces the bi-linear form to P rho P with rho the system marginal.
    rng = np.random.default_rng(45)
    gamma0 = rand_density(rng, 4)
    bmap = build_M_from_dynamics(ProcessSpec(2, 2, np.eye(4, dtype=complex), gamma0))
    reduced = partial_trace_env(gamma0, 2, 2)
    for _ in range(5):
        p = state_from_bloch(rand_unit_bloch(rng))
        got = apply_bilinear(bmap, p)
        want = p @ reduced @ p
        assert np.max(np.abs(got - want)) < 1e-12
        assert abs(np.trace(got) - np.trace(p @ reduced)) < 1e-12


def test_apply_bilinear_expands_cross_terms():
    # <aA+bB|M|aA+bB> = a^2<A|M|A> + ab<A|M|B> + ab<B|M|A> + b^2<B|M|B>
    spec = va_spec()
    bmap = build_M_from_dynamics(spec)
    a_mat = state_from_bloch([1, 0, 0])
    b_mat = state_from_bloch([0, 0, 1])
    alpha, beta = 0.7, -0.4
    combo = alpha * a_mat + beta * b_mat
    expanded = (
        alpha**2 * basis_element(bmap, a_mat, a_mat)
        + alpha * beta * basis_element(bmap, a_mat, b_mat)
        + alpha * beta * basis_element(bmap, b_mat, a_mat)
        + beta**2 * basis_element(bmap, b_mat, b_mat)
    )
    assert np.max(np.abs(apply_bilinear(bmap, combo) - expanded)) < 1e-12


def test_apply_bilinear_golden_outputs():
    spec = va_spec()
    bmap = build_M_from_dynamics(spec)
    gq = apply_bilinear(bmap, state_of_label("2+"))
    gamma = np.trace(gq).real
    assert abs(gamma - 0.75) < 1e-12
    assert np.max(np.abs(bloch_vector(gq / gamma) - np.array([-0.1, 0.5, 0.1]))) < 1e-12

    gq = apply_bilinear(bmap, state_of_label("2-"))
    gamma = np.trace(gq).real
    assert abs(gamma - 0.25) < 1e-12
    assert np.max(np.abs(bloch_vector(gq / gamma) - np.array([-0.3, -0.5, -0.3]))) < 1e-12


def test_bilinear_form_equals_projected_dynamics():
    # <P|M|P> = Tr_env[U (P x 1) gamma0 (P x 1) U'] for every projector P.
    rng = np.random.default_rng(46)
    spec = ProcessSpec(2, 2, rand_unitary(rng, 4), rand_density(rng, 4))
    bmap = build_M_from_dynamics(spec)
    for _ in range(20):
        p = state_from_bloch(rand_unit_bloch(rng))
        big_p = tensor(p, IDENTITY_2)
        want = brute_force_output(spec.u, big_p @ spec.gamma0 @ big_p, 2, 2)
        assert np.max(np.abs(apply_bilinear(bmap, p) - want)) < 1e-10


def test_nine_state_inputs_golden():
    states = nine_state_inputs()
    assert len(states) == 9
    for state in states:
        assert is_projector(state, tol=1e-14)
    by_label = dict(zip(NINE_STATE_LABELS, states))
    assert np.allclose(bloch_vector(by_label["4+"]), [1 / np.sqrt(2), 1 / np.sqrt(2), 0], atol=1e-15)
    # the first six pair into orthogonal partners
    for d in "123":
        overlap = np.trace(by_label[f"{d}+"] @ by_label[f"{d}-"]).real
        assert abs(overlap) < 1e-14


def test_solve_elements_matches_direct_contractions():
    spec = va_spec()
    records = measured_records(spec, NINE_STATE_LABELS)
    table = solve_M_elements(records)
    direct = element_table_from_map(build_M_from_dynamics(spec))
    for got, want in zip(table.diag_plus + table.linear, direct.diag_plus + direct.linear):
        assert np.max(np.abs(got - want)) < 1e-10
    for jk in CROSS_PAIRS:
        assert np.max(np.abs(table.cross[jk] - direct.cross[jk])) < 1e-10
    assert table.unit_unit is None
    assert table.hermiticity_residual() < 1e-10


def test_solve_elements_identity_process_hand_algebra():
    # For U = 1, gamma0 = rho x tau:  Gamma Q = P rho P, so
    # D_j = 2(P+ rho P+ + P- rho P-), Y_j = 2(P+ rho P+ - P- rho P-).
    rng = np.random.default_rng(47)
    rho, tau = rand_density(rng, 2), rand_density(rng, 2)
    gamma0 = tensor(rho, tau)
    spec = ProcessSpec(2, 2, np.eye(4, dtype=complex), gamma0)
    records = measured_records(spec, NINE_STATE_LABELS)
    table = solve_M_elements(records)
    axes = {1: [1, 0, 0], 2: [0, 1, 0], 3: [0, 0, 1]}
    for j, axis in axes.items():
        plus = state_from_bloch(axis)
        minus = state_from_bloch([-a for a in axis])
        d_want = 2.0 * (plus @ rho @ plus + minus @ rho @ minus)
        y_want = 2.0 * (plus @ rho @ plus - minus @ rho @ minus)
        assert np.max(np.abs(table.diag_plus[j - 1] - d_want)) < 1e-12
        assert np.max(np.abs(table.linear[j - 1] - y_want)) < 1e-12


def test_cross_term_coefficient_form():
    # The solved cross term equals the -2(1 +/- sqrt2) weighted combination.
    spec = va_spec()
    records = {rec.label: rec for rec in measured_records(spec, NINE_STATE_LABELS)}
    table = solve_M_elements(records.values())
    sqrt2 = np.sqrt(2.0)
    for (j, k), pair_label in zip(CROSS_PAIRS, ("4+", "5+", "6+")):
        terms = -2.0 * (1.0 + sqrt2) * records[f"{j}+"].gamma * records[f"{j}+"].output
        terms = terms - 2.0 * (1.0 - sqrt2) * records[f"{j}-"].gamma * records[f"{j}-"].output
        terms = terms - 2.0 * (1.0 + sqrt2) * records[f"{k}+"].gamma * records[f"{k}+"].output
        terms = terms - 2.0 * (1.0 - sqrt2) * records[f"{k}-"].gamma * records[f"{k}-"].output
        terms = terms + 8.0 * records[pair_label].gamma * records[pair_label].output
        assert np.max(np.abs(table.cross[(j, k)] - terms)) < 1e-12


def test_solve_elements_requires_all_labels():
    spec = va_spec()
    records = measured_records(spec, NINE_STATE_LABELS)
    with pytest.raises(MissingRecord):
        solve_M_elements(records[:-1])
    bad = [TomographyRecord(r.label, r.input, r.output, 0.0) for r in records]
    with pytest.raises(ZeroGamma):
        solve_M_elements(bad)


def test_predict_output_golden():
    spec = va_spec()
    table = solve_M_elements(measured_records(spec, NINE_STATE_LABELS))
    gamma, q = predict_output(table, [0, 1, 0])
    assert abs(gamma - 0.75) < 1e-12
    assert np.max(np.abs(bloch_vector(q) - np.array([-0.1, 0.5, 0.1]))) < 1e-12
    gamma, q = predict_output(table, [0, -1, 0])
    assert abs(gamma - 0.25) < 1e-12
    assert np.max(np.abs(bloch_vector(q) - np.array([-0.3, -0.5, -0.3]))) < 1e-12


def test_predict_matches_direct_route_100_random():
    spec = va_spec()
    table = solve_M_elements(measured_records(spec, NINE_STATE_LABELS))
    bmap = build_M_from_dynamics(spec)
    rng = np.random.default_rng(48)
    for _ in range(100):
        v = rand_unit_bloch(rng)
        gq = apply_bilinear(bmap, state_from_bloch(v))
        gamma_direct = np.trace(gq).real
        gamma, q = predict_output(table, v)
        assert abs(gamma - gamma_direct) < 1e-9
        assert np.max(np.abs(bloch_vector(q) - bloch_vector(gq / gamma_direct))) < 1e-9


def test_predict_mixed_requires_unit_unit():
    spec = va_spec()
    table = solve_M_elements(measured_records(spec, NINE_STATE_LABELS))
    with pytest.raises(MixedWithoutUnitUnit):
        predict_output(table, [0.5, 0, 0])


def test_mixed_record_resolves_unit_unit():
    spec = va_spec()
    bmap = build_M_from_dynamics(spec)
    x = state_from_bloch([0.5, 0.0, 0.0])
    big_x = tensor(x, IDENTITY_2)
    gq = brute_force_output(spec.u, big_x @ spec.gamma0 @ big_x, 2, 2)
    gamma = np.trace(gq).real
    mixed = TomographyRecord("mixed", x, gq / gamma, gamma)
    table = solve_M_elements(measured_records(spec, NINE_STATE_LABELS), mixed_record=mixed)
    direct = element_table_from_map(bmap)
    assert np.max(np.abs(table.unit_unit - direct.unit_unit)) < 1e-10
    # and mixed predictions now agree with the raw bi-linear form
    rng = np.random.default_rng(49)
    for _ in range(20):
        v = rng.uniform(-0.5, 0.5, size=3)
        gq = apply_bilinear(bmap, state_from_bloch(v))
        gamma_direct = np.trace(gq).real
        gamma, q = predict_output(table, v)
        assert abs(gamma - gamma_direct) < 1e-10
        assert np.max(np.abs(q - gq / gamma_direct)) < 1e-10


def test_bilinear_map_json_roundtrip():
    spec = va_spec()
    bmap = build_M_from_dynamics(spec)
    back = BilinearProcessMap.from_json(bmap.to_json())
    assert back.dim == 2
    assert np.array_equal(back.m, bmap.m)


def test_element_table_json_roundtrip():
    spec = va_spec()
    table = element_table_from_map(build_M_from_dynamics(spec))
    back = MElementTable.from_json(table.to_json())
    for got, want in zip(back.diag_plus + back.linear, table.diag_plus + table.linear):
        assert np.array_equal(got, want)
    for jk in CROSS_PAIRS:
        assert np.array_equal(back.cross[jk], table.cross[jk])
    assert np.array_equal(back.unit_unit, table.unit_unit)
