import numpy as np
import pytest

from netcov.covariance import (covariance_from_distribution, pq_constants,
                               pq_covariance_closed_form, reflect)
from netcov.distributions import pq_distribution
from netcov.topology import all_bipartite, layout_for, triangle
from netcov.witnesses import (DIRECT, REFLECTED, Witness, WitnessError,
                              analytic_boundary, evaluate, in_analytic_region,
                              kappa, q0, validate_witness, w_2n, w_ghz,
                              witness_from_dict, witness_to_dict)


def test_w_ghz_entries():
    w = w_ghz()
    assert w.matrix[0, 0] == pytest.approx(-1 / 6)
    assert w.matrix[0, 1] == pytest.approx(1 / 6)
    assert w.convention == DIRECT
    assert np.allclose(w.matrix, w.matrix.T)


def test_w_ghz_detects_two_point_distribution():
    C = covariance_from_distribution(pq_distribution(3, 0.5, 0.5))
    assert evaluate(w_ghz(), C) == pytest.approx(0.5, abs=1e-12)


def test_w_ghz_validates():
    assert validate_witness(w_ghz(), triangle())


def test_validate_negative_identity_true_positive_identity_false():
    layout = layout_for([2, 2, 2])
    assert validate_witness(-np.eye(6), triangle(), layout)
    assert not validate_witness(np.eye(6), triangle(), layout)


def test_validate_requires_layout_for_bare_matrix():
    with pytest.raises(WitnessError):
        validate_witness(np.eye(6), triangle())


def test_w_2n_requires_three_parties():
    with pytest.raises(WitnessError):
        w_2n(2)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_w_2n_validates(N):
    assert validate_witness(w_2n(N), all_bipartite(N))


def test_w_2n_three_party_is_six_times_ghz_witness():
    direct = w_2n(3).reflected()
    assert direct.convention == DIRECT
    assert np.abs(direct.matrix - 6 * w_ghz().matrix).max() == 0.0


@pytest.mark.parametrize("N", [3, 4, 5])
def test_trace_formula_closed_form(N):
    rng = np.random.default_rng(100 + N)
    w = w_2n(N)
    for _ in range(20):
        p = rng.uniform(0, 1)
        q = rng.uniform(0, 1 - p)
        delta, chi = pq_constants(N, p, q)
        expected = 4 * N * (chi * (N - 2) - delta)
        value = evaluate(w, pq_covariance_closed_form(N, p, q))
        assert value == pytest.approx(expected, abs=1e-10)


def test_trace_agrees_across_conventions():
    # conjugating witness and covariance together leaves the trace invariant
    w = w_2n(3)
    C_closed = pq_covariance_closed_form(3, 0.5, 0.5)
    C_direct = covariance_from_distribution(pq_distribution(3, 0.5, 0.5))
    assert evaluate(w, C_closed) == pytest.approx(
        evaluate(w.reflected(), C_direct), abs=1e-12)


def test_reflected_round_trip():
    w = w_2n(4)
    back = w.reflected().reflected()
    assert back.convention == REFLECTED
    assert np.abs(back.matrix - w.matrix).max() == 0.0


def test_kappa_and_q0_four_parties():
    assert kappa(4) == pytest.approx(6 / 7, abs=1e-15)
    assert q0(4) == pytest.approx(5 / 7, abs=1e-15)


def test_kappa_requires_three_parties():
    with pytest.raises(WitnessError):
        kappa(2)


def test_boundary_three_party_closed_form():
    for p in np.linspace(0, 1, 100):
        expected = p + (4 - np.sqrt(1 + 48 * p)) / 3
        assert analytic_boundary(3, p) == pytest.approx(expected, abs=1e-12)


def test_boundary_range_validation():
    with pytest.raises(WitnessError):
        analytic_boundary(3, 1.5)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_region_symmetric_in_p_q(N):
    rng = np.random.default_rng(N)
    for _ in range(50):
        p = rng.uniform(0, 1)
        q = rng.uniform(0, 1 - p)
        assert in_analytic_region(N, p, q) == in_analytic_region(N, q, p)


def test_q0_detected_regardless_of_p():
    # any q above q0 lies in the region for every admissible p
    N = 4
    q = q0(N) + 1e-3
    for p in np.linspace(0, 1 - q, 30):
        assert in_analytic_region(N, p, q)


def test_evaluate_positive_beyond_q0():
    value = evaluate(w_2n(4), pq_covariance_closed_form(4, 0.0, 0.8))
    assert value > 0


def test_evaluate_dimension_mismatch():
    with pytest.raises(WitnessError):
        evaluate(w_ghz(), pq_covariance_closed_form(4, 0.1, 0.1))


def test_witness_shape_and_symmetry_validation():
    layout = layout_for([2, 2, 2])
    with pytest.raises(WitnessError):
        Witness(np.zeros((4, 4)), layout, DIRECT)
    bad = np.zeros((6, 6))
    bad[0, 1] = 1.0
    with pytest.raises(WitnessError):
        Witness(bad, layout, DIRECT)


def test_witness_serialization_round_trip():
    w = w_2n(3)
    back = witness_from_dict(witness_to_dict(w), w.layout)
    assert back.convention == REFLECTED
    assert back.name == w.name
    assert np.abs(back.matrix - w.matrix).max() == 0.0
