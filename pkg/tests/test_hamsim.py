import math

import numpy as np
import pytest
from scipy.linalg import expm

from scusim.channels import pauli_decompose_matrix
from scusim.circuits import dense_unitary
from scusim.hamsim import (
    MarkovPartition,
    ProductFormulaSeries,
    cts_decompose,
    cts_overhead,
    cts_schedule,
    cts_steps_for_error,
    cts_steps_for_overhead,
    enhanced_pf_decompose,
    enhanced_pf_schedule,
    markov_partition_sample,
    pf_enhanced_overhead,
    pf_enhanced_steps_for_overhead,
    pf_exponent_factors,
    pf_remainder,
    pf_steps_for_error,
    product_formula,
)
from scusim.paulis import (
    HamiltonianPowers,
    PauliString,
    PauliSum,
    commutator,
    exp_series_tail,
)
from scusim.resources import tfim_hamiltonian


def dense_taylor(h_dense: np.ndarray, t: float, order: int) -> np.ndarray:
    out = np.eye(h_dense.shape[0], dtype=complex)
    acc = np.eye(h_dense.shape[0], dtype=complex)
    for l in range(1, order + 1):
        acc = acc @ (-1j * t * h_dense) / l
        out += acc
    return out


def random_hermitian_sum(rng, n, max_terms=5):
    return PauliSum.from_terms(n, [
        (float(rng.normal()), PauliString(n, int(rng.integers(0, 1 << n)),
                                          int(rng.integers(0, 1 << n)), 0))
        for _ in range(int(rng.integers(2, max_terms + 1)))
    ])


# -------------------------------------------------------------------- CTS

def test_cts_single_x_closed_form():
    h = PauliSum.from_label_coeffs([(1.0, "X")])
    t, order = 0.7, 7
    dec = cts_decompose(h, t, order)
    cos_trunc = sum((-1) ** m * t ** (2 * m) / math.factorial(2 * m) for m in range(1, 4))
    sin_trunc = sum((-1) ** m * t ** (2 * m + 1) / math.factorial(2 * m + 1)
                    for m in range(4))
    assert dec.l_cos == pytest.approx(abs(cos_trunc), abs=1e-14)
    assert dec.l_sin == pytest.approx(abs(sin_trunc), abs=1e-14)
    np.testing.assert_allclose(dec.reconstruction().to_dense(),
                               dense_taylor(h.to_dense(), t, order), atol=1e-12)


def test_cts_zero_time():
    h = PauliSum.from_label_coeffs([(0.7, "X"), (0.2, "ZZ"[0:1])])
    dec = cts_decompose(h, 0.0, 3)
    assert dec.l_cos == 0.0 and dec.l_sin == 0.0
    assert dec.theta == 0.0 and dec.mu == pytest.approx(1.0)
    assert not dec.pauli_terms
    assert len(dec.rotation_terms) == 1


def test_cts_reconstruction_tfim():
    h = tfim_hamiltonian(3)
    t, order = 0.1, 3
    dec = cts_decompose(h, t, order)
    np.testing.assert_allclose(dec.reconstruction().to_dense(),
                               dense_taylor(h.to_dense(), t, order), atol=1e-10)


def test_cts_reconstruction_random():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        h = random_hermitian_sum(rng, n)
        t = float(rng.uniform(0.05, 0.6))
        order = int(rng.choice([2, 3, 5]))
        dec = cts_decompose(h, t, order)
        np.testing.assert_allclose(dec.reconstruction().to_dense(),
                                   dense_taylor(h.to_dense(), t, order), atol=1e-10)
        x = t * h.l1_norm()
        assert dec.l_cos <= math.cosh(x) - 1 + 1e-9
        assert dec.l_sin <= math.sinh(x) + 1e-9
        probs = [p for p, _ in dec.pauli_terms] + [p for p, _ in dec.rotation_terms]
        assert sum(probs) == pytest.approx(1.0, abs=1e-10)


def test_cts_rotation_gate_identity():
    # the rotation family realizes (I + i L_s P) / sqrt(1 + L_s^2)
    h = tfim_hamiltonian(2)
    dec = cts_decompose(h, 0.3, 3)
    root = math.sqrt(1 + dec.l_sin ** 2)
    for _, pauli in dec.rotation_terms[:2]:
        gate_u = dense_unitary(dec.rotation_gates(pauli))
        expect = (np.eye(4) + 1j * dec.l_sin * pauli.to_dense()) / root
        np.testing.assert_allclose(gate_u, expect, atol=1e-12)


def test_cts_negative_time_mirrors_distribution():
    h = tfim_hamiltonian(2)
    fwd = cts_decompose(h, 0.4, 3)
    bwd = cts_decompose(h, -0.4, 3)
    assert fwd.mu == pytest.approx(bwd.mu, abs=1e-14)
    assert fwd.theta == pytest.approx(bwd.theta, abs=1e-14)
    for (pf, sf), (pb, sb) in zip(fwd.pauli_terms, bwd.pauli_terms):
        assert pf == pytest.approx(pb, abs=1e-14)
        assert sf == sb  # even part is time-symmetric
    for (pf, sf), (pb, sb) in zip(fwd.rotation_terms, bwd.rotation_terms):
        assert pf == pytest.approx(pb, abs=1e-14)
        assert sf.x_mask == sb.x_mask and sf.z_mask == sb.z_mask
        assert sf.phase_exp == (sb.phase_exp + 2) % 4  # odd part flips sign


def test_cts_schedule_zero_hamiltonian():
    h = PauliSum.zero(1)
    sched = cts_schedule(h, 1.0, 1, 3, np.random.default_rng(0))
    assert sched.lam == pytest.approx(1.0)
    assert len(sched.left) == len(sched.right) == 1
    assert sched.left[0].kind == "rotation"
    assert sched.left[0].pauli.is_identity_body


def test_cts_expected_channel_error_within_bound():
    h = tfim_hamiltonian(2)
    t, order = 1.0, 3
    hd = h.to_dense()
    exact = expm(-1j * t * hd)
    for r in (5, 20, 100):
        step = dense_taylor(hd, t / r, order)
        approx = np.linalg.matrix_power(step, r)
        err = np.linalg.norm(exact - approx, ord=2)
        bound = r * exp_series_tail(h.l1_norm() * t / r, order)
        assert err <= 1.05 * bound + 1e-12


def test_cts_overhead_monotone_to_one():
    # monotone decrease holds once the per-step argument |H|_1 t / r is
    # inside the truncated series' regime of validity (<= 1)
    h = tfim_hamiltonian(3)
    t = 2.0
    r_min = math.ceil(h.l1_norm() * t)
    rs = [r_min * 2 ** k for k in range(12)]
    lams = [cts_overhead(h, t, r, 3) for r in rs]
    assert all(a >= b - 1e-12 for a, b in zip(lams, lams[1:]))
    assert lams[-1] == pytest.approx(1.0, abs=2e-2)
    assert all(l >= 1.0 - 1e-12 for l in lams)


def test_cts_schedule_deterministic():
    h = tfim_hamiltonian(2)
    a = cts_schedule(h, 1.0, 10, 3, np.random.default_rng(9), seed=9)
    b = cts_schedule(h, 1.0, 10, 3, np.random.default_rng(9), seed=9)
    assert a.to_json_dict() == b.to_json_dict()


# ----------------------------------------------------------- step solvers

def test_steps_for_error_trivial():
    h = tfim_hamiltonian(2)
    assert cts_steps_for_error(h, 1.0, 3, 1e12) == 1


def test_steps_for_error_self_consistent():
    h = PauliSum.from_label_coeffs([(1.0, "X")])  # |H|_1 * t = 1
    order, eps = 3, 1e-6
    r = cts_steps_for_error(h, 1.0, order, eps)
    assert r * exp_series_tail(1.0 / r, order) <= eps
    if r > 1:
        assert (r - 1) * exp_series_tail(1.0 / (r - 1), order) > eps


def test_steps_for_error_scaling_in_eps():
    h = tfim_hamiltonian(2)
    order = 3
    epses = np.logspace(-9, -3, 7)
    rs = [cts_steps_for_error(h, 1.0, order, float(e)) for e in epses]
    assert all(a >= b for a, b in zip(rs, rs[1:]))  # monotone in eps
    slope = np.polyfit(np.log(1.0 / epses), np.log(rs), 1)[0]
    assert slope == pytest.approx(1.0 / order, abs=0.08)


def test_steps_for_overhead_trivial():
    h = tfim_hamiltonian(2)
    lam_t1 = cts_overhead(h, 1.0, 1, 3)
    assert cts_steps_for_overhead(h, 1.0, lam_t1 * 2, 3) == 1


def test_steps_for_overhead_self_consistent():
    h = tfim_hamiltonian(10)
    t, order, lam_max = 10.0, 3, 2.0
    r = cts_steps_for_overhead(h, t, lam_max, order)
    assert cts_overhead(h, t, r, order) <= lam_max
    assert cts_overhead(h, t, r - 1, order) > lam_max


def test_steps_for_overhead_quadratic_in_time():
    h = tfim_hamiltonian(2)
    order, lam_max = 3, 2.0
    times = [4.0, 8.0, 16.0, 32.0]
    rs = [cts_steps_for_overhead(h, t, lam_max, order) for t in times]
    slope = np.polyfit(np.log(times), np.log(rs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_steps_for_overhead_rejects_bad_budget():
    with pytest.raises(ValueError):
        cts_steps_for_overhead(tfim_hamiltonian(2), 1.0, 1.0, 3)


# ------------------------------------------------------- product formulas

def test_pf_factor_ordering():
    h = tfim_hamiltonian(3)
    factors = pf_exponent_factors(h, 1)
    labels = [p.to_label() for _, p in factors]
    assert labels == ["ZZI", "IZZ", "XII", "IXI", "IIX"]
    second = pf_exponent_factors(h, 2)
    assert [p.to_label() for _, p in second] == labels + labels[::-1]
    assert all(c == pytest.approx(f / 2) for (c, _), (f, _) in
               zip(second[:5], factors))


def test_pf_commuting_exact():
    h = PauliSum.from_label_coeffs([(0.3, "ZZ"), (-0.7, "ZI"), (0.2, "IZ")])
    t = 0.9
    u = dense_unitary(product_formula(h, t, 1))
    np.testing.assert_allclose(u, expm(-1j * t * h.to_dense()), atol=1e-12)


@pytest.mark.parametrize("order,slope_expect", [(1, 2.0), (2, 3.0)])
def test_pf_error_scaling(order, slope_expect):
    h = tfim_hamiltonian(2)
    hd = h.to_dense()
    times = [0.2 / 2 ** k for k in range(5)]
    errs = [np.linalg.norm(dense_unitary(product_formula(h, t, order))
                           - expm(-1j * t * hd), ord=2) for t in times]
    slope = np.polyfit(np.log(times), np.log(errs), 1)[0]
    assert slope == pytest.approx(slope_expect, abs=0.1)


def test_pf_remainder_commuting_is_zero():
    h = PauliSum.from_label_coeffs([(0.5, "ZZ"), (0.25, "IZ")])
    rem = pf_remainder(h, 0.3, 1, 3)
    assert rem.n_terms == 0


def test_pf_remainder_leading_commutator():
    h = PauliSum.from_label_coeffs([(1.0, "X"), (1.0, "Z")])
    t = 0.1
    rem = pf_remainder(h, t, 1, 2)
    factors = pf_exponent_factors(h, 1)
    a = PauliSum.from_pauli(factors[0][1], factors[0][0])
    b = PauliSum.from_pauli(factors[1][1], factors[1][0])
    expect = 0.5 * t * t * commutator(a, b)
    np.testing.assert_allclose(rem.to_dense(), expect.to_dense(), atol=1e-12)


def test_pf_remainder_matches_dense_difference():
    rng = np.random.default_rng(7)
    for order, max_order in [(1, 2), (1, 3), (2, 4)]:
        h = tfim_hamiltonian(3)
        hd = h.to_dense()
        t = 0.08
        rem = pf_remainder(h, t, order, max_order)
        diff = expm(-1j * t * hd) - dense_unitary(product_formula(h, t, order))
        # remainder reproduces the dense difference through order max_order
        scale = t ** (max_order + 1) * h.l1_norm() ** (max_order + 1) \
            / math.factorial(max_order + 1)
        assert np.linalg.norm(rem.to_dense() - diff, ord=2) < 20 * scale


def test_pf_remainder_leading_order_in_t():
    h = tfim_hamiltonian(2)
    for order in (1, 2):
        norms = []
        times = [0.2, 0.1, 0.05, 0.025]
        for t in times:
            norms.append(pf_remainder(h, t, order, order + 2).l1_norm())
        slope = np.polyfit(np.log(times), np.log(norms), 1)[0]
        assert slope == pytest.approx(order + 1, abs=0.1)


def test_pf_series_validates_orders():
    h = tfim_hamiltonian(2)
    with pytest.raises(ValueError):
        ProductFormulaSeries(h, 1, 1)
    with pytest.raises(ValueError):
        ProductFormulaSeries(h, 3, 5)


# ------------------------------------------------------------ enhanced PF

def test_enhanced_commuting_trivial():
    h = PauliSum.from_label_coeffs([(0.5, "ZZ"), (0.25, "IZ")])
    dec = enhanced_pf_decompose(h, 0.3, 1, 3)
    assert dec.mu == pytest.approx(1.0)
    assert dec.p0 == pytest.approx(1.0)
    assert not dec.corrections


def test_enhanced_mu_cross_checked_by_dense_projection():
    h = PauliSum.from_label_coeffs([(1.0, "X"), (1.0, "Z")])
    t, order, max_order = 0.1, 1, 3
    dec = enhanced_pf_decompose(h, t, order, max_order)
    # independent oracle: project the dense series difference onto Paulis
    hd = h.to_dense()
    s1 = np.eye(2, dtype=complex)
    for c, p in pf_exponent_factors(h, order):
        s1 = s1 @ expm(-1j * c * t * p.to_dense())
    # truncate both sides at max_order by subtracting the analytic tails:
    # at this small t the tail beyond order 3 is ~t^4/24 ~ 4e-6; compare at
    # matching precision instead of exactly
    dense_rem = expm(-1j * t * hd) - s1
    projected = pauli_decompose_matrix(dense_rem)
    assert dec.mu - 1.0 == pytest.approx(projected.l1_norm(), abs=1e-4)


def test_enhanced_reconstruction_dense():
    h = tfim_hamiltonian(2)
    t, order, max_order = 0.15, 1, 3
    dec = enhanced_pf_decompose(h, t, order, max_order)
    s_dense = dense_unitary(dec.base_formula)
    mix = dec.mu * (dec.p0 * s_dense + sum(
        prob * phase * pauli.to_dense() for prob, phase, pauli in dec.corrections))
    rem = pf_remainder(h, t, order, max_order)
    np.testing.assert_allclose(mix, s_dense + rem.to_dense(), atol=1e-10)
    assert dec.p0 + sum(p for p, _, _ in dec.corrections) == pytest.approx(1.0)


def test_enhanced_overhead_slope_vs_r():
    h = tfim_hamiltonian(2)
    t = 2.0
    for order, max_order in [(1, 3), (2, 4)]:
        series = ProductFormulaSeries(h, order, max_order)
        rs = [20, 40, 80, 160, 320]
        lams = [pf_enhanced_overhead(h, t, r, order, max_order, series=series)
                for r in rs]
        slope = np.polyfit(np.log(rs), np.log(np.array(lams) - 1.0), 1)[0]
        assert slope == pytest.approx(-order, abs=0.2)


def test_enhanced_overhead_solver_self_consistent():
    h = tfim_hamiltonian(3)
    t, order, max_order, lam_max = 3.0, 1, 3, 2.0
    series = ProductFormulaSeries(h, order, max_order)
    r = pf_enhanced_steps_for_overhead(h, t, order, max_order, lam_max, series=series)
    assert pf_enhanced_overhead(h, t, r, order, max_order, series=series) <= lam_max
    assert pf_enhanced_overhead(h, t, r - 1, order, max_order, series=series) > lam_max


def test_pf_error_solver_self_consistent():
    h = tfim_hamiltonian(3)
    t, order, max_order, eps = 3.0, 1, 3, 1e-4
    series = ProductFormulaSeries(h, order, max_order)
    r = pf_steps_for_error(h, t, order, max_order, eps, series=series)
    assert r * series.step_error_bound(t / r) <= eps
    assert (r - 1) * series.step_error_bound(t / (r - 1)) > eps


def test_enhanced_schedule_draws_and_lambda():
    h = tfim_hamiltonian(2)
    rng = np.random.default_rng(5)
    sched = enhanced_pf_schedule(h, 1.0, 50, 1, 3, rng, seed=5)
    assert sched.r == 50
    kinds = {d.kind for d in sched.left + sched.right}
    assert "base_formula" in kinds
    assert sched.lam >= 1.0


# ------------------------------------------------------------- Markov layers

def test_markov_single_factor_plain_sampling():
    a = PauliSum.from_label_coeffs([(0.6, "X"), (-0.8, "Z")])
    part = MarkovPartition([(a, 1)])
    assert part.weight == pytest.approx(a.l1_norm())
    total = PauliSum.zero(1)
    for prob, phase, pauli in part.enumerate_terms():
        total = total + PauliSum.from_pauli(pauli, prob * phase * part.weight)
    np.testing.assert_allclose(total.to_dense(), a.to_dense(), atol=1e-12)


def test_markov_two_layer_matches_full_expansion():
    a = PauliSum.from_label_coeffs([(1.0, "X"), (1.0, "Z")])
    b = PauliSum.from_label_coeffs([(1.0, "Y")])
    part = MarkovPartition([(a, 2), (b, 1)])
    expect = (a @ a) @ b
    total = PauliSum.zero(1)
    for prob, phase, pauli in part.enumerate_terms():
        total = total + PauliSum.from_pauli(pauli, prob * phase * part.weight)
    np.testing.assert_allclose(total.to_dense(), expect.to_dense(), atol=1e-12)
    np.testing.assert_allclose(part.full_expansion().to_dense(), expect.to_dense(),
                               atol=1e-12)


def test_markov_weight_dominates_full_expansion_norm():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = 2
        a = random_hermitian_sum(rng, n, max_terms=3)
        b = random_hermitian_sum(rng, n, max_terms=3)
        part = MarkovPartition([(a, 2), (b, 1)])
        assert part.weight >= part.full_expansion().l1_norm() - 1e-10


def test_markov_sampling_distribution():
    a = PauliSum.from_label_coeffs([(3.0, "X"), (1.0, "Z")])
    rng = np.random.default_rng(3)
    counts = {}
    for _ in range(4000):
        s = markov_partition_sample([(a, 1)], rng)
        counts[s.pauli.to_label()] = counts.get(s.pauli.to_label(), 0) + 1
    assert counts["X"] / 4000 == pytest.approx(0.75, abs=0.03)
    assert s.weight == pytest.approx(4.0)


def test_markov_power_cap():
    a = PauliSum.from_label_coeffs([(1.0, "X")])
    with pytest.raises(ValueError, match="power"):
        MarkovPartition([(a, 5)])
