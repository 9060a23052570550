import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scusim.paulis import (
    DROP_TOL,
    HamiltonianPowers,
    PauliString,
    PauliSum,
    commutator,
    exp_series_tail,
    l1_norm,
    pauli_mul,
    sum_mul,
    taylor_even_odd,
)


def random_pauli(rng, n):
    return PauliString(
        n,
        int(rng.integers(0, 1 << n)),
        int(rng.integers(0, 1 << n)),
        int(rng.integers(0, 4)),
    )


def random_sum(rng, n, max_terms=5, real=False):
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        c = complex(rng.normal(), 0.0 if real else rng.normal())
        terms.append((c, PauliString(n, int(rng.integers(0, 1 << n)),
                                     int(rng.integers(0, 1 << n)), 0)))
    return PauliSum.from_terms(n, terms)


# ---------------------------------------------------------------- strings

def test_single_qubit_convention_matches_dense():
    # pins the (x, z) -> operator convention once and for all
    for label, mat in {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.array([[1, 0], [0, -1]]),
    }.items():
        np.testing.assert_allclose(PauliString.from_label(label).to_dense(), mat)


def test_x_times_y_is_iz():
    x = PauliString.from_label("X")
    y = PauliString.from_label("Y")
    prod = pauli_mul(x, y)
    assert prod.phase_exp == 1
    assert prod.to_label(with_phase=False) == "Z"


def test_identity_absorbs():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3):
        eye = PauliString.identity(n)
        for _ in range(20):
            p = random_pauli(rng, n)
            assert pauli_mul(p, eye) == p
            assert pauli_mul(eye, p) == p


def test_two_qubit_product_dense_oracle():
    a = PauliString.from_label("XZ")  # X on qubit 0, Z on qubit 1
    b = PauliString.from_label("YY")
    prod = pauli_mul(a, b)
    np.testing.assert_allclose(prod.to_dense(), a.to_dense() @ b.to_dense(), atol=1e-14)


def test_product_dense_oracle_random():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3):
        for _ in range(60):
            a, b = random_pauli(rng, n), random_pauli(rng, n)
            np.testing.assert_allclose(
                pauli_mul(a, b).to_dense(), a.to_dense() @ b.to_dense(), atol=1e-13
            )


def test_label_round_trip_and_qubit_order():
    p = PauliString.from_label("XZIY")
    assert p.n_qubits == 4
    assert p.to_label() == "XZIY"
    # qubit 0 is the leftmost character and the least significant mask bit
    assert p.x_mask & 1 and not p.z_mask & 1
    for prefix, phase in [("", 0), ("i", 1), ("-", 2), ("-i", 3)]:
        q = PauliString.from_label(prefix + "XZ")
        assert q.phase_exp == phase
        assert q.to_label() == prefix + "XZ"


def test_adjoint_and_hermiticity():
    rng = np.random.default_rng(3)
    for _ in range(40):
        p = random_pauli(rng, 2)
        np.testing.assert_allclose(p.adjoint().to_dense(), p.to_dense().conj().T, atol=1e-14)
        assert p.is_hermitian == (p.phase_exp % 2 == 0)


def test_mismatched_dims_raise():
    with pytest.raises(ValueError, match="mismatch"):
        pauli_mul(PauliString.identity(2), PauliString.identity(3))


def test_apply_to_basis_matches_dense():
    rng = np.random.default_rng(5)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        p = random_pauli(rng, n)
        mat = p.to_dense()
        for idx in range(1 << n):
            coeff, out = p.apply_to_basis(idx)
            col = np.zeros(1 << n, dtype=complex)
            col[out] = coeff
            np.testing.assert_allclose(col, mat[:, idx], atol=1e-14)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63), st.integers(0, 63),
       st.integers(0, 63), st.integers(0, 63), st.integers(0, 63),
       st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
def test_associativity(x1, z1, x2, z2, x3, z3, e1, e2, e3):
    n = 6
    a = PauliString(n, x1, z1, e1)
    b = PauliString(n, x2, z2, e2)
    c = PauliString(n, x3, z3, e3)
    assert pauli_mul(pauli_mul(a, b), c) == pauli_mul(a, pauli_mul(b, c))


# ---------------------------------------------------------------- sums

def test_sum_mul_anticommuting_square():
    s = PauliSum.from_label_coeffs([(1.0, "X"), (1.0, "Z")])
    sq = sum_mul(s, s)
    assert sq.n_terms == 1
    assert sq.coefficient(PauliString.identity(1)) == pytest.approx(2.0)


def test_sum_mul_identity():
    rng = np.random.default_rng(13)
    a = random_sum(rng, 3)
    eye = PauliSum.identity(3)
    prod = sum_mul(a, eye)
    np.testing.assert_allclose(prod.to_dense(), a.to_dense(), atol=1e-13)


def test_sum_mul_dense_oracle_random():
    rng = np.random.default_rng(17)
    for _ in range(25):
        a = random_sum(rng, 3)
        b = random_sum(rng, 3)
        np.testing.assert_allclose(
            sum_mul(a, b).to_dense(), a.to_dense() @ b.to_dense(), atol=1e-12
        )


def test_submultiplicative_l1():
    rng = np.random.default_rng(19)
    for _ in range(40):
        a = random_sum(rng, 2)
        b = random_sum(rng, 2)
        assert l1_norm(sum_mul(a, b)) <= a.l1_norm() * b.l1_norm() + 1e-10


def test_commutator_trivial_cases():
    zz = PauliSum.from_label_coeffs([(1.0, "ZZ")])
    iz = PauliSum.from_label_coeffs([(1.0, "IZ")])
    assert commutator(zz, iz).n_terms == 0

    x = PauliSum.from_label_coeffs([(1.0, "X")])
    z = PauliSum.from_label_coeffs([(1.0, "Z")])
    com = commutator(x, z)
    assert com.coefficient(PauliString.from_label("Y")) == pytest.approx(-2j)


def test_commutator_dense_oracle():
    rng = np.random.default_rng(23)
    zz = PauliSum.from_label_coeffs([(1.0, "ZZI")])
    x0 = PauliSum.from_label_coeffs([(1.0, "XII")])
    dense = zz.to_dense() @ x0.to_dense() - x0.to_dense() @ zz.to_dense()
    np.testing.assert_allclose(commutator(zz, x0).to_dense(), dense, atol=1e-13)
    for _ in range(15):
        a, b = random_sum(rng, 3), random_sum(rng, 3)
        dense = a.to_dense() @ b.to_dense() - b.to_dense() @ a.to_dense()
        np.testing.assert_allclose(commutator(a, b).to_dense(), dense, atol=1e-12)


def test_l1_norm_cases():
    assert PauliSum.zero(2).l1_norm() == 0.0
    s = PauliSum.from_label_coeffs([(0.3, "X"), (-0.4j, "Z")])
    assert s.l1_norm() == pytest.approx(0.7)
    # open-boundary Ising sum: n-1 ZZ terms plus n X terms, unit couplings
    from scusim.resources import tfim_hamiltonian

    for n in (2, 4, 9):
        assert tfim_hamiltonian(n, 1.0, 1.0).l1_norm() == pytest.approx(2 * n - 1)


def test_adjoint_sum_dense():
    rng = np.random.default_rng(29)
    a = random_sum(rng, 2)
    np.testing.assert_allclose(a.adjoint().to_dense(), a.to_dense().conj().T, atol=1e-13)


def test_hermitian_predicate_matches_dense():
    rng = np.random.default_rng(31)
    for _ in range(20):
        a = random_sum(rng, 2, real=True)
        assert a.is_hermitian()
        dense = a.to_dense()
        np.testing.assert_allclose(dense, dense.conj().T, atol=1e-12)
    skewed = PauliSum.from_label_coeffs([(1.0 + 0.5j, "XZ")])
    assert not skewed.is_hermitian()


def test_prune_threshold():
    s = PauliSum(1, {(0, 0): 1.0 + 0j, (1, 0): 0.5 * DROP_TOL + 0j})
    assert s.n_terms == 1


def test_serialize_round_trip_exact():
    rng = np.random.default_rng(37)
    for _ in range(10):
        a = random_sum(rng, 3)
        b = PauliSum.deserialize(a.serialize())
        assert sorted(a.items()) == sorted(b.items())  # bit-exact coefficients


# ---------------------------------------------------------------- series

def test_taylor_even_odd_single_x():
    # X squared is the identity, so the series collapses to cos/sin pieces
    h = PauliSum.from_label_coeffs([(1.0, "X")])
    t, order = 0.7, 7
    even, odd = taylor_even_odd(h, t, order)
    cos_trunc = sum((-1) ** m * t ** (2 * m) / math.factorial(2 * m) for m in range(1, 4))
    sin_trunc = -sum((-1) ** m * t ** (2 * m + 1) / math.factorial(2 * m + 1) for m in range(4))
    assert even.coefficient(PauliString.identity(1)) == pytest.approx(cos_trunc, abs=1e-15)
    assert odd.coefficient(PauliString.from_label("X")) == pytest.approx(sin_trunc, abs=1e-15)


def test_taylor_even_odd_zero_time():
    h = PauliSum.from_label_coeffs([(1.0, "X"), (0.5, "Z")])
    even, odd = taylor_even_odd(h, 0.0, 3)
    assert even.n_terms == 0 and odd.n_terms == 0


def test_taylor_even_odd_dense_oracle():
    from scusim.resources import tfim_hamiltonian

    h = tfim_hamiltonian(2, 1.0, 1.0)
    t, order = 0.1, 3
    even, odd = taylor_even_odd(h, t, order)
    dense_h = h.to_dense()
    expect = np.zeros_like(dense_h)
    acc = np.eye(4, dtype=complex)
    for l in range(order + 1):
        if l:
            acc = acc @ (-1j * t * dense_h) / l
        expect += acc
    recon = np.eye(4, dtype=complex) + even.to_dense() + 1j * odd.to_dense()
    np.testing.assert_allclose(recon, expect, atol=1e-12)


def test_taylor_coefficients_real_and_bounded():
    rng = np.random.default_rng(41)
    for _ in range(15):
        h = random_sum(rng, 2, real=True)
        t = float(rng.uniform(0.05, 0.8))
        even, odd = taylor_even_odd(h, t, 5)
        for part in (even, odd):
            scale = max(1.0, part.max_abs_coeff())
            assert all(abs(c.imag) < 1e-10 * scale for _, c in part.items())
        x = t * h.l1_norm()
        assert even.l1_norm() <= math.cosh(x) - 1 + 1e-9
        assert odd.l1_norm() <= math.sinh(x) + 1e-9


def test_taylor_rejects_bad_input():
    h = PauliSum.from_label_coeffs([(1j, "X")])
    with pytest.raises(ValueError, match="Hermitian"):
        taylor_even_odd(h, 0.1, 3)
    good = PauliSum.from_label_coeffs([(1.0, "X")])
    with pytest.raises(ValueError, match="order"):
        taylor_even_odd(good, 0.1, 0)


def test_powers_cache_consistency():
    rng = np.random.default_rng(43)
    h = random_sum(rng, 2, real=True)
    powers = HamiltonianPowers(h, 4)
    np.testing.assert_allclose(
        powers.power(3).to_dense(), np.linalg.matrix_power(h.to_dense(), 3), atol=1e-11
    )
    e1, o1 = powers.even_odd(0.3)
    e2, o2 = taylor_even_odd(h, 0.3, 4)
    np.testing.assert_allclose(e1.to_dense(), e2.to_dense(), atol=1e-13)
    np.testing.assert_allclose(o1.to_dense(), o2.to_dense(), atol=1e-13)


def test_exp_series_tail():
    # independent check against exp(x) minus the partial sum at modest x
    for x, order in [(0.5, 3), (1.0, 2), (2.5, 5)]:
        partial = sum(x ** l / math.factorial(l) for l in range(order + 1))
        assert exp_series_tail(x, order) == pytest.approx(math.exp(x) - partial, rel=1e-9)
    assert exp_series_tail(0.0, 3) == 0.0
    assert exp_series_tail(200.0, 3) == math.inf
