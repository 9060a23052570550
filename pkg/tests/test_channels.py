import math

import numpy as np
import pytest

from scusim.channels import (
    ConvexUnitaryDecomposition,
    KrausChannel,
    amplitude_damping,
    convex_decompose,
    cross_density_action,
    decomposition_channel_apply,
    diagonal_density_action,
    parse_channel_spec,
    pauli_decompose_matrix,
    random_trace_preserving_channel,
    read_channel_file,
    sample_term,
    sampling_norm_bound,
    write_channel_file,
)
from scusim.circuits import exact_channel_apply
from scusim.paulis import PauliString, PauliSum


def random_density(rng, n):
    dim = 1 << n
    vecs = rng.normal(size=(dim, 3)) + 1j * rng.normal(size=(dim, 3))
    rho = sum(np.outer(v, v.conj()) for v in vecs.T)
    return rho / np.trace(rho)


# ------------------------------------------------------------ construction

def test_trace_preservation_enforced():
    bad = PauliSum.from_label_coeffs([(0.9, "I")])
    with pytest.raises(ValueError, match="trace preserving"):
        KrausChannel(1, (bad,))


def test_amplitude_damping_kraus_form():
    p = 0.15
    chan = amplitude_damping(p)
    k0, k1 = chan.kraus_ops
    root = math.sqrt(1 - p)
    assert k0.coefficient(PauliString.from_label("I")) == pytest.approx(0.5 * (1 + root))
    assert k0.coefficient(PauliString.from_label("Z")) == pytest.approx(0.5 * (1 - root))
    assert k1.coefficient(PauliString.from_label("X")) == pytest.approx(0.5 * math.sqrt(p))
    assert k1.coefficient(PauliString.from_label("Y")) == pytest.approx(0.5j * math.sqrt(p))


def test_amplitude_damping_is_standard_decay():
    # dense form: K0 = diag(1, sqrt(1-p)), K1 = sqrt(p)|0><1|
    p = 0.37
    k0, k1 = (k.to_dense() for k in amplitude_damping(p).kraus_ops)
    np.testing.assert_allclose(k0, np.diag([1.0, math.sqrt(1 - p)]), atol=1e-12)
    expect = np.zeros((2, 2), dtype=complex)
    expect[0, 1] = math.sqrt(p)
    np.testing.assert_allclose(k1, expect, atol=1e-12)


# ------------------------------------------------------------ decomposition

def test_identity_channel_decomposition():
    chan = amplitude_damping(0.0)
    decomp = convex_decompose(chan)
    assert decomp.lam == pytest.approx(1.0)
    assert len(decomp.diagonal_terms) == 1
    assert decomp.diagonal_terms[0].prob == pytest.approx(1.0)
    assert not decomp.cross_terms


def test_damping_normalization_is_one_plus_p():
    for p in (0.05, 0.15, 0.5, 1.0):
        decomp = convex_decompose(amplitude_damping(p))
        assert decomp.lam == pytest.approx(1.0 + p, abs=1e-12)


def test_damping_term_probabilities():
    p = 0.15
    decomp = convex_decompose(amplitude_damping(p))
    lam = 1.0 + p
    root = math.sqrt(1.0 - p)
    a, b = 0.5 * (1 + root), 0.5 * (1 - root)
    diag = {t.unitary.to_label(): t.prob for t in decomp.diagonal_terms}
    assert diag["I"] == pytest.approx(a * a / lam)
    assert diag["Z"] == pytest.approx(b * b / lam)
    assert diag["X"] == pytest.approx(p / 4 / lam)
    assert diag["Y"] == pytest.approx(p / 4 / lam)
    cross = {(t.u_left.to_label(), t.u_right.to_label()): t for t in decomp.cross_terms}
    iz = cross[("I", "Z")]
    assert iz.prob == pytest.approx(2 * a * b / lam)
    assert iz.alpha == pytest.approx(0.0)
    xy = cross[("X", "Y")]
    assert xy.prob == pytest.approx(2 * (math.sqrt(p) / 2) ** 2 / lam)
    assert xy.alpha == pytest.approx(-math.pi / 2)


def test_reconstruction_identity_for_random_channels():
    rng = np.random.default_rng(31)
    for trial in range(25):
        n = int(rng.integers(1, 3))
        chan = random_trace_preserving_channel(n, int(rng.integers(1, 4)), rng)
        decomp = convex_decompose(chan)
        assert decomp.lam >= 1.0 - 1e-10
        rho = random_density(rng, n)
        np.testing.assert_allclose(
            decomposition_channel_apply(decomp, rho),
            exact_channel_apply(chan, rho),
            atol=1e-10,
        )


def test_lambda_is_one_iff_random_unitary():
    # a single-Pauli Kraus operator is a random-unitary channel
    chan = KrausChannel(1, (PauliSum.from_label_coeffs([(1.0, "X")]),))
    assert convex_decompose(chan).lam == pytest.approx(1.0)


# ------------------------------------------------------------ sampling

def test_identity_channel_always_identity_draw():
    decomp = convex_decompose(amplitude_damping(0.0))
    rng = np.random.default_rng(0)
    for _ in range(25):
        term = sample_term(decomp, rng)
        assert term.kind == "diagonal"
        assert term.gates_left.gates[0].pauli.is_identity_body
        assert term.weight == pytest.approx(1.0)


def test_sampling_frequencies_within_binomial_bounds():
    p = 0.15
    decomp = convex_decompose(amplitude_damping(p))
    rng = np.random.default_rng(7)
    n_draws = 100_000
    counts: dict[tuple, int] = {}
    for _ in range(n_draws):
        term = sample_term(decomp, rng)
        left = term.gates_left.gates[0].pauli.to_label()
        right = term.gates_right.gates[0].pauli.to_label()
        counts[(term.kind, left, right)] = counts.get((term.kind, left, right), 0) + 1
    expected = {("diagonal", t.unitary.to_label(), t.unitary.to_label()): t.prob
                for t in decomp.diagonal_terms}
    expected.update({("cross", t.u_left.to_label(), t.u_right.to_label()): t.prob
                     for t in decomp.cross_terms})
    assert sum(expected.values()) == pytest.approx(1.0, abs=1e-12)
    for key, prob in expected.items():
        sigma = math.sqrt(prob * (1 - prob) * n_draws)
        assert abs(counts.get(key, 0) - prob * n_draws) < 3 * sigma + 3


# ------------------------------------------------------------ norm bound

def test_norm_bound_amplitude_damping():
    l1, bound = sampling_norm_bound(amplitude_damping(0.3))
    assert l1 == pytest.approx(1.3)
    assert bound == 2
    assert l1 <= bound


def test_norm_bound_unitary_channel():
    chan = KrausChannel(1, (PauliSum.from_label_coeffs([(1.0, "Y")]),))
    l1, bound = sampling_norm_bound(chan)
    assert l1 == pytest.approx(1.0)
    assert bound == 1


def test_norm_bound_holds_over_random_channels():
    rng = np.random.default_rng(37)
    for _ in range(1000):
        chan = random_trace_preserving_channel(2, int(rng.integers(1, 5)), rng)
        l1, bound = sampling_norm_bound(chan)
        assert l1 <= bound + 1e-9


# ------------------------------------------------------------ dense helpers

def test_term_actions_assemble_amplitude_damping():
    p = 0.25
    chan = amplitude_damping(p)
    decomp = convex_decompose(chan)
    rng = np.random.default_rng(41)
    rho = random_density(rng, 1)
    out = np.zeros((2, 2), dtype=complex)
    for t in decomp.diagonal_terms:
        out += decomp.lam * t.prob * diagonal_density_action(t.unitary, rho)
    for t in decomp.cross_terms:
        out += decomp.lam * t.prob * cross_density_action(t.u_left, t.u_right, t.alpha, rho)
    np.testing.assert_allclose(out, exact_channel_apply(chan, rho), atol=1e-12)


def test_pauli_decompose_matrix_round_trip():
    rng = np.random.default_rng(43)
    for n in (1, 2):
        mat = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
        ps = pauli_decompose_matrix(mat)
        np.testing.assert_allclose(ps.to_dense(), mat, atol=1e-12)


def test_probabilities_validated():
    with pytest.raises(ValueError, match="sum to one"):
        ConvexUnitaryDecomposition(1, 1.0, (), ())


# ------------------------------------------------------------ file round trip

def test_channel_file_round_trip(tmp_path):
    chan = amplitude_damping(0.15)
    path = tmp_path / "damping.channel"
    write_channel_file(chan, path)
    loaded = read_channel_file(path)
    assert len(loaded.kraus_ops) == 2
    for a, b in zip(chan.kraus_ops, loaded.kraus_ops):
        assert sorted(a.items()) == sorted(b.items())


def test_parse_channel_spec_preset_and_file(tmp_path):
    chan = parse_channel_spec("amplitude_damping(0.15)")
    assert convex_decompose(chan).lam == pytest.approx(1.15)
    path = tmp_path / "c.channel"
    write_channel_file(chan, path)
    again = parse_channel_spec(str(path))
    assert convex_decompose(again).lam == pytest.approx(1.15)
