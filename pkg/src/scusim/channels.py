"""Kraus channels and their sampled convex unitary decompositions.

A trace-preserving channel given by Kraus operators (each stored as a
Pauli-basis sum) is rewritten as a normalization constant ``lam`` times a
convex mixture of (i) plain conjugations by a single Pauli string and
(ii) phase-tagged cross terms between two Pauli strings from the same
Kraus operator.  Sampling that mixture and weighting outcomes by ``lam``
gives an unbiased estimator of the channel.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuits import GateSequence, pauli_op
from .paulis import PauliString, PauliSum, sum_mul

TRACE_TOL = 1e-8
_PROB_TOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    """Operator-sum channel; trace preservation is validated on creation."""

    n_qubits: int
    kraus_ops: tuple[PauliSum, ...]

    def __post_init__(self):
        if not self.kraus_ops:
            raise ValueError("channel needs at least one Kraus operator")
        for k in self.kraus_ops:
            if k.n_qubits != self.n_qubits:
                raise ValueError("Kraus operator register mismatch")
        total = PauliSum.zero(self.n_qubits)
        for k in self.kraus_ops:
            total = total + sum_mul(k.adjoint(), k)
        ident = PauliString.identity(self.n_qubits)
        if abs(total.coefficient(ident) - 1.0) > TRACE_TOL:
            raise ValueError("channel is not trace preserving (identity weight off)")
        for (xm, zm), coeff in total.items():
            if (xm, zm) == (0, 0):
                continue
            if abs(coeff) > TRACE_TOL:
                raise ValueError("channel is not trace preserving (residual terms)")


@dataclass(frozen=True)
class DiagonalTerm:
    unitary: PauliString
    prob: float


@dataclass(frozen=True)
class CrossTerm:
    u_left: PauliString
    u_right: PauliString
    alpha: float
    prob: float


@dataclass(frozen=True)
class ConvexUnitaryDecomposition:
    """Sampled form of a channel: lam * (convex mixture of simple maps)."""

    n_qubits: int
    lam: float
    diagonal_terms: tuple[DiagonalTerm, ...]
    cross_terms: tuple[CrossTerm, ...]

    def __post_init__(self):
        probs = [t.prob for t in self.diagonal_terms] + [t.prob for t in self.cross_terms]
        if any(p < -_PROB_TOL for p in probs):
            raise ValueError("negative term probability")
        if abs(sum(probs) - 1.0) > _PROB_TOL:
            raise ValueError("term probabilities must sum to one")

    @property
    def n_terms(self) -> int:
        return len(self.diagonal_terms) + len(self.cross_terms)


@dataclass(frozen=True)
class SampledTerm:
    kind: str  # "diagonal" | "cross"
    gates_left: GateSequence
    gates_right: GateSequence
    phase: float
    weight: float

    def __post_init__(self):
        if self.kind == "diagonal":
            assert self.gates_left == self.gates_right and self.phase == 0.0


def convex_decompose(channel: KrausChannel) -> ConvexUnitaryDecomposition:
    """Pauli-basis convex decomposition of a trace-preserving channel.

    lam is the sum over Kraus operators of their squared coefficient L1
    norms.  Each basis element of each Kraus operator contributes a
    diagonal term with probability |c_j|^2 / lam; each unordered pair
    within one Kraus operator contributes a cross term with probability
    2|c_j c_k| / lam and phase arg(c_j conj(c_k)).
    """
    lam = 0.0
    diagonal: list[DiagonalTerm] = []
    cross: list[CrossTerm] = []
    for kraus in channel.kraus_ops:
        terms = kraus.sorted_terms()
        if not terms:
            continue
        lam += sum(abs(c) for c, _ in terms) ** 2
    if lam <= 0.0:
        raise ValueError("channel has no Pauli weight to decompose")
    for kraus in channel.kraus_ops:
        terms = kraus.sorted_terms()
        for j, (cj, pj) in enumerate(terms):
            diagonal.append(DiagonalTerm(pj, abs(cj) ** 2 / lam))
            for ck, pk in terms[j + 1:]:
                cross.append(CrossTerm(pj, pk, cmath.phase(cj * ck.conjugate()),
                                       2.0 * abs(cj * ck) / lam))
    return ConvexUnitaryDecomposition(channel.n_qubits, lam, tuple(diagonal), tuple(cross))


def sample_term(decomp: ConvexUnitaryDecomposition, rng: np.random.Generator) -> SampledTerm:
    """Draw one term of the decomposition with its stated probability."""
    n = decomp.n_qubits
    u = rng.random()
    acc = 0.0
    for term in decomp.diagonal_terms:
        acc += term.prob
        if u < acc:
            gates = GateSequence(n, (pauli_op(term.unitary),))
            return SampledTerm("diagonal", gates, gates, 0.0, decomp.lam)
    for term in decomp.cross_terms:
        acc += term.prob
        if u < acc:
            return SampledTerm(
                "cross",
                GateSequence(n, (pauli_op(term.u_left),)),
                GateSequence(n, (pauli_op(term.u_right),)),
                term.alpha,
                decomp.lam,
            )
    # numerical corner: u landed on the last sliver of accumulated error
    term = decomp.cross_terms[-1] if decomp.cross_terms else None
    if term is not None:
        return SampledTerm("cross", GateSequence(n, (pauli_op(term.u_left),)),
                           GateSequence(n, (pauli_op(term.u_right),)), term.alpha, decomp.lam)
    diag = decomp.diagonal_terms[-1]
    gates = GateSequence(n, (pauli_op(diag.unitary),))
    return SampledTerm("diagonal", gates, gates, 0.0, decomp.lam)


def sampling_norm_bound(channel: KrausChannel) -> tuple[float, int]:
    """(decomposition L1 weight, worst-case bound).

    The bound is the largest Pauli-term count over the Kraus operators;
    trace preservation guarantees the L1 weight never exceeds it.
    """
    decomp = convex_decompose(channel)
    bound = max(k.n_terms for k in channel.kraus_ops)
    return decomp.lam, bound


# ------------------------------------------------------------------ dense maps

def diagonal_density_action(unitary: PauliString, rho: np.ndarray) -> np.ndarray:
    u = unitary.to_dense()
    return u @ rho @ u.conj().T


def cross_density_action(u_left: PauliString, u_right: PauliString, alpha: float,
                         rho: np.ndarray) -> np.ndarray:
    ul = u_left.to_dense()
    ur = u_right.to_dense()
    half = 0.5 * np.exp(1j * alpha) * (ul @ rho @ ur.conj().T)
    return half + half.conj().T


def decomposition_channel_apply(decomp: ConvexUnitaryDecomposition,
                                rho: np.ndarray) -> np.ndarray:
    """Exhaustive weighted sum of all term actions (dense oracle)."""
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    for term in decomp.diagonal_terms:
        out += decomp.lam * term.prob * diagonal_density_action(term.unitary, rho)
    for term in decomp.cross_terms:
        out += decomp.lam * term.prob * cross_density_action(
            term.u_left, term.u_right, term.alpha, rho)
    return out


# ------------------------------------------------------------------ presets

def amplitude_damping(p: float) -> KrausChannel:
    """Single-qubit decay toward |0> with strength p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("damping strength must lie in [0, 1]")
    root = math.sqrt(1.0 - p)
    k0 = PauliSum.from_label_coeffs([(0.5 * (1.0 + root), "I"), (0.5 * (1.0 - root), "Z")])
    k1_terms = [(0.5 * math.sqrt(p), "X"), (0.5j * math.sqrt(p), "Y")]
    if p == 0.0:
        return KrausChannel(1, (k0,))
    k1 = PauliSum.from_label_coeffs(k1_terms)
    return KrausChannel(1, (k0, k1))


def pauli_decompose_matrix(mat: np.ndarray) -> PauliSum:
    """Project a dense operator onto the Pauli basis (n <= 4)."""
    mat = np.asarray(mat, dtype=complex)
    dim = mat.shape[0]
    if mat.shape != (dim, dim) or dim & (dim - 1):
        raise ValueError("operator must be square with power-of-two dimension")
    n = dim.bit_length() - 1
    if n > 4:
        raise ValueError("matrix decomposition limited to n <= 4")
    terms = {}
    for xm in range(1 << n):
        for zm in range(1 << n):
            p = PauliString(n, xm, zm, 0)
            coeff = np.trace(p.to_dense().conj().T @ mat) / dim
            terms[(xm, zm)] = complex(coeff)
    return PauliSum(n, terms)


def random_trace_preserving_channel(n_qubits: int, n_kraus: int,
                                    rng: np.random.Generator) -> KrausChannel:
    """Random Kraus set, exactly trace preserving by construction."""
    dim = 1 << n_qubits
    raw = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
           for _ in range(n_kraus)]
    gram = sum(g.conj().T @ g for g in raw)
    vals, vecs = np.linalg.eigh(gram)
    inv_root = vecs @ np.diag(vals ** -0.5) @ vecs.conj().T
    return KrausChannel(n_qubits, tuple(pauli_decompose_matrix(g @ inv_root) for g in raw))


# ------------------------------------------------------------------ file I/O

_PRESET_RE = re.compile(r"^amplitude_damping\(\s*([0-9.eE+-]+)\s*\)$")


def write_channel_file(channel: KrausChannel, path) -> None:
    """One Pauli-sum text block per Kraus operator, blank-line separated."""
    blocks = [k.serialize().rstrip("\n") for k in channel.kraus_ops]
    Path(path).write_text("\n\n".join(blocks) + "\n")


def read_channel_file(path) -> KrausChannel:
    text = Path(path).read_text()
    blocks: list[list[str]] = [[]]
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            if blocks[-1]:
                blocks.append([])
            continue
        blocks[-1].append(line)
    ops = [PauliSum.deserialize("\n".join(b)) for b in blocks if b]
    if not ops:
        raise ValueError(f"no Kraus operators found in {path}")
    return KrausChannel(ops[0].n_qubits, tuple(ops))


def parse_channel_spec(spec: str) -> KrausChannel:
    """Either a named preset like amplitude_damping(0.15) or a file path."""
    m = _PRESET_RE.match(spec.strip())
    if m:
        return amplitude_damping(float(m.group(1)))
    return read_channel_file(spec)
