"""Desk-scale statevector simulation and the sampled-channel estimator.

The gate set is deliberately small: everything a sampled convex
decomposition can emit (phased Pauli operators, Pauli-axis rotations,
their singly-controlled versions) plus the Clifford scaffolding used by
the experiments.  Registers up to ~24 qubits are practical; dense
unitary/density oracles are restricted to small n and used for
verification only.

State conventions match :mod:`scusim.paulis`: qubit q is bit q of the
basis index, so amplitude ``amps[5]`` of a 3-qubit register is the
``|q2=1, q1=0, q0=1>`` component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .paulis import PauliString, PauliSum, pauli_mul

_NORM_TOL = 1e-10

# gate kinds
H = "h"
X = "x"
CNOT = "cnot"
PHASE = "phase"
PAULI = "pauli"
PAULI_ROT = "pauli_rot"
CPAULI = "cpauli"
CPAULI_ROT = "cpauli_rot"
MEASURE_X = "measure_x"

_UNITARY_KINDS = {H, X, CNOT, PHASE, PAULI, PAULI_ROT, CPAULI, CPAULI_ROT}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...] = ()
    pauli: PauliString | None = None
    angle: float = 0.0

    def __str__(self) -> str:
        if self.kind == H:
            return f"H q{self.qubits[0]}"
        if self.kind == X:
            return f"X q{self.qubits[0]}"
        if self.kind == CNOT:
            return f"CNOT q{self.qubits[0]} -> q{self.qubits[1]}"
        if self.kind == PHASE:
            return f"PHASE({self.angle:.6g}) q{self.qubits[0]}"
        if self.kind == PAULI:
            return f"PAULI {self.pauli}"
        if self.kind == PAULI_ROT:
            return f"ROT({self.angle:.6g}) {self.pauli}"
        if self.kind == CPAULI:
            return f"C-PAULI[q{self.qubits[0]}] {self.pauli}"
        if self.kind == CPAULI_ROT:
            return f"C-ROT[q{self.qubits[0]}]({self.angle:.6g}) {self.pauli}"
        if self.kind == MEASURE_X:
            return f"MEASURE-X q{self.qubits[0]}"
        return self.kind


def hadamard(q: int) -> Gate:
    return Gate(H, (q,))


def x_gate(q: int) -> Gate:
    return Gate(X, (q,))


def cnot(control: int, target: int) -> Gate:
    if control == target:
        raise ValueError("CNOT control and target must differ")
    return Gate(CNOT, (control, target))


def phase_gate(q: int, theta: float) -> Gate:
    _check_angle(theta)
    return Gate(PHASE, (q,), angle=float(theta))


def pauli_op(p: PauliString) -> Gate:
    return Gate(PAULI, (), p)


def pauli_rotation(p: PauliString, theta: float) -> Gate:
    """exp(-i * theta/2 * P); P must carry a +/-1 phase to be Hermitian."""
    _check_angle(theta)
    if not p.is_hermitian:
        raise ValueError("rotation axis must be a Hermitian (sign +/-1) Pauli string")
    return Gate(PAULI_ROT, (), p, float(theta))


def controlled_pauli_op(control: int, p: PauliString) -> Gate:
    _check_control(control, p)
    return Gate(CPAULI, (control,), p)


def controlled_pauli_rotation(control: int, p: PauliString, theta: float) -> Gate:
    _check_angle(theta)
    _check_control(control, p)
    if not p.is_hermitian:
        raise ValueError("rotation axis must be a Hermitian (sign +/-1) Pauli string")
    return Gate(CPAULI_ROT, (control,), p, float(theta))


def ancilla_x_measure(q: int) -> Gate:
    return Gate(MEASURE_X, (q,))


def _check_angle(theta: float):
    if not math.isfinite(theta):
        raise ValueError("gate angle must be finite")


def _check_control(control: int, p: PauliString):
    if (p.x_mask | p.z_mask) >> control & 1:
        raise ValueError("control qubit overlaps the controlled Pauli's support")


@dataclass(frozen=True)
class GateSequence:
    """An ordered gate list over a fixed-size register."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g} addresses qubit {q} outside register")
            if g.pauli is not None and g.pauli.n_qubits > self.n_qubits:
                raise ValueError(f"gate {g} Pauli larger than register")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "GateSequence") -> "GateSequence":
        if self.n_qubits != other.n_qubits:
            raise ValueError("register size mismatch")
        return GateSequence(self.n_qubits, self.gates + other.gates)

    def then(self, *gates: Gate) -> "GateSequence":
        return GateSequence(self.n_qubits, self.gates + gates)

    def __str__(self) -> str:
        lines = [f"# register: {self.n_qubits} qubits"]
        lines += [str(g) for g in self.gates]
        return "\n".join(lines)


def identity_sequence(n_qubits: int) -> GateSequence:
    return GateSequence(n_qubits, ())


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray

    @classmethod
    def zero_state(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        arr = np.asarray(amps, dtype=np.complex128)
        n = int(round(math.log2(arr.size)))
        if 1 << n != arr.size:
            raise ValueError("amplitude count must be a power of two")
        return cls(n, arr.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def density(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())


def _parity_of_and(indices: np.ndarray, mask: int) -> np.ndarray:
    v = indices & np.uint64(mask)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(bool)


_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(n: int) -> np.ndarray:
    arr = _INDEX_CACHE.get(n)
    if arr is None:
        arr = np.arange(1 << n, dtype=np.uint64)
        _INDEX_CACHE[n] = arr
    return arr


def _pauli_coeffs(p: PauliString, n: int) -> tuple[complex, np.ndarray]:
    """Per-basis-state coefficients of P: P|b> = base*(-1)^par(b)|b ^ x>."""
    base = (1j) ** ((p.phase_exp + (p.x_mask & p.z_mask).bit_count()) % 4)
    par = _parity_of_and(_indices(n), p.z_mask)
    return base, par


def _apply_pauli_vec(amps: np.ndarray, p: PauliString, n: int) -> np.ndarray:
    base, par = _pauli_coeffs(p, n)
    signed = np.where(par, -base, base) * amps
    if p.x_mask == 0:
        return signed
    idx = _indices(n) ^ np.uint64(p.x_mask)
    return signed[idx]


def apply(state: StateVector, seq: GateSequence, *, check_norm: bool = True) -> StateVector:
    """Apply a gate sequence; exact unitary action, new state returned."""
    if seq.n_qubits != state.n_qubits:
        raise ValueError("register size mismatch")
    n = state.n_qubits
    amps = state.amps.copy()
    for g in seq.gates:
        amps = _apply_gate(amps, g, n)
        if check_norm and g.kind in _UNITARY_KINDS:
            nrm = np.linalg.norm(amps)
            if abs(nrm - 1.0) > _NORM_TOL:
                raise AssertionError(f"norm drifted to {nrm!r} after {g}")
    return StateVector(n, amps)


def _apply_gate(amps: np.ndarray, g: Gate, n: int) -> np.ndarray:
    if g.kind == H:
        q = g.qubits[0]
        view = amps.reshape(-1, 2, 1 << q)
        a0 = view[:, 0, :].copy()
        a1 = view[:, 1, :].copy()
        inv = 1.0 / math.sqrt(2.0)
        view[:, 0, :] = (a0 + a1) * inv
        view[:, 1, :] = (a0 - a1) * inv
        return amps
    if g.kind == X:
        q = g.qubits[0]
        view = amps.reshape(-1, 2, 1 << q)
        view[:, [0, 1], :] = view[:, [1, 0], :]
        return amps
    if g.kind == PHASE:
        q = g.qubits[0]
        view = amps.reshape(-1, 2, 1 << q)
        view[:, 1, :] *= np.exp(1j * g.angle)
        return amps
    if g.kind == CNOT:
        c, t = g.qubits
        idx = _indices(n)
        sel = (idx >> np.uint64(c)) & np.uint64(1) == 1
        out = amps.copy()
        out[idx[sel] ^ np.uint64(1 << t)] = amps[idx[sel]]
        return out
    if g.kind == PAULI:
        return _apply_pauli_vec(amps, _sized(g.pauli, n), n)
    if g.kind == PAULI_ROT:
        p = _sized(g.pauli, n)
        half = 0.5 * g.angle
        return math.cos(half) * amps - 1j * math.sin(half) * _apply_pauli_vec(amps, p, n)
    if g.kind == CPAULI:
        p = _sized(g.pauli, n)
        c = g.qubits[0]
        idx = _indices(n)
        sel = (idx >> np.uint64(c)) & np.uint64(1) == 1
        out = amps.copy()
        moved = _apply_pauli_vec(amps, p, n)
        out[sel] = moved[sel]
        return out
    if g.kind == CPAULI_ROT:
        p = _sized(g.pauli, n)
        c = g.qubits[0]
        idx = _indices(n)
        sel = (idx >> np.uint64(c)) & np.uint64(1) == 1
        half = 0.5 * g.angle
        rotated = math.cos(half) * amps - 1j * math.sin(half) * _apply_pauli_vec(amps, p, n)
        out = amps.copy()
        out[sel] = rotated[sel]
        return out
    if g.kind == MEASURE_X:
        raise ValueError("measurement gates are not unitary; use an estimator entry point")
    raise ValueError(f"unknown gate kind {g.kind!r}")


def _sized(p: PauliString, n: int) -> PauliString:
    if p.n_qubits == n:
        return p
    if p.n_qubits > n:
        raise ValueError("Pauli larger than register")
    return PauliString(n, p.x_mask, p.z_mask, p.phase_exp)


def dense_unitary(seq: GateSequence) -> np.ndarray:
    """Dense matrix of a sequence, for verification at n <= 10."""
    n = seq.n_qubits
    if n > 10:
        raise ValueError("dense unitary oracle limited to n <= 10")
    dim = 1 << n
    cols = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[b] = 1.0
        out = StateVector(n, amps)
        cols[:, b] = apply(out, seq, check_norm=False).amps
    return cols


def expectation(state: StateVector, observable: PauliSum) -> complex:
    """<psi| O |psi> without materializing O."""
    if observable.n_qubits != state.n_qubits:
        raise ValueError("register size mismatch")
    total = 0.0 + 0.0j
    for (xm, zm), coeff in observable.items():
        p = PauliString(state.n_qubits, xm, zm, 0)
        total += coeff * np.vdot(state.amps, _apply_pauli_vec(state.amps, p, state.n_qubits))
    return complex(total)


@dataclass(frozen=True)
class EstimatorResult:
    mean: float
    std_error: float
    n_samples: int
    weight: float


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def _pauli_shot_estimate(mean_value: float, shots: int, rng: np.random.Generator) -> float:
    """Average of `shots` simulated +/-1 outcomes with mean `mean_value`."""
    p_plus = min(1.0, max(0.0, 0.5 * (1.0 + mean_value)))
    hits = rng.binomial(shots, p_plus)
    return 2.0 * hits / shots - 1.0


def _estimate_observable(state: StateVector, observable: PauliSum, shots: int,
                         rng: np.random.Generator | None) -> float:
    exact = expectation(state, observable).real
    if shots == 0:
        return exact
    if rng is None:
        raise ValueError("shot sampling needs an RNG stream")
    # each Pauli term is measured with `shots` single-shot outcomes
    total = 0.0
    for (xm, zm), coeff in observable.sorted_items():
        p = PauliString(state.n_qubits, xm, zm, 0)
        m = np.vdot(state.amps, _apply_pauli_vec(state.amps, p, state.n_qubits)).real
        total += coeff.real * _pauli_shot_estimate(float(m), shots, rng)
    return total


def controlled_version(seq: GateSequence, control: int, control_value: int,
                       n_total: int) -> GateSequence:
    """Promote a Pauli-based sequence to one controlled on an ancilla bit.

    Only PAULI / PAULI_ROT / PHASE gates can be promoted; that covers every
    sequence a convex decomposition emits.  Control-on-zero is realized by
    an X sandwich on the ancilla.
    """
    gates: list[Gate] = []
    if control_value == 0:
        gates.append(x_gate(control))
    for g in seq.gates:
        if g.kind == PAULI:
            gates.append(controlled_pauli_op(control, _sized(g.pauli, n_total)))
        elif g.kind == PAULI_ROT:
            gates.append(controlled_pauli_rotation(control, _sized(g.pauli, n_total), g.angle))
        elif g.kind == PHASE:
            raise ValueError("controlled phase gates are not part of the gate set")
        else:
            raise ValueError(f"cannot control gate kind {g.kind!r}")
    if control_value == 0:
        gates.append(x_gate(control))
    return GateSequence(n_total, tuple(gates))


def cross_term_circuit(v1: GateSequence, v2: GateSequence, theta: float,
                       n_system: int) -> GateSequence:
    """Single-ancilla interference circuit for one cross term.

    The ancilla (highest-indexed qubit) starts in |+>, v1 runs on the
    ancilla=1 branch, v2 on the ancilla=0 branch, and a phase gate puts
    e^{i theta} on the v1 branch.  Measuring ancilla X together with an
    observable O estimates Re(e^{i theta} Tr[O V1 rho V2^dag]).
    """
    if v1.n_qubits != n_system or v2.n_qubits != n_system:
        raise ValueError("v1/v2 must act on the system register only")
    anc = n_system
    n_total = n_system + 1
    seq = GateSequence(n_total, (hadamard(anc),))
    seq = seq + controlled_version(v2, anc, 0, n_total)
    seq = seq + controlled_version(v1, anc, 1, n_total)
    seq = seq.then(phase_gate(anc, theta), ancilla_x_measure(anc))
    return seq


def _grow_register(seq: GateSequence, n_total: int) -> GateSequence:
    if seq.n_qubits == n_total:
        return seq
    return GateSequence(n_total, seq.gates)


def cross_term_expectation(v1: GateSequence, v2: GateSequence, theta: float,
                           prep: GateSequence, observable: PauliSum, shots: int,
                           rng: np.random.Generator | None = None) -> float:
    """Estimate Re(e^{i theta} Tr[O V1 rho V2^dag]) for rho = prep|0><0|prep^dag.

    shots == 0 returns the exact expectation; otherwise every Pauli term
    of the observable is sampled with `shots` simulated outcomes of the
    joint ancilla-X measurement.
    """
    if not observable.is_hermitian():
        raise ValueError("observable must be Hermitian")
    n_sys = prep.n_qubits
    if shots == 0:
        psi = apply(StateVector.zero_state(n_sys), prep)
        phi1 = apply(psi, v1)
        phi2 = apply(psi, v2)
        overlap = 0.0 + 0.0j
        for (xm, zm), coeff in observable.items():
            p = PauliString(n_sys, xm, zm, 0)
            overlap += coeff * np.vdot(phi2.amps, _apply_pauli_vec(phi1.amps, p, n_sys))
        return float((np.exp(1j * theta) * overlap).real)

    circuit = _grow_register(prep, n_sys + 1) + cross_term_circuit(v1, v2, theta, n_sys)
    unitary_part = GateSequence(n_sys + 1,
                                tuple(g for g in circuit.gates if g.kind != MEASURE_X))
    psi = apply(StateVector.zero_state(n_sys + 1), unitary_part)
    anc_x = PauliSum.from_pauli(PauliString.single(n_sys + 1, n_sys, "X"))
    joint = PauliSum.zero(n_sys + 1)
    for (xm, zm), coeff in observable.items():
        joint = joint + coeff * PauliSum.from_pauli(PauliString(n_sys + 1, xm, zm, 0))
    joint = joint @ anc_x  # disjoint supports: exact product, no reordering phase
    return _estimate_observable(psi, joint, shots, rng)


def scu_estimate(decomposition, prep: GateSequence, observable: PauliSum,
                 n_samples: int, shots_per_sample: int,
                 rng: np.random.Generator) -> EstimatorResult:
    """Monte-Carlo channel-expectation estimator.

    Draws `n_samples` terms from a convex unitary decomposition, runs
    each as its own circuit (plain unitary for diagonal draws, the
    single-ancilla interference circuit for cross draws), and averages
    the weighted outcomes.  The mean estimates Tr[O E(rho)].
    """
    from .channels import sample_term  # local import to avoid a cycle

    if n_samples < 1:
        raise ValueError("need at least one sample")
    values = np.empty(n_samples, dtype=float)
    for i in range(n_samples):
        term = sample_term(decomposition, rng)
        if term.kind == "diagonal":
            state = apply(StateVector.zero_state(prep.n_qubits), prep + term.gates_left)
            val = _estimate_observable(state, observable, shots_per_sample, rng)
        else:
            val = cross_term_expectation(term.gates_left, term.gates_right, term.phase,
                                         prep, observable, shots_per_sample, rng)
        values[i] = term.weight * val
    mean, stderr = _mean_stderr(values)
    return EstimatorResult(mean, stderr, n_samples, decomposition.lam)


def exact_channel_apply(channel, rho: np.ndarray) -> np.ndarray:
    """Dense operator-sum oracle: sum_i K_i rho K_i^dag, n <= 3."""
    if channel.n_qubits > 3:
        raise ValueError("exact channel oracle limited to n <= 3")
    dim = 1 << channel.n_qubits
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError("density matrix has wrong shape")
    out = np.zeros_like(rho)
    for k in channel.kraus_ops:
        kd = k.to_dense()
        out += kd @ rho @ kd.conj().T
    if abs(np.trace(out) - np.trace(rho)) > 1e-10 * max(1.0, abs(np.trace(rho))):
        raise AssertionError("channel application did not preserve the trace")
    return out


def cnot_conjugate(p: PauliString, control: int, target: int) -> PauliString:
    """CNOT P CNOT, exact phases included.

    Writes P as i^k times X factors followed by Z factors, conjugates
    each factor by the generator images X_c -> X_c X_t and Z_t -> Z_c Z_t
    (everything else is fixed), and multiplies the images back together;
    pauli_mul keeps the phase bookkeeping exact.
    """
    if control == target:
        raise ValueError("control and target must differ")
    n = p.n_qubits
    out = PauliString(n, 0, 0, (p.phase_exp + (p.x_mask & p.z_mask).bit_count()) % 4)
    for q in range(n):
        if (p.x_mask >> q) & 1:
            mask = (1 << q) | ((1 << target) if q == control else 0)
            out = pauli_mul(out, PauliString(n, mask, 0, 0))
    for q in range(n):
        if (p.z_mask >> q) & 1:
            mask = (1 << q) | ((1 << control) if q == target else 0)
            out = pauli_mul(out, PauliString(n, 0, mask, 0))
    return out
