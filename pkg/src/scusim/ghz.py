"""Damped GHZ preparation probed by a mirrored coherence experiment.

The experiment prepares an n-qubit GHZ state whose CNOT chain suffers
amplitude damping after every CNOT, each damping instance realized by
sampling the channel's convex unitary decomposition.  A collective
rotation R(theta) = (P(theta) X)^{xn} is applied, the preparation is
mirrored gate for gate (including the sampled damping operators and
their interference phases, which therefore cancel), and the all-zero
population is measured.  Fourier analysis of the resulting signal over
a uniform angle grid yields the order-n coherence intensity, which
together with a separate standard-basis population pass gives the
fidelity against the ideal GHZ state.

Circuit-level simulation of every sampled term would be far too slow at
n = 8, so this module evaluates each sampled term in closed form: with
all sampled Paulis commuted past the CNOT chain, every branch amplitude
reduces to <GHZ| S^dag R(theta) S |GHZ> for a single Pauli string S,
which is (-1)^{zweight} (e^{i theta w} + e^{i theta (n-w)}) / 2 with
w the X-weight of S.  The closed form is validated against the full
statevector simulator at small n in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, amplitude_damping, convex_decompose
from .circuits import (
    GateSequence,
    cnot,
    cnot_conjugate,
    controlled_pauli_op,
    hadamard,
    pauli_op,
    phase_gate,
    x_gate,
)
from .paulis import PauliString

_EXACT_TERM_CAP = 3_000_000


def build_ghz_prep(n: int) -> GateSequence:
    """Hadamard on qubit 0 followed by the CNOT chain 0->1->...->n-1."""
    if n < 2:
        raise ValueError("GHZ preparation needs at least two qubits")
    gates = [hadamard(0)]
    gates += [cnot(i, i + 1) for i in range(n - 1)]
    return GateSequence(n, tuple(gates))


def damping_channel(p: float) -> KrausChannel:
    """CNOT-induced amplitude damping on the freshly targeted qubit."""
    return amplitude_damping(p)


def analytic_signal(n: int, p: float, theta) -> float | np.ndarray:
    """Predicted all-zero signal, (1-p)^{n-1} (1 + cos(n theta)) / 2."""
    return 0.5 * (1.0 - p) ** (n - 1) * (1.0 + np.cos(n * np.asarray(theta, dtype=float)))


def analytic_fidelity(n: int, p: float) -> float:
    """Predicted fidelity of the damped GHZ state, (1 + (1-p)^{(n-1)/2})^2 / 4."""
    return 0.25 * (1.0 + (1.0 - p) ** ((n - 1) / 2)) ** 2


def default_theta_grid(n: int) -> np.ndarray:
    """Uniform grid 2 pi j / (4n): twice the density needed for order n."""
    points = 4 * n
    return np.arange(points) * (2.0 * math.pi / points)


def fourier_intensities(thetas, signal) -> dict[int, float]:
    """Coherence intensities I_m from a signal over one uniform period.

    The signal model is S(theta) = sum_m I_m e^{-i m theta}; for real
    signals I_m = I_{-m}, so only m >= 0 is returned (real parts, no
    clamping).  Raises if the grid is not uniform over [0, 2 pi) or too
    coarse to separate any coherence order at all.
    """
    thetas = np.asarray(thetas, dtype=float)
    signal = np.asarray(signal, dtype=float)
    count = thetas.size
    if count < 3:
        raise ValueError("angle grid too coarse for any coherence order")
    step = 2.0 * math.pi / count
    if not np.allclose(thetas, thetas[0] + step * np.arange(count), atol=1e-9):
        raise ValueError("angle grid must uniformly cover one full period")
    out = {}
    for m in range(count // 2 + 1):
        out[m] = float(np.mean(signal * np.exp(1j * m * (thetas - thetas[0]))).real)
    return out


# ------------------------------------------------------------------ sampling

@dataclass(frozen=True)
class InstanceDraw:
    """One damping draw at a given chain position, in both raw single-qubit
    form (for circuit construction) and conjugated-to-the-end form (for the
    closed-form engine)."""

    kind: str  # "diagonal" | "cross"
    left_1q: PauliString
    right_1q: PauliString
    alpha: float
    prob: float
    left_full: PauliString
    right_full: PauliString


def _conjugate_to_end(p1q: PauliString, n: int, qubit: int) -> PauliString:
    full = PauliString(n, p1q.x_mask << qubit, p1q.z_mask << qubit, p1q.phase_exp)
    for c in range(qubit, n - 1):
        full = cnot_conjugate(full, c, c + 1)
    return full


def instance_decomposition(n: int, p: float) -> tuple[list[list[InstanceDraw]], float]:
    """Decomposition terms of each damping instance (chain position 1..n-1)
    and the per-instance L1 weight."""
    decomp = convex_decompose(damping_channel(p))
    per_instance = []
    for qubit in range(1, n):
        draws = []
        for term in decomp.diagonal_terms:
            full = _conjugate_to_end(term.unitary, n, qubit)
            draws.append(InstanceDraw("diagonal", term.unitary, term.unitary,
                                      0.0, term.prob, full, full))
        for term in decomp.cross_terms:
            draws.append(InstanceDraw(
                "cross", term.u_left, term.u_right, term.alpha, term.prob,
                _conjugate_to_end(term.u_left, n, qubit),
                _conjugate_to_end(term.u_right, n, qubit)))
        per_instance.append(draws)
    return per_instance, decomp.lam


def _suffix_mask(n: int, qubit: int) -> int:
    return ((1 << n) - 1) >> qubit << qubit


@dataclass(frozen=True)
class _DrawTables:
    """Per-draw scalars consumed by the closed-form engine."""

    probs: np.ndarray       # sampling probabilities (shared by all instances)
    has_x: np.ndarray       # bool: draw flips the X-suffix parity
    sign_left: np.ndarray   # (-1)^{z-weight} of the conjugated left Pauli
    sign_right: np.ndarray
    is_cross: np.ndarray
    per_instance_weight: float  # decomposition L1 weight of one instance


def _draw_tables(n: int, p: float) -> tuple[_DrawTables, list[list[InstanceDraw]]]:
    per_instance, lam1 = instance_decomposition(n, p)
    first = per_instance[0]
    probs = np.array([d.prob for d in first])
    has_x = np.empty(len(first), dtype=bool)
    sgn_l = np.empty(len(first))
    sgn_r = np.empty(len(first))
    is_cross = np.array([d.kind == "cross" for d in first])
    for i, (qubit, draws) in enumerate(zip(range(1, n), per_instance)):
        for j, d in enumerate(draws):
            for side in (d.left_full, d.right_full):
                # the engine's weight bookkeeping needs the suffix structure
                if side.x_mask not in (0, _suffix_mask(n, qubit)):
                    raise AssertionError("conjugated damping Pauli lost suffix form")
            if i == 0:
                has_x[j] = d.left_full.x_mask != 0
                sgn_l[j] = -1.0 if d.left_full.z_mask.bit_count() % 2 else 1.0
                sgn_r[j] = -1.0 if d.right_full.z_mask.bit_count() % 2 else 1.0
    return _DrawTables(probs, has_x, sgn_l, sgn_r, is_cross, lam1), per_instance


def _x_weights(draw_idx: np.ndarray, has_x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """X-weight of the XOR'd suffix masks and the no-X flag, per sample.

    draw_idx has shape (samples, instances); bit q of the product's x-mask
    is the parity of X-type draws among instances <= q.
    """
    samples, instances = draw_idx.shape
    parity = np.zeros(samples, dtype=np.int64)
    weight = np.zeros(samples, dtype=np.int64)
    any_x = np.zeros(samples, dtype=bool)
    for i in range(instances):
        flips = has_x[draw_idx[:, i]]
        parity ^= flips.astype(np.int64)
        weight += parity
        any_x |= flips
    return weight, any_x


def _branch_amp(sign: np.ndarray, weight: np.ndarray, n: int, theta: float) -> np.ndarray:
    return 0.5 * sign * (np.exp(1j * theta * weight) + np.exp(1j * theta * (n - weight)))


# ------------------------------------------------------------------ circuits

def mqc_term_circuit(n: int, draws: list[InstanceDraw], theta: float) -> GateSequence:
    """Full mirrored circuit for one sampled term (validation oracle).

    Register: system qubits 0..n-1 plus one ancilla qubit n whenever the
    term contains a cross draw.  The mirror reapplies every sampled gate
    and inverts the interference phases.
    """
    has_cross = any(d.kind == "cross" for d in draws)
    total = n + 1 if has_cross else n
    anc = n
    gates = []
    if has_cross:
        gates.append(hadamard(anc))
    gates.append(hadamard(0))

    def damping_gates(d: InstanceDraw, qubit: int, invert: bool):
        def embed(p1q):
            return PauliString(total, p1q.x_mask << qubit, p1q.z_mask << qubit,
                               p1q.phase_exp)
        if d.kind == "diagonal":
            return [pauli_op(embed(d.left_1q))]
        seq = [controlled_pauli_op(anc, embed(d.left_1q)),
               x_gate(anc), controlled_pauli_op(anc, embed(d.right_1q)), x_gate(anc),
               phase_gate(anc, -d.alpha if invert else d.alpha)]
        return seq

    for qubit, d in zip(range(1, n), draws):
        gates.append(cnot(qubit - 1, qubit))
        gates.extend(damping_gates(d, qubit, invert=False))
    for q in range(n):
        gates.append(x_gate(q))
        gates.append(phase_gate(q, theta))
    for qubit, d in zip(range(n - 1, 0, -1), draws[::-1]):
        gates.extend(damping_gates(d, qubit, invert=True))
        gates.append(cnot(qubit - 1, qubit))
    gates.append(hadamard(0))
    return GateSequence(total, tuple(gates))


def population_term_circuit(n: int, draws: list[InstanceDraw]) -> GateSequence:
    """Preparation-only circuit for one sampled term (standard-basis pass)."""
    has_cross = any(d.kind == "cross" for d in draws)
    total = n + 1 if has_cross else n
    anc = n
    gates = []
    if has_cross:
        gates.append(hadamard(anc))
    gates.append(hadamard(0))
    for qubit, d in zip(range(1, n), draws):
        gates.append(cnot(qubit - 1, qubit))
        def embed(p1q):
            return PauliString(total, p1q.x_mask << qubit, p1q.z_mask << qubit,
                               p1q.phase_exp)
        if d.kind == "diagonal":
            gates.append(pauli_op(embed(d.left_1q)))
        else:
            gates += [controlled_pauli_op(anc, embed(d.left_1q)),
                      x_gate(anc), controlled_pauli_op(anc, embed(d.right_1q)),
                      x_gate(anc), phase_gate(anc, d.alpha)]
    return GateSequence(total, tuple(gates))


# ------------------------------------------------------------------ experiment

@dataclass
class GhzExperimentConfig:
    n_qubits: int
    damping_p: float
    theta_grid: np.ndarray | None = None
    shots_per_angle: int = 1000
    n_runs: int = 5
    seed: int = 0

    def resolved_grid(self) -> np.ndarray:
        grid = default_theta_grid(self.n_qubits) if self.theta_grid is None \
            else np.asarray(self.theta_grid, dtype=float)
        if grid.size < 2 * self.n_qubits + 1:
            raise ValueError("angle grid cannot resolve the order-n coherence")
        return grid

    def validate(self):
        if self.n_qubits < 2:
            raise ValueError("experiment needs at least two qubits")
        if not 0.0 <= self.damping_p <= 1.0:
            raise ValueError("damping strength must lie in [0, 1]")
        if self.shots_per_angle < 0:
            raise ValueError("shots_per_angle must be >= 0 (0 selects exact mode)")
        if self.n_runs < 1:
            raise ValueError("need at least one run")
        self.resolved_grid()


@dataclass
class MqcResult:
    n_qubits: int
    damping_p: float
    thetas: np.ndarray
    signal_mean: np.ndarray
    signal_stderr: np.ndarray
    run_signals: np.ndarray         # (n_runs, n_angles)
    run_signal_stderr: np.ndarray   # per-angle shot error within each run
    intensities: dict[int, float]
    populations: float
    populations_stderr: float
    coherence: float
    fidelity: float
    fidelity_stderr: float
    run_fidelities: np.ndarray
    exact: bool


def _lam_total(n: int, p: float) -> float:
    return (1.0 + p) ** (n - 1)


def _all_draw_indices(n: int, k: int) -> np.ndarray:
    """Every draw tuple as a (k^(n-1), n-1) index array, mixed-radix order."""
    instances = n - 1
    total = k ** instances
    if total > _EXACT_TERM_CAP:
        raise ValueError(
            f"exact mode would enumerate {total} terms (cap {_EXACT_TERM_CAP}); "
            "use shot mode for this size")
    idx = np.arange(total, dtype=np.int64)
    draw_idx = np.empty((total, instances), dtype=np.int64)
    for i in range(instances):
        draw_idx[:, i] = (idx // (k ** i)) % k
    return draw_idx


def _exact_signal(n: int, tables: _DrawTables, thetas: np.ndarray) -> np.ndarray:
    """Exhaustive enumeration of every sampled term, closed form per term.

    Each term contributes sign/2 * (cos((wL-wR) theta) + cos((n-wL-wR) theta))
    with wL, wR the X-weights of the two branch Paulis, so the whole signal
    collapses onto integer-frequency cosine bins.
    """
    draw_idx = _all_draw_indices(n, tables.probs.size)
    v = np.prod(tables.per_instance_weight * tables.probs[draw_idx], axis=1)
    sgn = np.prod(tables.sign_left[draw_idx] * tables.sign_right[draw_idx], axis=1)
    w_l, _ = _x_weights(draw_idx, tables.has_x)
    w_r = w_l  # every draw kind has identical left/right X-suffix structure
    coeff = 0.5 * v * sgn
    bins = np.bincount(np.abs(w_l - w_r), weights=coeff, minlength=n + 1)
    bins += np.bincount(np.abs(n - w_l - w_r), weights=coeff, minlength=n + 1)
    return np.array([float(np.dot(bins, np.cos(np.arange(bins.size) * th)))
                     for th in thetas])


def _exact_populations(n: int, tables: _DrawTables) -> float:
    draw_idx = _all_draw_indices(n, tables.probs.size)
    v = np.prod(tables.per_instance_weight * tables.probs[draw_idx], axis=1)
    sgn = np.prod(tables.sign_left[draw_idx] * tables.sign_right[draw_idx], axis=1)
    _, any_x = _x_weights(draw_idx, tables.has_x)
    hit = np.where(any_x, 0.0, 0.5 * (1.0 + sgn))
    return float(np.sum(v * hit))


def _sample_draw_indices(tables: _DrawTables, shots: int, instances: int,
                         rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(tables.probs)
    cum[-1] = 1.0
    u = rng.random((shots, instances))
    return np.searchsorted(cum, u, side="right")


def _shot_signal(n: int, tables: _DrawTables, theta: float, shots: int, lam: float,
                 rng: np.random.Generator) -> tuple[float, float]:
    """Weighted single-shot estimates of the mirrored signal at one angle."""
    instances = n - 1
    draw_idx = _sample_draw_indices(tables, shots, instances, rng)
    sgn_l = np.prod(tables.sign_left[draw_idx], axis=1)
    sgn_r = np.prod(tables.sign_right[draw_idx], axis=1)
    weights, _ = _x_weights(draw_idx, tables.has_x)
    amp_l = _branch_amp(sgn_l, weights, n, theta)
    amp_r = _branch_amp(sgn_r, weights, n, theta)
    has_cross = np.any(tables.is_cross[draw_idx], axis=1)
    u = rng.random(shots)
    values = np.zeros(shots)
    # all-diagonal terms: plain all-zero hit probability
    diag = ~has_cross
    p_hit = np.abs(amp_l) ** 2
    values[diag] = (u[diag] < p_hit[diag]).astype(float)
    # cross terms: ancilla-X outcome (+1 / -1 / miss)
    p_plus = np.abs(amp_r + amp_l) ** 2 / 4.0
    p_minus = np.abs(amp_r - amp_l) ** 2 / 4.0
    cross = has_cross
    vals_cross = np.where(u[cross] < p_plus[cross], 1.0,
                          np.where(u[cross] < (p_plus + p_minus)[cross], -1.0, 0.0))
    values[cross] = vals_cross
    values *= lam
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    return mean, stderr


def _shot_populations(n: int, tables: _DrawTables, shots: int, lam: float,
                      rng: np.random.Generator) -> tuple[float, float]:
    instances = n - 1
    draw_idx = _sample_draw_indices(tables, shots, instances, rng)
    sgn_l = np.prod(tables.sign_left[draw_idx], axis=1)
    sgn_r = np.prod(tables.sign_right[draw_idx], axis=1)
    _, any_x = _x_weights(draw_idx, tables.has_x)
    has_cross = np.any(tables.is_cross[draw_idx], axis=1)
    u = rng.random(shots)
    values = np.zeros(shots)
    # no-X diagonal terms always land in {0^n, 1^n}: value 1
    diag = ~has_cross & ~any_x
    values[diag] = 1.0
    # no-X cross terms: value 1 when the two sign branches agree, otherwise
    # +1/-1 with probability 1/2 each (mean zero)
    cross = has_cross & ~any_x
    agree = sgn_l == sgn_r
    values[cross & agree] = 1.0
    flip = cross & ~agree
    values[flip] = np.where(u[flip] < 0.5, 1.0, -1.0)
    values *= lam
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    return mean, stderr


def _fidelity_from(thetas, signal, populations, n) -> tuple[float, float, dict[int, float]]:
    intensities = fourier_intensities(thetas, signal)
    coherence = 2.0 * math.sqrt(max(intensities[n], 0.0))
    return 0.5 * (populations + coherence), coherence, intensities


def run_mqc_experiment(config: GhzExperimentConfig) -> MqcResult:
    """Run the mirrored coherence experiment per the configuration.

    shots_per_angle == 0 selects exact mode: exhaustive term enumeration,
    one run, zero statistical error.  Otherwise every shot draws a fresh
    set of damping terms, and run-level fidelities provide the error bar.
    """
    config.validate()
    n = config.n_qubits
    p = config.damping_p
    thetas = config.resolved_grid()
    tables, _ = _draw_tables(n, p)
    lam = _lam_total(n, p)

    if config.shots_per_angle == 0:
        signal = _exact_signal(n, tables, thetas)
        populations = _exact_populations(n, tables)
        fidelity, coherence, intensities = _fidelity_from(thetas, signal, populations, n)
        zeros = np.zeros_like(signal)
        return MqcResult(
            n, p, thetas, signal, zeros, signal[None, :], zeros[None, :],
            intensities, populations, 0.0, coherence, fidelity, 0.0,
            np.array([fidelity]), exact=True)

    ss = np.random.SeedSequence(config.seed)
    children = ss.spawn(config.n_runs * (thetas.size + 1))
    run_signals = np.zeros((config.n_runs, thetas.size))
    run_errs = np.zeros_like(run_signals)
    run_pops = np.zeros(config.n_runs)
    run_pop_errs = np.zeros(config.n_runs)
    run_fids = np.zeros(config.n_runs)
    stream = 0
    for run in range(config.n_runs):
        for j, theta in enumerate(thetas):
            rng = np.random.Generator(np.random.Philox(children[stream]))
            stream += 1
            run_signals[run, j], run_errs[run, j] = _shot_signal(
                n, tables, float(theta), config.shots_per_angle, lam, rng)
        rng = np.random.Generator(np.random.Philox(children[stream]))
        stream += 1
        run_pops[run], run_pop_errs[run] = _shot_populations(
            n, tables, config.shots_per_angle, lam, rng)
        run_fids[run], _, _ = _fidelity_from(thetas, run_signals[run], run_pops[run], n)

    signal_mean = run_signals.mean(axis=0)
    if config.n_runs > 1:
        signal_stderr = run_signals.std(axis=0, ddof=1) / math.sqrt(config.n_runs)
        pop_stderr = float(run_pops.std(ddof=1) / math.sqrt(config.n_runs))
        fid_stderr = float(run_fids.std(ddof=1) / math.sqrt(config.n_runs))
    else:
        signal_stderr = run_errs[0]
        pop_stderr = run_pop_errs[0]
        fid_stderr = 0.0
    populations = float(run_pops.mean())
    fidelity_mean, coherence, intensities = _fidelity_from(
        thetas, signal_mean, populations, n)
    return MqcResult(
        n, p, thetas, signal_mean, signal_stderr, run_signals, run_errs,
        intensities, populations, pop_stderr, coherence,
        float(run_fids.mean()), fid_stderr, run_fids, exact=False)
