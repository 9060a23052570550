"""Randomized compilers for time evolution under a Pauli-sum Hamiltonian.

Two step samplers are built here, both of which rewrite one short-time
propagator step as a normalization constant times a convex mixture of
simple unitaries:

* convex Taylor sampling (CTS): the truncated Taylor series of
  exp(-iHt) is split into its even part (sampled as plain signed Pauli
  operators) and its odd-plus-identity part (sampled as fixed-angle
  Pauli-axis rotations).
* stochastically enhanced product formulas: a first- or second-order
  product formula is kept as the dominant draw, and its series
  remainder terms are sampled as phase-tagged Pauli corrections.

Left and right propagator draws are independent; a full schedule of r
steps carries the normalization lambda = mu(t/r)^{2r}, which prices the
measurement overhead as lambda^2.

Conventions: a factor list [F_1, ..., F_m] represents the operator
product F_1 F_2 ... F_m with F_1 leftmost, so F_1 is the *last* gate
applied in circuit time.  Product-formula factors order the diagonal
(x_mask == 0) terms first, ascending, then the off-diagonal ones;
Trotter remainders depend on this choice and all series expansions here
use the same one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuits import GateSequence, pauli_op, pauli_rotation
from .paulis import (
    HamiltonianPowers,
    PauliString,
    PauliSum,
    exp_series_tail,
    _I_POW,
    _mul_phase_exp,
)

__all__ = [
    "CtsDecomposition",
    "EnhancedPfDecomposition",
    "HamiltonianPowers",
    "MarkovPartition",
    "MarkovSample",
    "ProductFormulaSeries",
    "SimulationSchedule",
    "SolverError",
    "StepDraw",
    "cts_decompose",
    "cts_overhead",
    "cts_schedule",
    "cts_steps_for_error",
    "cts_steps_for_overhead",
    "enhanced_pf_decompose",
    "enhanced_pf_schedule",
    "markov_partition_sample",
    "pf_enhanced_overhead",
    "pf_enhanced_steps_for_error",
    "pf_enhanced_steps_for_overhead",
    "pf_exponent_factors",
    "pf_remainder",
    "pf_steps_for_error",
    "product_formula",
]

_LOG_MAX = 700.0  # exp() overflow guard


class SolverError(RuntimeError):
    """A step-count search failed to bracket its target."""


# ===================================================================== draws

@dataclass(frozen=True)
class StepDraw:
    """One sampled propagator factor: a gate sequence plus a scalar phase
    e^{i phase} that the interference circuit applies on its branch."""

    kind: str  # "pauli" | "rotation" | "base_formula" | "correction"
    gates: GateSequence
    phase: float = 0.0
    pauli: PauliString | None = None
    angle: float = 0.0

    def descriptor(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.pauli is not None:
            out["pauli"] = self.pauli.to_label()
        if self.kind == "rotation":
            out["angle"] = self.angle
        if self.phase:
            out["phase"] = self.phase
        return out


@dataclass(frozen=True)
class SimulationSchedule:
    """r sampled left/right step pairs plus the channel normalization."""

    algorithm: str
    n_qubits: int
    t: float
    r: int
    order: int
    log_lambda: float
    left: tuple[StepDraw, ...]
    right: tuple[StepDraw, ...]
    seed: int | None = None

    def __post_init__(self):
        if self.log_lambda < -1e-12:
            raise ValueError("schedule normalization must be >= 1")
        if len(self.left) != self.r or len(self.right) != self.r:
            raise ValueError("schedule must hold r draws per side")

    @property
    def lam(self) -> float:
        return math.exp(self.log_lambda) if self.log_lambda < _LOG_MAX else math.inf

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n_qubits": self.n_qubits,
            "t": self.t,
            "r": self.r,
            "order": self.order,
            "seed": self.seed,
            "lambda": self.lam,
            "log_lambda": self.log_lambda,
            "steps": [
                {"left": l.descriptor(), "right": r.descriptor()}
                for l, r in zip(self.left, self.right)
            ],
        }


def _signed(n: int, key: tuple[int, int], value: float) -> PauliString:
    return PauliString(n, key[0], key[1], 0 if value >= 0.0 else 2)


def _sample_categorical(probs, rng: np.random.Generator) -> int:
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    return len(probs) - 1


# ===================================================================== CTS

@dataclass(frozen=True)
class CtsDecomposition:
    """Convex split of the order-M Taylor step for exp(-iH t_step).

    ``pauli_terms`` carry probability l_cos * p_j / mu and apply the
    signed string directly; ``rotation_terms`` carry probability
    sqrt(1 + l_sin^2) * p_k / mu and apply exp(i * theta * P'_k).
    """

    n_qubits: int
    t_step: float
    order: int
    l_cos: float
    l_sin: float
    theta: float
    mu: float
    pauli_terms: tuple[tuple[float, PauliString], ...]
    rotation_terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        total = sum(p for p, _ in self.pauli_terms) + sum(p for p, _ in self.rotation_terms)
        if abs(total - 1.0) > 1e-10:
            raise ValueError("step distribution must sum to one")
        if self.mu < 1.0 - 1e-12:
            raise ValueError("step normalization must be >= 1")

    def sample(self, rng: np.random.Generator) -> StepDraw:
        probs = [p for p, _ in self.pauli_terms] + [p for p, _ in self.rotation_terms]
        idx = _sample_categorical(probs, rng)
        if idx < len(self.pauli_terms):
            _, pauli = self.pauli_terms[idx]
            return StepDraw("pauli", GateSequence(self.n_qubits, (pauli_op(pauli),)),
                            pauli=pauli)
        _, pauli = self.rotation_terms[idx - len(self.pauli_terms)]
        return StepDraw("rotation", self.rotation_gates(pauli),
                        pauli=pauli, angle=-2.0 * self.theta)

    def rotation_gates(self, pauli: PauliString) -> GateSequence:
        # exp(i theta P) written as the rotation exp(-i (angle/2) P)
        return GateSequence(self.n_qubits, (pauli_rotation(pauli, -2.0 * self.theta),))

    def reconstruction(self) -> PauliSum:
        """mu times the expected sampled operator; equals the truncated series."""
        n = self.n_qubits
        acc = PauliSum.zero(n)
        pieces = [(self.mu * p * pauli.sign,
                   PauliSum.from_pauli(PauliString(n, pauli.x_mask, pauli.z_mask, 0)))
                  for p, pauli in self.pauli_terms]
        cos_t, sin_t = math.cos(self.theta), math.sin(self.theta)
        for p, pauli in self.rotation_terms:
            plain = PauliSum.from_pauli(PauliString(n, pauli.x_mask, pauli.z_mask, 0))
            pieces.append((self.mu * p * cos_t, PauliSum.identity(n)))
            pieces.append((self.mu * p * 1j * sin_t * pauli.sign, plain))
        return acc.scaled_add(pieces)


def cts_decompose(hamiltonian: PauliSum, t: float, order: int,
                  powers: HamiltonianPowers | None = None) -> CtsDecomposition:
    """Build the convex Taylor step sampler at time step t."""
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    if powers is None:
        powers = HamiltonianPowers(hamiltonian, order)
    even, odd = powers.even_odd(t, order)
    even = even.real_coefficients()
    odd = odd.real_coefficients()
    l_cos = even.l1_norm()
    l_sin = odd.l1_norm()
    root = math.sqrt(1.0 + l_sin * l_sin)
    theta = math.acos(1.0 / root)
    mu = l_cos + root
    n = hamiltonian.n_qubits
    pauli_terms = tuple(
        (abs(c.real) / mu, _signed(n, key, c.real)) for key, c in even.sorted_items()
    )
    if l_sin > 0.0:
        rotation_terms = tuple(
            (root * abs(c.real) / (l_sin * mu), _signed(n, key, c.real))
            for key, c in odd.sorted_items()
        )
    else:
        rotation_terms = ((1.0 / mu, PauliString.identity(n)),)
    return CtsDecomposition(n, t, order, l_cos, l_sin, theta, mu,
                            pauli_terms, rotation_terms)


class _AlignedSeries:
    """Order-tagged Pauli sums flattened onto one shared key index so that
    L1 norms of s-weighted merges cost a single vectorized pass."""

    def __init__(self, pieces: list[tuple[int, PauliSum]]):
        keys: dict[tuple[int, int], int] = {}
        for _, part in pieces:
            for key, _ in part.items():
                keys.setdefault(key, len(keys))
        self.orders = [order for order, _ in pieces]
        self.vectors = []
        for _, part in pieces:
            vec = np.zeros(len(keys), dtype=complex)
            for key, coeff in part.items():
                vec[keys[key]] = coeff
            self.vectors.append(vec)

    def merged_l1(self, s: float) -> float:
        if not self.vectors:
            return 0.0
        acc = np.zeros_like(self.vectors[0])
        for order, vec in zip(self.orders, self.vectors):
            acc += (s ** order) * vec
        return float(np.abs(acc).sum())


class _CtsNorms:
    """Fast mu(s) evaluation backed by cached Hamiltonian powers."""

    def __init__(self, powers: HamiltonianPowers, order: int):
        self.order = order
        even_pieces, odd_pieces = [], []
        for k in range(1, order + 1):
            scaled = (((-1) ** (k // 2)) / math.factorial(k)) * powers.power(k) \
                if k % 2 == 0 else \
                (((-1) ** ((k - 1) // 2 + 1)) / math.factorial(k)) * powers.power(k)
            (even_pieces if k % 2 == 0 else odd_pieces).append((k, scaled))
        self._even = _AlignedSeries(even_pieces)
        self._odd = _AlignedSeries(odd_pieces)

    def mu(self, s: float) -> float:
        l_cos = self._even.merged_l1(s)
        l_sin = self._odd.merged_l1(s)
        return l_cos + math.sqrt(1.0 + l_sin * l_sin)


def cts_overhead(hamiltonian: PauliSum, t: float, r: int, order: int,
                 powers: HamiltonianPowers | None = None) -> float:
    """Channel normalization lambda = mu(t/r)^{2r} for an r-step schedule."""
    if powers is None:
        powers = HamiltonianPowers(hamiltonian, order)
    mu = _CtsNorms(powers, order).mu(t / r)
    log_lam = 2.0 * r * math.log(mu)
    return math.exp(log_lam) if log_lam < _LOG_MAX else math.inf


def cts_schedule(hamiltonian: PauliSum, t: float, r: int, order: int,
                 rng: np.random.Generator,
                 powers: HamiltonianPowers | None = None,
                 seed: int | None = None) -> SimulationSchedule:
    """Sample r independent left draws from the step at +t/r and right
    draws from the step at -t/r."""
    if r < 1:
        raise ValueError("step count must be >= 1")
    if powers is None:
        powers = HamiltonianPowers(hamiltonian, order)
    left_step = cts_decompose(hamiltonian, t / r, order, powers)
    right_step = cts_decompose(hamiltonian, -t / r, order, powers)
    left = tuple(left_step.sample(rng) for _ in range(r))
    right = tuple(right_step.sample(rng) for _ in range(r))
    log_lam = r * (math.log(left_step.mu) + math.log(right_step.mu))
    return SimulationSchedule("cts", hamiltonian.n_qubits, t, r, order,
                              log_lam, left, right, seed)


def _smallest_r(predicate, r_max: int = 10 ** 15) -> int:
    """Smallest integer r >= 1 with predicate(r) true (predicate monotone)."""
    if predicate(1):
        return 1
    lo, hi = 1, 2
    while not predicate(hi):
        lo = hi
        hi *= 2
        if hi > r_max:
            raise SolverError(f"no step count below {r_max} satisfies the constraint")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def cts_steps_for_error(hamiltonian: PauliSum, t: float, order: int,
                        eps: float) -> int:
    """Smallest r with r * tail(|H|_1 |t| / r, order) <= eps, where tail is
    the exponential-series tail beyond the truncation order."""
    if eps <= 0:
        raise ValueError("error budget must be positive")
    x = hamiltonian.l1_norm() * abs(t)
    if x == 0.0:
        return 1
    return _smallest_r(lambda r: r * exp_series_tail(x / r, order) <= eps)


def cts_steps_for_overhead(hamiltonian: PauliSum, t: float, lambda_max: float,
                           order: int,
                           powers: HamiltonianPowers | None = None) -> int:
    """Smallest r with mu(t/r)^{2r} <= lambda_max."""
    if lambda_max <= 1.0:
        raise ValueError("lambda budget must exceed 1")
    if powers is None:
        powers = HamiltonianPowers(hamiltonian, order)
    norms = _CtsNorms(powers, order)
    log_budget = math.log(lambda_max)
    return _smallest_r(lambda r: 2.0 * r * math.log(norms.mu(t / r)) <= log_budget)


# ============================================================ product formulas

def pf_exponent_factors(hamiltonian: PauliSum, order: int) -> list[tuple[float, PauliString]]:
    """Exponent factors (coefficient, string) of S_p, leftmost first.

    S_1(t) multiplies exp(-i c_j P_j t) over the fixed term order; S_2(t)
    runs the half-angle factors forward and then reversed.
    """
    if order not in (1, 2):
        raise ValueError("only product-formula orders 1 and 2 are supported")
    base = [(c.real, p) for c, p in hamiltonian.real_coefficients().sorted_terms()]
    if order == 1:
        return base
    halves = [(0.5 * c, p) for c, p in base]
    return halves + halves[::-1]


def product_formula(hamiltonian: PauliSum, t: float, order: int) -> GateSequence:
    """Gate sequence of the order-p formula; the leftmost operator factor
    is the last gate applied."""
    factors = pf_exponent_factors(hamiltonian, order)
    gates = tuple(pauli_rotation(p, 2.0 * c * t) for c, p in reversed(factors))
    return GateSequence(hamiltonian.n_qubits, gates)


class ProductFormulaSeries:
    """Order-by-order Pauli expansion of a product formula and its remainder.

    Stores the t-order coefficients A_l of the formula's series, the
    exact propagator coefficients E_l = (-i)^l H^l / l!, and their
    differences R_l (zero through order p by construction).  The
    remainder at a concrete step s is sum_l s^l R_l; its L1 norm is what
    prices the enhanced formula's sampling overhead.
    """

    _MID_PRUNE = 1e-14

    def __init__(self, hamiltonian: PauliSum, order: int, max_order: int):
        if order not in (1, 2):
            raise ValueError("only product-formula orders 1 and 2 are supported")
        if max_order <= order:
            raise ValueError("truncation order must exceed the formula order")
        self.order = order
        self.max_order = max_order
        self.hamiltonian = hamiltonian
        self.h_l1 = hamiltonian.l1_norm()
        powers = HamiltonianPowers(hamiltonian, max_order)
        n = hamiltonian.n_qubits
        poly = self._expand_formula(n, max_order)
        self.remainder_orders: list[tuple[int, PauliSum]] = []
        for l in range(order + 1, max_order + 1):
            exact = ((-1j) ** l / math.factorial(l)) * powers.power(l)
            diff = exact - PauliSum(n, poly[l])
            scale = max(exact.max_abs_coeff(), 1e-300)
            cleaned = PauliSum(n, {k: c for k, c in diff.items()
                                   if abs(c) > 1e-12 * scale})
            self.remainder_orders.append((l, cleaned))
        self._aligned = _AlignedSeries(self.remainder_orders)

    def _expand_formula(self, n: int, max_order: int) -> list[dict]:
        poly: list[dict] = [{(0, 0): 1.0 + 0.0j}] + [dict() for _ in range(max_order)]
        for c, sigma in pf_exponent_factors(self.hamiltonian, self.order):
            skey = (sigma.x_mask, sigma.z_mask)
            scalars = [(-1j * c) ** k / math.factorial(k) for k in range(max_order + 1)]
            new = [dict() for _ in range(max_order + 1)]
            for l in range(max_order + 1):
                for k in range(l + 1):
                    part = poly[l - k]
                    if not part:
                        continue
                    s = scalars[k]
                    if k % 2 == 0:
                        for key, coeff in part.items():
                            new[l][key] = new[l].get(key, 0.0 + 0.0j) + coeff * s
                    else:
                        for (x1, z1), coeff in part.items():
                            ph = _I_POW[_mul_phase_exp(x1, z1, skey[0], skey[1])]
                            key = (x1 ^ skey[0], z1 ^ skey[1])
                            new[l][key] = new[l].get(key, 0.0 + 0.0j) + coeff * s * ph
            for l in range(max_order + 1):
                if new[l]:
                    cut = self._MID_PRUNE * max(abs(v) for v in new[l].values())
                    new[l] = {k: v for k, v in new[l].items() if abs(v) > cut}
            poly = new
        return poly

    def remainder(self, s: float) -> PauliSum:
        n = self.hamiltonian.n_qubits
        return PauliSum.zero(n).scaled_add(
            [(s ** l, part) for l, part in self.remainder_orders])

    def remainder_l1(self, s: float) -> float:
        return self._aligned.merged_l1(s)

    def step_error_bound(self, s: float) -> float:
        """Per-step spectral-error bound for the bare formula: the order-M
        series mismatch plus both series' tails beyond order M."""
        return self.remainder_l1(s) + 2.0 * exp_series_tail(self.h_l1 * abs(s),
                                                            self.max_order)


def pf_remainder(hamiltonian: PauliSum, t: float, order: int, max_order: int,
                 series: ProductFormulaSeries | None = None) -> PauliSum:
    """Series difference exp(-iHt) - S_p(t), both truncated at max_order."""
    if series is None:
        series = ProductFormulaSeries(hamiltonian, order, max_order)
    return series.remainder(t)


def pf_steps_for_error(hamiltonian: PauliSum, t: float, order: int, max_order: int,
                       eps: float, series: ProductFormulaSeries | None = None) -> int:
    """Smallest r with r * (per-step formula error bound at t/r) <= eps."""
    if eps <= 0:
        raise ValueError("error budget must be positive")
    if series is None:
        series = ProductFormulaSeries(hamiltonian, order, max_order)
    return _smallest_r(lambda r: r * series.step_error_bound(t / r) <= eps)


def pf_enhanced_steps_for_error(hamiltonian: PauliSum, t: float, order: int,
                                max_order: int, eps: float) -> int:
    """The enhanced step reproduces the order-M series exactly, so the
    error budget reduces to the same tail condition as CTS."""
    del order
    return cts_steps_for_error(hamiltonian, t, max_order, eps)


def _pf_log_lambda(series: ProductFormulaSeries, t: float, r: int) -> float:
    # the first-order formula is orientation asymmetric, so price the
    # +s and -s remainders separately
    return r * (math.log1p(series.remainder_l1(t / r))
                + math.log1p(series.remainder_l1(-t / r)))


def pf_enhanced_overhead(hamiltonian: PauliSum, t: float, r: int, order: int,
                         max_order: int,
                         series: ProductFormulaSeries | None = None) -> float:
    if series is None:
        series = ProductFormulaSeries(hamiltonian, order, max_order)
    log_lam = _pf_log_lambda(series, t, r)
    return math.exp(log_lam) if log_lam < _LOG_MAX else math.inf


def pf_enhanced_steps_for_overhead(hamiltonian: PauliSum, t: float, order: int,
                                   max_order: int, lambda_max: float,
                                   series: ProductFormulaSeries | None = None) -> int:
    if lambda_max <= 1.0:
        raise ValueError("lambda budget must exceed 1")
    if series is None:
        series = ProductFormulaSeries(hamiltonian, order, max_order)
    log_budget = math.log(lambda_max)
    return _smallest_r(lambda r: _pf_log_lambda(series, t, r) <= log_budget)


@dataclass(frozen=True)
class EnhancedPfDecomposition:
    """One enhanced-formula step: the bare formula with probability
    1/mu, otherwise a phase-tagged Pauli correction from the remainder."""

    n_qubits: int
    order: int
    t_step: float
    max_order: int
    base_formula: GateSequence
    p0: float
    mu: float
    corrections: tuple[tuple[float, complex, PauliString], ...]

    def __post_init__(self):
        total = self.p0 + sum(p for p, _, _ in self.corrections)
        if abs(total - 1.0) > 1e-10:
            raise ValueError("step distribution must sum to one")
        if self.mu < 1.0 - 1e-12:
            raise ValueError("step normalization must be >= 1")

    def sample(self, rng: np.random.Generator) -> StepDraw:
        probs = [self.p0] + [p for p, _, _ in self.corrections]
        idx = _sample_categorical(probs, rng)
        if idx == 0:
            return StepDraw("base_formula", self.base_formula)
        prob, phase, pauli = self.corrections[idx - 1]
        return StepDraw("correction", GateSequence(self.n_qubits, (pauli_op(pauli),)),
                        phase=cmath.phase(phase), pauli=pauli)

    def remainder_sum(self) -> PauliSum:
        n = self.n_qubits
        return PauliSum.zero(n).scaled_add(
            [(self.mu * p * phase, PauliSum.from_pauli(pauli))
             for p, phase, pauli in self.corrections])


def enhanced_pf_decompose(hamiltonian: PauliSum, t: float, order: int,
                          max_order: int,
                          series: ProductFormulaSeries | None = None
                          ) -> EnhancedPfDecomposition:
    """Build the enhanced product-formula step sampler at time step t."""
    if series is None:
        series = ProductFormulaSeries(hamiltonian, order, max_order)
    remainder = series.remainder(t)
    mu = 1.0 + remainder.l1_norm()
    corrections = []
    for key, coeff in remainder.sorted_items():
        mag = abs(coeff)
        corrections.append((mag / mu, coeff / mag,
                            PauliString(hamiltonian.n_qubits, key[0], key[1], 0)))
    return EnhancedPfDecomposition(
        hamiltonian.n_qubits, order, t, max_order,
        product_formula(hamiltonian, t, order), 1.0 / mu, mu, tuple(corrections))


def enhanced_pf_schedule(hamiltonian: PauliSum, t: float, r: int, order: int,
                         max_order: int, rng: np.random.Generator,
                         series: ProductFormulaSeries | None = None,
                         seed: int | None = None) -> SimulationSchedule:
    if r < 1:
        raise ValueError("step count must be >= 1")
    if series is None:
        series = ProductFormulaSeries(hamiltonian, order, max_order)
    left_step = enhanced_pf_decompose(hamiltonian, t / r, order, max_order, series)
    right_step = enhanced_pf_decompose(hamiltonian, -t / r, order, max_order, series)
    left = tuple(left_step.sample(rng) for _ in range(r))
    right = tuple(right_step.sample(rng) for _ in range(r))
    log_lam = r * (math.log(left_step.mu) + math.log(right_step.mu))
    return SimulationSchedule(f"pf{order}_enhanced", hamiltonian.n_qubits, t, r,
                              max_order, log_lam, left, right, seed)


# ================================================================ Markov layers

@dataclass(frozen=True)
class MarkovSample:
    """One layered draw: the estimator term is weight * phase * pauli."""

    pauli: PauliString
    phase: complex
    weight: float


class MarkovPartition:
    """Layered sampling of a product of operator powers.

    Each factor power A^m is expanded and sampled as its own L1-normalized
    ensemble; the product of the per-layer draws is an unbiased estimator
    of the fully expanded product at the cost of a generally larger L1
    weight.  Powers above 4 are refused: expanding them defeats the point
    of layering, which exists to keep each layer's expansion small.
    """

    MAX_POWER = 4

    def __init__(self, factors: list[tuple[PauliSum, int]]):
        if not factors:
            raise ValueError("need at least one factor")
        self.layers: list[list[tuple[float, complex, PauliString]]] = []
        self.layer_sums: list[PauliSum] = []
        weight = 1.0
        for base, power in factors:
            if not 1 <= power <= self.MAX_POWER:
                raise ValueError(
                    f"factor power {power} outside the expandable range "
                    f"1..{self.MAX_POWER}")
            expanded = base
            for _ in range(power - 1):
                expanded = expanded @ base
            l1 = expanded.l1_norm()
            if l1 == 0.0:
                raise ValueError("factor power expands to zero")
            layer = []
            for key, coeff in expanded.sorted_items():
                mag = abs(coeff)
                layer.append((mag / l1, coeff / mag,
                              PauliString(expanded.n_qubits, key[0], key[1], 0)))
            self.layers.append(layer)
            self.layer_sums.append(expanded)
            weight *= l1
        self.weight = weight

    def sample(self, rng: np.random.Generator) -> MarkovSample:
        total_phase = 1.0 + 0.0j
        product: PauliString | None = None
        for layer in self.layers:
            idx = _sample_categorical([p for p, _, _ in layer], rng)
            _, phase, pauli = layer[idx]
            total_phase *= phase
            product = pauli if product is None else product @ pauli
        return MarkovSample(product, total_phase, self.weight)

    def enumerate_terms(self):
        """All draws as (probability, phase, pauli); exhaustive oracle use."""
        import itertools

        for combo in itertools.product(*self.layers):
            prob = 1.0
            phase = 1.0 + 0.0j
            product: PauliString | None = None
            for p, ph, pauli in combo:
                prob *= p
                phase *= ph
                product = pauli if product is None else product @ pauli
            yield prob, phase, product

    def full_expansion(self) -> PauliSum:
        """Direct product of the expanded layers (the exact target)."""
        out = self.layer_sums[0]
        for part in self.layer_sums[1:]:
            out = out @ part
        return out


def markov_partition_sample(factors: list[tuple[PauliSum, int]],
                            rng: np.random.Generator) -> MarkovSample:
    """One draw of the layered product sampler; see MarkovPartition."""
    return MarkovPartition(factors).sample(rng)
