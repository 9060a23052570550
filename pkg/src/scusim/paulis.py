"""Exact sparse algebra over n-qubit Pauli operators.

Conventions used throughout the package:

* Qubit ``q`` lives at bit ``q`` (least significant) of the ``x_mask`` /
  ``z_mask`` integers, and at position ``q`` (leftmost) of text labels,
  so the label ``"XZY"`` puts X on qubit 0, Z on qubit 1, Y on qubit 2.
* A bit pair encodes I=(x=0,z=0), X=(1,0), Z=(0,1), Y=(1,1).
* A :class:`PauliString` represents ``i**phase_exp`` times the plain
  tensor product of I/X/Y/Z factors.  Products are evaluated internally
  in the ``X^x Z^z`` frame; the ``i**popcount(x & z)`` correction between
  the two frames makes the single-qubit identities (``XY = iZ`` and
  cyclic) fall out of plain symplectic arithmetic.  The convention is
  pinned by the dense single-qubit oracle in the test suite.
* A :class:`PauliSum` stores one complex coefficient per ``(x, z)`` key
  against the plain Hermitian Pauli basis, so the adjoint conjugates
  coefficients and a sum is Hermitian exactly when every stored
  coefficient is real (within tolerance).

Dense matrices are materialized only as small oracles (n <= 12).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

# Relative drop tolerance for sum coefficients: far below every
# verification tolerance in the package, but enough to stop term-count
# blowup in iterated series expansions.
DROP_TOL = 1e-12

_PAULI_CHARS = "IXZY"  # index = x_bit + 2*z_bit
_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}
_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

_DENSE_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _mul_phase_exp(x1: int, z1: int, x2: int, z2: int) -> int:
    """i-power picked up when multiplying plain Pauli tensors (x1,z1)*(x2,z2)."""
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    k = (x1 & z1).bit_count() + (x2 & z2).bit_count()
    k += 2 * (z1 & x2).bit_count()
    k -= (x3 & z3).bit_count()
    return k % 4


@dataclass(frozen=True)
class PauliString:
    """One phased n-qubit Pauli operator, ``i**phase_exp * P_0 x P_1 x ...``."""

    n_qubits: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask has bits outside the register")
        if self.x_mask < 0 or self.z_mask < 0:
            raise ValueError("masks must be nonnegative")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, kind: str) -> "PauliString":
        """Pauli `kind` on one qubit, identity elsewhere."""
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range for n={n_qubits}")
        x, z = _CHAR_TO_BITS[kind]
        return cls(n_qubits, x << qubit, z << qubit, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels like ``"XZIY"``, optionally prefixed by -, i, or -i."""
        phase = 0
        body = label.strip()
        if body.startswith("+"):
            body = body[1:]
        if body.startswith("-i"):
            phase, body = 3, body[2:]
        elif body.startswith("i"):
            phase, body = 1, body[1:]
        elif body.startswith("-"):
            phase, body = 2, body[1:]
        if not body or any(ch not in _CHAR_TO_BITS for ch in body):
            raise ValueError(f"bad Pauli label {label!r}")
        x = z = 0
        for q, ch in enumerate(body):
            xb, zb = _CHAR_TO_BITS[ch]
            x |= xb << q
            z |= zb << q
        return cls(len(body), x, z, phase)

    # -- queries ------------------------------------------------------

    def to_label(self, with_phase: bool = True) -> str:
        chars = []
        for q in range(self.n_qubits):
            idx = ((self.x_mask >> q) & 1) + 2 * ((self.z_mask >> q) & 1)
            chars.append(_PAULI_CHARS[idx])
        body = "".join(chars)
        return (_PHASE_PREFIX[self.phase_exp] if with_phase else "") + body

    def __str__(self) -> str:
        return self.to_label()

    @property
    def weight(self) -> int:
        """Number of non-identity tensor factors."""
        return (self.x_mask | self.z_mask).bit_count()

    @property
    def is_identity_body(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_hermitian(self) -> bool:
        """True when the carried phase is +1 or -1."""
        return self.phase_exp % 2 == 0

    @property
    def sign(self) -> complex:
        return _I_POW[self.phase_exp]

    def adjoint(self) -> "PauliString":
        # (i^e P)^dag = i^{-e} P for a plain Pauli tensor P.
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, (-self.phase_exp) % 4)

    def commutes_with(self, other: "PauliString") -> bool:
        self._check_dims(other)
        anti = (self.x_mask & other.z_mask).bit_count() + (self.z_mask & other.x_mask).bit_count()
        return anti % 2 == 0

    def _check_dims(self, other: "PauliString"):
        if self.n_qubits != other.n_qubits:
            raise ValueError(
                f"dimension mismatch: {self.n_qubits} vs {other.n_qubits} qubits"
            )

    # -- algebra ------------------------------------------------------

    def __matmul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def apply_to_basis(self, index: int) -> tuple[complex, int]:
        """Action on a computational basis state: P|index> = coeff |index'>."""
        coeff = _I_POW[(self.phase_exp + (self.x_mask & self.z_mask).bit_count()) % 4]
        if (self.z_mask & index).bit_count() % 2:
            coeff = -coeff
        return coeff, index ^ self.x_mask

    def to_dense(self) -> np.ndarray:
        """Dense matrix oracle; qubit 0 is the least significant index bit."""
        if self.n_qubits > 12:
            raise ValueError("dense oracle is limited to n <= 12")
        mat = np.ones((1, 1), dtype=complex)
        for q in range(self.n_qubits):
            idx = ((self.x_mask >> q) & 1) + 2 * ((self.z_mask >> q) & 1)
            mat = np.kron(_DENSE_1Q[_PAULI_CHARS[idx]], mat)
        return self.sign * mat


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Exact product of two phased Pauli strings."""
    a._check_dims(b)
    k = _mul_phase_exp(a.x_mask, a.z_mask, b.x_mask, b.z_mask)
    return PauliString(
        a.n_qubits,
        a.x_mask ^ b.x_mask,
        a.z_mask ^ b.z_mask,
        (a.phase_exp + b.phase_exp + k) % 4,
    )


class PauliSum:
    """Sparse complex-weighted sum of Pauli strings.

    Coefficients are stored against the plain Hermitian Pauli basis
    (phases of any input strings are folded into the coefficients).
    Instances are immutable after construction; arithmetic returns new
    objects with like terms collected and small coefficients pruned at
    ``DROP_TOL`` relative to the largest magnitude.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None,
                 *, _prune: bool = True):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        data = dict(terms) if terms else {}
        if _prune:
            data = _pruned(data)
        self._terms = data

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, {})

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coeff)})

    @classmethod
    def from_pauli(cls, pauli: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(pauli.n_qubits, {(pauli.x_mask, pauli.z_mask): complex(coeff) * pauli.sign})

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[complex, PauliString]]) -> "PauliSum":
        data: dict[tuple[int, int], complex] = {}
        for coeff, pauli in terms:
            if pauli.n_qubits != n_qubits:
                raise ValueError("dimension mismatch in from_terms")
            key = (pauli.x_mask, pauli.z_mask)
            data[key] = data.get(key, 0.0 + 0.0j) + complex(coeff) * pauli.sign
        return cls(n_qubits, data)

    @classmethod
    def from_label_coeffs(cls, pairs: Iterable[tuple[complex, str]]) -> "PauliSum":
        items = [(complex(c), PauliString.from_label(lbl)) for c, lbl in pairs]
        if not items:
            raise ValueError("from_label_coeffs needs at least one term")
        return cls.from_terms(items[0][1].n_qubits, items)

    # -- queries ------------------------------------------------------

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def n_terms(self) -> int:
        return len(self._terms)

    def coefficient(self, pauli: PauliString) -> complex:
        c = self._terms.get((pauli.x_mask, pauli.z_mask), 0.0 + 0.0j)
        # stored against the plain tensor; undo the query string's phase
        return c / pauli.sign

    def items(self) -> Iterator[tuple[tuple[int, int], complex]]:
        return iter(self._terms.items())

    def sorted_terms(self) -> list[tuple[complex, PauliString]]:
        """Deterministically ordered (coeff, plain string) pairs."""
        out = []
        for (x, z) in sorted(self._terms):
            out.append((self._terms[(x, z)], PauliString(self.n_qubits, x, z, 0)))
        return out

    def l1_norm(self) -> float:
        return float(sum(abs(c) for c in self._terms.values()))

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, self.max_abs_coeff())
        return all(abs(c.imag) <= tol * scale for c in self._terms.values())

    def real_coefficients(self, tol: float = 1e-10) -> "PauliSum":
        """Drop imaginary coefficient parts; error if they are not negligible."""
        if not self.is_hermitian(tol):
            raise ValueError("sum has non-negligible imaginary coefficients")
        return PauliSum(self.n_qubits, {k: complex(c.real) for k, c in self._terms.items()})

    # -- arithmetic ----------------------------------------------------

    def _check_dims(self, other: "PauliSum"):
        if self.n_qubits != other.n_qubits:
            raise ValueError(
                f"dimension mismatch: {self.n_qubits} vs {other.n_qubits} qubits"
            )

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check_dims(other)
        data = dict(self._terms)
        for k, c in other._terms.items():
            data[k] = data.get(k, 0.0 + 0.0j) + c
        return PauliSum(self.n_qubits, data)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __neg__(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: -c for k, c in self._terms.items()}, _prune=False)

    def __mul__(self, scalar: complex) -> "PauliSum":
        s = complex(scalar)
        return PauliSum(self.n_qubits, {k: c * s for k, c in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        return sum_mul(self, other)

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()},
                        _prune=False)

    def scaled_add(self, pieces: Iterable[tuple[complex, "PauliSum"]]) -> "PauliSum":
        """self + sum of scalar*sum pieces, collected in one pass."""
        data = dict(self._terms)
        for scalar, other in pieces:
            self._check_dims(other)
            s = complex(scalar)
            for k, c in other._terms.items():
                data[k] = data.get(k, 0.0 + 0.0j) + s * c
        return PauliSum(self.n_qubits, data)

    # -- oracles -------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > 12:
            raise ValueError("dense oracle is limited to n <= 12")
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        for (x, z), c in self._terms.items():
            mat += c * PauliString(self.n_qubits, x, z, 0).to_dense()
        return mat

    def __repr__(self) -> str:
        parts = [f"({c:.6g})*{PauliString(self.n_qubits, x, z, 0).to_label()}"
                 for (x, z), c in self.sorted_items()]
        return "PauliSum[" + " + ".join(parts[:8]) + (" ..." if len(parts) > 8 else "") + "]"

    def sorted_items(self) -> list[tuple[tuple[int, int], complex]]:
        return [(k, self._terms[k]) for k in sorted(self._terms)]

    # -- serialization ---------------------------------------------------

    def serialize(self) -> str:
        """Text form: one `<complex coeff> <label>` line per term.

        Coefficients are written with 17 significant digits, which makes
        the round trip exact for doubles.
        """
        lines = []
        for (x, z), c in self.sorted_items():
            label = PauliString(self.n_qubits, x, z, 0).to_label()
            lines.append(f"{_format_complex(c)} {label}")
        if not lines:
            lines.append(f"{_format_complex(0j)} {'I' * self.n_qubits}")
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str) -> "PauliSum":
        pairs = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                coeff_str, label = line.split()
            except ValueError as exc:
                raise ValueError(f"bad Pauli sum line {raw!r}") from exc
            pairs.append((complex(coeff_str), label))
        if not pairs:
            raise ValueError("empty Pauli sum text")
        return cls.from_label_coeffs(pairs)


def _format_complex(c: complex) -> str:
    return f"{c.real:.17g}{c.imag:+.17g}j"


def _pruned(data: dict[tuple[int, int], complex]) -> dict[tuple[int, int], complex]:
    if not data:
        return {}
    cut = DROP_TOL * max(abs(c) for c in data.values())
    return {k: c for k, c in data.items() if abs(c) > cut}


def sum_mul(a: PauliSum, b: PauliSum) -> PauliSum:
    """Distributive product with like-term collection and pruning."""
    a._check_dims(b)
    out: dict[tuple[int, int], complex] = {}
    for (x1, z1), c1 in a._terms.items():
        for (x2, z2), c2 in b._terms.items():
            k = _mul_phase_exp(x1, z1, x2, z2)
            key = (x1 ^ x2, z1 ^ z2)
            out[key] = out.get(key, 0.0 + 0.0j) + c1 * c2 * _I_POW[k]
    return PauliSum(a.n_qubits, out)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """AB - BA.  Exactly zero when every term pair commutes."""
    a._check_dims(b)
    out: dict[tuple[int, int], complex] = {}
    for (x1, z1), c1 in a._terms.items():
        for (x2, z2), c2 in b._terms.items():
            # skip commuting pairs so their contributions cancel exactly
            if ((x1 & z2).bit_count() + (z1 & x2).bit_count()) % 2 == 0:
                continue
            key = (x1 ^ x2, z1 ^ z2)
            kf = _mul_phase_exp(x1, z1, x2, z2)
            kr = _mul_phase_exp(x2, z2, x1, z1)
            out[key] = out.get(key, 0.0 + 0.0j) + c1 * c2 * (_I_POW[kf] - _I_POW[kr])
    return PauliSum(a.n_qubits, out)


def l1_norm(a: PauliSum) -> float:
    return a.l1_norm()


class HamiltonianPowers:
    """Caches Pauli-collected powers H^k of a Hermitian sum.

    Series evaluation at many different time steps reuses the same
    powers, so solvers that scan over step counts stay cheap.  Powers
    are computed iteratively, each one from the previous, pruning after
    every multiply.
    """

    def __init__(self, hamiltonian: PauliSum, max_order: int, herm_tol: float = 1e-10):
        if max_order < 1:
            raise ValueError("max_order must be >= 1")
        if not hamiltonian.is_hermitian(herm_tol):
            raise ValueError("Hamiltonian must be Hermitian")
        self.hamiltonian = hamiltonian
        self.max_order = max_order
        self._powers: list[PauliSum] = [PauliSum.identity(hamiltonian.n_qubits), hamiltonian]

    def power(self, k: int) -> PauliSum:
        if k < 0 or k > self.max_order:
            raise ValueError(f"power {k} outside cached range [0, {self.max_order}]")
        while len(self._powers) <= k:
            self._powers.append(sum_mul(self._powers[-1], self.hamiltonian))
        return self._powers[k]

    def even_odd(self, t: float, order: int | None = None) -> tuple[PauliSum, PauliSum]:
        """Even/odd Taylor pieces of exp(-iHt) truncated at `order`.

        Returns (even, odd) with
          even = sum_{m>=1, 2m<=order} (-1)^m t^{2m} H^{2m} / (2m)!
          odd  = sum_{m>=0, 2m+1<=order} (-1)^{m+1} t^{2m+1} H^{2m+1} / (2m+1)!
        so that the truncation equals I + even + i*odd.  Both carry real
        coefficients for Hermitian input.
        """
        m_cap = self.max_order if order is None else order
        if order is not None and (order < 1 or order > self.max_order):
            raise ValueError("order outside cached range")
        even_pieces = []
        odd_pieces = []
        for k in range(1, m_cap + 1):
            coeff = (t ** k) / math.factorial(k)
            if k % 2 == 0:
                even_pieces.append((coeff * (-1) ** (k // 2), self.power(k)))
            else:
                odd_pieces.append((coeff * (-1) ** ((k - 1) // 2 + 1), self.power(k)))
        n = self.hamiltonian.n_qubits
        even = PauliSum.zero(n).scaled_add(even_pieces)
        odd = PauliSum.zero(n).scaled_add(odd_pieces)
        return even, odd


def taylor_even_odd(hamiltonian: PauliSum, t: float, order: int) -> tuple[PauliSum, PauliSum]:
    """Even/odd truncated Taylor pieces of exp(-iHt); see HamiltonianPowers."""
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    return HamiltonianPowers(hamiltonian, order).even_odd(t)


def exp_series_tail(x: float, order: int) -> float:
    """sum_{l > order} x^l / l!  for x >= 0, evaluated by direct summation."""
    if x < 0:
        raise ValueError("tail argument must be nonnegative")
    if x == 0.0:
        return 0.0
    if x >= 80.0:
        # far outside any tolerated-error regime; callers only compare
        return math.inf
    term = x ** (order + 1) / math.factorial(order + 1)
    total = 0.0
    l = order + 1
    while term > total * 1e-18 + 1e-300:
        total += term
        l += 1
        term *= x / l
    return total
