"""Bloch model of n-qubit L-states.

An L-state is a trace-one operator on (C^2)^{⊗n}. Expanding it in the Pauli
basis gives a tensor of correlation functions indexed by Pauli words. We store
the coefficients WITHOUT the 2^-n factor, so single-qubit components are the
usual Bloch-vector entries and the analytic scalar product ½tr(AB) becomes the
plain (unconjugated) dot product in Pauli coordinates.

Qubit 1 is the leftmost Kronecker factor and the most significant digit of a
word's index; letters I, X, Y, Z are digits 0..3.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidArgument, MalformedState

LETTERS = "IXYZ"

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

TRACE_TOL = 1e-9

# per-qubit change of basis between vec(E) (index 2*row+col) and Pauli coords
# extraction: c_a = tr(E P_a) = sum_{r,s} E[r,s] P_a[s,r]
_EXTRACT = np.array([[PAULI[a][s, r] for r in range(2) for s in range(2)] for a in range(4)])
# reconstruction: E[r,s] = ½ sum_a c_a P_a[r,s]
_RECONSTRUCT = np.array([[PAULI[a][r, s] / 2 for a in range(4)] for r in range(2) for s in range(2)])


def validate_word(word: str, n: int | None = None) -> str:
    if not isinstance(word, str) or not word:
        raise InvalidArgument("Pauli word must be a non-empty string")
    word = word.upper()
    if any(ch not in LETTERS for ch in word):
        raise InvalidArgument(f"invalid Pauli word {word!r}")
    if n is not None and len(word) != n:
        raise InvalidArgument(f"word {word!r} has length {len(word)}, expected {n}")
    return word


def word_index(word: str) -> tuple[int, ...]:
    return tuple(LETTERS.index(ch) for ch in word)


def index_word(index: Iterable[int]) -> str:
    return "".join(LETTERS[i] for i in index)


def all_words(n: int, include_identity: bool = False) -> list[str]:
    words = ["".join(w) for w in itertools.product(LETTERS, repeat=n)]
    return words if include_identity else words[1:]


def support(word: str) -> tuple[int, ...]:
    """1-based positions of the non-identity letters."""
    return tuple(i + 1 for i, ch in enumerate(word) if ch != "I")


def apply_per_axis(tensor: np.ndarray, mats) -> np.ndarray:
    """Apply ``mats[k]`` (or one shared matrix) along axis k of ``tensor``."""
    out = tensor
    for k in range(tensor.ndim):
        m = mats if isinstance(mats, np.ndarray) and mats.ndim == 2 else mats[k]
        out = np.moveaxis(np.tensordot(m, out, axes=([1], [k])), 0, k)
    return out


def pauli_string(word: str) -> np.ndarray:
    """Kronecker product of the single-qubit Pauli matrices spelled by ``word``."""
    word = validate_word(word)
    out = np.ones((1, 1), dtype=complex)
    for ch in word:
        out = np.kron(out, PAULI[LETTERS.index(ch)])
    return out


@dataclass(frozen=True)
class BlochState:
    """Sparse Bloch model of an L-state.

    ``components`` maps Pauli words (all-I excluded) to complex coefficients;
    absent words are zero and the identity component is implicitly 1.
    """

    n: int
    components: Mapping[str, complex] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidArgument("n must be a positive integer")
        clean = {}
        for word, value in self.components.items():
            word = validate_word(word, self.n)
            if word == "I" * self.n:
                raise InvalidArgument("the identity component is fixed to 1")
            value = complex(value)
            if not np.isfinite(value):
                raise MalformedState(f"non-finite coefficient for {word}")
            if value != 0:
                clean[word] = value
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "components", MappingProxyType(dict(sorted(clean.items()))))

    def __getitem__(self, word: str) -> complex:
        return self.components.get(validate_word(word, self.n), 0j)

    @cached_property
    def tensor(self) -> np.ndarray:
        """Dense coefficient tensor of shape (4,)*n with the identity entry set to 1."""
        t = np.zeros((4,) * self.n, dtype=complex)
        t[(0,) * self.n] = 1.0
        for word, value in self.components.items():
            t[word_index(word)] = value
        t.setflags(write=False)
        return t

    @classmethod
    def from_tensor(cls, tensor: np.ndarray, tol: float = 0.0) -> "BlochState":
        """Build a state from a dense (4,)*n tensor; the identity entry is ignored."""
        tensor = np.asarray(tensor, dtype=complex)
        n = tensor.ndim
        comps = {}
        for idx in zip(*np.nonzero(np.abs(tensor) > tol)):
            if any(idx):
                comps[index_word(idx)] = tensor[idx]
        return cls(n, comps)

    def vector(self) -> np.ndarray:
        """Flat vector of the 4^n - 1 non-identity coefficients in word order."""
        return self.tensor.reshape(-1)[1:].copy()

    @classmethod
    def from_vector(cls, n: int, vec) -> "BlochState":
        t = np.concatenate([[1.0], np.asarray(vec, dtype=complex)])
        return cls.from_tensor(t.reshape((4,) * n))

    def allclose(self, other: "BlochState", atol: float = 1e-12) -> bool:
        return self.n == other.n and np.max(np.abs(self.tensor - other.tensor)) <= atol


@dataclass(frozen=True)
class DensityMatrix:
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2**self.n, 2**self.n):
            raise InvalidArgument(f"expected a {2**self.n}x{2**self.n} matrix, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise MalformedState("matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def density_matrix(matrix) -> DensityMatrix:
    """Wrap a square 2^n x 2^n array, inferring n."""
    m = np.asarray(matrix, dtype=complex)
    n = int(round(np.log2(m.shape[0]))) if m.ndim == 2 and m.shape[0] > 0 else 0
    if n < 1 or m.shape != (2**n, 2**n):
        raise InvalidArgument(f"not a 2^n x 2^n matrix: shape {m.shape}")
    return DensityMatrix(n, m)


def to_bloch(d: DensityMatrix, trace_tol: float = TRACE_TOL) -> BlochState:
    """Pauli coefficients tr(d P_w) of a trace-one operator."""
    if abs(d.trace - 1) > trace_tol:
        raise MalformedState(f"trace is {d.trace}, expected 1")
    n = d.n
    # rows i1..in, cols j1..jn -> (i1 j1, i2 j2, ...) pairs
    t = d.matrix.reshape((2,) * (2 * n))
    t = t.transpose([p for k in range(n) for p in (k, n + k)]).reshape((4,) * n)
    return BlochState.from_tensor(apply_per_axis(t, _EXTRACT))


def from_bloch(b: BlochState) -> DensityMatrix:
    """Reassemble 2^-n (I + sum_w c_w P_w)."""
    n = b.n
    t = apply_per_axis(b.tensor, _RECONSTRUCT).reshape((2, 2) * n)
    t = t.transpose([2 * k for k in range(n)] + [2 * k + 1 for k in range(n)])
    return DensityMatrix(n, t.reshape(2**n, 2**n))


def scalar_product(u, v) -> complex:
    """Complex bilinear form u·v (no conjugation); equals ½tr(AB) in Pauli coordinates."""
    return complex(np.dot(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)))


def scalar_product_matrix(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.trace(np.asarray(a) @ np.asarray(b)) / 2)


def bracket(a, b) -> np.ndarray:
    """Pauli coordinates of [a·σ, b·σ], i.e. 2i (a × b)."""
    return 2j * np.cross(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def triple_product(a, b, c) -> complex:
    return scalar_product(bracket(a, b), c)


def to_pauli_coords(m: np.ndarray) -> np.ndarray:
    """Pauli coordinates of a traceless 2x2 matrix."""
    m = np.asarray(m, dtype=complex)
    return np.array([np.trace(m @ PAULI[a]) / 2 for a in (1, 2, 3)])


def from_pauli_coords(v) -> np.ndarray:
    return np.tensordot(np.asarray(v, dtype=complex), PAULI[1:], axes=1)


def correlation(b: BlochState, qubits: Iterable[int]) -> np.ndarray:
    """I-correlation function: coefficients of words supported exactly on ``qubits``.

    ``qubits`` are 1-based. Returns a (3,)*|I| tensor with axes in increasing
    qubit order and (x, y, z) along each axis.
    """
    qubits = sorted(set(qubits))
    if not qubits:
        raise InvalidArgument("correlation needs a non-empty qubit subset")
    if qubits[0] < 1 or qubits[-1] > b.n:
        raise InvalidArgument(f"qubit subset {qubits} out of range for n={b.n}")
    index = tuple(slice(1, 4) if k + 1 in qubits else 0 for k in range(b.n))
    return np.array(b.tensor[index])
