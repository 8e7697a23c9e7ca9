"""The local symmetry group G = SO(V_1) x ... x SO(V_n) over C and its subgroups.

Elements are tuples of complex 3x3 orthogonal blocks acting on Pauli
coordinates (x, y, z) of each qubit. The z axis is the standard longitudinal
direction; the transversal plane is (x, y).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .bloch import PAULI, BlochState, apply_per_axis
from .errors import InvalidArgument

ORTHO_TOL = 1e-9

# so(3) basis; L_Z sends e_x to e_y
L_X = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=complex)
L_Y = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=complex)
L_Z = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
LIE_BASIS = (L_X, L_Y, L_Z)

REFLECTION = np.diag([1.0, -1.0]).astype(complex)


def orthogonality_residual(g: np.ndarray) -> float:
    g = np.asarray(g)
    return float(np.max(np.abs(g.T @ g - np.eye(g.shape[0]))))


def _as_blocks(blocks, size: int) -> tuple[np.ndarray, ...]:
    out = []
    for blk in blocks:
        m = np.array(blk, dtype=complex)
        if m.shape != (size, size):
            raise InvalidArgument(f"expected {size}x{size} blocks, got {m.shape}")
        m.setflags(write=False)
        out.append(m)
    if not out:
        raise InvalidArgument("at least one block is required")
    return tuple(out)


@dataclass(frozen=True)
class LocalRotation:
    """An element of G: one complex special-orthogonal 3x3 block per qubit."""

    blocks: tuple

    def __post_init__(self):
        blocks = _as_blocks(self.blocks, 3)
        for i, g in enumerate(blocks):
            if orthogonality_residual(g) > ORTHO_TOL or abs(np.linalg.det(g) - 1) > ORTHO_TOL:
                raise InvalidArgument(f"block {i} is not special orthogonal")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return len(self.blocks)

    @classmethod
    def identity(cls, n: int) -> "LocalRotation":
        return cls([np.eye(3)] * n)

    def __matmul__(self, other: "LocalRotation") -> "LocalRotation":
        if self.n != other.n:
            raise InvalidArgument("size mismatch")
        return LocalRotation([a @ b for a, b in zip(self.blocks, other.blocks)])

    def inverse(self) -> "LocalRotation":
        return LocalRotation([g.T for g in self.blocks])


@dataclass(frozen=True)
class LieTangent:
    """A tangent vector of G at the identity: antisymmetric 3x3 blocks."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", _as_blocks(self.blocks, 3))

    @property
    def n(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_coords(cls, coords) -> "LieTangent":
        """Blocks sum_k coords[3i+k] * (L_X, L_Y, L_Z)[k]; antisymmetric by construction."""
        c = np.asarray(coords, dtype=complex).reshape(-1, 3)
        return cls([np.tensordot(row, np.array(LIE_BASIS), axes=1) for row in c])

    def exp(self) -> LocalRotation:
        return LocalRotation([expm(x) for x in self.blocks])


@dataclass(frozen=True)
class WeylElement:
    """An element of N = prod O(V_i^t): one complex orthogonal 2x2 block per qubit."""

    planar: tuple

    def __post_init__(self):
        object.__setattr__(self, "planar", _as_blocks(self.planar, 2))

    @property
    def n(self) -> int:
        return len(self.planar)


def local_operator(blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
    """4x4 matrices 1 ⊕ g_i acting on a qubit's (I, x, y, z) coefficient axis."""
    out = []
    for g in blocks:
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = 1
        m[1:, 1:] = g
        out.append(m)
    return out


def act_tensor(blocks: Sequence[np.ndarray], tensor: np.ndarray) -> np.ndarray:
    return apply_per_axis(tensor, local_operator(blocks))


def act(g: LocalRotation, b: BlochState) -> BlochState:
    """Transform every correlation tensor by the product of the blocks on its axes."""
    if g.n != b.n:
        raise InvalidArgument(f"rotation has {g.n} qubits, state has {b.n}")
    return BlochState.from_tensor(act_tensor(g.blocks, b.tensor))


def infinitesimal_tensor(blocks: Sequence[np.ndarray], tensor: np.ndarray) -> np.ndarray:
    """Leibniz sum: generator k applied along axis k, summed over k."""
    out = np.zeros(tensor.shape, dtype=complex)
    for k, x in enumerate(blocks):
        op = np.zeros((4, 4), dtype=complex)
        op[1:, 1:] = x
        out += np.moveaxis(np.tensordot(op, tensor, axes=([1], [k])), 0, k)
    return out


def infinitesimal_action(x: LieTangent, b: BlochState) -> np.ndarray:
    """Derivative of act(exp(sX), b) at s = 0, as a dense (4,)*n tensor."""
    if x.n != b.n:
        raise InvalidArgument(f"tangent has {x.n} qubits, state has {b.n}")
    return infinitesimal_tensor(x.blocks, b.tensor)


def from_sl2(mats: Sequence[np.ndarray]) -> LocalRotation:
    """Adjoint image of invertible 2x2 matrices: A -> M A M^-1 in Pauli coordinates."""
    blocks = []
    for m in mats:
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2) or abs(np.linalg.det(m)) <= 1e-12:
            raise InvalidArgument("from_sl2 needs invertible 2x2 matrices")
        minv = np.linalg.inv(m)
        blk = np.empty((3, 3), dtype=complex)
        for col in range(3):
            conj = m @ PAULI[col + 1] @ minv
            for row in range(3):
                blk[row, col] = np.trace(PAULI[row + 1] @ conj) / 2
        blocks.append(blk)
    return LocalRotation(blocks)


def random_rotation(n: int, seed=None, scale: float = 0.7) -> LocalRotation:
    """exp of a random complex antisymmetric matrix per qubit.

    The three independent entries are centred complex normals with E|z|^2 = scale^2.
    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if scale < 0:
        raise InvalidArgument("scale must be non-negative")
    rng = np.random.default_rng(seed)
    coords = (rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))) * (scale / np.sqrt(2))
    return LieTangent.from_coords(coords).exp()


def so2_from_gm(lam: complex) -> np.ndarray:
    lam = complex(lam)
    if lam == 0:
        raise InvalidArgument("lambda must be non-zero")
    a = (lam + 1 / lam) / 2
    b = (lam - 1 / lam) / 2j
    return np.array([[a, b], [-b, a]])


def gm_from_so2(a: np.ndarray) -> complex:
    """Inverse of so2_from_gm: [[a, b], [-b, a]] -> a + ib."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2) or orthogonality_residual(a) > ORTHO_TOL or abs(np.linalg.det(a) - 1) > ORTHO_TOL:
        raise InvalidArgument("not a special orthogonal 2x2 matrix")
    return complex(a[0, 0] + 1j * a[0, 1])


def weyl_embed(w: WeylElement) -> LocalRotation:
    """Block A ⊕ det A per qubit: transversal plane (x, y), longitudinal z."""
    blocks = []
    for a in w.planar:
        if orthogonality_residual(a) > ORTHO_TOL:
            raise InvalidArgument("planar block is not orthogonal")
        g = np.zeros((3, 3), dtype=complex)
        g[:2, :2] = a
        g[2, 2] = np.linalg.det(a)
        blocks.append(g)
    return LocalRotation(blocks)


def weyl_sample(n: int, seed=None, with_reflection: bool = True, scale: float = 0.7) -> WeylElement:
    """Random element of N: so2_from_gm(exp(scale * z)) per qubit, z complex normal.

    With ``with_reflection`` each qubit independently gets a diag(1, -1) factor
    with probability 1/2.
    """
    rng = np.random.default_rng(seed)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    flips = rng.integers(0, 2, size=n)
    planar = []
    for k in range(n):
        a = so2_from_gm(np.exp(scale * z[k] / np.sqrt(2)))
        if with_reflection and flips[k]:
            a = a @ REFLECTION
        planar.append(a)
    return WeylElement(planar)


def central_element(n: int) -> WeylElement:
    """-I on every transversal plane; acts trivially on the fiber X(B)."""
    return WeylElement([-np.eye(2)] * n)


def section_normalizer2() -> list[LocalRotation]:
    """The 32 elements of (K4 x K4) ⋊ S2 embedded in SO3 x SO3.

    Each qubit gets a signed permutation matrix D_i P with the same
    permutation P on both qubits.
    """
    signs = [np.diag([s1, s2]).astype(complex) for s1 in (1, -1) for s2 in (1, -1)]
    perms = [np.eye(2, dtype=complex), np.array([[0, 1], [1, 0]], dtype=complex)]
    out = []
    for p in perms:
        for d1 in signs:
            for d2 in signs:
                out.append(weyl_embed(WeylElement([d1 @ p, d2 @ p])))
    return out
