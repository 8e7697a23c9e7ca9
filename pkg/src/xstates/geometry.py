"""Geometry of X-states: parity patterns, the fiber X(B), sampling, dimensions,
the star-tree truncation X_T(B), and the 2-qubit section with its normal form.

All fibers live over the standard longitudinal system (z axis on every qubit)
and are moved around by the group.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from math import factorial
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .bloch import BlochState, DensityMatrix, all_words, correlation, scalar_product, validate_word
from .errors import DegenerateSample, InvalidArgument, NotGeneric, ReductionFailed, XStateError
from .group import LieTangent, LocalRotation, act, act_tensor, random_rotation, section_normalizer2

ONE_POINT_TOL = 1e-8


# ---------------------------------------------------------------------------
# parity structure


def parity(index: int) -> int:
    return bin(index).count("1") % 2


def is_x_pattern(d: DensityMatrix, tol: float = 1e-12) -> bool:
    """True iff d maps even-parity kets to even ones and odd to odd (up to tol)."""
    dim = 2**d.n
    par = np.array([parity(i) for i in range(dim)])
    mask = par[:, None] != par[None, :]
    return bool(np.all(np.abs(d.matrix[mask]) <= tol))


def random_x_matrix(n: int, rng) -> DensityMatrix:
    """Random complex trace-one matrix with the X (parity-preserving) pattern."""
    dim = 2**n
    par = np.array([parity(i) for i in range(dim)])
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m[par[:, None] != par[None, :]] = 0
    m = m / np.trace(m)
    return DensityMatrix(n, m)


def is_admissible(word: str) -> bool:
    """Even number of transversal letters and not the identity word."""
    transversal = sum(ch in "XY" for ch in word)
    return transversal % 2 == 0 and any(ch != "I" for ch in word)


def admissible_words(n: int) -> list[str]:
    return [w for w in all_words(n) if is_admissible(w)]


@dataclass(frozen=True)
class LongitudinalSystem:
    """One non-degenerate axis per qubit, normalised so that <z, z> = 1."""

    axes: tuple

    def __post_init__(self):
        axes = []
        for z in self.axes:
            z = np.array(z, dtype=complex)
            if z.shape != (3,) or abs(scalar_product(z, z) - 1) > 1e-9:
                raise InvalidArgument("longitudinal axes must satisfy <z, z> = 1")
            z.setflags(write=False)
            axes.append(z)
        object.__setattr__(self, "axes", tuple(axes))

    @classmethod
    def standard(cls, n: int) -> "LongitudinalSystem":
        return cls([np.array([0, 0, 1])] * n)

    @classmethod
    def moved_by(cls, g: LocalRotation) -> "LongitudinalSystem":
        """The system g·B_std: the images of the z axes."""
        return cls([blk[:, 2] for blk in g.blocks])

    def same_lines(self, other: "LongitudinalSystem", tol: float = 1e-9) -> bool:
        """Axes agree as points of projective space (up to sign after normalisation)."""
        return all(
            np.linalg.norm(np.cross(a, b)) <= tol * (1 + np.linalg.norm(a) * np.linalg.norm(b))
            for a, b in zip(self.axes, other.axes)
        )


@dataclass(frozen=True)
class XFiberPoint:
    """A point of X(B) over the standard system, stored as admissible-word coefficients."""

    n: int
    coefficients: Mapping[str, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for word, value in self.coefficients.items():
            word = validate_word(word, self.n)
            if not is_admissible(word):
                raise InvalidArgument(f"word {word} is not in the fiber X(B)")
            if value != 0:
                clean[word] = complex(value)
        object.__setattr__(self, "coefficients", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def from_vector(cls, n: int, vec) -> "XFiberPoint":
        return cls(n, dict(zip(admissible_words(n), np.asarray(vec, dtype=complex))))

    def vector(self) -> np.ndarray:
        return np.array([self.coefficients.get(w, 0j) for w in admissible_words(self.n)])


def fiber_embed(p: XFiberPoint) -> BlochState:
    return BlochState(p.n, dict(p.coefficients))


def fiber_project(b: BlochState, tol: float = 1e-12) -> XFiberPoint:
    """Inverse of fiber_embed; fails if b has support outside the admissible words."""
    bad = [w for w, c in b.components.items() if not is_admissible(w) and abs(c) > tol]
    if bad:
        raise InvalidArgument(f"state has inadmissible components, e.g. {bad[0]}")
    return XFiberPoint(b.n, {w: c for w, c in b.components.items() if is_admissible(w)})


def fiber_tensor(n: int, vec) -> np.ndarray:
    """Dense (4,)*n Bloch tensor of the fiber point with admissible coordinates ``vec``."""
    t = np.zeros(4**n, dtype=complex)
    t[0] = 1
    t[_admissible_flat(n)] = vec
    return t.reshape((4,) * n)


_ADMISSIBLE_CACHE: dict[int, np.ndarray] = {}


def _admissible_flat(n: int) -> np.ndarray:
    if n not in _ADMISSIBLE_CACHE:
        words = all_words(n, include_identity=True)
        _ADMISSIBLE_CACHE[n] = np.array([i for i, w in enumerate(words) if is_admissible(w)])
    return _ADMISSIBLE_CACHE[n]


def random_fiber_point(n: int, rng) -> XFiberPoint:
    k = len(_admissible_flat(n))
    vec = (rng.normal(size=k) + 1j * rng.normal(size=k)) / np.sqrt(2)
    return XFiberPoint.from_vector(n, vec)


def one_point_norms(b: BlochState) -> list[complex]:
    return [scalar_product(v, v) for v in (correlation(b, [i]) for i in range(1, b.n + 1))]


def random_xstate(n: int, seed=None, scale: float = 0.7):
    """Random X-state in the open stratum, with its witness (g, p): state = g·p.

    Resamples (at most 16 draws) until every one-point correlation is non-degenerate.
    """
    if n < 1:
        raise InvalidArgument("n must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(16):
        p = random_fiber_point(n, rng)
        g = random_rotation(n, rng, scale)
        state = act(g, fiber_embed(p))
        if all(abs(q) > ONE_POINT_TOL for q in one_point_norms(state)):
            return state, (g, p)
    raise DegenerateSample("could not draw a state with non-degenerate one-point functions")


def random_lstate(n: int, seed=None) -> BlochState:
    """Random generic (not X) L-state: every Pauli coefficient complex normal."""
    rng = np.random.default_rng(seed)
    k = 4**n - 1
    return BlochState.from_vector(n, (rng.normal(size=k) + 1j * rng.normal(size=k)) / np.sqrt(2))


def parametrize(n: int, lie_coords, fiber_coords) -> np.ndarray:
    """(X, p) -> act(exp(X), fiber_embed(p)) as a flat vector of 4^n - 1 coefficients."""
    g = LieTangent.from_coords(lie_coords).exp()
    return act_tensor(g.blocks, fiber_tensor(n, fiber_coords)).reshape(-1)[1:]


# ---------------------------------------------------------------------------
# dimensions


@dataclass(frozen=True)
class Dimensions:
    dim_fiber: int
    dim_variety: int
    trdeg: int
    dim_xT: int
    dim_F: int


def fiber_dimension_sum(n: int) -> int:
    """Count of basic tensors: sum of multinomial(n; s, t, n-s-t) 2^t, 1 <= s+t <= n, t even."""
    total = 0
    for s in range(n + 1):
        for t in range(0, n - s + 1, 2):
            if s + t >= 1:
                total += factorial(n) // (factorial(s) * factorial(t) * factorial(n - s - t)) * 2**t
    return total


def dim_formulas(n: int) -> Dimensions:
    if n < 2:
        raise InvalidArgument("dimension formulas need n >= 2")
    dim_fiber = 2 ** (2 * n - 1) - 1
    if fiber_dimension_sum(n) != dim_fiber:
        raise XStateError("internal-error: multinomial count disagrees with closed form")
    return Dimensions(
        dim_fiber=dim_fiber,
        dim_variety=2 ** (2 * n - 1) + 2 * n - 1,
        trdeg=2 ** (2 * n - 1) - n - 1,
        dim_xT=5 * n - 4,
        dim_F=2 ** (2 * n - 1) - 5 * n + 3,
    )


# ---------------------------------------------------------------------------
# star-tree truncation X_T(B), centre qubit n


@dataclass(frozen=True)
class XTPoint:
    """Longitudinal coordinates alpha_i and transversal 2x2 blocks C_j of edges j-n."""

    alphas: tuple
    blocks: tuple

    def __post_init__(self):
        alphas = tuple(complex(a) for a in self.alphas)
        blocks = []
        for c in self.blocks:
            c = np.array(c, dtype=complex)
            if c.shape != (2, 2):
                raise InvalidArgument("edge blocks must be 2x2")
            c.setflags(write=False)
            blocks.append(c)
        if len(alphas) < 2 or len(blocks) != len(alphas) - 1:
            raise InvalidArgument("XTPoint needs n >= 2 alphas and n - 1 blocks")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def n(self) -> int:
        return len(self.alphas)

    def vector(self) -> np.ndarray:
        return np.concatenate([np.array(self.alphas)] + [c.reshape(-1) for c in self.blocks])

    @classmethod
    def from_vector(cls, n: int, vec) -> "XTPoint":
        vec = np.asarray(vec, dtype=complex)
        return cls(vec[:n], vec[n:].reshape(n - 1, 2, 2))


def _edge_word(n: int, j: int, a: int, b: int) -> str:
    letters = ["I"] * n
    letters[j] = "XY"[a]
    letters[n - 1] = "XY"[b]
    return "".join(letters)


def _z_word(n: int, i: int) -> str:
    return "I" * i + "Z" + "I" * (n - i - 1)


def truncate_to_xT(p: XFiberPoint) -> XTPoint:
    """Project the fiber onto the longitudinal lines and the star-tree edge planes."""
    n = p.n
    if n < 2:
        raise InvalidArgument("truncation needs n >= 2")
    c = p.coefficients
    alphas = [c.get(_z_word(n, i), 0j) for i in range(n)]
    blocks = [
        [[c.get(_edge_word(n, j, a, b), 0j) for b in range(2)] for a in range(2)] for j in range(n - 1)
    ]
    return XTPoint(alphas, blocks)


def lift_xT(q: XTPoint) -> XFiberPoint:
    """The fiber point with exactly the X_T coordinates of ``q`` (zero elsewhere)."""
    n = q.n
    coeffs = {_z_word(n, i): a for i, a in enumerate(q.alphas)}
    for j, blk in enumerate(q.blocks):
        for a in range(2):
            for b in range(2):
                coeffs[_edge_word(n, j, a, b)] = blk[a, b]
    return XFiberPoint(n, coeffs)


def random_xt_point(n: int, rng) -> XTPoint:
    k = 5 * n - 4
    return XTPoint.from_vector(n, (rng.normal(size=k) + 1j * rng.normal(size=k)) / np.sqrt(2))


# ---------------------------------------------------------------------------
# the 2-qubit section S = {(x, y, lambda)}


@dataclass(frozen=True)
class SectionPoint2:
    x: complex
    y: complex
    lam: tuple

    def __post_init__(self):
        lam = tuple(complex(v) for v in self.lam)
        if len(lam) != 3:
            raise InvalidArgument("lambda must have three entries")
        object.__setattr__(self, "x", complex(self.x))
        object.__setattr__(self, "y", complex(self.y))
        object.__setattr__(self, "lam", lam)

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, *self.lam])

    @classmethod
    def from_vector(cls, vec) -> "SectionPoint2":
        v = np.asarray(vec, dtype=complex)
        return cls(v[0], v[1], v[2:5])


def section_embed2(s: SectionPoint2) -> BlochState:
    """v = (0, 0, x), w = (0, 0, y), two-point matrix diag(lambda)."""
    return BlochState(
        2, {"ZI": s.x, "IZ": s.y, "XX": s.lam[0], "YY": s.lam[1], "ZZ": s.lam[2]}
    )


def section_coords2(b: BlochState) -> SectionPoint2:
    return SectionPoint2(b["ZI"], b["IZ"], (b["XX"], b["YY"], b["ZZ"]))


def two_qubit_parts(b: BlochState):
    """(v, w, C) with C[a, c] the coefficient of letter a on qubit 1, c on qubit 2."""
    if b.n != 2:
        raise InvalidArgument("expected a 2-qubit state")
    return correlation(b, [1]), correlation(b, [2]), correlation(b, [1, 2])


def weyl_orbit_section2(s: SectionPoint2, tol: float = 1e-12) -> list[SectionPoint2]:
    """Distinct images of s under the 32 embedded normalizer elements."""
    base = section_embed2(s)
    out: list[SectionPoint2] = []
    for g in section_normalizer2():
        img = section_coords2(act(g, base))
        if not any(np.max(np.abs(img.vector() - o.vector())) <= tol for o in out):
            out.append(img)
    return out


def in_section_orbit(s: SectionPoint2, other: SectionPoint2, tol: float = 1e-8) -> bool:
    scale = 1 + np.max(np.abs(s.vector()))
    return any(np.max(np.abs(o.vector() - other.vector())) <= tol * scale for o in weyl_orbit_section2(s))


def cubic_roots(a: complex, b: complex, c: complex) -> np.ndarray:
    """Roots of x^3 + a x^2 + b x + c by Cardano, each polished by one Newton step."""
    p = b - a * a / 3
    q = 2 * a**3 / 27 - a * b / 3 + c
    disc = cmath.sqrt(q * q / 4 + p**3 / 27)
    u3 = -q / 2 + disc if abs(-q / 2 + disc) >= abs(-q / 2 - disc) else -q / 2 - disc
    roots = []
    if u3 == 0:
        roots = [0j, 0j, 0j]
    else:
        u = u3 ** (1 / 3)
        for k in range(3):
            uk = u * cmath.exp(2j * cmath.pi * k / 3)
            roots.append(uk - p / (3 * uk))
    out = []
    for y in roots:
        x = y - a / 3
        f = ((x + a) * x + b) * x + c
        df = (3 * x + 2 * a) * x + b
        if df != 0:
            x = x - f / df
        out.append(x)
    return np.array(out)


def eig_symmetric3(s: np.ndarray):
    """Eigenvalues and bilinearly normalised eigenvectors (rows) of a complex symmetric 3x3.

    Returns (mu, vecs, isotropy) where isotropy[i] = |e_i^T e_i| / ||e_i||^2
    before normalisation; a tiny value means the eigenvector is isotropic.
    """
    s = np.asarray(s, dtype=complex)
    c2 = (s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0] + s[0, 0] * s[2, 2] - s[0, 2] * s[2, 0]
          + s[1, 1] * s[2, 2] - s[1, 2] * s[2, 1])
    mu = cubic_roots(-np.trace(s), c2, -np.linalg.det(s))
    vecs, iso = [], []
    for m in mu:
        r = s - m * np.eye(3)
        cands = [np.cross(r[i], r[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        e = max(cands, key=np.linalg.norm)
        e = e / np.linalg.norm(e)
        self_prod = np.dot(e, e)
        iso.append(abs(self_prod))
        vecs.append(e / cmath.sqrt(self_prod) if self_prod != 0 else e)
    return mu, np.array(vecs), np.array(iso)


def genericity2(b: BlochState) -> dict[str, float]:
    """Degree-one normalised factors of <v,v><w,w> det(C^T C) disc(C^T C).

    <v,v> and <w,w> are divided by the squared largest component; the
    eigenvalues mu_i of C^T C (for det) and their gaps (for the discriminant)
    by max |mu_i|. Each factor must clear the tolerance separately.
    """
    v, w, c = two_qubit_parts(b)
    m = max(1e-300, max(abs(x) for x in b.tensor.reshape(-1)[1:]))
    mu = np.linalg.eigvals(c.T @ c)
    top = max(1e-300, float(np.max(np.abs(mu))))
    return {
        "vv": abs(scalar_product(v, v)) / m**2,
        "ww": abs(scalar_product(w, w)) / m**2,
        "det": float(np.min(np.abs(mu))) / top,
        "disc": min(abs(mu[i] - mu[j]) for i, j in ((0, 1), (0, 2), (1, 2))) / top,
    }


def reduce_to_section2(b: BlochState, tol: float = 1e-8):
    """Find g in G and s in S with act(g, b) = section_embed2(s).

    g1 diagonalises C C^T with v along the third axis; g2 is then forced by
    g1 C g2^T = diag(lambda). Raises NotGeneric off the general-position locus
    and ReductionFailed if the result does not reproduce the state.
    """
    gen = genericity2(b)
    low = [k for k, val in gen.items() if val < tol]
    if low:
        raise NotGeneric(f"genericity factors below tolerance: {', '.join(low)}")
    v, w, c = two_qubit_parts(b)
    mu, e, iso = eig_symmetric3(c @ c.T)
    if np.min(iso) < tol:
        raise NotGeneric("isotropic eigenvector")
    k = int(np.argmax(np.abs(e @ v)))
    rest = sorted((i for i in range(3) if i != k), key=lambda i: (mu[i].real, mu[i].imag))
    g1 = e[[*rest, k]]
    if np.linalg.det(g1).real < 0:
        g1[0] = -g1[0]
    lam = np.array([cmath.sqrt(mu[i]) for i in (*rest, k)])
    g2 = (g1 @ c) / lam[:, None]
    if np.linalg.det(g2).real < 0:
        g2[0] = -g2[0]
        lam[0] = -lam[0]
    try:
        g = LocalRotation([g1, g2])
    except InvalidArgument as exc:
        raise ReductionFailed(f"reduction-failed: {exc}") from exc
    moved = act(g, b)
    s = SectionPoint2((g1 @ v)[2], (g2 @ w)[2], lam)
    scale = max(1.0, float(np.max(np.abs(moved.tensor))))
    resid = float(np.max(np.abs(moved.tensor - section_embed2(s).tensor))) / scale
    if resid > 1e-8:
        raise ReductionFailed(f"reduction-failed: residual {resid:.3e}")
    return g, s


def xt_from_tensor(t: np.ndarray) -> XTPoint:
    """Truncation read directly off a dense Bloch tensor of the standard fiber."""
    n = t.ndim
    alphas = []
    for i in range(n):
        idx = [0] * n
        idx[i] = 3
        alphas.append(t[tuple(idx)])
    blocks = []
    for j in range(n - 1):
        idx = [0] * n
        idx[j] = slice(1, 3)
        idx[n - 1] = slice(1, 3)
        blocks.append(t[tuple(idx)])
    return XTPoint(alphas, blocks)
