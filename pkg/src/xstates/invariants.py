"""Invariant-function chains.

* ``aux_dtab``: the SO2-invariants (delta, t, a, b) of a 2x2 matrix under left
  multiplication, with delta^2 = t^2 - a^2 - b^2.
* ``wpm`` / ``u_matrix``: the light-cone components of (a, b) and the
  signature-zero monomials u_jk = 4 w_j^+ w_k^-.
* ``quotient_coords``: 4n - 4 coordinates on the star-tree truncation X_T that
  are invariant under the whole normaliser N (rotations and reflections).
* ``p_invariants``: the five polynomial G-invariants of 2-qubit states.

Qubit indices in public signatures are 1-based; qubit n is the star centre.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import BlochState, scalar_product
from .errors import Degenerate, InvalidArgument, LocalizationViolated, NotSameOrbit
from .geometry import XTPoint, two_qubit_parts
from .group import orthogonality_residual

LOCALIZATION_TOL = 1e-12


def normalized_residual(lhs, rhs) -> float:
    """|lhs - rhs| / (1 + max |term|), the scale-free 'vanishes' test."""
    lhs, rhs = complex(lhs), complex(rhs)
    return abs(lhs - rhs) / (1 + max(abs(lhs), abs(rhs)))


@dataclass(frozen=True)
class AuxInvariants:
    delta: complex
    t: complex
    a: complex
    b: complex

    def relation(self) -> float:
        """Normalised residual of delta^2 = t^2 - a^2 - b^2."""
        return normalized_residual(self.delta**2, self.t**2 - self.a**2 - self.b**2)

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.delta, self.t, self.a, self.b)


def aux_dtab(m) -> AuxInvariants:
    """delta = det M, t = ½ tr(M^T M), and M^T M - t I = [[a, b], [b, -a]]."""
    m = np.asarray(m, dtype=complex)
    mtm = m.T @ m
    t = np.trace(mtm) / 2
    return AuxInvariants(
        delta=complex(np.linalg.det(m)),
        t=complex(t),
        a=complex(mtm[0, 0] - t),
        b=complex(mtm[0, 1]),
    )


def torsor_recover(m, m_prime, tol: float = 1e-9) -> np.ndarray:
    """The unique g in SO2(C) with g M = M', given matching (delta, t, a, b)."""
    m = np.asarray(m, dtype=complex)
    m_prime = np.asarray(m_prime, dtype=complex)
    x, y = aux_dtab(m), aux_dtab(m_prime)
    if abs(x.delta) <= tol:
        raise Degenerate("det M vanishes; the orbit map is not a torsor there")
    scale = 1 + max(abs(v) for v in x.as_tuple())
    if max(abs(p - q) for p, q in zip(x.as_tuple(), y.as_tuple())) > tol * scale:
        raise NotSameOrbit("invariants (delta, t, a, b) differ")
    g = m_prime @ np.linalg.inv(m)
    if orthogonality_residual(g) > 1e-8 or abs(np.linalg.det(g) - 1) > 1e-8:
        raise NotSameOrbit("M' M^-1 is not special orthogonal")
    return g


def wpm(a: complex, b: complex) -> tuple[complex, complex]:
    """Components of (a, b) in the basis e_± = e_1 ± i e_2: returns (w^-, w^+)."""
    return (a + 1j * b) / 2, (a - 1j * b) / 2


def u_matrix(aux) -> np.ndarray:
    """u[j, k] = 4 w_j^+ w_k^- over the star-tree edges."""
    w = [wpm(x.a, x.b) for x in aux]
    minus = np.array([m for m, _ in w])
    plus = np.array([p for _, p in w])
    return 4 * np.outer(plus, minus)


def edge_aux(p: XTPoint) -> list[AuxInvariants]:
    return [aux_dtab(c) for c in p.blocks]


def wprime_coords(p: XTPoint) -> np.ndarray:
    """(t_1..t_{n-1}, delta_1..delta_{n-1}, u~_2..u~_{n-1}) with u~_j = u_1j / (delta_1^2 - t_1^2).

    These are the invariants of the connected group W' on the edge blocks.
    """
    aux = edge_aux(p)
    u = u_matrix(aux)
    d1 = aux[0].delta**2 - aux[0].t ** 2
    utilde = [u[0, j] / d1 for j in range(1, len(aux))]
    return np.array([x.t for x in aux] + [x.delta for x in aux] + utilde)


@dataclass(frozen=True)
class QuotientCoords:
    t_tilde: tuple
    delta_tilde: tuple
    s_tilde: tuple
    v_tilde: tuple
    eta_1: complex
    eta_n: complex

    @property
    def n(self) -> int:
        return len(self.t_tilde) + 1

    def vector(self) -> np.ndarray:
        return np.array(
            [*self.t_tilde, *self.delta_tilde, *self.s_tilde, *self.v_tilde, self.eta_1, self.eta_n]
        )

    def as_dict(self) -> dict:
        return {
            "t_tilde": list(self.t_tilde),
            "delta_tilde": list(self.delta_tilde),
            "s_tilde": list(self.s_tilde),
            "v_tilde": list(self.v_tilde),
            "eta_1": self.eta_1,
            "eta_n": self.eta_n,
        }


def sv_coords(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """s_j = ½(u_1j + u_j1), v_j = (u_1j - u_j1) / 2i for edges j = 2..n-1."""
    s = (u[0, 1:] + u[1:, 0]) / 2
    v = (u[0, 1:] - u[1:, 0]) / 2j
    return s, v


def quotient_coords(p: XTPoint) -> QuotientCoords:
    """The 4n - 4 N-invariant coordinates of a star-tree point.

    delta~_k carries alpha_k alpha_n: a reflection of qubit k flips alpha_k and
    det C_k, a reflection of the centre flips alpha_n and every det C_k.
    """
    aux = edge_aux(p)
    s, v = sv_coords(u_matrix(aux))
    alpha = np.array(p.alphas)
    a_n = alpha[-1]
    return QuotientCoords(
        t_tilde=tuple(x.t for x in aux),
        delta_tilde=tuple(alpha[k] * a_n * x.delta for k, x in enumerate(aux)),
        s_tilde=tuple(complex(z) for z in s),
        v_tilde=tuple(complex(a_n * z) for z in v),
        eta_1=complex(alpha[0] ** 2),
        eta_n=complex(a_n**2),
    )


def relation_rho(p: XTPoint, j: int) -> complex:
    """rho_j = s_j^2 + v_j^2 - (t_j^2 - delta_j^2)(t_1^2 - delta_1^2), 2 <= j <= n-1."""
    if not 2 <= j <= p.n - 1:
        raise InvalidArgument(f"rho_j needs 2 <= j <= {p.n - 1}, got {j}")
    aux = edge_aux(p)
    s, v = sv_coords(u_matrix(aux))
    x1, xj = aux[0], aux[j - 1]
    return complex(s[j - 2] ** 2 + v[j - 2] ** 2 - (xj.t**2 - xj.delta**2) * (x1.t**2 - x1.delta**2))


def rho_residual(p: XTPoint, j: int) -> float:
    aux = edge_aux(p)
    s, v = sv_coords(u_matrix(aux))
    x1, xj = aux[0], aux[j - 1]
    return normalized_residual(
        s[j - 2] ** 2 + v[j - 2] ** 2, (xj.t**2 - xj.delta**2) * (x1.t**2 - x1.delta**2)
    )


def eta_denominator(q: QuotientCoords, j: int) -> complex:
    k = q.t_tilde[0] ** 2 * q.eta_1 * q.eta_n - q.delta_tilde[0] ** 2
    sj, vj = q.s_tilde[j - 2], q.v_tilde[j - 2]
    return q.eta_n * (q.t_tilde[j - 1] ** 2 * k - q.eta_1 * (sj**2 * q.eta_n + vj**2))


def eta_reconstruct(q: QuotientCoords, j: int) -> complex:
    """Recover eta_j = alpha_j^2 (2 <= j <= n-1) from the quotient coordinates.

    eta_j = d~_j^2 K / (eta_n [t~_j^2 K - eta_1 (s~_j^2 eta_n + v~_j^2)]),
    K = t~_1^2 eta_1 eta_n - d~_1^2; this is rho_j = 0 solved for eta_j.
    """
    if not 2 <= j <= q.n - 1:
        raise InvalidArgument(f"eta_j is reconstructed only for 2 <= j <= {q.n - 1}")
    den = eta_denominator(q, j)
    if abs(den) <= LOCALIZATION_TOL:
        raise LocalizationViolated(f"denominator {abs(den):.3e} below {LOCALIZATION_TOL}")
    k = q.t_tilde[0] ** 2 * q.eta_1 * q.eta_n - q.delta_tilde[0] ** 2
    return complex(q.delta_tilde[j - 1] ** 2 * k / den)


def diagonal_residuals(p: XTPoint) -> list[float]:
    aux = edge_aux(p)
    u = u_matrix(aux)
    return [normalized_residual(u[k, k], x.t**2 - x.delta**2) for k, x in enumerate(aux)]


def loop_residual(p: XTPoint, vertices) -> float:
    """Residual of u_gamma = prod (t_j^2 - delta_j^2) for the loop through ``vertices`` (1-based)."""
    aux = edge_aux(p)
    u = u_matrix(aux)
    idx = [v - 1 for v in vertices]
    lhs = np.prod([u[idx[i], idx[(i + 1) % len(idx)]] for i in range(len(idx))])
    rhs = np.prod([aux[i].t ** 2 - aux[i].delta ** 2 for i in idx])
    return normalized_residual(lhs, rhs)


@dataclass(frozen=True)
class Invariants2:
    p1: complex
    p2: complex
    p3: complex
    p4: complex
    p5: complex

    def vector(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3, self.p4, self.p5])


def p_invariants(b: BlochState) -> Invariants2:
    """(<v,v>, <w,w>, <Cv, w>, tr(C^T C), det C) for a 2-qubit state.

    C is read as the map V_1 -> V_2, so <Cv, w> = v^T C w with C indexed
    (qubit-1 letter, qubit-2 letter).
    """
    if b.n != 2:
        raise InvalidArgument("p invariants are defined for 2 qubits")
    return p_from_parts(*two_qubit_parts(b))


def p_from_parts(v, w, c) -> Invariants2:
    return Invariants2(
        p1=scalar_product(v, v),
        p2=scalar_product(w, w),
        p3=complex(v @ c @ w),
        p4=complex(np.trace(c.T @ c)),
        p5=complex(np.linalg.det(c)),
    )


def f_on_section(x, y, lam) -> np.ndarray:
    """p restricted to the section: (x^2, y^2, lam3 x y, sum lam^2, prod lam)."""
    l1, l2, l3 = lam
    return np.array([x * x, y * y, l3 * x * y, l1**2 + l2**2 + l3**2, l1 * l2 * l3], dtype=complex)
