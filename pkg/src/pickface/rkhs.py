"""Graded truncations of multiplication operators and the states built on them.

Coordinates are taken in the orthonormal basis ``e_n = sqrt(a_n) z^n``.  An
operator between ``span{e_0..e_Din}`` and ``span{e_0..e_Dout}`` is stored as a
sparse ``(Dout+1) x (Din+1)`` matrix (:class:`GradedMatrix`).  Multiplication by
a polynomial ``p`` raises degree by ``deg p``, so a codomain of grade
``Din + deg p`` makes the truncation exact; all truncation error then lives in
the kernel tails, which are bounded via :mod:`pickface.series`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Literal, Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import AmbiguousElement, DepthExceeded, OutOfFace, UnboundedAtBoundary
from .series import (
    CoefficientSequence,
    default_sweep,
    invert_to_b,
    kernel_bounds_at_one,
    kernel_value,
)

__all__ = [
    "BoundarySymbol",
    "GradedMatrix",
    "KernelVector",
    "StateValue",
    "CircleQuadrature",
    "as_poly",
    "poly_degree",
    "poly_eval",
    "poly_coords",
    "inner_product",
    "mz_matrix",
    "mp_matrix",
    "mp_adjoint_matrix",
    "p0_matrix",
    "identity_matrix",
    "element_pq",
    "element_p_p0_q",
    "multiplier_norm_bound",
    "kernel_vector",
    "rank_one_identity_check",
    "sot_sum_kernel_check",
    "pick_multiplier_psd_check",
    "multiplier_kernel_check",
    "state_phi",
    "state_psi",
    "state_delta",
    "omega_state",
    "kernel_continuity_check",
    "operator_deviation_check",
    "alpha_bounds",
    "alpha_estimate",
    "tau_face_coordinates",
]

_EPS = np.finfo(float).eps


# -- polynomials -----------------------------------------------------------

def as_poly(p) -> np.ndarray:
    """Coefficient array (lowest degree first) with trailing zeros removed."""
    arr = np.atleast_1d(np.asarray(p, dtype=complex))
    nz = np.nonzero(arr)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return arr[: nz[-1] + 1].copy()


def poly_degree(p) -> int:
    return len(as_poly(p)) - 1


def poly_eval(p, x: complex) -> complex:
    return complex(np.polynomial.polynomial.polyval(x, as_poly(p)))


def _poly_mul(p, q) -> np.ndarray:
    return as_poly(np.convolve(as_poly(p), as_poly(q)))


def poly_coords(p, a: CoefficientSequence, grade: int | None = None) -> np.ndarray:
    """Coordinates of ``p`` in the basis ``e_n``: ``p_n / sqrt(a_n)``."""
    p = as_poly(p)
    grade = len(p) - 1 if grade is None else grade
    if grade < len(p) - 1:
        raise DepthExceeded(f"polynomial of degree {len(p) - 1} does not fit grade {grade}")
    if grade > a.depth:
        raise DepthExceeded(f"grade {grade} exceeds depth {a.depth}")
    out = np.zeros(grade + 1, dtype=complex)
    out[: len(p)] = p / np.sqrt(a.as_float()[: len(p)])
    return out


def inner_product(f, g, a: CoefficientSequence) -> complex:
    """``<f, g>`` for polynomials given by Taylor coefficients."""
    f, g = as_poly(f), as_poly(g)
    m = min(len(f), len(g))
    if max(len(f), len(g)) - 1 > a.depth:
        raise DepthExceeded("polynomial degree exceeds depth")
    return complex(np.sum(f[:m] * np.conj(g[:m]) / a.as_float()[:m]))


# -- boundary symbols -------------------------------------------------------

@dataclass(frozen=True)
class BoundarySymbol:
    """``rho(T)`` for ``T = sum c_i M_{p_i} M_{q_i}^*``: the function ``sum c_i p_i conj(q_i)`` on the circle.

    An empty term list is the zero symbol (the image of a compact operator).
    """

    terms: tuple = ()

    @classmethod
    def pair(cls, p, q, coef: complex = 1.0) -> "BoundarySymbol":
        return cls(((complex(coef), as_poly(p), as_poly(q)),))

    def __call__(self, lam: complex) -> complex:
        return sum((c * poly_eval(p, lam) * np.conj(poly_eval(q, lam)) for c, p, q in self.terms), 0j)

    def __add__(self, other: "BoundarySymbol") -> "BoundarySymbol":
        return BoundarySymbol(self.terms + other.terms)

    def scale(self, c: complex) -> "BoundarySymbol":
        return BoundarySymbol(tuple((c * k, p, q) for k, p, q in self.terms))

    def __matmul__(self, other: "BoundarySymbol") -> "BoundarySymbol":
        # rho is multiplicative: (p1 q1*)(p2 q2*) = (p1 p2)(q1 q2)*
        return BoundarySymbol(tuple(
            (c1 * c2, _poly_mul(p1, p2), _poly_mul(q1, q2))
            for c1, p1, q1 in self.terms for c2, p2, q2 in other.terms
        ))

    def adjoint(self) -> "BoundarySymbol":
        return BoundarySymbol(tuple((np.conj(c), q, p) for c, p, q in self.terms))


# -- graded matrices ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GradedMatrix:
    """Matrix of ``P_out T P_in`` between graded polynomial subspaces.

    ``symbol`` is the boundary symbol when ``T`` is a known element of the
    operator system plus compacts; ``compact`` marks elements built from
    ``P_0`` (compactness is carried by construction, never tested).
    ``norm_bound`` bounds the full operator norm of ``T``; ``support_grade``
    is set when ``T = P_s T P_s`` for that grade ``s``.
    """

    entries: Any
    deg_in: int
    deg_out: int
    symbol: BoundarySymbol | None = None
    compact: bool = False
    norm_bound: float | None = None
    support_grade: int | None = None

    def __post_init__(self):
        m = sp.csr_matrix(self.entries, dtype=complex)
        object.__setattr__(self, "entries", m)
        if m.shape != (self.deg_out + 1, self.deg_in + 1):
            raise ValueError(
                f"shape {m.shape} does not match grades ({self.deg_out}, {self.deg_in})"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def toarray(self) -> np.ndarray:
        return self.entries.toarray()

    def adjoint(self) -> "GradedMatrix":
        return GradedMatrix(
            self.entries.conj().T,
            self.deg_out,
            self.deg_in,
            None if self.symbol is None else self.symbol.adjoint(),
            self.compact,
            self.norm_bound,
            self.support_grade,
        )

    @property
    def H(self) -> "GradedMatrix":
        return self.adjoint()

    def __matmul__(self, other):
        if isinstance(other, GradedMatrix):
            if self.deg_in != other.deg_out:
                raise ValueError(
                    f"cannot compose: inner grades {self.deg_in} and {other.deg_out} differ"
                )
            compact = self.compact or other.compact
            if compact:
                symbol = BoundarySymbol()
            elif self.symbol is not None and other.symbol is not None:
                symbol = self.symbol @ other.symbol
            else:
                symbol = None
            norm = None
            if self.norm_bound is not None and other.norm_bound is not None:
                norm = self.norm_bound * other.norm_bound
            support = None
            if self.support_grade is not None and other.support_grade is not None:
                support = max(self.support_grade, other.support_grade)
            return GradedMatrix(self.entries @ other.entries, other.deg_in, self.deg_out,
                                symbol, compact, norm, support)
        return self.entries @ np.asarray(other)

    def __add__(self, other: "GradedMatrix") -> "GradedMatrix":
        if (self.deg_in, self.deg_out) != (other.deg_in, other.deg_out):
            raise ValueError("cannot add graded matrices with different grades")
        if self.symbol is not None and other.symbol is not None:
            symbol = self.symbol + other.symbol
        else:
            symbol = None
        norm = None
        if self.norm_bound is not None and other.norm_bound is not None:
            norm = self.norm_bound + other.norm_bound
        support = None
        if self.support_grade is not None and other.support_grade is not None:
            support = max(self.support_grade, other.support_grade)
        return GradedMatrix(self.entries + other.entries, self.deg_in, self.deg_out, symbol,
                            self.compact and other.compact, norm, support)

    def __rmul__(self, c: complex) -> "GradedMatrix":
        c = complex(c)
        return GradedMatrix(
            c * self.entries, self.deg_in, self.deg_out,
            None if self.symbol is None else self.symbol.scale(c),
            self.compact,
            None if self.norm_bound is None else abs(c) * self.norm_bound,
            self.support_grade,
        )

    __mul__ = __rmul__

    def __sub__(self, other: "GradedMatrix") -> "GradedMatrix":
        return self + (-1.0) * other

    def to_json(self) -> dict[str, Any]:
        dense = self.toarray()
        return {
            "deg_in": self.deg_in,
            "deg_out": self.deg_out,
            "re": dense.real.tolist(),
            "im": dense.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "GradedMatrix":
        entries = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        entries = entries.reshape(int(data["deg_out"]) + 1, int(data["deg_in"]) + 1)
        return cls(entries, int(data["deg_in"]), int(data["deg_out"]))


def multiplier_norm_bound(p, a: CoefficientSequence) -> float:
    """Upper bound ``sum |p_k| ||M_{z^k}||`` for the multiplier norm.

    ``||M_{z^k}|| = sup_n sqrt(a_n / a_{n+k})``; the sup is taken over the
    available grades together with the limit value 1 of a regular sequence,
    which is exact for power-law weights.
    """
    p = as_poly(p)
    av = a.as_float()
    total = 0.0
    for k, c in enumerate(p):
        if c == 0:
            continue
        if k == 0:
            nk = 1.0
        elif k > a.depth:
            raise DepthExceeded(f"degree {k} exceeds depth {a.depth}")
        else:
            nk = max(1.0, float(np.sqrt(np.max(av[: a.depth - k + 1] / av[k:]))))
        total += abs(c) * nk
    return total


def mp_matrix(p, a: CoefficientSequence, deg_in: int, deg_out: int | None = None) -> GradedMatrix:
    """Exact matrix of ``M_p`` from grade ``deg_in`` to grade ``deg_in + deg p``.

    ``M_p e_n = sum_k p_k sqrt(a_n / a_{n+k}) e_{n+k}``.  A larger ``deg_out``
    pads with zero rows.
    """
    p = as_poly(p)
    dp = len(p) - 1
    top = deg_in + dp
    if top > a.depth:
        raise DepthExceeded(f"deg_in + deg(p) = {top} exceeds depth {a.depth}")
    deg_out = top if deg_out is None else deg_out
    if deg_out < top:
        raise ValueError(f"deg_out must be at least {top}")
    av = a.as_float()
    sq = np.sqrt(av[: top + 1])
    rows, cols, vals = [], [], []
    n = np.arange(deg_in + 1)
    for k, c in enumerate(p):
        if c == 0:
            continue
        rows.append(n + k)
        cols.append(n)
        vals.append(c * sq[n] / sq[n + k])
    if rows:
        m = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(deg_out + 1, deg_in + 1), dtype=complex)
    else:
        m = sp.csr_matrix((deg_out + 1, deg_in + 1), dtype=complex)
    return GradedMatrix(m, deg_in, deg_out, BoundarySymbol.pair(p, [1.0]), False,
                        multiplier_norm_bound(p, a))


def mz_matrix(a: CoefficientSequence, deg_in: int) -> GradedMatrix:
    """Weighted shift ``e_n -> sqrt(a_n/a_{n+1}) e_{n+1}`` on grades ``0..deg_in``."""
    if deg_in > a.depth - 1:
        raise DepthExceeded(f"deg_in {deg_in} must be at most depth - 1 = {a.depth - 1}")
    return mp_matrix([0.0, 1.0], a, deg_in)


def mp_adjoint_matrix(q, a: CoefficientSequence, deg: int) -> GradedMatrix:
    """Exact square matrix of ``M_q^*`` on grade ``deg`` (adjoints lower degree).

    ``M_q^* e_n = sum_k conj(q_k) sqrt(a_{n-k} / a_n) e_{n-k}``.
    """
    if deg > a.depth:
        raise DepthExceeded(f"grade {deg} exceeds depth {a.depth}")
    q = as_poly(q)
    sq = np.sqrt(a.as_float()[: deg + 1])
    rows, cols, vals = [], [], []
    for k, c in enumerate(q[: deg + 1]):
        if c == 0:
            continue
        m = np.arange(deg + 1 - k)
        rows.append(m)
        cols.append(m + k)
        vals.append(np.conj(c) * sq[m] / sq[m + k])
    if rows:
        block = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(deg + 1, deg + 1), dtype=complex)
    else:
        block = sp.csr_matrix((deg + 1, deg + 1), dtype=complex)
    norm = multiplier_norm_bound(q, a) if len(q) - 1 <= a.depth else None
    return GradedMatrix(block, deg, deg, BoundarySymbol.pair([1.0], q), False, norm)


def p0_matrix(deg: int) -> GradedMatrix:
    """Rank-one projection onto the constants; compact by construction."""
    m = sp.csr_matrix(([1.0], ([0], [0])), shape=(deg + 1, deg + 1), dtype=complex)
    return GradedMatrix(m, deg, deg, BoundarySymbol(), True, 1.0, 0)


def identity_matrix(deg: int) -> GradedMatrix:
    return GradedMatrix(sp.identity(deg + 1, dtype=complex, format="csr"), deg, deg,
                        BoundarySymbol.pair([1.0], [1.0]), False, 1.0)


def element_pq(p, q, a: CoefficientSequence, deg: int) -> GradedMatrix:
    """``M_p M_q^*`` from grade ``deg`` to grade ``deg + deg p`` (exact)."""
    return mp_matrix(p, a, deg) @ mp_adjoint_matrix(q, a, deg)


def element_p_p0_q(p, q, a: CoefficientSequence, deg: int) -> GradedMatrix:
    """``M_p P_0 M_q^*`` on grade ``deg``; rank one and compact."""
    out = mp_matrix(p, a, deg) @ p0_matrix(deg) @ mp_adjoint_matrix(q, a, deg)
    return replace(out, support_grade=max(poly_degree(p), poly_degree(q)))


# -- kernel vectors -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KernelVector:
    coords: np.ndarray
    w: complex
    normalized: bool

    @property
    def grade(self) -> int:
        return len(self.coords) - 1


def _check_point(a: CoefficientSequence, w: complex) -> None:
    if abs(w) > 1 + 1e-12:
        raise ValueError("kernel points must lie in the closed unit disc")
    if abs(w) >= 1 - 1e-12 and not a.bounded:
        raise UnboundedAtBoundary("boundary kernel vectors need a bounded kernel")


def kernel_vector(a: CoefficientSequence, w: complex, normalized: bool = False,
                  grade: int | None = None) -> KernelVector:
    """Coordinates ``sqrt(a_n) conj(w)^n`` of ``k_w`` truncated at ``grade``."""
    w = complex(w)
    _check_point(a, w)
    grade = a.depth if grade is None else grade
    if grade > a.depth:
        raise DepthExceeded(f"grade {grade} exceeds depth {a.depth}")
    n = np.arange(grade + 1)
    coords = np.sqrt(a.as_float()[: grade + 1]) * np.conj(w) ** n
    if normalized:
        coords = coords / np.linalg.norm(coords)
    return KernelVector(coords, w, normalized)


# -- operator identities ---------------------------------------------------

def rank_one_identity_check(p, q, f, a: CoefficientSequence) -> float:
    """Distance between ``M_p P_0 M_q^* f`` and ``<f, q> p`` in coordinates."""
    p, q, f = as_poly(p), as_poly(q), as_poly(f)
    grade = max(len(f) - 1, len(q) - 1)
    top = grade + len(p) - 1
    if top > a.depth:
        raise DepthExceeded(f"identity needs depth {top}, have {a.depth}")
    # apply factor by factor: composing the matrices first adds a rounding layer
    v = mp_adjoint_matrix(q, a, grade) @ poly_coords(f, a, grade)
    lhs = mp_matrix(p, a, grade) @ (p0_matrix(grade) @ v)
    rhs = inner_product(f, q, a) * poly_coords(p, a, top)
    return float(np.linalg.norm(lhs - rhs))


def sot_sum_kernel_check(a: CoefficientSequence, lam: complex, mu: complex,
                         depths: Sequence[int] | None = None) -> np.ndarray:
    """``|sum_{n<=N} b_n (mu conj lam)^n K_N(mu, lam) - (K_N(mu, lam) - 1)|`` per depth."""
    lam, mu = complex(lam), complex(mu)
    _check_point(a, lam)
    _check_point(a, mu)
    depths = default_sweep(a.depth) if depths is None else tuple(depths)
    if max(depths) > a.depth:
        raise DepthExceeded(f"sweep depth {max(depths)} exceeds {a.depth}")
    x = mu * np.conj(lam)
    b = invert_to_b(a.truncate(max(depths))).as_float()
    av = a.as_float()
    powers = x ** np.arange(max(depths) + 1)
    out = []
    for N in depths:
        K = complex(np.dot(av[: N + 1], powers[: N + 1]))
        S = complex(np.dot(b[1 : N + 1], powers[1 : N + 1]))
        out.append(abs(S * K - (K - 1)))
    return np.array(out)


def pick_multiplier_psd_check(a: CoefficientSequence, M: int, N: int) -> tuple[float, float]:
    """Smallest eigenvalues of ``I - Sigma_N`` and ``I - Sigma_N - P_0`` on grades ``<= M``.

    ``Sigma_N = sum_{n=1}^N b_n M_{z^n} M_{z^n}^*``; its quadratic form is
    ``sum b_n ||M_{z^n}^* v||^2``, assembled from the exact rectangular factors
    ``M_{z^n}^*: grade M -> grade M - n`` (zero once ``n > M``).
    """
    if M + N > a.depth:
        raise DepthExceeded(f"M + N = {M + N} exceeds depth {a.depth}")
    b = invert_to_b(a.truncate(N)).as_float()
    sigma = np.zeros((M + 1, M + 1), dtype=complex)
    for n in range(1, min(N, M) + 1):
        zn = np.zeros(n + 1)
        zn[n] = 1.0
        factor = mp_matrix(zn, a, M - n).toarray().conj().T  # (M-n+1) x (M+1)
        sigma += b[n] * (factor.conj().T @ factor)
    form = np.eye(M + 1) - sigma
    lam1 = float(np.linalg.eigvalsh(form)[0])
    form[0, 0] -= 1.0
    lam2 = float(np.linalg.eigvalsh(form)[0])
    return lam1, lam2


def multiplier_kernel_check(a: CoefficientSequence, points: Iterable[complex]) -> float:
    """Max deviation of ``K_N(z,w) (1 - Phi(z) Phi(w)^*)`` from 1 over point pairs.

    ``Phi(z) Phi(w)^* = sum b_n (z conj w)^n``; the product is identically 1
    when ``Phi`` is the contractive multiplier built from the Pick coefficients.
    """
    pts = np.asarray(list(points), dtype=complex)
    av = a.as_float()
    b = invert_to_b(a).as_float()
    X = pts[:, None] * np.conj(pts)[None, :]
    K = np.polynomial.polynomial.polyval(X, av)
    B = np.polynomial.polynomial.polyval(X, b)
    return float(np.max(np.abs(K * (1 - B) - 1)))


# -- states -------------------------------------------------------------

Functional = Literal["Phi", "Psi", "Delta", "Omega", "Tau"]


@dataclass(frozen=True)
class StateValue:
    value: complex
    error_bound: float
    functional: Functional

    def to_json(self) -> dict[str, Any]:
        return {
            "value_re": float(np.real(self.value)),
            "value_im": float(np.imag(self.value)),
            "error_bound": float(self.error_bound),
            "functional": self.functional,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "StateValue":
        return cls(complex(data["value_re"], data["value_im"]), float(data["error_bound"]),
                   data["functional"])

    def agrees_with(self, target: complex, slack: float = 0.0) -> bool:
        return abs(self.value - target) <= self.error_bound + slack


def state_phi(p, q) -> StateValue:
    """``phi(M_p M_q^*) = p(1) conj(q(1))``, exact."""
    return StateValue(poly_eval(p, 1.0) * np.conj(poly_eval(q, 1.0)), 0.0, "Phi")


def _norm_of(T: GradedMatrix) -> float:
    if T.norm_bound is not None:
        return T.norm_bound
    # fallback: norm of the truncation itself, a lower bound on ||T||
    if max(T.shape) <= 512:
        return float(np.linalg.norm(T.toarray(), 2))
    from scipy.sparse.linalg import svds

    return float(svds(T.entries, k=1, return_singular_vectors=False)[0])


def _vector_state(T: GradedMatrix, u: np.ndarray, tail: float, K_trunc: float) -> tuple[complex, float]:
    """``<T u, u>`` and the bound on its distance to ``<T k^, k^>``."""
    G = len(u) - 1
    Tu = T.entries @ u
    value = complex(np.vdot(u, Tu[: G + 1]))
    nb = _norm_of(T)
    rounding = 4 * (G + 1) * _EPS * max(nb, abs(value))
    if tail == 0:
        return value, rounding
    if T.support_grade is not None and T.support_grade <= G:
        # T = P_s T P_s: the full value is exactly (K_G / K) <T u, u>
        return value, tail / K_trunc * abs(value) + rounding
    return value, 2.0 * nb * math.sqrt(2.0 * tail / K_trunc) + rounding


def state_psi(T: GradedMatrix, a: CoefficientSequence) -> StateValue:
    """``psi(T) = <T k^_1, k^_1>`` with the normalized kernel at 1 truncated at ``T.deg_in``."""
    if not a.bounded:
        raise UnboundedAtBoundary("psi needs a bounded kernel")
    G = T.deg_in
    if G > a.depth:
        raise DepthExceeded(f"operator grade {G} exceeds depth {a.depth}")
    aG = a.truncate(G)
    u = kernel_vector(aG, 1.0)
    K_trunc = float(np.vdot(u.coords, u.coords).real)
    value, err = _vector_state(T, u.coords / math.sqrt(K_trunc), aG.tail_bound, K_trunc)
    return StateValue(value, err, "Psi")


def state_delta(x) -> StateValue:
    """``delta(T) = rho(T)(1)``: evaluates boundary symbols, annihilates compacts."""
    if isinstance(x, BoundarySymbol):
        return StateValue(x(1.0), 0.0, "Delta")
    if isinstance(x, GradedMatrix):
        if x.compact:
            return StateValue(0j, 0.0, "Delta")
        if x.symbol is not None:
            return StateValue(x.symbol(1.0), 0.0, "Delta")
    raise AmbiguousElement("delta needs a boundary symbol or a compact-flagged element")


@dataclass(frozen=True, eq=False)
class CircleQuadrature:
    """Discrete probability measure on the circle.

    ``resolution`` is the largest angular distance from any point of the
    target measure's support to the node carrying its mass; it is 0 when the
    nodes represent the measure exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray
    resolution: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights must have equal length")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("quadrature weights must be nonnegative and sum to 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, n: int = 512) -> "CircleQuadrature":
        """Trapezoid rule for normalized Lebesgue measure."""
        theta = 2 * np.pi * np.arange(n) / n
        return cls(np.exp(1j * theta), np.full(n, 1.0 / n), np.pi / n)

    @classmethod
    def point_mass(cls, lam: complex = 1.0) -> "CircleQuadrature":
        return cls(np.array([lam]), np.array([1.0]), 0.0)


def _circle_modulus(a: CoefficientSequence, h: float, samples: int = 65) -> float:
    """Sampled sup over ``|theta| <= h`` of ``||k^_{e^{i theta}} - k^_1||``, tail-inflated."""
    if h == 0:
        return 0.0
    av = a.as_float()
    eps = a.tail_bound
    K1 = float(av.sum())
    theta = np.linspace(0.0, h, samples)
    n = np.arange(a.depth + 1)
    re = np.cos(np.outer(theta, n)) @ av
    d2 = 2.0 - 2.0 * (re - eps) / (K1 + eps)
    return float(np.sqrt(np.max(np.clip(d2, 0.0, 4.0))))


def omega_state(a: CoefficientSequence, quad: CircleQuadrature, T: GradedMatrix) -> StateValue:
    """``omega(T) = int <T k^_lam, k^_lam> d mu(lam)`` for a discrete circle measure.

    The error bound adds the weighted kernel-tail errors at each node and,
    for ``resolution > 0``, the Lipschitz term ``2 ||T|| sup ||k^_lam - k^_mu||``
    over node neighbourhoods.
    """
    if not a.bounded:
        raise UnboundedAtBoundary("omega needs a bounded kernel")
    G = T.deg_in
    if G > a.depth:
        raise DepthExceeded(f"operator grade {G} exceeds depth {a.depth}")
    aG = a.truncate(G)
    total, err = 0j, 0.0
    for lam, wt in zip(quad.nodes, quad.weights):
        if wt == 0:
            continue
        u = kernel_vector(aG, lam)
        K_trunc = float(np.vdot(u.coords, u.coords).real)
        _, tail = kernel_value(aG, lam, lam)
        v, e = _vector_state(T, u.coords / math.sqrt(K_trunc), tail, K_trunc)
        total += wt * v
        err += wt * e
    if quad.resolution > 0:
        err += 2.0 * _norm_of(T) * _circle_modulus(aG, quad.resolution)
    return StateValue(total, err, "Omega")


# -- continuity of the normalized kernel ------------------------------------

@dataclass(frozen=True)
class ContinuityReport:
    direct: float
    closed_form: float
    residual: float
    tail_allowance: float

    @property
    def distance(self) -> float:
        return math.sqrt(max(self.direct, 0.0))


def kernel_continuity_check(a: CoefficientSequence, lam: complex, mu: complex) -> ContinuityReport:
    """Compare ``||k^_lam - k^_mu||^2`` in coordinates with ``2 - 2 Re K(mu,lam)/sqrt(K(lam,lam) K(mu,mu))``.

    ``tail_allowance`` bounds how far either truncated value may sit from the
    untruncated squared distance.
    """
    if not a.bounded:
        raise UnboundedAtBoundary("continuity check needs a bounded kernel")
    ul = kernel_vector(a, lam, normalized=True).coords
    um = kernel_vector(a, mu, normalized=True).coords
    direct = float(np.linalg.norm(ul - um) ** 2)
    kml, _ = kernel_value(a, mu, lam)
    kll, el = kernel_value(a, lam, lam)
    kmm, em = kernel_value(a, mu, mu)
    closed = float(2.0 - 2.0 * (kml / math.sqrt(kll.real * kmm.real)).real)
    eta = math.sqrt(2 * el / kll.real) + math.sqrt(2 * em / kmm.real)
    return ContinuityReport(direct, closed, abs(direct - closed), 4.0 * eta)


def operator_deviation_check(a: CoefficientSequence, lam: complex, mu: complex,
                             T: np.ndarray) -> tuple[float, float]:
    """``|<T k^_lam, k^_lam> - <T k^_mu, k^_mu>|`` and ``2 ||T|| ||k^_lam - k^_mu||`` (truncated)."""
    T = np.asarray(T, dtype=complex)
    ul = kernel_vector(a, lam, normalized=True, grade=T.shape[0] - 1).coords
    um = kernel_vector(a, mu, normalized=True, grade=T.shape[0] - 1).coords
    dev = abs(np.vdot(ul, T @ ul) - np.vdot(um, T @ um))
    bound = 2.0 * np.linalg.norm(T, 2) * np.linalg.norm(ul - um)
    return float(dev), float(bound)


# -- face of extensions of phi ------------------------------------------------

def alpha_bounds(a: CoefficientSequence) -> tuple[float, float]:
    """Bracket for ``alpha = 1 / K(1, 1) = psi(P_0)``."""
    lo, hi = kernel_bounds_at_one(a)
    return 1.0 / hi, 1.0 / lo


def alpha_estimate(a: CoefficientSequence) -> float:
    lo, hi = alpha_bounds(a)
    return 0.5 * (lo + hi)


def tau_face_coordinates(tau_P0: float, a: CoefficientSequence, tol: float = 1e-9) -> float:
    """Barycentric coordinate ``t`` with ``tau = t psi + (1 - t) delta``.

    Every extension is determined by ``tau(P_0)``, which lies in ``[0, alpha]``.
    """
    lo, hi = alpha_bounds(a)
    if tau_P0 < -tol or tau_P0 > hi + tol:
        raise OutOfFace(f"tau(P_0) = {tau_P0} outside [0, {hi}]")
    return float(tau_P0 / alpha_estimate(a))
