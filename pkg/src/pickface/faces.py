"""Faces of density matrices cut out by trace constraints.

A state on ``M_n`` is ``X -> Tr(X T)`` for a density matrix ``T``.  Requiring
``Tr(G_i T) = t_i`` carves a face out of the state space.  Whenever
``G - t I`` is semidefinite on the current support, the constraint can only
hold if ``T`` lives in ``ker(G - t I)`` (trace is 1), so the support shrinks;
repeating this to a fixed point is *support reduction*.

When every remaining constraint compresses to a multiple of the identity the
face is the full density set of the support (``tier="exact"``).  Otherwise an
alternating-projection search finds a feasible point and a log-barrier
Newton method extremizes linear functionals; such answers carry
``certified=False``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Literal, Sequence

import numpy as np

from .exceptions import EmptyFace, Infeasible

__all__ = [
    "DensityMatrix",
    "LinearConstraint",
    "FaceDescription",
    "support_reduce",
    "face_dimension",
    "functional_range",
    "density_is_pure",
    "load_problem",
]

TOL = 1e-10
MAX_PROJECTION_STEPS = 10_000
PROJECTION_RESIDUAL = 1e-7


def _herm(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.entries, dtype=complex)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(T - T.conj().T), initial=0.0) > 1e-12:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(T) - 1) > 1e-12:
            raise ValueError("density matrix must have trace 1")
        if np.linalg.eigvalsh(_herm(T))[0] < -TOL:
            raise ValueError("density matrix must be positive semidefinite")
        object.__setattr__(self, "entries", T)

    @classmethod
    def from_vector(cls, x) -> "DensityMatrix":
        x = np.asarray(x, dtype=complex)
        x = x / np.linalg.norm(x)
        return cls(np.outer(x, x.conj()))

    def expectation(self, X: np.ndarray) -> complex:
        return complex(np.trace(np.asarray(X) @ self.entries))


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """``Tr(G T) = target`` for a Hermitian observable ``G``."""

    G: np.ndarray
    target: float = 0.0

    def __post_init__(self):
        G = np.asarray(self.G, dtype=complex)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("observable must be square")
        if np.max(np.abs(G - G.conj().T), initial=0.0) > 1e-12 * max(1.0, np.abs(G).max()):
            raise ValueError("observable must be Hermitian")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "target", float(self.target))

    def residual(self, T: np.ndarray) -> float:
        return abs(np.trace(self.G @ T).real - self.target)


@dataclass(frozen=True, eq=False)
class FaceDescription:
    support_projection: np.ndarray
    affine_dimension: int
    extreme_param: str
    feasible_sample: np.ndarray
    tier: Literal["exact", "iterative"] = "exact"
    certified: bool = True

    @property
    def support_rank(self) -> int:
        return int(round(np.trace(self.support_projection).real))

    def to_json(self) -> dict[str, Any]:
        P, T = self.support_projection, self.feasible_sample
        return {
            "support_projection": {"re": P.real.tolist(), "im": P.imag.tolist()},
            "support_rank": self.support_rank,
            "affine_dimension": self.affine_dimension,
            "extreme_param": self.extreme_param,
            "feasible_sample": {"re": T.real.tolist(), "im": T.imag.tolist()},
            "tier": self.tier,
            "certified": self.certified,
        }


def _support_basis(constraints: Sequence[LinearConstraint], n: int, tol: float = TOL) -> np.ndarray:
    V = np.eye(n, dtype=complex)
    changed = True
    while changed:
        changed = False
        for c in constraints:
            shifted = c.G - c.target * np.eye(n)
            scale = max(1.0, float(np.abs(shifted).max()))
            Gs = _herm(V.conj().T @ shifted @ V)
            if np.abs(Gs).max(initial=0.0) <= tol * scale:
                continue
            w, U = np.linalg.eigh(Gs)
            if w[0] >= -tol * scale or w[-1] <= tol * scale:
                keep = np.abs(w) <= tol * scale
                V = V @ U[:, keep]
                changed = True
                if V.shape[1] == 0:
                    raise EmptyFace("support reduction left no room for a trace-one state")
    return V


def support_reduce(constraints: Sequence[LinearConstraint], n: int, tol: float = TOL) -> np.ndarray:
    """Orthogonal projection onto the subspace every feasible ``T`` must live in.

    Raises :class:`EmptyFace` if the support collapses to ``{0}``.
    """
    V = _support_basis(constraints, n, tol)
    return V @ V.conj().T


def _hermitian_basis(r: int) -> list[np.ndarray]:
    """Orthonormal basis of ``r x r`` Hermitian matrices under ``Re Tr(X Y)``."""
    basis = []
    for j in range(r):
        E = np.zeros((r, r), dtype=complex)
        E[j, j] = 1.0
        basis.append(E)
    for j in range(r):
        for k in range(j + 1, r):
            E = np.zeros((r, r), dtype=complex)
            E[j, k] = E[k, j] = 1 / np.sqrt(2)
            basis.append(E)
            F = np.zeros((r, r), dtype=complex)
            F[j, k], F[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(F)
    return basis


class _AffineSlice:
    """``{X Hermitian r x r : Tr X = 1, Tr(G_i X) = t_i}`` in real coordinates."""

    def __init__(self, compressed: Sequence[tuple[np.ndarray, float]], r: int):
        self.r = r
        self.basis = _hermitian_basis(r)
        rows = [[np.trace(E).real for E in self.basis]]
        rhs = [1.0]
        for G, t in compressed:
            rows.append([np.trace(G @ E).real for E in self.basis])
            rhs.append(t)
        self.A = np.array(rows)
        self.b = np.array(rhs)
        self.pinv = np.linalg.pinv(self.A, rcond=1e-12)
        sv = np.linalg.svd(self.A, compute_uv=False)
        self.rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
        self.dimension = r * r - self.rank
        _, _, vh = np.linalg.svd(self.A)
        self.null = vh[self.rank:].T  # columns span directions inside the slice

    def to_vec(self, X: np.ndarray) -> np.ndarray:
        return np.array([np.trace(X @ E).real for E in self.basis])

    def from_vec(self, v: np.ndarray) -> np.ndarray:
        return sum(c * E for c, E in zip(v, self.basis))

    def project(self, X: np.ndarray) -> np.ndarray:
        v = self.to_vec(X)
        v = v - self.pinv @ (self.A @ v - self.b)
        return self.from_vec(v)

    def residual(self, X: np.ndarray) -> float:
        return float(np.max(np.abs(self.A @ self.to_vec(X) - self.b)))


def _psd_project(X: np.ndarray, floor: float = 0.0) -> np.ndarray:
    w, U = np.linalg.eigh(_herm(X))
    return (U * np.maximum(w, floor)) @ U.conj().T


def _alternating_projection(slice_: _AffineSlice, floor: float = 0.0,
                            start: np.ndarray | None = None,
                            steps: int = MAX_PROJECTION_STEPS) -> np.ndarray | None:
    r = slice_.r
    X = np.eye(r, dtype=complex) / r if start is None else start
    for _ in range(steps):
        Y = _psd_project(slice_.project(X), floor)
        if slice_.residual(Y) <= PROJECTION_RESIDUAL * 1e-2:
            return Y
        X = Y
    return None


def _compress(constraints: Sequence[LinearConstraint], V: np.ndarray) -> list[tuple[np.ndarray, float]]:
    return [(_herm(V.conj().T @ c.G @ V), c.target) for c in constraints]


def _is_scalar(G: np.ndarray, tol: float) -> tuple[bool, float]:
    r = G.shape[0]
    c = float(np.trace(G).real / r)
    return bool(np.abs(G - c * np.eye(r)).max(initial=0.0) <= tol * max(1.0, abs(c))), c


def _analyze(constraints: Sequence[LinearConstraint], n: int, tol: float = TOL):
    V = _support_basis(constraints, n, tol)
    r = V.shape[1]
    compressed = _compress(constraints, V)
    exact = True
    for G, t in compressed:
        scalar, c = _is_scalar(G, 1e-9)
        if not scalar:
            exact = False
        elif abs(c - t) > 1e-9 * max(1.0, abs(t)):
            raise Infeasible(f"compressed observable equals {c} * I but target is {t} (certified)")
    return V, r, compressed, exact


def face_dimension(constraints: Sequence[LinearConstraint], n: int) -> FaceDescription:
    """Support, real affine dimension, and extreme-set description of the face.

    Raises :class:`EmptyFace` or :class:`Infeasible`.
    """
    constraints = list(constraints)
    V, r, compressed, exact = _analyze(constraints, n)
    P = V @ V.conj().T
    if exact:
        sample = P / r
        if r == 1:
            param = "single point: the vector state of the unit vector spanning the support"
        else:
            param = (f"rank-one states x x^* for unit vectors x in the range of the support "
                     f"projection, modulo unimodular scalars (complex projective space P^{r - 1})")
        return FaceDescription(P, r * r - 1, param, sample, "exact", True)

    slice_ = _AffineSlice(compressed, r)
    X = _alternating_projection(slice_)
    if X is None:
        raise Infeasible("alternating projections did not reach the constraint set (not certified)")
    sample = V @ X @ V.conj().T
    param = ("not resolved by support reduction; extreme points are the feasible states of "
             "minimal rank (iterative, not certified)")
    return FaceDescription(P, slice_.dimension, param, _herm(sample), "iterative", False)


def _barrier_maximize(slice_: _AffineSlice, H: np.ndarray, X0: np.ndarray,
                      t0: float = 1.0, gap: float = 1e-9) -> float:
    """Maximize ``Tr(H X)`` over the slice intersected with the PSD cone.

    ``X0`` must be positive definite.  Standard log-barrier path following:
    the duality gap after the centering step at parameter ``t`` is ``r / t``.
    """
    B = [slice_.from_vec(v) for v in slice_.null.T]
    if not B:
        return float(np.trace(H @ X0).real)
    c = np.array([np.trace(H @ E).real for E in B])
    y = np.zeros(len(B))

    def mat(y):
        return X0 + sum(yi * E for yi, E in zip(y, B))

    r = slice_.r
    t = t0
    while r / t > gap:
        for _ in range(100):
            X = mat(y)
            Xi = np.linalg.inv(X)
            XiB = [Xi @ E for E in B]
            grad = t * c + np.array([np.trace(M).real for M in XiB])
            hess = -np.array([[np.trace(M1 @ M2).real for M2 in XiB] for M1 in XiB])
            step = np.linalg.solve(hess, -grad)
            decrement = float(grad @ step)
            if decrement < 1e-12:
                break
            s = 1.0
            while np.linalg.eigvalsh(_herm(mat(y + s * step)))[0] <= 0:
                s *= 0.5
            y = y + s * step
        t *= 10.0
    return float(np.trace(H @ mat(y)).real)


def functional_range(constraints: Sequence[LinearConstraint], H: np.ndarray, n: int) -> tuple[float, float]:
    """``(min, max)`` of ``Tr(H T)`` over the face."""
    constraints = list(constraints)
    H = _herm(np.asarray(H, dtype=complex))
    V, r, compressed, exact = _analyze(constraints, n)
    Hc = _herm(V.conj().T @ H @ V)
    if exact:
        w = np.linalg.eigvalsh(Hc)
        return float(w[0]), float(w[-1])
    slice_ = _AffineSlice(compressed, r)
    X0 = None
    for floor in (1e-2 / r, 1e-4 / r, 1e-6 / r):
        X0 = _alternating_projection(slice_, floor)
        if X0 is not None and np.linalg.eigvalsh(X0)[0] > 0:
            break
        X0 = None
    if X0 is None:
        raise Infeasible("no strictly feasible point found on the reduced support (not certified)")
    return -_barrier_maximize(slice_, -Hc, X0), _barrier_maximize(slice_, Hc, X0)


def density_is_pure(T: np.ndarray, tol: float = 1e-9) -> bool:
    """A state ``Tr(. T)`` is extreme iff the face over its support is a point.

    The face ``{S : Tr((I - P) S) = 0}`` with ``P`` the support projection of
    ``T`` contains every state ``T`` could split into; it is a point exactly
    when ``T`` is a vector state.
    """
    T = _herm(np.asarray(T, dtype=complex))
    w, U = np.linalg.eigh(T)
    support = U[:, w > tol]
    P = support @ support.conj().T
    n = T.shape[0]
    face = face_dimension([LinearConstraint(np.eye(n) - P, 0.0)], n)
    return face.affine_dimension == 0


def load_problem(data: dict[str, Any] | str) -> tuple[int, list[LinearConstraint], np.ndarray | None]:
    """Parse ``{n, constraints: [{g_re, g_im, target}], objective: {h_re, h_im}}``."""
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])

    def matrix(re, im):
        M = np.asarray(re, dtype=float).reshape(n, n).astype(complex)
        if im is not None:
            M = M + 1j * np.asarray(im, dtype=float).reshape(n, n)
        return M

    constraints = [
        LinearConstraint(matrix(c["g_re"], c.get("g_im")), c.get("target", 0.0))
        for c in data.get("constraints", [])
    ]
    obj = data.get("objective")
    H = None if obj is None else matrix(obj["h_re"], obj.get("h_im"))
    return n, constraints, H
