"""Finite-dimensional worked examples.

* The operator system ``span{I, A, B}`` in ``M_4``: the algebra it generates,
  the numerical range of ``A + iB`` and the face of extensions of the state
  ``(alpha, beta) = (0, 0)``.
* Cuntz-type row tuples: row contractions and co-isometries, splitting a
  non-extreme contraction into two co-isometries, irreducibility via the
  commutant, and the truncated Fock model behind the state with
  ``psi(s_1) = 1``.
"""

from __future__ import annotations

import csv
import io
import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import AlreadyExtreme, DegenerateEigenspace, RankDeficient
from .faces import FaceDescription, LinearConstraint, face_dimension, functional_range

__all__ = [
    "RowTuple",
    "WordMoment",
    "NumericalRangePoint",
    "build_example_matrices",
    "word_span_dimension",
    "numerical_range_boundary",
    "boundary_to_csv",
    "m4_face_analysis",
    "row_contraction_check",
    "coisometry_split",
    "irreducibility_check",
    "brute_force_commutant_dimension",
    "fock_moments",
    "FockModel",
]

TOL = 1e-10


def build_example_matrices() -> tuple[np.ndarray, np.ndarray]:
    A = np.diag([0.0, 0.0, 1.0, 1.0])
    B = np.array([
        [0.0, 0.0, 2.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [2.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0],
    ])
    return A, B


def _orth_basis(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    if vectors.size == 0:
        return vectors
    u, s, vh = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return vh[:rank]


def word_span_dimension(generators: Sequence[np.ndarray], max_len: int) -> int:
    """Dimension of the span of all words of length ``<= max_len`` in the generators and their adjoints."""
    gens = [np.asarray(g, dtype=complex) for g in generators]
    n = gens[0].shape[0]
    letters = gens + [g.conj().T for g in gens]
    basis = _orth_basis(np.eye(n, dtype=complex).reshape(1, -1))
    for _ in range(max_len):
        mats = [row.reshape(n, n) for row in basis]
        new = [(L @ M).ravel() for L in letters for M in mats]
        basis = _orth_basis(np.vstack([basis] + [np.array(new)]))
        if basis.shape[0] == n * n:
            break
    return int(basis.shape[0])


@dataclass(frozen=True, eq=False)
class NumericalRangePoint:
    alpha: float
    beta: float
    theta: float
    witness: np.ndarray
    degenerate: bool = False


def numerical_range_boundary(A: np.ndarray, B: np.ndarray, grid_size: int = 720,
                             warn: bool = False) -> list[NumericalRangePoint]:
    """Support-function boundary points of ``W(A + iB)`` on a uniform angle grid.

    For each ``theta`` the top eigenvector ``x`` of ``cos(theta) A + sin(theta) B``
    gives the boundary point ``(<Ax, x>, <Bx, x>)``.  When the top eigenspace is
    degenerate the lowest-index eigenvector is taken and the point is flagged.
    """
    if grid_size < 4:
        raise ValueError("grid_size must be at least 4")
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    points = []
    for k in range(grid_size):
        theta = 2 * np.pi * k / grid_size
        w, U = np.linalg.eigh(np.cos(theta) * A + np.sin(theta) * B)
        top = w[-1]
        group = np.nonzero(w >= top - TOL * max(1.0, abs(top)))[0]
        x = U[:, group[0]]
        degenerate = len(group) > 1
        if degenerate and warn:
            warnings.warn(f"degenerate top eigenspace at theta={theta:.6f}", DegenerateEigenspace)
        points.append(NumericalRangePoint(
            float(np.vdot(x, A @ x).real), float(np.vdot(x, B @ x).real), theta, x, degenerate))
    return points


def boundary_to_csv(points: Sequence[NumericalRangePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "alpha", "beta"])
    for p in points:
        writer.writerow([repr(p.theta), repr(p.alpha), repr(p.beta)])
    return buf.getvalue()


@dataclass(frozen=True, eq=False)
class M4FaceReport:
    face: FaceDescription
    alpha_range: tuple[float, float]
    beta_range: tuple[float, float]
    beta_range_given_alpha_zero: tuple[float, float]


def m4_face_analysis() -> M4FaceReport:
    """Face of extensions of the state ``(alpha, beta) = (0, 0)`` on ``span{I, A, B}``."""
    A, B = build_example_matrices()
    constraints = [LinearConstraint(A, 0.0), LinearConstraint(B, 0.0)]
    face = face_dimension(constraints, 4)
    alpha_only = [LinearConstraint(A, 0.0)]
    return M4FaceReport(
        face=face,
        alpha_range=functional_range(constraints, A, 4),
        beta_range=functional_range(constraints, B, 4),
        beta_range_given_alpha_zero=functional_range(alpha_only, B, 4),
    )


# -- row tuples -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RowTuple:
    """``d`` square blocks viewed as the row operator ``[X_1 ... X_d]``."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=complex)) for b in self.blocks)
        if len(blocks) < 2:
            raise ValueError("a row tuple needs d >= 2 blocks")
        n = blocks[0].shape[0]
        if any(b.shape != (n, n) for b in blocks):
            raise ValueError("all blocks must be square of the same size")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def scalar(cls, values: Sequence[complex]) -> "RowTuple":
        return cls(tuple(np.array([[v]]) for v in values))

    @property
    def n(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def d(self) -> int:
        return len(self.blocks)

    def row(self) -> np.ndarray:
        return np.hstack(self.blocks)

    def gram(self) -> np.ndarray:
        """``sum_i X_i X_i^*``."""
        return sum(X @ X.conj().T for X in self.blocks)


@dataclass(frozen=True)
class RowReport:
    is_contraction: bool
    is_coisometry: bool
    defect_norm: float


def row_contraction_check(X: RowTuple, tol: float = TOL) -> RowReport:
    D = np.eye(X.n) - X.gram()
    D = 0.5 * (D + D.conj().T)
    w = np.linalg.eigvalsh(D)
    norm = float(np.max(np.abs(w)))
    return RowReport(bool(w[0] >= -tol), bool(norm <= tol), norm)


def coisometry_split(X: RowTuple, tol: float = TOL) -> tuple[RowTuple, RowTuple]:
    """Write a non-extreme row contraction as the average of two row co-isometries.

    With ``P = |X^*| = (X X^*)^{1/2}`` and ``U = P^{-1} X`` (so ``U U^* = I``), the
    rows ``Y, Z = (P +- i sqrt(I - P^2)) U`` are co-isometries with mean ``X``.
    """
    report = row_contraction_check(X, tol)
    if not report.is_contraction:
        raise ValueError("coisometry_split needs a row contraction")
    w, V = np.linalg.eigh(0.5 * (X.gram() + X.gram().conj().T))
    w = np.clip(w, 0.0, 1.0)
    p = np.sqrt(w)
    if np.max(np.abs(1.0 - p)) <= tol:
        raise AlreadyExtreme("X is already a row co-isometry")
    if p[0] <= tol:
        raise RankDeficient("|X^*| is singular; the splitting needs full row rank")
    P = (V * p) @ V.conj().T
    Q = (V * np.sqrt(1.0 - w)) @ V.conj().T
    U = (V * (1.0 / p)) @ V.conj().T @ X.row()
    Yrow = (P + 1j * Q) @ U
    Zrow = (P - 1j * Q) @ U
    n = X.n
    split = lambda R: RowTuple(tuple(R[:, i * n:(i + 1) * n] for i in range(X.d)))
    return split(Yrow), split(Zrow)


@dataclass(frozen=True)
class IrreducibilityReport:
    commutant_dimension: int
    is_irreducible: bool


def _nullity(M: np.ndarray, tol: float = 1e-9) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    scale = max(1.0, s[0]) if s.size else 1.0
    return int(M.shape[1] - np.sum(s > tol * scale))


def irreducibility_check(X: RowTuple) -> IrreducibilityReport:
    """Dimension of ``{M : M X_i = X_i M, M X_i^* = X_i^* M}`` via Kronecker products."""
    n = X.n
    I = np.eye(n)
    ops = [*X.blocks, *(b.conj().T for b in X.blocks)]
    # row-major vec: vec(M Y - Y M) = (I kron Y^T - Y kron I) vec(M)
    system = np.vstack([np.kron(I, Y.T) - np.kron(Y, I) for Y in ops])
    dim = _nullity(system)
    return IrreducibilityReport(dim, dim == 1)


def brute_force_commutant_dimension(X: RowTuple) -> int:
    """Commutant dimension from the images of the matrix units ``E_jk``."""
    n = X.n
    ops = [*X.blocks, *(b.conj().T for b in X.blocks)]
    columns = []
    for j, k in itertools.product(range(n), repeat=2):
        E = np.zeros((n, n), dtype=complex)
        E[j, k] = 1.0
        columns.append(np.concatenate([(E @ Y - Y @ E).ravel() for Y in ops]))
    return _nullity(np.array(columns).T)


# -- truncated Fock model ------------------------------------------------------------

@dataclass(frozen=True)
class WordMoment:
    word: tuple
    value: complex

    @property
    def key(self) -> str:
        return "".join(str(i) for i in self.word)


class FockModel:
    """``C xi (+) (words of length <= depth) ^ (d - 1)`` with ``S_1 xi = xi``.

    Basis vectors are ``xi`` and ``(i, w) = S_w xi_i`` for ``2 <= i <= d``; the
    generators act by ``S_j xi = xi`` (``j = 1``) or ``xi_j``, and by left
    creation ``S_j (i, w) = (i, jw)``, dropped beyond ``depth``.
    """

    def __init__(self, d: int, depth: int):
        if d < 2 or depth < 1:
            raise ValueError("need d >= 2 and depth >= 1")
        self.d, self.depth = d, depth
        self.labels: list = ["xi"]
        for i in range(2, d + 1):
            for k in range(depth + 1):
                for w in itertools.product(range(1, d + 1), repeat=k):
                    self.labels.append((i, w))
        self.index = {lab: m for m, lab in enumerate(self.labels)}
        dim = len(self.labels)
        self.S = []
        for j in range(1, d + 1):
            S = np.zeros((dim, dim))
            S[self.index["xi"] if j == 1 else self.index[(j, ())], 0] = 1.0
            for lab, m in self.index.items():
                if lab == "xi":
                    continue
                i, w = lab
                if len(w) < depth:
                    S[self.index[(i, (j,) + w)], m] = 1.0
            self.S.append(S)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v

    def xi_i(self, i: int) -> np.ndarray:
        return self.S[i - 1] @ self.vacuum()

    def apply_word(self, word: Sequence[int], v: np.ndarray) -> np.ndarray:
        for letter in reversed(word):
            v = self.S[letter - 1] @ v
        return v

    def interior_projection(self, max_len: int) -> np.ndarray:
        """Diagonal projection onto ``xi`` and word components of length ``<= max_len``."""
        keep = [lab == "xi" or len(lab[1]) <= max_len for lab in self.labels]
        return np.diag(np.array(keep, dtype=float))


@dataclass(frozen=True)
class FockReport:
    moments: tuple
    wandering_max: float
    wandering_checked: int

    def to_json(self) -> dict[str, float]:
        return {m.key: float(np.real(m.value)) for m in self.moments}


def fock_moments(d: int, depth: int) -> FockReport:
    """Moments ``<S_w xi, xi>`` for ``|w| <= depth`` and the wandering check for ``xi_i``.

    The wandering inner products ``<S_w xi_i, xi_i>`` are taken over nonempty
    words with ``|w| <= depth - 2``.
    """
    model = FockModel(d, depth)
    xi = model.vacuum()
    moments = []
    for k in range(depth + 1):
        for w in itertools.product(range(1, d + 1), repeat=k):
            moments.append(WordMoment(w, complex(model.apply_word(w, xi) @ xi)))
    worst, count = 0.0, 0
    for i in range(2, d + 1):
        xi_i = model.xi_i(i)
        for k in range(1, depth - 1):
            for w in itertools.product(range(1, d + 1), repeat=k):
                worst = max(worst, abs(model.apply_word(w, xi_i) @ xi_i))
                count += 1
    return FockReport(tuple(moments), float(worst), count)
