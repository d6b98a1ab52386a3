"""Kernel coefficient sequences and their power-series reciprocals.

A regular rotationally invariant space on the disc is fixed by positive
weights ``a_n`` with ``a_0 = 1``; its kernel is ``K(z, w) = sum a_n (z conj w)^n``
and the monomials have norms ``||z^n||^2 = 1 / a_n``.  The Pick coefficients
``b_n`` come from ``sum_{n>=1} b_n z^n = 1 - 1 / sum_n a_n z^n``.

Two arithmetic modes are supported: float64 (numpy) and exact rational
(:class:`fractions.Fraction`).  Rational mode is selected automatically when
every coefficient is an ``int`` or ``Fraction``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Any, Literal, Mapping, Sequence

import numpy as np

from .exceptions import DepthExceeded, NonPositive, NonUnitLeading, UnboundedAtBoundary

__all__ = [
    "SpaceSpec",
    "CoefficientSequence",
    "PickReport",
    "RegularityReport",
    "coeffs_a",
    "hs_coeffs",
    "invert_to_b",
    "pick_check",
    "reciprocal_residual",
    "kernel_value",
    "kernel_bounds_at_one",
    "regularity_report",
    "b_sum_identity_check",
]

TOL_PICK = 1e-12
# |z||w| this close to 1 is treated as a boundary evaluation
_BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class SpaceSpec:
    """Which space to build and how deep to truncate it.

    ``kind="hs"`` gives ``a_n = (n + 1)**s``; ``kind="explicit"`` takes the
    coefficient list verbatim (``coeffs[0]`` must be 1).  An explicit list may
    carry a user-certified ``tail_bound`` on ``sum_{n > depth} a_n``.
    """

    kind: Literal["hs", "explicit"] = "hs"
    s: float = 0.0
    coeffs: tuple = ()
    depth: int | None = None
    tail_bound: float | None = None

    def __post_init__(self):
        if self.kind not in ("hs", "explicit"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "hs" and self.depth is None:
            raise ValueError("hs spaces need an explicit depth")
        if self.kind == "explicit" and not self.coeffs:
            raise ValueError("explicit spaces need a coefficient list")
        if self.resolved_depth < 1:
            raise ValueError("depth must be >= 1")

    @classmethod
    def hs(cls, s: float, depth: int) -> "SpaceSpec":
        return cls(kind="hs", s=float(s), depth=int(depth))

    @classmethod
    def explicit(cls, coeffs: Sequence, depth: int | None = None,
                 tail_bound: float | None = None) -> "SpaceSpec":
        return cls(kind="explicit", coeffs=tuple(coeffs), depth=depth, tail_bound=tail_bound)

    @property
    def resolved_depth(self) -> int:
        if self.depth is not None:
            return int(self.depth)
        return len(self.coeffs) - 1

    def to_mapping(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "depth": self.resolved_depth}
        if self.kind == "hs":
            out["s"] = self.s
        else:
            out["coeffs"] = [float(c) for c in self.coeffs]
            if self.tail_bound is not None:
                out["tail_bound"] = self.tail_bound
        return out

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SpaceSpec":
        kind = data.get("kind", "hs")
        depth = data.get("depth")
        if kind == "hs":
            return cls.hs(float(data.get("s", 0.0)), int(depth) if depth is not None else 0)
        coeffs = data.get("coeffs")
        if coeffs is None:
            raise ValueError("explicit space config needs 'coeffs'")
        if isinstance(coeffs, str):
            coeffs = [c for c in coeffs.replace(",", " ").split()]
        parsed = tuple(_parse_number(c) for c in coeffs)
        return cls.explicit(parsed, None if depth is None else int(depth), data.get("tail_bound"))

    @classmethod
    def load(cls, path: str | Path) -> "SpaceSpec":
        return cls.from_mapping(load_config(path))


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON or YAML config file into a plain dict."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        return dict(yaml.safe_load(text) or {})
    return dict(json.loads(text))


def _parse_number(value: Any):
    if isinstance(value, (int, Fraction, float)):
        return value
    text = str(value).strip()
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        return float(text)


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Coefficients ``values[0..N]`` of a kernel (``KernelA``) or Pick series (``PickB``).

    For ``PickB`` the entry ``values[0]`` is the (zero) constant term, so
    ``values[n]`` is ``b_n``.  ``tail_bound`` bounds ``sum_{n>N} |c_n|`` from above
    and ``tail_lower`` from below; ``exponent`` records ``s`` for power-law
    sequences, which lets interior kernel evaluations get a certified remainder.
    """

    values: Any
    role: Literal["KernelA", "PickB"] = "KernelA"
    tail_bound: float | None = None
    tail_lower: float = 0.0
    exponent: float | None = None

    def __post_init__(self):
        vals = self.values
        if all(isinstance(v, Rational) for v in vals):
            vals = tuple(Fraction(v) for v in vals)
        else:
            vals = np.asarray(vals, dtype=float)
            vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("a coefficient sequence needs depth >= 1")
        if self.role == "KernelA":
            if vals[0] != 1:
                raise NonUnitLeading(f"a_0 must be 1, got {vals[0]}")
            bad = [n for n, v in enumerate(vals) if not v > 0]
            if bad:
                raise NonPositive(f"kernel coefficient a_{bad[0]} = {vals[bad[0]]} is not positive")

    @property
    def depth(self) -> int:
        return len(self.values) - 1

    @property
    def exact(self) -> bool:
        return isinstance(self.values, tuple)

    @property
    def bounded(self) -> bool:
        """True when a finite tail bound certifies ``sum a_n < inf``."""
        return self.tail_bound is not None and math.isfinite(self.tail_bound)

    def as_float(self) -> np.ndarray:
        if self.exact:
            return np.array([float(v) for v in self.values])
        return self.values

    def truncate(self, depth: int) -> "CoefficientSequence":
        """Shorter sequence with tail bounds widened by the dropped terms."""
        if depth > self.depth:
            raise DepthExceeded(f"cannot truncate depth {self.depth} to {depth}")
        if depth == self.depth:
            return self
        if self.exponent is not None and self.exponent < -1 and self.role == "KernelA":
            upper, lower = _power_tail(self.exponent, depth)
        else:
            dropped = float(np.sum(np.abs(self.as_float()[depth + 1:])))
            upper = None if self.tail_bound is None else self.tail_bound + dropped
            lower = self.tail_lower + dropped if self.role == "KernelA" else 0.0
        return CoefficientSequence(self.values[: depth + 1], self.role, upper, lower, self.exponent)


@dataclass(frozen=True)
class PickReport:
    is_pick_up_to_depth: bool
    min_b: float
    first_negative_index: int | None
    depth: int
    tol: float = TOL_PICK

    def to_mapping(self) -> dict[str, Any]:
        return {
            "is_pick_up_to_depth": self.is_pick_up_to_depth,
            "min_b": self.min_b,
            "first_negative_index": self.first_negative_index,
            "depth": self.depth,
            "tol": self.tol,
        }


@dataclass(frozen=True, eq=False)
class RegularityReport:
    ratios: np.ndarray
    tail_deviation: float
    partial_sum: float
    tail_bound: float | None
    bounded_kernel: bool


def _power_tail(s: float, depth: int) -> tuple[float, float]:
    """Integral-comparison bracket for ``sum_{n>depth} (n+1)**s`` with ``s < -1``."""
    upper = (depth + 1) ** (s + 1) / (-s - 1)
    lower = (depth + 2) ** (s + 1) / (-s - 1)
    return upper, lower


def hs_coeffs(s: float, depth: int, exact: bool = False) -> CoefficientSequence:
    """``a_n = (n+1)**s`` for ``n = 0..depth``.

    ``exact=True`` returns Fractions and needs an integral ``s``.
    """
    s = float(s)
    n1 = np.arange(1, depth + 2)
    if exact:
        if not s.is_integer():
            raise ValueError("exact coefficients need an integral exponent")
        k = int(s)
        values = tuple(Fraction(int(m) ** k) if k >= 0 else Fraction(1, int(m) ** -k) for m in n1)
    else:
        values = n1.astype(float) ** s
    if s < -1:
        upper, lower = _power_tail(s, depth)
    else:
        upper, lower = None, 0.0
    return CoefficientSequence(values, "KernelA", upper, lower, s)


def coeffs_a(spec: SpaceSpec, exact: bool = False) -> CoefficientSequence:
    """Kernel coefficients for a :class:`SpaceSpec`.

    Raises :class:`NonUnitLeading` or :class:`NonPositive` for invalid
    explicit lists and :class:`DepthExceeded` if the list is shorter than the
    requested depth.
    """
    depth = spec.resolved_depth
    if spec.kind == "hs":
        return hs_coeffs(spec.s, depth, exact=exact)
    if depth > len(spec.coeffs) - 1:
        raise DepthExceeded(f"depth {depth} needs {depth + 1} coefficients, got {len(spec.coeffs)}")
    values = spec.coeffs[: depth + 1]
    if not exact and not all(isinstance(v, Rational) for v in values):
        values = [float(v) for v in values]
    seq = CoefficientSequence(values, "KernelA", spec.tail_bound, 0.0, None)
    if spec.tail_bound is not None and len(spec.coeffs) - 1 > depth:
        # user bound refers to the full list; account for the dropped terms
        full = CoefficientSequence(spec.coeffs, "KernelA", spec.tail_bound, 0.0, None)
        seq = full.truncate(depth)
    return seq


def invert_to_b(a: CoefficientSequence) -> CoefficientSequence:
    """Pick coefficients ``b_1..b_N`` from ``1 - 1/A(z)``.

    Uses the reciprocal recursion ``c_0 = 1``, ``c_n = -sum_{k=1}^n a_k c_{n-k}``
    and ``b_n = -c_n``.  Exact when ``a`` is rational.
    """
    if a.role != "KernelA":
        raise ValueError("invert_to_b expects kernel coefficients")
    N = a.depth
    if a.exact:
        av = a.values
        c = [Fraction(1)] + [Fraction(0)] * N
        for n in range(1, N + 1):
            c[n] = -sum(av[k] * c[n - k] for k in range(1, n + 1))
        b = tuple([Fraction(0)] + [-x for x in c[1:]])
        return CoefficientSequence(b, "PickB")
    av = a.values
    c = np.zeros(N + 1)
    c[0] = 1.0
    for n in range(1, N + 1):
        c[n] = -np.dot(av[1 : n + 1], c[n - 1 :: -1])
    b = -c
    b[0] = 0.0
    return CoefficientSequence(b, "PickB")


def reciprocal_residual(a: CoefficientSequence, b: CoefficientSequence | None = None):
    """Max coefficient deviation of ``A(z) * (1 - B(z))`` from 1 through degree N.

    Computed by direct polynomial multiplication, independently of the
    recursion in :func:`invert_to_b`.  Returns a Fraction in exact mode.
    """
    if b is None:
        b = invert_to_b(a)
    N = min(a.depth, b.depth)
    if a.exact and b.exact:
        one_minus_b = [Fraction(1)] + [-x for x in b.values[1 : N + 1]]
        worst = Fraction(0)
        for m in range(N + 1):
            coef = sum(a.values[i] * one_minus_b[m - i] for i in range(m + 1))
            worst = max(worst, abs(coef - (1 if m == 0 else 0)))
        return worst
    one_minus_b = -b.as_float()[: N + 1].copy()
    one_minus_b[0] = 1.0
    prod = np.convolve(a.as_float()[: N + 1], one_minus_b)[: N + 1]
    prod[0] -= 1.0
    return float(np.max(np.abs(prod)))


def pick_check(a: CoefficientSequence, tol: float = TOL_PICK) -> PickReport:
    b = invert_to_b(a)
    bv = b.as_float()[1:]
    negative = np.nonzero(bv < -tol)[0]
    first = int(negative[0]) + 1 if negative.size else None
    min_b = float(bv.min())
    return PickReport(min_b >= -tol, min_b, first, a.depth, tol)


def _interior_tail(a: CoefficientSequence, r: float) -> float:
    """Certified bound on ``sum_{n>N} a_n r^n`` for ``0 <= r < 1``."""
    N = a.depth
    rN = r ** (N + 1)
    best = math.inf
    if a.tail_bound is not None:
        best = a.tail_bound * rN
    s = a.exponent
    if s is not None and r < 1:
        a_next = (N + 2) ** s
        if s <= 0:
            best = min(best, a_next * rN / (1 - r))
        else:
            q = ((N + 3) / (N + 2)) ** s * r
            if q < 1:
                best = min(best, a_next * rN / (1 - q))
    return best


def kernel_value(a: CoefficientSequence, z: complex, w: complex) -> tuple[complex, float]:
    """Truncated ``K(z, w)`` and a certified bound on the neglected tail.

    At ``|z||w| = 1`` the sequence must carry a tail bound, otherwise
    :class:`UnboundedAtBoundary` is raised.
    """
    z, w = complex(z), complex(w)
    if abs(z) > 1 + _BOUNDARY_SLACK or abs(w) > 1 + _BOUNDARY_SLACK:
        raise ValueError("kernel points must lie in the closed unit disc")
    x = z * w.conjugate()
    r = abs(x)
    if w == 0 or z == 0:
        return complex(a.as_float()[0]), 0.0
    if r >= 1 - _BOUNDARY_SLACK:
        if not a.bounded:
            raise UnboundedAtBoundary("boundary kernel evaluation needs a tail bound")
        err = a.tail_bound
    else:
        err = _interior_tail(a, r)
    powers = x ** np.arange(a.depth + 1)
    return complex(np.dot(a.as_float(), powers)), float(err)


def kernel_bounds_at_one(a: CoefficientSequence) -> tuple[float, float]:
    """Bracket ``[lo, hi]`` containing ``K(1, 1) = sum a_n``."""
    if not a.bounded:
        raise UnboundedAtBoundary("K(1,1) is only bracketed for bounded kernels")
    partial = float(np.sum(a.as_float()))
    return partial + a.tail_lower, partial + a.tail_bound


def regularity_report(a: CoefficientSequence) -> RegularityReport:
    v = a.as_float()
    ratios = v[:-1] / v[1:]
    return RegularityReport(
        ratios=ratios,
        tail_deviation=float(abs(ratios[-1] - 1.0)),
        partial_sum=float(v.sum()),
        tail_bound=a.tail_bound,
        bounded_kernel=a.bounded,
    )


def default_sweep(depth: int) -> tuple[int, ...]:
    return tuple(sorted({max(1, depth // 8), max(1, depth // 4), max(1, depth // 2), depth}))


def b_sum_identity_check(
    a: CoefficientSequence, depths: Sequence[int] | None = None
) -> np.ndarray:
    """Residuals ``|(1 - sum_{n<=N} b_n) - 1/K_N(1,1)|`` over a depth sweep.

    Both sides come from independent computations: the left from the
    inverted series, the right from the direct partial kernel sum.
    """
    if not a.bounded:
        raise UnboundedAtBoundary("the b-sum identity needs a bounded kernel")
    depths = default_sweep(a.depth) if depths is None else tuple(depths)
    if max(depths) > a.depth:
        raise DepthExceeded(f"sweep depth {max(depths)} exceeds {a.depth}")
    b = invert_to_b(a.truncate(max(depths))).as_float()
    av = a.as_float()
    out = []
    for N in depths:
        lhs = 1.0 - float(np.sum(b[1 : N + 1]))
        rhs = 1.0 / float(np.sum(av[: N + 1]))
        out.append(abs(lhs - rhs))
    return np.array(out)
