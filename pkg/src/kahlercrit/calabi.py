"""Diastasis extraction, ambient transforms and coefficient matrices."""

from __future__ import annotations

from dataclasses import dataclass

from .backend import Backend, parse_rational
from .errors import NotHermitianError, TruncationError
from .series import (BidegreeSeries, UnivariateTaylor, compose_analytic,
                     monomial_label, monomials_of_degree)


@dataclass(frozen=True)
class DiastasisExpansion:
    """A Hermitian series whose pure (holomorphic or antiholomorphic) part is zero."""

    series: BidegreeSeries

    def __post_init__(self):
        for mj, mk in self.series.terms:
            if not any(mj) or not any(mk):
                raise ValueError(
                    f"diastasis has a border coefficient at {mj},{mk}")

    @property
    def n(self):
        return self.series.n

    @property
    def order(self):
        return self.series.order


def diastasis(phi: BidegreeSeries, tol=0) -> DiastasisExpansion:
    """Diastasis at the expansion center.

    ``D(z) = Phi(z, zb) - Phi(z, 0) - Phi(0, zb) + Phi(0, 0)``, which amounts
    to dropping every coefficient with ``mj = 0`` or ``mk = 0``.
    """
    if not phi.is_hermitian(tol):
        raise NotHermitianError("potential expansion is not Hermitian")
    return DiastasisExpansion(phi.filter(lambda mj, mk: any(mj) and any(mk)))


@dataclass(frozen=True)
class AmbientSpace:
    """Target space form: flat, or curvature ``4b`` with ``b != 0``."""

    kind: str = "flat"
    b: object = None

    def __post_init__(self):
        if self.kind not in ("flat", "space-form"):
            raise ValueError(f"unknown ambient kind {self.kind!r}")
        if self.kind == "space-form" and (self.b is None or self.b == 0):
            raise ValueError("a space form needs b != 0; use the flat ambient for b = 0")

    @classmethod
    def flat(cls):
        return cls("flat")

    @classmethod
    def space_form(cls, b):
        return cls("space-form", parse_rational(b) if isinstance(b, (str, int)) else b)

    @classmethod
    def projective(cls):
        return cls.space_form(1)

    @classmethod
    def hyperbolic(cls):
        return cls.space_form(-1)

    @classmethod
    def parse(cls, text: str) -> "AmbientSpace":
        """``flat``, ``projective``, ``hyperbolic`` or ``b=<value>``."""
        text = text.strip()
        if text == "flat":
            return cls.flat()
        if text == "projective":
            return cls.projective()
        if text == "hyperbolic":
            return cls.hyperbolic()
        if text.startswith("b="):
            b = parse_rational(text[2:])
            if b == 0:
                raise ValueError("b=0 is the flat ambient; write 'flat'")
            return cls.space_form(b)
        raise ValueError(f"unknown ambient {text!r}")

    @property
    def curvature(self):
        return 0 if self.kind == "flat" else self.b

    def __str__(self):
        if self.kind == "flat":
            return "flat"
        if self.b == 1:
            return "projective"
        if self.b == -1:
            return "hyperbolic"
        return f"b={self.b}"


def ambient_function(b, order: int, backend: Backend) -> UnivariateTaylor:
    """Taylor coefficients of ``(exp(b t) - 1) / b``: ``b**(k-1) / k!``."""
    b = backend.convert(b)
    coeffs = [backend.zero, backend.one]
    for k in range(2, order + 1):
        coeffs.append(coeffs[-1] * b / k)
    return UnivariateTaylor(tuple(coeffs[:order + 1]), backend)


def ambient_series(D: DiastasisExpansion, ambient: AmbientSpace) -> BidegreeSeries:
    """The series whose coefficient matrix Calabi's criterion tests.

    Flat: ``D`` itself. Space form of curvature ``4b``: ``(exp(b D) - 1) / b``.
    """
    S = D.series if isinstance(D, DiastasisExpansion) else D
    if ambient.kind == "flat":
        return S
    return compose_analytic(ambient_function(ambient.b, max(S.order, 1), S.backend), S)


def monomial_ordering(n: int, degree: int) -> list:
    """Multi-indices of total degree ``<= degree`` in graded lex order."""
    if n < 1 or degree < 0:
        raise ValueError("need n >= 1 and degree >= 0")
    out = []
    for d in range(degree + 1):
        out.extend(monomials_of_degree(n, d))
    return out


@dataclass(frozen=True)
class CoefficientMatrix:
    """Hermitian matrix ``entries[j][k] = coefficient(ordering[j], ordering[k])``."""

    ordering: tuple
    entries: tuple
    degree: int
    backend: Backend
    ambient: AmbientSpace = AmbientSpace.flat()

    @property
    def size(self) -> int:
        return len(self.ordering)

    @property
    def labels(self) -> list:
        return [monomial_label(m) for m in self.ordering]

    def __getitem__(self, jk):
        j, k = jk
        return self.entries[j][k]

    def leading(self, degree: int) -> "CoefficientMatrix":
        """Leading principal submatrix over the monomials of degree ``<= degree``."""
        if degree > self.degree:
            raise TruncationError("submatrix degree exceeds matrix degree")
        size = sum(1 for m in self.ordering if sum(m) <= degree)
        return CoefficientMatrix(
            self.ordering[:size], tuple(r[:size] for r in self.entries[:size]),
            degree, self.backend, self.ambient)

    def submatrix(self, indices) -> list:
        return [[self.entries[i][j] for j in indices] for i in indices]

    def is_hermitian(self, tol=0) -> bool:
        be = self.backend
        for i, row in enumerate(self.entries):
            for j in range(i, len(row)):
                diff = row[j] - self.entries[j][i].conjugate()
                if (be.abs(diff) > tol) if tol else diff != 0:
                    return False
        return True

    @classmethod
    def from_rows(cls, rows, backend=Backend.exact(), degree=None, ordering=None,
                  ambient=AmbientSpace.flat()):
        """Wrap a plain square matrix (ordering defaults to ``range(size)``)."""
        rows = tuple(tuple(backend.convert(x) for x in r) for r in rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix must be square")
        ordering = tuple(ordering) if ordering is not None else tuple(
            (i,) for i in range(len(rows)))
        return cls(ordering, rows, degree if degree is not None else 0, backend, ambient)


def coefficient_matrix(S, degree: int, ambient: AmbientSpace | None = None) -> CoefficientMatrix:
    """Coefficient matrix of ``S`` over all monomials of degree ``<= degree``.

    ``S.order`` must be at least ``2 * degree``; missing coefficients are never
    zero-filled.
    """
    if isinstance(S, DiastasisExpansion):
        S = S.series
    if S.order < 2 * degree:
        raise TruncationError(
            f"degree-{degree} matrix needs series order {2 * degree}, have {S.order}")
    ordering = tuple(monomial_ordering(S.n, degree))
    zero = S.backend.zero
    terms = S.terms
    entries = tuple(tuple(terms.get((mj, mk), zero) for mk in ordering)
                    for mj in ordering)
    return CoefficientMatrix(ordering, entries, degree, S.backend,
                             ambient or AmbientSpace.flat())
