"""Truncated bidegree power series and univariate Taylor helpers.

A :class:`BidegreeSeries` in ``n`` complex variables stores the sparse
coefficients of ``sum a[mj, mk] z**mj * conj(z)**mk`` with
``|mj| + |mk| <= order``. Values are immutable; arithmetic returns new series.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Tuple

from .backend import Backend, check_same
from .errors import BackendError, DimensionError, TruncationError

MultiIndex = Tuple[int, ...]
Key = Tuple[MultiIndex, MultiIndex]


# -- multi-indices -------------------------------------------------------

def multi_index(exponents: Iterable[int]) -> MultiIndex:
    m = tuple(int(e) for e in exponents)
    if any(e < 0 for e in m):
        raise ValueError(f"negative exponent in {m}")
    return m


def degree(m: MultiIndex) -> int:
    return sum(m)


def graded_lex_key(m: MultiIndex):
    """Sort key: total degree first, then lexicographic with variable 1 highest.

    ``sorted(ms, key=graded_lex_key)`` lists ``1, z1, z2, z1^2, z1 z2, z2^2``.
    """
    return (sum(m), tuple(-e for e in m))


def unit(n: int, i: int, power: int = 1) -> MultiIndex:
    return tuple(power if j == i else 0 for j in range(n))


def monomials_of_degree(n: int, d: int):
    """All multi-indices of total degree ``d`` in graded lex order."""
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in monomials_of_degree(n - 1, d - first):
            out.append((first,) + rest)
    return out


def monomial_label(m: MultiIndex, var: str = "z") -> str:
    parts = []
    for i, e in enumerate(m, start=1):
        if e == 1:
            parts.append(f"{var}{i}")
        elif e > 1:
            parts.append(f"{var}{i}^{e}")
    return "*".join(parts) if parts else "1"


def _add_idx(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


# -- bidegree series -----------------------------------------------------

class BidegreeSeries:
    """Truncated power series in ``z`` and ``conj(z)``.

    Parameters
    ----------
    n : int
        Number of complex variables.
    order : int
        Truncation order in the combined degree ``|mj| + |mk|``.
    terms : mapping
        ``{(mj, mk): coefficient}``. Zero coefficients are dropped.
    backend : Backend
    """

    __slots__ = ("n", "order", "backend", "_terms")

    def __init__(self, n: int, order: int, terms: Mapping | None = None,
                 backend: Backend = Backend.exact()):
        if n < 1:
            raise DimensionError("at least one variable is required")
        if order < 0:
            raise ValueError("order must be nonnegative")
        clean = {}
        for (mj, mk), value in (terms or {}).items():
            mj, mk = multi_index(mj), multi_index(mk)
            if len(mj) != n or len(mk) != n:
                raise DimensionError(f"multi-index length differs from n={n}")
            if sum(mj) + sum(mk) > order:
                raise TruncationError(
                    f"term {mj},{mk} exceeds truncation order {order}")
            value = backend.convert(value)
            if value != 0:
                clean[(mj, mk)] = value
        self.n = n
        self.order = order
        self.backend = backend
        self._terms = clean

    @classmethod
    def _raw(cls, n, order, terms, backend):
        # Trusted constructor: terms are already canonical.
        obj = cls.__new__(cls)
        obj.n, obj.order, obj.backend = n, order, backend
        obj._terms = {k: v for k, v in terms.items() if v != 0}
        return obj

    @classmethod
    def zero(cls, n, order, backend=Backend.exact()):
        return cls._raw(n, order, {}, backend)

    @classmethod
    def constant(cls, value, n, order, backend=Backend.exact()):
        z = (0,) * n
        return cls._raw(n, order, {(z, z): backend.convert(value)}, backend)

    @classmethod
    def monomial(cls, mj, mk, value=1, n=None, order=None,
                 backend=Backend.exact()):
        mj, mk = multi_index(mj), multi_index(mk)
        n = len(mj) if n is None else n
        order = sum(mj) + sum(mk) if order is None else order
        return cls(n, order, {(mj, mk): value}, backend)

    # -- access --

    @property
    def terms(self) -> Mapping[Key, object]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def coefficient(self, mj: Sequence[int], mk: Sequence[int]):
        """Coefficient of ``z**mj conj(z)**mk``.

        Raises :class:`TruncationError` when the query lies beyond the
        truncation order, since such a coefficient is unknown rather than 0.
        """
        mj, mk = multi_index(mj), multi_index(mk)
        if len(mj) != self.n or len(mk) != self.n:
            raise DimensionError("multi-index length differs from n")
        if sum(mj) + sum(mk) > self.order:
            raise TruncationError(
                f"coefficient {mj},{mk} is not determined at order {self.order}")
        return self._terms.get((mj, mk), self.backend.zero)

    @property
    def constant_term(self):
        z = (0,) * self.n
        return self._terms.get((z, z), self.backend.zero)

    def min_degree(self) -> int | None:
        if not self._terms:
            return None
        return min(sum(a) + sum(b) for a, b in self._terms)

    def is_hermitian(self, tol=0) -> bool:
        for (mj, mk), v in self._terms.items():
            w = self._terms.get((mk, mj), self.backend.zero)
            if tol:
                if self.backend.abs(v - w.conjugate()) > tol:
                    return False
            elif v != w.conjugate():
                return False
        return True

    # -- arithmetic --

    def _check(self, other: "BidegreeSeries"):
        if not isinstance(other, BidegreeSeries):
            raise TypeError(f"expected BidegreeSeries, got {type(other).__name__}")
        check_same(self.backend, other.backend)
        if self.n != other.n:
            raise DimensionError(f"variable count mismatch: {self.n} vs {other.n}")
        if self.order != other.order:
            raise DimensionError(
                f"truncation order mismatch: {self.order} vs {other.order}")

    def __add__(self, other):
        if not isinstance(other, BidegreeSeries):
            return self + BidegreeSeries.constant(
                other, self.n, self.order, self.backend)
        self._check(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0) + v
        return BidegreeSeries._raw(self.n, self.order, out, self.backend)

    __radd__ = __add__

    def __neg__(self):
        return BidegreeSeries._raw(
            self.n, self.order, {k: -v for k, v in self._terms.items()},
            self.backend)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "BidegreeSeries":
        c = self.backend.convert(c)
        return BidegreeSeries._raw(
            self.n, self.order, {k: c * v for k, v in self._terms.items()},
            self.backend)

    def __mul__(self, other):
        if not isinstance(other, BidegreeSeries):
            return self.scale(other)
        self._check(other)
        order = self.order
        by_deg: dict[int, list] = {}
        for (mj, mk), v in other._terms.items():
            by_deg.setdefault(sum(mj) + sum(mk), []).append((mj, mk, v))
        out: dict = {}
        for (aj, ak), av in self._terms.items():
            room = order - sum(aj) - sum(ak)
            for d, bucket in by_deg.items():
                if d > room:
                    continue
                for bj, bk, bv in bucket:
                    key = (_add_idx(aj, bj), _add_idx(ak, bk))
                    out[key] = out.get(key, 0) + av * bv
        return BidegreeSeries._raw(self.n, order, out, self.backend)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = BidegreeSeries.constant(1, self.n, self.order, self.backend)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def truncate(self, order: int) -> "BidegreeSeries":
        if order > self.order:
            raise TruncationError("cannot raise the truncation order")
        return BidegreeSeries._raw(
            self.n, order,
            {k: v for k, v in self._terms.items()
             if sum(k[0]) + sum(k[1]) <= order},
            self.backend)

    def filter(self, keep) -> "BidegreeSeries":
        """Series with only the terms where ``keep(mj, mk)`` is true."""
        return BidegreeSeries._raw(
            self.n, self.order,
            {k: v for k, v in self._terms.items() if keep(*k)}, self.backend)

    def __eq__(self, other):
        if not isinstance(other, BidegreeSeries):
            return NotImplemented
        return (self.n == other.n and self.order == other.order
                and self.backend == other.backend
                and self._terms == other._terms)

    __hash__ = None

    def sorted_items(self):
        return sorted(self._terms.items(),
                      key=lambda kv: (graded_lex_key(kv[0][0]),
                                      graded_lex_key(kv[0][1])))

    def __repr__(self):
        fmt = self.backend.format
        body = " + ".join(
            f"({fmt(v)})*{monomial_label(mj)}*{monomial_label(mk, 'zb')}"
            for (mj, mk), v in self.sorted_items()) or "0"
        return f"BidegreeSeries(n={self.n}, order={self.order}, {body})"


def series_add(A: BidegreeSeries, B: BidegreeSeries) -> BidegreeSeries:
    return A + B


def series_mul(A: BidegreeSeries, B: BidegreeSeries) -> BidegreeSeries:
    return A * B


def coefficient(S: BidegreeSeries, mj, mk):
    return S.coefficient(mj, mk)


def evaluate_polarized(S: BidegreeSeries, z: Sequence, w: Sequence):
    """Evaluate ``sum a[mj, mk] z**mj conj(w)**mk``.

    The truncation error is not bounded here: callers pick ``|z|, |w|`` small
    enough for the neglected terms to sit below their reporting precision.
    The exact backend with rational real points returns a Fraction; complex
    points on the exact backend are evaluated in double precision.
    """
    if len(z) != S.n or len(w) != S.n:
        raise DimensionError(f"points must have {S.n} coordinates")
    be = S.backend
    if be.is_exact:
        try:
            zs = [be.convert(x) for x in z]
            wb = [be.convert(x) for x in w]
        except BackendError:
            zs = [complex(x) for x in z]
            wb = [complex(x).conjugate() for x in w]
            coef = complex
        else:
            coef = None
    else:
        zs = [be.convert(x) for x in z]
        wb = [be.convert(x).conjugate() for x in w]
        coef = None
    total = 0
    for (mj, mk), v in S.items():
        term = coef(v) if coef else v
        for x, e in zip(zs, mj):
            if e:
                term *= x ** e
        for x, e in zip(wb, mk):
            if e:
                term *= x ** e
        total += term
    return total if coef else be.convert(total)


# -- univariate Taylor polynomials ---------------------------------------

@dataclass(frozen=True)
class UnivariateTaylor:
    """Coefficients ``coeffs[k]`` of ``t**k`` up to ``order = len(coeffs) - 1``."""

    coeffs: tuple
    backend: Backend = Backend.exact()

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a Taylor polynomial needs at least one coefficient")
        object.__setattr__(
            self, "coeffs", tuple(self.backend.convert(c) for c in self.coeffs))

    @classmethod
    def from_list(cls, coeffs, backend=Backend.exact()):
        return cls(tuple(coeffs), backend)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k] if k <= self.order else self.backend.zero

    def truncate(self, order):
        if order > self.order:
            raise TruncationError("cannot raise the truncation order")
        return UnivariateTaylor(self.coeffs[:order + 1], self.backend)

    def __add__(self, other):
        check_same(self.backend, other.backend)
        order = min(self.order, other.order)
        return UnivariateTaylor(
            tuple(self[k] + other[k] for k in range(order + 1)), self.backend)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = self.backend.convert(c)
        return UnivariateTaylor(tuple(c * x for x in self.coeffs), self.backend)

    def __mul__(self, other):
        if not isinstance(other, UnivariateTaylor):
            return self.scale(other)
        check_same(self.backend, other.backend)
        order = min(self.order, other.order)
        out = [self.backend.zero] * (order + 1)
        for i, a in enumerate(self.coeffs[:order + 1]):
            if a == 0:
                continue
            for j in range(order + 1 - i):
                out[i + j] += a * other.coeffs[j]
        return UnivariateTaylor(tuple(out), self.backend)

    def compose(self, g: "UnivariateTaylor") -> "UnivariateTaylor":
        """``self(g(t))`` by Horner's rule; requires ``g(0) = 0``."""
        check_same(self.backend, g.backend)
        if g.coeffs[0] != 0:
            raise ValueError("inner series must vanish at 0")
        order = min(self.order, g.order)
        g = g.truncate(order)
        result = UnivariateTaylor((self[order],) + (0,) * order, self.backend)
        for k in range(order - 1, -1, -1):
            result = result * g
            result = UnivariateTaylor(
                (result.coeffs[0] + self[k],) + result.coeffs[1:], self.backend)
        return result

    def reciprocal(self) -> "UnivariateTaylor":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        inv0 = self.backend.one / c0
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = sum((self.coeffs[i] * out[k - i] for i in range(1, k + 1)),
                      self.backend.zero)
            out.append(-acc * inv0)
        return UnivariateTaylor(tuple(out), self.backend)

    def __pow__(self, k: int):
        result = UnivariateTaylor((1,) + (0,) * self.order, self.backend)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, UnivariateTaylor):
            return NotImplemented
        return self.backend == other.backend and self.coeffs == other.coeffs

    __hash__ = None


def binomial_series(beta, order: int, backend: Backend = Backend.exact()) -> UnivariateTaylor:
    """Taylor coefficients of ``(1 + t)**beta`` through ``t**order``."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    beta = backend.convert(beta)
    coeffs = [backend.one]
    for k in range(1, order + 1):
        coeffs.append(coeffs[-1] * (beta - (k - 1)) / k)
    return UnivariateTaylor(tuple(coeffs), backend)


def exp_series(b, order: int, backend: Backend = Backend.exact()) -> UnivariateTaylor:
    """Coefficients of ``exp(b t)``."""
    b = backend.convert(b)
    coeffs = [backend.one]
    for k in range(1, order + 1):
        coeffs.append(coeffs[-1] * b / k)
    return UnivariateTaylor(tuple(coeffs), backend)


def reversion(f: UnivariateTaylor) -> UnivariateTaylor:
    """Compositional inverse of ``f`` by Lagrange inversion.

    With ``f(t) = t h(t)`` and ``h(0) != 0``, the coefficient of ``s**k`` in
    the inverse is ``[t**(k-1)] h(t)**(-k) / k``.
    """
    if f.coeffs[0] != 0:
        raise ValueError("reversion needs f(0) = 0")
    if f.order < 1 or f[1] == 0:
        raise ZeroDivisionError("reversion needs a nonzero linear coefficient")
    be = f.backend
    N = f.order
    h = UnivariateTaylor(f.coeffs[1:], be)           # f(t) / t, order N-1
    q = h.reciprocal()
    out = [be.zero]
    qk = UnivariateTaylor((1,) + (0,) * (N - 1), be)
    for k in range(1, N + 1):
        qk = qk * q
        out.append(qk[k - 1] / k)
    return UnivariateTaylor(tuple(out), be)


def compose_analytic(f: UnivariateTaylor, S: BidegreeSeries) -> BidegreeSeries:
    """``f(S)`` truncated to ``S.order``, by Horner evaluation.

    ``S`` must have zero constant term. Only the powers ``S**k`` with
    ``k * mindeg(S) <= S.order`` survive truncation, so ``f`` must reach at
    least that order (``f.order >= S.order`` always suffices).
    """
    check_same(f.backend, S.backend)
    if S.constant_term != 0:
        raise ValueError("compose_analytic needs a series with zero constant term")
    lo = S.min_degree()
    needed = 0 if lo is None else S.order // lo
    if f.order < needed:
        raise TruncationError(
            f"outer series of order {f.order} is too short; need {needed}")
    result = BidegreeSeries.constant(f[needed], S.n, S.order, S.backend)
    for k in range(needed - 1, -1, -1):
        result = result * S + f[k]
    return result


def lift_radial(g: UnivariateTaylor, order: int) -> BidegreeSeries:
    """One-variable series ``sum g[k] (z conj(z))**k`` truncated to ``order``."""
    terms = {((k,), (k,)): g[k] for k in range(min(g.order, order // 2) + 1)}
    return BidegreeSeries(1, order, terms, g.backend)


def random_series(rng, n: int, order: int, density: float = 0.5, hermitian=True,
                  zero_constant=False, backend=Backend.exact(), max_num=5,
                  max_den=4) -> BidegreeSeries:
    """Random sparse series with small rational coefficients (testing aid)."""
    keys = []
    for total in range(order + 1):
        for dj in range(total + 1):
            for mj in monomials_of_degree(n, dj):
                for mk in monomials_of_degree(n, total - dj):
                    keys.append((mj, mk))
    terms = {}
    for mj, mk in keys:
        if zero_constant and sum(mj) + sum(mk) == 0:
            continue
        if hermitian and (mk, mj) in terms:
            terms[(mj, mk)] = terms[(mk, mj)]
            continue
        if rng.random() < density:
            terms[(mj, mk)] = Fraction(rng.randint(-max_num, max_num),
                                       rng.randint(1, max_den))
    if hermitian:
        for (mj, mk), v in list(terms.items()):
            terms[(mk, mj)] = v
    return BidegreeSeries(n, order, terms, backend)


__all__ = [
    "MultiIndex", "multi_index", "degree", "graded_lex_key", "unit",
    "monomials_of_degree", "monomial_label", "BidegreeSeries", "series_add",
    "series_mul", "coefficient", "evaluate_polarized", "UnivariateTaylor",
    "binomial_series", "exp_series", "reversion", "compose_analytic",
    "lift_radial", "random_series",
]
