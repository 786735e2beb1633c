"""Coefficient fields: exact rationals or fixed-precision big floats.

Every series, matrix and verdict carries a :class:`Backend`. Scalars are plain
``fractions.Fraction`` values on the exact backend and ``mpf``/``mpc`` values
from a private mpmath context on the float backend, so that precision settings
never leak through the global ``mpmath.mp`` context.
"""

from __future__ import annotations

import functools
import numbers
from dataclasses import dataclass
from fractions import Fraction

from mpmath.ctx_mp import MPContext

from .errors import BackendError

DEFAULT_PRECISION = 256


@functools.lru_cache(maxsize=None)
def _context(prec: int) -> MPContext:
    # Contexts are created once per precision and never mutated afterwards.
    ctx = MPContext()
    ctx.prec = prec
    return ctx


def parse_rational(text) -> Fraction:
    """Parse ``"3"``, ``"-0.25"``, ``"1e-3"`` or ``"p/q"`` into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


@dataclass(frozen=True)
class Backend:
    """Coefficient backend tag.

    Parameters
    ----------
    kind : {"exact", "float"}
    prec : int
        Binary precision of the float backend; ignored (kept at 0) for exact.
    """

    kind: str = "exact"
    prec: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "float"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "float" and self.prec < 2:
            raise ValueError("float backend needs a precision of at least 2 bits")
        if self.kind == "exact" and self.prec != 0:
            object.__setattr__(self, "prec", 0)

    @classmethod
    def exact(cls) -> "Backend":
        return cls("exact")

    @classmethod
    def float(cls, prec: int = DEFAULT_PRECISION) -> "Backend":
        return cls("float", prec)

    @classmethod
    def parse(cls, text: str) -> "Backend":
        """Parse ``"exact"``, ``"float"`` or ``"float:<bits>"``."""
        text = text.strip()
        if text == "exact":
            return cls.exact()
        if text == "float":
            return cls.float()
        if text.startswith("float:"):
            try:
                return cls.float(int(text[6:]))
            except ValueError as exc:
                raise ValueError(f"bad float precision in {text!r}") from exc
        raise ValueError(f"unknown backend {text!r}")

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    @property
    def ctx(self) -> MPContext:
        if self.is_exact:
            raise BackendError("the exact backend has no mpmath context")
        return _context(self.prec)

    def __str__(self):
        return "exact" if self.is_exact else f"float:{self.prec}"

    # -- scalar handling -------------------------------------------------

    @property
    def zero(self):
        return Fraction(0) if self.is_exact else self.ctx.mpf(0)

    @property
    def one(self):
        return Fraction(1) if self.is_exact else self.ctx.mpf(1)

    def convert(self, value):
        """Bring ``value`` into this backend's coefficient field.

        Exact conversion accepts integers, Fractions and rational strings;
        Python floats, mpmath values or complex numbers raise
        :class:`BackendError` rather than being silently rationalized.
        """
        if self.is_exact:
            if isinstance(value, bool):
                raise BackendError("booleans are not scalars")
            if isinstance(value, (int, Fraction)):
                return Fraction(value)
            if isinstance(value, str):
                return parse_rational(value)
            if isinstance(value, numbers.Complex) and not isinstance(value, numbers.Real):
                raise BackendError("the exact backend holds real rationals only")
            raise BackendError(
                f"cannot convert {type(value).__name__} to an exact rational")
        ctx = self.ctx
        if isinstance(value, Fraction):
            return ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            v = value.strip()
            if v.endswith("j"):
                return ctx.mpc(complex(v))
            if "/" in v:
                return self.convert(parse_rational(v))
            return ctx.mpf(v)
        if isinstance(value, (int, float)):
            return ctx.mpf(value)
        if isinstance(value, complex):
            return ctx.mpc(value)
        # mpmath values, possibly from another context: re-round here.
        if value.imag != 0:
            return ctx.mpc(value.real, value.imag)
        return ctx.mpf(value.real)

    def owns(self, value) -> bool:
        if self.is_exact:
            return isinstance(value, Fraction)
        ctx = self.ctx
        return isinstance(value, (ctx.mpf, ctx.mpc))

    def power(self, base, exponent):
        """``base ** exponent`` on the principal branch.

        The exact backend only admits integer exponents.
        """
        if self.is_exact:
            exponent = Fraction(exponent)
            if exponent.denominator != 1:
                raise BackendError(
                    f"exact backend cannot raise to the non-integer power {exponent}")
            if base == 0 and exponent < 0:
                raise ZeroDivisionError("zero to a negative power")
            return Fraction(base) ** int(exponent)
        ctx = self.ctx
        return ctx.power(self.convert(base), self.convert(exponent))

    def sqrt(self, value):
        if self.is_exact:
            raise BackendError("square roots are not rational in general")
        return self.ctx.sqrt(value)

    def is_zero(self, value) -> bool:
        return value == 0

    def abs(self, value):
        if self.is_exact:
            return abs(value)
        return self.ctx.fabs(value) if isinstance(value, self.ctx.mpf) else abs(value)

    def real(self, value):
        if self.is_exact:
            return value
        return self.ctx.re(value)

    def conj(self, value):
        return value.conjugate()

    def format(self, value) -> str:
        """Serialize a scalar.

        Rationals print as ``"p/q"`` (``"p"`` for integers). Floats print as
        the shortest decimal that reads back to the same value at this
        precision; complex floats as ``"re+imj"``.
        """
        if self.is_exact:
            return str(value)
        ctx = self.ctx
        if isinstance(value, ctx.mpc):
            if value.imag == 0:
                return self._shortest(ctx.mpf(value.real))
            im = self._shortest(ctx.mpf(value.imag))
            sign = "" if im.startswith("-") else "+"
            return f"{self._shortest(ctx.mpf(value.real))}{sign}{im}j"
        return self._shortest(value)

    def _shortest(self, x) -> str:
        ctx = self.ctx
        if x == 0:
            return "0"
        limit = int(self.prec * 0.30103) + 3
        for digits in range(1, limit + 1):
            s = ctx.nstr(x, digits, min_fixed=-4, max_fixed=16)
            if ctx.mpf(s) == x:
                return s
        return ctx.nstr(x, limit)

    def parse_scalar(self, text: str):
        """Inverse of :meth:`format`."""
        if self.is_exact:
            return parse_rational(text)
        return self.convert(text)


def check_same(*backends: Backend) -> Backend:
    first = backends[0]
    for other in backends[1:]:
        if other != first:
            raise BackendError(f"backend mismatch: {first} vs {other}")
    return first
