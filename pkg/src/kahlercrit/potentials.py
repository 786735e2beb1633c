"""Kähler potentials: a small expression language and its recentred expansion.

Grammar (whitespace-insensitive)::

    pot    := ['-'] term (('+' | '-') term)*
    term   := coef '*' factor | factor
    factor := atom ['^' expo]
    atom   := 'normsq' | 'sepdecay(' arg ')' | 'raddecay(' arg ')'
            | 'taubnut_slice(' arg ')' | '(' pot ')'
    coef   := number | id | number '/' number
    arg    := id | number | number '/' number
    expo   := number | id | '(' ['-'] number ['/' number] ')'

``normsq`` is ``sum z_i conj(z_i)``, ``sepdecay(alpha)`` is
``sum_i (z_i conj(z_i))**(-alpha)``, ``raddecay(alpha)`` is
``(sum_i z_i conj(z_i))**(-alpha)`` and ``taubnut_slice(m)`` is the
one-variable Taub-NUT potential ``u**2 + m u**4`` with ``|z|**2 = exp(2 m u**2) u**2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from .backend import Backend, parse_rational
from .errors import BackendError, ExpansionError, PotentialSyntaxError
from .series import (BidegreeSeries, UnivariateTaylor, binomial_series,
                     compose_analytic, exp_series, lift_radial, reversion,
                     unit)

Number = Fraction
Value = Union[Fraction, str]      # literal or parameter name


# -- AST ---------------------------------------------------------------

@dataclass(frozen=True)
class NormSq:
    pass


@dataclass(frozen=True)
class SepDecay:
    alpha: Value


@dataclass(frozen=True)
class RadDecay:
    alpha: Value


@dataclass(frozen=True)
class TaubNutSlice:
    m: Value


@dataclass(frozen=True)
class Scale:
    coef: Value
    child: "PotentialExpr"


@dataclass(frozen=True)
class Power:
    base: "PotentialExpr"
    exponent: Value


@dataclass(frozen=True)
class Sum:
    """Signed sum; ``terms`` is a tuple of ``(sign, expr)`` with sign ±1."""

    terms: tuple


PotentialExpr = Union[NormSq, SepDecay, RadDecay, TaubNutSlice, Scale, Power, Sum]
ATOMS = ("normsq", "sepdecay", "raddecay", "taubnut_slice")


def parameters(expr) -> set:
    """Names of all parameters referenced by ``expr``."""
    if isinstance(expr, NormSq):
        return set()
    if isinstance(expr, (SepDecay, RadDecay)):
        return {expr.alpha} if isinstance(expr.alpha, str) else set()
    if isinstance(expr, TaubNutSlice):
        return {expr.m} if isinstance(expr.m, str) else set()
    if isinstance(expr, Scale):
        own = {expr.coef} if isinstance(expr.coef, str) else set()
        return own | parameters(expr.child)
    if isinstance(expr, Power):
        own = {expr.exponent} if isinstance(expr.exponent, str) else set()
        return own | parameters(expr.base)
    if isinstance(expr, Sum):
        return set().union(*(parameters(t) for _, t in expr.terms))
    raise TypeError(f"not a potential node: {expr!r}")


def atoms(expr):
    """Yield every atom node in ``expr``."""
    if isinstance(expr, (NormSq, SepDecay, RadDecay, TaubNutSlice)):
        yield expr
    elif isinstance(expr, Scale):
        yield from atoms(expr.child)
    elif isinstance(expr, Power):
        yield from atoms(expr.base)
    elif isinstance(expr, Sum):
        for _, t in expr.terms:
            yield from atoms(t)


# -- parsing -----------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int      # byte offset


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PotentialSyntaxError(
                f"unexpected character {text[pos]!r}",
                len(text[:pos].encode("utf-8")))
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), len(text[:pos].encode("utf-8"))))
        pos = m.end()
    toks.append(_Tok("end", "", len(text.encode("utf-8"))))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return PotentialSyntaxError(msg, tok.offset)

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def parse(self):
        expr = self.pot()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return expr

    def pot(self):
        terms = []
        sign = -1 if self.accept("-") else 1
        terms.append((sign, self.term()))
        while self.tok.kind == "op" and self.tok.text in "+-":
            sign = 1 if self.tok.text == "+" else -1
            self.i += 1
            terms.append((sign, self.term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Sum(tuple(terms))

    def number(self):
        tok = self.tok
        if tok.kind != "num":
            raise self.error(f"expected a number, found {tok.text or 'end of input'!r}")
        self.i += 1
        value = Fraction(tok.text)
        if self.accept("/"):
            den = self.tok
            if den.kind != "num":
                raise self.error("expected a denominator")
            self.i += 1
            d = Fraction(den.text)
            if d == 0:
                raise self.error("zero denominator", den)
            value /= d
        return value

    def term(self):
        tok = self.tok
        if tok.kind == "num":
            coef = self.number()
            self.expect("*")
            return Scale(coef, self.factor())
        if tok.kind == "id" and not self._at_atom():
            if self.peek().text == "*":
                self.i += 2
                return Scale(tok.text, self.factor())
            if self.peek().text == "(":
                raise self.error(f"unknown atom {tok.text!r}")
            raise self.error(f"{tok.text!r} is not an atom; use '{tok.text}*<atom>'")
        return self.factor()

    def _at_atom(self):
        tok = self.tok
        return tok.kind == "id" and tok.text in ATOMS

    def factor(self):
        base = self.atom()
        if self.accept("^"):
            return Power(base, self.exponent())
        return base

    def exponent(self):
        if self.tok.kind == "id":
            name = self.tok.text
            self.i += 1
            return name
        if self.accept("("):
            neg = self.accept("-")
            value = self.number()
            self.expect(")")
            return -value if neg else value
        return self.number()

    def arg(self):
        if self.tok.kind == "id":
            name = self.tok.text
            self.i += 1
            return name
        return self.number()

    def atom(self):
        tok = self.tok
        if self.accept("("):
            inner = self.pot()
            self.expect(")")
            return inner
        if tok.kind != "id":
            raise self.error(f"expected an atom, found {tok.text or 'end of input'!r}")
        name = tok.text
        if name not in ATOMS:
            raise self.error(f"unknown atom {name!r}")
        self.i += 1
        if name == "normsq":
            return NormSq()
        self.expect("(")
        arg = self.arg()
        self.expect(")")
        return {"sepdecay": SepDecay, "raddecay": RadDecay,
                "taubnut_slice": TaubNutSlice}[name](arg)


def parse_potential(text: str) -> PotentialExpr:
    """Parse potential text into an AST.

    Identifiers that are not atom names become unbound parameters.

    >>> parse_potential("1/2*normsq + a*sepdecay(alpha)")
    Sum(terms=((1, Scale(coef=Fraction(1, 2), child=NormSq())), (1, Scale(coef='a', child=SepDecay(alpha='alpha')))))
    """
    return _Parser(text).parse()


def _fmt_value(v) -> str:
    return v if isinstance(v, str) else str(v)


def format_potential(expr) -> str:
    """Print ``expr`` so that ``parse_potential`` reads back an equal tree."""
    if isinstance(expr, NormSq):
        return "normsq"
    if isinstance(expr, SepDecay):
        return f"sepdecay({_fmt_value(expr.alpha)})"
    if isinstance(expr, RadDecay):
        return f"raddecay({_fmt_value(expr.alpha)})"
    if isinstance(expr, TaubNutSlice):
        return f"taubnut_slice({_fmt_value(expr.m)})"
    if isinstance(expr, Scale):
        if isinstance(expr.coef, Fraction) and expr.coef < 0:
            raise ValueError("negative literal coefficients cannot be printed; "
                             "use a signed Sum")
        return f"{_fmt_value(expr.coef)}*{_format_factor(expr.child)}"
    if isinstance(expr, Power):
        e = expr.exponent
        if isinstance(e, Fraction) and (e < 0 or e.denominator != 1):
            es = f"({e})"
        else:
            es = _fmt_value(e)
        return f"{_format_atom(expr.base)}^{es}"
    if isinstance(expr, Sum):
        out = []
        for idx, (sign, t) in enumerate(expr.terms):
            body = format_potential(t)
            if isinstance(t, Sum):
                body = f"({body})"
            if idx == 0:
                out.append(("-" if sign < 0 else "") + body)
            else:
                out.append((" - " if sign < 0 else " + ") + body)
        return "".join(out)
    raise TypeError(f"not a potential node: {expr!r}")


def _format_atom(expr):
    if isinstance(expr, (NormSq, SepDecay, RadDecay, TaubNutSlice)):
        return format_potential(expr)
    return f"({format_potential(expr)})"


def _format_factor(expr):
    if isinstance(expr, Power):
        return format_potential(expr)
    return _format_atom(expr)


# -- parameters and centers -------------------------------------------------

class ParamBinding(dict):
    """Parameter name -> rational value, validated on construction.

    ``alpha`` must be positive, ``R`` positive and ``m`` nonnegative.
    Values may be Fractions, integers or rational strings; other numeric
    types (floats, mpmath values) are kept as-is and force the float backend.
    """

    def __init__(self, values: Mapping | None = None, **kw):
        super().__init__()
        for k, v in dict(values or {}, **kw).items():
            self[k] = v

    def __setitem__(self, key, value):
        if isinstance(value, (str, int)) and not isinstance(value, bool):
            value = parse_rational(value)
        if key == "alpha" and not value > 0:
            raise ExpansionError("alpha must be positive")
        if key == "R" and not value > 0:
            raise ExpansionError("R must be positive")
        if key == "m" and value < 0:
            raise ExpansionError("m must be nonnegative")
        super().__setitem__(key, value)

    @classmethod
    def parse(cls, text: str) -> "ParamBinding":
        """Parse ``"a=-1,alpha=1,R=10"`` (values decimal or ``p/q``)."""
        out = cls()
        for item in filter(None, (s.strip() for s in text.split(","))):
            if "=" not in item:
                raise ValueError(f"parameter {item!r} is not of the form name=value")
            name, value = (s.strip() for s in item.split("=", 1))
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                raise ValueError(f"bad parameter name {name!r}")
            out[name] = parse_rational(value)
        return out

    def merged(self, other: Mapping) -> "ParamBinding":
        out = ParamBinding(self)
        for k, v in other.items():
            out[k] = v
        return out

    def all_rational(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values())


@dataclass(frozen=True)
class CenterSpec:
    """Expansion point.

    ``style`` is ``"origin"``, ``"diagonal"`` (``p = (R, ..., R)``; ``radius``
    defaults to the bound parameter ``R``) or ``"explicit"`` (``coords``).
    """

    style: str = "diagonal"
    radius: object = None
    coords: tuple = field(default=())

    def __post_init__(self):
        if self.style not in ("origin", "diagonal", "explicit"):
            raise ValueError(f"unknown center style {self.style!r}")
        if self.style == "diagonal" and self.radius is not None and not self.radius > 0:
            raise ExpansionError("diagonal center radius must be positive")

    @classmethod
    def origin(cls):
        return cls("origin")

    @classmethod
    def diagonal(cls, radius=None):
        return cls("diagonal", None if radius is None else parse_rational(radius))

    @classmethod
    def explicit(cls, coords):
        return cls("explicit", coords=tuple(coords))

    @classmethod
    def parse(cls, text: str) -> "CenterSpec":
        """``origin``, ``diagonal``, ``diagonal:<R>`` or ``c1;c2;...``."""
        text = text.strip()
        if text == "origin":
            return cls.origin()
        if text == "diagonal":
            return cls.diagonal()
        if text.startswith("diagonal:"):
            return cls.diagonal(text[9:])
        coords = []
        for part in text.split(";"):
            part = part.strip()
            try:
                coords.append(parse_rational(part))
            except ValueError:
                coords.append(complex(part.replace(" ", "")))
        return cls.explicit(coords)

    def point(self, n: int, params: Mapping | None = None) -> tuple:
        if self.style == "origin":
            return (Fraction(0),) * n
        if self.style == "diagonal":
            r = self.radius
            if r is None:
                r = (params or {}).get("R", Fraction(10))
            return (r,) * n
        if len(self.coords) != n:
            raise ExpansionError(f"center has {len(self.coords)} coordinates, n={n}")
        return self.coords

    def is_origin(self, n, params=None) -> bool:
        return all(c == 0 for c in self.point(n, params))

    def __str__(self):
        if self.style == "origin":
            return "origin"
        if self.style == "diagonal":
            return "diagonal" if self.radius is None else f"diagonal:{self.radius}"
        return ";".join(str(c) for c in self.coords)


# -- backend selection ---------------------------------------------------------

def _resolve(v, params):
    if isinstance(v, str):
        if v not in params:
            raise ExpansionError(f"parameter {v!r} is unbound")
        return params[v]
    return v


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _is_integer(x) -> bool:
    return _is_rational(x) and Fraction(x).denominator == 1


def exact_admissible(expr, params: Mapping, center: CenterSpec, n: int) -> bool:
    """True when every coefficient of the expansion is rational.

    This needs rational parameters, a real rational center, and integer decay
    and power exponents.
    """
    for name in parameters(expr):
        if not _is_rational(_resolve(name, params)):
            return False
    if not all(_is_rational(c) for c in center.point(n, params)):
        return False
    for node in _walk(expr):
        if isinstance(node, (SepDecay, RadDecay)) and not _is_integer(
                _resolve(node.alpha, params)):
            return False
        if isinstance(node, Power) and not _is_integer(_resolve(node.exponent, params)):
            return False
    return True


def select_backend(expr, params, center, n, requested="auto"):
    """Resolve ``"auto"``/``"exact"``/``"float[:bits]"`` (or a Backend) for ``expr``."""
    if isinstance(requested, Backend):
        be = requested
    elif requested == "auto":
        return Backend.exact() if exact_admissible(expr, params, center, n) else Backend.float()
    else:
        be = Backend.parse(requested)
    if be.is_exact and not exact_admissible(expr, params, center, n):
        raise BackendError(
            "exact backend needs rational parameters, a real rational center "
            "and integer decay exponents; use --backend float")
    return be


def _walk(expr):
    yield expr
    if isinstance(expr, Scale):
        yield from _walk(expr.child)
    elif isinstance(expr, Power):
        yield from _walk(expr.base)
    elif isinstance(expr, Sum):
        for _, t in expr.terms:
            yield from _walk(t)


# -- expansion ----------------------------------------------------------------

def _normsq(p, n, order, be):
    terms = {}
    z0 = (0,) * n
    terms[(z0, z0)] = sum((c * c.conjugate() for c in p), be.zero)
    for i, c in enumerate(p):
        ei = unit(n, i)
        if order >= 1:
            terms[(ei, z0)] = c.conjugate()
            terms[(z0, ei)] = c
        if order >= 2:
            terms[(ei, ei)] = be.one
    return BidegreeSeries._raw(n, order, terms, be)


def _check_branch(p, alpha):
    if any(c == 0 for c in p):
        raise ExpansionError("decay atoms need a center with nonzero coordinates")
    if not _is_integer(alpha) and not all(c.real > 0 for c in p):
        raise ExpansionError(
            "non-integer decay exponent needs center coordinates with "
            "positive real part (principal branch)")


def _sepdecay(p, alpha, n, order, be):
    _check_branch(p, alpha)
    alpha = be.convert(alpha)
    C = binomial_series(-alpha, order, be).coeffs
    terms = {}
    for i, c in enumerate(p):
        # (c + z)^(-alpha) = c^(-alpha) * sum_j C_j (z / c)^j
        u = [C[j] * be.power(c, -alpha - j) for j in range(order + 1)]
        for j in range(order + 1):
            for k in range(order + 1 - j):
                key = (unit(n, i, j), unit(n, i, k))
                terms[key] = terms.get(key, 0) + u[j] * u[k].conjugate()
    return BidegreeSeries._raw(n, order, terms, be)


def _raddecay(p, alpha, n, order, be):
    base = _normsq(p, n, order, be)
    r2 = base.constant_term
    if r2 == 0:
        raise ExpansionError("raddecay needs a center away from the origin")
    u = (base - r2).scale(be.one / r2)
    alpha = be.convert(alpha)
    return compose_analytic(binomial_series(-alpha, order, be), u).scale(
        be.power(r2, -alpha))


def _power(base: BidegreeSeries, beta, be):
    c = base.constant_term
    if c == 0:
        if _is_integer(beta) and beta >= 0:
            return base ** int(beta)
        raise ExpansionError("power of a series vanishing at the center")
    if not _is_integer(beta):
        if c.imag != 0 or not c.real > 0:
            raise ExpansionError("non-integer power needs a positive base at the center")
    u = (base - c).scale(be.one / c)
    beta_s = be.convert(beta)
    return compose_analytic(binomial_series(beta_s, base.order, be), u).scale(
        be.power(c, beta_s))


def expand_at_center(expr, params: Mapping, center: CenterSpec, n: int,
                     order: int, backend: Backend | str = "auto") -> BidegreeSeries:
    """Expand ``Phi(z + p, conj(z + p))`` in ``z`` about the center ``p``.

    Parameters
    ----------
    expr : PotentialExpr
    params : mapping
        Bindings for every parameter in ``expr``.
    center : CenterSpec
    n : int
        Number of complex variables.
    order : int
        Truncation order in combined degree; at least 2.
    backend : Backend or str
        ``"auto"`` picks exact arithmetic whenever the coefficients are
        rational.

    Returns
    -------
    BidegreeSeries
        Error terms beyond the displayed decay are modelled as zero.
    """
    if order < 2:
        raise ExpansionError("expansion order must be at least 2")
    missing = sorted(k for k in parameters(expr) if k not in params)
    if missing:
        raise ExpansionError(f"unbound parameter(s): {', '.join(missing)}")
    be = select_backend(expr, params, center, n, backend)
    p = tuple(be.convert(c) for c in center.point(n, params))
    return _expand(expr, params, p, n, order, be)


def _expand(expr, params, p, n, order, be):
    if isinstance(expr, NormSq):
        return _normsq(p, n, order, be)
    if isinstance(expr, SepDecay):
        return _sepdecay(p, _resolve(expr.alpha, params), n, order, be)
    if isinstance(expr, RadDecay):
        return _raddecay(p, _resolve(expr.alpha, params), n, order, be)
    if isinstance(expr, TaubNutSlice):
        if n != 1:
            raise ExpansionError("taubnut_slice is a one-variable potential (n=1)")
        if any(c != 0 for c in p):
            raise ExpansionError("taubnut_slice is expanded at the origin only")
        return taubnut_slice_series(_resolve(expr.m, params), order, be,
                                    require_even=False)
    if isinstance(expr, Scale):
        return _expand(expr.child, params, p, n, order, be).scale(
            _resolve(expr.coef, params))
    if isinstance(expr, Power):
        base = _expand(expr.base, params, p, n, order, be)
        return _power(base, _resolve(expr.exponent, params), be)
    if isinstance(expr, Sum):
        total = BidegreeSeries.zero(n, order, be)
        for sign, t in expr.terms:
            s = _expand(t, params, p, n, order, be)
            total = total + s if sign > 0 else total - s
        return total
    raise TypeError(f"not a potential node: {expr!r}")


def taubnut_slice_series(m, order: int, backend: Backend = Backend.exact(),
                         require_even: bool = True) -> BidegreeSeries:
    """Diastasis of the Taub-NUT slice ``z2 = 0`` at the origin.

    With ``s = |z|**2`` and ``t = u**2`` the slice satisfies ``s = t exp(2 m t)``
    and has potential ``t + m t**2``. The relation is reversed to ``t(s)`` and
    substituted, giving ``s - m s**2 + 2 m**2 s**3 + ...``.
    """
    if require_even and order % 2:
        raise ExpansionError("taubnut_slice_series needs an even order")
    if order < 2 or (require_even and order < 4):
        raise ExpansionError("taubnut_slice_series needs order >= 4")
    if m < 0:
        raise ExpansionError("Taub-NUT parameter m must be nonnegative")
    be = backend
    m = be.convert(m)
    N = order // 2
    e = exp_series(2 * m, N - 1, be)
    f = UnivariateTaylor((be.zero,) + e.coeffs, be)      # t * exp(2 m t)
    t_of_s = reversion(f)
    phi = t_of_s + (t_of_s * t_of_s).scale(m)
    return lift_radial(phi, order)


def ale_mass(params: Mapping):
    """Mass of the ALE family ``1/2 |z|^2 + a |z|^(-2 alpha)``: the coefficient ``a``."""
    if "a" not in params:
        raise ExpansionError("parameter 'a' is unbound")
    return params["a"]
