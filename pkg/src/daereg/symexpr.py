"""Small computer-algebra kernel for DAE right-hand sides.

Expressions are immutable trees kept in a canonical form by the smart
constructors :func:`add`, :func:`mul`, :func:`pow_` and :func:`apply`.
Every node caches its canonical serialization (an s-expression string),
which doubles as its equality key and as the total order used to sort
children of sums and products.

Leaves are rationals, named parameters, the time ``t`` and derivative
nodes ``Var(j, l)`` standing for the ``l``-th derivative of variable ``j``
(1-based).  Functional atoms are ``Apply(name, arg)``; ``sin``, ``cos``,
``exp`` and ``log`` are built in, any other name is an opaque smooth
function whose derivative is the same name with a prime appended.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Union

__all__ = [
    "Expr", "Const", "Param", "Time", "Var", "Sum", "Product", "Pow", "Apply",
    "NEG_INF", "ZERO", "ONE", "TIME", "HashKey", "EvaluationError", "SExprError",
    "add", "mul", "neg", "sub", "pow_", "div", "apply", "const", "var", "param",
    "sin", "cos", "exp", "log", "fn", "canonicalize", "diff_partial", "diff_time",
    "sigma_order", "expand_arithmetic", "canonical_hash", "substitute",
    "eval_float", "is_zero", "split_coefficient", "to_sexpr", "parse_sexpr",
    "free_vars", "params_of", "max_order",
]

BUILTIN_FUNCTIONS = ("sin", "cos", "exp", "log")

Number = Union[int, Fraction]


class _NegInf:
    """Sentinel for a missing edge / unbounded dual (``-inf``)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    def __str__(self):
        return "-inf"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __reduce__(self):
        return (_NegInf, ())


NEG_INF = _NegInf()


class EvaluationError(ValueError):
    """Raised when numeric evaluation hits a domain error or a missing value."""


class SExprError(ValueError):
    """Malformed s-expression text; carries 1-based ``line`` and ``column``."""

    def __init__(self, message, line=0, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class Expr:
    """Base class of expression nodes.

    Nodes must be built through the module-level constructors; the raw
    class constructors do not canonicalize.
    """

    __slots__ = ("key", "_hash", "vars")

    def _finish(self, key, vars_):
        object.__setattr__(self, "key", key)
        object.__setattr__(self, "vars", vars_)
        object.__setattr__(self, "_hash", hash(key))

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Expr) and self.key == other.key

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"<{type(self).__name__} {self.key}>"

    def __str__(self):
        return self.key

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    # arithmetic sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return pow_(self, k)

    @property
    def children(self) -> tuple:
        return ()


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Fraction):
        object.__setattr__(self, "value", value)
        if value.denominator == 1:
            key = str(value.numerator)
        else:
            key = f"{value.numerator}/{value.denominator}"
        self._finish(key, frozenset())


class Param(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._finish(f"(param {name})", frozenset())


class Time(Expr):
    __slots__ = ()

    def __init__(self):
        self._finish("t", frozenset())


class Var(Expr):
    __slots__ = ("j", "l")

    def __init__(self, j: int, l: int):
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "l", l)
        key = f"(var x{j})" if l == 0 else f"(d x{j} {l})"
        self._finish(key, frozenset([(j, l)]))


class Sum(Expr):
    __slots__ = ("args",)

    def __init__(self, args: tuple):
        object.__setattr__(self, "args", args)
        self._finish("(+ " + " ".join(a.key for a in args) + ")",
                     frozenset().union(*(a.vars for a in args)))

    @property
    def children(self):
        return self.args


class Product(Expr):
    __slots__ = ("args",)

    def __init__(self, args: tuple):
        object.__setattr__(self, "args", args)
        self._finish("(* " + " ".join(a.key for a in args) + ")",
                     frozenset().union(*(a.vars for a in args)))

    @property
    def children(self):
        return self.args


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._finish(f"(^ {base.key} {exp})", base.vars)

    @property
    def children(self):
        return (self.base,)


class Apply(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)
        if name in BUILTIN_FUNCTIONS:
            key = f"({name} {arg.key})"
        else:
            key = f"(fn {name} {arg.key})"
        self._finish(key, arg.vars)

    @property
    def children(self):
        return (self.arg,)


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
TIME = Time()


def const(value) -> Const:
    if isinstance(value, Const):
        return value
    value = Fraction(value)
    if value == 0:
        return ZERO
    if value == 1:
        return ONE
    return Const(value)


def _as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return const(x)
    if isinstance(x, str):
        return const(Fraction(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Expr; floats are not allowed")


def var(j: int, l: int = 0) -> Var:
    if j < 1 or l < 0:
        raise ValueError(f"bad variable index/order ({j}, {l})")
    return Var(j, l)


def param(name: str) -> Param:
    return Param(name)


# ---------------------------------------------------------------------------
# canonical constructors


def split_coefficient(e: Expr) -> tuple[Fraction, Expr]:
    """Split ``e`` into ``(rational coefficient, monic part)``."""
    if isinstance(e, Const):
        return e.value, ONE
    if isinstance(e, Product) and isinstance(e.args[0], Const):
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Product(rest)
    return Fraction(1), e


def _scale(monic: Expr, c: Fraction) -> Expr:
    if c == 1:
        return monic
    if monic is ONE:
        return const(c)
    if isinstance(monic, Product):
        return Product((Const(c),) + monic.args)
    if isinstance(monic, Sum):
        return add(*(_scale_term(t, c) for t in monic.args))
    return Product((Const(c), monic))


def _scale_term(t: Expr, c: Fraction) -> Expr:
    tc, tm = split_coefficient(t)
    return _scale(tm, tc * c)


def add(*args) -> Expr:
    """Canonical sum: flattened, like terms merged, children sorted."""
    const_part = Fraction(0)
    terms: dict[str, list] = {}
    stack = [_as_expr(a) for a in args]
    stack.reverse()
    while stack:
        a = stack.pop()
        if isinstance(a, Sum):
            stack.extend(reversed(a.args))
        elif isinstance(a, Const):
            const_part += a.value
        else:
            c, m = split_coefficient(a)
            slot = terms.get(m.key)
            if slot is None:
                terms[m.key] = [m, c]
            else:
                slot[1] += c
    out = [_scale(m, c) for m, c in terms.values() if c != 0]
    out.sort(key=lambda e: e.key)
    if const_part != 0:
        out.insert(0, Const(const_part))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def mul(*args) -> Expr:
    """Canonical product: flattened, powers of equal bases collected.

    A rational times a single sum is distributed; other products of sums
    are left alone (see :func:`expand_arithmetic`).
    """
    coeff = Fraction(1)
    powers: dict[str, list] = {}
    stack = [_as_expr(a) for a in args]
    stack.reverse()
    while stack:
        a = stack.pop()
        if isinstance(a, Product):
            stack.extend(reversed(a.args))
        elif isinstance(a, Const):
            coeff *= a.value
            if coeff == 0:
                return ZERO
        elif isinstance(a, Pow):
            slot = powers.get(a.base.key)
            if slot is None:
                powers[a.base.key] = [a.base, a.exp]
            else:
                slot[1] += a.exp
        else:
            slot = powers.get(a.key)
            if slot is None:
                powers[a.key] = [a, 1]
            else:
                slot[1] += 1
    factors = []
    for base, k in powers.values():
        if k == 0:
            continue
        factors.append(base if k == 1 else Pow(base, k))
    if not factors:
        return const(coeff)
    if len(factors) == 1:
        f = factors[0]
        if coeff == 1:
            return f
        if isinstance(f, Sum):
            return add(*(_scale_term(t, coeff) for t in f.args))
        return Product((Const(coeff), f))
    factors.sort(key=lambda e: e.key)
    if coeff != 1:
        factors.insert(0, Const(coeff))
    return Product(tuple(factors))


def neg(e) -> Expr:
    return mul(-1, e)


def sub(a, b) -> Expr:
    return add(a, mul(-1, b))


def pow_(base, k: int) -> Expr:
    if not isinstance(k, int):
        raise TypeError("only integer exponents are supported")
    base = _as_expr(base)
    if k == 0:
        return ONE
    if k == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and k < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return const(base.value ** k)
    if isinstance(base, Pow):
        return pow_(base.base, base.exp * k)
    if isinstance(base, Product):
        return mul(*(pow_(f, k) for f in base.args))
    return Pow(base, k)


def div(a, b) -> Expr:
    return mul(a, pow_(b, -1))


def apply(name: str, arg) -> Expr:
    arg = _as_expr(arg)
    if isinstance(arg, Const) and arg.value == 0:
        if name in ("sin",):
            return ZERO
        if name in ("cos", "exp"):
            return ONE
    if name == "log" and isinstance(arg, Const) and arg.value == 1:
        return ZERO
    if not name or any(ch in name for ch in " ()"):
        raise ValueError(f"bad function name {name!r}")
    return Apply(name, arg)


def sin(x):
    return apply("sin", x)


def cos(x):
    return apply("cos", x)


def exp(x):
    return apply("exp", x)


def log(x):
    return apply("log", x)


def fn(name: str, x) -> Expr:
    """Opaque smooth unary function ``name(x)``."""
    return apply(name, x)


def canonicalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the canonical constructors."""
    memo: dict[str, Expr] = {}

    def rec(x: Expr) -> Expr:
        hit = memo.get(x.key)
        if hit is not None:
            return hit
        if isinstance(x, Sum):
            out = add(*(rec(a) for a in x.args))
        elif isinstance(x, Product):
            out = mul(*(rec(a) for a in x.args))
        elif isinstance(x, Pow):
            out = pow_(rec(x.base), x.exp)
        elif isinstance(x, Apply):
            out = apply(x.name, rec(x.arg))
        elif isinstance(x, Const):
            out = const(x.value)
        else:
            out = x
        memo[x.key] = out
        return out

    return rec(e)


# ---------------------------------------------------------------------------
# differentiation


def _fderiv(name: str, arg: Expr) -> Expr:
    if name == "sin":
        return cos(arg)
    if name == "cos":
        return neg(sin(arg))
    if name == "exp":
        return exp(arg)
    if name == "log":
        return pow_(arg, -1)
    return Apply(name + "'", arg)


@lru_cache(maxsize=1 << 17)
def diff_partial(e: Expr, j: int, l: int) -> Expr:
    """Partial derivative with respect to ``x_j^{(l)}`` as an independent coordinate."""
    if (j, l) not in e.vars:
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Sum):
        return add(*(diff_partial(a, j, l) for a in e.args))
    if isinstance(e, Product):
        terms = []
        args = e.args
        for i, a in enumerate(args):
            if (j, l) in a.vars:
                terms.append(mul(diff_partial(a, j, l), *args[:i], *args[i + 1:]))
        return add(*terms)
    if isinstance(e, Pow):
        return mul(e.exp, pow_(e.base, e.exp - 1), diff_partial(e.base, j, l))
    if isinstance(e, Apply):
        return mul(_fderiv(e.name, e.arg), diff_partial(e.arg, j, l))
    raise TypeError(type(e))


def _has_time(e: Expr) -> bool:
    return "t" in _time_tokens(e)


@lru_cache(maxsize=1 << 16)
def _time_tokens(e: Expr) -> frozenset:
    if isinstance(e, Time):
        return frozenset(["t"])
    out = frozenset()
    for c in e.children:
        out = out | _time_tokens(c)
    return out


@lru_cache(maxsize=1 << 17)
def diff_time(e: Expr) -> Expr:
    """Total time derivative (chain rule; parameters are constant)."""
    if not e.vars and not _has_time(e):
        return ZERO
    if isinstance(e, Time):
        return ONE
    if isinstance(e, Var):
        return Var(e.j, e.l + 1)
    if isinstance(e, Sum):
        return add(*(diff_time(a) for a in e.args))
    if isinstance(e, Product):
        args = e.args
        return add(*(mul(diff_time(a), *args[:i], *args[i + 1:])
                     for i, a in enumerate(args)))
    if isinstance(e, Pow):
        return mul(e.exp, pow_(e.base, e.exp - 1), diff_time(e.base))
    if isinstance(e, Apply):
        return mul(_fderiv(e.name, e.arg), diff_time(e.arg))
    return ZERO


def is_zero(e: Expr) -> bool:
    """Syntactic zero test on the canonical and the expanded normal form."""
    if isinstance(e, Const):
        return e.value == 0
    return expand_arithmetic(e) is ZERO


def sigma_order(e: Expr, j: int):
    """Highest ``l`` with ``d e / d x_j^{(l)}`` not syntactically zero, else ``NEG_INF``."""
    orders = sorted({l for (jj, l) in e.vars if jj == j}, reverse=True)
    for l in orders:
        if not is_zero(diff_partial(e, j, l)):
            return l
    return NEG_INF


# ---------------------------------------------------------------------------
# expansion and hashing


def _terms(e: Expr) -> tuple:
    return e.args if isinstance(e, Sum) else (e,)


def _multiply_out(a: Expr, b: Expr) -> Expr:
    return add(*(mul(x, y) for x in _terms(a) for y in _terms(b)))


@lru_cache(maxsize=1 << 16)
def expand_arithmetic(e: Expr) -> Expr:
    """Distribute products over sums; functional atoms are left untouched.

    Positive integer powers of sums are multiplied out.  Negative powers
    keep their (expanded) base as an opaque quotient atom.
    """
    if isinstance(e, (Const, Param, Time, Var, Apply)):
        return e
    if isinstance(e, Sum):
        return add(*(expand_arithmetic(a) for a in e.args))
    if isinstance(e, Product):
        acc: Expr = ONE
        for f in e.args:
            acc = _multiply_out(acc, expand_arithmetic(f))
        return acc
    if isinstance(e, Pow):
        base = expand_arithmetic(e.base)
        if e.exp > 0 and isinstance(base, Sum):
            acc = base
            for _ in range(e.exp - 1):
                acc = _multiply_out(acc, base)
            return acc
        return pow_(base, e.exp)
    raise TypeError(type(e))


@dataclass(frozen=True)
class HashKey:
    digest: str

    def __str__(self):
        return self.digest[:16]


def canonical_hash(e: Expr) -> HashKey:
    """Digest of the expanded canonical serialization.

    Equal keys imply identical normal forms; equal functions with
    different normal forms may still receive different keys.
    """
    text = expand_arithmetic(e).key
    return HashKey(hashlib.sha256(text.encode("utf-8")).hexdigest())


# ---------------------------------------------------------------------------
# substitution and evaluation


def substitute(e: Expr, mapping) -> Expr:
    """Simultaneously replace derivative nodes.

    ``mapping`` is a dict keyed by ``(j, l)`` or a callable ``(j, l) ->
    Expr | None``; unmapped nodes pass through unchanged.
    """
    if callable(mapping):
        lookup = mapping
    else:
        lookup = lambda j, l: mapping.get((j, l))  # noqa: E731
    memo: dict[str, Expr] = {}

    def rec(x: Expr) -> Expr:
        if not x.vars:
            return x
        hit = memo.get(x.key)
        if hit is not None:
            return hit
        if isinstance(x, Var):
            r = lookup(x.j, x.l)
            out = x if r is None else _as_expr(r)
        elif isinstance(x, Sum):
            out = add(*(rec(a) for a in x.args))
        elif isinstance(x, Product):
            out = mul(*(rec(a) for a in x.args))
        elif isinstance(x, Pow):
            out = pow_(rec(x.base), x.exp)
        elif isinstance(x, Apply):
            out = apply(x.name, rec(x.arg))
        else:
            out = x
        memo[x.key] = out
        return out

    return rec(e)


_FLOAT_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "log": math.log}


def eval_float(e: Expr, point: Mapping, functions: Mapping[str, Callable] | None = None,
               default: Callable[[str], Callable] | None = None) -> float:
    """Evaluate in IEEE doubles.

    ``point`` maps leaves (``Var``, ``Param`` and ``TIME`` nodes) to floats.
    ``functions`` supplies evaluators for opaque names; ``default`` is a
    factory used for opaque names missing from ``functions``.
    """
    functions = functions or {}
    memo: dict[str, float] = {}

    def rec(x: Expr) -> float:
        hit = memo.get(x.key)
        if hit is not None:
            return hit
        if isinstance(x, Const):
            out = float(x.value)
        elif isinstance(x, (Var, Param, Time)):
            try:
                out = float(point[x])
            except KeyError:
                raise EvaluationError(f"no value for {x.key}") from None
        elif isinstance(x, Sum):
            out = math.fsum(rec(a) for a in x.args)
        elif isinstance(x, Product):
            out = 1.0
            for a in x.args:
                out *= rec(a)
        elif isinstance(x, Pow):
            b = rec(x.base)
            if b == 0.0 and x.exp < 0:
                raise EvaluationError(f"division by zero in {x.key}")
            out = b ** x.exp
        elif isinstance(x, Apply):
            a = rec(x.arg)
            f = _FLOAT_FUNCS.get(x.name) or functions.get(x.name)
            if f is None and default is not None:
                f = default(x.name)
            if f is None:
                raise EvaluationError(f"no evaluator for function {x.name!r}")
            try:
                out = float(f(a))
            except (ValueError, OverflowError) as exc:
                raise EvaluationError(f"{x.name}({a!r}): {exc}") from None
        else:
            raise TypeError(type(x))
        memo[x.key] = out
        return out

    return rec(e)


def free_vars(e: Expr) -> frozenset:
    return e.vars


def max_order(e: Expr) -> int:
    return max((l for _, l in e.vars), default=0)


def params_of(e: Expr) -> set[str]:
    out: set[str] = set()
    seen: set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if x.key in seen:
            continue
        seen.add(x.key)
        if isinstance(x, Param):
            out.add(x.name)
        stack.extend(x.children)
    return out


def atoms_of(e: Expr, kind=Apply) -> set:
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, kind):
            out.add(x)
        stack.extend(x.children)
    return out


# ---------------------------------------------------------------------------
# s-expression text


def to_sexpr(e: Expr, names: Iterable[str] | None = None) -> str:
    """Serialize; with ``names``, variable ``j`` prints as ``names[j-1]``."""
    if names is None:
        return e.key
    names = list(names)

    def rec(x: Expr) -> str:
        if isinstance(x, Var):
            nm = names[x.j - 1]
            return f"(var {nm})" if x.l == 0 else f"(d {nm} {x.l})"
        if isinstance(x, Sum):
            return "(+ " + " ".join(rec(a) for a in x.args) + ")"
        if isinstance(x, Product):
            return "(* " + " ".join(rec(a) for a in x.args) + ")"
        if isinstance(x, Pow):
            return f"(^ {rec(x.base)} {x.exp})"
        if isinstance(x, Apply):
            if x.name in BUILTIN_FUNCTIONS:
                return f"({x.name} {rec(x.arg)})"
            return f"(fn {x.name} {rec(x.arg)})"
        return x.key

    return rec(e)


def _tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch in "()":
            yield ch, line, col
            i += 1
            col += 1
            continue
        start = i
        while i < n and not text[i].isspace() and text[i] not in "()":
            i += 1
        yield text[start:i], line, col
        col += i - start


def parse_sexpr(text: str, names: Iterable[str] | None = None,
                params: Iterable[str] | None = None, strict: bool = False) -> Expr:
    """Parse s-expression text into a canonical :class:`Expr`.

    Besides the canonical forms, ``-``, ``/`` and bare identifiers are
    accepted: a bare identifier is a variable (order 0) if listed in
    ``names``, ``t`` is time, and anything else is a parameter (an error
    when ``strict`` and not listed in ``params``).
    """
    index = {nm: j for j, nm in enumerate(names, start=1)} if names is not None else None
    known_params = set(params or ())
    tokens = list(_tokenize(text))
    pos = 0

    def peek():
        if pos >= len(tokens):
            last = tokens[-1] if tokens else ("", 1, 1)
            raise SExprError("unexpected end of input", last[1], last[2])
        return tokens[pos]

    def var_index(tok, line, col):
        if index is not None and tok in index:
            return index[tok]
        if index is None and tok.startswith("x") and tok[1:].isdigit():
            return int(tok[1:])
        raise SExprError(f"unknown variable {tok!r}", line, col)

    def atom(tok, line, col):
        try:
            return const(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            pass
        if tok == "t":
            return TIME
        if index is not None and tok in index:
            return var(index[tok], 0)
        if strict and tok not in known_params:
            raise SExprError(f"undeclared name {tok!r}", line, col)
        return param(tok)

    def integer(line, col):
        nonlocal pos
        tok, tl, tc = peek()
        pos += 1
        try:
            return int(tok)
        except ValueError:
            raise SExprError(f"expected integer, got {tok!r}", tl, tc) from None

    def node():
        nonlocal pos
        tok, line, col = peek()
        pos += 1
        if tok == ")":
            raise SExprError("unexpected ')'", line, col)
        if tok != "(":
            return atom(tok, line, col)
        head, hl, hc = peek()
        pos += 1
        if head in ("(", ")"):
            raise SExprError("expected operator", hl, hc)
        if head == "var":
            tok2, l2, c2 = peek()
            pos += 1
            out = var(var_index(tok2, l2, c2), 0)
        elif head == "d":
            tok2, l2, c2 = peek()
            pos += 1
            out = var(var_index(tok2, l2, c2), integer(l2, c2))
        elif head == "param":
            tok2, _, _ = peek()
            pos += 1
            out = param(tok2)
        elif head == "time":
            out = TIME
        elif head == "^":
            b = node()
            out = pow_(b, integer(hl, hc))
        elif head == "fn":
            tok2, _, _ = peek()
            pos += 1
            out = apply(tok2, node())
        elif head in BUILTIN_FUNCTIONS:
            out = apply(head, node())
        elif head in ("+", "*", "-", "/"):
            args = []
            while peek()[0] != ")":
                args.append(node())
            if not args:
                raise SExprError(f"operator {head!r} needs arguments", hl, hc)
            if head == "+":
                out = add(*args)
            elif head == "*":
                out = mul(*args)
            elif head == "-":
                out = neg(args[0]) if len(args) == 1 else sub(args[0], add(*args[1:]))
            else:
                out = div(args[0], mul(*args[1:])) if len(args) > 1 else pow_(args[0], -1)
        else:
            raise SExprError(f"unknown operator {head!r}", hl, hc)
        tok, line, col = peek()
        if tok != ")":
            raise SExprError(f"expected ')', got {tok!r}", line, col)
        pos += 1
        return out

    if not tokens:
        raise SExprError("empty expression", 1, 1)
    out = node()
    if pos != len(tokens):
        _, line, col = tokens[pos]
        raise SExprError("trailing input", line, col)
    return out
