"""Small expression kernel: AST, parser, printer, derivatives, evaluation.

Expressions are immutable trees over named coordinates.  Integer and
rational literals stay exact (``fractions.Fraction``) until a numeric
evaluation; decimal literals are floats.  Zero testing is done by random
sampling, never by rewriting to a canonical form.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_TRIALS = 32
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 42
DEFAULT_BOX = (-2.0, 2.0)

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UnknownSymbolError(ExprError):
    pass


class UnboundSymbolError(ExprError):
    pass


class DomainError(ExprError, ValueError):
    """Raised when an expression is evaluated outside its domain."""


class SamplingError(ExprError):
    pass


# ---------------------------------------------------------------------------
# AST nodes


class Expr:
    __slots__ = ("_hash", "_key")
    _rank = 0

    def __init__(self):
        self._hash = None
        self._key = None

    def _fields(self):
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._fields() == other._fields()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__, self._fields()))
        return self._hash

    @property
    def key(self):
        """Deterministic total-order key, independent of ``hash()`` salting."""
        if self._key is None:
            self._key = (self._rank, self._keypart())
        return self._key

    def __repr__(self):
        return f"{type(self).__name__}({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    # arithmetic sugar; all routes go through the folding constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return power(self, n)

    def __neg__(self):
        return neg(self)


class Const(Expr):
    __slots__ = ("value",)
    _rank = 0

    def __init__(self, value):
        super().__init__()
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            value = Fraction(value)
        elif not isinstance(value, (Fraction, float)):
            raise TypeError(f"bad constant {value!r}")
        self.value = value

    def _fields(self):
        return (self.value,)

    def _keypart(self):
        return (float(self.value), isinstance(self.value, float), str(self.value))

    @property
    def is_exact(self):
        return isinstance(self.value, Fraction)


class Sym(Expr):
    __slots__ = ("name",)
    _rank = 1

    def __init__(self, name):
        super().__init__()
        self.name = name

    def _fields(self):
        return (self.name,)

    def _keypart(self):
        return self.name


class Add(Expr):
    __slots__ = ("args",)
    _rank = 5

    def __init__(self, args):
        super().__init__()
        self.args = tuple(args)

    def _fields(self):
        return self.args

    def _keypart(self):
        return tuple(a.key for a in self.args)


class Mul(Expr):
    __slots__ = ("args",)
    _rank = 4

    def __init__(self, args):
        super().__init__()
        self.args = tuple(args)

    def _fields(self):
        return self.args

    def _keypart(self):
        return tuple(a.key for a in self.args)


class Pow(Expr):
    __slots__ = ("base", "exp")
    _rank = 3

    def __init__(self, base, exp):
        super().__init__()
        self.base = base
        self.exp = int(exp)

    def _fields(self):
        return (self.base, self.exp)

    def _keypart(self):
        return (self.base.key, self.exp)


class Neg(Expr):
    __slots__ = ("arg",)
    _rank = 6

    def __init__(self, arg):
        super().__init__()
        self.arg = arg

    def _fields(self):
        return (self.arg,)

    def _keypart(self):
        return self.arg.key


class Func(Expr):
    __slots__ = ("name", "arg")
    _rank = 2

    def __init__(self, name, arg):
        super().__init__()
        if name not in FUNCTIONS:
            raise ExprError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg

    def _fields(self):
        return (self.name, self.arg)

    def _keypart(self):
        return (self.name, self.arg.key)


ZERO = Const(0)
ONE = Const(1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction, float)):
        return Const(value)
    if isinstance(value, np.floating):
        return Const(float(value))
    if isinstance(value, np.integer):
        return Const(int(value))
    raise TypeError(f"cannot convert {value!r} to an expression")


def sym(name: str) -> Sym:
    return Sym(name)


def is_zero_const(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def is_one_const(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1


# ---------------------------------------------------------------------------
# folding constructors (constant folding, 0/1 absorption, flattening)


def _num_add(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) + float(b)
    return a + b


def _num_mul(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) * float(b)
    return a * b


def add(*args) -> Expr:
    const = Fraction(0)
    terms = []

    def collect(t):
        nonlocal const
        if isinstance(t, Add):
            for u in t.args:
                collect(u)
        elif isinstance(t, Const):
            const = _num_add(const, t.value)
        else:
            terms.append(t)

    for a in args:
        collect(as_expr(a))
    if const != 0:
        terms.append(Const(const))
    if not terms:
        return Const(const) if isinstance(const, float) else ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(terms)


def mul(*args) -> Expr:
    const = Fraction(1)
    factors = []

    def collect(f):
        nonlocal const
        while isinstance(f, Neg):
            const = -const
            f = f.arg
        if isinstance(f, Mul):
            for g in f.args:
                collect(g)
        elif isinstance(f, Const):
            const = _num_mul(const, f.value)
        else:
            factors.append(f)

    for a in args:
        collect(as_expr(a))
    if const == 0:
        return ZERO
    if not factors:
        return Const(const)
    if const != 1:
        factors.insert(0, Const(const))
    if len(factors) == 1:
        return factors[0]
    return Mul(factors)


def power(base, n: int) -> Expr:
    base = as_expr(base)
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0:
            if n > 0:
                return ZERO
            return Pow(base, n)  # stays symbolic; evaluation raises
        if isinstance(base.value, float):
            return Const(base.value ** n)
        return Const(base.value ** n)
    if isinstance(base, Pow):
        return power(base.base, base.exp * n)
    return Pow(base, n)


def neg(e) -> Expr:
    return mul(Const(-1), as_expr(e))


def _exact_sqrt(q: Fraction):
    if q < 0:
        return None
    a, b = q.numerator, q.denominator
    ra, rb = math.isqrt(a), math.isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


def func(name: str, arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const) and arg.is_exact:
        v = arg.value
        if name in ("sin",) and v == 0:
            return ZERO
        if name in ("cos", "exp") and v == 0:
            return ONE
        if name == "ln" and v == 1:
            return ZERO
        if name == "sqrt":
            r = _exact_sqrt(v)
            if r is not None:
                return Const(r)
    return Func(name, arg)


def sin(e):
    return func("sin", e)


def cos(e):
    return func("cos", e)


def exp(e):
    return func("exp", e)


def ln(e):
    return func("ln", e)


def sqrt(e):
    return func("sqrt", e)


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text, coords):
        self.text = text
        self.coords = None if coords is None else set(coords)
        self.pos = 0

    def error(self, msg, pos=None):
        raise ParseError(msg, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self):
        if not self.peek():
            self.error("empty expression")
        e = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return e

    def expr(self):
        terms = [self.term()]
        while True:
            if self.take("+"):
                terms.append(self.term())
            elif self.take("-"):
                terms.append(Neg(self.term()))
            else:
                break
        return terms[0] if len(terms) == 1 else Add(terms)

    def term(self):
        factors = [self.factor()]
        while True:
            if self.take("*"):
                factors.append(self.factor())
            elif self.take("/"):
                factors.append(Pow(self.factor(), -1))
            else:
                break
        return factors[0] if len(factors) == 1 else Mul(factors)

    def factor(self):
        b = self.base()
        if self.take("^"):
            self.skip()
            start = self.pos
            sign = 1
            if self.take("-"):
                sign = -1
                self.skip()
            digits_start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == digits_start:
                self.error("integer exponent expected", start)
            return Pow(b, sign * int(self.text[digits_start:self.pos]))
        return b

    def base(self):
        ch = self.peek()
        if not ch:
            self.error("unexpected end of input")
        if ch == "-":
            self.pos += 1
            return Neg(self.base())
        if ch == "(":
            self.pos += 1
            e = self.expr()
            if not self.take(")"):
                self.error("')' expected")
            return e
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name in FUNCTIONS and self.peek() == "(":
                self.pos += 1
                arg = self.expr()
                if not self.take(")"):
                    self.error("')' expected")
                return Func(name, arg)
            if self.coords is not None and name not in self.coords:
                raise UnknownSymbolError(f"unknown symbol {name!r} at offset {start}")
            return Sym(name)
        self.error(f"unexpected character {ch!r}")

    def number(self):
        start = self.pos
        t = self.text
        while self.pos < len(t) and t[self.pos].isdigit():
            self.pos += 1
        is_float = False
        if self.pos < len(t) and t[self.pos] == ".":
            is_float = True
            self.pos += 1
            while self.pos < len(t) and t[self.pos].isdigit():
                self.pos += 1
        if self.pos < len(t) and t[self.pos] in "eE":
            j = self.pos + 1
            if j < len(t) and t[j] in "+-":
                j += 1
            if j < len(t) and t[j].isdigit():
                is_float = True
                self.pos = j
                while self.pos < len(t) and t[self.pos].isdigit():
                    self.pos += 1
        s = t[start:self.pos]
        if s in (".", ""):
            self.error("malformed number", start)
        return Const(float(s) if is_float else int(s))


def parse_expr(text: str, coords: Sequence[str] | None = None) -> Expr:
    """Parse ``text`` into an expression tree.

    When ``coords`` is given, every symbol must be one of them.
    The tree is returned as written (no folding); see :func:`simplify`.
    """
    return _Parser(text, coords).parse()


# ---------------------------------------------------------------------------
# printer

_P_SUM, _P_PROD, _P_POW, _P_ATOM = 1, 2, 3, 4


def _fmt_const(v):
    if isinstance(v, float):
        s = repr(v)
        if s in ("inf", "-inf", "nan"):
            raise ExprError("non-finite constant cannot be printed")
        return s, (_P_ATOM if v >= 0 else 0)
    if v.denominator == 1:
        return str(v.numerator), (_P_ATOM if v >= 0 else 0)
    return f"{v.numerator}/{v.denominator}", (_P_PROD if v > 0 else 0)


def _fmt(e: Expr):
    """Return (text, precedence)."""
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Sym):
        return e.name, _P_ATOM
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg)[0]})", _P_ATOM
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _P_ATOM), _P_SUM - 1
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _P_ATOM)}^{e.exp}", _P_POW
    if isinstance(e, Mul):
        args = e.args
        if isinstance(args[0], Const) and args[0].value == -1 and len(args) > 1:
            # '-' binds tighter than '^' in the grammar, so "-x^2" would mean (-x)^2
            rest = "*".join(_wrap(a, _P_ATOM if i == 0 else _P_POW) for i, a in enumerate(args[1:]))
            return "-" + rest, _P_SUM - 1
        return "*".join(_wrap(a, _P_POW) if i else _wrap(a, _P_PROD) for i, a in enumerate(args)), _P_PROD
    if isinstance(e, Add):
        parts = [_wrap(e.args[0], _P_SUM - 1)]
        for t in e.args[1:]:
            negated = _negated_term(t)
            if negated is not None:
                parts.append(" - " + _wrap(negated, _P_PROD))
            else:
                parts.append(" + " + _wrap(t, _P_PROD))
        return "".join(parts), _P_SUM
    raise TypeError(type(e))


def _negated_term(t):
    if isinstance(t, Const) and t.value < 0:
        return Const(-t.value)
    if isinstance(t, Mul) and isinstance(t.args[0], Const) and t.args[0].value < 0:
        c = -t.args[0].value
        rest = t.args[1:]
        if c == 1:
            return rest[0] if len(rest) == 1 else Mul(rest)
        return Mul((Const(c),) + rest)
    return None


def _wrap(e, min_prec):
    s, p = _fmt(e)
    return s if p >= min_prec else f"({s})"


def to_string(e: Expr) -> str:
    return _fmt(e)[0]


# ---------------------------------------------------------------------------
# structure queries


@lru_cache(maxsize=65536)
def free_symbols(e: Expr) -> frozenset:
    if isinstance(e, Sym):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    return frozenset().union(*(free_symbols(c) for c in _children(e)))


def _children(e):
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, (Neg, Func)):
        return (e.arg,)
    return ()


def count_nodes(e: Expr) -> int:
    """Number of distinct nodes in the expression DAG."""
    seen = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        stack.extend(_children(x))
    return len(seen)


# ---------------------------------------------------------------------------
# differentiation and substitution


@lru_cache(maxsize=262144)
def differentiate(e: Expr, var: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the symbol ``var``."""
    if var not in free_symbols(e):
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Add):
        return add(*(differentiate(a, var) for a in e.args))
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, var))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            da = differentiate(a, var)
            if is_zero_const(da):
                continue
            terms.append(mul(*e.args[:i], da, *e.args[i + 1:]))
        return add(*terms)
    if isinstance(e, Pow):
        return mul(Const(e.exp), power(e.base, e.exp - 1), differentiate(e.base, var))
    if isinstance(e, Func):
        u = e.arg
        du = differentiate(u, var)
        if e.name == "sin":
            outer = cos(u)
        elif e.name == "cos":
            outer = neg(sin(u))
        elif e.name == "exp":
            outer = e
        elif e.name == "ln":
            outer = power(u, -1)
        else:  # sqrt
            outer = mul(Const(Fraction(1, 2)), power(e, -1))
        return mul(outer, du)
    raise TypeError(type(e))


def gradient(e: Expr, coords: Sequence[str]) -> list:
    return [differentiate(e, c) for c in coords]


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace symbols by expressions, rebuilding through the folding constructors."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    names = set(mapping)
    memo = {}

    def go(x):
        if not (free_symbols(x) & names):
            return x
        k = id(x)
        if k in memo:
            return memo[k]
        if isinstance(x, Sym):
            r = mapping[x.name]
        elif isinstance(x, Add):
            r = add(*(go(a) for a in x.args))
        elif isinstance(x, Mul):
            r = mul(*(go(a) for a in x.args))
        elif isinstance(x, Pow):
            r = power(go(x.base), x.exp)
        elif isinstance(x, Neg):
            r = neg(go(x.arg))
        elif isinstance(x, Func):
            r = func(x.name, go(x.arg))
        else:
            r = x
        memo[k] = r
        return r

    return go(e)


# ---------------------------------------------------------------------------
# simplification


def _split_coeff(t):
    """term -> (numeric coefficient, body) with body a non-constant Expr or None."""
    if isinstance(t, Const):
        return t.value, None
    if isinstance(t, Mul) and isinstance(t.args[0], Const):
        rest = t.args[1:]
        return t.args[0].value, (rest[0] if len(rest) == 1 else Mul(rest))
    return Fraction(1), t


def _split_power(f):
    if isinstance(f, Pow):
        return f.base, f.exp
    return f, 1


@lru_cache(maxsize=65536)
def simplify(e: Expr) -> Expr:
    """Light semantic-preserving cleanup.

    Folds constants, absorbs 0 and 1, flattens nested sums/products,
    merges like terms and like powers, and sorts arguments.  It does not
    expand products or rewrite functions, so ``sin(x)^2 + cos(x)^2`` stays.
    """
    if isinstance(e, (Const, Sym)):
        return e
    if isinstance(e, Neg):
        return simplify(neg(simplify(e.arg)))
    if isinstance(e, Func):
        return func(e.name, simplify(e.arg))
    if isinstance(e, Pow):
        b = simplify(e.base)
        r = power(b, e.exp)
        if isinstance(r, Pow) and isinstance(r.base, Mul):
            # distribute integer power over a product: (c*x)^n -> c^n * x^n
            return simplify(mul(*(power(f, r.exp) for f in r.base.args)))
        return r
    if isinstance(e, Mul):
        flat = mul(*(simplify(a) for a in e.args))
        if not isinstance(flat, Mul):
            return flat
        coeff = Fraction(1)
        exps = {}
        order = []
        for f in flat.args:
            if isinstance(f, Const):
                coeff = _num_mul(coeff, f.value)
                continue
            b, n = _split_power(f)
            if b not in exps:
                exps[b] = 0
                order.append(b)
            exps[b] += n
        factors = []
        for b in order:
            p = power(b, exps[b])
            if isinstance(p, Const):
                coeff = _num_mul(coeff, p.value)
            else:
                factors.append(p)
        factors.sort(key=lambda x: x.key)
        if len(factors) == 1 and isinstance(factors[0], Add) and coeff != 1:
            # numeric factor over a sum: c*(a + b) -> c*a + c*b
            return simplify(add(*(mul(Const(coeff), t) for t in factors[0].args)))
        return mul(Const(coeff), *factors)
    if isinstance(e, Add):
        flat = add(*(simplify(a) for a in e.args))
        if not isinstance(flat, Add):
            return flat
        coeffs = {}
        order = []
        const = Fraction(0)
        for t in flat.args:
            c, body = _split_coeff(t)
            if body is None:
                const = _num_add(const, c)
                continue
            if body not in coeffs:
                coeffs[body] = Fraction(0)
                order.append(body)
            coeffs[body] = _num_add(coeffs[body], c)
        terms = [mul(Const(coeffs[b]), b) for b in order if coeffs[b] != 0]
        terms.sort(key=lambda x: x.key)
        if const != 0:
            terms.append(Const(const))
        return add(*terms)
    raise TypeError(type(e))


# ---------------------------------------------------------------------------
# evaluation


def _eval_arrays(e: Expr, env: Mapping[str, np.ndarray], memo: dict):
    k = id(e)
    if k in memo:
        return memo[k]
    if isinstance(e, Const):
        r = float(e.value)
    elif isinstance(e, Sym):
        try:
            r = env[e.name]
        except KeyError:
            raise UnboundSymbolError(f"symbol {e.name!r} is not bound") from None
    elif isinstance(e, Add):
        r = _eval_arrays(e.args[0], env, memo)
        for a in e.args[1:]:
            r = r + _eval_arrays(a, env, memo)
    elif isinstance(e, Mul):
        r = _eval_arrays(e.args[0], env, memo)
        for a in e.args[1:]:
            r = r * _eval_arrays(a, env, memo)
    elif isinstance(e, Neg):
        r = -_eval_arrays(e.arg, env, memo)
    elif isinstance(e, Pow):
        b = np.asarray(_eval_arrays(e.base, env, memo), dtype=float)
        if e.exp < 0:
            bad = b == 0
            b = np.where(bad, np.nan, b)
        r = b ** e.exp
    elif isinstance(e, Func):
        u = np.asarray(_eval_arrays(e.arg, env, memo), dtype=float)
        if e.name == "sin":
            r = np.sin(u)
        elif e.name == "cos":
            r = np.cos(u)
        elif e.name == "exp":
            r = np.exp(u)
        elif e.name == "ln":
            r = np.log(np.where(u > 0, u, np.nan))
        else:
            r = np.sqrt(np.where(u >= 0, u, np.nan))
    else:
        raise TypeError(type(e))
    memo[k] = r
    return r


def evaluate_many(exprs: Iterable[Expr], env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate several expressions on arrays of coordinate values.

    Returns an array of shape ``(len(exprs), npoints)``; entries outside a
    function's domain come back as NaN.
    """
    exprs = list(exprs)
    env = {k: np.asarray(v, dtype=float) for k, v in env.items()}
    npts = len(next(iter(env.values()))) if env else 1
    memo = {}
    out = np.empty((len(exprs), npts))
    with np.errstate(all="ignore"):
        for i, e in enumerate(exprs):
            out[i] = _eval_arrays(e, env, memo)
    return out


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    missing = free_symbols(e) - set(point)
    if missing:
        raise UnboundSymbolError(f"unbound symbols: {sorted(missing)}")
    env = {k: np.array([float(v)]) for k, v in point.items()}
    if not env:
        env = {"__": np.array([0.0])}
    val = evaluate_many([e], env)[0, 0]
    if not np.isfinite(val):
        raise DomainError(f"{e} is undefined at {dict(point)}")
    return float(val)


# ---------------------------------------------------------------------------
# sampling and zero testing


def normalize_box(coords: Sequence[str], box=None) -> list:
    """Return one (lo, hi) pair per coordinate."""
    if box is None:
        return [DEFAULT_BOX] * len(coords)
    if isinstance(box, Mapping):
        return [tuple(box.get(c, DEFAULT_BOX)) for c in coords]
    box = [tuple(b) for b in box]
    if len(box) != len(coords):
        raise ValueError("sample box does not match coordinate count")
    return box


def sample_valid(exprs: Sequence[Expr], coords: Sequence[str], trials: int = DEFAULT_TRIALS,
                 seed=DEFAULT_SEED, box=None, max_rounds: int = 10):
    """Draw ``trials`` uniform points where every expression is defined.

    Points where any expression is undefined are redrawn, for at most
    ``max_rounds`` rounds.  Returns ``(points, values)`` with ``points``
    of shape (k, ncoords) and ``values`` of shape (len(exprs), k).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    coords = list(coords)
    bounds = np.array(normalize_box(coords, box), dtype=float).reshape(len(coords), 2)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    kept_pts, kept_vals = [], []
    need = trials
    for _ in range(max_rounds):
        pts = rng.uniform(bounds[:, 0], bounds[:, 1], size=(need, len(coords)))
        env = {c: pts[:, i] for i, c in enumerate(coords)}
        if not coords:
            env = {"__": np.zeros(need)}
        vals = evaluate_many(exprs, env) if exprs else np.zeros((0, need))
        ok = np.all(np.isfinite(vals), axis=0)
        kept_pts.append(pts[ok])
        kept_vals.append(vals[:, ok])
        need -= int(ok.sum())
        if need <= 0:
            break
    points = np.concatenate(kept_pts, axis=0)
    values = np.concatenate(kept_vals, axis=1)
    if len(points) == 0:
        raise SamplingError("every sample point fell outside the expression domain")
    return points, values


def max_abs(exprs: Sequence[Expr], coords=None, trials: int = DEFAULT_TRIALS, seed=DEFAULT_SEED, box=None) -> float:
    """Largest |value| of the expressions over random sample points."""
    exprs = list(exprs)
    if not exprs:
        return 0.0
    if coords is None:
        coords = sorted(frozenset().union(*(free_symbols(e) for e in exprs)))
    _, vals = sample_valid(exprs, coords, trials, seed, box)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def is_identically_zero(e: Expr, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL,
                        seed=DEFAULT_SEED, coords=None, box=None) -> bool:
    """Probabilistic zero test: |e| <= tol at ``trials`` random points in the box."""
    e = simplify(e)
    if isinstance(e, Const):
        return abs(float(e.value)) <= tol
    return max_abs([e], coords, trials, seed, box) <= tol


def all_zero(exprs: Sequence[Expr], trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL,
             seed=DEFAULT_SEED, coords=None, box=None) -> bool:
    return max_abs([simplify(e) for e in exprs], coords, trials, seed, box) <= tol


# ---------------------------------------------------------------------------
# polynomial view (used for exact integration along rays)


def as_polynomial(e: Expr, coords: Sequence[str]):
    """Return ``{exponent tuple: coefficient}`` or None if ``e`` is not a polynomial."""
    idx = {c: i for i, c in enumerate(coords)}
    n = len(coords)
    memo = {}

    def pmul(p, q):
        out = {}
        for ea, ca in p.items():
            for eb, cb in q.items():
                k = tuple(x + y for x, y in zip(ea, eb))
                out[k] = _num_add(out.get(k, 0), _num_mul(ca, cb))
        return {k: v for k, v in out.items() if v != 0}

    def go(x):
        k = id(x)
        if k in memo:
            return memo[k]
        if isinstance(x, Const):
            r = {(0,) * n: x.value} if x.value != 0 else {}
        elif isinstance(x, Sym):
            if x.name not in idx:
                return None
            ex = [0] * n
            ex[idx[x.name]] = 1
            r = {tuple(ex): Fraction(1)}
        elif isinstance(x, Add):
            r = {}
            for a in x.args:
                pa = go(a)
                if pa is None:
                    return None
                for kk, v in pa.items():
                    r[kk] = _num_add(r.get(kk, 0), v)
            r = {kk: v for kk, v in r.items() if v != 0}
        elif isinstance(x, Mul):
            r = {(0,) * n: Fraction(1)}
            for a in x.args:
                pa = go(a)
                if pa is None:
                    return None
                r = pmul(r, pa)
        elif isinstance(x, Neg):
            pa = go(x.arg)
            if pa is None:
                return None
            r = {kk: -v for kk, v in pa.items()}
        elif isinstance(x, Pow):
            if x.exp < 0:
                return None
            pb = go(x.base)
            if pb is None:
                return None
            r = {(0,) * n: Fraction(1)}
            for _ in range(x.exp):
                r = pmul(r, pb)
        else:
            return None
        memo[k] = r
        return r

    return go(e)


def from_polynomial(poly: Mapping, variables: Sequence[Expr]) -> Expr:
    """Rebuild an expression from ``{exponents: coeff}`` in the given variable expressions."""
    terms = []
    for ex in sorted(poly):
        c = poly[ex]
        terms.append(mul(Const(c), *(power(v, k) for v, k in zip(variables, ex) if k)))
    return simplify(add(*terms))


def collapse_constant(e: Expr, coords: Sequence[str], box=None, trials: int = 16, tol: float = 1e-12,
                      seed=DEFAULT_SEED, max_denominator: int = 1000) -> Expr:
    """Replace ``e`` by a constant when its gradient vanishes on the box.

    The sampled value is snapped to a nearby rational with small
    denominator when one exists.  Used to tidy coefficients after a
    pullback, e.g. ``cos(u)^2 + sin(u)^2`` becomes ``1``.
    """
    e = simplify(e)
    if isinstance(e, Const) or not free_symbols(e):
        return e
    grads = [simplify(differentiate(e, c)) for c in coords]
    try:
        _, vals = sample_valid(grads + [e], coords, trials, seed, box)
    except SamplingError:
        return e
    if np.max(np.abs(vals[:-1])) > tol:
        return e
    v = float(np.median(vals[-1]))
    if np.max(np.abs(vals[-1] - v)) > tol * max(1.0, abs(v)):
        return e
    q = Fraction(v).limit_denominator(max_denominator)
    if abs(float(q) - v) <= tol * max(1.0, abs(v)):
        return Const(q)
    return Const(v)
