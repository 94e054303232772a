"""JSON family descriptions with a small arithmetic expression language.

A family file looks like::

    {
      "name": "my-family",
      "kind": "finite" | "real_line",
      "n": 2,
      "points": [1, 2, 3],          # finite only; labels optional
      "C": "0",
      "F": ["x", "x^2"],
      "psi": "ln(1 + exp(theta1))",
      "domain": {"lo": [-10], "hi": [10]},   # optional, open box
      "quad_order": 64,                      # real_line only, optional
      "envelope": {"center": 0, "scale": 1}  # real_line only, optional
    }

Expressions use +, -, *, /, ^ (right associative), parentheses, the
functions ``exp`` and ``ln``, the constant ``pi``, the point variable ``x``
(in C and F) and ``theta1..thetaN`` (in psi).  Parse and validation errors
raise ``SpecFileError`` annotated with the offending key and column.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SpecFileError
from .families import Box, ExponentialFamilySpec, FiniteSpace, RealLine

__all__ = ["load_family", "family_from_dict", "compile_expression"]

_TOKEN = re.compile(
    r"(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[()+\-*/^])"
)

_FUNCTIONS = {"exp": np.exp, "ln": np.log}
_CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int  # 1-based


def _tokenize(source, where):
    tokens = []
    i = 0
    while i < len(source):
        if source[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(source, i)
        if m is None:
            raise SpecFileError(
                f"unexpected character {source[i]!r}", where=where, column=i + 1
            )
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(), i + 1))
        i = m.end()
    return tokens


class _Parser:
    """Recursive descent over the token list; produces an evaluator closure."""

    def __init__(self, tokens, where, variables):
        self.tokens = tokens
        self.where = where
        self.variables = variables
        self.pos = 0

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        if tok is not None:
            self.pos += 1
        return tok

    def _fail(self, message, token=None):
        col = token.column if token is not None else (
            self.tokens[-1].column + len(self.tokens[-1].text) if self.tokens else 1
        )
        raise SpecFileError(message, where=self.where, column=col)

    def _expect(self, text):
        tok = self._next()
        if tok is None or tok.text != text:
            self._fail(f"expected {text!r}", tok)

    def parse(self):
        node = self._sum()
        tok = self._peek()
        if tok is not None:
            self._fail(f"unexpected token {tok.text!r}", tok)
        return node

    def _sum(self):
        node = self._product()
        while (tok := self._peek()) is not None and tok.text in "+-":
            self._next()
            rhs = self._product()
            if tok.text == "+":
                node = (lambda a, b: lambda env: a(env) + b(env))(node, rhs)
            else:
                node = (lambda a, b: lambda env: a(env) - b(env))(node, rhs)
        return node

    def _product(self):
        node = self._unary()
        while (tok := self._peek()) is not None and tok.text in "*/":
            self._next()
            rhs = self._unary()
            if tok.text == "*":
                node = (lambda a, b: lambda env: a(env) * b(env))(node, rhs)
            else:
                node = (lambda a, b: lambda env: a(env) / b(env))(node, rhs)
        return node

    def _unary(self):
        tok = self._peek()
        if tok is not None and tok.text == "-":
            self._next()
            inner = self._unary()
            return lambda env: -inner(env)
        return self._power()

    def _power(self):
        base = self._atom()
        tok = self._peek()
        if tok is not None and tok.text == "^":
            self._next()
            expo = self._unary()  # right associative, unary minus allowed
            return lambda env: base(env) ** expo(env)
        return base

    def _atom(self):
        tok = self._next()
        if tok is None:
            self._fail("unexpected end of expression")
        if tok.kind == "num":
            value = float(tok.text)
            return lambda env: value
        if tok.kind == "name":
            after = self._peek()
            if tok.text in _FUNCTIONS:
                if after is None or after.text != "(":
                    self._fail(f"{tok.text} needs parenthesized argument", tok)
                self._next()
                arg = self._sum()
                self._expect(")")
                fn = _FUNCTIONS[tok.text]
                return lambda env: fn(arg(env))
            if tok.text in _CONSTANTS:
                value = _CONSTANTS[tok.text]
                return lambda env: value
            if tok.text in self.variables:
                name = tok.text
                return lambda env: env[name]
            self._fail(f"unknown identifier {tok.text!r}", tok)
        if tok.text == "(":
            node = self._sum()
            self._expect(")")
            return node
        self._fail(f"unexpected token {tok.text!r}", tok)


def compile_expression(source, variables, where="<expr>"):
    """Compile an expression string to ``f(env)`` over the named variables."""
    tokens = _tokenize(str(source), where)
    if not tokens:
        raise SpecFileError("empty expression", where=where, column=1)
    return _Parser(tokens, where, frozenset(variables)).parse()


def _point_function(source, where):
    ev = compile_expression(source, {"x"}, where)

    def f(x):
        return np.broadcast_to(np.asarray(ev({"x": x}), dtype=float), np.shape(x))

    return f


def _theta_function(source, n, where):
    names = [f"theta{i + 1}" for i in range(n)]
    ev = compile_expression(source, set(names), where)

    def psi(theta):
        env = {name: float(theta[i]) for i, name in enumerate(names)}
        return float(ev(env))

    return psi


def _require(d, key, types, where):
    if key not in d:
        raise SpecFileError(f"missing required key {key!r}", where=where)
    value = d[key]
    if not isinstance(value, types):
        raise SpecFileError(f"key {key!r} has the wrong type", where=where)
    return value


def family_from_dict(data, source="<spec>"):
    """Build an ``ExponentialFamilySpec`` from a decoded spec dictionary."""
    if not isinstance(data, dict):
        raise SpecFileError("spec must be a JSON object", where=source)
    kind = _require(data, "kind", str, source)
    if kind not in ("finite", "real_line"):
        raise SpecFileError(
            f"kind must be 'finite' or 'real_line', got {kind!r}", where=source
        )
    n = _require(data, "n", int, source)
    if isinstance(n, bool) or n < 1:
        raise SpecFileError("n must be a positive integer", where=source)
    name = data.get("name", "user-family")
    if not isinstance(name, str):
        raise SpecFileError("name must be a string", where=source)

    f_sources = _require(data, "F", list, source)
    if len(f_sources) != n:
        raise SpecFileError(f"F must list exactly n={n} expressions", where=source)
    carrier = _point_function(_require(data, "C", str, source), f"{source}:C")
    stats = tuple(
        _point_function(expr, f"{source}:F[{i}]") for i, expr in enumerate(f_sources)
    )
    psi = _theta_function(_require(data, "psi", str, source), n, f"{source}:psi")

    if "domain" in data:
        dom = data["domain"]
        if not isinstance(dom, dict) or "lo" not in dom or "hi" not in dom:
            raise SpecFileError("domain needs 'lo' and 'hi' arrays", where=source)
        try:
            domain = Box(tuple(dom["lo"]), tuple(dom["hi"]))
        except (TypeError, DomainError) as exc:
            raise SpecFileError(f"bad domain: {exc}", where=source) from exc
        if domain.dim != n:
            raise SpecFileError("domain dimension must equal n", where=source)
    else:
        domain = Box.unbounded(n)

    if kind == "finite":
        points = _require(data, "points", list, source)
        labels = tuple(data.get("labels", ()))
        try:
            space = FiniteSpace(tuple(points), labels)
        except (TypeError, ValueError) as exc:
            raise SpecFileError(f"bad points: {exc}", where=source) from exc
        envelope = None
    else:
        order = data.get("quad_order", 64)
        if not isinstance(order, int) or isinstance(order, bool) or order < 1:
            raise SpecFileError("quad_order must be a positive integer", where=source)
        space = RealLine(order)
        envelope = None
        if "envelope" in data:
            env = data["envelope"]
            if (
                not isinstance(env, dict)
                or not isinstance(env.get("center"), (int, float))
                or not isinstance(env.get("scale"), (int, float))
                or env["scale"] <= 0
            ):
                raise SpecFileError(
                    "envelope needs numeric 'center' and positive 'scale'",
                    where=source,
                )
            center, scale = float(env["center"]), float(env["scale"])
            envelope = lambda theta: (center, scale)  # noqa: E731

    lo = tuple(max(a, -2.0) for a in domain.lo)
    hi = tuple(min(b, 2.0) for b in domain.hi)
    width = [(b - a) for a, b in zip(lo, hi)]
    sample_box = None
    if all(w > 0 for w in width):
        margin = [0.05 * w for w in width]
        sample_box = Box(
            tuple(a + m for a, m in zip(lo, margin)),
            tuple(b - m for b, m in zip(hi, margin)),
        )

    return ExponentialFamilySpec(
        name=name,
        space=space,
        carrier=carrier,
        statistics=stats,
        log_partition=psi,
        domain=domain,
        envelope=envelope,
        sample_box=sample_box,
    )


def load_family(path):
    """Load a family spec from a JSON file; errors carry file and position."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(
            f"invalid JSON at line {exc.lineno}: {exc.msg}",
            where=str(path),
            column=exc.colno,
        ) from exc
    return family_from_dict(data, source=str(path))
