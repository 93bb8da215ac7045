#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

"""Expression grammar for right-hand sides and boundary data.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := number | variable | function '(' expr ')' | '(' expr ')'
            | '-' base

Variables are ``x1`` .. ``xn``, ``t`` and ``z``; functions ``exp`` and
``abs``. Evaluation is vectorized over numpy arrays.
"""

import dataclasses
import itertools
import operator
import re

import numpy as np
import pyparsing as pp

from khessian_lab import error

pp.ParserElement.enable_packrat()

FUNCTIONS = {'exp': np.exp, 'abs': np.abs}

_VARIABLE_RE = re.compile(r'^(x[1-9][0-9]*|t|z)$')

_BINARY = {'+': operator.add, '-': operator.sub,
           '*': operator.mul, '/': operator.truediv}


class Expression(object):
    """Base class of syntax tree nodes."""

    def evaluate(self, env):
        raise NotImplementedError()

    def derivative(self, var):
        raise NotImplementedError()

    def variables(self):
        return set()

    def __call__(self, **env):
        return self.evaluate(env)

    @property
    def is_constant(self):
        return not self.variables()


def _atom(node):
    if isinstance(node, (Number, Variable, Call, Binary)):
        return str(node)
    return '(%s)' % node


@dataclasses.dataclass(frozen=True)
class Number(Expression):
    value: float
    loc: int = dataclasses.field(default=0, compare=False)

    def evaluate(self, env):
        return self.value

    def derivative(self, var):
        return Number(0.0)

    def __str__(self):
        return repr(float(self.value))


@dataclasses.dataclass(frozen=True)
class Variable(Expression):
    name: str
    loc: int = dataclasses.field(default=0, compare=False)

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise error.ExpressionError(
                'No value bound to %s at offset %s' % (self.name, self.loc),
                offset=self.loc)

    def derivative(self, var):
        return Number(1.0 if var == self.name else 0.0)

    def variables(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclasses.dataclass(frozen=True)
class Negate(Expression):
    operand: Expression
    loc: int = dataclasses.field(default=0, compare=False)

    def evaluate(self, env):
        return -self.operand.evaluate(env)

    def derivative(self, var):
        return neg(self.operand.derivative(var))

    def variables(self):
        return self.operand.variables()

    def __str__(self):
        return '-' + _atom(self.operand)


@dataclasses.dataclass(frozen=True)
class Binary(Expression):
    op: str
    left: Expression
    right: Expression
    loc: int = dataclasses.field(default=0, compare=False)

    def evaluate(self, env):
        left = self.left.evaluate(env)
        right = self.right.evaluate(env)
        if self.op == '/' and np.any(np.asarray(right) == 0):
            raise error.ExpressionError(
                'Division by zero in "%s" at offset %s' % (self, self.loc),
                offset=self.loc)
        return _BINARY[self.op](left, right)

    def derivative(self, var):
        da = self.left.derivative(var)
        db = self.right.derivative(var)
        if self.op == '+':
            return add(da, db)
        if self.op == '-':
            return sub(da, db)
        if self.op == '*':
            return add(mul(da, self.right), mul(self.left, db))
        return div(sub(mul(da, self.right), mul(self.left, db)),
                   power(self.right, 2))

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return '(%s %s %s)' % (self.left, self.op, self.right)


@dataclasses.dataclass(frozen=True)
class Power(Expression):
    base: Expression
    exponent: int
    loc: int = dataclasses.field(default=0, compare=False)

    def evaluate(self, env):
        return self.base.evaluate(env) ** self.exponent

    def derivative(self, var):
        if self.exponent == 0:
            return Number(0.0)
        return mul(mul(Number(float(self.exponent)),
                       power(self.base, self.exponent - 1)),
                   self.base.derivative(var))

    def variables(self):
        return self.base.variables()

    def __str__(self):
        return '%s^%d' % (_atom(self.base), self.exponent)


@dataclasses.dataclass(frozen=True)
class Call(Expression):
    function: str
    argument: Expression
    loc: int = dataclasses.field(default=0, compare=False)

    def evaluate(self, env):
        return FUNCTIONS[self.function](self.argument.evaluate(env))

    def derivative(self, var):
        inner = self.argument.derivative(var)
        if self.function == 'exp':
            return mul(self, inner)
        # d|a| = a / |a| da, undefined at a = 0
        return mul(div(self.argument, self), inner)

    def variables(self):
        return self.argument.variables()

    def __str__(self):
        return '%s(%s)' % (self.function, self.argument)


def _is_number(node, value=None):
    return isinstance(node, Number) and (value is None
                                         or node.value == value)


def neg(a):
    if _is_number(a):
        return Number(-a.value)
    return Negate(a)


def add(a, b):
    if _is_number(a, 0.0):
        return b
    if _is_number(b, 0.0):
        return a
    if _is_number(a) and _is_number(b):
        return Number(a.value + b.value)
    return Binary('+', a, b)


def sub(a, b):
    if _is_number(b, 0.0):
        return a
    if _is_number(a, 0.0):
        return neg(b)
    if _is_number(a) and _is_number(b):
        return Number(a.value - b.value)
    return Binary('-', a, b)


def mul(a, b):
    if _is_number(a, 0.0) or _is_number(b, 0.0):
        return Number(0.0)
    if _is_number(a, 1.0):
        return b
    if _is_number(b, 1.0):
        return a
    if _is_number(a) and _is_number(b):
        return Number(a.value * b.value)
    return Binary('*', a, b)


def div(a, b):
    if _is_number(a, 0.0):
        return Number(0.0)
    if _is_number(b, 1.0):
        return a
    return Binary('/', a, b)


def power(a, exponent):
    if exponent == 0:
        return Number(1.0)
    if exponent == 1:
        return a
    if _is_number(a):
        return Number(a.value ** exponent)
    return Power(a, exponent)


def determinant(matrix):
    """Symbolic determinant by permutation expansion (small matrices)."""
    n = len(matrix)
    if n == 0:
        return Number(1.0)
    total = Number(0.0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n)
                         if perm[i] > perm[j])
        term = Number(1.0)
        for row, col in enumerate(perm):
            term = mul(term, matrix[row][col])
        total = sub(total, term) if inversions % 2 else add(total, term)
    return total


def hessian_sigma(expr, n, k):
    """Symbolic S_k of the spatial Hessian of `expr`."""
    names = ['x%d' % (i + 1) for i in range(n)]
    first = [expr.derivative(name) for name in names]
    hess = [[first[i].derivative(names[j]) for j in range(n)]
            for i in range(n)]
    total = Number(0.0)
    for idx in itertools.combinations(range(n), k):
        total = add(total, determinant([[hess[i][j] for j in idx]
                                        for i in idx]))
    return total


def _operator(s, loc, toks):
    return [(toks[0], loc)]


def _fold(s, loc, toks):
    node = toks[0]
    for (op, at), right in zip(toks[1::2], toks[2::2]):
        node = Binary(op, node, right, loc=at)
    return node


def _build_grammar():
    expr = pp.Forward()
    base = pp.Forward()

    number = pp.Regex(r'(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?')
    number.set_parse_action(lambda s, l, t: Number(float(t[0]), loc=l))

    identifier = pp.Word(pp.alphas, pp.alphanums + '_')
    lpar = pp.Suppress('(')
    rpar = pp.Suppress(')')

    call = identifier + lpar + expr + rpar
    call.set_parse_action(lambda s, l, t: Call(t[0], t[1], loc=l))

    variable = identifier.copy()
    variable.set_parse_action(lambda s, l, t: Variable(t[0], loc=l))

    negation = pp.Suppress('-') + base
    negation.set_parse_action(lambda s, l, t: Negate(t[0], loc=l))

    base <<= number | call | variable | (lpar + expr + rpar) | negation

    integer = pp.Word(pp.nums).set_parse_action(lambda s, l, t: int(t[0]))
    factor = base + pp.Optional(pp.Suppress('^') + integer)
    factor.set_parse_action(
        lambda s, l, t: Power(t[0], t[1], loc=l) if len(t) == 2 else t[0])

    mul_op = pp.one_of('* /').set_parse_action(_operator)
    add_op = pp.one_of('+ -').set_parse_action(_operator)

    term = factor + pp.ZeroOrMore(mul_op + factor)
    term.set_parse_action(_fold)

    expr <<= term + pp.ZeroOrMore(add_op + term)
    expr.set_parse_action(_fold)
    return expr


_GRAMMAR = _build_grammar()


def _unknown_identifiers(node, variables):
    unknown = []
    if isinstance(node, Variable) and node.name not in variables:
        unknown.append(node.name)
    if isinstance(node, Call) and node.function not in FUNCTIONS:
        unknown.append(node.function)
    for child in ('operand', 'left', 'right', 'base', 'argument'):
        if hasattr(node, child):
            unknown.extend(_unknown_identifiers(getattr(node, child),
                                                variables))
    return unknown


def parse_expression(text, variables=None):
    """Parse `text` into an expression tree.

    :param variables: allowed variable names; by default any ``x<i>``,
        ``t`` and ``z``
    :raises: `error.ExpressionError` with the byte offset on syntax errors
        and the list of unknown identifiers otherwise
    """
    try:
        tree = _GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as exc:
        offset = len(text[:exc.loc].encode('utf-8'))
        raise error.ExpressionError(
            'Syntax error in "%(text)s" at byte offset %(off)s: %(msg)s'
            % {'text': text, 'off': offset, 'msg': exc.msg}, offset=offset)

    if variables is None:
        allowed = {name for name in tree.variables()
                   if _VARIABLE_RE.match(name)}
    else:
        allowed = set(variables)
    unknown = _unknown_identifiers(tree, allowed)
    if unknown:
        raise error.ExpressionError(
            'Unknown identifiers in "%s": %s'
            % (text, ', '.join(sorted(set(unknown)))))
    return tree


def constant(value):
    return Number(float(value))


def environment(coords, t, z=None):
    """Variable bindings for coordinates of shape ``(..., n)``."""
    coords = np.asarray(coords, dtype=float)
    env = {'x%d' % (i + 1): coords[..., i] for i in range(coords.shape[-1])}
    env['t'] = t
    if z is not None:
        env['z'] = z
    return env


def evaluate_on(expr, coords, t, z=None):
    """Evaluate and broadcast to the coordinate grid shape."""
    coords = np.asarray(coords, dtype=float)
    value = expr.evaluate(environment(coords, t, z))
    return np.broadcast_to(np.asarray(value, dtype=float),
                           coords.shape[:-1]).copy()
