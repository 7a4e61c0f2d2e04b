# -*- coding: utf-8 -*-
"""
Parser and evaluator for the model expression language.

Densities, integrands and region indicators are given as text such as
``sin(x)/sqrt(2)`` or ``y^2 <= x and y >= 0``. Grammar::

    expr    := conj
    conj    := rel { "and" rel }
    rel     := sum [ ("<=" | ">=" | "<" | ">") sum ]
    sum     := term { ("+" | "-") term }
    term    := factor { ("*" | "/") factor }
    factor  := ["-"] power
    power   := atom [ "^" factor ]
    atom    := number | ident | ident "(" expr { "," expr } ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.
Relations evaluate to exactly 0.0 or 1.0 and ``and`` is the product of its operands.

Evaluation is vectorised over an (N, d) array of points and is pure, so a parsed
expression can be shared between threads.
"""
import math
import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import ArityError, EvaluationError, ExpressionSyntaxError, UnknownIdentifierError

CONSTANTS = {
    'pi': math.pi,
    'e': math.e,
}

# name -> arity
FUNCTIONS = {
    'sin': 1,
    'cos': 1,
    'tan': 1,
    'exp': 1,
    'log': 1,
    'sqrt': 1,
    'abs': 1,
    'min': 2,
    'max': 2,
}

KEYWORDS = ('and',)

RELATIONS = ('<=', '>=', '<', '>')

IDENTIFIER = re.compile(r'[a-zA-Z_][a-zA-Z0-9_]*\Z')

_TOKEN = re.compile(r'''
    (?P<space>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)
  | (?P<op><=|>=|[<>+\-*/^(),])
''', re.VERBOSE)


@dataclass(frozen=True)
class VarOrder(object):
    """Ordered, distinct variable names; the implied dimension is their count."""
    names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, 'names', names)
        for name in names:
            if not IDENTIFIER.match(name):
                raise ExpressionSyntaxError('invalid variable name "{}"'.format(name), ','.join(names), 0)
            if name in CONSTANTS or name in FUNCTIONS or name in KEYWORDS:
                raise ExpressionSyntaxError('"{}" is reserved and cannot name a variable'.format(name),
                                            ','.join(names), 0)
        if len(set(names)) != len(names):
            raise ExpressionSyntaxError('variable names must be distinct', ','.join(names), 0)

    @classmethod
    def parse(cls, text):
        """Parses "x,y,z". At least one name is required."""
        names = [name.strip() for name in text.split(',')] if text and text.strip() else []
        if not names:
            raise ExpressionSyntaxError('at least one variable is required', text or '', 0, 'identifier')
        return cls(tuple(names))

    @property
    def dims(self):
        return len(self.names)

    def index(self, name):
        return self.names.index(name)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __str__(self):
        return ','.join(self.names)


# Expression nodes. All of them are immutable and compare structurally.

@dataclass(frozen=True)
class Number(object):
    value: float

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Constant(object):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Variable(object):
    name: str
    index: int

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Negate(object):
    operand: object

    def __str__(self):
        return '(-{})'.format(self.operand)


@dataclass(frozen=True)
class BinaryOp(object):
    op: str
    left: object
    right: object

    def __str__(self):
        return '({} {} {})'.format(self.left, self.op, self.right)


@dataclass(frozen=True)
class Call(object):
    name: str
    args: tuple

    def __str__(self):
        return '{}({})'.format(self.name, ', '.join(str(a) for a in self.args))


@dataclass(frozen=True)
class Compare(object):
    op: str
    left: object
    right: object

    def __str__(self):
        return '({} {} {})'.format(self.left, self.op, self.right)


@dataclass(frozen=True)
class Conjunction(object):
    operands: tuple

    def __str__(self):
        return '({})'.format(' and '.join(str(o) for o in self.operands))


@dataclass(frozen=True)
class ExprAst(object):
    """A parsed expression together with the variable order its points follow."""
    root: object
    vars: VarOrder

    @property
    def is_indicator(self):
        return isinstance(self.root, (Compare, Conjunction))

    def free_vars(self):
        return free_vars(self)

    def eval(self, point=()):
        """Evaluates at a single point ordered by ``vars``; returns a Python float."""
        point = np.asarray(point, dtype=np.float64).reshape(1, -1)
        if point.shape[1] != self.vars.dims:
            raise ValueError('point has {} coordinates, expected {}'.format(point.shape[1], self.vars.dims))
        return float(self.eval_many(point)[0])

    def eval_many(self, points):
        """
        Evaluates at every row of an (N, d) array.
        :param points: array-like of shape (N, d)
        :return: float64 array of shape (N,)
        """
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1 and self.vars.dims == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[1] != self.vars.dims:
            raise ValueError('points must have shape (N, {})'.format(self.vars.dims))
        with np.errstate(all='ignore'):
            values = _Evaluator(points).visit(self.root)
        return np.broadcast_to(values, (points.shape[0],)).astype(np.float64, copy=True)

    def __str__(self):
        return str(self.root)


class _Tokenizer(object):

    def __init__(self, text):
        self.text = text

    def tokens(self):
        """Yields (kind, value, offset) triples ending with an 'end' token."""
        pos = 0
        text = self.text
        while pos < len(text):
            match = _TOKEN.match(text, pos)
            if not match:
                raise ExpressionSyntaxError('unexpected character {!r}'.format(text[pos]), text, pos,
                                            'number, identifier, operator or parenthesis')
            kind = match.lastgroup
            value = match.group(kind)
            if kind == 'ident' and value in KEYWORDS:
                kind = 'keyword'
            if kind != 'space':
                yield kind, value, pos
            pos = match.end()
        yield 'end', '', len(text)


class _Parser(object):

    def __init__(self, text, vars):
        self.text = text
        self.vars = vars
        self.tokens = list(_Tokenizer(text).tokens())
        self.position = 0

    @property
    def current(self):
        return self.tokens[self.position]

    def advance(self):
        token = self.tokens[self.position]
        self.position += 1
        return token

    def check(self, *values):
        kind, value, _ = self.current
        return kind in ('op', 'keyword') and value in values

    def expect(self, value):
        if not self.check(value):
            self.fail('unexpected {}'.format(self.describe()), '"{}"'.format(value))
        return self.advance()

    def describe(self):
        kind, value, _ = self.current
        return 'end of input' if kind == 'end' else '"{}"'.format(value)

    def fail(self, message, expected):
        raise ExpressionSyntaxError(message, self.text, self.current[2], expected)

    def parse(self):
        node = self.conj()
        if self.current[0] != 'end':
            self.fail('unexpected {}'.format(self.describe()), 'operator or end of input')
        return node

    def conj(self):
        operands = [(self.current[2], self.rel())]
        while self.check('and'):
            self.advance()
            operands.append((self.current[2], self.rel()))
        if len(operands) == 1:
            return operands[0][1]
        for offset, node in operands:
            # "and" only combines indicators
            if not isinstance(node, (Compare, Conjunction)):
                raise ExpressionSyntaxError('operand of "and" must be a relation', self.text, offset, 'relation')
        return Conjunction(tuple(node for _, node in operands))

    def rel(self):
        left = self.sum()
        if self.check(*RELATIONS):
            op = self.advance()[1]
            return Compare(op, left, self.sum())
        return left

    def sum(self):
        node = self.term()
        while self.check('+', '-'):
            op = self.advance()[1]
            node = BinaryOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.check('*', '/'):
            op = self.advance()[1]
            node = BinaryOp(op, node, self.factor())
        return node

    def factor(self):
        if self.check('-'):
            self.advance()
            return Negate(self.power())
        return self.power()

    def power(self):
        base = self.atom()
        if self.check('^'):
            self.advance()
            return BinaryOp('^', base, self.factor())
        return base

    def atom(self):
        kind, value, offset = self.current
        if kind == 'number':
            self.advance()
            number = float(value)
            if not math.isfinite(number):
                raise ExpressionSyntaxError('number out of range', self.text, offset, 'finite number')
            return Number(number)
        if kind == 'ident':
            self.advance()
            if self.check('('):
                return self.call(value, offset)
            if value in CONSTANTS:
                return Constant(value)
            if value in self.vars.names:
                return Variable(value, self.vars.index(value))
            if value in FUNCTIONS:
                self.fail('function "{}" used without arguments'.format(value), '"("')
            raise UnknownIdentifierError(value, len(self.text[:offset].encode('utf-8')))
        if self.check('('):
            self.advance()
            node = self.conj()
            self.expect(')')
            return node
        self.fail('unexpected {}'.format(self.describe()), 'number, identifier or "("')

    def call(self, name, offset):
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(name, len(self.text[:offset].encode('utf-8')))
        self.expect('(')
        args = [self.conj()]
        while self.check(','):
            self.advance()
            args.append(self.conj())
        self.expect(')')
        if len(args) != FUNCTIONS[name]:
            raise ArityError(name, FUNCTIONS[name], len(args))
        return Call(name, tuple(args))


def _as_var_order(vars):
    if isinstance(vars, VarOrder):
        return vars
    if isinstance(vars, str):
        return VarOrder.parse(vars) if vars.strip() else VarOrder(())
    return VarOrder(tuple(vars or ()))


def parse(text, vars=()):
    """
    Parses ``text`` into an ExprAst over ``vars``.

    :param text: expression source, nonempty
    :param vars: VarOrder, iterable of names or a "x,y" string; empty for constant expressions
    :raises ExpressionSyntaxError: with byte offset and expected-token hint
    :raises UnknownIdentifierError: naming the identifier
    :raises ArityError: on a function call with the wrong number of arguments
    """
    vars = _as_var_order(vars)
    if text is None or not text.strip():
        raise ExpressionSyntaxError('empty expression', text or '', 0, 'expression')
    return ExprAst(_Parser(text, vars).parse(), vars)


def evaluate(ast, point=()):
    return ast.eval(point)


def free_vars(ast):
    """Exact set of variable names reachable from the root."""
    node = ast.root if isinstance(ast, ExprAst) else ast
    found = set()
    stack = [node]
    while stack:
        node = stack.pop()
        if isinstance(node, Variable):
            found.add(node.name)
        elif isinstance(node, Negate):
            stack.append(node.operand)
        elif isinstance(node, (BinaryOp, Compare)):
            stack.extend((node.left, node.right))
        elif isinstance(node, Call):
            stack.extend(node.args)
        elif isinstance(node, Conjunction):
            stack.extend(node.operands)
    return frozenset(found)


def to_text(ast):
    """Fully parenthesised source that parses back to the same tree."""
    return str(ast)


class _Evaluator(object):

    def __init__(self, points):
        self.points = points

    def fault(self, node, message, mask):
        index = int(np.flatnonzero(np.broadcast_to(mask, (self.points.shape[0],)))[0])
        raise EvaluationError(node, message, self.points[index])

    def checked(self, node, values):
        bad = ~np.isfinite(values)
        if np.any(bad):
            self.fault(node, 'non-finite result', bad)
        return values

    def visit(self, node):
        method = getattr(self, 'visit_' + type(node).__name__)
        return method(node)

    def visit_Number(self, node):
        return np.float64(node.value)

    def visit_Constant(self, node):
        return np.float64(CONSTANTS[node.name])

    def visit_Variable(self, node):
        return self.points[:, node.index]

    def visit_Negate(self, node):
        return -self.visit(node.operand)

    def visit_BinaryOp(self, node):
        left = self.visit(node.left)
        right = self.visit(node.right)
        if node.op == '+':
            return self.checked(node, left + right)
        if node.op == '-':
            return self.checked(node, left - right)
        if node.op == '*':
            return self.checked(node, left * right)
        if node.op == '/':
            zero = right == 0
            if np.any(zero):
                self.fault(node, 'division by zero', zero)
            return self.checked(node, left / right)
        # '^'
        zero_negative = (left == 0) & (right < 0)
        if np.any(zero_negative):
            self.fault(node, 'zero raised to a negative power', zero_negative)
        return self.checked(node, np.power(left, right))

    def visit_Call(self, node):
        args = [self.visit(arg) for arg in node.args]
        name = node.name
        if name == 'log':
            bad = args[0] <= 0
            if np.any(bad):
                self.fault(node, 'log of a non-positive value', bad)
            return self.checked(node, np.log(args[0]))
        if name == 'sqrt':
            bad = args[0] < 0
            if np.any(bad):
                self.fault(node, 'sqrt of a negative value', bad)
            return np.sqrt(args[0])
        if name == 'min':
            return np.minimum(args[0], args[1])
        if name == 'max':
            return np.maximum(args[0], args[1])
        func = {'sin': np.sin, 'cos': np.cos, 'tan': np.tan, 'exp': np.exp, 'abs': np.abs}[name]
        return self.checked(node, func(args[0]))

    def visit_Compare(self, node):
        left = self.visit(node.left)
        right = self.visit(node.right)
        if node.op == '<=':
            result = left <= right
        elif node.op == '>=':
            result = left >= right
        elif node.op == '<':
            result = left < right
        else:
            result = left > right
        return np.asarray(result, dtype=np.float64)

    def visit_Conjunction(self, node):
        result = np.float64(1.0)
        for operand in node.operands:
            result = result * self.visit(operand)
        return result
