"""Concrete syntax: tokenizer, parsers and printers for .dl, .txn and .fol files.

Grammar summary (see docs/formats.md for the EBNF):

  database file   statement*   where statement is a clause or a directive
  clause          head [ ':-' body ] '.'    facts are bodyless unit clauses
  body            literal (',' literal)*
  literal         ['not'] atom | term CMP term    CMP in  =  \\=  <  <=
  directive       ':-' ('edb'|'idb') pred '/' arity (',' pred '/' arity)* '.'
  constraint file '.'-terminated formulas; precedence not > & > | > -> <- <->
  quantifiers     'forall'/'exists' VAR [':' sort] <unary-formula>
  transaction     lines 'add <clause>' / 'del <clause>'

'%' starts a line comment everywhere.  Variables begin with an uppercase
letter; constants and predicates are identifiers starting with a lowercase
letter or '_' (the '_' prefix is reserved for compiler-generated helper
predicates), or integers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from . import formulas as F
from .terms import Atom, Const, Goal, Literal, Term, Var

COMPARISONS = ("<=", "<", "=", "\\=")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # ident | var | int | punct
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<ident>[a-z_][A-Za-z0-9_]*)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<int>-?\d+)
  | (?P<punct>:-|<->|<-|->|<=|\\=|[().,:&|</=])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, m.start() - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + value.rindex("\n") + 1
        pos = m.end()
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("punct", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    def error(self, message: str) -> ParseError:
        tok = self.peek() or (self.tokens[-1] if self.tokens else None)
        if tok is None:
            return ParseError(message, 1, 1)
        return ParseError(message, tok.line, tok.col)


# -- terms, atoms, literals ---------------------------------------------------


def parse_term(ts: TokenStream, allow_compound: bool = False) -> Term:
    tok = ts.next()
    if tok.kind == "var":
        return Var(tok.text)
    if tok.kind == "int":
        return Const(int(tok.text))
    if tok.kind == "ident":
        if ts.at("("):
            if not allow_compound:
                raise ParseError(
                    "function symbols are not allowed in database terms", tok.line, tok.col
                )
            ts.expect("(")
            args = [parse_term(ts, allow_compound)]
            while ts.at(","):
                ts.next()
                args.append(parse_term(ts, allow_compound))
            ts.expect(")")
            from .terms import Compound

            return Compound(tok.text, tuple(args))
        return Const(tok.text)
    raise ParseError(f"expected a term, found {tok.text!r}", tok.line, tok.col)


def parse_atom(ts: TokenStream) -> Atom:
    tok = ts.next()
    if tok.kind != "ident":
        raise ParseError(f"expected a predicate name, found {tok.text!r}", tok.line, tok.col)
    args: list[Term] = []
    if ts.at("("):
        ts.next()
        args.append(parse_term(ts))
        while ts.at(","):
            ts.next()
            args.append(parse_term(ts))
        ts.expect(")")
    return Atom(tok.text, tuple(args))


def _parse_literal(ts: TokenStream) -> Literal:
    positive = True
    if ts.at("not"):
        ts.next()
        positive = False
    tok = ts.peek()
    if tok is None:
        raise ts.error("expected a literal")
    # comparison literal: term CMP term
    if tok.kind in ("var", "int") or _lookahead_comparison(ts):
        left = parse_term(ts)
        op = ts.next()
        if op.text not in COMPARISONS:
            raise ParseError(f"expected a comparison operator, found {op.text!r}", op.line, op.col)
        right = parse_term(ts)
        return Literal(Atom(op.text, (left, right)), positive)
    return Literal(parse_atom(ts), positive)


def _lookahead_comparison(ts: TokenStream) -> bool:
    tok = ts.peek()
    if tok is None or tok.kind != "ident":
        return False
    nxt = ts.tokens[ts.i + 1] if ts.i + 1 < len(ts.tokens) else None
    return nxt is not None and nxt.text in COMPARISONS


def parse_goal_text(text: str) -> Goal:
    """Parse a comma-separated conjunction of literals (test/CLI helper)."""
    ts = TokenStream(tokenize(text))
    lits = [_parse_literal(ts)]
    while ts.at(","):
        ts.next()
        lits.append(_parse_literal(ts))
    if ts.peek() is not None:
        raise ts.error("trailing input after goal")
    return tuple(lits)


# -- clauses and database files ----------------------------------------------


@dataclass(frozen=True)
class RawClause:
    head: Atom
    body: tuple[Literal, ...]


@dataclass(frozen=True)
class ParsedDatabase:
    clauses: tuple[RawClause, ...]
    declared_edb: frozenset[tuple[str, int]]
    declared_idb: frozenset[tuple[str, int]]


def _parse_clause_body(ts: TokenStream) -> tuple[Literal, ...]:
    body = [_parse_literal(ts)]
    while ts.at(","):
        ts.next()
        body.append(_parse_literal(ts))
    return tuple(body)


def parse_clause(ts: TokenStream) -> RawClause:
    head = parse_atom(ts)
    body: tuple[Literal, ...] = ()
    if ts.at(":-"):
        ts.next()
        body = _parse_clause_body(ts)
    ts.expect(".")
    return RawClause(head, body)


def parse_clause_text(text: str) -> RawClause:
    ts = TokenStream(tokenize(text))
    clause = parse_clause(ts)
    if ts.peek() is not None:
        raise ts.error("trailing input after clause")
    return clause


def _parse_directive(ts: TokenStream, edb: set, idb: set) -> None:
    ts.expect(":-")
    word = ts.next()
    if word.text not in ("edb", "idb"):
        raise ParseError(f"unknown directive {word.text!r}", word.line, word.col)
    target = edb if word.text == "edb" else idb
    while True:
        name = ts.next()
        if name.kind != "ident":
            raise ParseError("expected predicate name in directive", name.line, name.col)
        ts.expect("/")
        arity = ts.next()
        if arity.kind != "int" or int(arity.text) < 0:
            raise ParseError("expected an arity after '/'", arity.line, arity.col)
        target.add((name.text, int(arity.text)))
        if ts.at(","):
            ts.next()
            continue
        ts.expect(".")
        return


def parse_database_text(text: str) -> ParsedDatabase:
    ts = TokenStream(tokenize(text))
    clauses: list[RawClause] = []
    edb: set[tuple[str, int]] = set()
    idb: set[tuple[str, int]] = set()
    while ts.peek() is not None:
        if ts.at(":-"):
            _parse_directive(ts, edb, idb)
        else:
            clauses.append(parse_clause(ts))
    return ParsedDatabase(tuple(clauses), frozenset(edb), frozenset(idb))


# -- transactions -------------------------------------------------------------


@dataclass(frozen=True)
class ParsedTransaction:
    deletes: tuple[RawClause, ...]
    adds: tuple[RawClause, ...]


def parse_transaction_text(text: str) -> ParsedTransaction:
    deletes: list[RawClause] = []
    adds: list[RawClause] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("%", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("add "):
            adds.append(parse_clause_text(stripped[4:]))
        elif stripped.startswith("del "):
            deletes.append(parse_clause_text(stripped[4:]))
        else:
            raise ParseError("transaction lines must start with 'add' or 'del'", lineno, 1)
    return ParsedTransaction(tuple(deletes), tuple(adds))


# -- formulas -----------------------------------------------------------------


def parse_formulas_text(text: str) -> list[F.Formula]:
    ts = TokenStream(tokenize(text))
    out: list[F.Formula] = []
    while ts.peek() is not None:
        out.append(_parse_formula(ts))
        ts.expect(".")
    return out


def _parse_formula(ts: TokenStream) -> F.Formula:
    return _parse_implication(ts)


def _parse_implication(ts: TokenStream) -> F.Formula:
    left = _parse_disjunction(ts)
    tok = ts.peek()
    if tok is not None and tok.text in ("->", "<-", "<->"):
        ts.next()
        right = _parse_implication(ts)
        if tok.text == "->":
            return F.Implies(left, right)
        if tok.text == "<-":
            return F.ImpliedBy(left, right)
        return F.Iff(left, right)
    return left


def _parse_disjunction(ts: TokenStream) -> F.Formula:
    left = _parse_conjunction(ts)
    while ts.at("|"):
        ts.next()
        left = F.Or(left, _parse_conjunction(ts))
    return left


def _parse_conjunction(ts: TokenStream) -> F.Formula:
    left = _parse_unary(ts)
    while ts.at("&"):
        ts.next()
        left = F.And(left, _parse_unary(ts))
    return left


def _parse_unary(ts: TokenStream) -> F.Formula:
    tok = ts.peek()
    if tok is None:
        raise ts.error("expected a formula")
    if tok.text == "not":
        ts.next()
        return F.Not(_parse_unary(ts))
    if tok.text in ("forall", "exists"):
        ts.next()
        var_tok = ts.next()
        if var_tok.kind != "var":
            raise ParseError("quantifier needs a variable", var_tok.line, var_tok.col)
        sort: str | None = None
        if ts.at(":"):
            ts.next()
            sort_tok = ts.next()
            if sort_tok.kind != "ident":
                raise ParseError("sort must be an identifier", sort_tok.line, sort_tok.col)
            sort = sort_tok.text
        body = _parse_unary(ts)
        cls = F.Forall if tok.text == "forall" else F.Exists
        return cls(Var(var_tok.text), sort, body)
    if tok.text == "(":
        ts.next()
        inner = _parse_formula(ts)
        ts.expect(")")
        return inner
    # comparison or plain atom
    lit = _parse_literal(ts)
    inner: F.Formula = F.FAtom(lit.atom)
    return inner if lit.positive else F.Not(inner)


# -- printers -----------------------------------------------------------------


def format_term(t: Term) -> str:
    return repr(t)


def format_atom(a: Atom) -> str:
    if a.pred in COMPARISONS and len(a.args) == 2:
        return f"{format_term(a.args[0])} {a.pred} {format_term(a.args[1])}"
    return repr(a)


def format_literal(lit: Literal) -> str:
    body = format_atom(lit.atom)
    return body if lit.positive else "not " + body


def format_goal(goal: Goal) -> str:
    return ", ".join(format_literal(lit) for lit in goal) if goal else "<empty>"
