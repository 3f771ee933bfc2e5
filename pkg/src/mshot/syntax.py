"""Input language: terms, rules, directives, and the subprogram splitter.

The accepted language is the subset needed for multi-shot workflows: normal
rules, integrity constraints, choice heads with optional count bounds,
``#external``, ``#minimize`` (with ``:~`` weak-constraint sugar), ``#show``,
``#const``, ``#program``, and ``#script`` blocks (parsed, carried verbatim,
never executed).  Body aggregates, disjunctive heads, and classical negation
are rejected with positioned diagnostics.

Statements are grouped into named, parameterized subprograms: a ``#program``
directive opens a group that extends to the next such directive; everything
before the first directive belongs to ``base`` with no parameters, and groups
sharing a name and parameter count are concatenated in source order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import DuplicateParamError, NonGroundTermError, ParseError, UnsafeVariableError

__all__ = [
    "Integer",
    "Symbol",
    "Variable",
    "Function",
    "BinOp",
    "Interval",
    "Term",
    "Atom",
    "AtomLiteral",
    "Comparison",
    "BodyLiteral",
    "ChoiceElement",
    "ChoiceHead",
    "Rule",
    "ExternalDecl",
    "MinimizeElement",
    "Minimize",
    "ShowSig",
    "ConstDef",
    "ScriptBlock",
    "SubprogramDef",
    "parse_program",
    "parse_term",
    "check_safety",
    "term_str",
    "atom_str",
    "literal_str",
    "statement_str",
    "program_str",
    "atom_from_term",
]


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Integer:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Symbol:
    """A constant symbol: a plain identifier or a quoted string."""

    name: str
    quoted: bool = False

    def __str__(self):
        return term_str(self)


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return term_str(self)


@dataclass(frozen=True)
class Function:
    name: str
    args: tuple

    def __str__(self):
        return term_str(self)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Term"
    right: "Term"

    def __str__(self):
        return term_str(self)


@dataclass(frozen=True)
class Interval:
    lo: "Term"
    hi: "Term"

    def __str__(self):
        return term_str(self)


Term = Union[Integer, Symbol, Variable, Function, BinOp, Interval]


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple = ()

    @property
    def arity(self):
        return len(self.args)

    def __str__(self):
        return atom_str(self)


@dataclass(frozen=True)
class AtomLiteral:
    atom: Atom
    negated: bool = False

    def __str__(self):
        return literal_str(self)


@dataclass(frozen=True)
class Comparison:
    """Relational body literal; never carries default negation."""

    left: Term
    op: str  # one of = != < <= > >=
    right: Term

    def __str__(self):
        return literal_str(self)


BodyLiteral = Union[AtomLiteral, Comparison]


@dataclass(frozen=True)
class ChoiceElement:
    atom: Atom
    condition: tuple = ()

    def __str__(self):
        if self.condition:
            return f"{self.atom} : " + ", ".join(str(l) for l in self.condition)
        return str(self.atom)


@dataclass(frozen=True)
class ChoiceHead:
    elements: tuple
    lower: Optional[int] = None
    upper: Optional[int] = None


@dataclass(frozen=True)
class Rule:
    head: Union[None, Atom, ChoiceHead]
    body: tuple = ()
    location: tuple = field(default=(0, 0), compare=False)

    def __str__(self):
        return statement_str(self)


@dataclass(frozen=True)
class ExternalDecl:
    atom: Atom
    condition: tuple = ()
    location: tuple = field(default=(0, 0), compare=False)

    def __str__(self):
        return statement_str(self)


@dataclass(frozen=True)
class MinimizeElement:
    """One element of a minimize statement.

    ``weight`` is the leading term, ``priority`` the optional ``@`` term
    (defaulting to 0), and ``rest`` the remaining tuple terms.
    ``has_priority`` records whether ``@`` appeared, because it is part of
    the element's dedup tuple.
    """

    weight: Term
    priority: Term
    rest: tuple = ()
    condition: tuple = ()
    has_priority: bool = False

    def tuple_terms(self):
        if self.has_priority:
            return (self.weight, self.priority) + self.rest
        return (self.weight,) + self.rest

    def __str__(self):
        s = str(self.weight)
        if self.has_priority:
            s += f"@{self.priority}"
        if self.rest:
            s += "," + ",".join(str(t) for t in self.rest)
        if self.condition:
            s += " : " + ", ".join(str(l) for l in self.condition)
        return s


@dataclass(frozen=True)
class Minimize:
    elements: tuple
    location: tuple = field(default=(0, 0), compare=False)

    def __str__(self):
        return statement_str(self)


@dataclass(frozen=True)
class ShowSig:
    name: str
    arity: int
    location: tuple = field(default=(0, 0), compare=False)

    def __str__(self):
        return statement_str(self)


@dataclass(frozen=True)
class ConstDef:
    name: str
    value: Term
    location: tuple = field(default=(0, 0), compare=False)

    def __str__(self):
        return statement_str(self)


@dataclass(frozen=True)
class ScriptBlock:
    language: str
    text: str
    location: tuple = field(default=(0, 0), compare=False)

    def __str__(self):
        return statement_str(self)


Statement = Union[Rule, ExternalDecl, Minimize, ShowSig, ConstDef, ScriptBlock]


@dataclass
class SubprogramDef:
    """Named bundle of statements with formal parameters."""

    name: str
    params: tuple = ()
    statements: list = field(default_factory=list)

    @property
    def key(self):
        return (self.name, len(self.params))

    def __str__(self):
        head = f"#program {self.name}" + (
            "(" + ",".join(self.params) + ")" if self.params else ""
        ) + "."
        return "\n".join([head] + [statement_str(s) for s in self.statements])


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_PUNCT = {
    "..": "DOTS",
    ":-": "IF",
    ":~": "WIF",
    "!=": "NE",
    "<=": "LE",
    ">=": "GE",
    ".": "DOT",
    ",": "COMMA",
    ";": "SEMI",
    ":": "COLON",
    "(": "LPAREN",
    ")": "RPAREN",
    "{": "LBRACE",
    "}": "RBRACE",
    "[": "LBRACK",
    "]": "RBRACK",
    "=": "EQ",
    "<": "LT",
    ">": "GT",
    "+": "PLUS",
    "-": "MINUS",
    "*": "STAR",
    "/": "SLASH",
    "@": "AT",
}

_DIRECTIVES = {"program", "external", "minimize", "show", "const", "script", "end"}

_RELOPS = {"EQ": "=", "NE": "!=", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}

_COMPLEMENT = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


@dataclass
class _Token:
    kind: str
    value: str
    line: int
    col: int


class _Lexer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message):
        raise ParseError(self.line, self.col, message)

    def _advance(self, n):
        chunk = self.text[self.pos : self.pos + n]
        self.pos += n
        nl = chunk.count("\n")
        if nl:
            self.line += nl
            self.col = n - chunk.rfind("\n")
        else:
            self.col += n

    def _skip_space(self):
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self._advance(1)
            elif c == "%":
                end = self.text.find("\n", self.pos)
                self._advance((end if end >= 0 else len(self.text)) - self.pos)
            else:
                return

    @staticmethod
    def _is_digit(c):
        return "0" <= c <= "9"

    @staticmethod
    def _is_word(c):
        return "a" <= c <= "z" or "A" <= c <= "Z" or "0" <= c <= "9" or c == "_"

    def next_token(self):
        self._skip_space()
        line, col = self.line, self.col
        if self.pos >= len(self.text):
            return _Token("EOF", "", line, col)
        c = self.text[self.pos]
        if self._is_digit(c):
            j = self.pos
            while j < len(self.text) and self._is_digit(self.text[j]):
                j += 1
            value = self.text[self.pos : j]
            self._advance(j - self.pos)
            return _Token("INT", value, line, col)
        if "a" <= c <= "z" or "A" <= c <= "Z" or c == "_":
            j = self.pos
            while j < len(self.text) and self._is_word(self.text[j]):
                j += 1
            value = self.text[self.pos : j]
            self._advance(j - self.pos)
            if value == "not":
                return _Token("NOT", value, line, col)
            if value == "_":
                return _Token("ANON", value, line, col)
            if value[0].isupper():
                return _Token("VAR", value, line, col)
            return _Token("IDENT", value, line, col)
        if c == '"':
            j = self.pos + 1
            out = []
            while True:
                if j >= len(self.text):
                    self.error("unterminated string")
                ch = self.text[j]
                if ch == "\\":
                    if j + 1 >= len(self.text):
                        self.error("unterminated string escape")
                    esc = self.text[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc))
                    if out[-1] is None:
                        self.error(f"unknown string escape '\\{esc}'")
                    j += 2
                elif ch == '"':
                    j += 1
                    break
                elif ch == "\n":
                    self.error("unterminated string")
                else:
                    out.append(ch)
                    j += 1
            self._advance(j - self.pos)
            return _Token("STRING", "".join(out), line, col)
        if c == "#":
            j = self.pos + 1
            while j < len(self.text) and "a" <= self.text[j] <= "z":
                j += 1
            name = self.text[self.pos + 1 : j]
            if name not in _DIRECTIVES:
                self.error(f"unsupported directive '#{name}'")
            self._advance(j - self.pos)
            return _Token("HASH_" + name.upper(), "#" + name, line, col)
        for two in ("..", ":-", ":~", "!=", "<=", ">="):
            if self.text.startswith(two, self.pos):
                self._advance(2)
                return _Token(_PUNCT[two], two, line, col)
        if c in _PUNCT:
            self._advance(1)
            return _Token(_PUNCT[c], c, line, col)
        self.error(f"unexpected character {c!r}")

    def capture_script(self):
        """Raw text up to the next ``#end``; the caller parses the dot."""
        end = self.text.find("#end", self.pos)
        if end < 0:
            self.error("missing '#end.' after #script")
        raw = self.text[self.pos : end]
        self._advance(end - self.pos)
        return raw


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_MAX_TERM_DEPTH = 200


class _Parser:
    def __init__(self, text):
        self.lexer = _Lexer(text)
        self.tok = self.lexer.next_token()
        self.anon_counter = 0
        self._depth = 0

    def error(self, message, tok=None):
        tok = tok or self.tok
        raise ParseError(tok.line, tok.col, message)

    def advance(self):
        tok = self.tok
        self.tok = self.lexer.next_token()
        return tok

    def accept(self, kind):
        if self.tok.kind == kind:
            return self.advance()
        return None

    def expect(self, kind, what):
        if self.tok.kind != kind:
            self.error(f"expected {what}, found {self.tok.value!r}" if self.tok.value else f"expected {what}")
        return self.advance()

    # -- terms ------------------------------------------------------------

    def parse_term(self):
        self._depth += 1
        if self._depth > _MAX_TERM_DEPTH:
            self.error("term nesting too deep")
        try:
            lo = self._additive()
            if self.accept("DOTS"):
                hi = self._additive()
                return Interval(lo, hi)
            return lo
        finally:
            self._depth -= 1

    def _additive(self):
        left = self._multiplicative()
        while self.tok.kind in ("PLUS", "MINUS"):
            op = self.advance().value
            left = BinOp(op, left, self._multiplicative())
        return left

    def _multiplicative(self):
        left = self._unary()
        while self.tok.kind in ("STAR", "SLASH"):
            op = self.advance().value
            left = BinOp(op, left, self._unary())
        return left

    def _unary(self):
        if self.accept("MINUS"):
            inner = self._unary()
            if isinstance(inner, Integer):
                return Integer(-inner.value)
            return BinOp("-", Integer(0), inner)
        return self._primary()

    def _primary(self):
        tok = self.tok
        if tok.kind == "INT":
            self.advance()
            return Integer(int(tok.value))
        if tok.kind == "STRING":
            self.advance()
            return Symbol(tok.value, quoted=True)
        if tok.kind == "VAR":
            self.advance()
            return Variable(tok.value)
        if tok.kind == "ANON":
            self.advance()
            self.anon_counter += 1
            return Variable(f"_{self.anon_counter}")
        if tok.kind == "IDENT":
            self.advance()
            if self.accept("LPAREN"):
                args = [self.parse_term()]
                while self.accept("COMMA"):
                    args.append(self.parse_term())
                self.expect("RPAREN", "')'")
                return Function(tok.value, tuple(args))
            return Symbol(tok.value)
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_term()
            self.expect("RPAREN", "')'")
            return inner
        self.error(f"expected term, found {tok.value!r}" if tok.value else "expected term")

    # -- literals ----------------------------------------------------------

    def _term_to_atom(self, term, tok):
        if isinstance(term, Function):
            return Atom(term.name, term.args)
        if isinstance(term, Symbol) and not term.quoted:
            return Atom(term.name)
        self.error("expected atom", tok)

    def parse_literal(self, allow_aggregate_hint=True):
        tok = self.tok
        if tok.kind == "LBRACE":
            self.error("aggregates are not supported in rule bodies", tok)
        if tok.kind == "NOT":
            self.advance()
            if self.tok.kind == "NOT":
                self.error("double default negation is not supported")
            inner_tok = self.tok
            if inner_tok.kind == "MINUS":
                return self._minus_literal(negated=True)
            term = self.parse_term()
            if self.tok.kind in _RELOPS:
                op = _RELOPS[self.advance().kind]
                right = self.parse_term()
                return Comparison(term, _COMPLEMENT[op], right)
            return AtomLiteral(self._term_to_atom(term, inner_tok), negated=True)
        if tok.kind == "MINUS":
            return self._minus_literal(negated=False)
        term = self.parse_term()
        if self.tok.kind in _RELOPS:
            op = _RELOPS[self.advance().kind]
            right = self.parse_term()
            return Comparison(term, op, right)
        if allow_aggregate_hint and self.tok.kind == "LBRACE" and isinstance(term, Integer):
            self.error("aggregates are not supported in rule bodies")
        return AtomLiteral(self._term_to_atom(term, tok), negated=False)

    def _minus_literal(self, negated):
        # A leading minus is either the start of an arithmetic comparison or
        # classical negation, which this subset rejects.
        tok = self.tok
        term = self.parse_term()
        if self.tok.kind in _RELOPS:
            op = _RELOPS[self.advance().kind]
            right = self.parse_term()
            if negated:
                op = _COMPLEMENT[op]
            return Comparison(term, op, right)
        self.error("classical negation is not supported", tok)

    def parse_body(self, terminators):
        body = [self.parse_literal()]
        while self.accept("COMMA"):
            body.append(self.parse_literal())
        if self.tok.kind not in terminators:
            self.error(f"expected end of body, found {self.tok.value!r}")
        return tuple(body)

    # -- statements ---------------------------------------------------------

    def parse_choice(self, location):
        lower = None
        if self.tok.kind == "INT":
            lower = int(self.advance().value)
        self.expect("LBRACE", "'{'")
        elements = []
        if self.tok.kind != "RBRACE":
            elements.append(self._choice_element())
            while self.accept("SEMI"):
                elements.append(self._choice_element())
        self.expect("RBRACE", "'}'")
        upper = None
        if self.tok.kind == "INT":
            upper = int(self.advance().value)
        return ChoiceHead(tuple(elements), lower, upper)

    def _choice_element(self):
        tok = self.tok
        term = self.parse_term()
        atom = self._term_to_atom(term, tok)
        condition = ()
        if self.accept("COLON"):
            cond = [self.parse_literal()]
            while self.accept("COMMA"):
                cond.append(self.parse_literal())
            condition = tuple(cond)
        return ChoiceElement(atom, condition)

    def parse_rule(self):
        loc = (self.tok.line, self.tok.col)
        if self.accept("IF"):
            body = self.parse_body({"DOT"})
            self.expect("DOT", "'.'")
            return Rule(None, body, location=loc)
        if self.accept("WIF"):
            body = self.parse_body({"DOT"})
            self.expect("DOT", "'.'")
            self.expect("LBRACK", "'[' after weak constraint")
            element = self._minimize_element(condition=body)
            self.expect("RBRACK", "']'")
            return Minimize((element,), location=loc)
        if self.tok.kind in ("INT", "LBRACE"):
            head = self.parse_choice(loc)
            body = ()
            if self.accept("IF"):
                body = self.parse_body({"DOT"})
            self.expect("DOT", "'.'")
            return Rule(head, body, location=loc)
        if self.tok.kind in ("NOT", "VAR", "ANON"):
            self.error("rule head must be an atom or a choice")
        if self.tok.kind == "MINUS":
            self.error("classical negation is not supported")
        tok = self.tok
        term = self.parse_term()
        head = self._term_to_atom(term, tok)
        if self.tok.kind in ("SEMI",):
            self.error("disjunctive heads are not supported")
        body = ()
        if self.accept("IF"):
            body = self.parse_body({"DOT"})
        self.expect("DOT", "'.'")
        return Rule(head, body, location=loc)

    def _minimize_element(self, condition=None):
        weight = self.parse_term()
        priority = Integer(0)
        has_priority = False
        if self.accept("AT"):
            priority = self.parse_term()
            has_priority = True
        rest = []
        while self.accept("COMMA"):
            rest.append(self.parse_term())
        if condition is None:
            condition = ()
            if self.accept("COLON"):
                if self.tok.kind not in ("SEMI", "RBRACE"):
                    cond = [self.parse_literal()]
                    while self.accept("COMMA"):
                        cond.append(self.parse_literal())
                    condition = tuple(cond)
        return MinimizeElement(weight, priority, tuple(rest), condition, has_priority)

    def parse_directive(self):
        loc = (self.tok.line, self.tok.col)
        if self.accept("HASH_EXTERNAL"):
            tok = self.tok
            term = self.parse_term()
            atom = self._term_to_atom(term, tok)
            condition = ()
            if self.accept("COLON"):
                condition = self.parse_body({"DOT"})
            self.expect("DOT", "'.'")
            return ExternalDecl(atom, condition, location=loc)
        if self.accept("HASH_MINIMIZE"):
            self.expect("LBRACE", "'{'")
            elements = []
            if self.tok.kind != "RBRACE":
                elements.append(self._minimize_element())
                while self.accept("SEMI"):
                    elements.append(self._minimize_element())
            self.expect("RBRACE", "'}'")
            self.expect("DOT", "'.'")
            return Minimize(tuple(elements), location=loc)
        if self.accept("HASH_SHOW"):
            name = self.expect("IDENT", "predicate name").value
            self.expect("SLASH", "'/'")
            arity = int(self.expect("INT", "arity").value)
            self.expect("DOT", "'.'")
            return ShowSig(name, arity, location=loc)
        if self.accept("HASH_CONST"):
            name = self.expect("IDENT", "constant name").value
            self.expect("EQ", "'='")
            value = self.parse_term()
            self.expect("DOT", "'.'")
            return ConstDef(name, value, location=loc)
        if self.accept("HASH_SCRIPT"):
            self.expect("LPAREN", "'('")
            lang = self.expect("IDENT", "script language").value
            if self.tok.kind != "RPAREN":
                self.error("expected ')'")
            # The lexer already sits right after ')'; grab the raw script
            # text before tokenization can trip over host-language syntax.
            raw = self.lexer.capture_script()
            self.tok = self.lexer.next_token()
            self.expect("HASH_END", "'#end'")
            self.expect("DOT", "'.'")
            return ScriptBlock(lang, raw, location=loc)
        if self.tok.kind == "HASH_END":
            self.error("'#end' without matching '#script'")
        return None

    def parse_program_header(self):
        loc_tok = self.tok
        self.expect("HASH_PROGRAM", "'#program'")
        name = self.expect("IDENT", "subprogram name").value
        params = []
        if self.accept("LPAREN"):
            seen = set()
            while True:
                ptok = self.expect("IDENT", "parameter name")
                if ptok.value in seen:
                    raise DuplicateParamError(ptok.line, ptok.col, ptok.value)
                seen.add(ptok.value)
                params.append(ptok.value)
                if not self.accept("COMMA"):
                    break
            self.expect("RPAREN", "')'")
        self.expect("DOT", "'.'")
        return name, tuple(params), loc_tok

    def parse_program(self):
        defs = {}

        def get_def(name, params):
            key = (name, len(params))
            if key not in defs:
                defs[key] = SubprogramDef(name, params)
            return defs[key]

        get_def("base", ())
        current = defs[("base", 0)]
        rename = None
        while self.tok.kind != "EOF":
            self.anon_counter = 0
            if self.tok.kind == "HASH_PROGRAM":
                name, params, _ = self.parse_program_header()
                current = get_def(name, params)
                rename = None
                if current.params != params:
                    # Same name/arity under different parameter spellings:
                    # statements concatenate, rewritten to the first spelling.
                    rename = {p: Symbol(q) for p, q in zip(params, current.params)}
                continue
            stmt = self.parse_directive()
            if stmt is None:
                stmt = self.parse_rule()
            if rename:
                stmt = substitute_symbols(stmt, rename)
            current.statements.append(stmt)
        return list(defs.values())


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def parse_program(text):
    """Split ``text`` into subprograms keyed by (name, parameter count).

    Returns the subprograms in first-appearance order with ``base`` first;
    ``base`` always exists, possibly empty.
    """
    return _Parser(text).parse_program()


def parse_term(text):
    """Parse a single ground term, e.g. a CLI constant or subprogram argument."""
    parser = _Parser(text)
    term = parser.parse_term()
    if parser.tok.kind != "EOF":
        parser.error(f"trailing input after term: {parser.tok.value!r}")
    _reject_variables(term)
    return term


def _reject_variables(term):
    if isinstance(term, Variable):
        raise NonGroundTermError(f"term contains variable '{term.name}'")
    if isinstance(term, Function):
        for a in term.args:
            _reject_variables(a)
    elif isinstance(term, BinOp):
        _reject_variables(term.left)
        _reject_variables(term.right)
    elif isinstance(term, Interval):
        _reject_variables(term.lo)
        _reject_variables(term.hi)


def atom_from_term(term):
    """Convert a ground term into an atom (for assignments and assumptions)."""
    if isinstance(term, Function):
        return Atom(term.name, term.args)
    if isinstance(term, Symbol) and not term.quoted:
        return Atom(term.name)
    if isinstance(term, Atom):
        return term
    raise NonGroundTermError(f"'{term}' is not an atom")


# -- safety -----------------------------------------------------------------

def _binding_vars(term, out):
    """Variables bound by matching this term structurally.

    Variables nested under arithmetic or intervals do not bind; they must be
    bound elsewhere before the term can be evaluated.
    """
    if isinstance(term, Variable):
        out.append(term.name)
    elif isinstance(term, Function):
        for a in term.args:
            _binding_vars(a, out)


def _all_vars(term, out):
    if isinstance(term, Variable):
        out.append(term.name)
    elif isinstance(term, Function):
        for a in term.args:
            _all_vars(a, out)
    elif isinstance(term, BinOp):
        _all_vars(term.left, out)
        _all_vars(term.right, out)
    elif isinstance(term, Interval):
        _all_vars(term.lo, out)
        _all_vars(term.hi, out)


def _literal_vars(lit):
    out = []
    if isinstance(lit, AtomLiteral):
        for a in lit.atom.args:
            _all_vars(a, out)
    else:
        _all_vars(lit.left, out)
        _all_vars(lit.right, out)
    return out


def _close_bound(bound, comparisons):
    """Extend ``bound`` with variables assignable through '=' comparisons."""
    changed = True
    while changed:
        changed = False
        for cmp_ in comparisons:
            if cmp_.op != "=":
                continue
            for var_side, other in ((cmp_.left, cmp_.right), (cmp_.right, cmp_.left)):
                if not isinstance(var_side, Variable) or var_side.name in bound:
                    continue
                other_vars = []
                _all_vars(other, other_vars)
                if all(v in bound for v in other_vars):
                    bound.add(var_side.name)
                    changed = True


def _bound_from_body(body):
    bound = set()
    comparisons = []
    for lit in body:
        if isinstance(lit, AtomLiteral):
            if not lit.negated:
                for arg in lit.atom.args:
                    out = []
                    _binding_vars(arg, out)
                    bound.update(out)
        else:
            comparisons.append(lit)
    _close_bound(bound, comparisons)
    return bound


def check_safety(rule):
    """Verify every rule variable is bound; raises naming the first unsafe one.

    A variable is bound if it occurs structurally in a positive body atom, is
    assigned through an ``=`` comparison whose other side is bound, or (for a
    choice element) occurs in the element's own positive condition literals.
    """
    bound = _bound_from_body(rule.body)

    ordered = []  # variable occurrences in source order: head first, then body
    if isinstance(rule.head, Atom):
        for arg in rule.head.args:
            _all_vars(arg, ordered)
        for name in ordered:
            if name not in bound:
                raise UnsafeVariableError(_display_var(name), rule)
    elif isinstance(rule.head, ChoiceHead):
        for element in rule.head.elements:
            elem_bound = set(bound)
            elem_bound.update(_bound_from_body(element.condition))
            comparisons = [l for l in element.condition if isinstance(l, Comparison)]
            _close_bound(elem_bound, comparisons)
            elem_vars = []
            for arg in element.atom.args:
                _all_vars(arg, elem_vars)
            for lit in element.condition:
                elem_vars.extend(_literal_vars(lit))
            for name in elem_vars:
                if name not in elem_bound:
                    raise UnsafeVariableError(_display_var(name), rule)

    for lit in rule.body:
        for name in _literal_vars(lit):
            if name not in bound:
                raise UnsafeVariableError(_display_var(name), rule)


def check_directive_safety(stmt):
    """Safety for external/minimize directives, read as virtual rules."""
    if isinstance(stmt, ExternalDecl):
        check_safety(Rule(stmt.atom, stmt.condition, location=stmt.location))
    elif isinstance(stmt, Minimize):
        for element in stmt.elements:
            bound = _bound_from_body(element.condition)
            needed = []
            for term in element.tuple_terms():
                _all_vars(term, needed)
            for lit in element.condition:
                needed.extend(_literal_vars(lit))
            for name in needed:
                if name not in bound:
                    raise UnsafeVariableError(_display_var(name), stmt)


def _display_var(name):
    return "_" if name.startswith("_") and name[1:].isdigit() else name


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _escape(s):
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def term_str(term):
    if isinstance(term, Integer):
        return str(term.value)
    if isinstance(term, Symbol):
        return f'"{_escape(term.name)}"' if term.quoted else term.name
    if isinstance(term, Variable):
        return _display_var(term.name)
    if isinstance(term, Function):
        return term.name + "(" + ",".join(term_str(a) for a in term.args) + ")"
    if isinstance(term, BinOp):
        return f"({term_str(term.left)}{term.op}{term_str(term.right)})"
    if isinstance(term, Interval):
        return f"{term_str(term.lo)}..{term_str(term.hi)}"
    raise TypeError(f"not a term: {term!r}")


def atom_str(atom):
    if atom.args:
        return atom.name + "(" + ",".join(term_str(a) for a in atom.args) + ")"
    return atom.name


def literal_str(lit):
    if isinstance(lit, AtomLiteral):
        return ("not " if lit.negated else "") + atom_str(lit.atom)
    return f"{term_str(lit.left)} {lit.op} {term_str(lit.right)}"


def _head_str(head):
    if head is None:
        return ""
    if isinstance(head, Atom):
        return atom_str(head)
    parts = []
    if head.lower is not None:
        parts.append(str(head.lower))
    parts.append("{ " + "; ".join(str(e) for e in head.elements) + " }")
    if head.upper is not None:
        parts.append(str(head.upper))
    return " ".join(parts)


def statement_str(stmt):
    if isinstance(stmt, Rule):
        head = _head_str(stmt.head)
        if stmt.body:
            body = ", ".join(literal_str(l) for l in stmt.body)
            return (f"{head} :- {body}." if head else f":- {body}.")
        return f"{head}." if head else ":-."
    if isinstance(stmt, ExternalDecl):
        s = f"#external {atom_str(stmt.atom)}"
        if stmt.condition:
            s += " : " + ", ".join(literal_str(l) for l in stmt.condition)
        return s + "."
    if isinstance(stmt, Minimize):
        return "#minimize{ " + "; ".join(str(e) for e in stmt.elements) + " }."
    if isinstance(stmt, ShowSig):
        return f"#show {stmt.name}/{stmt.arity}."
    if isinstance(stmt, ConstDef):
        return f"#const {stmt.name}={term_str(stmt.value)}."
    if isinstance(stmt, ScriptBlock):
        return f"#script({stmt.language}){stmt.text}#end."
    raise TypeError(f"not a statement: {stmt!r}")


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def substitute_symbols(obj, mapping):
    """Replace occurrences of constant symbols in term positions.

    ``mapping`` maps plain symbol names to replacement terms.  Predicate
    names are untouched; only ``Symbol`` nodes (and therefore subprogram
    parameters and constants) are rewritten.
    """
    if isinstance(obj, Symbol):
        if not obj.quoted and obj.name in mapping:
            return mapping[obj.name]
        return obj
    if isinstance(obj, (Integer, Variable)):
        return obj
    if isinstance(obj, Function):
        return Function(obj.name, tuple(substitute_symbols(a, mapping) for a in obj.args))
    if isinstance(obj, BinOp):
        return BinOp(obj.op, substitute_symbols(obj.left, mapping), substitute_symbols(obj.right, mapping))
    if isinstance(obj, Interval):
        return Interval(substitute_symbols(obj.lo, mapping), substitute_symbols(obj.hi, mapping))
    if isinstance(obj, Atom):
        return Atom(obj.name, tuple(substitute_symbols(a, mapping) for a in obj.args))
    if isinstance(obj, AtomLiteral):
        return AtomLiteral(substitute_symbols(obj.atom, mapping), obj.negated)
    if isinstance(obj, Comparison):
        return Comparison(substitute_symbols(obj.left, mapping), obj.op, substitute_symbols(obj.right, mapping))
    if isinstance(obj, ChoiceElement):
        return ChoiceElement(
            substitute_symbols(obj.atom, mapping),
            tuple(substitute_symbols(l, mapping) for l in obj.condition),
        )
    if isinstance(obj, ChoiceHead):
        return ChoiceHead(
            tuple(substitute_symbols(e, mapping) for e in obj.elements), obj.lower, obj.upper
        )
    if isinstance(obj, Rule):
        head = None if obj.head is None else substitute_symbols(obj.head, mapping)
        return Rule(head, tuple(substitute_symbols(l, mapping) for l in obj.body), location=obj.location)
    if isinstance(obj, ExternalDecl):
        return ExternalDecl(
            substitute_symbols(obj.atom, mapping),
            tuple(substitute_symbols(l, mapping) for l in obj.condition),
            location=obj.location,
        )
    if isinstance(obj, MinimizeElement):
        return MinimizeElement(
            substitute_symbols(obj.weight, mapping),
            substitute_symbols(obj.priority, mapping),
            tuple(substitute_symbols(t, mapping) for t in obj.rest),
            tuple(substitute_symbols(l, mapping) for l in obj.condition),
            obj.has_priority,
        )
    if isinstance(obj, Minimize):
        return Minimize(tuple(substitute_symbols(e, mapping) for e in obj.elements), location=obj.location)
    if isinstance(obj, (ShowSig, ScriptBlock)):
        return obj
    if isinstance(obj, ConstDef):
        return ConstDef(obj.name, substitute_symbols(obj.value, mapping), location=obj.location)
    raise TypeError(f"cannot substitute in {obj!r}")


def program_str(defs):
    """Render subprograms back to source; reparsing yields the same AST."""
    lines = []
    for i, sub in enumerate(defs):
        if not (i == 0 and sub.name == "base" and not sub.params):
            header = f"#program {sub.name}"
            if sub.params:
                header += "(" + ",".join(sub.params) + ")"
            lines.append(header + ".")
        lines.extend(statement_str(s) for s in sub.statements)
    return "\n".join(lines) + ("\n" if lines else "")
