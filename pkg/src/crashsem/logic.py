"""Terms, literals and the rule DSL shared by the semantic rules and the norm KB.

Ground terms are plain Python values: constants are ``str``, integers are
``int`` and compound terms are :class:`Fn`.  Rule patterns may additionally
contain :class:`Var` and :class:`Shift` (a time variable plus an integer
offset, written ``T+1`` / ``T-1``).

DSL summary (one statement per line, ``%`` comments)::

    body1 & body2 -> head1 & head2 .       strict rule
    body : head [blk1, blk2] .             default (justification = head + blockers)
    head .                                 fact
    #sort pred arg1:agent arg1.2:agent arg3:time
    #const Auteur
    #stage kernel
    @published name  /  @reconstructed name    provenance prefix of a rule

Variables start with an uppercase letter unless declared with ``#const``;
quoted atoms (``'PASSÉ'``) are always constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Union


class KBError(ValueError):
    """Syntax or validation error in a rule file."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Shift:
    """A variable plus a constant integer offset (``T+1``)."""

    var: str
    k: int

    def __str__(self) -> str:
        return f"{self.var}{self.k:+d}"


@dataclass(frozen=True)
class Fn:
    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}({','.join(fmt_term(a) for a in self.args)})"


Term = Union[str, int, Fn, Var, Shift]


_PLAIN_ATOM = re.compile(r"^[^\W\d][\w]*$")


def fmt_term(t: Term) -> str:
    if isinstance(t, str):
        if _PLAIN_ATOM.match(t):
            return t
        return "'" + t.replace("'", "\\'") + "'"
    return str(t)


def combine(*parts: Term) -> Term:
    """Left-nested ``combine`` chain: ``combine(a, b, c) == combine(combine(a, b), c)``."""
    if not parts:
        raise ValueError("combine needs at least one part")
    out = parts[0]
    for p in parts[1:]:
        out = Fn("combine", (out, p))
    return out


@dataclass(frozen=True)
class Lit:
    pred: str
    args: tuple = ()
    neg: bool = False

    def __str__(self) -> str:
        sign = "-" if self.neg else ""
        if not self.args:
            return sign + self.pred
        return f"{sign}{self.pred}({','.join(fmt_term(a) for a in self.args)})"

    def complement(self) -> "Lit":
        return Lit(self.pred, self.args, not self.neg)

    @property
    def key(self) -> str:
        return str(self)

    def __lt__(self, other: "Lit") -> bool:
        return str(self) < str(other)


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, Shift):
        yield t.var
    elif isinstance(t, Fn):
        for a in t.args:
            yield from term_vars(a)


def lit_vars(lit: Lit) -> set[str]:
    return {v for a in lit.args for v in term_vars(a)}


def is_ground(t: Term) -> bool:
    return not any(True for _ in term_vars(t))


def substitute(t: Term, b: dict) -> Term:
    if isinstance(t, Var):
        return b.get(t.name, t)
    if isinstance(t, Shift):
        v = b.get(t.var)
        if isinstance(v, int) and not isinstance(v, bool):
            return v + t.k
        return t
    if isinstance(t, Fn):
        return Fn(t.name, tuple(substitute(a, b) for a in t.args))
    return t


def subst_lit(lit: Lit, b: dict) -> Lit:
    return Lit(lit.pred, tuple(substitute(a, b) for a in lit.args), lit.neg)


def match(pattern: Term, value: Term, b: dict) -> dict | None:
    """One-way unification of a pattern against a ground term."""
    if isinstance(pattern, Var):
        if pattern.name in b:
            return b if b[pattern.name] == value else None
        nb = dict(b)
        nb[pattern.name] = value
        return nb
    if isinstance(pattern, Shift):
        if not isinstance(value, int):
            return None
        if pattern.var in b:
            return b if b[pattern.var] == value - pattern.k else None
        nb = dict(b)
        nb[pattern.var] = value - pattern.k
        return nb
    if isinstance(pattern, Fn):
        if not isinstance(value, Fn) or value.name != pattern.name or len(value.args) != len(pattern.args):
            return None
        for p, v in zip(pattern.args, value.args):
            b = match(p, v, b)
            if b is None:
                return None
        return b
    return b if pattern == value and type(pattern) is type(value) else None


def match_lit(pattern: Lit, lit: Lit, b: dict) -> dict | None:
    if pattern.pred != lit.pred or pattern.neg != lit.neg or len(pattern.args) != len(lit.args):
        return None
    for p, v in zip(pattern.args, lit.args):
        b = match(p, v, b)
        if b is None:
            return None
    return b


@dataclass(frozen=True)
class Rule:
    kind: str  # "strict" | "default"
    body: tuple[Lit, ...]
    head: tuple[Lit, ...]
    blockers: tuple[Lit, ...] = ()
    provenance: str | None = None
    stage: str | None = None
    line: int | None = None

    @property
    def is_default(self) -> bool:
        return self.kind == "default"

    @property
    def justification(self) -> tuple[Lit, ...]:
        return self.head + self.blockers

    def __str__(self) -> str:
        body = " & ".join(map(str, self.body))
        head = " & ".join(map(str, self.head))
        if self.kind == "strict":
            return f"{body} -> {head} ." if body else f"{head} ."
        blk = ", ".join(map(str, self.blockers))
        return f"{body or 'true'} : {head} [{blk}] ."


@dataclass
class Program:
    """Parsed rule file: rules plus declarations."""

    rules: list[Rule] = field(default_factory=list)
    sorts: dict[str, dict[tuple[int, ...], str]] = field(default_factory=dict)
    consts: set[str] = field(default_factory=set)
    arities: dict[str, int] = field(default_factory=dict)

    def stage(self, name: str) -> list[Rule]:
        return [r for r in self.rules if r.stage == name]

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)


# --- tokenizer / parser -------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->|→)
  | (?P<num>\d+)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<name>[^\W\d][\w]*)
  | (?P<punct>[()\[\],.:&+\-¬])
    """,
    re.VERBOSE,
)


def _tokenize(text: str, line: int | None, source: str | None) -> list[tuple[str, str]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise KBError(f"unexpected character {text[pos]!r}", line, source)
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        val = m.group()
        if kind == "quoted":
            val = re.sub(r"\\(.)", r"\1", val[1:-1])
        elif kind == "arrow":
            val = "->"
        elif val == "¬":
            val = "-"
        toks.append((kind, val))
    return toks


class _Parser:
    def __init__(self, toks, consts, line, source, variables=True):
        self.toks = toks
        self.i = 0
        self.consts = consts
        self.line = line
        self.source = source
        self.variables = variables

    def err(self, msg):
        raise KBError(msg, self.line, self.source)

    def peek(self, off=0):
        j = self.i + off
        return self.toks[j] if j < len(self.toks) else (None, None)

    def take(self, val=None):
        tok = self.peek()
        if tok[0] is None:
            self.err("unexpected end of statement" + (f", expected {val!r}" if val else ""))
        if val is not None and tok[1] != val:
            self.err(f"expected {val!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def at(self, val):
        return self.peek()[1] == val and self.peek()[0] in ("punct", "arrow")

    def literal(self) -> Lit:
        neg = False
        if self.at("-"):
            self.take()
            neg = True
        kind, name = self.take()
        if kind not in ("name", "quoted"):
            self.err(f"expected predicate name, got {name!r}")
        args: tuple = ()
        if self.at("("):
            args = self.arglist()
        return Lit(name, args, neg)

    def arglist(self) -> tuple:
        self.take("(")
        args = [self.term()]
        while self.at(","):
            self.take()
            args.append(self.term())
        self.take(")")
        return tuple(args)

    def term(self) -> Term:
        kind, val = self.take()
        if kind == "num":
            return int(val)
        if kind == "punct" and val == "-" and self.peek()[0] == "num":
            return -int(self.take()[1])
        if kind == "quoted":
            return val
        if kind != "name":
            self.err(f"expected term, got {val!r}")
        if self.at("("):
            return Fn(val, self.arglist())
        if self.variables and val[0].isupper() and val not in self.consts:
            if self.at("+") or self.at("-"):
                sign = 1 if self.take()[1] == "+" else -1
                k, n = self.take()
                if k != "num":
                    self.err("time offset must be an integer")
                return Shift(val, sign * int(n))
            return Var(val)
        return val

    def conj(self, stop: set[str]) -> list[Lit]:
        lits = []
        if self.peek()[1] in stop:
            return lits
        lits.append(self.literal())
        while self.at("&") or self.at(","):
            self.take()
            lits.append(self.literal())
        return lits


def parse_literal(text: str, variables: bool = False, consts: Iterable[str] = ()) -> Lit:
    """Parse one literal.  With ``variables=False`` (the default) every name is a constant."""
    toks = _tokenize(text.strip().rstrip("."), None, None)
    p = _Parser(toks, set(consts), None, None, variables=variables)
    lit = p.literal()
    if p.i != len(toks):
        p.err(f"trailing input after literal: {toks[p.i][1]!r}")
    return lit


def parse_term(text: str) -> Term:
    toks = _tokenize(text.strip(), None, None)
    p = _Parser(toks, set(), None, None, variables=False)
    t = p.term()
    if p.i != len(toks):
        p.err("trailing input after term")
    return t


def _parse_rule(text: str, consts, line, source, provenance, stage) -> Rule:
    toks = _tokenize(text, line, source)
    if not toks or toks[-1][1] != ".":
        raise KBError("statement must end with '.'", line, source)
    toks = toks[:-1]
    p = _Parser(toks, consts, line, source)
    body: list[Lit] = []
    if p.peek()[1] == "true" and p.peek(1)[1] in (":", "->", None):
        p.take()
    elif not p.at("->") and not p.at(":"):
        body = p.conj({"->", ":"})
    if p.at("->"):
        p.take()
        head = p.conj(set())
        if p.i != len(toks):
            p.err(f"unexpected {p.peek()[1]!r} after rule head")
        return Rule("strict", tuple(body), tuple(head), (), provenance, stage, line)
    if p.at(":"):
        p.take()
        head = p.conj({"["})
        if not head:
            p.err("default without consequent")
        blockers: list[Lit] = []
        if p.at("["):
            p.take()
            if not p.at("]"):
                blockers = p.conj({"]"})
            p.take("]")
        if p.i != len(toks):
            p.err(f"unexpected {p.peek()[1]!r} after default")
        return Rule("default", tuple(body), tuple(head), tuple(blockers), provenance, stage, line)
    if p.i != len(toks):
        p.err(f"unexpected {p.peek()[1]!r}")
    # bare fact(s)
    return Rule("strict", (), tuple(body), (), provenance, stage, line)


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == "'":
            quoted = not quoted
        if ch == "%" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def _check_rule(rule: Rule, arities: dict[str, int], source: str | None) -> None:
    bound = set().union(*(lit_vars(l) for l in rule.body)) if rule.body else set()
    for lit in rule.head + rule.blockers:
        for v in sorted(lit_vars(lit) - bound):
            raise KBError(f"unsafe variable {v} in rule {rule}", rule.line, source)
    for lit in rule.body + rule.head + rule.blockers:
        n = len(lit.args)
        if arities.setdefault(lit.pred, n) != n:
            raise KBError(
                f"arity clash for {lit.pred}: used with {arities[lit.pred]} and {n} arguments",
                rule.line,
                source,
            )


def _parse_sort(parts: list[str], line: int, source: str | None) -> tuple[str, dict]:
    if len(parts) < 2:
        raise KBError("#sort needs a predicate and at least one position", line, source)
    pred, decl = parts[0], {}
    for item in parts[1:]:
        pos, _, sort = item.partition(":")
        m = re.fullmatch(r"(?:arg)?(\d+(?:\.\d+)*)", pos)
        if not m or not sort:
            raise KBError(f"bad sort position {item!r}", line, source)
        decl[tuple(int(x) for x in m.group(1).split("."))] = sort
    return pred, decl


def parse_program(text: str, source: str | None = None) -> Program:
    prog = Program()
    stage: str | None = None
    pending = ""
    start_line = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if not pending and line.startswith("#"):
            parts = line[1:].split()
            if not parts:
                raise KBError("empty directive", lineno, source)
            d, rest = parts[0], parts[1:]
            if d == "sort":
                pred, decl = _parse_sort(rest, lineno, source)
                prog.sorts.setdefault(pred, {}).update(decl)
            elif d == "const":
                prog.consts.update(rest)
            elif d == "stage":
                stage = rest[0] if rest else None
            else:
                raise KBError(f"unknown directive #{d}", lineno, source)
            continue
        if not pending:
            start_line = lineno
        pending = (pending + " " + line).strip()
        if not pending.endswith("."):
            continue
        provenance = None
        if pending.startswith("@"):
            m = re.match(r"@(\w+)(?:\s+([\w\-]+))?\s+", pending)
            if not m:
                raise KBError("malformed provenance tag", start_line, source)
            provenance = m.group(1) + (f":{m.group(2)}" if m.group(2) else "")
            pending = pending[m.end():]
        rule = _parse_rule(pending, prog.consts, start_line, source, provenance, stage)
        _check_rule(rule, prog.arities, source)
        prog.rules.append(rule)
        pending = ""
    if pending:
        raise KBError("statement must end with '.'", start_line, source)
    return prog


def parse_kb(path: str | Path) -> Program:
    """Load and validate a rule file."""
    path = Path(path)
    return parse_program(path.read_text(encoding="utf-8"), source=str(path))


def fact_rules(facts: Iterable[Lit]) -> list[Rule]:
    return [Rule("strict", (), (f,)) for f in facts]
