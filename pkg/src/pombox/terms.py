"""Terms over the box-bimonoid grammar, parsing, interpretation,
series-parallel recognition and synthesis, and the semantic decision
procedures for the four axiom systems.

Term AST nodes are plain tuples:
  ("zero",) ("one",) ("atom", label)
  ("seq", l, r) ("par", l, r) ("join", l, r) ("box", t)
"""

import itertools

from . import posets
from .posets import (Poset, unit, atom, seq, par, boxed, iso, subsumed_by,
                     find_homomorphism)

ZERO = ("zero",)
ONE = ("one",)


class TermSyntaxError(ValueError):
    def __init__(self, msg, pos):
        super().__init__("%s (at position %d)" % (msg, pos))
        self.pos = pos


class FragmentError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing


def _tokenize_term(text):
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in ";|+[]()":
            toks.append((c, i))
            i += 1
            continue
        if c in "01":
            toks.append((c, i))
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append((text[i:j], i))
            i = j
            continue
        raise TermSyntaxError("unexpected character %r" % c, i)
    toks.append((None, len(text)))
    return toks


def parse_term(text):
    toks = _tokenize_term(text)
    pos = [0]

    def peek():
        return toks[pos[0]][0]

    def where():
        return toks[pos[0]][1]

    def advance():
        pos[0] += 1

    def parse_join():
        t = parse_par()
        while peek() == "+":
            advance()
            t = ("join", t, parse_par())
        return t

    def parse_par():
        t = parse_seq()
        while peek() == "|":
            advance()
            t = ("par", t, parse_seq())
        return t

    def parse_seq():
        t = parse_prim()
        while peek() == ";":
            advance()
            t = ("seq", t, parse_prim())
        return t

    def parse_prim():
        tok = peek()
        if tok == "(":
            advance()
            t = parse_join()
            if peek() != ")":
                raise TermSyntaxError("expected ')'", where())
            advance()
            return t
        if tok == "[":
            advance()
            t = parse_join()
            if peek() != "]":
                raise TermSyntaxError("expected ']'", where())
            advance()
            return ("box", t)
        if tok == "0":
            advance()
            return ZERO
        if tok == "1":
            advance()
            return ONE
        if tok is not None and (tok[0].isalpha() or tok[0] == "_"):
            advance()
            return ("atom", tok)
        raise TermSyntaxError("expected a term", where())

    t = parse_join()
    if peek() is not None:
        raise TermSyntaxError("trailing input", where())
    return t


_PREC = {"join": 1, "par": 2, "seq": 3}


def render_term(t):
    def rec(t, outer):
        kind = t[0]
        if kind == "zero":
            return "0"
        if kind == "one":
            return "1"
        if kind == "atom":
            return t[1]
        if kind == "box":
            return "[" + rec(t[1], 0) + "]"
        op = {"join": "+", "par": "|", "seq": ";"}[kind]
        prec = _PREC[kind]
        # left-associative: left child renders at prec, right at prec+1
        s = rec(t[1], prec) + op + rec(t[2], prec + 1)
        if prec < outer:
            s = "(" + s + ")"
        return s
    return rec(t, 0)


def is_sp(t):
    kind = t[0]
    if kind in ("zero", "join"):
        return False
    if kind in ("one", "atom"):
        return True
    if kind == "box":
        return is_sp(t[1])
    return is_sp(t[1]) and is_sp(t[2])


# ---------------------------------------------------------------------------
# interpretation


def interp_sp(t):
    """Interpret a series-parallel term as a single poset.  The left
    operand of seq/par always occupies the lower event ids; this
    numbering is part of the contract (syntactic_restrict relies on it)."""
    kind = t[0]
    if kind == "one":
        return unit()
    if kind == "atom":
        return atom(t[1])
    if kind == "seq":
        return seq(interp_sp(t[1]), interp_sp(t[2]))
    if kind == "par":
        return par(interp_sp(t[1]), interp_sp(t[2]))
    if kind == "box":
        return boxed(interp_sp(t[1]))
    raise FragmentError("interp_sp: not a series-parallel term: %r" % (kind,))


def dedup(ps):
    seen = {}
    for p in ps:
        seen.setdefault(p.key(), p)
    return [seen[k] for k in sorted(seen)]


def interp(t):
    """Interpret a full term as a finite set of posets (list, deduplicated
    by isomorphism, in canonical-key order)."""
    kind = t[0]
    if kind == "zero":
        return []
    if kind == "one":
        return [unit()]
    if kind == "atom":
        return [atom(t[1])]
    if kind == "join":
        return dedup(interp(t[1]) + interp(t[2]))
    if kind == "seq":
        return dedup([seq(p, q) for p in interp(t[1]) for q in interp(t[2])])
    if kind == "par":
        return dedup([par(p, q) for p in interp(t[1]) for q in interp(t[2])])
    if kind == "box":
        return dedup([boxed(p) for p in interp(t[1])])
    raise ValueError("bad term node %r" % (kind,))


def expand(t):
    """Rewrite a term into the list of series-parallel terms whose
    interpretations make up its own (syntactic duplicates kept)."""
    kind = t[0]
    if kind == "zero":
        return []
    if kind in ("one", "atom"):
        return [t]
    if kind == "join":
        return expand(t[1]) + expand(t[2])
    if kind == "seq":
        return [("seq", a, b) for a in expand(t[1]) for b in expand(t[2])]
    if kind == "par":
        return [("par", a, b) for a in expand(t[1]) for b in expand(t[2])]
    if kind == "box":
        return [("box", a) for a in expand(t[1])]
    raise ValueError("bad term node %r" % (kind,))


# ---------------------------------------------------------------------------
# syntactic restriction


def sp_size(t):
    kind = t[0]
    if kind == "one":
        return 0
    if kind == "atom":
        return 1
    if kind == "box":
        return sp_size(t[1])
    if kind in ("seq", "par"):
        return sp_size(t[1]) + sp_size(t[2])
    raise FragmentError("not a series-parallel term")


def syntactic_restrict(t, A):
    """Restrict a series-parallel term to the event set A of interp_sp(t).
    A box survives only when A covers its subterm's whole event range."""
    n = sp_size(t)
    A = set(A)
    if not A <= set(range(n)):
        raise ValueError("restriction set out of range")

    def rec(t, A, n):
        kind = t[0]
        if kind == "one":
            return ONE
        if kind == "atom":
            return t if A else ONE
        if kind == "box":
            inner = rec(t[1], A, n)
            if A == set(range(n)) and n > 0:
                return ("box", inner)
            return inner
        nl = sp_size(t[1])
        left = set(a for a in A if a < nl)
        right = set(a - nl for a in A if a >= nl)
        return (kind, rec(t[1], left, nl), rec(t[2], right, n - nl))

    return rec(t, A, n)


def strip_outer_box(t):
    """Remove the full box of a term's interpretation: returns u with
    boxed interpretation equal to t's and interp_sp(u) lacking the full
    box.  All-unit terms yield One.  None when there is no full box."""
    P = interp_sp(t)
    if P.n == 0:
        return ONE
    if not P.has_full_box():
        return None

    def rec(t):
        kind = t[0]
        if kind == "box":
            inner = t[1]
            if interp_sp(inner).has_full_box():
                return rec(inner)
            return inner
        if kind in ("seq", "par"):
            # the full box must come from one operand; the other is empty
            if sp_size(t[1]) == 0:
                return rec(t[2])
            return rec(t[1])
        raise AssertionError("unreachable: full box on %r" % (kind,))

    return rec(t)


# ---------------------------------------------------------------------------
# series-parallel recognition (forbidden patterns)


class PatternWitness:
    def __init__(self, pattern, events, boxes):
        self.pattern = pattern
        self.events = tuple(events)
        self.boxes = tuple(frozenset(b) for b in boxes)

    def as_dict(self):
        return {"pattern": self.pattern,
                "events": list(self.events),
                "boxes": [sorted(b) for b in self.boxes]}

    def validate(self, P):
        le = P.leq
        if self.pattern == "P1":
            e1, e2, e3, e4 = self.events
            return (le(e1, e3) and le(e2, e3) and le(e2, e4)
                    and not le(e1, e4) and not le(e2, e1)
                    and not le(e4, e3))
        if self.pattern == "P2":
            A, B = self.boxes
            return (A in P.boxes and B in P.boxes
                    and bool(A - B) and bool(A & B) and bool(B - A))
        if self.pattern == "P3":
            e1, e2, e3 = self.events
            (A,) = self.boxes
            return (A in P.boxes and e1 not in A and e2 in A and e3 in A
                    and le(e1, e2) and not le(e1, e3))
        if self.pattern == "P4":
            e1, e2, e3 = self.events
            (A,) = self.boxes
            return (A in P.boxes and e1 not in A and e2 in A and e3 in A
                    and le(e2, e1) and not le(e3, e1))
        return False

    def __repr__(self):
        return "PatternWitness(%s, events=%r, boxes=%r)" % (
            self.pattern, list(self.events),
            [sorted(b) for b in self.boxes])


def sp_check(P):
    """None when P is series-parallel, else the first forbidden pattern
    found under a deterministic scan (P1, then P2, P3, P4)."""
    le = P.leq
    for e1, e2, e3, e4 in itertools.permutations(range(P.n), 4):
        if (le(e1, e3) and le(e2, e3) and le(e2, e4)
                and not le(e1, e4) and not le(e2, e1)
                and not le(e4, e3)):
            return PatternWitness("P1", (e1, e2, e3, e4), ())
    boxes = sorted(P.boxes, key=lambda b: (len(b), sorted(b)))
    for A, B in itertools.combinations(boxes, 2):
        if A - B and A & B and B - A:
            return PatternWitness("P2", (min(A - B), min(A & B), min(B - A)),
                                  (A, B))
    for A in boxes:
        for e1 in range(P.n):
            if e1 in A:
                continue
            for e2 in sorted(A):
                for e3 in sorted(A):
                    if le(e1, e2) and not le(e1, e3):
                        return PatternWitness("P3", (e1, e2, e3), (A,))
                    if le(e2, e1) and not le(e3, e1):
                        return PatternWitness("P4", (e1, e2, e3), (A,))
    return None


def _subsets_ascending(n, proper=True):
    evs = list(range(n))
    top = n if proper else n + 1
    for k in range(1, top):
        for sub in itertools.combinations(evs, k):
            yield set(sub)


def synthesize_term(P):
    """Rebuild a series-parallel term denoting P, or None when P contains
    a forbidden pattern."""
    if P.n == 0:
        return ONE
    if P.has_full_box():
        inner = synthesize_term(P.without_full_box())
        if inner is None:
            return None
        return ("box", inner)
    if P.n == 1:
        return ("atom", P.labels[0])
    for A in _subsets_ascending(P.n):
        flags = posets.classify_subset(P, A)
        if flags["nested"] and flags["prefix"]:
            l = synthesize_term(P.restrict(A))
            r = synthesize_term(P.restrict(set(range(P.n)) - A))
            if l is None or r is None:
                return None
            return ("seq", l, r)
    for A in _subsets_ascending(P.n):
        flags = posets.classify_subset(P, A)
        if flags["nested"] and flags["isolated"]:
            l = synthesize_term(P.restrict(A))
            r = synthesize_term(P.restrict(set(range(P.n)) - A))
            if l is None or r is None:
                return None
            return ("par", l, r)
    return None


# ---------------------------------------------------------------------------
# set-level relations and the decision procedures


def set_rel(A, B, rel):
    if rel == "iso_incl":
        return all(any(iso(p, q) for q in B) for p in A)
    if rel == "iso_eq":
        return set_rel(A, B, "iso_incl") and set_rel(B, A, "iso_incl")
    if rel == "subsume":
        return all(any(subsumed_by(p, q) for q in B) for p in A)
    raise ValueError("bad set relation %r" % (rel,))


def decide(sys, lhs, rhs, kind):
    """Semantic decision of provability in the chosen axiom system."""
    if sys not in ("bsp", "cmb", "bsr", "csrb"):
        raise ValueError("unknown system %r" % (sys,))
    if kind not in ("eq", "leq"):
        raise ValueError("kind must be eq or leq")
    if sys in ("bsp", "cmb"):
        for t in (lhs, rhs):
            if not is_sp(t):
                raise FragmentError(
                    "system %s only accepts terms without 0 and +" % sys)
    if (sys, kind) in (("bsp", "leq"), ("bsr", "leq")):
        raise ValueError("system %s has no inequational theory here; "
                         "use cmb or csrb for leq" % sys)
    A = interp(lhs)
    B = interp(rhs)
    if sys == "bsp":
        return set_rel(A, B, "iso_eq")
    if sys == "cmb":
        if kind == "leq":
            return set_rel(A, B, "subsume")
        return set_rel(A, B, "subsume") and set_rel(B, A, "subsume")
    if sys == "bsr":
        return set_rel(A, B, "iso_eq")
    # csrb: compare downward closures, decided pointwise
    if kind == "leq":
        return set_rel(A, B, "subsume")
    return set_rel(A, B, "subsume") and set_rel(B, A, "subsume")
