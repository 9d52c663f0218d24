"""Pomset logic: formulas, the satisfaction engine for the three
relations (iso, sub, rev), the brute-force oracle, set-level
quantifiers, term-to-formula translation, independence and frame-rule
checking.

Formula AST nodes are plain tuples:
  ("emp",) ("atom", label)
  ("and", f, g) ("or", f, g) ("neg", f)
  ("seqthen", f, g) ("parnext", f, g)
  ("boxmod", f) ("ctx", f)

Relations: "iso" (isomorphism), "sub" (the poset may be weaker than the
formula demands: witnesses drop order/boxes), "rev" (witnesses add
order/boxes).
"""

import itertools

from . import posets, terms
from .posets import (Poset, unit, atom, seq, par, boxed, iso, subsumed_by,
                     find_homomorphism, weakenings, strengthenings,
                     strengthenings_truncated)
from .terms import FragmentError

EMP = ("emp",)

RELATIONS = ("iso", "sub", "rev")

UNKNOWN = "unknown"


class FormulaSyntaxError(ValueError):
    def __init__(self, msg, pos):
        super().__init__("%s (at position %d)" % (msg, pos))
        self.pos = pos


# ---------------------------------------------------------------------------
# parsing and rendering


def _tokenize_formula(text):
    toks = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        two = text[i:i + 2]
        if two in ("\\/", "/\\", "||", "|>", "<>"):
            toks.append((two, i))
            i += 2
            continue
        if c in "~[]()":
            toks.append((c, i))
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append((text[i:j], i))
            i = j
            continue
        raise FormulaSyntaxError("unexpected character %r" % c, i)
    toks.append((None, n))
    return toks


def parse_formula(text):
    toks = _tokenize_formula(text)
    pos = [0]

    def peek():
        return toks[pos[0]][0]

    def where():
        return toks[pos[0]][1]

    def advance():
        pos[0] += 1

    def parse_or():
        f = parse_and()
        while peek() == "\\/":
            advance()
            f = ("or", f, parse_and())
        return f

    def parse_and():
        f = parse_par()
        while peek() == "/\\":
            advance()
            f = ("and", f, parse_par())
        return f

    def parse_par():
        f = parse_seq()
        while peek() == "||":
            advance()
            f = ("parnext", f, parse_seq())
        return f

    def parse_seq():
        f = parse_unary()
        if peek() == "|>":
            advance()
            return ("seqthen", f, parse_seq())
        return f

    def parse_unary():
        tok = peek()
        if tok == "~":
            advance()
            return ("neg", parse_unary())
        if tok == "<>":
            advance()
            return ("ctx", parse_unary())
        if tok == "[":
            advance()
            f = parse_or()
            if peek() != "]":
                raise FormulaSyntaxError("expected ']'", where())
            advance()
            return ("boxmod", f)
        if tok == "(":
            advance()
            f = parse_or()
            if peek() != ")":
                raise FormulaSyntaxError("expected ')'", where())
            advance()
            return f
        if tok == "emp":
            advance()
            return EMP
        if tok is not None and (tok[0].isalpha() or tok[0] == "_"):
            advance()
            return ("atom", tok)
        raise FormulaSyntaxError("expected a formula", where())

    f = parse_or()
    if peek() is not None:
        raise FormulaSyntaxError("trailing input", where())
    return f


_FPREC = {"or": 1, "and": 2, "parnext": 3, "seqthen": 4}
_FOPS = {"or": "\\/", "and": "/\\", "parnext": "||", "seqthen": "|>"}


def render_formula(f):
    def rec(f, outer):
        kind = f[0]
        if kind == "emp":
            return "emp"
        if kind == "atom":
            return f[1]
        if kind == "neg":
            return "~" + rec(f[1], 5)
        if kind == "boxmod":
            return "[" + rec(f[1], 0) + "]"
        if kind == "ctx":
            return "<>" + rec(f[1], 5)
        prec = _FPREC[kind]
        if kind == "seqthen":
            s = rec(f[1], prec + 1) + _FOPS[kind] + rec(f[2], prec)
        else:
            s = rec(f[1], prec) + _FOPS[kind] + rec(f[2], prec + 1)
        if prec < outer:
            s = "(" + s + ")"
        return s
    return rec(f, 0)


def positive(f):
    if f[0] == "neg":
        return False
    return all(positive(sub) for sub in f[1:] if isinstance(sub, tuple))


def contains_boxmod(f):
    if f[0] == "boxmod":
        return True
    return any(contains_boxmod(sub) for sub in f[1:]
               if isinstance(sub, tuple))


# ---------------------------------------------------------------------------
# the compositional satisfaction engine


def _subsets(n):
    out = []
    evs = list(range(n))
    for k in range(n + 1):
        for sub in itertools.combinations(evs, k):
            out.append(frozenset(sub))
    return out


def _nested(P, A):
    return all(box <= A or not (box & A) for box in P.boxes)


def _prefix(P, A, comp):
    return all((a, b) in P.order for a in A for b in comp)


def _isolated(P, A, comp):
    return all((a, b) not in P.order and (b, a) not in P.order
               for a in A for b in comp)


def _downset(P, A, comp):
    return all((b, a) not in P.order for a in A for b in comp)


_MEMO = {}


def clear_memo():
    _MEMO.clear()
    _ORACLE_MEMO.clear()
    _ORACLE_STRUCT_MEMO.clear()
    _SPACE_CACHE.clear()


def _seq_split_ok(P, A, comp, rel):
    if rel == "iso":
        return _prefix(P, A, comp) and _nested(P, A)
    if rel == "sub":
        return _prefix(P, A, comp)
    return _nested(P, A) and _downset(P, A, comp)


def _par_split_ok(P, A, comp, rel):
    if rel == "sub":
        return True
    return _isolated(P, A, comp) and _nested(P, A)


def sat_bool(P, f, rel):
    if rel not in RELATIONS:
        raise ValueError("bad relation %r" % (rel,))
    if rel != "iso" and not positive(f):
        raise FragmentError("negation is only available under iso")
    return _sat(P, f, rel)


def _sat(P, f, rel):
    key = (P.key(), f, rel)
    hit = _MEMO.get(key)
    if hit is not None:
        return hit
    res = _sat_raw(P, f, rel)
    _MEMO[key] = res
    return res


def _sat_raw(P, f, rel):
    kind = f[0]
    if kind == "emp":
        return P.n == 0
    if kind == "atom":
        if P.n != 1 or P.labels[0] != f[1]:
            return False
        return True if rel == "sub" else not P.boxes
    if kind == "and":
        return _sat(P, f[1], rel) and _sat(P, f[2], rel)
    if kind == "or":
        return _sat(P, f[1], rel) or _sat(P, f[2], rel)
    if kind == "neg":
        return not _sat(P, f[1], rel)
    if kind == "seqthen":
        all_ev = frozenset(range(P.n))
        for A in _subsets(P.n):
            comp = all_ev - A
            if not _seq_split_ok(P, A, comp, rel):
                continue
            if _sat(P.restrict(A), f[1], rel) and \
                    _sat(P.restrict(comp), f[2], rel):
                return True
        return False
    if kind == "parnext":
        all_ev = frozenset(range(P.n))
        for A in _subsets(P.n):
            comp = all_ev - A
            if not _par_split_ok(P, A, comp, rel):
                continue
            if _sat(P.restrict(A), f[1], rel) and \
                    _sat(P.restrict(comp), f[2], rel):
                return True
        return False
    if kind == "boxmod":
        if P.n == 0:
            return _sat(P, f[1], rel)
        if rel in ("iso", "sub") and not P.has_full_box():
            return False
        return _sat(P.without_full_box(), f[1], rel)
    if kind == "ctx":
        for A in _subsets(P.n):
            if rel != "sub" and not _nested(P, A):
                continue
            if _sat(P.restrict(A), f[1], rel):
                return True
        return False
    raise ValueError("bad formula node %r" % (kind,))


class SatResult:
    def __init__(self, truth, witness):
        self.truth = truth
        self.witness = witness

    def __bool__(self):
        return self.truth

    def __repr__(self):
        return "SatResult(%r, %r)" % (self.truth, self.witness)


def sat(P, f, rel="iso"):
    truth = sat_bool(P, f, rel)
    return SatResult(truth, _witness(P, f, rel) if truth else None)


def _witness(P, f, rel):
    """Rebuild a structured trace for a query known to hold."""
    kind = f[0]
    if kind == "emp":
        return {"rule": "emp"}
    if kind == "atom":
        return {"rule": "atom", "label": f[1]}
    if kind == "and":
        return {"rule": "and", "left": _witness(P, f[1], rel),
                "right": _witness(P, f[2], rel)}
    if kind == "or":
        if _sat(P, f[1], rel):
            return {"rule": "or", "side": "left",
                    "sub": _witness(P, f[1], rel)}
        return {"rule": "or", "side": "right",
                "sub": _witness(P, f[2], rel)}
    if kind == "neg":
        return {"rule": "neg"}
    if kind in ("seqthen", "parnext"):
        all_ev = frozenset(range(P.n))
        ok = _seq_split_ok if kind == "seqthen" else _par_split_ok
        for A in _subsets(P.n):
            comp = all_ev - A
            if not ok(P, A, comp, rel):
                continue
            if _sat(P.restrict(A), f[1], rel) and \
                    _sat(P.restrict(comp), f[2], rel):
                return {"rule": kind, "A": sorted(A),
                        "left": _witness(P.restrict(A), f[1], rel),
                        "right": _witness(P.restrict(comp), f[2], rel)}
        raise AssertionError("witness lost")
    if kind == "boxmod":
        inner = P if P.n == 0 else P.without_full_box()
        return {"rule": "boxmod", "sub": _witness(inner, f[1], rel)}
    if kind == "ctx":
        for A in _subsets(P.n):
            if rel != "sub" and not _nested(P, A):
                continue
            if _sat(P.restrict(A), f[1], rel):
                return {"rule": "ctx", "A": sorted(A),
                        "sub": _witness(P.restrict(A), f[1], rel)}
        raise AssertionError("witness lost")
    raise ValueError("bad formula node %r" % (kind,))


def replay(P, f, rel, witness):
    """Re-derive truth from a recorded witness trace."""
    kind = f[0]
    rule = witness.get("rule")
    if rule != kind:
        return False
    if kind == "emp":
        return P.n == 0
    if kind == "atom":
        return _sat_raw(P, f, rel)
    if kind == "and":
        return (replay(P, f[1], rel, witness["left"])
                and replay(P, f[2], rel, witness["right"]))
    if kind == "or":
        side = witness["side"]
        sub = f[1] if side == "left" else f[2]
        return replay(P, sub, rel, witness["sub"])
    if kind == "neg":
        # negative subgoals carry no constructive trace
        return not _sat(P, f[1], rel)
    if kind in ("seqthen", "parnext"):
        A = frozenset(witness["A"])
        comp = frozenset(range(P.n)) - A
        ok = _seq_split_ok if kind == "seqthen" else _par_split_ok
        if not ok(P, A, comp, rel):
            return False
        return (replay(P.restrict(A), f[1], rel, witness["left"])
                and replay(P.restrict(comp), f[2], rel, witness["right"]))
    if kind == "boxmod":
        if P.n == 0:
            return replay(P, f[1], rel, witness["sub"])
        if rel in ("iso", "sub") and not P.has_full_box():
            return False
        return replay(P.without_full_box(), f[1], rel, witness["sub"])
    if kind == "ctx":
        A = frozenset(witness["A"])
        if not A <= frozenset(range(P.n)):
            return False
        if rel != "sub" and not _nested(P, A):
            return False
        return replay(P.restrict(A), f[1], rel, witness["sub"])
    return False


# ---------------------------------------------------------------------------
# brute-force oracle: definition-level witness enumeration


_ORACLE_MEMO = {}
_ORACLE_STRUCT_MEMO = {}


def _tv_exists(results, extra_unknown=False):
    saw_unknown = extra_unknown
    for r in results:
        if r is True:
            return True
        if r == UNKNOWN:
            saw_unknown = True
    return UNKNOWN if saw_unknown else False


_SPACE_CACHE = {}

# enumeration bounds for one strengthening space; exceeding them marks the
# space as truncated, which the callers report as "unknown" when a False
# answer would otherwise be returned
_SPACE_LIMIT = 400
_SPACE_RAW_LIMIT = 4000
_SPACE_CACHE_LIMIT = 1000


def _witness_space(P, rel, cap, with_boxes):
    """Witness posets for one definitional clause, deduplicated up to
    isomorphism.  When the clause's formula has no box modality, box
    variation cannot matter (boxes only ever hurt box-free positive
    formulas), so only the mandatory boxes are kept.  The space is
    enumerated smallest changes first and clipped at fixed bounds; a
    clipped space is flagged truncated."""
    if rel == "iso":
        return (P,), False
    key = (P.key(), rel, cap, with_boxes)
    hit = _SPACE_CACHE.get(key)
    if hit is not None:
        return hit
    if rel == "sub":
        if with_boxes:
            space = weakenings(P)
        else:
            space = (Poset(P.labels, sub, (), _checked=True)
                     for sub in _order_subsets(P))
        truncated = False
    else:
        if with_boxes:
            space = strengthenings(P, cap)
            truncated = strengthenings_truncated(P, cap)
        else:
            space = (Poset(P.labels, rel_, P.boxes, _checked=True)
                     for rel_ in posets.order_extensions(P))
            truncated = False
    seen = {}
    raw = 0
    for W in space:
        raw += 1
        _tick(20)
        seen.setdefault(W.key(), W)
        if len(seen) >= _SPACE_LIMIT or raw >= _SPACE_RAW_LIMIT:
            truncated = True
            break
    if len(_SPACE_CACHE) >= _SPACE_CACHE_LIMIT:
        for old in list(_SPACE_CACHE)[:_SPACE_CACHE_LIMIT // 2]:
            del _SPACE_CACHE[old]
    out = (tuple(seen.values()), truncated)
    _SPACE_CACHE[key] = out
    return out


def _order_subsets(P):
    order = sorted(P.order)
    for k in range(len(order) + 1):
        for sub in itertools.combinations(order, k):
            if posets.is_transitively_closed(sub):
                yield sub


class _BudgetExhausted(Exception):
    pass


# evaluation steps allowed per top-level oracle call; nested witness
# enumerations can explode combinatorially, so past this the call gives up
# and answers "unknown"
_ORACLE_BUDGET = 3000000
_budget = [0]


def _tick(weight=1):
    _budget[0] -= weight
    if _budget[0] < 0:
        raise _BudgetExhausted()


def sat_oracle(P, f, rel="iso", cap=2):
    """Evaluate satisfaction by direct witness enumeration over
    weakenings/strengthenings, decompositions found by explicit subset
    search on the witness.  Returns True, False or "unknown": unknown
    means the enumeration was cut short (the strengthening box cap was
    hit on a formula with a box modality, or the work budget ran out),
    so a False answer could not be trusted."""
    if rel not in RELATIONS:
        raise ValueError("bad relation %r" % (rel,))
    if rel != "iso" and not positive(f):
        raise FragmentError("negation is only available under iso")
    _budget[0] = _ORACLE_BUDGET
    try:
        return _oracle(P, f, rel, cap)
    except _BudgetExhausted:
        return UNKNOWN


def _oracle(P, f, rel, cap):
    # structural lookup first: restrictions recur as equal objects and the
    # exact hash is much cheaper than the canonical key
    _tick()
    skey = (P, f, rel, cap)
    hit = _ORACLE_STRUCT_MEMO.get(skey)
    if hit is not None:
        return hit
    key = (P.key(), f, rel, cap)
    hit = _ORACLE_MEMO.get(key)
    if hit is None:
        hit = _oracle_raw(P, f, rel, cap)
        _ORACLE_MEMO[key] = hit
    _ORACLE_STRUCT_MEMO[skey] = hit
    return hit


def _oracle_raw(P, f, rel, cap):
    kind = f[0]
    if kind == "emp":
        if rel == "iso":
            return iso(P, unit())
        if rel == "sub":
            return subsumed_by(P, unit())
        return subsumed_by(unit(), P)
    if kind == "atom":
        a = atom(f[1])
        if rel == "iso":
            return iso(P, a)
        if rel == "sub":
            return subsumed_by(P, a)
        return subsumed_by(a, P)
    if kind == "and":
        l = _oracle(P, f[1], rel, cap)
        if l is False:
            return False
        r = _oracle(P, f[2], rel, cap)
        if r is False:
            return False
        if l == UNKNOWN or r == UNKNOWN:
            return UNKNOWN
        return True
    if kind == "or":
        l = _oracle(P, f[1], rel, cap)
        if l is True:
            return True
        r = _oracle(P, f[2], rel, cap)
        if r is True:
            return True
        if l == UNKNOWN or r == UNKNOWN:
            return UNKNOWN
        return False
    if kind == "neg":
        sub = _oracle(P, f[1], rel, cap)
        if sub == UNKNOWN:
            return UNKNOWN
        return not sub

    space, truncated = _witness_space(P, rel, cap, contains_boxmod(f))
    gate = truncated

    if kind in ("seqthen", "parnext"):
        want = "prefix" if kind == "seqthen" else "isolated"

        def results():
            for W in space:
                all_ev = frozenset(range(W.n))
                for A in _subsets(W.n):
                    _tick(3)
                    comp = all_ev - A
                    flags = posets.classify_subset(W, A)
                    if not (flags["nested"] and flags[want]):
                        continue
                    l = _oracle(W.restrict(A), f[1], rel, cap)
                    if l is False:
                        continue
                    r = _oracle(W.restrict(comp), f[2], rel, cap)
                    if r is False:
                        continue
                    if l is True and r is True:
                        yield True
                    else:
                        yield UNKNOWN
        return _tv_exists(results(), gate)

    if kind == "boxmod":
        if P.n == 0:
            return _oracle(P, f[1], rel, cap)

        def results():
            for W in space:
                if not W.has_full_box():
                    continue
                yield _oracle(W.without_full_box(), f[1], rel, cap)
        return _tv_exists(results(), gate)

    if kind == "ctx":
        def results():
            for W in space:
                for A in _subsets(W.n):
                    _tick(3)
                    if not _nested(W, A):
                        continue
                    yield _oracle(W.restrict(A), f[1], rel, cap)
        return _tv_exists(results(), gate)

    raise ValueError("bad formula node %r" % (kind,))


# ---------------------------------------------------------------------------
# set-level satisfaction


def sat_set(X, f, rel="iso", quant="all"):
    if isinstance(X, tuple):
        X = terms.interp(X)
    if quant == "all":
        return all(sat_bool(P, f, rel) for P in X)
    if quant == "some":
        return any(sat_bool(P, f, rel) for P in X)
    raise ValueError("quantifier must be all or some")


# ---------------------------------------------------------------------------
# formulas from terms


def phi_of_sp(s):
    kind = s[0]
    if kind == "one":
        return EMP
    if kind == "atom":
        return ("atom", s[1])
    if kind == "seq":
        return ("seqthen", phi_of_sp(s[1]), phi_of_sp(s[2]))
    if kind == "par":
        return ("parnext", phi_of_sp(s[1]), phi_of_sp(s[2]))
    if kind == "box":
        # the subformula describes the box interior, so the full box
        # must be peeled off the subterm first
        inner = terms.strip_outer_box(s)
        return ("boxmod", phi_of_sp(inner))
    raise FragmentError("phi_of_sp needs a series-parallel term")


def phi_of_term(e):
    parts = terms.expand(e)
    if not parts:
        raise ValueError("term denotes the empty set: no formula")
    f = phi_of_sp(parts[0])
    for s in parts[1:]:
        f = ("or", f, phi_of_sp(s))
    return f


# ---------------------------------------------------------------------------
# independence, frame rules, substitution


def independent(P, f, rel="iso"):
    return not sat_bool(P, ("ctx", ("boxmod", f)), rel)


def compose_frame(P, Q, shape):
    if shape == "par":
        return par(P, Q)
    if shape == "seq_suffix":
        return seq(P, Q)
    if shape == "seq_prefix":
        return seq(Q, P)
    raise ValueError("shape must be par, seq_suffix or seq_prefix")


def frame_formula(psi, f, shape):
    boxf = ("boxmod", f)
    if shape == "par":
        return ("parnext", psi, boxf)
    if shape == "seq_suffix":
        return ("seqthen", psi, boxf)
    if shape == "seq_prefix":
        return ("seqthen", boxf, psi)
    raise ValueError("shape must be par, seq_suffix or seq_prefix")


def frame_check(P, Q, f, psi, shape, rel="iso"):
    """Report on one frame-rule instance: are the side conditions met,
    and does the biconditional between the local and the composed
    judgement hold."""
    indep = independent(P, f, rel)
    q_boxed = sat_bool(Q, ("boxmod", f), rel)
    lhs = sat_bool(P, psi, rel)
    composed = compose_frame(P, Q, shape)
    rhs = sat_bool(composed, frame_formula(psi, f, shape), rel)
    return {
        "shape": shape,
        "relation": rel,
        "independent": indep,
        "q_sat_boxed": q_boxed,
        "preconditions": indep and q_boxed,
        "local": lhs,
        "composed": rhs,
        "left_to_right": (not lhs) or rhs,
        "right_to_left": (not rhs) or lhs,
        "biconditional": lhs == rhs,
    }


def substitute_term(e, sigma):
    kind = e[0]
    if kind == "atom":
        return sigma.get(e[1], e)
    if kind in ("zero", "one"):
        return e
    if kind == "box":
        return ("box", substitute_term(e[1], sigma))
    return (kind, substitute_term(e[1], sigma), substitute_term(e[2], sigma))


def substitute_formula(f, tau):
    kind = f[0]
    if kind == "atom":
        return tau.get(f[1], f)
    if kind == "emp":
        return f
    if kind in ("neg", "boxmod", "ctx"):
        return (kind, substitute_formula(f[1], tau))
    return (kind, substitute_formula(f[1], tau),
            substitute_formula(f[2], tau))
