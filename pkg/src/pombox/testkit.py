"""Random generators and the differential harness cross-checking the
compositional satisfaction engine against the brute-force oracle."""

import random

from . import posets, terms, logic
from .posets import Poset


class GenConfig:
    def __init__(self, max_events=4, max_box_attempts=3, alphabet_size=3,
                 term_depth=3, formula_depth=3, seed=0):
        assert max_events >= 0 and max_box_attempts >= 0
        assert alphabet_size >= 1 and term_depth >= 0 and formula_depth >= 0
        self.max_events = max_events
        self.max_box_attempts = max_box_attempts
        self.alphabet_size = alphabet_size
        self.term_depth = term_depth
        self.formula_depth = formula_depth
        self.seed = seed

    def rng(self):
        return random.Random(self.seed)

    def alphabet(self):
        return [chr(ord("a") + i) for i in range(self.alphabet_size)]


def gen_poset(cfg, rng=None):
    rng = rng or cfg.rng()
    n = rng.randint(0, cfg.max_events)
    labels = [rng.choice(cfg.alphabet()) for _ in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                edges.append((i, j))
    boxes = []
    for _ in range(cfg.max_box_attempts):
        if n == 0 or rng.random() < 0.5:
            continue
        if rng.random() < 0.7:
            # contiguous id range: biased toward nested configurations
            i = rng.randrange(n)
            j = rng.randrange(i, n)
            box = set(range(i, j + 1))
        else:
            # arbitrary subset: overlapping/straddling boxes do occur
            box = set(e for e in range(n) if rng.random() < 0.5)
        if box:
            boxes.append(box)
    return posets.from_edges(labels, edges, boxes)


def gen_sp_term(cfg, rng=None, depth=None):
    rng = rng or cfg.rng()
    depth = cfg.term_depth if depth is None else depth
    if depth <= 0:
        return rng.choice([terms.ONE, ("atom", rng.choice(cfg.alphabet()))])
    k = rng.random()
    if k < 0.25:
        return ("atom", rng.choice(cfg.alphabet()))
    if k < 0.3:
        return terms.ONE
    if k < 0.55:
        return ("seq", gen_sp_term(cfg, rng, depth - 1),
                gen_sp_term(cfg, rng, depth - 1))
    if k < 0.8:
        return ("par", gen_sp_term(cfg, rng, depth - 1),
                gen_sp_term(cfg, rng, depth - 1))
    return ("box", gen_sp_term(cfg, rng, depth - 1))


def gen_term(cfg, rng=None, depth=None):
    rng = rng or cfg.rng()
    depth = cfg.term_depth if depth is None else depth
    if depth <= 0:
        return rng.choice([terms.ONE, terms.ZERO,
                           ("atom", rng.choice(cfg.alphabet()))])
    k = rng.random()
    if k < 0.2:
        return ("atom", rng.choice(cfg.alphabet()))
    if k < 0.25:
        return terms.ONE
    if k < 0.3:
        return terms.ZERO
    if k < 0.5:
        return ("seq", gen_term(cfg, rng, depth - 1),
                gen_term(cfg, rng, depth - 1))
    if k < 0.7:
        return ("par", gen_term(cfg, rng, depth - 1),
                gen_term(cfg, rng, depth - 1))
    if k < 0.85:
        return ("join", gen_term(cfg, rng, depth - 1),
                gen_term(cfg, rng, depth - 1))
    return ("box", gen_term(cfg, rng, depth - 1))


def gen_formula(cfg, positive=False, rng=None, depth=None):
    rng = rng or cfg.rng()
    depth = cfg.formula_depth if depth is None else depth
    if depth <= 0:
        return rng.choice([logic.EMP,
                           ("atom", rng.choice(cfg.alphabet()))])
    k = rng.random()
    if k < 0.15:
        return ("atom", rng.choice(cfg.alphabet()))
    if k < 0.2:
        return logic.EMP
    if k < 0.3:
        return ("and", gen_formula(cfg, positive, rng, depth - 1),
                gen_formula(cfg, positive, rng, depth - 1))
    if k < 0.4:
        return ("or", gen_formula(cfg, positive, rng, depth - 1),
                gen_formula(cfg, positive, rng, depth - 1))
    if k < 0.5 and not positive:
        return ("neg", gen_formula(cfg, positive, rng, depth - 1))
    if k < 0.65:
        return ("seqthen", gen_formula(cfg, positive, rng, depth - 1),
                gen_formula(cfg, positive, rng, depth - 1))
    if k < 0.8:
        return ("parnext", gen_formula(cfg, positive, rng, depth - 1),
                gen_formula(cfg, positive, rng, depth - 1))
    if k < 0.9:
        return ("boxmod", gen_formula(cfg, positive, rng, depth - 1))
    return ("ctx", gen_formula(cfg, positive, rng, depth - 1))


class Discrepancy:
    def __init__(self, poset, formula, relation, expected, actual,
                 shrunk=False):
        self.poset = poset
        self.formula = formula
        self.relation = relation
        self.expected = expected
        self.actual = actual
        self.shrunk = shrunk

    def as_dict(self):
        return {"poset": posets.to_json(self.poset),
                "formula": logic.render_formula(self.formula),
                "relation": self.relation,
                "expected": self.expected,
                "actual": self.actual,
                "shrunk": self.shrunk}

    def replayable(self, cap=2):
        actual = logic.sat_bool(self.poset, self.formula, self.relation)
        expected = logic.sat_oracle(self.poset, self.formula,
                                    self.relation, cap)
        return expected != logic.UNKNOWN and actual != expected

    def __repr__(self):
        return "Discrepancy(%r)" % (self.as_dict(),)


def _formula_shrinks(f):
    yield logic.EMP
    for sub in f[1:]:
        if isinstance(sub, tuple):
            yield sub


def shrink(d, cap=2):
    """Greedy shrinking: drop events, then replace the formula by
    subformulas, while the mismatch persists."""
    P, f, rel = d.poset, d.formula, d.relation
    changed = True
    while changed:
        changed = False
        for e in range(P.n):
            smaller = P.restrict(set(range(P.n)) - {e})
            cand = Discrepancy(smaller, f, rel, d.expected, d.actual, True)
            if cand.replayable(cap):
                P = smaller
                changed = True
                break
        if changed:
            continue
        for g in _formula_shrinks(f):
            cand = Discrepancy(P, g, rel, d.expected, d.actual, True)
            if cand.replayable(cap):
                f = g
                changed = True
                break
    actual = logic.sat_bool(P, f, rel)
    expected = logic.sat_oracle(P, f, rel, cap)
    return Discrepancy(P, f, rel, expected, actual, True)


def differential_run(cfg, n_cases, relations=logic.RELATIONS, cap=2,
                     sat_fn=None):
    """Compare the engine against the oracle on random cases; returns the
    (shrunk) discrepancies.  sat_fn lets mutation tests swap the engine."""
    rng = cfg.rng()
    sat_fn = sat_fn or logic.sat_bool
    out = []
    for _ in range(n_cases):
        P = gen_poset(cfg, rng)
        for rel in relations:
            f = gen_formula(cfg, positive=(rel != "iso"), rng=rng)
            expected = logic.sat_oracle(P, f, rel, cap)
            if expected == logic.UNKNOWN:
                continue
            actual = sat_fn(P, f, rel)
            if actual != expected:
                d = Discrepancy(P, f, rel, expected, actual)
                if sat_fn is logic.sat_bool:
                    d = shrink(d, cap)
                out.append(d)
    return out
