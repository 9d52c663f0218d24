"""Posets with boxes: the semantic data model.

A poset here is a finite set of labelled events 0..n-1, a strict order
stored transitively closed, and a set of non-empty boxes (subsets of
events marking protected regions).  All values are immutable after
construction.
"""

import itertools
import json


class PosetError(ValueError):
    pass


def transitive_closure(n, pairs):
    reach = {i: set() for i in range(n)}
    for a, b in pairs:
        reach[a].add(b)
    changed = True
    while changed:
        changed = False
        for a in range(n):
            extra = set()
            for b in reach[a]:
                extra |= reach[b] - reach[a]
            if extra:
                reach[a] |= extra
                changed = True
    return frozenset((a, b) for a in range(n) for b in reach[a])


def is_transitively_closed(pairs):
    s = set(pairs)
    for (a, b) in s:
        for (c, d) in s:
            if b == c and (a, d) not in s:
                return False
    return True


# canonical keys are expensive to compute and the same structures recur
# constantly during witness enumeration, so keys are shared globally
_KEY_CACHE = {}
_KEY_CACHE_LIMIT = 500000


class Poset:
    """Immutable labelled poset with boxes."""

    def __init__(self, labels, order, boxes, _checked=False):
        self.labels = tuple(labels)
        self.n = len(self.labels)
        self.order = frozenset((int(a), int(b)) for a, b in order)
        self.boxes = frozenset(frozenset(b) for b in boxes)
        self._key = None
        if not _checked:
            self._validate()

    def _validate(self):
        ev = set(range(self.n))
        for (a, b) in self.order:
            if a not in ev or b not in ev:
                raise PosetError("order pair out of range: %r" % ((a, b),))
            if a == b:
                raise PosetError("order must be irreflexive")
            if (b, a) in self.order:
                raise PosetError("order must be antisymmetric")
        if not is_transitively_closed(self.order):
            raise PosetError("order must be transitively closed")
        for box in self.boxes:
            if not box:
                raise PosetError("boxes must be non-empty")
            if not box <= ev:
                raise PosetError("box out of range: %r" % (sorted(box),))

    def leq(self, a, b):
        return a == b or (a, b) in self.order

    def events(self):
        return range(self.n)

    def below_counts(self):
        below = [0] * self.n
        above = [0] * self.n
        for (a, b) in self.order:
            below[b] += 1
            above[a] += 1
        return below, above

    def box_counts(self):
        cnt = [0] * self.n
        for box in self.boxes:
            for e in box:
                cnt[e] += 1
        return cnt

    def has_full_box(self):
        return self.n > 0 and frozenset(range(self.n)) in self.boxes

    def without_full_box(self):
        full = frozenset(range(self.n))
        return Poset(self.labels, self.order,
                     [b for b in self.boxes if b != full], _checked=True)

    def restrict(self, A):
        A = set(A)
        if not A <= set(range(self.n)):
            raise PosetError("restriction set out of range")
        kept = sorted(A)
        ren = {old: new for new, old in enumerate(kept)}
        labels = [self.labels[e] for e in kept]
        order = [(ren[a], ren[b]) for (a, b) in self.order
                 if a in A and b in A]
        boxes = [frozenset(ren[e] for e in box)
                 for box in self.boxes if box <= A]
        return Poset(labels, order, boxes, _checked=True)

    def key(self):
        if self._key is None:
            cached = _KEY_CACHE.get(self)
            if cached is None:
                cached = canonical_key(self)
                if len(_KEY_CACHE) >= _KEY_CACHE_LIMIT:
                    _KEY_CACHE.clear()
                _KEY_CACHE[self] = cached
            self._key = cached
        return self._key

    def __repr__(self):
        return "Poset(n=%d, labels=%r, order=%r, boxes=%r)" % (
            self.n, list(self.labels),
            sorted(self.order),
            sorted(sorted(b) for b in self.boxes))

    def __eq__(self, other):
        # structural equality (same indexing), not isomorphism
        return (isinstance(other, Poset)
                and self.labels == other.labels
                and self.order == other.order
                and self.boxes == other.boxes)

    def __hash__(self):
        return hash((self.labels, self.order, self.boxes))


# ---------------------------------------------------------------------------
# constructors


def unit():
    return Poset((), (), (), _checked=True)


def atom(label):
    if not label:
        raise PosetError("empty label")
    return Poset((label,), (), (), _checked=True)


def _shift(P, off):
    order = [(a + off, b + off) for (a, b) in P.order]
    boxes = [frozenset(e + off for e in box) for box in P.boxes]
    return order, boxes


def par(P, Q):
    qorder, qboxes = _shift(Q, P.n)
    return Poset(P.labels + Q.labels,
                 list(P.order) + qorder,
                 list(P.boxes) + qboxes, _checked=True)


def seq(P, Q):
    qorder, qboxes = _shift(Q, P.n)
    cross = [(a, b) for a in range(P.n) for b in range(P.n, P.n + Q.n)]
    return Poset(P.labels + Q.labels,
                 list(P.order) + qorder + cross,
                 list(P.boxes) + qboxes, _checked=True)


def boxed(P):
    if P.n == 0:
        return P
    full = frozenset(range(P.n))
    if full in P.boxes:
        return P
    return Poset(P.labels, P.order, list(P.boxes) + [full], _checked=True)


def from_edges(labels, edges, boxes):
    """Build a poset from an arbitrary DAG edge list (closure is taken)."""
    n = len(labels)
    ev = set(range(n))
    for (a, b) in edges:
        if a not in ev or b not in ev:
            raise PosetError("unknown id in order: %r" % ((a, b),))
    closed = transitive_closure(n, edges)
    for (a, b) in closed:
        if a == b or (b, a) in closed:
            raise PosetError("cycle in order")
    for box in boxes:
        if not box:
            raise PosetError("empty box")
        if not set(box) <= ev:
            raise PosetError("unknown id in box: %r" % (sorted(box),))
    return Poset(labels, closed, [frozenset(b) for b in boxes],
                 _checked=True)


# ---------------------------------------------------------------------------
# structural predicates


def classify_subset(P, A):
    A = set(A)
    if not A <= set(range(P.n)):
        raise PosetError("subset out of range")
    comp = set(range(P.n)) - A
    prefix = all((a, b) in P.order for a in A for b in comp)
    isolated = all((a, b) not in P.order and (b, a) not in P.order
                   for a in A for b in comp)
    nested = all(box <= A or not (box & A) for box in P.boxes)
    downset = all((b, a) not in P.order for a in A for b in comp)
    nontrivial = bool(A) and bool(comp)
    return {"nontrivial": nontrivial, "nested": nested, "prefix": prefix,
            "isolated": isolated, "downset": downset}


def split_check(P, A, mode):
    A = set(A)
    flags = classify_subset(P, A)
    if mode == "seq":
        by_flags = flags["prefix"] and flags["nested"]
        recomposed = seq(P.restrict(A), P.restrict(set(range(P.n)) - A))
    elif mode == "par":
        by_flags = flags["isolated"] and flags["nested"]
        recomposed = par(P.restrict(A), P.restrict(set(range(P.n)) - A))
    else:
        raise ValueError("mode must be seq or par")
    # the flag test must agree with an explicit isomorphism check; the
    # iso is built directly from the id renaming, no search needed
    kept = sorted(A) + sorted(set(range(P.n)) - A)
    mapping = {new: old for new, old in enumerate(kept)}
    by_iso = all(P.labels[mapping[e]] == recomposed.labels[e]
                 for e in range(P.n))
    if by_iso:
        mapped_order = frozenset((mapping[a], mapping[b])
                                 for (a, b) in recomposed.order)
        mapped_boxes = frozenset(frozenset(mapping[e] for e in box)
                                 for box in recomposed.boxes)
        by_iso = mapped_order == P.order and mapped_boxes == P.boxes
    assert by_flags == by_iso, "split_check flag/iso disagreement"
    return by_flags


# ---------------------------------------------------------------------------
# homomorphisms


class Morphism:
    def __init__(self, mapping, order_reflecting, box_reflecting):
        self.map = tuple(mapping)
        self.order_reflecting = order_reflecting
        self.box_reflecting = box_reflecting

    def as_dict(self):
        return {"map": list(self.map),
                "order_reflecting": self.order_reflecting,
                "box_reflecting": self.box_reflecting}

    def __repr__(self):
        return "Morphism(%r, ord_refl=%r, box_refl=%r)" % (
            list(self.map), self.order_reflecting, self.box_reflecting)


ANY = "any"
ORDER_REFLECTING = "order_reflecting"
BOX_REFLECTING = "box_reflecting"
ISO = "iso"


def _check_complete(src, tgt, h, mode):
    mapped_boxes = set(frozenset(h[e] for e in box) for box in src.boxes)
    if not mapped_boxes <= tgt.boxes:
        return None
    mapped_order = set((h[a], h[b]) for (a, b) in src.order)
    order_refl = mapped_order == set(tgt.order)
    box_refl = mapped_boxes == set(tgt.boxes)
    if mode in (ORDER_REFLECTING, ISO) and not order_refl:
        return None
    if mode in (BOX_REFLECTING, ISO) and not box_refl:
        return None
    return Morphism(h, order_refl, box_refl)


def _find_hom_reference(src, tgt, mode):
    """Pruning-free exhaustive search, kept for differential testing."""
    if src.n != tgt.n:
        return None
    if sorted(src.labels) != sorted(tgt.labels):
        return None
    by_label = {}
    for e in range(tgt.n):
        by_label.setdefault(tgt.labels[e], []).append(e)
    src_groups = {}
    for e in range(src.n):
        src_groups.setdefault(src.labels[e], []).append(e)
    labels = sorted(src_groups)
    for combo in itertools.product(
            *[itertools.permutations(by_label[l]) for l in labels]):
        h = [None] * src.n
        for l, perm in zip(labels, combo):
            for e, t in zip(src_groups[l], perm):
                h[e] = t
        if all((h[a], h[b]) in tgt.order for (a, b) in src.order):
            m = _check_complete(src, tgt, h, mode)
            if m is not None:
                return m
    return None


def find_homomorphism(src, tgt, mode=ANY, use_pruning=True):
    """Search for a label-respecting bijection src -> tgt mapping order
    into order and boxes into boxes, refined per mode."""
    if mode not in (ANY, ORDER_REFLECTING, BOX_REFLECTING, ISO):
        raise ValueError("bad mode %r" % (mode,))
    if not use_pruning:
        return _find_hom_reference(src, tgt, mode)
    if src.n != tgt.n:
        return None
    if sorted(src.labels) != sorted(tgt.labels):
        return None
    if mode in (ORDER_REFLECTING, ISO) and len(src.order) != len(tgt.order):
        return None
    if mode in (BOX_REFLECTING, ISO) and len(src.boxes) != len(tgt.boxes):
        return None

    s_below, s_above = src.below_counts()
    t_below, t_above = tgt.below_counts()
    s_boxc = src.box_counts()
    t_boxc = tgt.box_counts()
    need_ord_eq = mode in (ORDER_REFLECTING, ISO)
    need_box_eq = mode in (BOX_REFLECTING, ISO)

    def compatible(e, t):
        if src.labels[e] != tgt.labels[t]:
            return False
        if need_ord_eq:
            if s_below[e] != t_below[t] or s_above[e] != t_above[t]:
                return False
        else:
            if s_below[e] > t_below[t] or s_above[e] > t_above[t]:
                return False
        if need_box_eq:
            if s_boxc[e] != t_boxc[t]:
                return False
        else:
            if s_boxc[e] > t_boxc[t]:
                return False
        return True

    cands = [[t for t in range(tgt.n) if compatible(e, t)]
             for e in range(src.n)]
    if any(not c for c in cands):
        return None
    # assign scarcest events first
    events = sorted(range(src.n), key=lambda e: len(cands[e]))
    h = [None] * src.n
    used = [False] * tgt.n

    def extend(i):
        if i == src.n:
            return _check_complete(src, tgt, h, mode)
        e = events[i]
        for t in cands[e]:
            if used[t]:
                continue
            ok = True
            for j in range(i):
                f = events[j]
                if ((e, f) in src.order) and (t, h[f]) not in tgt.order:
                    ok = False
                    break
                if ((f, e) in src.order) and (h[f], t) not in tgt.order:
                    ok = False
                    break
                if need_ord_eq:
                    if ((t, h[f]) in tgt.order) != ((e, f) in src.order):
                        ok = False
                        break
                    if ((h[f], t) in tgt.order) != ((f, e) in src.order):
                        ok = False
                        break
            if not ok:
                continue
            h[e] = t
            used[t] = True
            m = extend(i + 1)
            if m is not None:
                return m
            h[e] = None
            used[t] = False
        return None

    return extend(0)


def iso(P, Q):
    return find_homomorphism(P, Q, ISO) is not None


def subsumed_by(P, Q):
    """P is subsumed by Q (P has more order and boxes than Q needs)."""
    return find_homomorphism(Q, P, ANY) is not None


def factorize_subsumption(P, Q):
    """If P is subsumed by Q, split the witness into a box-only step and
    an order-only step.  Returns (R1, R2) or None."""
    phi = find_homomorphism(Q, P, ANY)
    if phi is None:
        return None
    h = phi.map  # Q-event -> P-event
    inv = {h[e]: e for e in range(Q.n)}
    # R1: Q's events and order, P's boxes pulled back
    r1_boxes = [frozenset(inv[x] for x in box) for box in P.boxes]
    R1 = Poset(Q.labels, Q.order, r1_boxes, _checked=True)
    # R2: P's events and order, Q's boxes pushed forward
    r2_boxes = [frozenset(h[x] for x in box) for box in Q.boxes]
    R2 = Poset(P.labels, P.order, r2_boxes, _checked=True)
    return R1, R2


# ---------------------------------------------------------------------------
# witness spaces for the brute-force satisfaction oracle


def weakenings(P):
    """All posets (same events/labels) with order a closed subset of P's
    and boxes a subset of P's.  Everything P is subsumed by, up to iso."""
    order = sorted(P.order)
    boxes = sorted(P.boxes, key=lambda b: (len(b), sorted(b)))
    for k in range(len(order) + 1):
        for sub in itertools.combinations(order, k):
            if not is_transitively_closed(sub):
                continue
            for j in range(len(boxes) + 1):
                for bsub in itertools.combinations(boxes, j):
                    yield Poset(P.labels, sub, bsub, _checked=True)


def box_weakenings(P):
    boxes = sorted(P.boxes, key=lambda b: (len(b), sorted(b)))
    for j in range(len(boxes) + 1):
        for bsub in itertools.combinations(boxes, j):
            yield Poset(P.labels, P.order, bsub, _checked=True)


def order_extensions(P):
    """All strict partial orders extending P's order on the same events."""
    missing = [(a, b) for a in range(P.n) for b in range(P.n)
               if a != b and (a, b) not in P.order]
    out = []
    for k in range(len(missing) + 1):
        for add in itertools.combinations(missing, k):
            rel = set(P.order) | set(add)
            ok = True
            for (a, b) in add:
                if (b, a) in rel:
                    ok = False
                    break
            if ok and is_transitively_closed(rel):
                out.append(frozenset(rel))
    return out


def new_box_candidates(P):
    evs = list(range(P.n))
    cands = []
    for k in range(1, P.n + 1):
        for sub in itertools.combinations(evs, k):
            box = frozenset(sub)
            if box not in P.boxes:
                cands.append(box)
    return cands


def strengthenings(P, max_new_boxes):
    """Posets with more order and up to max_new_boxes extra boxes; every
    yielded Q is subsumed by P."""
    cands = new_box_candidates(P)
    for rel in order_extensions(P):
        for k in range(0, max_new_boxes + 1):
            for extra in itertools.combinations(cands, k):
                yield Poset(P.labels, rel,
                            list(P.boxes) + list(extra), _checked=True)


def strengthenings_truncated(P, max_new_boxes):
    """True when the box cap actually cuts the witness space."""
    return len(new_box_candidates(P)) > max_new_boxes


# ---------------------------------------------------------------------------
# canonical keys


def _event_signatures(P):
    """Iso-invariant fingerprint per event; used to split the permutation
    classes of canonical_key without losing canonicity."""
    preds = [[] for _ in range(P.n)]
    succs = [[] for _ in range(P.n)]
    for (a, b) in P.order:
        succs[a].append(P.labels[b])
        preds[b].append(P.labels[a])
    memb = [[] for _ in range(P.n)]
    for box in P.boxes:
        blabels = tuple(sorted(P.labels[x] for x in box))
        for e in box:
            memb[e].append(blabels)
    return [(P.labels[e], tuple(sorted(preds[e])), tuple(sorted(succs[e])),
             tuple(sorted(memb[e])))
            for e in range(P.n)]


def canonical_key(P):
    """Total encoding invariant under isomorphism: brute-force minimum
    over relabellings, with permutations restricted to classes of equal
    iso-invariant event signature."""
    sigs = _event_signatures(P)
    groups = {}
    for e in range(P.n):
        groups.setdefault(sigs[e], []).append(e)
    sigs_sorted = sorted(groups)
    # new ids are assigned in blocks per signature class
    base = {}
    pos = 0
    for s in sigs_sorted:
        base[s] = pos
        pos += len(groups[s])
    order = list(P.order)
    boxes = [tuple(box) for box in P.boxes]
    if all(len(groups[s]) == 1 for s in sigs_sorted):
        # signatures separate every event: the relabelling is forced
        ren = {}
        for s in sigs_sorted:
            ren[groups[s][0]] = base[s]
        order_enc = tuple(sorted((ren[a], ren[b]) for (a, b) in order))
        boxes_enc = tuple(sorted(tuple(sorted(ren[e] for e in box))
                                 for box in boxes))
        return (P.n, tuple(sigs_sorted), (order_enc, boxes_enc))
    best = None
    for combo in itertools.product(
            *[itertools.permutations(groups[s]) for s in sigs_sorted]):
        ren = {}
        for s, perm in zip(sigs_sorted, combo):
            for off, old in enumerate(perm):
                ren[old] = base[s] + off
        order_enc = tuple(sorted((ren[a], ren[b]) for (a, b) in order))
        boxes_enc = tuple(sorted(tuple(sorted(ren[e] for e in box))
                                 for box in boxes))
        enc = (order_enc, boxes_enc)
        if best is None or enc < best:
            best = enc
    return (P.n, tuple(sigs_sorted), best)


# ---------------------------------------------------------------------------
# serialization


def from_json(data):
    if isinstance(data, str):
        data = json.loads(data)
    try:
        events = data["events"]
        order = data.get("order", [])
        boxes = data.get("boxes", [])
    except (TypeError, KeyError):
        raise PosetError("poset JSON needs an 'events' list")
    ids = [ev["id"] for ev in events]
    if len(set(ids)) != len(ids):
        raise PosetError("duplicate event ids")
    if sorted(ids) != list(range(len(ids))):
        raise PosetError("event ids must be exactly 0..n-1")
    labels = [None] * len(ids)
    for ev in events:
        labels[ev["id"]] = str(ev["label"])
    return from_edges(labels, [tuple(e) for e in order],
                      [set(b) for b in boxes])


def to_json(P):
    return {"events": [{"id": e, "label": P.labels[e]}
                       for e in range(P.n)],
            "order": [list(p) for p in sorted(P.order)],
            "boxes": [sorted(b) for b in
                      sorted(P.boxes, key=lambda b: (len(b), sorted(b)))]}


def transitive_reduction(P):
    red = set(P.order)
    for (a, b) in P.order:
        for c in range(P.n):
            if (a, c) in P.order and (c, b) in P.order:
                red.discard((a, b))
                break
    return red


def to_dot(P, name="poset"):
    """DOT export: covering edges, boxes as clusters when the box family
    is laminar; overlapping boxes degrade to dashed note nodes."""
    lines = ["digraph %s {" % name, "  rankdir=LR;"]
    boxes = sorted(P.boxes, key=lambda b: (-len(b), sorted(b)))
    clusters = []  # laminar subfamily
    overlapping = []
    for box in boxes:
        if all(box <= other or other <= box or not (box & other)
               for other in clusters):
            clusters.append(box)
        else:
            overlapping.append(box)

    # nest clusters: children of a cluster are the maximal clusters
    # strictly inside it
    roots = [b for b in clusters
             if not any(b < other for other in clusters)]

    emitted = set()

    def emit_cluster(box, indent):
        idx = len(emitted)
        emitted.add(box)
        pad = "  " * indent
        lines.append("%ssubgraph cluster_%d {" % (pad, idx))
        lines.append("%s  style=solid;" % pad)
        inner = [c for c in clusters
                 if c < box and not any(c < m < box for m in clusters)]
        covered = set()
        for c in inner:
            emit_cluster(c, indent + 1)
            covered |= c
        for e in sorted(box - covered):
            lines.append("%s  e%d [label=\"%d:%s\"];" % (pad, e, e,
                                                         P.labels[e]))
        lines.append("%s}" % pad)

    top_covered = set()
    for b in roots:
        emit_cluster(b, 1)
        top_covered |= b
    for e in range(P.n):
        if e not in top_covered:
            lines.append("  e%d [label=\"%d:%s\"];" % (e, e, P.labels[e]))
    for (a, b) in sorted(transitive_reduction(P)):
        lines.append("  e%d -> e%d;" % (a, b))
    for i, box in enumerate(overlapping):
        # not expressible as a cluster; annotate instead
        lines.append("  overlap_%d [shape=note, style=dashed, "
                     "label=\"box: %s\"];" % (
                         i, ",".join(str(e) for e in sorted(box))))
    lines.append("}")
    return "\n".join(lines)
