"""Command line front end: equational queries, model checking, term
synthesis, pattern reports, subsumption factorization, DOT export, the
built-in case studies, and the differential fuzzer."""

import argparse
import json
import sys

from . import posets, terms, logic, testkit
from .posets import PosetError
from .terms import TermSyntaxError, FragmentError
from .logic import FormulaSyntaxError


# ---------------------------------------------------------------------------
# case-study builders


def _fold(kind, parts):
    t = parts[0]
    for p in parts[1:]:
        t = (kind, t, p)
    return t


def build_counter(boxed=True):
    """The two-counter increment program as a series-parallel term."""
    def thread(r, i, w):
        body = ("seq", ("seq", ("atom", r), ("atom", i)), ("atom", w))
        return ("box", body) if boxed else body
    mid = ("par", thread("rx", "ix", "wx"), thread("ry", "iy", "wy"))
    return ("seq", ("seq", ("atom", "print"), mid), ("atom", "print"))


def build_counter_faulty_run():
    """A bad schedule of the unboxed program: both reads happen before
    both writes."""
    return _fold("seq", [
        ("atom", "print"),
        ("par", ("atom", "rx"), ("atom", "ry")),
        ("par", ("atom", "ix"), ("atom", "iy")),
        ("par", ("atom", "wx"), ("atom", "wy")),
        ("atom", "print"),
    ])


def counter_conflict_formula():
    return logic.parse_formula("<>((rx||ry)|>(wx||wy))")


def _vote(i, k):
    branches = []
    for j in range(1, k + 1):
        branches.append(_fold("seq", [
            ("atom", "choose_%d_%d" % (i, j)),
            ("atom", "read_%d" % j),
            ("atom", "inc"),
            ("atom", "write_%d" % j),
        ]))
    return _fold("join", branches)


def build_choose(n, k, boxed=True):
    votes = [_vote(i, k) for i in range(1, n + 1)]
    if boxed:
        votes = [("box", v) for v in votes]
    return _fold("par", votes)


def build_publish(n):
    return _fold("par", [("atom", "send_%d" % i) for i in range(1, n + 1)])


def build_voting(n, k, boxed=True):
    return ("seq", build_choose(n, k, boxed), build_publish(n))


def voting_conflict_formula(j):
    r = ("atom", "read_%d" % j)
    w = ("atom", "write_%d" % j)
    return ("ctx", ("seqthen", ("parnext", r, r), ("parnext", w, w)))


def voting_seqsep_formula(n, k):
    sends = _fold("or", [("atom", "send_%d" % i) for i in range(1, n + 1)])
    chooses = _fold("or", [("atom", "choose_%d_%d" % (i, j))
                           for i in range(1, n + 1)
                           for j in range(1, k + 1)])
    return ("seqthen", ("ctx", ("neg", sends)), ("ctx", ("neg", chooses)))


def voting_votethensend_formula(n, k):
    parts = []
    for i in range(1, n + 1):
        fchoose = _fold("or", [("atom", "choose_%d_%d" % (i, j))
                               for j in range(1, k + 1)])
        parts.append(("seqthen", fchoose, ("atom", "send_%d" % i)))
    return ("ctx", _fold("parnext", parts))


def voting_unique_votes_formula(k):
    disjuncts = []
    for j in range(1, k + 1):
        for j2 in range(1, k + 1):
            pair = ("parnext", ("atom", "write_%d" % j),
                    ("atom", "write_%d" % j2))
            disjuncts.append(("ctx", ("boxmod", ("ctx", pair))))
    return _fold("or", disjuncts)


def voting_write_formula(k):
    return _fold("or", [("atom", "write_%d" % j) for j in range(1, k + 1)])


def voting_frame_phi(k):
    # a non-empty pomset with no box containing a write
    w = voting_write_formula(k)
    return ("neg", ("or", logic.EMP, ("ctx", ("boxmod", ("ctx", w)))))


def voting_frame_psi(k):
    w = voting_write_formula(k)
    return ("ctx", ("seqthen", w, w))


# ---------------------------------------------------------------------------
# example runners


def _run_checks(checks, out):
    all_ok = True
    for desc, expected, actual in checks:
        ok = expected == actual
        all_ok = all_ok and ok
        out.write("%-4s  %s (expected %s, got %s)\n" % (
            "PASS" if ok else "FAIL", desc, expected, actual))
    return all_ok


def run_counter_example(out):
    conflict = counter_conflict_formula()
    run = terms.interp_sp(build_counter_faulty_run())
    plain = terms.interp_sp(build_counter(boxed=False))
    protected = terms.interp_sp(build_counter(boxed=True))
    checks = [
        ("faulty interleaved run satisfies conflict (rev)",
         True, logic.sat_bool(run, conflict, "rev")),
        ("unprotected program can reach the conflict (rev, some)",
         True, logic.sat_bool(plain, conflict, "rev")),
        ("boxed program rules the conflict out (rev, some)",
         False, logic.sat_bool(protected, conflict, "rev")),
    ]
    return _run_checks(checks, out)


def run_voting_example(n, k, out):
    vote = build_voting(n, k, boxed=True)
    vote_prime = build_voting(n, k, boxed=False)
    conflict = voting_conflict_formula(1)
    seqsep = voting_seqsep_formula(n, k)
    vts = voting_votethensend_formula(n, k)
    uniq = voting_unique_votes_formula(k)
    phi = voting_frame_phi(k)
    psi = voting_frame_psi(k)
    choose_boxed = ("box", build_choose(n, k, boxed=True))
    publish_boxed = ("box", build_publish(n))
    composed = ("seq", choose_boxed, publish_boxed)
    choose_ps = terms.interp(choose_boxed)
    publish_ps = terms.interp(publish_boxed)

    frame_bicond = all(
        logic.frame_check(p, q, phi, psi, "seq_suffix")["biconditional"]
        for p in choose_ps for q in publish_ps)

    checks = [
        ("unboxed protocol can show a conflict (rev, some)",
         True, logic.sat_set(vote_prime, conflict, "rev", "some")),
        ("boxed protocol rules the conflict out (rev, some)",
         False, logic.sat_set(vote, conflict, "rev", "some")),
        ("sends happen after all votes: seqsep (iso, all)",
         True, logic.sat_set(vote, seqsep, "iso", "all")),
        ("each voter votes then is notified (sub, all)",
         True, logic.sat_set(vote, vts, "sub", "all")),
        ("no box writes two counters: unique votes (sub, some)",
         False, logic.sat_set(vote, uniq, "sub", "some")),
        ("boxed choose phase independent of phi (iso, all)",
         True, all(logic.independent(p, phi) for p in choose_ps)),
        ("boxed publish phase satisfies [phi] (iso, all)",
         True, logic.sat_set(publish_ps, ("boxmod", phi), "iso", "all")),
        ("boxed choose cannot show write-then-write (iso, all)",
         False, logic.sat_set(choose_ps, psi, "iso", "all")),
        ("composed program fails psi |> [phi] (iso, all)",
         False, logic.sat_set(composed,
                              ("seqthen", psi, ("boxmod", phi)),
                              "iso", "all")),
        ("frame biconditional on every member pair",
         True, frame_bicond),
    ]
    return _run_checks(checks, out)


# ---------------------------------------------------------------------------
# CLI plumbing


def _text(arg):
    if arg.startswith("@"):
        with open(arg[1:], "r", encoding="utf-8") as fh:
            return fh.read().strip()
    return arg


def _load_poset_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return posets.from_json(json.load(fh))


def _single_poset(args):
    if getattr(args, "poset_json", None):
        return _load_poset_json(args.poset_json)
    t = terms.parse_term(_text(args.term))
    return terms.interp_sp(t)


def _poset_set(args):
    if getattr(args, "poset_json", None):
        return [_load_poset_json(args.poset_json)]
    return terms.interp(terms.parse_term(_text(args.term)))


def _emit(args, payload, human):
    if getattr(args, "json", False):
        print(json.dumps(payload))
    else:
        print(human)


def build_parser():
    p = argparse.ArgumentParser(
        prog="pombox",
        description="posets with boxes: algebra and model checking")
    sub = p.add_subparsers(dest="cmd", required=True)

    for name in ("eq", "leq"):
        q = sub.add_parser(name, help="decide %s in an axiom system" % name)
        q.add_argument("--system", choices=("bsp", "cmb", "bsr", "csrb"),
                       required=True)
        q.add_argument("--json", action="store_true")
        q.add_argument("lhs")
        q.add_argument("rhs")

    q = sub.add_parser("mc", help="model check a formula")
    q.add_argument("--relation", choices=logic.RELATIONS, default="iso")
    q.add_argument("--quantifier", choices=("all", "some"), default="all")
    q.add_argument("--formula", required=True)
    q.add_argument("--poset-json")
    q.add_argument("--json", action="store_true")
    q.add_argument("term", nargs="?")

    q = sub.add_parser("synth", help="synthesize a term from a poset")
    q.add_argument("--poset-json")
    q.add_argument("--json", action="store_true")
    q.add_argument("term", nargs="?")

    q = sub.add_parser("patterns", help="report forbidden patterns")
    q.add_argument("--poset-json")
    q.add_argument("--json", action="store_true")
    q.add_argument("term", nargs="?")

    q = sub.add_parser("factorize",
                       help="factor a subsumption into box/order steps")
    q.add_argument("--json-posets", action="store_true",
                   help="treat the two arguments as poset JSON files")
    q.add_argument("--json", action="store_true")
    q.add_argument("lhs")
    q.add_argument("rhs")

    q = sub.add_parser("export-dot", help="write a poset in DOT format")
    q.add_argument("--poset-json")
    q.add_argument("-o", "--output")
    q.add_argument("term", nargs="?")

    q = sub.add_parser("examples", help="run a built-in case study")
    q.add_argument("name", choices=("counter", "voting"))
    q.add_argument("--voters", type=int, default=2)
    q.add_argument("--counters", type=int, default=2)

    q = sub.add_parser("fuzz", help="differential engine-vs-oracle fuzzing")
    q.add_argument("--cases", type=int, default=50)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--max-events", type=int, default=3)
    q.add_argument("--formula-depth", type=int, default=3)
    q.add_argument("--cap", type=int, default=2)
    return p


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.cmd in ("eq", "leq"):
        lhs = terms.parse_term(_text(args.lhs))
        rhs = terms.parse_term(_text(args.rhs))
        res = terms.decide(args.system, lhs, rhs, args.cmd)
        _emit(args, {"result": res}, "true" if res else "false")
        return 0 if res else 1

    if args.cmd == "mc":
        if args.term is None and not args.poset_json:
            parser.error("mc needs a term or --poset-json")
        members = _poset_set(args)
        f = logic.parse_formula(_text(args.formula))
        holds = logic.sat_set(members, f, args.relation, args.quantifier)
        witness = None
        if holds:
            for m in members:
                r = logic.sat(m, f, args.relation)
                if r.truth:
                    witness = r.witness
                    break
        _emit(args, {"holds": holds, "witness": witness},
              "true" if holds else "false")
        return 0 if holds else 1

    if args.cmd == "synth":
        if args.term is None and not args.poset_json:
            parser.error("synth needs a term or --poset-json")
        P = _single_poset(args)
        t = terms.synthesize_term(P)
        if t is None:
            w = terms.sp_check(P)
            _emit(args, {"result": False, "witness": w.as_dict()},
                  "not series-parallel: %r" % w)
            return 1
        _emit(args, {"result": True, "term": terms.render_term(t)},
              terms.render_term(t))
        return 0

    if args.cmd == "patterns":
        if args.term is None and not args.poset_json:
            parser.error("patterns needs a term or --poset-json")
        P = _single_poset(args)
        w = terms.sp_check(P)
        if w is None:
            _emit(args, {"result": True}, "ok")
            return 0
        _emit(args, {"result": False, "witness": w.as_dict()}, repr(w))
        return 1

    if args.cmd == "factorize":
        if args.json_posets:
            P = _load_poset_json(args.lhs)
            Q = _load_poset_json(args.rhs)
        else:
            P = terms.interp_sp(terms.parse_term(_text(args.lhs)))
            Q = terms.interp_sp(terms.parse_term(_text(args.rhs)))
        res = posets.factorize_subsumption(P, Q)
        if res is None:
            _emit(args, {"result": False}, "not subsumed")
            return 1
        R1, R2 = res
        payload = {"result": True, "r1": posets.to_json(R1),
                   "r2": posets.to_json(R2)}
        _emit(args, payload, json.dumps(payload, indent=2))
        return 0

    if args.cmd == "export-dot":
        if args.term is None and not args.poset_json:
            parser.error("export-dot needs a term or --poset-json")
        P = _single_poset(args)
        dot = posets.to_dot(P)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(dot + "\n")
        else:
            print(dot)
        return 0

    if args.cmd == "examples":
        if args.name == "counter":
            ok = run_counter_example(sys.stdout)
        else:
            ok = run_voting_example(args.voters, args.counters, sys.stdout)
        return 0 if ok else 1

    if args.cmd == "fuzz":
        cfg = testkit.GenConfig(max_events=args.max_events,
                                formula_depth=args.formula_depth,
                                seed=args.seed)
        found = testkit.differential_run(cfg, args.cases, cap=args.cap)
        for d in found:
            print(json.dumps(d.as_dict()))
        return 0 if not found else 1

    parser.error("unknown command")


def main(argv=None):
    try:
        return run(sys.argv[1:] if argv is None else argv)
    except (PosetError, TermSyntaxError, FormulaSyntaxError, FragmentError,
            ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
