"""Command-line front end.

Every command prints a deterministic report on standard output. Exit codes:
0 holds or computed, 1 fails or refuted (with a certificate), 2 usage or
input error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import corpus
from .analysis import (Scope, asymmetric_amalgam, check_robinson, companion_check, ctr,
                       enumerate_models, h_maximal_members, is_amalgamation_basis, is_complete,
                       is_h_maximal, is_pc, load_universe, pc_continuation, pc_indices, qe_check,
                       save_universe)
from .analysis.classes import AmalgamFailure, HomFailure, JointFailure
from .analysis.theories import CompanionFailure, Countermodel, RobinsonFailure
from .errors import BudgetExceeded, Inconclusive, NotAModel, PosmodError, PreconditionError
from .logic import FormulaFragment, parse_formula, parse_theory, to_text
from .morphisms import (EmbeddingFailure, Homomorphism, ImmersionFailure, count_homomorphisms,
                        find_homomorphisms, is_embedding, is_immersion, serialize_map)
from .structures import parse_structure, serialize_structure
from .verdict import Kind

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

_BOUNDED = {"HOLDS_WITHIN", "NOT_REFUTED_UP_TO", "NOT_FOUND_WITHIN"}

log = logging.getLogger("posmod")


class UsageError(PosmodError):
    pass


# ---------------------------------------------------------------- output

class Report:
    """Collects records and renders them in human or machine form."""

    def __init__(self, verb, fmt):
        self.verb = verb
        self.fmt = fmt
        self.lines = []

    def record(self, verdict, bound=None, certificate=None, note=None):
        if self.fmt == "machine":
            fields = [self.verb, verdict, "-" if bound is None else str(bound),
                      "-" if certificate is None else _one_line(certificate)]
            self.lines.append("\t".join(fields))
        else:
            head = f"{verdict}({bound})" if verdict in _BOUNDED and bound is not None else verdict
            self.lines.append(f"{self.verb}: {head}")
            if certificate is not None:
                for line in str(certificate).splitlines():
                    self.lines.append(f"  {line}")
            if note:
                self.lines.append(f"  note: {note}")

    def text(self, line):
        """Free-form line; machine mode keeps only records."""
        if self.fmt != "machine":
            self.lines.append(line)

    def caveat(self, verdict):
        c = verdict.caveat() if verdict is not None else None
        if c and self.fmt != "machine":
            self.lines.append(f"  caveat: {c}")

    def emit(self, out):
        for line in self.lines:
            out.write(line + "\n")


def _one_line(text):
    return " ".join(str(text).split())


def _compact(a):
    return serialize_structure(a, compact=True)


def certificate(w, u=None):
    """Replayable text for a verdict witness."""
    def member(i):
        return f"member #{i} {_compact(u.members[i])}" if u is not None else f"member #{i}"

    if isinstance(w, HomFailure):
        lines = [f"into {member(w.member)}", f"hom {serialize_map(w.hom.map)}"]
        if isinstance(w.reason, ImmersionFailure):
            lines.append(_immersion_text(w.reason))
        elif w.reason is not None:
            lines.append(w.reason.describe())
        return "\n".join(lines)
    if isinstance(w, ImmersionFailure):
        return _immersion_text(w)
    if isinstance(w, EmbeddingFailure):
        return w.describe()
    if isinstance(w, AmalgamFailure):
        return "\n".join([f"left {member(w.left)}", f"f {serialize_map(w.f.map)}",
                          f"right {member(w.right)}", f"g {serialize_map(w.g.map)}",
                          "no member closes the square"])
    if isinstance(w, JointFailure):
        return f"{member(w.left)}\n{member(w.right)}\nno common continuation"
    if isinstance(w, RobinsonFailure):
        return "\n".join([f"left {member(w.left)} tuple {_tuple(w.left_tuple)}",
                          f"right {member(w.right)} tuple {_tuple(w.right_tuple)}",
                          f"atomic types contained, {w.direction}"])
    if isinstance(w, Countermodel):
        asg = " ".join(f"{k}={v}" for k, v in w.assignment.items())
        return f"{member(w.member) if u is not None else _compact(w.structure)} at [{asg}]"
    if isinstance(w, CompanionFailure):
        return f"{_compact(w.structure)} is pc for {w.pc_in} only"
    if hasattr(w, "describe"):
        return w.describe()
    return str(w)


def _immersion_text(f):
    asg = " ".join(f"{k}={v}" for k, v in f.assignment.items())
    return f"formula {to_text(f.formula)} holds at the image of [{asg}] but not in the source"


def _tuple(t):
    return "(" + " ".join(map(str, t)) + ")"


# ---------------------------------------------------------------- inputs

def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _theory(args, attr="theory"):
    path = getattr(args, attr, None)
    if not path:
        raise UsageError("a theory file is required (-T)")
    return parse_theory(_read(path))


def _structure(path, sig=None):
    return parse_structure(_read(path), sig)


def _universe(args, theory):
    if args.max_size is None:
        raise UsageError("--max-size is required")
    if args.universe and os.path.exists(os.path.join(args.universe, "manifest.json")):
        u = load_universe(args.universe, theory)
        if u.bound != args.max_size:
            raise UsageError(f"stored universe has bound {u.bound}, not {args.max_size}")
        return u
    t0 = time.perf_counter()
    u = enumerate_models(theory, args.max_size, args.budget, args.jobs)
    log.info("enumerated %d members in %.2fs", len(u), time.perf_counter() - t0)
    return u


def _save(args, u):
    if args.universe:
        save_universe(u, args.universe)


def _fragment(args, default):
    text = args.fragment or default
    try:
        return FormulaFragment.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _exit_for(verdict):
    return EXIT_OK if verdict else EXIT_FAIL


def _verdict(report, v, u=None):
    cert = certificate(v.witness, u) if v.kind in (Kind.FAILS, Kind.REFUTED) else None
    report.record(v.kind.value, v.bound, cert)
    report.caveat(v)
    return _exit_for(v)


# ---------------------------------------------------------------- verbs

def cmd_models(args, report):
    theory = _theory(args)
    u = _universe(args, theory)
    by_size = {}
    for m in u.members:
        by_size[m.size] = by_size.get(m.size, 0) + 1
    report.text(f"theory {theory.name}: {len(u)} models up to size {u.bound}")
    for size in range(1, u.bound + 1):
        report.text(f"  size {size}: {by_size.get(size, 0)}")
    if args.list:
        for i, m in enumerate(u.members):
            report.record("MEMBER", u.bound, f"#{i} {_compact(m)}")
    report.record("COMPUTED", u.bound, f"count={len(u)}")
    if args.out:
        save_universe(u, args.out)
        report.text(f"saved to {args.out}")
    _save(args, u)
    return EXIT_OK


def _pair(args):
    sig = _theory(args).sig if args.theory else None
    a = _structure(args.source, sig)
    b = _structure(args.target, sig if sig is not None else a.sig)
    return a, b


def cmd_homs(args, report):
    a, b = _pair(args)
    if args.count:
        n = count_homomorphisms(a, b)
        if args.format == "machine":
            report.record("COMPUTED", None, str(n))
        else:
            report.text(str(n))
        return EXIT_OK
    homs = find_homomorphisms(a, b, limit=args.limit)
    kinds = []
    for h in homs:
        if args.kind == "embedding" and not is_embedding(h):
            continue
        if args.kind == "immersion" and not is_immersion(h, certificate=False):
            continue
        kinds.append(h)
    for h in kinds:
        report.record("HOM", None, serialize_map(h.map))
    report.record("COMPUTED", None, f"count={len(kinds)}")
    return EXIT_OK


def _parse_map(text, a, b):
    try:
        images = tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise UsageError("--map expects the images of 0..n-1, e.g. --map '0 1 2'") from None
    if len(images) != a.size:
        raise UsageError(f"--map needs {a.size} images")
    try:
        return Homomorphism(a, b, images)
    except PosmodError as e:
        raise UsageError(f"--map is not a homomorphism: {e}") from None


def cmd_check_immersion(args, report):
    a, b = _pair(args)
    frag = _fragment(args, "3,4,4") if args.mode == "oracle" else None
    homs = [_parse_map(args.map, a, b)] if args.map else find_homomorphisms(a, b)
    if not homs:
        report.record("COMPUTED", None, "no homomorphisms")
        return EXIT_OK
    for h in homs:
        v = is_immersion(h, mode=args.mode, frag=frag)
        if not v:
            report.record(v.kind.value, None, f"hom {serialize_map(h.map)}\n" + certificate(v.witness))
            return EXIT_FAIL
    report.record("HOLDS", None, f"{len(homs)} homomorphism(s) checked")
    return EXIT_OK


def _model_check(args, report, fn):
    theory = _theory(args)
    a = _structure(args.structure, theory.sig)
    u = _universe(args, theory)
    code = _verdict(report, fn(a, u), u)
    _save(args, u)
    return code


def cmd_check_pc(args, report):
    code = _model_check(args, report, is_pc)
    if args.continuation:
        theory = _theory(args)
        a = _structure(args.structure, theory.sig)
        u = _universe(args, theory)
        v = pc_continuation(a, u)
        if v.kind is Kind.NOT_FOUND_WITHIN:
            report.record(v.kind.value, v.bound, None, "no pc continuation within the bound")
        else:
            w = v.witness
            report.record("CONTINUATION", v.bound,
                          f"member #{w.member} {_compact(u.members[w.member])}\nhom {serialize_map(w.hom.map)}")
    return code


def cmd_check_hmax(args, report):
    return _model_check(args, report, is_h_maximal)


def cmd_check_amalg(args, report):
    return _model_check(args, report, is_amalgamation_basis)


def cmd_check_complete(args, report):
    theory = _theory(args)
    u = _universe(args, theory)
    code = _verdict(report, is_complete(u), u)
    _save(args, u)
    return code


def cmd_pc_members(args, report):
    theory = _theory(args)
    u = _universe(args, theory)
    pcs = pc_indices(u, args.jobs)
    for i in pcs:
        report.record("PC", u.bound, f"#{i} {_compact(u.members[i])}")
    if args.hmax:
        h_maximal_members(u, args.jobs)
        for i in range(len(u)):
            if u.flag(i, "hmax"):
                report.record("HMAX", u.bound, f"#{i} {_compact(u.members[i])}")
    report.record("COMPUTED", u.bound, f"pc={len(pcs)}")
    _save(args, u)
    return EXIT_OK


def cmd_ctr(args, report):
    theory = _theory(args)
    if not args.formula:
        raise UsageError("--formula is required")
    phi = parse_formula(args.formula, theory.sig)
    u = _universe(args, theory)
    frag = _fragment(args, "2,1,2")
    rep = ctr(theory, phi, frag, u.bound, qf_basis=args.qf_basis, complement=args.complement,
              universe=u, jobs=args.jobs)
    report.text(f"Ctr of {to_text(phi)} over fragment {rep.fragment.m},{rep.fragment.v},{rep.fragment.k}"
                f"{',or' if rep.fragment.disjunction else ''}")
    refuted = 0
    for k, (psi, v) in enumerate(rep.entries):
        if v.kind is Kind.REFUTED:
            refuted += 1
            if args.all:
                report.record("REFUTED", None, f"{to_text(psi)}\ncountermodel {certificate(v.witness, u)}")
        else:
            note = None
            if rep.qf_basis is not None:
                q = rep.qf_basis.get(k)
                note = f"qf {to_text(q)}" if q is not None else "qf none"
            report.record(v.kind.value, v.bound, to_text(psi), note)
    if rep.complement_searched:
        if rep.complement is None:
            report.record("NO_COMPLEMENT", u.bound, None)
        else:
            report.record("COMPLEMENT", u.bound, to_text(rep.complement))
    report.record("COMPUTED", u.bound, f"refuted={refuted} not_refuted={len(rep.entries) - refuted}")
    report.text(f"  caveat: NOT_REFUTED entries are evidence from models of size <= {u.bound}, not proofs")
    _save(args, u)
    return EXIT_OK


def cmd_check_robinson(args, report):
    theory = _theory(args)
    u = _universe(args, theory)
    scope = Scope(args.scope)
    code = _verdict(report, check_robinson(u, args.tuple_cap, scope), u)
    _save(args, u)
    return code


def cmd_qe(args, report):
    theory = _theory(args)
    if not args.formula:
        raise UsageError("--formula is required")
    phi = parse_formula(args.formula, theory.sig)
    u = _universe(args, theory)
    frag = _fragment(args, "3,0,2")
    psi = qe_check(u, phi, frag)
    _save(args, u)
    if psi is None:
        report.record(Kind.NOT_FOUND_WITHIN.value, u.bound, None,
                      "no quantifier-free fragment formula agrees on every pc member")
        return EXIT_FAIL
    report.record("FOUND", u.bound, to_text(psi))
    report.text(f"  caveat: equivalence checked on pc members of size <= {u.bound}")
    return EXIT_OK


def cmd_companion(args, report):
    t1 = parse_theory(_read(args.first))
    t2 = parse_theory(_read(args.second))
    if args.max_size is None:
        raise UsageError("--max-size is required")
    return _verdict(report, companion_check(t1, t2, args.max_size, args.budget, args.jobs))


def cmd_amalgam(args, report):
    theory = _theory(args)
    sig = theory.sig
    a, b, c = (_structure(p, sig) for p in (args.base, args.left, args.right))
    i = _parse_map(args.imap, a, b)
    f = _parse_map(args.fmap, a, c)
    u = _universe(args, theory)
    v = asymmetric_amalgam(a, b, c, i, f, u)
    if v.kind is Kind.NOT_FOUND_WITHIN:
        report.record(v.kind.value, v.bound, None)
        return EXIT_FAIL
    w = v.witness
    report.record("FOUND", v.bound, f"member #{w.member} {_compact(u.members[w.member])}\n"
                                    f"g {serialize_map(w.g.map)}\nj {serialize_map(w.j.map)}")
    return EXIT_OK


def cmd_corpus(args, report):
    samples = {}
    if args.family == "cycles":
        variant = args.variant or "T"
        cap = args.cap if args.cap is not None else args.max_size
        _, text, samples = corpus.corpus_cycles(variant, args.n, cap)
        name = {"Tn": f"T{args.n}"}.get(variant, variant)
    elif args.family == "group":
        _, text, g = corpus.corpus_group(args.p, args.k, args.g)
        name = "Tag+"
        samples = {f"Z{args.p ** args.k}-{args.g}": g}
    elif args.family == "successor":
        _, text, samples = corpus.corpus_successor()
        name = "Succ"
    else:
        raise UsageError(f"unknown corpus family {args.family!r}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        paths = [os.path.join(args.out, f"{name}.pmt")]
        with open(paths[0], "w") as fh:
            fh.write(text)
        for key, s in sorted(samples.items()):
            path = os.path.join(args.out, f"{key}.pms")
            with open(path, "w") as fh:
                fh.write(serialize_structure(s))
            paths.append(path)
        for p in paths:
            report.record("WROTE", None, p)
    else:
        report.text(text.rstrip("\n"))
        for key, s in sorted(samples.items()):
            report.text(f"; {key}")
            report.text(serialize_structure(s).rstrip("\n"))
        report.record("COMPUTED", None, f"{name} with {len(samples)} sample(s)")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-T", "--theory", help="theory file (.pmt)")
    common.add_argument("--max-size", type=int, help="universe size bound")
    common.add_argument("--fragment", help="formula fragment m,v,k[,or]")
    common.add_argument("--tuple-cap", type=int, default=2)
    common.add_argument("--scope", choices=["local", "global"], default="global")
    common.add_argument("--format", choices=["human", "machine"], default="human")
    common.add_argument("--out", help="output directory")
    common.add_argument("--budget", type=int, help="maximum atom decisions during enumeration")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--universe", help="directory to load the model universe from or save it to")
    common.add_argument("--timing", action="store_true", help="report timings on standard error")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="posmod", description="Positive model theory over finite structures.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("models", parents=[common], help="enumerate models up to a size bound")
    s.add_argument("--list", action="store_true", help="print every member")
    s.set_defaults(fn=cmd_models)

    s = sub.add_parser("homs", parents=[common], help="homomorphisms between two structures")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--count", action="store_true")
    s.add_argument("--limit", type=int)
    s.add_argument("--kind", choices=["hom", "embedding", "immersion"], default="hom")
    s.set_defaults(fn=cmd_homs)

    s = sub.add_parser("check-immersion", parents=[common], help="is a homomorphism an immersion")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--map", help="images of 0..n-1; default: every homomorphism")
    s.add_argument("--mode", choices=["retraction", "oracle"], default="retraction")
    s.set_defaults(fn=cmd_check_immersion)

    for verb, fn, text in [("check-pc", cmd_check_pc, "positively closed within the universe"),
                           ("check-hmax", cmd_check_hmax, "h-maximal within the universe"),
                           ("check-amalg", cmd_check_amalg, "amalgamation basis within the universe")]:
        s = sub.add_parser(verb, parents=[common], help=text)
        s.add_argument("structure")
        if verb == "check-pc":
            s.add_argument("--continuation", action="store_true", help="also report a pc continuation")
        s.set_defaults(fn=fn)

    s = sub.add_parser("check-complete", parents=[common], help="joint continuation property")
    s.set_defaults(fn=cmd_check_complete)

    s = sub.add_parser("pc-members", parents=[common], help="list pc (and h-maximal) members")
    s.add_argument("--hmax", action="store_true")
    s.set_defaults(fn=cmd_pc_members)

    s = sub.add_parser("ctr", parents=[common], help="refutation-style Ctr set of a formula")
    s.add_argument("--formula", required=False)
    s.add_argument("--qf-basis", action="store_true")
    s.add_argument("--complement", action="store_true")
    s.add_argument("--all", action="store_true", help="also print refuted formulas")
    s.set_defaults(fn=cmd_ctr)

    s = sub.add_parser("check-robinson", parents=[common], help="(locally) positive Robinson property")
    s.set_defaults(fn=cmd_check_robinson)

    s = sub.add_parser("qe", parents=[common], help="quantifier-free equivalent on pc members")
    s.add_argument("--formula")
    s.set_defaults(fn=cmd_qe)

    s = sub.add_parser("companion", parents=[common], help="same pc members up to the bound")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(fn=cmd_companion)

    s = sub.add_parser("amalgam", parents=[common], help="asymmetric amalgam over an immersion")
    s.add_argument("base")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--imap", required=True, help="immersion base -> left")
    s.add_argument("--fmap", required=True, help="homomorphism base -> right")
    s.set_defaults(fn=cmd_amalgam)

    s = sub.add_parser("corpus", parents=[common], help="emit example theories and structures")
    s.add_argument("family", choices=["cycles", "group", "successor"])
    s.add_argument("variant", nargs="?", choices=["T", "Tprime", "Tn"])
    s.add_argument("--n", type=int, help="index for Tn")
    s.add_argument("--cap", type=int, help="collapse schema cap for Tn (default --max-size)")
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--g", type=int, default=1)
    s.set_defaults(fn=cmd_corpus)
    return p


def run(argv, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, stream=err, format="%(name)s: %(message)s")
    report = Report(args.verb, args.format)
    t0 = time.perf_counter()
    try:
        code = args.fn(args, report)
    except BudgetExceeded as e:
        done = len(e.partial) if e.partial is not None else 0
        report.record("BUDGET_EXCEEDED", None, f"{e}; {done} member(s) of completed sizes found")
        code = EXIT_BUDGET
    except Inconclusive as e:
        report.record("INCONCLUSIVE", None, str(e))
        code = EXIT_FAIL
    except (UsageError, NotAModel, PreconditionError, PosmodError) as e:
        report.emit(out)
        err.write(f"posmod {args.verb}: error: {e}\n")
        return EXIT_USAGE
    report.emit(out)
    if args.timing:
        err.write(f"posmod {args.verb}: {time.perf_counter() - t0:.2f}s\n")
    return code


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
