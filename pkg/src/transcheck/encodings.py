"""Synchronous-to-asynchronous process encoding and encoding spot-checkers.

The bundled encoding protocols each synchronous output through a private
acknowledgement channel: x!z.P becomes new u. (x!u | u(v).(v!z | P')), and a
receiver x(y).P becomes x(u).new v. (u!v | v(y).P').  It is realized twice,
directly on process terms and as a head map over the process signature, and
the two routes are required to agree up to renaming of bound names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Callable

from .finlang import FiniteLanguage, Verdict, denote
from .pi import (Barb, BisimVerdict, ExtBarb, In, Nil, Out, Par, PiError,
                 PiTerm, PVar, Repl, Res, all_names, alpha_eq_pi, bisim,
                 free_names, is_async, process_vars, weak_barb, _fresh_name)
from .terms import (App, Construct, Signature, Term, TermError, Translation,
                    Var, complete_compositional, free_vars, parse_term,
                    translation)


_RESERVED_PREFIX = "_b"


def boudol_translate(p: PiTerm) -> PiTerm:
    """Protocol translation into the asynchronous sublanguage.

    Auxiliary names are drawn deterministically from the reserved namespace
    _b0, _b1, ... (least unused), skipping any that occur in p, outermost
    first and left to right; T(X) = X and the translation is homomorphic on
    0, |, !, new.
    """
    used = all_names(p)
    ctr = count()

    def fresh() -> str:
        while True:
            n = f"{_RESERVED_PREFIX}{next(ctr)}"
            if n not in used:
                return n

    def go(t: PiTerm) -> PiTerm:
        match t:
            case Nil() | PVar(_) | ExtBarb(_):
                return t
            case Out(x, z, k):
                u, v = fresh(), fresh()
                return Res(u, Par(Out(x, u, Nil()),
                                  In(u, v, Par(Out(v, z, Nil()), go(k)))))
            case In(x, y, k):
                u, v = fresh(), fresh()
                return In(x, u, Res(v, Par(Out(u, v, Nil()),
                                           In(v, y, go(k)))))
            case Par(l, r):
                return Par(go(l), go(r))
            case Res(n, b):
                return Res(n, go(b))
            case Repl(b):
                return Repl(go(b))
        raise PiError(f"not a process: {t!r}")

    out = go(p)
    if not is_async(out):
        raise AssertionError("translation left a guarded output continuation")
    return out


# ------------- the same translation as a head map -------------

PI_TERM_SIG = Signature("pi", (
    Construct("Nil", 0, ()),
    Construct("Out", 3, ((), (), ())),
    Construct("In", 2, ((), ("y",))),
    Construct("Par", 2, ((), ())),
    Construct("Res", 1, (("x",),)),
    Construct("Repl", 1, ((),)),
))

API_TERM_SIG = Signature("api", (
    Construct("Nil", 0, ()),
    Construct("Out", 2, ((), ())),
    Construct("In", 2, ((), ("y",))),
    Construct("Par", 2, ((), ())),
    Construct("Res", 1, (("x",),)),
    Construct("Repl", 1, ((),)),
))


def boudol_head_translation() -> Translation:
    heads = {
        "Nil": App("Nil", (), ()),
        "Out": App("Res", ("u",), (
            App("Par", (), (
                App("Out", (), (Var("X1"), Var("u"))),
                App("In", ("v",), (Var("u"),
                    App("Par", (), (
                        App("Out", (), (Var("v"), Var("X2"))),
                        Var("X3"))))))),)),
        "In": App("In", ("u",), (Var("X1"),
            App("Res", ("v",), (
                App("Par", (), (
                    App("Out", (), (Var("u"), Var("v"))),
                    App("In", ("y",), (Var("v"), Var("X2"))))),)))),
        "Par": App("Par", (), (Var("X1"), Var("X2"))),
        "Res": App("Res", ("x",), (Var("X1"),)),
        "Repl": App("Repl", (), (Var("X1"),)),
    }
    return translation(PI_TERM_SIG, API_TERM_SIG, heads)


def pi_to_term(t: PiTerm) -> Term:
    """Embed a process as a term over the process signature.

    Names and process variables both become term variables; observation
    constants have no term form."""
    match t:
        case Nil():
            return App("Nil", (), ())
        case PVar(x):
            return Var(x)
        case ExtBarb(_):
            raise PiError("observation constants have no term-language form")
        case Out(x, y, k):
            return App("Out", (), (Var(x), Var(y), pi_to_term(k)))
        case In(x, z, k):
            return App("In", (z,), (Var(x), pi_to_term(k)))
        case Par(l, r):
            return App("Par", (), (pi_to_term(l), pi_to_term(r)))
        case Res(n, b):
            return App("Res", (n,), (pi_to_term(b),))
        case Repl(b):
            return App("Repl", (), (pi_to_term(b),))
    raise PiError(f"not a process: {t!r}")


def term_to_pi(t: Term) -> PiTerm:
    """Read a process-shaped term back; output arity picks the sublanguage."""
    def name_of(u: Term) -> str:
        if not isinstance(u, Var):
            raise PiError(f"name position holds a non-variable term: {u!r}")
        return u.name

    match t:
        case Var(x):
            if x[:1].isupper():
                return PVar(x)
            raise PiError(f"free lowercase variable {x!r} is not a process")
        case App("Nil", _, _):
            return Nil()
        case App("Out", _, args) if len(args) == 3:
            return Out(name_of(args[0]), name_of(args[1]), term_to_pi(args[2]))
        case App("Out", _, args) if len(args) == 2:
            return Out(name_of(args[0]), name_of(args[1]), Nil())
        case App("In", bound, args):
            return In(name_of(args[0]), bound[0], term_to_pi(args[1]))
        case App("Par", _, args):
            return Par(term_to_pi(args[0]), term_to_pi(args[1]))
        case App("Res", bound, args):
            return Res(bound[0], term_to_pi(args[0]))
        case App("Repl", _, args):
            return Repl(term_to_pi(args[0]))
    raise PiError(f"not a process-shaped term: {t!r}")


@dataclass(frozen=True)
class Encoding:
    """A process translation given both directly and by its head map."""
    name: str
    translate: Callable[[PiTerm], PiTerm]
    head_map: Translation

    def translate_via_heads(self, p: PiTerm) -> PiTerm:
        return term_to_pi(complete_compositional(self.head_map)(pi_to_term(p)))


def boudol_encoding() -> Encoding:
    return Encoding("boudol", boudol_translate, boudol_head_translation())


def routes_agree(enc: Encoding, probes: list[PiTerm]) -> Verdict:
    """Direct route vs head-map route, compared up to renaming of bound names."""
    for p in probes:
        if not alpha_eq_pi(enc.translate(p), enc.translate_via_heads(p)):
            return Verdict(False, (p,), "translation routes disagree")
    return Verdict(True, None, f"agree on {len(probes)} probes")


# ------------- plugging contexts -------------

def _subst_pvar(context: PiTerm, var: str, p: PiTerm) -> PiTerm:
    """Replace every occurrence of the process variable var by p, renaming
    context binders off the free names of p so nothing is captured."""
    fnp = free_names(p)
    avoid = set(all_names(context)) | set(fnp)

    def go(t: PiTerm, ren: dict[str, str]) -> PiTerm:
        match t:
            case Nil() | ExtBarb(_):
                return t
            case PVar(x):
                return p if x == var else t
            case Out(x, y, k):
                return Out(ren.get(x, x), ren.get(y, y), go(k, ren))
            case In(x, z, k):
                chan = ren.get(x, x)
                inner = {a: b for a, b in ren.items() if a != z}
                if z in fnp:
                    z2 = _fresh_name(z, avoid)
                    avoid.add(z2)
                    inner[z] = z2
                    z = z2
                return In(chan, z, go(k, inner))
            case Res(n, b):
                inner = {a: b for a, b in ren.items() if a != n}
                if n in fnp:
                    n2 = _fresh_name(n, avoid)
                    avoid.add(n2)
                    inner[n] = n2
                    n = n2
                return Res(n, go(b, inner))
            case Par(l, r):
                return Par(go(l, ren), go(r, ren))
            case Repl(b):
                return Repl(go(b, ren))
        raise PiError(f"not a process: {t!r}")

    return go(context, {})


def plug(context: PiTerm, p: PiTerm) -> PiTerm:
    """Substitute p for the unique process variable of context."""
    if process_vars(p):
        raise PiError(f"cannot plug an open process: free {sorted(process_vars(p))}")
    holes = process_vars(context)
    if len(holes) != 1:
        raise PiError(f"context must have exactly one process variable, found {sorted(holes)}")
    (hole,) = holes
    return _subst_pvar(context, hole, p)


@dataclass(frozen=True)
class ContextProbe:
    """A one-hole observer: plug a subject in, ask for a weak barb."""
    context: PiTerm
    subject: PiTerm
    barb: Barb

    def plugged(self) -> PiTerm:
        return plug(self.context, self.subject)

    def observe(self, budget: int) -> str:
        return weak_barb(self.plugged(), self.barb, budget)


# ------------- spot checks and reports -------------

@dataclass
class EncodingReport:
    kind: str
    rows: list[tuple[PiTerm, BisimVerdict]] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        out = {"bisimilar": 0, "not": 0, "inconclusive": 0}
        for _, v in self.rows:
            out[v.result] += 1
        return out


def check_encoding_pairs(enc: Encoding, terms: list[PiTerm], kind: str,
                         budget: int) -> EncodingReport:
    """For each source term P, compare P against its translation."""
    report = EncodingReport(kind)
    for p in terms:
        report.rows.append((p, bisim(p, enc.translate(p), kind, budget)))
    return report


def pullback_equiv(enc: Encoding, theta: dict[str, PiTerm],
                   target_oracle: Callable[[PiTerm, PiTerm], BisimVerdict],
                   ) -> Callable[[PiTerm, PiTerm], BisimVerdict]:
    """Equivalence on source terms induced by comparing closed translations.

    theta closes over stray process variables of the translations; the
    returned procedure inherits any inconclusiveness of the target oracle."""
    for x, q in theta.items():
        if process_vars(q):
            raise PiError(f"theta({x}) is not closed")

    def close(p: PiTerm) -> PiTerm:
        tp = enc.translate(p)
        stray = process_vars(tp)
        missing = stray - set(theta)
        if missing:
            raise PiError(f"translation left process variables {sorted(missing)} unclosed")
        for x in sorted(stray):
            tp = plug_var(tp, x, theta[x])
        return tp

    def decide(p: PiTerm, q: PiTerm) -> BisimVerdict:
        return target_oracle(close(p), close(q))

    return decide


def plug_var(t: PiTerm, var: str, p: PiTerm) -> PiTerm:
    """plug() for one named process variable among possibly several."""
    if process_vars(p):
        raise PiError(f"cannot plug an open process: free {sorted(process_vars(p))}")
    return _subst_pvar(t, var, p)


def finite_pullback_precondition(lang: FiniteLanguage) -> Verdict:
    """Closed-term language test: the pullback construction needs a language
    interpreted in its own closed terms, so every value must itself be a
    closed term of the language denoting that value."""
    for v in lang.values:
        try:
            t = parse_term(lang.signature, v)
        except TermError:
            return Verdict(False, (v,),
                           "precondition-violation: value is not a closed term")
        if free_vars(lang.signature, t):
            return Verdict(False, (v,),
                           "precondition-violation: value is not a closed term")
        got = denote(lang, t, {})
        if got != v:
            return Verdict(False, (v, got),
                           "precondition-violation: value does not denote itself")
    return Verdict(True, None, "closed-term language")


@dataclass
class FullAbstractionReport:
    rows: list[tuple[PiTerm, PiTerm, BisimVerdict, BisimVerdict, str]] = field(default_factory=list)

    @property
    def counterexamples(self) -> list[tuple[PiTerm, PiTerm]]:
        return [(p, q) for p, q, _, _, status in self.rows if status == "fail"]

    @property
    def ok(self) -> bool:
        return all(status == "pass" for _, _, _, _, status in self.rows)


def full_abstraction_check(translate: Callable[[PiTerm], PiTerm],
                           source_oracle: Callable[[PiTerm, PiTerm], BisimVerdict],
                           target_oracle: Callable[[PiTerm, PiTerm], BisimVerdict],
                           pairs: list[tuple[PiTerm, PiTerm]]) -> FullAbstractionReport:
    """Per pair, both directions of: p ~ q iff T(p) ~ T(q)."""
    report = FullAbstractionReport()
    for p, q in pairs:
        sv = source_oracle(p, q)
        tv = target_oracle(translate(p), translate(q))
        if "inconclusive" in (sv.result, tv.result):
            status = "inconclusive"
        elif (sv.result == "bisimilar") == (tv.result == "bisimilar"):
            status = "pass"
        else:
            status = "fail"
        report.rows.append((p, q, sv, tv, status))
    return report


def load_pairs(text: str) -> list[tuple[str, str]]:
    """Pair-list format: one pair per line, sides separated by ' ;; '."""
    pairs = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if " ;; " not in line:
            raise PiError(f"line {ln}: expected two terms separated by ' ;; '")
        left, _, right = line.partition(" ;; ")
        pairs.append((left.strip(), right.strip()))
    return pairs
