"""Finite interpreted languages and exhaustive checks for translation quality.

Languages here are binder-free: every construct is an operator with a total
table over a finite value domain.  Relations live on qualified value names
"lang.value" so the two domains of a translation stay disjoint even when the
bare value names coincide.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator

from .terms import (App, Construct, Signature, Term, Translation, Var,
                    complete_compositional, compose_translations,
                    enumerate_terms, free_vars, parse_term, print_term,
                    translation)


class InputError(Exception):
    """Ill-formed language, relation, or translation input."""


# ------------- languages -------------

@dataclass(frozen=True)
class Operator:
    name: str
    arity: int
    table: dict[tuple[str, ...], str] = field(hash=False)


@dataclass(frozen=True)
class FiniteLanguage:
    name: str
    values: tuple[str, ...]
    operators: tuple[Operator, ...]

    def __post_init__(self) -> None:
        vs = set(self.values)
        for op in self.operators:
            keys = set(op.table)
            want = set(product(self.values, repeat=op.arity))
            if keys != want:
                missing = sorted(want - keys)[:3]
                raise InputError(f"{self.name}.{op.name}: table not total, missing {missing}")
            for out in op.table.values():
                if out not in vs:
                    raise InputError(f"{self.name}.{op.name}: result {out} outside values")

    @property
    def signature(self) -> Signature:
        return Signature(self.name, tuple(
            Construct(op.name, op.arity, ((),) * op.arity) for op in self.operators))

    def qualify(self, v: str) -> str:
        return f"{self.name}.{v}"

    @property
    def qualified_values(self) -> tuple[str, ...]:
        return tuple(self.qualify(v) for v in self.values)


def load_language(data: dict) -> FiniteLanguage:
    ops = []
    for op in data["operators"]:
        table = {}
        for key, out in op["table"].items():
            args = tuple(key.split(",")) if key else ()
            if len(args) != op["arity"]:
                raise InputError(f"{op['name']}: key {key!r} does not match arity {op['arity']}")
            table[args] = out
        ops.append(Operator(op["name"], op["arity"], table))
    return FiniteLanguage(data["name"], tuple(data["values"]), tuple(ops))


def dump_language(lang: FiniteLanguage) -> dict:
    return {
        "name": lang.name,
        "values": list(lang.values),
        "operators": [
            {"name": op.name, "arity": op.arity,
             "table": {",".join(k): v for k, v in sorted(op.table.items())}}
            for op in lang.operators
        ],
    }


# ------------- evaluation -------------

Valuation = dict[str, str]


def denote(lang: FiniteLanguage, t: Term, rho: Valuation) -> str:
    match t:
        case Var(x):
            if x not in rho:
                raise InputError(f"valuation does not cover variable {x}")
            return rho[x]
        case App(op, _, args):
            table = next(o.table for o in lang.operators if o.name == op)
            return table[tuple(denote(lang, a, rho) for a in args)]
    raise InputError(f"not a term: {t!r}")


def denote_subst(lang: FiniteLanguage, sigma: dict[str, Term], rho: Valuation) -> Valuation:
    out = dict(rho)
    out.update({x: denote(lang, t, rho) for x, t in sigma.items()})
    return out


def valuations(variables: tuple[str, ...], values: tuple[str, ...]) -> Iterator[Valuation]:
    for combo in product(values, repeat=len(variables)):
        yield dict(zip(variables, combo))


# ------------- relations -------------

@dataclass(frozen=True)
class Relation:
    name: str
    kind: str  # "equivalence" | "preorder"
    carrier: tuple[str, ...]
    pairs: frozenset[tuple[str, str]]

    def related(self, a: str, b: str) -> bool:
        return (a, b) in self.pairs

    def classes(self) -> list[list[str]]:
        """Partition view; only meaningful for equivalences."""
        out: list[list[str]] = []
        placed: set[str] = set()
        for a in sorted(self.carrier):
            if a in placed:
                continue
            cls = sorted(b for b in self.carrier if self.related(a, b))
            placed.update(cls)
            out.append(cls)
        return out

    def restricted(self, subset: set[str]) -> "Relation":
        return Relation(self.name, self.kind, tuple(sorted(set(self.carrier) & subset)),
                        frozenset((a, b) for a, b in self.pairs if a in subset and b in subset))


def close_relation(generators: set[tuple[str, str]], kind: str,
                   carrier: tuple[str, ...], name: str = "rel") -> Relation:
    cs = set(carrier)
    for a, b in generators:
        if a not in cs or b not in cs:
            raise InputError(f"pair ({a}, {b}) mentions a value outside the carrier")
    if kind not in ("equivalence", "preorder"):
        raise InputError(f"unknown relation kind {kind!r}")
    pairs = {(a, a) for a in carrier} | set(generators)
    if kind == "equivalence":
        pairs |= {(b, a) for a, b in generators}
    changed = True
    while changed:  # small carriers, naive transitive closure is fine
        changed = False
        for a, b in list(pairs):
            for c, d in list(pairs):
                if b == c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
    return Relation(name, kind, tuple(sorted(carrier)), frozenset(pairs))


def load_relation(data: dict) -> Relation:
    missing = {"pairs", "kind", "carrier"} - set(data)
    if missing:
        raise InputError(f"relation file lacks keys: {sorted(missing)}")
    return close_relation({tuple(p) for p in data["pairs"]}, data["kind"],
                          tuple(data["carrier"]), data.get("name", "rel"))


def dump_relation(rel: Relation) -> dict:
    return {"name": rel.name, "kind": rel.kind, "carrier": sorted(rel.carrier),
            "pairs": sorted([a, b] for a, b in rel.pairs)}


@dataclass(frozen=True)
class SemanticTranslation:
    """Relation between target and source values, total on the source."""
    name: str
    pairs: tuple[tuple[str, str], ...]  # (target value, source value), qualified

    def targets_of(self, v: str) -> list[str]:
        return sorted(w for w, u in self.pairs if u == v)

    def image(self) -> list[str]:
        return sorted({w for w, _ in self.pairs})


def load_semantic_translation(data: dict) -> SemanticTranslation:
    return SemanticTranslation(data.get("name", "R"),
                               tuple(sorted((a, b) for a, b in data["pairs"])))


def dump_semantic_translation(r: SemanticTranslation) -> dict:
    return {"name": r.name, "pairs": sorted([a, b] for a, b in r.pairs)}


def check_total(r: SemanticTranslation, source: FiniteLanguage) -> None:
    for v in source.values:
        if not any(u == source.qualify(v) for _, u in r.pairs):
            raise InputError(f"semantic translation misses source value {v}")


def load_translation(data: dict, source: FiniteLanguage | Signature,
                     target: FiniteLanguage | Signature) -> Translation:
    src = source.signature if isinstance(source, FiniteLanguage) else source
    tgt = target.signature if isinstance(target, FiniteLanguage) else target
    if data["source"] != src.name or data["target"] != tgt.name:
        raise InputError(f"translation is {data['source']} -> {data['target']}, "
                         f"got languages {src.name} -> {tgt.name}")
    heads = {op: parse_term(tgt, img) for op, img in data["heads"].items()}
    return translation(src, tgt, heads)


def dump_translation(tr: Translation) -> dict:
    return {"source": tr.source.name, "target": tr.target.name,
            "heads": {op: print_term(img) for op, img in tr.heads}}


# ------------- congruence checks -------------

@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: tuple | None = None
    note: str = ""


def is_congruence(lang: FiniteLanguage, rel: Relation) -> Verdict:
    """Equivalence preserved by every operator, all argument positions at once."""
    _need_carrier(rel, lang)
    for op in lang.operators:
        for us in product(lang.values, repeat=op.arity):
            for vs in product(lang.values, repeat=op.arity):
                if all(rel.related(lang.qualify(u), lang.qualify(v)) for u, v in zip(us, vs)):
                    ru, rv = op.table[us], op.table[vs]
                    if not rel.related(lang.qualify(ru), lang.qualify(rv)):
                        return Verdict(False, (op.name, us, vs, ru, rv))
    return Verdict(True)


def is_one_hole_congruence(lang: FiniteLanguage, rel: Relation) -> Verdict:
    """As is_congruence but varying one argument position at a time."""
    _need_carrier(rel, lang)
    for op in lang.operators:
        for ctx in product(lang.values, repeat=op.arity):
            for i in range(op.arity):
                for v in lang.values:
                    u = ctx[i]
                    if not rel.related(lang.qualify(u), lang.qualify(v)):
                        continue
                    other = ctx[:i] + (v,) + ctx[i + 1:]
                    ru, rv = op.table[ctx], op.table[other]
                    if not rel.related(lang.qualify(ru), lang.qualify(rv)):
                        return Verdict(False, (op.name, ctx, other, ru, rv))
    return Verdict(True)


def _need_carrier(rel: Relation, lang: FiniteLanguage) -> None:
    missing = set(lang.qualified_values) - set(rel.carrier)
    if missing:
        raise InputError(f"relation carrier misses {sorted(missing)}")


def congruence_closure_1hole(lang: FiniteLanguage, rel: Relation) -> Relation:
    """Largest one-hole congruence for lang contained in the equivalence rel.

    Greatest fixpoint by partition refinement: values start in their rel
    classes and are split whenever some operator with one varied argument
    tells them apart.
    """
    if rel.kind != "equivalence":
        raise InputError("congruence closure needs an equivalence")
    _need_carrier(rel, lang)
    block: dict[str, int] = {}
    for i, cls in enumerate(rel.restricted(set(lang.qualified_values)).classes()):
        for q in cls:
            block[q] = i

    def probe(v: str) -> tuple:
        sig = []
        for op in lang.operators:
            for ctx in product(lang.values, repeat=op.arity):
                for i in range(op.arity):
                    plugged = ctx[:i] + (v,) + ctx[i + 1:]
                    sig.append(block[lang.qualify(op.table[plugged])])
        return tuple(sig)

    while True:
        groups: dict[tuple, int] = {}
        nxt: dict[str, int] = {}
        for v in lang.values:
            key = (block[lang.qualify(v)], probe(v))
            if key not in groups:
                groups[key] = len(groups)
            nxt[lang.qualify(v)] = groups[key]
        if len(set(nxt.values())) == len(set(block.values())):
            break
        block = nxt
    pairs = frozenset((a, b) for a in lang.qualified_values for b in lang.qualified_values
                      if block[a] == block[b])
    return Relation(f"{rel.name}^1c", "equivalence", lang.qualified_values, pairs)


def smallest_equiv_containing(r: SemanticTranslation, carrier: tuple[str, ...]) -> Relation:
    parent: dict[str, str] = {c: c for c in carrier}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in r.pairs:
        if a not in parent or b not in parent:
            raise InputError(f"pair ({a}, {b}) mentions a value outside the carrier")
        parent[find(a)] = find(b)
    pairs = frozenset((a, b) for a in carrier for b in carrier if find(a) == find(b))
    return Relation(f"eq_{r.name}", "equivalence", tuple(sorted(carrier)), pairs)


def lr_closure(lang: FiniteLanguage, rel: Relation, r: SemanticTranslation) -> Relation:
    """Combined closure on the whole carrier: w1 related to w2 iff
    w1 eq_R v1, v1 cc v2, v2 eq_R w2 for some source values v1, v2."""
    for a, b in r.pairs:
        if not rel.related(a, b):
            raise InputError(f"semantic translation pair ({a}, {b}) is not inside the relation")
    eq = smallest_equiv_containing(r, rel.carrier)
    cc = congruence_closure_1hole(lang, rel)
    v_set = lang.qualified_values
    pairs = set()
    for w1 in rel.carrier:
        for w2 in rel.carrier:
            if any(eq.related(w1, v1) and cc.related(v1, v2) and eq.related(v2, w2)
                   for v1 in v_set for v2 in v_set):
                pairs.add((w1, w2))
    pairs |= {(w, w) for w in rel.carrier}  # values unreachable from V stay singletons
    out = Relation(f"{rel.name}^1c_{r.name}", "equivalence", rel.carrier, frozenset(pairs))
    for a, b in out.pairs:  # composite can fail to be transitive on bad inputs
        for c, d in out.pairs:
            if b == c and not out.related(a, d):
                raise InputError("combined closure is not transitive; "
                                 "the translation is not correct w.r.t. this semantic translation")
    return out


# ------------- translation quality -------------

def _heads(tr: Translation) -> list[tuple[str, Term, Term]]:
    """(construct, generic head f(X1..Xn), its image) per source construct."""
    out = []
    for c in tr.source.constructs:
        head = App(c.name, (), tuple(Var(f"X{i + 1}") for i in range(c.args)))
        out.append((c.name, head, tr.head(c.name)))
    return out


def check_correct_wrt(tr: Translation, lang: FiniteLanguage, lang2: FiniteLanguage,
                      r: SemanticTranslation) -> Verdict:
    """Correctness w.r.t. a given semantic translation, decided on heads.

    For a head map it suffices to check each source construct's head H: for
    every pair of valuations eta (target side) and rho (source side) over the
    joint variables with eta(X) R rho(X) pointwise, the meaning of the image
    under eta must be R-related to the meaning of H under rho.
    """
    check_total(r, lang)
    rp = set(r.pairs)
    for name, head, image in _heads(tr):
        joint = tuple(sorted(free_vars(lang.signature, head)
                             | free_vars(lang2.signature, image)))
        for rho in valuations(joint, lang.values):
            cands = [[w for w, u in rp if u == lang.qualify(rho[x])] for x in joint]
            for combo in product(*cands):
                eta = dict(zip(joint, [w.split(".", 1)[1] for w in combo]))
                lhs = denote(lang2, image, eta)
                rhs = denote(lang, head, rho)
                if (lang2.qualify(lhs), lang.qualify(rhs)) not in rp:
                    return Verdict(False, (name, eta, rho, lhs, rhs))
    return Verdict(True)


def check_valid_upto(tr: Translation, lang: FiniteLanguage, lang2: FiniteLanguage,
                     rel: Relation, cap: int = 2 ** 20) -> Verdict:
    """Search for a semantic translation inside the relation witnessing correctness.

    Candidates are subsets of rel over target x source values, enumerated by
    increasing size; the first (hence lexicographically least) total witness
    is returned.  Verdict note "inconclusive" when the cap is hit first.
    """
    if not lang.values:
        return Verdict(True, SemanticTranslation("R", ()), "vacuous: no source values")
    pool = sorted((w, v) for w in lang2.values for v in lang.values
                  if rel.related(lang2.qualify(w), lang.qualify(v)))
    considered = 0
    for size in range(1, len(pool) + 1):
        for subset in combinations(pool, size):
            considered += 1
            if considered > cap:
                return Verdict(False, None, f"inconclusive: candidate cap {cap} exceeded")
            if {v for _, v in subset} != set(lang.values):
                continue
            r = SemanticTranslation("R", tuple(
                (lang2.qualify(w), lang.qualify(v)) for w, v in subset))
            if check_correct_wrt(tr, lang, lang2, r).holds:
                return Verdict(True, r)
    return Verdict(False, None, f"exhausted {considered} candidates")


def upward_closed_targets(lang: FiniteLanguage, lang2: FiniteLanguage,
                          rel: Relation) -> list[str]:
    """U: target values related to at least one source value."""
    return [w for w in lang2.values
            if any(rel.related(lang2.qualify(w), lang.qualify(v)) for v in lang.values)]


def check_correct_upto(tr: Translation, lang: FiniteLanguage, lang2: FiniteLanguage,
                       rel: Relation) -> Verdict:
    """Correctness up to the relation: every source value has a related target
    value, and the translation is correct w.r.t. the full restriction of the
    relation to target x source."""
    for v in lang.values:
        if not any(rel.related(lang2.qualify(w), lang.qualify(v)) for w in lang2.values):
            return Verdict(False, ("unrelated-source-value", v))
    r = SemanticTranslation("R", tuple(sorted(
        (lang2.qualify(w), lang.qualify(v)) for w in lang2.values for v in lang.values
        if rel.related(lang2.qualify(w), lang.qualify(v)))))
    return check_correct_wrt(tr, lang, lang2, r)


def _extra_vars(tr: Translation) -> tuple[str, ...]:
    out: set[str] = set()
    for name, _, image in _heads(tr):
        holes = {f"X{i + 1}" for i in range(tr.source[name].args)}
        out |= free_vars(tr.target, image) - holes
    return tuple(sorted(out))


def _preserve_reps(tr: Translation, lang: FiniteLanguage, lang2: FiniteLanguage,
                   depth: int, cap: int = 20000):
    """Distinct (source table, image table) behaviours of terms up to depth.

    A term's two tables are its meaning and its translation's meaning as
    functions of a valuation row.  Enough distinct variables are used that any
    failing term can be renamed into this pool (variables sharing a value
    under the failing valuation may be merged, so |V| variables suffice);
    names already used free by the images are skipped to keep their rows
    independent.  Building behaviours bottom-up with deduplication makes the
    scan complete for all terms whenever it reaches a fixed point.
    """
    extras = _extra_vars(tr)
    pool = [v for v in ("X", "Y", "Z", "W") if v not in extras]
    pool += [f"x{i}" for i in range(4, 4 + len(lang.values)) if f"x{i}" not in extras]
    variables = tuple(pool[:len(lang.values)]) + extras
    rows_src = [tuple(r[v] for v in variables)
                for r in valuations(variables, lang.values)]
    rows_img = [tuple(r[v] for v in variables)
                for r in valuations(variables, lang2.values)]
    img_index = {row: i for i, row in enumerate(rows_img)}
    ext_rows = [row[len(variables) - len(extras):] if extras else ()
                for row in rows_img]

    image_ops = {}
    for name, _, image in _heads(tr):
        n = tr.source[name].args
        tbl = {}
        for args in product(lang2.values, repeat=n):
            for ext in product(lang2.values, repeat=len(extras)):
                rho = {f"X{i + 1}": args[i] for i in range(n)}
                rho.update(zip(extras, ext))
                tbl[args + ext] = denote(lang2, image, rho)
        image_ops[name] = tbl

    def combine(op: Operator, combo: tuple) -> tuple:
        src = tuple(op.table[tuple(c[0][i] for c in combo)]
                    for i in range(len(rows_src)))
        img_tbl = image_ops[op.name]
        img = tuple(img_tbl[tuple(c[1][i] for c in combo) + ext_rows[i]]
                    for i in range(len(rows_img)))
        return src, img

    reps: dict[tuple, Term] = {}
    for k, v in enumerate(variables):
        src = tuple(row[k] for row in rows_src)
        img = tuple(row[k] for row in rows_img)
        reps.setdefault((src, img), Var(v))
    for op in lang.operators:
        if op.arity == 0:
            reps.setdefault(combine(op, ()), App(op.name, (), ()))
    current = list(reps)
    composite = [op for op in lang.operators if op.arity > 0]
    for _ in range(depth - 1):  # leaves and constants have height 1
        fresh: list[tuple] = []
        for op in composite:
            for combo in product(current, repeat=op.arity):
                key = combine(op, combo)
                if key not in reps:
                    if len(reps) >= cap:
                        return reps, variables, rows_src, img_index, False
                    reps[key] = App(op.name, (), tuple(reps[c] for c in combo))
                    fresh.append(key)
        if not fresh:
            return reps, variables, rows_src, img_index, True
        current += fresh
    exhausted = all(combine(op, combo) in reps
                    for op in composite for combo in product(current, repeat=op.arity))
    return reps, variables, rows_src, img_index, exhausted


def check_preserves(tr: Translation, lang: FiniteLanguage, lang2: FiniteLanguage,
                    rel: Relation, depth: int) -> Verdict:
    """Search for a value map bT with bT(v) related to v under which translated
    terms keep their meaning up to the relation.

    Verdict note "preserves" when the claim is unbounded (the behaviour scan
    reached a fixed point, or the homomorphism certificate over heads holds);
    otherwise "holds-to-depth".
    """
    if not lang.values:
        return Verdict(True, {}, "preserves")
    if not lang2.values:
        return Verdict(False)
    reps, variables, rows_src, img_index, exhausted = _preserve_reps(tr, lang, lang2, depth)
    cands = [[w for w in lang2.values if rel.related(lang2.qualify(w), lang.qualify(v))]
             for v in lang.values]
    items = list(reps)
    for combo in product(*cands):
        bt = dict(zip(lang.values, combo))
        ok = True
        for src, img in items:
            for i, row in enumerate(rows_src):
                theta = tuple(bt[v] for v in row)
                if not rel.related(lang2.qualify(img[img_index[theta]]),
                                   lang.qualify(src[i])):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            certified = exhausted or _homomorphism_certificate(tr, lang, lang2, bt)
            return Verdict(True, bt, "preserves" if certified else f"holds-to-depth {depth}")
    return Verdict(False)


def _homomorphism_certificate(tr: Translation, lang: FiniteLanguage,
                              lang2: FiniteLanguage, bt: dict[str, str]) -> bool:
    """Image meanings commute with bT on every head; implies preservation for
    all terms by induction."""
    for _, head, image in _heads(tr):
        joint = tuple(sorted(free_vars(lang.signature, head)
                             | free_vars(lang2.signature, image)))
        for rho in valuations(joint, lang.values):
            eta = {x: bt[v] for x, v in rho.items()}
            if denote(lang2, image, eta) != bt[denote(lang, head, rho)]:
                return False
    return True


def closed_terms(lang: FiniteLanguage, depth: int) -> Iterator[Term]:
    yield from enumerate_terms(lang.signature, depth, leaf_vars=())


def check_respects(tr: Translation, lang: FiniteLanguage, lang2: FiniteLanguage,
                   rel: Relation, depth: int) -> Verdict:
    """Every closed source term keeps its meaning under every valuation of the
    image's variables into U (target values related to some source value)."""
    if not lang.values:
        return Verdict(True, None, "vacuous: no source values")
    for v in lang.values:
        if not any(rel.related(lang2.qualify(w), lang.qualify(v)) for w in lang2.values):
            return Verdict(False, ("unrelated-source-value", v))
    u_set = tuple(upward_closed_targets(lang, lang2, rel))
    translate = complete_compositional(tr)
    for p in closed_terms(lang, depth):
        tp = translate(p)
        rhs = denote(lang, p, {})
        for eta in valuations(tuple(sorted(free_vars(lang2.signature, tp))), u_set):
            lhs = denote(lang2, tp, eta)
            if not rel.related(lang2.qualify(lhs), lang.qualify(rhs)):
                return Verdict(False, (p, eta, lhs, rhs))
    return Verdict(True, None, f"holds-to-depth {depth}")


def is_congruence_for_image(tr: Translation, lang: FiniteLanguage, lang2: FiniteLanguage,
                            rel: Relation, w_set: tuple[str, ...]) -> Verdict:
    """Relation preserved by every translated head over valuations into w_set."""
    for name, _, image in _heads(tr):
        xs = tuple(sorted(free_vars(lang2.signature, image)))
        for theta in valuations(xs, w_set):
            for eta in valuations(xs, w_set):
                if all(rel.related(lang2.qualify(theta[x]), lang2.qualify(eta[x])) for x in xs):
                    lhs, rhs = denote(lang2, image, theta), denote(lang2, image, eta)
                    if not rel.related(lang2.qualify(lhs), lang2.qualify(rhs)):
                        return Verdict(False, (name, theta, eta, lhs, rhs))
    return Verdict(True)


def image_congruence_closure_1hole(tr: Translation, lang: FiniteLanguage,
                                   lang2: FiniteLanguage, rel: Relation,
                                   w_set: tuple[str, ...]) -> Relation:
    """Largest 1-hole congruence for the translated language on w_set inside rel."""
    qw = [lang2.qualify(w) for w in w_set]
    block: dict[str, int] = {}
    classes = rel.restricted(set(qw)).classes()
    for i, cls in enumerate(classes):
        for q in cls:
            block[q] = i
    images = [image for _, _, image in _heads(tr)]

    def probe(w: str) -> tuple:
        sig = []
        for image in images:
            xs = tuple(sorted(free_vars(lang2.signature, image)))
            for i, x in enumerate(xs):
                others = xs[:i] + xs[i + 1:]
                for ctx in valuations(others, tuple(w_set)):
                    rho = dict(ctx)
                    rho[x] = w
                    out = lang2.qualify(denote(lang2, image, rho))
                    if out not in block:
                        raise InputError("image language is not closed on the given value set")
                    sig.append(block[out])
        return tuple(sig)

    while True:
        groups: dict[tuple, int] = {}
        nxt: dict[str, int] = {}
        for w in w_set:
            key = (block[lang2.qualify(w)], probe(w))
            if key not in groups:
                groups[key] = len(groups)
            nxt[lang2.qualify(w)] = groups[key]
        if len(set(nxt.values())) == len(set(block.values())):
            break
        block = nxt
    pairs = frozenset((a, b) for a in qw for b in qw if block[a] == block[b])
    return Relation(f"{rel.name}^1c_image", "equivalence", tuple(sorted(qw)), pairs)


def compose_semantic(r2: SemanticTranslation, r1: SemanticTranslation) -> SemanticTranslation:
    """Relational composition: (w3, v1) when w3 R2 v2 and v2 R1 v1 for some v2."""
    pairs = {(w3, v1) for w3, v2 in r2.pairs for u2, v1 in r1.pairs if v2 == u2}
    return SemanticTranslation(f"{r2.name}.{r1.name}", tuple(sorted(pairs)))


# ------------- randomized law checks -------------

@dataclass
class PropertyReport:
    seed: int
    trials: int
    checks: dict[str, int]
    violations: list[tuple]

    @property
    def ok(self) -> bool:
        return not self.violations


def _random_language(rnd: random.Random, name: str) -> FiniteLanguage:
    values = tuple(f"v{i}" for i in range(rnd.randint(1, 3)))
    ops = []
    for j in range(rnd.randint(1, 3)):
        arity = rnd.randint(0, 2)
        table = {args: rnd.choice(values) for args in product(values, repeat=arity)}
        ops.append(Operator(f"f{j}", arity, table))
    return FiniteLanguage(name, values, tuple(ops))


def _random_equivalence(rnd: random.Random, carrier: tuple[str, ...]) -> Relation:
    label = {c: rnd.randrange(3) for c in carrier}
    pairs = frozenset((a, b) for a in carrier for b in carrier if label[a] == label[b])
    return Relation("sim", "equivalence", tuple(sorted(carrier)), pairs)


def _random_image(rnd: random.Random, target: Signature, arity: int) -> Term:
    leaves = [Var(f"X{i + 1}") for i in range(arity)]
    leaves += [App(c.name, (), ()) for c in target.constructs if c.args == 0]

    def go(budget: int) -> Term | None:
        composite = [c for c in target.constructs if c.args > 0]
        if budget == 0 or not composite or (leaves and rnd.random() < 0.45):
            return rnd.choice(leaves) if leaves else None
        c = rnd.choice(composite)
        args = []
        for _ in range(c.args):
            a = go(budget - 1)
            if a is None:
                return None
            args.append(a)
        return App(c.name, (), tuple(args))

    return go(2)


def _random_translation(rnd: random.Random, src: FiniteLanguage,
                        tgt: FiniteLanguage) -> Translation | None:
    heads = {}
    for c in src.signature.constructs:
        img = _random_image(rnd, tgt.signature, c.args)
        if img is None:  # no closed target term to map a constant to
            return None
        heads[c.name] = img
    return translation(src.signature, tgt.signature, heads)


def property_suite(seed: int, trials: int) -> PropertyReport:
    """Brute-force the library's theorems on random small instances.

    Laws: (a) correct iff valid and the relation is a congruence for the
    image on U; (b) valid translations compose, witnessed by the composite
    semantic translation; (c) the three clauses of the combined-closure
    theorem; (d) valid implies preserves, to depth 3; (e) a certified
    preserving fvr head map is valid.  Any violation is an implementation
    bug, not an input problem.
    """
    rnd = random.Random(seed)
    checks: dict[str, int] = {k: 0 for k in
                              ("valid-correct", "composition", "closure-clauses",
                               "preservation", "preservation-is-valid")}
    violations: list[tuple] = []

    def note(law: str, payload) -> None:
        violations.append((law, payload))

    for trial in range(trials):
        l1 = _random_language(rnd, "L1")
        l2 = _random_language(rnd, "L2")
        l3 = _random_language(rnd, "L3")
        carrier = l1.qualified_values + l2.qualified_values + l3.qualified_values
        rel = _random_equivalence(rnd, carrier)
        t1 = _random_translation(rnd, l1, l2)
        t2 = _random_translation(rnd, l2, l3)
        if t1 is None or t2 is None:
            continue

        rel12 = rel.restricted(set(l1.qualified_values) | set(l2.qualified_values))
        v1 = check_valid_upto(t1, l1, l2, rel12)

        # (a) Thm: correct up to ~  <=>  valid up to ~ and congruence on U
        checks["valid-correct"] += 1
        correct = check_correct_upto(t1, l1, l2, rel12).holds
        u_set = tuple(upward_closed_targets(l1, l2, rel12))
        cong = is_congruence_for_image(t1, l1, l2, rel12, u_set).holds
        if correct != (v1.holds and cong):
            note("valid-correct", (trial, correct, v1.holds, cong))

        # (b) Thm: composition of valid translations, witness R2 . R1
        v2 = check_valid_upto(t2, l2, l3, rel.restricted(
            set(l2.qualified_values) | set(l3.qualified_values)))
        if v1.holds and v2.holds:
            checks["composition"] += 1
            tc = compose_translations(t1, t2)
            rc = compose_semantic(v2.witness, v1.witness)
            if not check_correct_wrt(tc, l1, l3, rc).holds:
                note("composition", (trial,))

        # (c) Thm: combined closure, clauses (1)-(3)
        if v1.holds:
            checks["closure-clauses"] += 1
            try:
                lr = lr_closure(l1, rel12, v1.witness)
                cc = congruence_closure_1hole(l1, rel12)
                if lr.restricted(set(l1.qualified_values)).pairs != cc.pairs:
                    note("closure-clauses", (trial, 1))
                w_set = tuple(w for w in l2.values
                              if any(lr.related(l2.qualify(w), l1.qualify(v))
                                     for v in l1.values))
                closed = all(
                    denote(l2, image, rho) in w_set
                    for _, _, image in _heads(t1)
                    for rho in valuations(
                        tuple(sorted(free_vars(l2.signature, image))), w_set))
                if not closed:
                    note("closure-clauses", (trial, 2))
                else:
                    icc = image_congruence_closure_1hole(t1, l1, l2, rel12, w_set)
                    qw = {l2.qualify(w) for w in w_set}
                    if lr.restricted(qw).pairs != icc.pairs:
                        note("closure-clauses", (trial, 3))
            except InputError as err:
                note("closure-clauses", (trial, str(err)))

        pres = check_preserves(t1, l1, l2, rel12, depth=3)

        # (d) Prop: valid implies preserves (depth 3)
        if v1.holds:
            checks["preservation"] += 1
            if not pres.holds:
                note("preservation", (trial,))

        # (e) Thm: preserving fvr head maps are valid
        if pres.holds and pres.note == "preserves":
            checks["preservation-is-valid"] += 1
            if not v1.holds:
                note("preservation-is-valid", (trial, pres.witness))

    return PropertyReport(seed, trials, checks, violations)
