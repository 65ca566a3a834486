"""Attribute-domain lattices: values, similarity, merge, order.

An attribute domain bundles a value kind, a similarity relation and a binary
merge function.  The merge function is idempotent, commutative and
associative, so it turns the domain into a join semilattice whose induced
order is

    v1 ⪯ v2   iff   merge(v1, v2) == v2,

read as "v2 carries at least the information of v1".  Three kinds are built
in, each with a closed-form merge, order and greatest lower bound:

==========  =========================  ====================  =================
kind        values                     merge                 glb
==========  =========================  ====================  =================
atoms       non-empty sets of tokens   union                 intersection
interval    rational intervals         convex hull           intersection
flat        opaque labels plus ⊤       ⊤ unless equal        ⊥ unless related
==========  =========================  ====================  =================

Every kind shares a least element ⊥ that is neutral for merging.  The flat
kind's ⊤ records a conflict between two irreconcilable labels; the classic
boolean 0/1/⊤ domain is the two-label instance.

Similarity is a reflexive, symmetric relation containing equality.  Four
modes are supported:

* ``equality``       – values are similar only to themselves.
* ``explicit_pairs`` – equality plus an explicit list of value pairs.
* ``lifted_pairs``   – for atom sets: an atom-level pair list lifted
  existentially (some atom of one side is similar to some atom of the
  other).  This mode is similarity preserving: merging can never break an
  existing similarity.
* ``interval_gap``   – intervals whose gap is at most epsilon.  Also
  similarity preserving, since hulls only shrink gaps.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import ContractError, DomainError

KIND_ATOMS = "atoms"
KIND_INTERVAL = "interval"
KIND_FLAT = "flat"
KIND_BOTTOM = "bottom"

VALUE_KINDS = (KIND_ATOMS, KIND_INTERVAL, KIND_FLAT)

#: Reserved flat label marking an irreconcilable merge.
TOP_LABEL = "⊤"  # ⊤

_TOKEN_SPLIT = re.compile(r"[,\s]+")


@dataclass(frozen=True, slots=True)
class Value:
    """One lattice element, tagged with its kind.

    ``payload`` is canonical: sorted atom tuple for ``atoms``, ``(lo, hi)``
    Fractions for ``interval``, a single label for ``flat``, empty for ⊥.
    """

    kind: str
    payload: tuple = ()

    # -- constructors ------------------------------------------------------

    @staticmethod
    def bottom() -> "Value":
        return _BOTTOM

    @staticmethod
    def atom_set(atoms: Iterable[str]) -> "Value":
        canon = tuple(sorted({a.casefold() for a in atoms}))
        if not canon:
            return _BOTTOM
        return Value(KIND_ATOMS, canon)

    @staticmethod
    def tokens(text: str) -> "Value":
        """Atom-set value from free text, split on commas and whitespace."""
        return Value.atom_set(t for t in _TOKEN_SPLIT.split(text) if t)

    @staticmethod
    def interval(lo, hi=None) -> "Value":
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        return Value(KIND_INTERVAL, (lo, hi))

    @staticmethod
    def flat(label: str) -> "Value":
        return Value(KIND_FLAT, (label,))

    @staticmethod
    def flat_top() -> "Value":
        return Value(KIND_FLAT, (TOP_LABEL,))

    # -- predicates and accessors ------------------------------------------

    @property
    def is_bottom(self) -> bool:
        return self.kind == KIND_BOTTOM

    @property
    def is_top(self) -> bool:
        return self.kind == KIND_FLAT and self.payload[0] == TOP_LABEL

    @property
    def atoms(self) -> tuple[str, ...]:
        if self.kind != KIND_ATOMS:
            raise DomainError(f"not an atom set: {self}")
        return self.payload

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        if self.kind != KIND_INTERVAL:
            raise DomainError(f"not an interval: {self}")
        return self.payload

    @property
    def label(self) -> str:
        if self.kind != KIND_FLAT:
            raise DomainError(f"not a flat label: {self}")
        return self.payload[0]

    def sort_key(self) -> tuple:
        return (self.kind, tuple(str(p) for p in self.payload))

    def __str__(self) -> str:
        if self.is_bottom:
            return "⊥"  # ⊥
        if self.kind == KIND_ATOMS:
            if len(self.payload) == 1:
                return self.payload[0]
            return "⟨" + ", ".join(self.payload) + "⟩"  # ⟨a, b⟩
        if self.kind == KIND_INTERVAL:
            lo, hi = self.payload
            return f"[{lo}, {hi}]"
        return self.payload[0]


_BOTTOM = Value(KIND_BOTTOM, ())


@dataclass(frozen=True)
class SimilaritySpec:
    """Similarity relation configuration for one domain.

    ``pairs`` holds value-level pairs (both orientations) for
    ``explicit_pairs``; ``atom_pairs`` holds atom-level pairs (both
    orientations) for ``lifted_pairs``.  Reflexivity is implicit: equal
    values are always similar.
    """

    mode: str = "equality"
    pairs: frozenset[tuple[Value, Value]] = frozenset()
    atom_pairs: frozenset[tuple[str, str]] = frozenset()
    epsilon: Fraction = Fraction(0)

    @staticmethod
    def equality() -> "SimilaritySpec":
        return SimilaritySpec("equality")

    @staticmethod
    def explicit(pairs: Iterable[tuple[Value, Value]]) -> "SimilaritySpec":
        sym = set()
        for a, b in pairs:
            sym.add((a, b))
            sym.add((b, a))
        return SimilaritySpec("explicit_pairs", pairs=frozenset(sym))

    @staticmethod
    def lifted(atom_pairs: Iterable[tuple[str, str]]) -> "SimilaritySpec":
        sym = set()
        for a, b in atom_pairs:
            a, b = a.casefold(), b.casefold()
            sym.add((a, b))
            sym.add((b, a))
        return SimilaritySpec("lifted_pairs", atom_pairs=frozenset(sym))

    @staticmethod
    def gap(epsilon) -> "SimilaritySpec":
        eps = Fraction(epsilon)
        if eps < 0:
            raise DomainError("gap epsilon must be non-negative")
        return SimilaritySpec("interval_gap", epsilon=eps)

    @property
    def is_preserving(self) -> bool:
        """Whether merging provably preserves similarity in this mode."""
        return self.mode in ("lifted_pairs", "interval_gap")


SIMILARITY_MODES = ("equality", "explicit_pairs", "lifted_pairs", "interval_gap")


@dataclass(frozen=True)
class LatticeDomain:
    """A named attribute domain: value kind plus similarity relation."""

    name: str
    kind: str
    similarity: SimilaritySpec = field(default_factory=SimilaritySpec.equality)

    def __post_init__(self):
        if self.kind not in VALUE_KINDS:
            raise DomainError(f"unknown value kind {self.kind!r}")
        mode = self.similarity.mode
        if mode == "lifted_pairs" and self.kind != KIND_ATOMS:
            raise DomainError("lifted_pairs similarity needs an atoms domain")
        if mode == "interval_gap" and self.kind != KIND_INTERVAL:
            raise DomainError("interval_gap similarity needs an interval domain")

    # -- kind checks --------------------------------------------------------

    def check_value(self, v: Value) -> None:
        if not v.is_bottom and v.kind != self.kind:
            raise DomainError(
                f"value {v} has kind {v.kind!r}, domain {self.name!r} expects {self.kind!r}"
            )

    # -- merge, order, glb ---------------------------------------------------

    def match(self, v1: Value, v2: Value) -> Value:
        """Merge two values into their least upper bound."""
        self.check_value(v1)
        self.check_value(v2)
        if v1.is_bottom:
            return v2
        if v2.is_bottom:
            return v1
        if v1 == v2:
            return v1
        if self.kind == KIND_ATOMS:
            return Value.atom_set(v1.payload + v2.payload)
        if self.kind == KIND_INTERVAL:
            (lo1, hi1), (lo2, hi2) = v1.payload, v2.payload
            return Value.interval(min(lo1, lo2), max(hi1, hi2))
        return Value.flat_top()  # distinct flat labels conflict

    def leq(self, v1: Value, v2: Value) -> bool:
        """Induced order: v1 ⪯ v2 iff merging adds nothing to v2."""
        return self.match(v1, v2) == v2

    def glb(self, v1: Value, v2: Value) -> Value:
        """Greatest lower bound; ⊥ when the values share no information."""
        self.check_value(v1)
        self.check_value(v2)
        if v1.is_bottom or v2.is_bottom:
            return _BOTTOM
        if v1 == v2:
            return v1
        if self.kind == KIND_ATOMS:
            return Value.atom_set(set(v1.payload) & set(v2.payload))
        if self.kind == KIND_INTERVAL:
            (lo1, hi1), (lo2, hi2) = v1.payload, v2.payload
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            return Value.interval(lo, hi) if lo <= hi else _BOTTOM
        if v1.is_top:
            return v2
        if v2.is_top:
            return v1
        return _BOTTOM

    # -- similarity ----------------------------------------------------------

    def similar(self, v1: Value, v2: Value) -> bool:
        """Declared similarity.  Symmetric, contains equality; ⊥ only
        resembles ⊥."""
        self.check_value(v1)
        self.check_value(v2)
        if v1.is_bottom or v2.is_bottom:
            return v1 == v2
        if v1 == v2:
            return True
        mode = self.similarity.mode
        if mode == "equality":
            return False
        if mode == "explicit_pairs":
            return (v1, v2) in self.similarity.pairs
        if mode == "lifted_pairs":
            pairs = self.similarity.atom_pairs
            s2 = set(v2.payload)
            for a1 in v1.payload:
                if a1 in s2:
                    return True
                for a2 in v2.payload:
                    if (a1, a2) in pairs:
                        return True
            return False
        # interval_gap
        (lo1, hi1), (lo2, hi2) = v1.payload, v2.payload
        gap = max(lo1 - hi2, lo2 - hi1, Fraction(0))
        return gap <= self.similarity.epsilon

    def star_similar(self, v1: Value, v2: Value, closure: Iterable[Value] | None = None) -> bool:
        """Extended similarity ≈*: some dominated pieces of the two values
        were similar.

        Holds iff similar(v1, v2), or there are non-⊥ witnesses w1 ⪯ v1 and
        w2 ⪯ v2 with similar(w1, w2).  Unlike the declared relation, ≈* can
        never be broken by merging: the witnesses survive any ⪯-growth of
        either side.

        With ``closure`` given, witnesses are drawn from that merge-closed
        set (a :func:`active_closure` of the instance's values).  Without
        it, an equivalent closed-form search per similarity mode is used.
        """
        self.check_value(v1)
        self.check_value(v2)
        if self.similar(v1, v2):
            return True
        if v1.is_bottom or v2.is_bottom:
            return False
        if closure is not None:
            elems = list(closure)
            self._check_closed(elems)
            below1 = [w for w in elems if not w.is_bottom and self.leq(w, v1)]
            below2 = [w for w in elems if not w.is_bottom and self.leq(w, v2)]
            return any(self.similar(w1, w2) for w1 in below1 for w2 in below2)
        # Equal witnesses: any common non-⊥ lower bound could have been the
        # shared original of both values.
        if not self.glb(v1, v2).is_bottom:
            return True
        if self.similarity.mode == "explicit_pairs":
            return any(
                self.leq(p, v1) and self.leq(q, v2) for p, q in self.similarity.pairs
            )
        # lifted_pairs and interval_gap are similarity preserving: any
        # remaining witness pair lifts to the values themselves.
        return False

    def _check_closed(self, elems: list[Value]) -> None:
        present = set(elems)
        for w1, w2 in itertools.combinations_with_replacement(elems, 2):
            if self.match(w1, w2) not in present:
                raise ContractError(
                    f"witness set is not merge-closed: {w1} ⋎ {w2} missing"
                )


def active_closure(dom: LatticeDomain, seed: Iterable[Value]) -> frozenset[Value]:
    """Smallest merge-closed superset of ``seed`` plus ⊥.

    Finite for finite seeds: atom-set closures stay within unions of seed
    sets, interval closures within hulls of seed endpoints, flat closures
    within the seed labels plus ⊤.
    """
    closed: set[Value] = {Value.bottom()}
    for v in seed:
        dom.check_value(v)
        closed.add(v)
    frontier = list(closed)
    while frontier:
        fresh: list[Value] = []
        for v1 in frontier:
            for v2 in list(closed):
                m = dom.match(v1, v2)
                if m not in closed:
                    closed.add(m)
                    fresh.append(m)
        frontier = fresh
    return frozenset(closed)


def closure_height(dom: LatticeDomain, seed: Iterable[Value]) -> int:
    """Upper bound on the length of a strictly increasing ⪯-chain through
    the merge closure of ``seed``.  Used for chase step guards."""
    seed = list(seed)
    if dom.kind == KIND_ATOMS:
        atoms: set[str] = set()
        for v in seed:
            if not v.is_bottom:
                atoms.update(v.payload)
        return len(atoms) + 1
    if dom.kind == KIND_INTERVAL:
        ends: set[Fraction] = set()
        for v in seed:
            if not v.is_bottom:
                ends.update(v.payload)
        return len(ends) + 1
    return 3  # ⊥ < label < ⊤


@dataclass
class AxiomReport:
    """Outcome of checking the semilattice axioms over a value sample.

    ``idempotent`` / ``commutative`` / ``associative`` must hold for any
    well-formed domain; ``similarity_preserving`` is informative (it decides
    whether a single chase pass is guaranteed to be exhaustive).
    Counterexamples hold the offending value tuples, keyed by axiom name.
    """

    domain: str
    idempotent: bool = True
    commutative: bool = True
    associative: bool = True
    similarity_preserving: bool = True
    counterexamples: dict[str, tuple] = field(default_factory=dict)

    @property
    def lattice_ok(self) -> bool:
        return self.idempotent and self.commutative and self.associative


def validate_axioms(dom: LatticeDomain, sample: Iterable[Value]) -> AxiomReport:
    """Exhaustively check idempotency, commutativity, associativity and
    similarity preservation over all triples from ``sample``.

    Merge results outside the sample are added to the working set so the
    checks stay meaningful for non-closed samples.  Failures are reported,
    never raised.
    """
    report = AxiomReport(domain=dom.name)
    values: list[Value] = []
    index: dict[Value, int] = {}

    def vid(v: Value) -> int:
        i = index.get(v)
        if i is None:
            i = len(values)
            index[v] = i
            values.append(v)
        return i

    for v in sample:
        dom.check_value(v)
        vid(v)
    base = len(values)

    match_cache: dict[tuple[int, int], int] = {}

    def m(i: int, j: int) -> int:
        r = match_cache.get((i, j))
        if r is None:
            r = vid(dom.match(values[i], values[j]))
            match_cache[(i, j)] = r
        return r

    for i in range(base):
        if m(i, i) != i and report.idempotent:
            report.idempotent = False
            report.counterexamples["idempotency"] = (values[i],)
    for i in range(base):
        for j in range(i + 1, base):
            if m(i, j) != m(j, i) and report.commutative:
                report.commutative = False
                report.counterexamples["commutativity"] = (values[i], values[j])
    for i in range(base):
        for j in range(base):
            ij = m(i, j)
            for k in range(base):
                if m(ij, k) != m(i, m(j, k)):
                    if report.associative:
                        report.associative = False
                        report.counterexamples["associativity"] = (
                            values[i],
                            values[j],
                            values[k],
                        )

    sim_cache: dict[tuple[int, int], bool] = {}

    def sim(i: int, j: int) -> bool:
        r = sim_cache.get((i, j))
        if r is None:
            r = dom.similar(values[i], values[j])
            sim_cache[(i, j)] = r
        return r

    for i in range(base):
        if values[i].is_bottom:
            continue  # ⊥ is adjoined, not data; its similarity is degenerate
        for j in range(base):
            if values[j].is_bottom or not sim(i, j):
                continue
            for k in range(base):
                if not sim(i, m(j, k)) and report.similarity_preserving:
                    report.similarity_preserving = False
                    report.counterexamples["similarity_preservation"] = (
                        values[i],
                        values[j],
                        values[k],
                    )
    return report


def iter_subdomain(dom: LatticeDomain, seed: Iterable[Value]) -> Iterator[Value]:
    """All non-⊥ values expressible over the seed's raw material: atom
    subsets, endpoint intervals, or labels plus ⊤.  A brute-force witness
    space for order-based checks (finite, exponential for atom sets)."""
    seed = [v for v in seed if not v.is_bottom]
    if dom.kind == KIND_ATOMS:
        atoms = sorted({a for v in seed for a in v.payload})
        for r in range(1, len(atoms) + 1):
            for combo in itertools.combinations(atoms, r):
                yield Value.atom_set(combo)
    elif dom.kind == KIND_INTERVAL:
        ends = sorted({e for v in seed for e in v.payload})
        for lo, hi in itertools.combinations_with_replacement(ends, 2):
            yield Value.interval(lo, hi)
    else:
        labels = {v.payload[0] for v in seed}
        labels.add(TOP_LABEL)
        for lab in sorted(labels):
            yield Value.flat(lab)
