"""Set partitions of the triple set E x [2] x [2].

A triple ``(e, s, v)`` names place ``v`` on side ``s`` of equation ``e`` in the
system ``x[e,0,0] + x[e,0,1] = x[e,1,0] + x[e,1,1]``.  Triples are indexed
lexicographically, so over a full equation set ``[p]`` the triple ``(e, s, v)``
has index ``4*e + 2*s + v``.

Partitions are stored as restricted-growth strings (RGS) over that order, which
is a unique normal form: equal partitions have equal labels, and the labels
double as dictionary keys.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import CapacityError, DomainError

COARSENING_CLASS_CAP = 12


class Triple(NamedTuple):
    e: int
    s: int
    v: int

    def __str__(self) -> str:
        return f"{self.e}.{self.s}.{self.v}"


def normalize_rgs(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel so each new class gets the next unused integer, in order of first use."""
    seen: dict[int, int] = {}
    out = []
    for x in labels:
        if x not in seen:
            seen[x] = len(seen)
        out.append(seen[x])
    return tuple(out)


def set_partitions_rgs(n: int) -> Iterator[tuple[int, ...]]:
    """Yield every restricted-growth string of length ``n`` (Bell(n) of them)."""
    if n == 0:
        yield ()
        return
    labels = [0] * n

    def rec(i: int, top: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(labels)
            return
        for b in range(top + 2):
            labels[i] = b
            yield from rec(i + 1, max(top, b))

    labels[0] = 0
    yield from rec(1, 0)


def bell(n: int) -> int:
    """Bell numbers by the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


class LocalShape(enum.Enum):
    TWIN_0 = "twin0"
    TWIN_1 = "twin1"
    ALL_SINGLETONS = "singletons"
    OTHER = "other"

    @property
    def twin_side(self) -> int | None:
        return {LocalShape.TWIN_0: 0, LocalShape.TWIN_1: 1}.get(self)


class EquationRelation(enum.Enum):
    DISJOINT = "disjoint"
    IDENTICAL = "identical"
    IMBRICATE = "imbricate"


@dataclass(frozen=True)
class TriplePartition:
    """A partition of ``equations x [2] x [2]``.

    ``labels[i]`` is the class of the i-th triple in lexicographic order; it is
    always a normalized restricted-growth string.
    """

    equations: tuple[int, ...]
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != 4 * len(self.equations):
            raise DomainError("labels must cover exactly 4 triples per equation")
        if tuple(sorted(set(self.equations))) != self.equations:
            raise DomainError("equations must be strictly increasing")
        if normalize_rgs(self.labels) != self.labels:
            object.__setattr__(self, "labels", normalize_rgs(self.labels))

    # construction

    @classmethod
    def from_labels(cls, p: int, labels: Sequence[int]) -> "TriplePartition":
        return cls(tuple(range(p)), normalize_rgs(labels))

    @classmethod
    def from_classes(
        cls, classes: Iterable[Iterable[Sequence[int]]], equations: Sequence[int] | None = None
    ) -> "TriplePartition":
        classes = [[Triple(*t) for t in c] for c in classes]
        if equations is None:
            equations = sorted({t.e for c in classes for t in c})
        equations = tuple(equations)
        pos = {e: k for k, e in enumerate(equations)}
        labels = [-1] * (4 * len(equations))
        for b, cls_ in enumerate(classes):
            if not cls_:
                raise DomainError("empty class")
            for t in cls_:
                if t.e not in pos or t.s not in (0, 1) or t.v not in (0, 1):
                    raise DomainError(f"triple {t} out of range")
                i = 4 * pos[t.e] + 2 * t.s + t.v
                if labels[i] != -1:
                    raise DomainError(f"triple {t} appears twice")
                labels[i] = b
        if -1 in labels:
            raise DomainError("classes do not cover every triple")
        return cls(equations, normalize_rgs(labels))

    @classmethod
    def singletons(cls, p: int) -> "TriplePartition":
        return cls.from_labels(p, range(4 * p))

    @classmethod
    def one_class(cls, p: int) -> "TriplePartition":
        return cls.from_labels(p, [0] * (4 * p))

    @classmethod
    def principal(cls, p: int) -> "TriplePartition":
        """The pairing {(e,s,v), (e+p/2,s,v)} used as the principal representative."""
        if p % 2:
            raise DomainError("principal partitions need even p")
        h = p // 2
        return cls.from_classes(
            [[(e, s, v), (e + h, s, v)] for e in range(h) for s in (0, 1) for v in (0, 1)],
            equations=range(p),
        )

    @classmethod
    def parse(cls, text: str, p: int | None = None) -> "TriplePartition":
        """Parse ``"0.0.0,1.0.0;0.0.1,1.0.1;..."``."""
        classes = []
        for group in text.strip().split(";"):
            group = group.strip()
            if not group:
                continue
            trip = []
            for tok in group.split(","):
                parts = tok.strip().split(".")
                if len(parts) != 3:
                    raise DomainError(f"bad triple {tok!r}")
                trip.append(tuple(int(x) for x in parts))
            classes.append(trip)
        return cls.from_classes(classes, equations=None if p is None else range(p))

    def __str__(self) -> str:
        return ";".join(",".join(str(t) for t in c) for c in self.classes)

    # basic structure

    @property
    def p(self) -> int:
        return len(self.equations)

    @cached_property
    def triples(self) -> tuple[Triple, ...]:
        return tuple(Triple(e, s, v) for e in self.equations for s in (0, 1) for v in (0, 1))

    @property
    def num_classes(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    def __len__(self) -> int:
        return self.num_classes

    @cached_property
    def classes(self) -> tuple[tuple[Triple, ...], ...]:
        """Classes in order of first appearance; triples sorted within each."""
        out: list[list[Triple]] = [[] for _ in range(self.num_classes)]
        for t, b in zip(self.triples, self.labels):
            out[b].append(t)
        return tuple(tuple(c) for c in out)

    def class_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def type(self) -> tuple[int, ...]:
        """Multiset of class sizes, as a descending tuple."""
        return tuple(sorted(self.class_sizes(), reverse=True))

    def class_of(self, t: Sequence[int]) -> int:
        t = Triple(*t)
        k = self.equations.index(t.e)
        return self.labels[4 * k + 2 * t.s + t.v]

    def support(self, b: int) -> frozenset[int]:
        """Equations met by class ``b``."""
        return frozenset(t.e for t in self.classes[b])

    # predicates

    def restrict(self, F: Iterable[int]) -> "TriplePartition":
        F = set(F)
        if not F <= set(self.equations):
            raise DomainError("restriction set must be a subset of the equations")
        keep = tuple(e for e in self.equations if e in F)
        labels = [b for t, b in zip(self.triples, self.labels) if t.e in F]
        return TriplePartition(keep, normalize_rgs(labels))

    def is_even(self) -> bool:
        return all(n % 2 == 0 for n in self.class_sizes())

    def is_gelo(self) -> bool:
        """Globally even, locally odd."""
        if not self.is_even():
            return False
        return all(not self.restrict([e]).is_even() for e in self.equations)

    def local_shape(self, e: int) -> LocalShape:
        lab = self.restrict([e]).labels
        if lab == (0, 1, 2, 3):
            return LocalShape.ALL_SINGLETONS
        if lab == (0, 0, 1, 2):
            return LocalShape.TWIN_0
        if lab == (0, 1, 2, 2):
            return LocalShape.TWIN_1
        return LocalShape.OTHER

    def is_twin_class(self, b: int) -> bool:
        members = set(self.classes[b])
        return any(
            Triple(e, s, 0) in members and Triple(e, s, 1) in members
            for e in self.equations
            for s in (0, 1)
        )

    def finer_than(self, other: "TriplePartition") -> bool:
        """True when every class of self lies inside a class of ``other``."""
        if self.equations != other.equations:
            raise DomainError("partitions of different triple sets are not comparable")
        image: dict[int, int] = {}
        for a, b in zip(self.labels, other.labels):
            if image.setdefault(a, b) != b:
                return False
        return True

    def merge(self, pattern: Sequence[int]) -> "TriplePartition":
        """Coarsen by merging class ``b`` into block ``pattern[b]``."""
        if len(pattern) != self.num_classes:
            raise DomainError("pattern must label every class")
        return TriplePartition(self.equations, normalize_rgs([pattern[b] for b in self.labels]))

    def coarsenings(self, cap: int = COARSENING_CLASS_CAP) -> Iterator["TriplePartition"]:
        """Every partition coarser than or equal to self, each exactly once."""
        k = self.num_classes
        if k > cap:
            raise CapacityError(f"{k} classes exceeds the coarsening cap {cap}")
        for pattern in set_partitions_rgs(k):
            yield self.merge(pattern)

    # equation-level structure

    def equation_relation(self, a: int, b: int) -> EquationRelation:
        return _support_relation(self.support(a), self.support(b))

    def quotient(self) -> tuple[tuple[int, ...], ...]:
        """Classes grouped by equal equation support (class indices, grouped)."""
        groups: dict[frozenset[int], list[int]] = {}
        for b in range(self.num_classes):
            groups.setdefault(self.support(b), []).append(b)
        return tuple(tuple(g) for g in groups.values())

    def is_separable(self) -> bool:
        sups = [self.support(b) for b in range(self.num_classes)]
        for i in range(len(sups)):
            for j in range(i + 1, len(sups)):
                if _support_relation(sups[i], sups[j]) is EquationRelation.IMBRICATE:
                    return False
        return True


def equation_relation(P: Iterable[Sequence[int]], Q: Iterable[Sequence[int]]) -> EquationRelation:
    """Relation between two classes given as collections of triples."""
    return _support_relation(frozenset(t[0] for t in P), frozenset(t[0] for t in Q))


def _support_relation(sp: frozenset[int], sq: frozenset[int]) -> EquationRelation:
    if sp == sq:
        return EquationRelation.IDENTICAL
    if not (sp & sq):
        return EquationRelation.DISJOINT
    return EquationRelation.IMBRICATE


def all_partitions(p: int) -> Iterator[TriplePartition]:
    """All of Part(p); Bell(4p) of them, so only sensible for p <= 2."""
    eqs = tuple(range(p))
    for rgs in set_partitions_rgs(4 * p):
        yield TriplePartition(eqs, rgs)
