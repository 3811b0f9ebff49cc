"""The symmetry group of the equation system and its action on partitions.

An element permutes equations (``eps``), then swaps the two sides of each
target equation (``sigma``), then swaps the two places on each target side
(``flip``).  Side and place permutations are stored as bits (1 = swap) and are
indexed by the *target* equation and side:

    (e, s, v) -> (eps[e], s ^ sigma[eps[e]], v ^ flip[eps[e]][s ^ sigma[eps[e]]])
"""

from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import CapacityError, DomainError
from .partition import Triple, TriplePartition, normalize_rgs
from .satcount import is_satisfiable, is_principal

CANONICAL_P_CAP = 4
FULL_SCAN_P_CAP = 3


@dataclass(frozen=True)
class WreathElement:
    eps: tuple[int, ...]
    sigma: tuple[int, ...]
    flip: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        p = len(self.eps)
        if sorted(self.eps) != list(range(p)) or len(self.sigma) != p or len(self.flip) != p:
            raise DomainError("malformed wreath element")

    @property
    def p(self) -> int:
        return len(self.eps)

    @classmethod
    def identity(cls, p: int) -> "WreathElement":
        return cls(tuple(range(p)), (0,) * p, ((0, 0),) * p)

    @classmethod
    def random(cls, p: int, rng: random.Random) -> "WreathElement":
        eps = list(range(p))
        rng.shuffle(eps)
        return cls(
            tuple(eps),
            tuple(rng.randrange(2) for _ in range(p)),
            tuple((rng.randrange(2), rng.randrange(2)) for _ in range(p)),
        )

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> "WreathElement":
        """Recover the components from the induced permutation of triple indices."""
        p = len(perm) // 4
        eps = tuple(perm[4 * e] // 4 for e in range(p))
        sigma = [0] * p
        flip = [[0, 0] for _ in range(p)]
        for e in range(p):
            t = eps[e]
            sigma[t] = (perm[4 * e] >> 1) & 1
            for s in (0, 1):
                img = perm[4 * e + 2 * s]
                if img // 4 != t:
                    raise DomainError("permutation does not respect equations")
                flip[t][(img >> 1) & 1] = img & 1
        el = cls(eps, tuple(sigma), tuple(tuple(f) for f in flip))
        if el.permutation() != tuple(perm):
            raise DomainError("permutation is not in the wreath product")
        return el

    def act_triple(self, t: Sequence[int]) -> Triple:
        e, s, v = t
        e2 = self.eps[e]
        s2 = s ^ self.sigma[e2]
        return Triple(e2, s2, v ^ self.flip[e2][s2])

    def permutation(self) -> tuple[int, ...]:
        """Image index of every triple index."""
        out = []
        for e in range(self.p):
            for s in (0, 1):
                for v in (0, 1):
                    e2, s2, v2 = self.act_triple((e, s, v))
                    out.append(4 * e2 + 2 * s2 + v2)
        return tuple(out)

    def __matmul__(self, other: "WreathElement") -> "WreathElement":
        """Composition: ``(a @ b)(t) == a(b(t))``."""
        pa, pb = self.permutation(), other.permutation()
        return WreathElement.from_permutation([pa[i] for i in pb])

    def inverse(self) -> "WreathElement":
        perm = self.permutation()
        inv = [0] * len(perm)
        for i, j in enumerate(perm):
            inv[j] = i
        return WreathElement.from_permutation(inv)

    def act_partition(self, P: TriplePartition) -> TriplePartition:
        if P.equations != tuple(range(self.p)):
            raise DomainError("partition and group element have different p")
        return TriplePartition(P.equations, apply_permutation(self.permutation(), P.labels))


def apply_permutation(perm: Sequence[int], labels: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(labels)
    for i, b in enumerate(labels):
        out[perm[i]] = b
    return normalize_rgs(out)


def act_triple(pi: WreathElement, t: Sequence[int]) -> Triple:
    return pi.act_triple(t)


def act_partition(pi: WreathElement, P: TriplePartition) -> TriplePartition:
    return pi.act_partition(P)


def group_order(p: int) -> int:
    return math.factorial(p) * 8**p


def elements(p: int) -> Iterator[WreathElement]:
    for eps in itertools.permutations(range(p)):
        for sigma in itertools.product((0, 1), repeat=p):
            for bits in itertools.product((0, 1), repeat=2 * p):
                flip = tuple((bits[2 * e], bits[2 * e + 1]) for e in range(p))
                yield WreathElement(eps, sigma, flip)


def generators(p: int, twin_equations: int = 0) -> list[WreathElement]:
    """Adjacent equation swaps, one side swap per equation, one place swap per side.

    With ``twin_equations = t`` this generates the subgroup that keeps equations
    ``0..t-1`` among themselves and never swaps their sides.
    """
    ident = WreathElement.identity(p)
    gens = []
    for e in range(p - 1):
        if e + 1 == twin_equations:
            continue
        eps = list(range(p))
        eps[e], eps[e + 1] = eps[e + 1], eps[e]
        gens.append(WreathElement(tuple(eps), ident.sigma, ident.flip))
    for e in range(twin_equations, p):
        sigma = [0] * p
        sigma[e] = 1
        gens.append(WreathElement(ident.eps, tuple(sigma), ident.flip))
    for e in range(p):
        for s in (0, 1):
            flip = [[0, 0] for _ in range(p)]
            flip[e][s] = 1
            gens.append(WreathElement(ident.eps, ident.sigma, tuple(tuple(f) for f in flip)))
    return gens


def generate_group(p: int) -> set[tuple[int, ...]]:
    """All group elements, as triple permutations, by closure under the generators."""
    gens = [g.permutation() for g in generators(p)]
    start = tuple(range(4 * p))
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = tuple(g[i] for i in x)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


@lru_cache(maxsize=None)
def _all_permutations(p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(g.permutation() for g in elements(p)))


@lru_cache(maxsize=None)
def _generator_permutations(p: int, twin_equations: int = 0) -> tuple[tuple[int, ...], ...]:
    return tuple(g.permutation() for g in generators(p, twin_equations))


def orbit_labels(P: TriplePartition, twin_equations: int = 0) -> set[tuple[int, ...]]:
    """Labels of every partition in the orbit of P (under the slice subgroup if given)."""
    gens = _generator_permutations(P.p, twin_equations)
    seen = {P.labels}
    queue = deque([P.labels])
    while queue:
        lab = queue.popleft()
        for g in gens:
            img = apply_permutation(g, lab)
            if img not in seen:
                seen.add(img)
                queue.append(img)
    return seen


def canonical_form(P: TriplePartition, cap: int = CANONICAL_P_CAP) -> TriplePartition:
    """Lexicographically least labels over the orbit of P."""
    if P.p > cap:
        raise CapacityError(f"p={P.p} exceeds the canonical-form cap {cap}")
    if P.p <= FULL_SCAN_P_CAP:
        best = min(apply_permutation(g, P.labels) for g in _all_permutations(P.p))
    else:
        best = min(orbit_labels(P))
    return TriplePartition(P.equations, best)


@dataclass(frozen=True)
class OrbitClass:
    representative: TriplePartition
    orbit_size: int
    member_count: int | None = None

    def describe(self) -> dict:
        P = self.representative
        gelo = P.is_gelo()
        sat = is_satisfiable(P)
        return {
            "representative": str(P),
            "orbit_size": self.orbit_size,
            "gelo": gelo,
            "satisfiable": sat,
            "separable": P.is_separable(),
            "principal": is_principal(P) if gelo and sat else False,
        }


def orbit_of(P: TriplePartition, cap: int = CANONICAL_P_CAP) -> OrbitClass:
    if P.p > cap:
        raise CapacityError(f"p={P.p} exceeds the orbit cap {cap}")
    orbit = orbit_labels(P)
    rep = TriplePartition(P.equations, min(orbit))
    return OrbitClass(rep, len(orbit), len(orbit))


# enumeration of contributory partitions


def _slice_blocks(p: int, t: int) -> list[tuple[int, tuple[int, ...]]]:
    """Local blocks (equation, triple indices) when equations < t are twinned on side 0."""
    blocks = []
    for e in range(p):
        base = 4 * e
        if e < t:
            blocks += [(e, (base, base + 1)), (e, (base + 2,)), (e, (base + 3,))]
        else:
            blocks += [(e, (base + i,)) for i in range(4)]
    return blocks


def slice_gelo(p: int, t: int) -> Iterator[TriplePartition]:
    """GELO partitions whose local shapes are twin-on-side-0 at equations < t, singletons after.

    Every class is a union of local blocks from distinct equations; the
    restriction to each equation is then exactly the prescribed local shape,
    which always has an odd class, so only global evenness needs checking.
    """
    blocks = _slice_blocks(p, t)
    n = len(blocks)
    eqs = [e for e, _ in blocks]
    sizes = [len(tr) for _, tr in blocks]
    assign = [0] * n
    class_eqs: list[set[int]] = []
    class_size: list[int] = []
    # odd_left[i]: odd-size blocks at positions >= i; each can repair one odd class
    odd_left = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        odd_left[i] = odd_left[i + 1] + sizes[i] % 2
    odd = [0]

    def place(b: int, i: int, sign: int) -> None:
        before = class_size[b] % 2
        class_size[b] += sign * sizes[i]
        odd[0] += class_size[b] % 2 - before

    def rec(i: int) -> Iterator[TriplePartition]:
        if odd[0] > odd_left[i]:
            return
        if i == n:
            if odd[0] == 0:
                labels = [0] * (4 * p)
                for (_, trips), b in zip(blocks, assign):
                    for x in trips:
                        labels[x] = b
                yield TriplePartition(tuple(range(p)), normalize_rgs(labels))
            return
        for b in range(len(class_eqs)):
            if eqs[i] in class_eqs[b]:
                continue
            assign[i] = b
            class_eqs[b].add(eqs[i])
            place(b, i, 1)
            yield from rec(i + 1)
            class_eqs[b].discard(eqs[i])
            place(b, i, -1)
        assign[i] = len(class_eqs)
        class_eqs.append({eqs[i]})
        class_size.append(0)
        place(len(class_size) - 1, i, 1)
        yield from rec(i + 1)
        place(len(class_size) - 1, i, -1)
        class_eqs.pop()
        class_size.pop()

    yield from rec(0)


def slice_multiplicity(p: int, t: int) -> int:
    """How many slices (choice of twinned equations and their sides) have t twins."""
    return math.comb(p, t) * 2**t


def enumerate_con_reps(p: int, cap: int = CANONICAL_P_CAP) -> list[OrbitClass]:
    """One OrbitClass per isomorphism class of contributory partitions.

    Orbits are found inside each slice under the slice-preserving subgroup; the
    full orbit size is the slice orbit size times the number of slices.
    """
    if p > cap:
        raise CapacityError(f"p={p} exceeds the enumeration cap {cap}")
    out: list[OrbitClass] = []
    for t in range(p + 1):
        members = {P.labels for P in slice_gelo(p, t) if is_satisfiable(P)}
        gens = _generator_permutations(p, t)
        seen: set[tuple[int, ...]] = set()
        for lab in sorted(members):
            if lab in seen:
                continue
            orbit = {lab}
            queue = deque([lab])
            while queue:
                x = queue.popleft()
                for g in gens:
                    y = apply_permutation(g, x)
                    if y not in orbit:
                        orbit.add(y)
                        queue.append(y)
            assert orbit <= members, "slice orbit left the contributory slice"
            seen |= orbit
            P = TriplePartition(tuple(range(p)), min(orbit))
            if p <= FULL_SCAN_P_CAP:
                P = canonical_form(P)
            size = len(orbit) * slice_multiplicity(p, t)
            out.append(OrbitClass(P, size, len(orbit)))
    out.sort(key=lambda o: o.representative.labels)
    return out


def count_con(p: int) -> int:
    return sum(o.orbit_size for o in enumerate_con_reps(p))
