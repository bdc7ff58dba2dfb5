"""Concept labels and the three relations the type system consults.

A taxonomy maintains a strict total order over concepts, an equivalence
relation (synonyms, e.g. ``dob`` ~ ``birth_date``) and an acyclic is-a
lattice (hyponym -> hypernym).  Record subtyping pairs field labels through
``label_match``, which consults all three.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LatticeCycleError, TaxonomyError


@dataclass(frozen=True)
class Concept:
    """An interned label: either a named concept or a positional one.

    Named and positional concepts are disjoint; interning is by value, so
    two concepts built from the same string always compare equal.
    """

    name: str | None = None
    position: int | None = None

    def __post_init__(self):
        if (self.name is None) == (self.position is None):
            raise TaxonomyError("concept is either named or positional")

    @property
    def is_positional(self) -> bool:
        return self.position is not None

    def sort_key(self) -> tuple:
        # positional concepts order by index and precede all named ones;
        # named concepts order lexicographically
        if self.position is not None:
            return (0, self.position, "")
        return (1, 0, self.name)

    def __repr__(self):
        if self.position is not None:
            return f"Concept(pos {self.position})"
        return f"Concept({self.name})"


def mk_concept(name: str) -> Concept:
    if not isinstance(name, str) or not name:
        raise TaxonomyError("concept name must be a nonempty string")
    return Concept(name=name)


def positional(index: int) -> Concept:
    if index < 0:
        raise TaxonomyError("positional concept index must be >= 0")
    return Concept(position=index)


def compare(a: Concept, b: Concept) -> int:
    """Strict total order: -1, 0 or 1."""
    ka, kb = a.sort_key(), b.sort_key()
    return -1 if ka < kb else (0 if ka == kb else 1)


class Taxonomy:
    """Mutable relation store.

    Mutations (``same_as``, ``add_is_a``) are expected to be serialized by
    the caller; the query methods only read.
    """

    def __init__(self):
        self._parent: dict[Concept, Concept] = {}
        self._members: dict[Concept, set[Concept]] = {}
        self._isa: dict[Concept, set[Concept]] = {}

    # -- equivalence (union-find; the root is the least member, which makes
    # -- canonical() deterministic) --

    def find(self, c: Concept) -> Concept:
        root = c
        while root in self._parent:
            root = self._parent[root]
        while c in self._parent:
            nxt = self._parent[c]
            self._parent[c] = root
            c = nxt
        return root

    canonical = find

    def equiv(self, a: Concept, b: Concept) -> bool:
        return self.find(a) == self.find(b)

    def members(self, c: Concept) -> set[Concept]:
        return set(self._members.get(self.find(c), {c}))

    def same_as(self, a: Concept, b: Concept) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if compare(rb, ra) < 0:
            ra, rb = rb, ra
        self._parent[rb] = ra
        group = self._members.setdefault(ra, {ra})
        group.update(self._members.pop(rb, {rb}))

    # -- is-a lattice --

    def add_is_a(self, child: Concept, parent: Concept) -> None:
        if self.label_leq(parent, child):
            raise LatticeCycleError(f"is-a edge {child!r} -> {parent!r} closes a cycle")
        self._isa.setdefault(child, set()).add(parent)

    def label_leq(self, sub: Concept, sup: Concept) -> bool:
        """Reflexive-transitive is-a reachability, stepping through synonyms."""
        target = self.find(sup)
        seen = {self.find(sub)}
        queue = [self.find(sub)]
        while queue:
            rep = queue.pop()
            if rep == target:
                return True
            for c in self._members.get(rep, {rep}):
                for parent in self._isa.get(c, ()):
                    prep = self.find(parent)
                    if prep not in seen:
                        seen.add(prep)
                        queue.append(prep)
        return False

    def label_match(self, sub_label: Concept, sup_label: Concept) -> bool:
        """May a subtype field labeled ``sub_label`` serve a supertype field
        labeled ``sup_label``?  True on identity, synonymy, or when
        ``sub_label`` is a hyponym of ``sup_label``.

        Positional labels match only identical positions, regardless of any
        asserted relations.
        """
        if sub_label == sup_label:
            return True
        if sub_label.is_positional or sup_label.is_positional:
            return False
        return self.label_leq(sub_label, sup_label)

    def join(self, a: Concept, b: Concept) -> Concept | None:
        """Least common ancestor in the lattice, or None when undefined."""
        common = self._ancestors(a) & self._ancestors(b)
        if not common:
            return None
        minimal = [
            c for c in common
            if not any(o != c and self.label_leq(o, c) for o in common)
        ]
        return min(minimal, key=Concept.sort_key)

    def _ancestors(self, c: Concept) -> set[Concept]:
        seen = {self.find(c)}
        queue = [self.find(c)]
        while queue:
            rep = queue.pop()
            for m in self._members.get(rep, {rep}):
                for parent in self._isa.get(m, ()):
                    prep = self.find(parent)
                    if prep not in seen:
                        seen.add(prep)
                        queue.append(prep)
        return seen
