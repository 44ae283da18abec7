"""Finite groups as explicit Cayley tables.

Elements are the integers ``0..N-1`` and the identity is always ``0``.
Built-in families (cyclic, dihedral, Clifford, alternating/symmetric) and
direct products all produce the same :class:`Group` value, so everything
downstream only ever sees a multiplication table.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, MalformedTable, NotAGroup, SizeLimit

DEFAULT_MAX_ORDER = 4096
EXHAUSTIVE_ASSOC_LIMIT = 512


@dataclass(frozen=True, eq=False)
class Group:
    mul: np.ndarray
    inv: np.ndarray
    labels: tuple[str, ...]
    name: str = ""

    identity = 0

    def __post_init__(self):
        self.mul.setflags(write=False)
        self.inv.setflags(write=False)

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"Group({self.name or '?'}, order={self.order})"

    def label(self, x: int) -> str:
        return self.labels[x]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def element_order(self, x: int) -> int:
        k, y = 1, x
        while y != 0:
            y = int(self.mul[y, x])
            k += 1
        return k

    def fingerprint(self) -> str:
        """Stable hash of the multiplication table (labels excluded)."""
        h = hashlib.sha256()
        h.update(str(self.order).encode())
        h.update(np.ascontiguousarray(self.mul, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class ClassSet:
    classes: tuple[tuple[int, ...], ...]
    class_of: np.ndarray
    inverse_class: tuple[int, ...]
    representatives: tuple[int, ...] = field(init=False)
    sizes: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "representatives", tuple(c[0] for c in self.classes))
        object.__setattr__(self, "sizes", tuple(len(c) for c in self.classes))
        self.class_of.setflags(write=False)

    def __len__(self):
        return len(self.classes)

    @property
    def diameter(self) -> int:
        return len(self.classes) - 1

    def is_real(self, i: int) -> bool:
        return self.inverse_class[i] == i


# -- validation ---------------------------------------------------------------


def check_group_axioms(mul: np.ndarray, inv: np.ndarray | None = None, *, seed: int = 0) -> None:
    """Raise if ``mul`` is not a group table with identity at index 0."""
    mul = np.asarray(mul)
    n = mul.shape[0]
    if mul.shape != (n, n):
        raise MalformedTable(f"table must be square, got shape {mul.shape}")
    if mul.size and (mul.min() < 0 or mul.max() >= n):
        raise MalformedTable("table entries must lie in 0..N-1")
    target = np.arange(n)
    if not (np.array_equal(np.sort(mul, axis=1), np.broadcast_to(target, (n, n)))
            and np.array_equal(np.sort(mul, axis=0), np.broadcast_to(target[:, None], (n, n)))):
        raise MalformedTable("table is not a Latin square")
    if not (np.array_equal(mul[0], target) and np.array_equal(mul[:, 0], target)):
        raise NotAGroup("element 0 is not an identity")
    if inv is not None and not np.all(mul[target, inv] == 0):
        raise NotAGroup("inverse table is inconsistent")
    if not is_associative(mul, seed=seed):
        raise NotAGroup("multiplication is not associative")


def is_associative(mul: np.ndarray, *, seed: int = 0) -> bool:
    n = mul.shape[0]
    if n <= EXHAUSTIVE_ASSOC_LIMIT:
        for a in range(n):
            # (a b) c  vs  a (b c) for all b, c
            if not np.array_equal(mul[mul[a]], mul[a][mul]):
                return False
        return True
    rng = np.random.default_rng(seed)
    count = 10 * n * n
    for start in range(0, count, 1 << 20):
        size = min(1 << 20, count - start)
        a, b, c = rng.integers(0, n, size=(3, size))
        if not np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]]):
            return False
    return True


def _inverse_table(mul: np.ndarray) -> np.ndarray:
    rows, cols = np.nonzero(mul == 0)
    inv = np.empty(mul.shape[0], dtype=np.int64)
    inv[rows] = cols
    return inv


def _finish(mul, labels, name, max_order=DEFAULT_MAX_ORDER, *, validate=True) -> Group:
    mul = np.asarray(mul, dtype=np.int64)
    if mul.shape[0] > max_order:
        raise SizeLimit(f"group order {mul.shape[0]} exceeds limit {max_order}")
    if validate:
        check_group_axioms(mul)
    return Group(mul=mul, inv=_inverse_table(mul), labels=tuple(labels), name=name)


# -- constructors ----------------------------------------------------------------


def make_cyclic(n: int) -> Group:
    if n < 1:
        raise InvalidParameter(f"cyclic group needs n >= 1, got {n}")
    x = np.arange(n)
    mul = (x[:, None] + x[None, :]) % n
    return _finish(mul, [str(i) for i in range(n)], f"Z{n}", validate=False)


def make_dihedral(two_n: int) -> Group:
    """Dihedral group of order ``two_n``.

    Index ``r`` is the rotation a^r, index ``n + r`` is a^r b.
    """
    if two_n < 4 or two_n % 2:
        raise InvalidParameter(f"dihedral group needs an even order >= 4, got {two_n}")
    n = two_n // 2
    idx = np.arange(two_n)
    r, s = idx % n, idx // n
    # a^r b^s * a^u b^v = a^(r + (-1)^s u) b^(s+v)
    sign = np.where(s == 1, -1, 1)
    rot = (r[:, None] + sign[:, None] * r[None, :]) % n
    ref = (s[:, None] + s[None, :]) % 2
    mul = rot + n * ref

    def power(k):
        return "" if k == 0 else ("a" if k == 1 else f"a^{k}")

    labels = ["e"] + [power(k) for k in range(1, n)] + [power(k) + "b" for k in range(n)]
    return _finish(mul, labels, f"D{two_n}", validate=False)


def _clifford_sign(a: int, b: int) -> int:
    """Parity of reordering gamma_A gamma_B into increasing order."""
    swaps = 0
    bits = b
    while bits:
        low = bits & -bits
        j = low.bit_length() - 1
        swaps += bin(a >> (j + 1)).count("1")
        bits ^= low
    return swaps & 1


def make_clifford(n: int) -> Group:
    """Clifford group CL(n) on elements +-gamma_A, A a subset of {1..n}.

    Element ``2*mask + sign`` is ``(-1)^sign gamma_A`` where bit ``i-1`` of
    ``mask`` marks gamma_i, so +1 is 0 and -1 is 1.
    """
    if n < 3:
        raise InvalidParameter(f"Clifford group needs n >= 3, got {n}")
    size = 2 ** (n + 1)
    if size > DEFAULT_MAX_ORDER:
        raise SizeLimit(f"CL({n}) has order {size} > {DEFAULT_MAX_ORDER}")
    masks = range(2**n)
    swap = np.array([[_clifford_sign(a, b) for b in masks] for a in masks], dtype=np.int64)
    idx = np.arange(size)
    m, s = idx // 2, idx % 2
    mul = 2 * (m[:, None] ^ m[None, :]) + (s[:, None] ^ s[None, :] ^ swap[m][:, m])

    def label(x):
        mask, sign = x // 2, x % 2
        body = "".join(f"g{i + 1}" for i in range(n) if mask >> i & 1) or "1"
        return ("-" if sign else "") + body

    return _finish(mul, [label(x) for x in idx], f"CL({n})", validate=False)


def from_permutations(perms: Sequence[Sequence[int]], name: str = "", *,
                      max_order: int = DEFAULT_MAX_ORDER) -> Group:
    """Closure of the given permutations (tuples of images of 0..k-1).

    Elements are sorted lexicographically, which puts the identity first.
    """
    gens = [tuple(int(i) for i in p) for p in perms]
    if not gens:
        raise InvalidParameter("need at least one generator")
    k = len(gens[0])
    if any(len(g) != k or sorted(g) != list(range(k)) for g in gens):
        raise InvalidParameter("generators must be permutations of a common degree")
    ident = tuple(range(k))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(p[i] for i in g)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if len(seen) > max_order:
                        raise SizeLimit(f"permutation group exceeds order {max_order}")
        frontier = nxt
    elems = sorted(seen)
    index = {p: i for i, p in enumerate(elems)}
    # (p*q)(x) = p(q(x)): apply q first
    mul = np.array([[index[tuple(p[i] for i in q)] for q in elems] for p in elems])
    return _finish(mul, [_cycle_label(p) for p in elems], name or f"perm{k}", max_order)


def _cycle_label(p: tuple[int, ...]) -> str:
    seen, out = set(), []
    for start in range(len(p)):
        if start in seen or p[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = p[x]
        out.append("(" + " ".join(str(c + 1) for c in cyc) + ")")
    return "".join(out) or "e"


def make_symmetric(n: int) -> Group:
    if n < 1:
        raise InvalidParameter(f"symmetric group needs n >= 1, got {n}")
    if n == 1:
        return from_permutations([(0,)], "S1")
    gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
    return from_permutations(gens, f"S{n}")


def make_alternating(n: int) -> Group:
    if n < 3:
        raise InvalidParameter(f"alternating group needs n >= 3, got {n}")
    # 3-cycles (0 1 i) generate A_n
    gens = []
    for i in range(2, n):
        p = list(range(n))
        p[0], p[1], p[i] = 1, i, 0
        gens.append(tuple(p))
    return from_permutations(gens, f"A{n}")


def direct_product(g1: Group, g2: Group, *, max_order: int = DEFAULT_MAX_ORDER) -> Group:
    """Componentwise product; element ``(x1, x2)`` has index ``x1 * |G2| + x2``."""
    n1, n2 = g1.order, g2.order
    if n1 * n2 > max_order:
        raise SizeLimit(f"product order {n1 * n2} exceeds limit {max_order}")
    a1, a2 = np.divmod(np.arange(n1 * n2), n2)
    mul = g1.mul[a1[:, None], a1[None, :]] * n2 + g2.mul[a2[:, None], a2[None, :]]
    labels = [f"({g1.labels[x]},{g2.labels[y]})" for x, y in zip(a1, a2)]
    name = f"{g1.name}x{g2.name}" if g1.name and g2.name else ""
    return _finish(mul, labels, name, max_order, validate=False)


def from_cayley_table(table, labels: Sequence[str] | None = None, name: str = "", *,
                      max_order: int = DEFAULT_MAX_ORDER, seed: int = 0) -> Group:
    """Validate an arbitrary Cayley table and relabel its identity to index 0.

    The identity is moved to the front; all other elements keep their
    relative order.
    """
    try:
        mul = np.array(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise MalformedTable(f"table is not an integer matrix: {exc}") from None
    if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
        raise MalformedTable(f"table must be a non-empty square matrix, got shape {mul.shape}")
    n = mul.shape[0]
    if n > max_order:
        raise SizeLimit(f"group order {n} exceeds limit {max_order}")
    if labels is None:
        labels = [str(i) for i in range(n)]
    labels = [str(s) for s in labels]
    if len(labels) != n:
        raise MalformedTable(f"expected {n} labels, got {len(labels)}")
    if mul.min() < 0 or mul.max() >= n:
        raise MalformedTable("table entries must lie in 0..N-1")
    target = np.arange(n)
    if not (all(len(set(row)) == n for row in mul.tolist())
            and all(len(set(col)) == n for col in mul.T.tolist())):
        raise MalformedTable("table is not a Latin square")

    ident = [e for e in range(n)
             if np.array_equal(mul[e], target) and np.array_equal(mul[:, e], target)]
    if not ident:
        raise NotAGroup("no two-sided identity element")
    e = ident[0]
    order = [e] + [x for x in range(n) if x != e]
    new_index = np.empty(n, dtype=np.int64)
    new_index[order] = target
    relabeled = new_index[mul[np.ix_(order, order)]]
    check_group_axioms(relabeled, seed=seed)
    return _finish(relabeled, [labels[x] for x in order], name, max_order, validate=False)


# -- structure ----------------------------------------------------------------


def conjugacy_classes(g: Group) -> ClassSet:
    """Classes ordered by their smallest element, so the identity class is first."""
    n = g.order
    class_of = np.full(n, -1, dtype=np.int64)
    classes = []
    for x in range(n):
        if class_of[x] >= 0:
            continue
        # g x g^-1 for every g
        members = np.unique(g.mul[g.mul[:, x], g.inv])
        class_of[members] = len(classes)
        classes.append(tuple(int(m) for m in members))
    inverse_class = tuple(int(class_of[g.inv[c[0]]]) for c in classes)
    return ClassSet(classes=tuple(classes), class_of=class_of, inverse_class=inverse_class)


def center(g: Group) -> frozenset[int]:
    """Elements commuting with everything."""
    commutes = np.all(g.mul == g.mul.T, axis=1)
    return frozenset(int(z) for z in np.flatnonzero(commutes))


def singleton_classes(cs: ClassSet) -> list[int]:
    return [i for i, c in enumerate(cs.classes) if len(c) == 1]


def pst_targets(cs: ClassSet) -> list[int]:
    """Non-identity singleton classes; these are exactly the central elements."""
    return [i for i in singleton_classes(cs) if i != 0]


def product_class_index(cs1: ClassSet, cs2: ClassSet, cs12: ClassSet, n2: int,
                        i: int, j: int) -> int:
    """Class of G1xG2 containing ``C_i x C_j``."""
    return int(cs12.class_of[cs1.representatives[i] * n2 + cs2.representatives[j]])


def all_element_orders(g: Group) -> np.ndarray:
    return np.array([g.element_order(x) for x in range(g.order)])
