"""Group association schemes and their Bose-Mesner algebra.

Vertices are group elements and ``(x, y)`` is in relation ``i`` iff
``y x^-1`` lies in class ``C_i``. A scheme keeps track of which original
conjugacy classes and which irreducible characters each of its relations
and eigenspaces came from, so a symmetrized scheme is the same type as an
unsymmetrized one: its groups just have two members instead of one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .chartab import (CharacterTable, IntersectionTensor, ORTHO_TOL, character_table,
                      intersection_numbers)
from .errors import InvalidParameter, NumericalFailure
from .groups import ClassSet, Group, conjugacy_classes


@dataclass(frozen=True, eq=False)
class GroupScheme:
    group: Group
    classes: ClassSet
    characters: CharacterTable
    class_groups: tuple[tuple[int, ...], ...]
    char_groups: tuple[tuple[int, ...], ...]
    relation: np.ndarray
    adjacency: np.ndarray
    intersections: IntersectionTensor
    P: np.ndarray
    Q: np.ndarray
    idempotents: np.ndarray
    valencies: tuple[int, ...] = field(init=False)
    multiplicities: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        vals = tuple(sum(self.classes.sizes[c] for c in grp) for grp in self.class_groups)
        mult = tuple(sum(self.characters.degrees[k] ** 2 for k in grp) for grp in self.char_groups)
        object.__setattr__(self, "valencies", vals)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def diameter(self) -> int:
        return len(self.class_groups) - 1

    def __len__(self):
        return len(self.class_groups)

    @property
    def symmetric(self) -> bool:
        return all(len(grp) == 2 or self.classes.is_real(grp[0]) for grp in self.class_groups)

    @property
    def merged(self) -> bool:
        return any(len(grp) > 1 for grp in self.class_groups)

    @property
    def real_class_count(self) -> int:
        """Number of original classes that are closed under inversion."""
        return sum(self.classes.is_real(i) for i in range(len(self.classes)))

    def class_of(self, x: int) -> int:
        return int(self.relation[0, x])

    def inverse_class(self, i: int) -> int:
        return self.class_of(int(self.group.inv[self.representative(i)]))

    def representative(self, i: int) -> int:
        return self.classes.representatives[self.class_groups[i][0]]

    def members(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(x for c in self.class_groups[i] for x in self.classes.classes[c]))

    def describe_class(self, i: int) -> str:
        return "{" + ", ".join(self.group.labels[x] for x in self.members(i)) + "}"


def _relation_matrix(g: Group, class_of: np.ndarray) -> np.ndarray:
    """``R[x, y]`` is the class of ``y x^-1``."""
    return class_of[g.mul[:, g.inv].T]


def build_scheme(g: Group, seed: int = 0, *, classes: ClassSet | None = None,
                 characters: CharacterTable | None = None) -> GroupScheme:
    cs = classes if classes is not None else conjugacy_classes(g)
    it = intersection_numbers(g, cs)
    ct = characters if characters is not None else character_table(g, cs, it, seed=seed)
    singletons = tuple((i,) for i in range(len(cs)))
    return _assemble(g, cs, ct, singletons, singletons, cs, it)


def _assemble(g, cs, ct, class_groups, char_groups, merged_cs, it) -> GroupScheme:
    size = len(class_groups)
    relation = _relation_matrix(g, merged_cs.class_of)
    adjacency = np.stack([(relation == i) for i in range(size)]).astype(np.uint8)

    kappa_orig = np.array(cs.sizes, dtype=float)
    deg = np.array(ct.degrees, dtype=float)
    P = np.zeros((size, size), dtype=complex)
    for k, rows in enumerate(char_groups):
        r = rows[0]
        for i, grp in enumerate(class_groups):
            P[k, i] = sum(kappa_orig[c] * ct.chi[r, c] for c in grp) / deg[r]
    kappa = np.array([sum(cs.sizes[c] for c in grp) for grp in class_groups], dtype=float)
    mult = np.array([sum(ct.degrees[r] ** 2 for r in rows) for rows in char_groups], dtype=float)
    # Q_{ik} / m_k = conj(P_{ki}) / kappa_i
    Q = mult[None, :] * P.conj().T / kappa[:, None]
    if merged_cs is not cs or _is_symmetric(cs, class_groups):
        P = _realify(P)
        Q = _realify(Q)
    idempotents = np.stack([Q[relation, k] / g.order for k in range(size)])
    return GroupScheme(group=g, classes=cs, characters=ct, class_groups=class_groups,
                       char_groups=char_groups, relation=relation, adjacency=adjacency,
                       intersections=it, P=P, Q=Q, idempotents=idempotents)


def _is_symmetric(cs, class_groups):
    return all(len(grp) == 2 or cs.is_real(grp[0]) for grp in class_groups)


def _realify(m: np.ndarray) -> np.ndarray:
    if np.max(np.abs(m.imag), initial=0.0) > 1e-8:
        raise NumericalFailure("symmetric scheme produced complex eigenvalues")
    return m.real.astype(complex)


def symmetrize(s: GroupScheme) -> GroupScheme:
    """Merge every non-real class with its inverse and every complex character with its conjugate."""
    if s.symmetric:
        return s
    cs, ct, g = s.classes, s.characters, s.group
    class_groups, seen = [], set()
    for grp in s.class_groups:
        i = grp[0]
        if i in seen:
            continue
        j = cs.inverse_class[i]
        merged = tuple(sorted({i, j}))
        seen.update(merged)
        class_groups.append(merged)
    char_groups, seen = [], set()
    for k in range(len(ct)):
        if k in seen:
            continue
        merged = tuple(sorted({k, ct.conj_pair[k]}))
        seen.update(merged)
        char_groups.append(merged)
    if len(char_groups) != len(class_groups):
        raise NumericalFailure("real characters and real classes disagree in number")

    class_of = np.empty(g.order, dtype=np.int64)
    members = []
    for idx, grp in enumerate(class_groups):
        elems = tuple(sorted(x for c in grp for x in cs.classes[c]))
        class_of[list(elems)] = idx
        members.append(elems)
    merged_cs = ClassSet(classes=tuple(members), class_of=class_of,
                         inverse_class=tuple(range(len(members))))
    it = intersection_numbers(g, merged_cs)
    return _assemble(g, cs, ct, tuple(class_groups), tuple(char_groups), merged_cs, it)


# -- stratification -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Stratification:
    reference: int
    strata: tuple[tuple[int, ...], ...]
    vectors: np.ndarray

    def __len__(self):
        return len(self.strata)


def stratify(s: GroupScheme, o: int = 0) -> Stratification:
    n = s.order
    if not 0 <= o < n:
        raise InvalidParameter(f"reference vertex {o} outside 0..{n - 1}")
    row = s.relation[o]
    strata = tuple(tuple(int(b) for b in np.flatnonzero(row == i)) for i in range(len(s)))
    vectors = np.zeros((len(s), n), dtype=complex)
    for i, stratum in enumerate(strata):
        vectors[i, list(stratum)] = 1.0 / np.sqrt(len(stratum))
    # A_{i*} |phi_0> = sqrt(kappa_i) |phi_i>; i* = i for symmetric schemes
    for i in range(len(s)):
        lhs = s.adjacency[s.inverse_class(i)] @ vectors[0]
        if np.max(np.abs(lhs - np.sqrt(s.valencies[i]) * vectors[i])) > 1e-12:
            raise NumericalFailure(f"stratum {i} violates A|phi_0> = sqrt(kappa)|phi_i>")
    return Stratification(reference=o, strata=strata, vectors=vectors)


# -- checks -----------------------------------------------------------------------------


@dataclass
class SchemeReport:
    residuals: dict[str, float]
    tol: float = ORTHO_TOL

    # exact integer identities must vanish identically
    EXACT = ("A0_identity", "sum_is_J", "row_sums", "col_sums", "symmetry", "bose_mesner")

    def failures(self) -> list[str]:
        bad = []
        for name, r in self.residuals.items():
            limit = 0.0 if name in self.EXACT else self.tol
            if not r <= limit:
                bad.append(name)
        return bad

    @property
    def ok(self) -> bool:
        return not self.failures()


def bose_mesner_check(s: GroupScheme) -> SchemeReport:
    n = s.order
    A = s.adjacency.astype(np.int64)
    size = A.shape[0]
    kappa = np.array(s.valencies)
    eye = np.eye(n, dtype=np.int64)
    res: dict[str, float] = {}
    res["A0_identity"] = float(np.abs(A[0] - eye).max())
    res["sum_is_J"] = float(np.abs(A.sum(axis=0) - 1).max())
    res["row_sums"] = float(np.abs(A.sum(axis=2) - kappa[:, None]).max())
    res["col_sums"] = float(np.abs(A.sum(axis=1) - kappa[:, None]).max())
    res["symmetry"] = float(np.abs(A - A.transpose(0, 2, 1)).max()) if s.symmetric else 0.0
    p = s.intersections.p
    worst = 0
    for i in range(size):
        prods = np.einsum("xy,jyz->jxz", A[i], A)
        expansion = np.einsum("jk,kxz->jxz", p[i], A)
        worst = max(worst, int(np.abs(prods - expansion).max()))
    res["bose_mesner"] = float(worst)

    E = s.idempotents
    gram = np.einsum("ixy,jyz->ijxz", E, E)
    expect = np.zeros_like(gram)
    for i in range(size):
        expect[i, i] = E[i]
    res["idempotent"] = float(np.abs(gram - expect).max())
    res["completeness"] = float(np.abs(E.sum(axis=0) - np.eye(n)).max())
    res["E0_is_J_over_N"] = float(np.abs(E[0] - 1.0 / n).max())
    res["PQ"] = float(np.abs(s.P @ s.Q - n * np.eye(size)).max())
    res["QP"] = float(np.abs(s.Q @ s.P - n * np.eye(size)).max())
    ae = np.einsum("ixy,jyz->ijxz", A.astype(complex), E)
    res["eigen_relation"] = float(np.abs(ae - s.P.T[:, :, None, None] * E[None]).max())
    traces = np.real(np.einsum("kxx->k", E))
    res["multiplicity"] = float(np.abs(traces - np.array(s.multiplicities)).max())
    if not s.merged:
        degs = np.array(s.characters.degrees)
        res["multiplicity_is_degree_squared"] = float(np.abs(np.array(s.multiplicities) - degs**2).max())
    return SchemeReport(residuals=res)


def eigenvalue_spectrum_residual(s: GroupScheme) -> float:
    """Compare eigenvalues of each A_i against P_{ki} repeated m_k times."""
    worst = 0.0
    for i in range(len(s)):
        A = s.adjacency[i].astype(float)
        if s.symmetric:
            got = np.sort(np.linalg.eigvalsh(A)).astype(complex)
        else:
            got = np.linalg.eigvals(A)
        want = np.concatenate([np.full(m, s.P[k, i]) for k, m in enumerate(s.multiplicities)])
        worst = max(worst, _multiset_distance(got, want))
    return worst


def _multiset_distance(a: np.ndarray, b: np.ndarray) -> float:
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


# -- export ---------------------------------------------------------------------------


def export_graph(s: GroupScheme, relations: int | Iterable[int]) -> str:
    """Edge list of the network (V, R_i), or of a union of relations.

    One ``u v`` pair per line with ``#`` comment headers; undirected graphs
    list each edge once with ``u < v``.
    """
    rel = [relations] if isinstance(relations, (int, np.integer)) else list(relations)
    if not rel:
        raise InvalidParameter("no relation given")
    for i in rel:
        if not 0 <= i < len(s):
            raise InvalidParameter(f"relation {i} outside 0..{s.diameter}")
    mask = np.isin(s.relation, rel)
    undirected = bool(np.array_equal(mask, mask.T))
    lines = [f"# underlying network of {s.group.name or 'group'} relation(s) {','.join(map(str, rel))}",
             f"# directed: {'no' if undirected else 'yes'}"]
    if 0 in rel:
        lines.append("# degenerate: relation 0 is the diagonal, edges are self-loops")
    lines.append(f"# vertices: {s.order}")
    for v, lab in enumerate(s.group.labels):
        lines.append(f"# {v} {lab}")
    xs, ys = np.nonzero(mask)
    edges = [(int(x), int(y)) for x, y in zip(xs, ys) if not undirected or x <= y]
    lines.append(f"# edges: {len(edges)}")
    lines.extend(f"{x} {y}" for x, y in edges)
    return "\n".join(lines) + "\n"


def scheme_summary(s: GroupScheme) -> dict:
    from .formats import real_or_complex

    return {
        "group": s.group.name,
        "order": s.order,
        "diameter": s.diameter,
        "symmetric": s.symmetric,
        "real_class_count": s.real_class_count,
        "classes": [s.describe_class(i) for i in range(len(s))],
        "valencies": list(s.valencies),
        "multiplicities": list(s.multiplicities),
        "P": real_or_complex(s.P),
        "Q": real_or_complex(s.Q),
    }


def with_adjacency(s: GroupScheme, adjacency: np.ndarray) -> GroupScheme:
    """Copy of ``s`` with replaced adjacency matrices (used to build corrupted fixtures)."""
    return replace(s, adjacency=np.asarray(adjacency, dtype=np.uint8))
