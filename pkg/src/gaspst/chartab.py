"""Intersection numbers and complex character tables.

Characters come from simultaneously diagonalizing the commuting class
matrices ``(M_i)_{kj} = p^k_{ij}``. A left eigenvector ``w`` of the
algebra, normalized so that ``w_0 = 1``, is the central character
``w_i = kappa_i chi(alpha_i) / d``; the degree follows from row
orthogonality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyFailure, NumericalFailure
from .groups import ClassSet, Group

EIG_TOL = 1e-8
ORTHO_TOL = 1e-9
DEGREE_TOL = 1e-6
MAX_RETRIES = 8


@dataclass(frozen=True, eq=False)
class IntersectionTensor:
    """``p[i, j, k]`` is p^k_{ij}: A_i A_j = sum_k p^k_{ij} A_k."""

    p: np.ndarray
    valencies: tuple[int, ...]

    def class_matrix(self, i: int) -> np.ndarray:
        """``(M_i)_{kj} = p^k_{ij}``."""
        return self.p[i].T


@dataclass(frozen=True, eq=False)
class CharacterTable:
    chi: np.ndarray
    degrees: tuple[int, ...]
    sizes: tuple[int, ...]
    real_rows: tuple[bool, ...]
    conj_pair: tuple[int, ...]
    seed: int = 0

    @property
    def order(self) -> int:
        return sum(self.sizes)

    def __len__(self):
        return self.chi.shape[0]

    def central_characters(self) -> np.ndarray:
        """``omega[r, i] = kappa_i chi_r(alpha_i) / d_r``."""
        return self.chi * np.array(self.sizes)[None, :] / np.array(self.degrees)[:, None]


def intersection_numbers(g: Group, cs: ClassSet) -> IntersectionTensor:
    """Count p^k_{ij} directly from the relations.

    For the pair ``(e, beta)`` with ``beta`` in C_k, p^k_{ij} is the number of
    ``gamma`` with ``gamma`` in C_i and ``beta gamma^-1`` in C_j.
    """
    size = len(cs)
    p = np.zeros((size, size, size), dtype=np.int64)
    gamma = np.arange(g.order)
    ci = cs.class_of[gamma]
    for k, cls in enumerate(cs.classes):
        counts = _count_pairs(g, cs, cls[0], ci, gamma, size)
        if len(cls) > 1:
            again = _count_pairs(g, cs, cls[-1], ci, gamma, size)
            if not np.array_equal(counts, again):
                raise NumericalFailure(f"intersection numbers depend on the representative of class {k}")
        p[:, :, k] = counts
    return IntersectionTensor(p=p, valencies=cs.sizes)


def _count_pairs(g, cs, beta, ci, gamma, size):
    cj = cs.class_of[g.mul[beta, g.inv[gamma]]]
    counts = np.zeros((size, size), dtype=np.int64)
    np.add.at(counts, (ci, cj), 1)
    return counts


def intersection_numbers_from_characters(ct: CharacterTable) -> np.ndarray:
    """Character-sum formula for p^k_{ij}; floating point, not rounded."""
    chi = ct.chi
    kappa = np.array(ct.sizes, dtype=float)
    d = np.array(ct.degrees, dtype=float)
    s = np.einsum("ri,rj,rk,r->ijk", chi, chi, chi.conj(), 1.0 / d)
    return kappa[:, None, None] * kappa[None, :, None] * s / ct.order


def character_table(g: Group, cs: ClassSet, it: IntersectionTensor, seed: int = 0) -> CharacterTable:
    """Full character table with rows ordered trivial first, then by degree."""
    n = g.order
    size = len(cs)
    kappa = np.array(cs.sizes, dtype=float)
    mats = [it.class_matrix(i).astype(float) for i in range(size)]
    trail = []
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RETRIES + 1):
        draw = int(rng.integers(0, 2**31))
        trail.append(draw)
        coeffs = np.random.default_rng(draw).standard_normal(size)
        combo = sum(c * m for c, m in zip(coeffs, mats))
        vals, vecs = np.linalg.eig(combo.T)
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        if size == 1 or gaps.min() > 1e-6 * max(1.0, np.abs(vals).max()):
            break
    else:
        raise DegeneracyFailure(f"eigenvalue collision after {MAX_RETRIES} retries", trail)

    if np.any(np.abs(vecs[0]) < 1e-12):
        raise NumericalFailure("eigenvector with vanishing identity component")
    omega = (vecs / vecs[0]).T  # omega[r, i]
    norms = (np.abs(omega) ** 2 / kappa).sum(axis=1)
    raw_deg = np.sqrt(n / norms)
    degrees = np.rint(raw_deg)
    if np.max(np.abs(raw_deg - degrees)) > DEGREE_TOL:
        raise NumericalFailure(f"character degrees not integral: {raw_deg}")
    chi = omega * degrees[:, None] / kappa[None, :]
    chi = _snap(chi)

    order = sorted(range(size), key=lambda r: _row_key(chi[r], degrees[r]))
    chi = chi[order]
    degrees = degrees[order]
    real_rows = tuple(bool(np.max(np.abs(row.imag)) < EIG_TOL) for row in chi)
    conj_pair = []
    for r in range(size):
        dist = np.max(np.abs(chi - chi[r].conj()[None, :]), axis=1)
        conj_pair.append(int(np.argmin(dist)))
    return CharacterTable(chi=chi, degrees=tuple(int(d) for d in degrees), sizes=cs.sizes,
                          real_rows=real_rows, conj_pair=tuple(conj_pair), seed=seed)


def _snap(chi: np.ndarray) -> np.ndarray:
    # drops roundoff below 1e-13 so integer/zero entries print cleanly
    re = np.where(np.abs(chi.real - np.rint(chi.real)) < 1e-13, np.rint(chi.real), chi.real)
    im = np.where(np.abs(chi.imag - np.rint(chi.imag)) < 1e-13, np.rint(chi.imag), chi.imag)
    return re + 1j * im + 0.0


def _row_key(row, degree):
    trivial = bool(np.allclose(row, 1.0, atol=EIG_TOL))
    values = tuple(v for z in np.round(row, 8) for v in (-z.real, -z.imag))
    return (not trivial, int(degree), values)


def orthogonality_residuals(ct: CharacterTable) -> dict[str, float]:
    n = ct.order
    kappa = np.array(ct.sizes, dtype=float)
    chi = ct.chi
    rows = (chi * kappa) @ chi.conj().T
    cols = chi.T @ chi.conj()
    return {
        "row": float(np.max(np.abs(rows - n * np.eye(len(kappa))))),
        "column": float(np.max(np.abs(cols - np.diag(n / kappa)))),
        "degree_sum": float(abs(sum(d * d for d in ct.degrees) - n)),
    }


def regular_character_check(g: Group, ct: CharacterTable, tol: float = ORTHO_TOL) -> bool:
    """Regular representation: sum_k d_k chi_k is |G| at the identity and 0 elsewhere."""
    reg = np.array(ct.degrees, dtype=float) @ ct.chi
    expected = np.zeros(len(reg))
    expected[0] = g.order
    return bool(np.max(np.abs(reg - expected)) < tol)


def export_character_table(g: Group, cs: ClassSet, ct: CharacterTable) -> str:
    lines = [f"# character table of {g.name or 'group'} (order {g.order})",
             "classes:"]
    for i, rep in enumerate(cs.representatives):
        lines.append(f"  - index: {i}\n    representative: {g.labels[rep]!r}\n    size: {cs.sizes[i]}")
    lines.append("characters:")
    for r, row in enumerate(ct.chi):
        entries = ", ".join(f"[{_fmt(z.real)}, {_fmt(z.imag)}]" for z in row)
        lines.append(f"  - degree: {ct.degrees[r]}\n    values: [{entries}]")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0
    return f"{x:.12g}"
