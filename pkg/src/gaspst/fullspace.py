"""Brute-force spin and qudit Hamiltonians on the group's vertex set.

Each vertex carries a D-level system. With generators normalized to
``tr(lambda_a lambda_b) = 2 delta_ab``, the Hamiltonian is

    H = sum_l J_l sum_{{i,j} in R_l} lambda^(i) . lambda^(j)

where every unordered pair is counted once and the identity relation
contributes the on-site Casimir ``lambda^(i) . lambda^(i) = 2 (D^2 - 1) / D``.
Couplings are taken in the physical convention (half the amplitude-form
values).

On the single-excitation sector spanned by ``|nu_a>`` (level ``nu`` at site
``a``, ground level elsewhere), using ``lambda^(i).lambda^(j) = 2 SWAP - 2/D``,
the restriction is

    2 sum_{l>=1} J_l A_l + [ sum_{l>=1} J_l kappa_l ((N-2)D - N)/D
                             + J_0 * 2N(D^2-1)/D ] I

which differs from the closed-form sector matrices only by a multiple of the
identity; :func:`identity_shift` gives that multiple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import InvalidParameter, InvalidState, SizeLimit
from .pst import CouplingPlan, coupling_matrix
from .scheme import GroupScheme

DEFAULT_CAP = 2**13
HERMITIAN_TOL = 1e-12
CONSERVATION_TOL = 1e-10
SECTOR_TOL = 1e-10
TRANSFER_TOL = 1e-8
EIGH_MAX = 1024


def gell_mann(D: int) -> np.ndarray:
    """Generalized Gell-Mann matrices, shape ``(D^2 - 1, D, D)``.

    Order: symmetric off-diagonal, antisymmetric off-diagonal, then the
    ``D - 1`` diagonal ones. At ``D = 2`` this is ``(X, Y, Z)``.
    """
    if D < 2:
        raise InvalidParameter(f"need at least 2 levels, got {D}")
    sym, anti, diag = [], [], []
    for j in range(D):
        for k in range(j + 1, D):
            m = np.zeros((D, D), dtype=complex)
            m[j, k] = m[k, j] = 1
            sym.append(m)
            m = np.zeros((D, D), dtype=complex)
            m[j, k], m[k, j] = -1j, 1j
            anti.append(m)
    for k in range(1, D):
        m = np.zeros((D, D), dtype=complex)
        m[np.arange(k), np.arange(k)] = 1
        m[k, k] = -k
        diag.append(m * np.sqrt(2.0 / (k * (k + 1))))
    return np.array(sym + anti + diag)


def cartan_diagonals(D: int) -> np.ndarray:
    """Diagonals of the ``D - 1`` commuting generators, shape ``(D - 1, D)``."""
    return np.real(np.array([np.diag(m) for m in gell_mann(D)[-(D - 1):]]))


@dataclass(frozen=True, eq=False)
class FullHamiltonian:
    matrix: np.ndarray
    levels: int
    sites: int
    couplings: np.ndarray  # physical convention
    coupling_matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def basis_index(self, site: int, level: int) -> int:
        """Index of the state with ``level`` at ``site`` and ground level elsewhere."""
        return level * self.levels ** (self.sites - 1 - site)


def build_full_hamiltonian(s: GroupScheme, plan: CouplingPlan, D: int = 2, *,
                           cap: int = DEFAULT_CAP) -> FullHamiltonian:
    """Assemble H on ``D ** |G|`` states; amplitude-form plans are halved first."""
    if D < 2:
        raise InvalidParameter(f"need at least 2 levels, got {D}")
    n = s.order
    dim = D**n
    if dim > cap:
        raise SizeLimit(f"{D}^{n} = {dim} states exceeds the cap of {cap}")
    J = plan.physical().couplings
    K = _coupling_matrix(s, J)

    gens = [sp.csr_matrix(g) for g in gell_mann(D)]
    site_ops = [[_on_site(g, i, n, D) for g in gens] for i in range(n)]
    H = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            if K[i, j] == 0:
                continue
            term = sum(a @ b for a, b in zip(site_ops[i], site_ops[j]))
            H = H + K[i, j] * term
    H = H.toarray()
    if np.max(np.abs(H.imag), initial=0.0) == 0.0:
        H = np.ascontiguousarray(H.real)
    return FullHamiltonian(matrix=H, levels=D, sites=n, couplings=np.array(J), coupling_matrix=K)


def _coupling_matrix(s, J):
    K = coupling_matrix(s, J)
    if not np.array_equal(K, K.T):
        raise InvalidParameter("coupling matrix is not symmetric; relations i and i* "
                               "need equal couplings")
    return K


def _on_site(op, site, n, D):
    left = sp.identity(D**site, format="csr")
    right = sp.identity(D ** (n - site - 1), format="csr")
    return sp.kron(sp.kron(left, op), right, format="csr")


def hermitian_residual(h: FullHamiltonian) -> float:
    H = h.matrix
    return float(np.max(np.abs(H - H.conj().T)))


def conservation_residuals(h: FullHamiltonian, block: int = 512) -> list[float]:
    """Max-norm of ``[sum_i h_k^(i), H]`` for every diagonal generator ``h_k``.

    The total generator is diagonal, so the commutator is ``(z_a - z_b) H_ab``.
    """
    digits = _digits(h.dimension, h.sites, h.levels)
    out = []
    for diag in cartan_diagonals(h.levels):
        z = diag[digits].sum(axis=1)
        worst = 0.0
        for start in range(0, h.dimension, block):
            rows = h.matrix[start:start + block]
            c = (z[start:start + block, None] - z[None, :]) * rows
            worst = max(worst, float(np.max(np.abs(c))))
        out.append(worst)
    return out


def _digits(dim, n, D):
    idx = np.arange(dim)
    digits = np.empty((dim, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        idx, digits[:, pos] = np.divmod(idx, D)
    return digits


def restrict_single_excitation(h: FullHamiltonian, nu: int = 1) -> np.ndarray:
    if not 1 <= nu <= h.levels - 1:
        raise InvalidParameter(f"level {nu} outside 1..{h.levels - 1}")
    idx = [h.basis_index(a, nu) for a in range(h.sites)]
    return h.matrix[np.ix_(idx, idx)].copy()


def local_sector_matrix(s: GroupScheme, plan: CouplingPlan, D: int = 2,
                        nu: int = 1) -> tuple[np.ndarray, float]:
    """Single-excitation block built term by term, without the full matrix.

    Each pair term ``sum_a lambda_a (x) lambda_a`` (or the on-site Casimir for
    the identity relation) acts on the two affected digits of ``|nu_b>``.
    Returns the ``N x N`` block and the largest amplitude that left the sector.
    """
    if not 1 <= nu <= D - 1:
        raise InvalidParameter(f"level {nu} outside 1..{D - 1}")
    gens = gell_mann(D)
    pair_op = sum(np.kron(g, g) for g in gens)
    site_op = sum(g @ g for g in gens)
    K = _coupling_matrix(s, plan.physical().couplings)
    n = s.order
    block = np.zeros((n, n), dtype=complex)
    leak = 0.0

    def land(b, changed, amp):
        # changed: {site: new digit}; find where the excitation ends up
        digits = {b: nu}
        digits.update(changed)
        excited = [(site, d) for site, d in digits.items() if d]
        if len(excited) == 1 and excited[0][1] == nu:
            block[excited[0][0], b] += amp
            return 0.0
        return abs(amp)

    for b in range(n):
        for i in range(n):
            if K[i, i] != 0:
                d = nu if i == b else 0
                for d_new in np.flatnonzero(site_op[:, d]):
                    leak = max(leak, land(b, {i: int(d_new)}, K[i, i] * site_op[d_new, d]))
            for j in range(i + 1, n):
                if K[i, j] == 0:
                    continue
                col = pair_op[:, (nu if i == b else 0) * D + (nu if j == b else 0)]
                for idx in np.flatnonzero(col):
                    ei, ej = divmod(int(idx), D)
                    leak = max(leak, land(b, {i: ei, j: ej}, K[i, j] * col[idx]))
    return block, leak


def closed_form_constant(n: int, D: int) -> float:
    """Coefficient of ``sum_l J_l kappa_l`` in the closed-form sector matrix."""
    if D == 2:
        return (n - 4) / 2
    return ((n - 2) * D - 4 * n) / (2 * D)


def closed_form_sector(s: GroupScheme, plan: CouplingPlan, D: int = 2) -> np.ndarray:
    """``2 sum_l J_l A_l + c(N, D) sum_l J_l kappa_l I`` with physical couplings."""
    J = plan.physical().couplings
    kappa = np.array(s.valencies, dtype=float)
    c = closed_form_constant(s.order, D)
    return 2 * coupling_matrix(s, J) + c * float(J @ kappa) * np.eye(s.order)


def derived_sector_constant(s: GroupScheme, plan: CouplingPlan, D: int = 2) -> float:
    """Identity coefficient of the restriction after removing ``2 sum_{l>=1} J_l A_l``."""
    J = plan.physical().couplings
    kappa = np.array(s.valencies, dtype=float)
    n = s.order
    rest = float(J[1:] @ kappa[1:])
    return rest * ((n - 2) * D - n) / D + J[0] * 2 * n * (D * D - 1) / D


def identity_shift(s: GroupScheme, plan: CouplingPlan, D: int = 2) -> float:
    """``restriction - closed_form_sector`` as a multiple of the identity."""
    J = plan.physical().couplings
    kappa = np.array(s.valencies, dtype=float)
    closed = 2 * J[0] + closed_form_constant(s.order, D) * float(J @ kappa)
    return derived_sector_constant(s, plan, D) - closed


def sector_residual(h: FullHamiltonian, s: GroupScheme, plan: CouplingPlan, nu: int = 1) -> float:
    """Entrywise distance between the restriction and the shifted closed form."""
    restricted = restrict_single_excitation(h, nu)
    expected = closed_form_sector(s, plan, h.levels)
    expected += identity_shift(s, plan, h.levels) * np.eye(s.order)
    return float(np.max(np.abs(restricted - expected)))


def evolve(h: FullHamiltonian, psi0: np.ndarray, t: float) -> np.ndarray:
    if h.dimension <= EIGH_MAX:
        w, v = np.linalg.eigh(h.matrix)
        return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0))
    # the operator is very sparse; Krylov steps on a CSR copy are far cheaper
    return expm_multiply(-1j * t * sp.csr_matrix(h.matrix), psi0.astype(complex))


@dataclass
class FullTransferReport:
    alpha: complex
    beta: complex
    source: int
    target: int
    t0: float
    alpha_out: complex
    beta_out: complex
    leakage: float
    relative_phase: float
    tol: float

    @property
    def passed(self) -> bool:
        return (abs(abs(self.beta_out) - abs(self.beta)) < self.tol
                and abs(abs(self.alpha_out) - abs(self.alpha)) < self.tol
                and self.leakage < self.tol)

    def as_dict(self) -> dict:
        from .formats import complex_list, in_pi, num

        return {
            "alpha": complex_list(self.alpha), "beta": complex_list(self.beta),
            "source": self.source, "target": self.target, "t0": num(self.t0),
            "alpha_out": complex_list(self.alpha_out), "beta_out": complex_list(self.beta_out),
            "leakage": num(self.leakage), "relative_phase_over_pi": in_pi(self.relative_phase),
            "passed": self.passed,
        }


def full_transfer_check(h: FullHamiltonian, alpha: complex, beta: complex, source: int,
                        target: int, t0: float, *, level: int = 1,
                        tol: float = TRANSFER_TOL) -> FullTransferReport:
    """Evolve ``alpha|0..0> + beta|level at source>`` and inspect the target site."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise InvalidState(f"|alpha|^2 + |beta|^2 = {norm}, expected 1")
    if not 1 <= level <= h.levels - 1:
        raise InvalidParameter(f"level {level} outside 1..{h.levels - 1}")
    psi = np.zeros(h.dimension, dtype=complex)
    psi[0] += alpha
    psi[h.basis_index(source, level)] += beta
    out = evolve(h, psi, t0)
    b_idx = h.basis_index(target, level)
    a_out, b_out = complex(out[0]), complex(out[b_idx])
    rest = out.copy()
    rest[[0, b_idx]] = 0
    leakage = float(np.max(np.abs(rest)))
    phase = 0.0
    if abs(alpha) > tol and abs(beta) > tol and abs(a_out) > tol and abs(b_out) > tol:
        phase = float(np.angle((b_out / beta) / (a_out / alpha)))
    return FullTransferReport(alpha=complex(alpha), beta=complex(beta), source=source,
                              target=target, t0=t0, alpha_out=a_out, beta_out=b_out,
                              leakage=leakage, relative_phase=phase, tol=tol)


def oracle_report(h: FullHamiltonian, s: GroupScheme, plan: CouplingPlan,
                  transfer: FullTransferReport | None = None) -> dict:
    from .formats import num

    out = {
        "levels": h.levels, "sites": h.sites, "dimension": h.dimension,
        "hermitian_residual": num(hermitian_residual(h)),
        "conservation_residuals": [num(x) for x in conservation_residuals(h)],
        "sector_residuals": {str(nu): num(sector_residual(h, s, plan, nu))
                             for nu in range(1, h.levels)},
        "identity_shift": num(identity_shift(s, plan, h.levels)),
    }
    if transfer is not None:
        out["transfer"] = transfer.as_dict()
    return out
