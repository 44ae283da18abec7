"""Coupling synthesis and spectral evaluation of perfect state transfer.

Plans are stored in the *amplitude* convention, where the single-excitation
Hamiltonian is ``H' = sum_i J_i A_i`` and the constant identity shift is
dropped. The spin Hamiltonian restricted to that sector is
``2 sum_i J_i A_i + c I``, so the *physical* convention carries ``J / 2``;
:meth:`CouplingPlan.physical` converts.

For a central target ``alpha_m`` the phase-matching condition is

    t0 * (P J)_k = theta_k - phi - 2 pi l_k,   theta_k = arg(chi_k(alpha_m) / d_k)

and inverting ``P`` with ``P Q = N I`` gives ``J = Q v / N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (GaugeInconsistency, IncompatiblePlans, InvalidParameter, NoPstTarget,
                     NoSingletonClass, SearchExhausted)
from .groups import conjugacy_classes, direct_product, product_class_index
from .scheme import GroupScheme, build_scheme

TWO_PI = 2.0 * np.pi
REAL_TOL = 1e-10
PHASE_TOL = 1e-9
ZERO_TOL = 1e-9
DUST = 1e-12  # synthesized couplings below this are roundoff

AMPLITUDE = "amplitude"
PHYSICAL = "physical"


@dataclass(frozen=True)
class Gauge:
    phi: float
    l: tuple[int, ...]
    theta: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class CouplingPlan:
    couplings: np.ndarray
    t0: float
    target: int
    gauge: Gauge
    convention: str = AMPLITUDE
    group_hash: str = ""

    def __post_init__(self):
        self.couplings.setflags(write=False)

    def amplitude_couplings(self) -> np.ndarray:
        return self.couplings if self.convention == AMPLITUDE else 2.0 * self.couplings

    def physical(self) -> CouplingPlan:
        if self.convention == PHYSICAL:
            return self
        return replace(self, couplings=self.couplings / 2.0, convention=PHYSICAL)

    def amplitude(self) -> CouplingPlan:
        if self.convention == AMPLITUDE:
            return self
        return replace(self, couplings=self.couplings * 2.0, convention=AMPLITUDE)

    def nonzero(self, tol: float = ZERO_TOL) -> list[int]:
        return [i for i, j in enumerate(self.couplings) if abs(j) > tol]

    def with_couplings(self, couplings) -> CouplingPlan:
        return replace(self, couplings=np.array(couplings, dtype=float))


@dataclass
class TransferReport:
    times: np.ndarray
    amplitudes: np.ndarray
    t0: float
    target: int
    peak: float
    phase: float
    fidelity: float
    tol: float
    thetas: np.ndarray
    unitarity_residual: float

    @property
    def passed(self) -> bool:
        return 1.0 - self.peak < self.tol

    def trace_csv(self) -> str:
        from .formats import num

        rows = ["t,re,im,abs2"]
        for t, f in zip(self.times, self.amplitudes):
            rows.append(f"{num(t)!r},{num(f.real)!r},{num(f.imag)!r},{num(abs(f) ** 2)!r}")
        return "\n".join(rows) + "\n"


# -- targets and phases -------------------------------------------------------


def check_target(s: GroupScheme, m: int) -> None:
    if not 0 <= m < len(s):
        raise NoPstTarget(f"class index {m} outside 0..{s.diameter}")
    if m == 0:
        raise NoPstTarget("the identity class is the source, not a target")
    if s.valencies[m] != 1:
        raise NoPstTarget(f"class {m} has {s.valencies[m]} elements; a target must be a singleton")
    z = s.representative(m)
    g = s.group
    if not np.array_equal(g.mul[z], g.mul[:, z]):
        raise NoPstTarget(f"class {m} representative is not central")


def available_targets(s: GroupScheme) -> list[int]:
    out = []
    for m in range(1, len(s)):
        try:
            check_target(s, m)
        except NoPstTarget:
            continue
        out.append(m)
    return out


def target_phases(s: GroupScheme, m: int) -> np.ndarray:
    """``theta_k = arg(chi_k(alpha_m) / d_k)`` in ``[0, 2 pi)``, one per eigenspace."""
    ct = s.characters
    c = s.classes.class_of[s.representative(m)]
    out = []
    for rows in s.char_groups:
        r = rows[0]
        ratio = ct.chi[r, c] / ct.degrees[r]
        out.append(_wrap(np.angle(ratio)))
    return np.array(out)


def _wrap(x):
    y = np.mod(x, TWO_PI)
    # values a hair below 2 pi belong at 0
    return np.where(np.abs(y - TWO_PI) < 1e-12, 0.0, y)


# -- synthesis ----------------------------------------------------------------


def synthesize_couplings(s: GroupScheme, m: int, t0: float = 1.0, phi: float = 0.0,
                         l: Sequence[int] | None = None) -> CouplingPlan:
    check_target(s, m)
    if not t0 > 0:
        raise InvalidParameter(f"t0 must be positive, got {t0}")
    size = len(s)
    l = tuple(int(x) for x in (l if l is not None else [0] * size))
    if len(l) != size:
        raise InvalidParameter(f"gauge vector needs {size} entries, got {len(l)}")
    theta = target_phases(s, m)
    v = (theta - phi - TWO_PI * np.array(l)) / t0
    J = s.Q @ v / s.order
    if np.max(np.abs(J.imag)) >= REAL_TOL:
        raise GaugeInconsistency(
            f"couplings have imaginary parts up to {np.max(np.abs(J.imag)):.3g}; "
            "the target phases admit no real solution (symmetrize the scheme first?)")
    J = np.where(np.abs(J.real) < DUST, 0.0, J.real)
    plan = CouplingPlan(couplings=np.ascontiguousarray(J), t0=float(t0), target=m,
                        gauge=Gauge(phi=float(phi), l=l, theta=tuple(float(x) for x in theta)),
                        group_hash=s.group.fingerprint())
    residual = phase_matching_residual(s, plan)
    if residual > PHASE_TOL:
        raise GaugeInconsistency(f"phase matching violated by {residual:.3g}")
    return plan


def phase_matching_residual(s: GroupScheme, plan: CouplingPlan) -> float:
    """Largest deviation of ``t0 (P J)_k`` from ``theta_k - phi`` modulo 2 pi."""
    lhs = plan.t0 * (s.P @ plan.amplitude_couplings())
    diff = lhs - (np.array(plan.gauge.theta) - plan.gauge.phi)
    diff = np.mod(diff.real + np.pi, TWO_PI) - np.pi
    return float(max(np.max(np.abs(diff)), np.max(np.abs(lhs.imag))))


# -- evaluation -----------------------------------------------------------------


def coupling_matrix(s: GroupScheme, couplings) -> np.ndarray:
    """``sum_i J_i A_i``."""
    return np.tensordot(np.asarray(couplings), s.adjacency.astype(float), axes=1)


def thetas(s: GroupScheme, couplings) -> np.ndarray:
    """Eigenvalue of ``sum_l J_l A_l`` on each irreducible character.

    For merged relations the class values enter as ``chi + conj(chi)``, so the
    two members of a conjugate pair always share a value.
    """
    ct = s.characters
    J = np.asarray(couplings, dtype=float)
    kappa = np.array(s.classes.sizes, dtype=float)
    deg = np.array(ct.degrees, dtype=float)
    out = np.zeros(len(ct), dtype=complex)
    for rel, grp in enumerate(s.class_groups):
        for c in grp:
            out += J[rel] * kappa[c] * ct.chi[:, c] / deg
    return out


def evolve_amplitude(s: GroupScheme, plan: CouplingPlan, t, *, vertex: int | None = None,
                     cls: int | None = None):
    """Transition amplitude from the identity vertex at time(s) ``t``.

    With ``vertex`` this is ``<beta| e^{-iH't} |e>``; with ``cls`` (default:
    the plan's target) it is the stratum amplitude ``<phi_l| e^{-iH't} |phi_0>``,
    which is ``sqrt(kappa_l)`` times the amplitude of any vertex in the class.
    """
    if vertex is not None and cls is not None:
        raise InvalidParameter("give either vertex or cls, not both")
    if vertex is None:
        cls = plan.target if cls is None else cls
        beta = s.representative(cls)
        scale = math.sqrt(s.valencies[cls])
    else:
        beta = int(vertex)
        scale = 1.0
    ct = s.characters
    c = s.classes.class_of[beta]
    theta = thetas(s, plan.amplitude_couplings())
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t_arr, theta))
    weights = np.array(ct.degrees, dtype=float) * ct.chi[:, c]
    return scale * (phases @ weights) / s.order


def spectral_amplitude(s: GroupScheme, plan: CouplingPlan, t, cls: int) -> np.ndarray:
    """Stratum amplitude from the eigenmatrices: ``sqrt(kappa) / N * sum_k e^{-it(PJ)_k} Q_{l* k}``."""
    eig = s.P @ plan.amplitude_couplings()
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t_arr, eig))
    return math.sqrt(s.valencies[cls]) * (phases @ s.Q[s.inverse_class(cls)]) / s.order


def all_class_amplitudes(s: GroupScheme, plan: CouplingPlan, t) -> np.ndarray:
    """Vertex amplitude for one representative of every class, shape ``t.shape + (d+1,)``."""
    return np.stack([evolve_amplitude(s, plan, t, vertex=s.representative(i))
                     for i in range(len(s))], axis=-1)


def unitarity_residual(s: GroupScheme, plan: CouplingPlan, t) -> float:
    amps = all_class_amplitudes(s, plan, t)
    total = np.abs(amps) ** 2 @ np.array(s.valencies, dtype=float)
    return float(np.max(np.abs(total - 1.0)))


def fidelity_bound(s: GroupScheme, m: int) -> float:
    """``(1/|G|) sum_k d_k |chi_k(alpha_m)|``, an upper bound on vertex transfer to class ``m``."""
    ct = s.characters
    c = s.classes.class_of[s.representative(m)]
    return float(np.dot(ct.degrees, np.abs(ct.chi[:, c])) / s.order)


def optimal_fidelity(s: GroupScheme, m: int) -> float:
    if not 0 <= m < len(s):
        raise InvalidParameter(f"class index {m} outside 0..{s.diameter}")
    if s.valencies[m] != 1:
        raise NoSingletonClass(f"class {m} has {s.valencies[m]} elements")
    return fidelity_bound(s, m)


def verify_pst(s: GroupScheme, plan: CouplingPlan, tol: float = 1e-9, *,
               samples: int = 201, span: float = 2.0) -> TransferReport:
    """Sample the target amplitude on ``[0, span * t0]``; ``t0`` is always a grid point."""
    times = np.linspace(0.0, span * plan.t0, samples)
    times = np.unique(np.append(times, plan.t0))
    amps = evolve_amplitude(s, plan, times)
    f0 = complex(evolve_amplitude(s, plan, plan.t0))
    return TransferReport(
        times=times, amplitudes=amps, t0=plan.t0, target=plan.target,
        peak=abs(f0), phase=float(np.angle(f0)), fidelity=abs(f0) ** 2, tol=tol,
        thetas=thetas(s, plan.amplitude_couplings()),
        unitarity_residual=unitarity_residual(s, plan, times))


# -- gauge search ---------------------------------------------------------------


def phase_grid(max_denominator: int = 8) -> list[Fraction]:
    """Multiples ``p/q`` of pi in ``[0, 2)`` with ``q <= max_denominator``, ascending."""
    return sorted({Fraction(p, q) for q in range(1, max_denominator + 1) for p in range(2 * q)})


def _gauge_setup(s, m, t0, max_l, max_box):
    check_target(s, m)
    if not t0 > 0:
        raise InvalidParameter(f"t0 must be positive, got {t0}")
    size = len(s)
    width = 2 * max_l + 1
    if width**size > max_box:
        raise InvalidParameter(f"gauge box has {width**size} points (> {max_box}); lower max_l")
    if np.max(np.abs(s.Q.imag)) > REAL_TOL:
        raise GaugeInconsistency("gauge search needs a symmetric scheme")
    # Q 1 = N e_0, so phi moves J_0 alone, by -phi / t0
    return target_phases(s, m), s.Q.real, width**size


def _scan(s, m, t0, max_l, max_denominator, allowed, max_box, chunk=1 << 17):
    """Yield ``(phi_over_pi, ls, J, nonzero, ok)`` blocks in lexicographic ``(phi, l)`` order."""
    theta, Q, total = _gauge_setup(s, m, t0, max_l, max_box)
    size = len(s)
    forbidden = _forbidden_mask(size, allowed)
    grid = phase_grid(max_denominator)
    blocks = []
    for start in range(0, total, chunk):
        ls = _box_chunk(start, min(total, start + chunk), size, max_l)
        J = (theta[None, :] - TWO_PI * ls) @ Q.T / (s.order * t0)
        nz = np.abs(J[:, 1:]) > ZERO_TOL
        blocks.append((ls, J, nz.sum(axis=1), np.any(nz & forbidden[None, 1:], axis=1)))
    for frac in grid:
        shift = float(frac) * np.pi / t0
        for ls, J, nz_rest, bad_rest in blocks:
            j0 = J[:, 0] - shift
            nz0 = np.abs(j0) > ZERO_TOL
            ok = ~bad_rest & ~(nz0 & forbidden[0])
            yield frac, ls, J, j0, nz_rest + nz0, ok


def search_gauge(s: GroupScheme, m: int, t0: float = 1.0, objective: str = "min-nonzero", *,
                 max_l: int = 4, max_denominator: int = 8,
                 allowed: Iterable[int] | None = None, max_box: int = 2_000_000) -> CouplingPlan:
    """Best gauge in the box ``|l_i| <= max_l`` over the phase grid.

    ``min-nonzero`` ranks by the number of nonzero couplings, then by total
    coupling strength ``sum |J_i|``; ``min-l1`` ranks by ``sum |l_i|``. Remaining
    ties go to the lexicographically smallest ``(phi, l)``. ``allowed``
    restricts which relations may carry a nonzero coupling.
    """
    if objective not in ("min-nonzero", "min-l1"):
        raise InvalidParameter(f"unknown objective {objective!r}")
    best_key, best = None, None
    for frac, ls, J, j0, nonzero, ok in _scan(s, m, t0, max_l, max_denominator, allowed, max_box):
        if not ok.any():
            continue
        if objective == "min-nonzero":
            primary = nonzero
            strength = np.abs(J[:, 1:]).sum(axis=1) + np.abs(j0)
            secondary = np.round(strength, 9)
        else:
            primary = np.abs(ls).sum(axis=1)
            secondary = np.zeros(len(ls))
        primary = np.where(ok, primary, np.iinfo(np.int64).max)
        top = primary.min()
        if best_key is not None and top > best_key[0]:
            continue
        # argmin returns the first hit, so box order breaks the remaining ties
        idx = int(np.argmin(np.where(primary == top, secondary, np.inf)))
        key = (int(top), float(secondary[idx]))
        if best_key is None or key < best_key:
            best_key = key
            best = (float(frac) * np.pi, tuple(int(x) for x in ls[idx]))
    if best is None:
        raise SearchExhausted(f"no gauge with |l_i| <= {max_l} satisfies the coupling constraints; "
                              "enlarge the box")
    return synthesize_couplings(s, m, t0, *best)


def sparse_plans(s: GroupScheme, m: int, t0: float = 1.0, max_nonzero: int = 2, *,
                 max_l: int = 4, max_denominator: int = 8,
                 allowed: Iterable[int] | None = None,
                 max_box: int = 2_000_000) -> list[CouplingPlan]:
    """All gauges in the search box giving at most ``max_nonzero`` nonzero couplings.

    Plans come back in lexicographic ``(phi, l)`` order. Distinct gauges always
    give distinct coupling vectors, since ``Q`` is invertible.
    """
    found = []
    theta = target_phases(s, m)
    theta_t = tuple(float(x) for x in theta)
    fingerprint = s.group.fingerprint()
    for frac, ls, J, j0, nonzero, ok in _scan(s, m, t0, max_l, max_denominator, allowed, max_box):
        hits = np.flatnonzero(ok & (nonzero <= max_nonzero))
        if not len(hits):
            continue
        phi = float(frac) * np.pi
        block = J[hits].copy()
        block[:, 0] = j0[hits]
        block[np.abs(block) < DUST] = 0.0
        # same phase-matching guard synthesize_couplings applies, one block at a time
        diff = t0 * block @ s.P.T.real - (theta - phi)
        diff = np.mod(diff + np.pi, TWO_PI) - np.pi
        if np.max(np.abs(diff)) > PHASE_TOL:
            raise GaugeInconsistency(f"phase matching violated by {np.max(np.abs(diff)):.3g}")
        for row, idx in zip(block, hits):
            found.append(CouplingPlan(couplings=row, t0=float(t0), target=m,
                                      gauge=Gauge(phi=phi, l=tuple(int(x) for x in ls[idx]),
                                                  theta=theta_t),
                                      group_hash=fingerprint))
    return found


def _forbidden_mask(size, allowed):
    forbidden = np.zeros(size, dtype=bool)
    if allowed is not None:
        allowed = set(int(i) for i in allowed)
        bad = [i for i in allowed if not 0 <= i < size]
        if bad:
            raise InvalidParameter(f"allowed relations {bad} outside 0..{size - 1}")
        forbidden[[i for i in range(size) if i not in allowed]] = True
    return forbidden


def _box_chunk(start: int, stop: int, size: int, max_l: int) -> np.ndarray:
    width = 2 * max_l + 1
    idx = np.arange(start, stop)
    digits = np.empty((len(idx), size), dtype=np.int64)
    for pos in range(size - 1, -1, -1):
        idx, digits[:, pos] = np.divmod(idx, width)
    return digits - max_l


# -- products -------------------------------------------------------------------


def product_plan(s1: GroupScheme, plan1: CouplingPlan, s2: GroupScheme,
                 plan2: CouplingPlan, *, check_times: int = 10) -> tuple[GroupScheme, CouplingPlan]:
    """Plan on ``G1 x G2`` whose evolution is the tensor product of the two factors.

    Relation ``(i, 0)`` carries ``J1_i``, ``(0, j)`` carries ``J2_j`` and the
    identity relation carries ``J1_0 + J2_0``.
    """
    if not math.isclose(plan1.t0, plan2.t0, rel_tol=0, abs_tol=1e-12):
        raise IncompatiblePlans(f"transfer times differ: {plan1.t0} vs {plan2.t0}")
    if s1.merged or s2.merged:
        raise IncompatiblePlans("products of symmetrized schemes are not supported")
    g12 = direct_product(s1.group, s2.group)
    cs12 = conjugacy_classes(g12)
    s12 = build_scheme(g12, seed=s1.characters.seed, classes=cs12)
    n2 = s2.order
    J1, J2 = plan1.amplitude_couplings(), plan2.amplitude_couplings()
    J = np.zeros(len(s12))
    for i, j in enumerate(J1):
        J[product_class_index(s1.classes, s2.classes, cs12, n2, i, 0)] += j
    for k, j in enumerate(J2):
        J[product_class_index(s1.classes, s2.classes, cs12, n2, 0, k)] += j
    target = product_class_index(s1.classes, s2.classes, cs12, n2, plan1.target, plan2.target)
    t0 = plan1.t0

    theta = target_phases(s12, target)
    phi = float(_wrap(plan1.gauge.phi + plan2.gauge.phi))
    v = (s12.P @ J).real
    l_real = (theta - phi - t0 * v) / TWO_PI
    l = np.rint(l_real)
    if np.max(np.abs(l - l_real)) > 1e-6:
        raise IncompatiblePlans("product couplings do not satisfy phase matching")
    plan = CouplingPlan(couplings=J, t0=t0, target=target,
                        gauge=Gauge(phi=phi, l=tuple(int(x) for x in l),
                                    theta=tuple(float(x) for x in theta)),
                        group_hash=g12.fingerprint())

    times = np.linspace(0.0, 2.0 * t0, check_times)
    t1, t2 = plan1.target, plan2.target
    z1, z2 = s1.representative(t1), s2.representative(t2)
    f1 = evolve_amplitude(s1, plan1.amplitude(), times, vertex=z1)
    f2 = evolve_amplitude(s2, plan2.amplitude(), times, vertex=z2)
    f12 = evolve_amplitude(s12, plan, times, vertex=z1 * n2 + z2)
    if np.max(np.abs(f12 - f1 * f2)) > 1e-9:
        raise IncompatiblePlans("product amplitude does not factorize")
    return s12, plan


# -- plan files -----------------------------------------------------------------

PLAN_FORMAT = "gaspst-plan"
PLAN_VERSION = 1


def plan_to_dict(plan: CouplingPlan, **extra) -> dict:
    """JSON-ready plan; phases are given both in radians and in units of pi."""
    from .formats import in_pi, num, real_list

    out = {
        "format": PLAN_FORMAT,
        "version": PLAN_VERSION,
        "convention": plan.convention,
        "group_hash": plan.group_hash,
        "target": plan.target,
        "t0": num(plan.t0),
        "couplings": real_list(plan.couplings),
        "couplings_over_pi": [in_pi(x) for x in plan.couplings],
        "gauge": {
            "phi": num(plan.gauge.phi),
            "phi_over_pi": in_pi(plan.gauge.phi),
            "l": list(plan.gauge.l),
            "theta": real_list(plan.gauge.theta),
            "theta_over_pi": [in_pi(x) for x in plan.gauge.theta],
        },
    }
    out.update(extra)
    return out


def plan_from_dict(data: dict) -> CouplingPlan:
    try:
        if data.get("format") != PLAN_FORMAT:
            raise InvalidParameter(f"not a plan file (format {data.get('format')!r})")
        if data.get("version") != PLAN_VERSION:
            raise InvalidParameter(f"unsupported plan version {data.get('version')!r}")
        convention = data["convention"]
        if convention not in (AMPLITUDE, PHYSICAL):
            raise InvalidParameter(f"unknown convention {convention!r}")
        gauge = data["gauge"]
        return CouplingPlan(
            couplings=np.array(data["couplings"], dtype=float),
            t0=float(data["t0"]), target=int(data["target"]),
            gauge=Gauge(phi=float(gauge["phi"]), l=tuple(int(x) for x in gauge["l"]),
                        theta=tuple(float(x) for x in gauge["theta"])),
            convention=convention, group_hash=str(data["group_hash"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParameter):
            raise
        raise InvalidParameter(f"malformed plan file: {exc!r}") from None
