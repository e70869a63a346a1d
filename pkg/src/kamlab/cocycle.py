"""Quasiperiodic SL(2,R) cocycle dynamics.

Iteration, Lyapunov exponents, the fibered rotation number by
continuous-angle tracking of the projective orbit, boundedness diagnostics,
discrete Schrodinger cocycles, and topological-degree bookkeeping.  The hot
orbit loops live in :mod:`kamlab.kernels`; matrix norms are spectral
(2-norm) throughout, phases are sampled on the orbit of 0 plus seeded
random starts, and overflowing products switch to log-scale accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateB, NotHomotopicToIdentity
from .fourier import (
    M_CHANGE,
    M_CHANGE_INV,
    TrigPoly,
    compose_conjugate,
    exp_poly,
    rot_mat,
)

__all__ = [
    "CocycleSpec",
    "RotationEstimate",
    "SchrodingerParams",
    "HalfRotation",
    "iterate",
    "lyapunov_estimate",
    "rotation_number",
    "boundedness_metric",
    "schrodinger_cocycle",
    "degree_shift_check",
    "conjugate_by_half_rotation",
    "rotation_cocycle",
    "free_rotation_number",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CocycleSpec:
    """Frequency vector plus an SL(2,R)-valued generator series."""

    alpha: np.ndarray
    generator: TrigPoly
    homotopy_class: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        if self.alpha.shape != (self.generator.dim,):
            raise ValueError("alpha length must match the generator dimension")

    def compiled(self):
        kmat, vals = self.generator.arrays()
        return kmat.astype(np.int64), vals.astype(np.complex128)

    def value(self, phi):
        return np.real(self.generator.evaluate(phi))

    def det_defect(self, grid=24):
        vals = self.generator.evaluate_grid(grid)
        dets = (vals[..., 0, 0] * vals[..., 1, 1] - vals[..., 0, 1] * vals[..., 1, 0])
        return float(np.max(np.abs(dets - 1.0)))


@dataclass(frozen=True)
class RotationEstimate:
    value: float
    iterations: int
    phase_samples: int
    error_budget: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.value < 1:
            object.__setattr__(self, "value", self.value % 1.0)
        if self.error_budget <= 0:
            raise ValueError("error budget must be positive")


@dataclass(frozen=True)
class SchrodingerParams:
    """Energy, coupling, analytic potential, and an operator phase."""

    E: float
    lam: float
    v: TrigPoly
    phase: tuple = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("coupling must be >= 0")
        if self.v.is_matrix:
            raise ValueError("potential must be scalar-valued")


def rotation_cocycle(alpha, rho, dim=None):
    """Constant rotation cocycle R_rho."""
    alpha = np.asarray(alpha, dtype=float)
    d = len(alpha) if dim is None else dim
    gen = TrigPoly.constant(d, rot_mat(rho).astype(complex), "SL2-real")
    return CocycleSpec(alpha, gen)


def _phases(alpha, n_samples, seed):
    """Orbit-of-zero points plus up to 8 seeded uniform starts."""
    alpha = np.asarray(alpha, dtype=float)
    n_rand = min(8, max(0, n_samples - 1))
    n_orbit = n_samples - n_rand
    pts = [(k * alpha) % 1.0 for k in range(n_orbit)]
    if n_rand:
        rng = np.random.default_rng(seed)
        pts.extend(rng.uniform(size=(n_rand, len(alpha))))
    return np.asarray(pts)


def iterate(c: CocycleSpec, phi, n: int):
    """Ordered product A^(n)(phi); A^(0) = I and negative n inverts."""
    phi = np.asarray(phi, dtype=float)
    if n == 0:
        return np.eye(2)
    if n < 0:
        base = (phi + n * c.alpha) % 1.0
        fwd = iterate(c, base, -n)
        return np.linalg.inv(fwd)
    out = np.eye(2)
    p = phi.copy()
    for _ in range(n):
        out = c.value(p) @ out
        p = (p + c.alpha) % 1.0
    return out


def lyapunov_estimate(c: CocycleSpec, n: int, samples: int = 9, seed: int = 0):
    """Phase-averaged (1/n) log ||A^(n)|| with renormalized products."""
    if n < 1 or samples < 1:
        raise ValueError("need n >= 1 and samples >= 1")
    kmat, cmat = c.compiled()
    acc = 0.0
    for phi in _phases(c.alpha, samples, seed):
        acc += kernels.lyapunov_orbit(kmat, cmat, c.alpha, np.asarray(phi), n)
    return acc / samples


def _winding(c: CocycleSpec, axis, npts=256):
    angles = kernels.winding_samples(*c.compiled(), axis, npts, len(c.alpha))
    closed = np.append(angles, angles[0])
    diffs = np.diff(closed)
    diffs -= TWO_PI * np.round(diffs / TWO_PI)
    return float(diffs.sum() / TWO_PI)


def check_homotopic_to_identity(c: CocycleSpec, npts=256, tol=0.25):
    for axis in range(len(c.alpha)):
        w = _winding(c, axis, npts)
        if abs(w) > tol:
            raise NotHomotopicToIdentity(
                f"winding {w:.3f} along axis {axis} is nonzero")
    return True


def rotation_number(c: CocycleSpec, n: int, phase_samples: int = 9,
                    seed: int = 0, fold: bool = False,
                    budget_constant: float = 2.0) -> RotationEstimate:
    """Fibered rotation number by continuous-angle orbit tracking.

    Per-step increments are folded into (-1/2, 1/2]; the heuristic budget is
    budget_constant/n plus the spread across phase samples.  With fold=True
    the value is reduced to [0, 1/2] (Schrodinger convention).
    """
    check_homotopic_to_identity(c)
    kmat, cmat = c.compiled()
    vals = []
    for phi in _phases(c.alpha, phase_samples, seed):
        total = kernels.track_rotation(kmat, cmat, c.alpha, np.asarray(phi), 0.0, n)
        vals.append(total / n)
    vals = np.array(vals)
    # align the sample values on a common branch before averaging
    ref = vals[0]
    vals -= np.round(vals - ref)
    value = float(np.mean(vals)) % 1.0
    spread = float(np.max(vals) - np.min(vals))
    if fold:
        value = min(value, 1.0 - value)
    budget = budget_constant / n + spread + 1e-12
    return RotationEstimate(value, n, len(vals), budget, seed)


def boundedness_metric(c: CocycleSpec, N: int, phase_samples: int = 9, seed: int = 0):
    """(sup norm over n <= N and sampled phases, attaining n, overflow flag)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    kmat, cmat = c.compiled()
    best_log, best_n, over = 0.0, 0, False
    for phi in _phases(c.alpha, phase_samples, seed):
        log_sup, argmax, flag = kernels.bounded_orbit(
            kmat, cmat, c.alpha, np.asarray(phi), N)
        if log_sup > best_log:
            best_log, best_n = log_sup, int(argmax)
        over = over or bool(flag)
    return math.exp(best_log), best_n, over


def schrodinger_cocycle(p: SchrodingerParams, alpha) -> CocycleSpec:
    """Transfer cocycle [[E - lam v, -1], [1, 0]] over the torus rotation.

    The factored form (constant part, nilpotent exponent) used by the
    energy-scan pipeline is available via schrodinger_factored.
    """
    d = p.v.dim
    one = TrigPoly.constant(d, 1.0)
    a00 = TrigPoly.constant(d, p.E) - p.v * p.lam
    gen = TrigPoly.from_entries(a00, one * -1.0, one, one * 0.0, reality="SL2-real")
    return CocycleSpec(np.asarray(alpha, dtype=float), gen)


def schrodinger_factored(p: SchrodingerParams):
    """(A0, X) with A0 = [[E, -1], [1, 0]] and generator = A0 e^(X),
    X = lam v [[0, 0], [1, 0]]."""
    A0 = np.array([[p.E, -1.0], [1.0, 0.0]])
    low = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    X = (p.v * p.lam) @ low
    return A0, X


def free_rotation_number(E):
    """Rotation number of the free cocycle [[E, -1], [1, 0]]: 2 cos(2 pi rho) = E."""
    if abs(E) >= 2:
        return 0.0 if E > 0 else 0.5
    return math.acos(E / 2.0) / TWO_PI


# ---------------------------------------------------------------------------
# degree bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfRotation:
    """The chart-free conjugation R_(<dvec, phi>/2), degree dvec.

    Not a torus-periodic matrix function itself (it closes up only in the
    projective quotient); conjugation by it maps integer-mode series to
    integer-mode series, implemented by mode translation in the
    rotation-diagonalizing basis.
    """

    dvec: tuple

    def degree(self):
        return tuple(int(x) for x in self.dvec)


def _translate_modes(f: TrigPoly, shift):
    out = {}
    for k, v in f.coeffs.items():
        out[tuple(a + b for a, b in zip(k, shift))] = v
    return TrigPoly._raw(f.dim, out, "complex-scalar", f.debt, f.is_matrix)


def conjugate_by_half_rotation(A: TrigPoly, dvec, alpha):
    """B(. + alpha) A B(.)^{-1} for B = R_(<dvec, .>/2), exactly.

    In the rotation-diagonalizing basis the conjugation multiplies the
    diagonal by constant phases e^(-+ pi i <d, alpha>) and translates the
    off-diagonal modes by -+ d, so the result is again an integer-mode
    series.
    """
    dvec = tuple(int(x) for x in dvec)
    alpha = np.asarray(alpha, dtype=float)
    phase = math.pi * float(np.dot(dvec, alpha))
    em = complex(math.cos(phase), -math.sin(phase))  # e^{-i pi <d, alpha>}
    ep = em.conjugate()
    Am = (M_CHANGE @ A) @ M_CHANGE_INV
    a00 = Am.entry(0, 0) * em
    a01 = _translate_modes(Am.entry(0, 1), tuple(-x for x in dvec)) * em
    a10 = _translate_modes(Am.entry(1, 0), dvec) * ep
    a11 = Am.entry(1, 1) * ep
    inner = TrigPoly.from_entries(a00, a01, a10, a11)
    return (M_CHANGE_INV @ inner) @ M_CHANGE


def _polar_winding(B: TrigPoly, axis, npts=256):
    """Winding (in turns) of the rotation part of B along a generator circle."""
    ts = np.arange(npts) / npts
    pts = np.zeros((npts, B.dim))
    pts[:, axis] = ts
    vals = np.real(B.evaluate_many(pts))
    ang = np.arctan2(vals[:, 1, 0] - vals[:, 0, 1], vals[:, 0, 0] + vals[:, 1, 1])
    closed = np.append(ang, ang[0])
    diffs = np.diff(closed)
    diffs -= TWO_PI * np.round(diffs / TWO_PI)
    return float(diffs.sum() / TWO_PI)


@dataclass
class DegreeShiftReport:
    degree: tuple
    winding: tuple
    rho_base: RotationEstimate
    rho_conj: RotationEstimate
    predicted_shift: float
    measured_shift: float
    within_budget: bool
    extras: dict = field(default_factory=dict)


def degree_shift_check(B, c: CocycleSpec, n=200_000, phase_samples=9,
                       seed=0) -> DegreeShiftReport:
    """Estimate deg(B) by winding and verify the rotation-number shift.

    The conjugated cocycle's rotation number must equal the base one plus
    (1/2) <deg B, alpha> mod 1, within the combined error budgets.
    """
    alpha = c.alpha
    if isinstance(B, HalfRotation):
        deg = B.degree()
        winding = tuple(d / 2.0 for d in deg)
        conj_gen = conjugate_by_half_rotation(c.generator, deg, alpha)
    else:
        winding = tuple(_polar_winding(B, ax) for ax in range(B.dim))
        deg = tuple(int(round(2 * w)) for w in winding)
        if any(abs(2 * w - d) > 0.1 for w, d in zip(winding, deg)):
            raise DegenerateB(f"winding {winding} is not near a half-integer vector")
        conj_gen = compose_conjugate(B, c.generator, alpha)
    rho0 = rotation_number(c, n, phase_samples, seed)
    rho1 = rotation_number(CocycleSpec(alpha, conj_gen), n, phase_samples, seed)
    predicted = 0.5 * float(np.dot(deg, alpha)) % 1.0
    measured = (rho1.value - rho0.value) % 1.0
    gap = abs((measured - predicted + 0.5) % 1.0 - 0.5)
    budget = rho0.error_budget + rho1.error_budget
    return DegreeShiftReport(deg, winding, rho0, rho1, predicted, measured,
                             gap <= budget, {"gap": gap, "budget": budget})
