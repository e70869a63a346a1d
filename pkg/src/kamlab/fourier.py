"""Finitely supported Fourier series on the d-torus.

Scalar or 2x2-matrix coefficients, low/high truncation, weighted-l1 analytic
norms (the certification norm: a computable upper bound for the sup norm on
the strip), sup-strip grid estimates (diagnostic), exp/log on sl(2), the
unitary change of basis that diagonalizes rotations, and cocycle
conjugation as coefficient convolution.

Coefficient floors drop weighted mass below 1e-16 into a per-series "debt"
scalar which every norm certificate adds back.  Debt composes through
products first-order (partner mass taken as the plain coefficient sum), so
it is an accounting indicator, not a rigorous enclosure; with the default
floor it stays many orders below every tolerance used in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LogDomain, NormBudgetExceeded, NotSl2

__all__ = [
    "TrigPoly",
    "NormParams",
    "J_MAT",
    "M_CHANGE",
    "truncate",
    "analytic_norm",
    "exp_sl2",
    "log_sl2",
    "rot_mat",
    "exp_poly",
    "log_poly",
    "rot_poly",
    "m_decompose",
    "m_recompose",
    "compose_conjugate",
    "adjugate",
    "conj_reflect",
    "grid_points",
    "bmr_conversion_check",
]

TWO_PI = 2.0 * math.pi

J_MAT = np.array([[0.0, 1.0], [-1.0, 0.0]])
M_CHANGE = (1.0 / (1.0 + 1.0j)) * np.array([[1.0, -1.0j], [1.0, 1.0j]])
M_CHANGE_INV = M_CHANGE.conj().T  # M is unitary


@dataclass(frozen=True)
class NormParams:
    """Strip widths: r for the first coordinate, s for the rest."""

    r: float
    s: float = None
    flavor: str = "weighted-l1"

    def __post_init__(self):
        if self.s is None:
            object.__setattr__(self, "s", self.r)
        if self.r <= 0 or self.s <= 0:
            raise ValueError("strip widths must be positive")
        if self.flavor not in ("weighted-l1", "sup-strip"):
            raise ValueError(f"unknown norm flavor {self.flavor!r}")

    def weight(self, k):
        w = abs(k[0]) * self.r
        for kj in k[1:]:
            w += abs(kj) * self.s
        return math.exp(TWO_PI * w)

    def shrink(self, dr, ds=None):
        return NormParams(self.r - dr, self.s - (dr if ds is None else ds), self.flavor)


def _coeff_norm(v):
    if isinstance(v, np.ndarray):
        # closed-form largest singular value of a 2x2
        s = float(np.sum(np.abs(v) ** 2))
        det = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
        disc = max(s * s - 4.0 * abs(det) ** 2, 0.0)
        return math.sqrt(0.5 * (s + math.sqrt(disc)))
    return abs(v)


def _spec_norms_stack(vals):
    """Spectral norms of a stack (m, 2, 2) of complex matrices."""
    s = np.sum(np.abs(vals) ** 2, axis=(1, 2))
    det = vals[:, 0, 0] * vals[:, 1, 1] - vals[:, 0, 1] * vals[:, 1, 0]
    disc = np.clip(s * s - 4.0 * np.abs(det) ** 2, 0.0, None)
    return np.sqrt(0.5 * (s + np.sqrt(disc)))


class TrigPoly:
    """Immutable finitely-supported Fourier series.

    coeffs maps integer multi-indices (tuples of length dim) to complex
    scalars or (2, 2) complex ndarrays.  reality is one of
    "real-scalar", "complex-scalar", "sl2-real", "SL2-real", "general".
    """

    __slots__ = ("dim", "coeffs", "reality", "is_matrix", "debt", "_arrays")

    # keep numpy from intercepting `ndarray @ TrigPoly`
    __array_ufunc__ = None
    __array_priority__ = 1000.0

    def __init__(self, dim, coeffs, reality="general", debt=0.0, matrix=None):
        self._arrays = None
        self.dim = int(dim)
        clean = {}
        is_matrix = matrix
        for k, v in coeffs.items():
            k = tuple(int(x) for x in k)
            if len(k) != dim:
                raise ValueError(f"index {k} does not match dim={dim}")
            if isinstance(v, np.ndarray):
                v = np.asarray(v, dtype=complex)
                if v.shape != (2, 2):
                    raise ValueError("matrix coefficients must be 2x2")
                mat = True
            else:
                v = complex(v)
                mat = False
            if is_matrix is None:
                is_matrix = mat
            elif is_matrix != mat:
                raise ValueError("mixed scalar and matrix coefficients")
            if mat:
                if np.any(v != 0):
                    v = v.copy()
                    v.setflags(write=False)
                    clean[k] = v
            elif v != 0:
                clean[k] = v
        self.coeffs = clean
        self.is_matrix = bool(is_matrix) if is_matrix is not None else False
        self.reality = reality
        self.debt = float(debt)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(dim, matrix=False, reality=None):
        return TrigPoly(dim, {}, reality or ("sl2-real" if matrix else "real-scalar"),
                        matrix=matrix)

    @classmethod
    def _raw(cls, dim, coeffs, reality, debt, matrix):
        """Trusted constructor: keys are int tuples, values already typed."""
        self = cls.__new__(cls)
        self._arrays = None
        self.dim = dim
        self.coeffs = coeffs
        self.is_matrix = matrix
        self.reality = reality
        self.debt = float(debt)
        return self

    @staticmethod
    def constant(dim, value, reality=None):
        if isinstance(value, np.ndarray):
            return TrigPoly(dim, {(0,) * dim: np.asarray(value, dtype=complex)},
                            reality or "general")
        default = "real-scalar" if abs(complex(value).imag) == 0 else "complex-scalar"
        return TrigPoly(dim, {(0,) * dim: value}, reality or default)

    @staticmethod
    def cosine(dim, axis=0, amplitude=1.0):
        """amplitude * cos(2 pi phi_axis)."""
        kp = tuple(1 if j == axis else 0 for j in range(dim))
        km = tuple(-x for x in kp)
        a = amplitude / 2.0
        return TrigPoly(dim, {kp: a, km: a}, "real-scalar")

    @staticmethod
    def from_modes(dim, modes, reality="general"):
        return TrigPoly(dim, dict(modes), reality)

    # -- basic queries -----------------------------------------------------

    def coeff(self, k):
        k = tuple(k)
        if k in self.coeffs:
            return self.coeffs[k]
        if self.is_matrix:
            return np.zeros((2, 2), dtype=complex)
        return 0j

    def arrays(self):
        """(kmat, values) as contiguous arrays; cached after first build."""
        if self._arrays is None:
            if not self.coeffs:
                kmat = np.zeros((0, self.dim), dtype=np.int64)
                vals = (np.zeros((0, 2, 2), dtype=complex) if self.is_matrix
                        else np.zeros(0, dtype=complex))
            else:
                kmat = np.array(list(self.coeffs.keys()), dtype=np.int64)
                if self.is_matrix:
                    vals = np.stack(list(self.coeffs.values())).astype(complex)
                else:
                    vals = np.array(list(self.coeffs.values()), dtype=complex)
            kmat.setflags(write=False)
            vals.setflags(write=False)
            self._arrays = (kmat, vals)
        return self._arrays

    def support_radius(self):
        return max((sum(abs(x) for x in k) for k in self.coeffs), default=0)

    def coeff_norms(self):
        """Per-coefficient norms aligned with arrays()."""
        _, vals = self.arrays()
        if self.is_matrix:
            return _spec_norms_stack(vals)
        return np.abs(vals)

    def l1(self):
        """Plain coefficient-norm sum (weight-free lower bound of any norm)."""
        return float(self.coeff_norms().sum())

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        kind = "matrix" if self.is_matrix else "scalar"
        return (f"TrigPoly(dim={self.dim}, {kind}, modes={len(self.coeffs)}, "
                f"reality={self.reality!r}, debt={self.debt:.2e})")

    # -- ring operations ---------------------------------------------------

    def _zero_like(self, v):
        return np.zeros((2, 2), dtype=complex) if isinstance(v, np.ndarray) else 0j

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        out = {}
        for k, v in self.coeffs.items():
            out[k] = v.copy() if self.is_matrix else v
        for k, v in other.coeffs.items():
            if k in out:
                out[k] = out[k] + v
            else:
                out[k] = v
        reality = self.reality if self.reality == other.reality else "general"
        return TrigPoly(self.dim, out, reality, self.debt + other.debt,
                        matrix=self.is_matrix or other.is_matrix)

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, c):
        if isinstance(c, TrigPoly):
            return _convolve(self, c)
        out = {k: v * c for k, v in self.coeffs.items()}
        reality = self.reality
        if not isinstance(c, (int, float)) and complex(c).imag != 0:
            if reality in ("real-scalar", "sl2-real", "SL2-real"):
                reality = "complex-scalar" if not self.is_matrix else "general"
        return TrigPoly(self.dim, out, reality, abs(c) * self.debt,
                        matrix=self.is_matrix)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, TrigPoly):
            return _convolve(self, other, matrix=True)
        # constant matrix on the right; scalar series lift to v * M
        other = np.asarray(other, dtype=complex)
        if self.is_matrix:
            out = {k: v @ other for k, v in self.coeffs.items()}
        else:
            out = {k: v * other for k, v in self.coeffs.items()}
        return TrigPoly(self.dim, out, "general",
                        self.debt * _coeff_norm(other), matrix=True)

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=complex)
        if self.is_matrix:
            out = {k: other @ v for k, v in self.coeffs.items()}
        else:
            out = {k: other * v for k, v in self.coeffs.items()}
        return TrigPoly(self.dim, out, "general",
                        self.debt * _coeff_norm(other), matrix=True)

    def shift(self, alpha):
        """f(. + alpha): multiplies each coefficient by e^(2 pi i <k, alpha>)."""
        alpha = np.asarray(alpha, dtype=float)
        kmat, vals = self.arrays()
        phases = np.exp(2j * np.pi * (kmat @ alpha))
        if self.is_matrix:
            new = vals * phases[:, None, None]
        else:
            new = vals * phases
        out = {tuple(int(x) for x in kmat[i]): new[i] for i in range(len(kmat))}
        return TrigPoly._raw(self.dim, out, self.reality, self.debt,
                             self.is_matrix)

    def entry(self, i, j):
        if not self.is_matrix:
            raise ValueError("entry() needs a matrix-valued series")
        out = {k: v[i, j] for k, v in self.coeffs.items()}
        return TrigPoly(self.dim, out, "complex-scalar", self.debt)

    @staticmethod
    def from_entries(e00, e01, e10, e11, reality="general"):
        dim = e00.dim
        keys = set()
        for e in (e00, e01, e10, e11):
            keys.update(e.coeffs)
        out = {}
        for k in keys:
            out[k] = np.array([[e00.coeff(k), e01.coeff(k)],
                               [e10.coeff(k), e11.coeff(k)]])
        debt = e00.debt + e01.debt + e10.debt + e11.debt
        return TrigPoly(dim, out, reality, debt)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, phi):
        """Value at a (possibly complex) phase vector."""
        phi = np.asarray(phi, dtype=complex)
        kmat, vals = self.arrays()
        if len(kmat) == 0:
            return np.zeros((2, 2), dtype=complex) if self.is_matrix else 0j
        phases = np.exp(2j * np.pi * (kmat @ phi))
        if self.is_matrix:
            return np.tensordot(phases, vals, axes=(0, 0))
        return complex(phases @ vals)

    def evaluate_many(self, pts):
        """Values at an array of phase vectors, shape (..., dim)."""
        pts = np.asarray(pts)
        kmat, vals = self.arrays()
        lead = pts.shape[:-1]
        if len(kmat) == 0:
            shape = lead + ((2, 2) if self.is_matrix else ())
            return np.zeros(shape, dtype=complex)
        phases = np.exp(2j * np.pi * (pts @ kmat.T))  # (..., m)
        if self.is_matrix:
            return np.tensordot(phases, vals, axes=(-1, 0))
        return phases @ vals

    def evaluate_grid(self, n, imag_shift=None):
        """Values on the uniform n^dim grid (vectorized).

        imag_shift adds a constant imaginary part per coordinate to sample
        a strip.  Returns an array of shape grid + (2, 2) for matrices.
        """
        pts = grid_points(self.dim, n)
        if imag_shift is not None:
            pts = pts.astype(complex) + 1j * np.asarray(imag_shift)
        return self.evaluate_many(pts)

    # -- reality helpers ---------------------------------------------------

    def reality_defect(self):
        """max_k |f(k) - conj(f(-k))| (entrywise for matrices)."""
        worst = 0.0
        for k, v in self.coeffs.items():
            mk = tuple(-x for x in k)
            w = self.coeff(mk)
            if self.is_matrix:
                worst = max(worst, float(np.max(np.abs(v - np.conj(w)))))
            else:
                worst = max(worst, abs(v - w.conjugate()
                                       if isinstance(w, complex) else v - np.conj(w)))
        return worst

    def trace_l1(self):
        if not self.is_matrix:
            raise ValueError("trace of a scalar series")
        return sum(abs(v[0, 0] + v[1, 1]) for v in self.coeffs.values())

    def real_part(self):
        """(f + conj-reflection)/2: the real part as a function on the real torus."""
        return (self + conj_reflect(self)) * 0.5

    # -- truncation --------------------------------------------------------

    def floor_truncate(self, floor=1e-16, params=None):
        """Drop coefficients whose (weighted) norm is below floor; add to debt."""
        if floor <= 0 or not self.coeffs:
            return self
        kmat, vals = self.arrays()
        norms = self.coeff_norms()
        if params is not None:
            norms = norms * _weights_for(kmat, params)
        keep = norms >= floor
        if keep.all():
            return self
        dropped = float(norms[~keep].sum())
        out = {tuple(int(x) for x in kmat[i]): vals[i] for i in np.nonzero(keep)[0]}
        return TrigPoly._raw(self.dim, out, self.reality, self.debt + dropped,
                             self.is_matrix)


def truncate(f: TrigPoly, N, side="low"):
    """Low part (|k| < N, l1 norm) or high part (|k| >= N); low + high = f."""
    if N < 0:
        raise ValueError("N must be >= 0")
    keep_low = side == "low"
    if side not in ("low", "high"):
        raise ValueError("side must be 'low' or 'high'")
    out = {}
    for k, v in f.coeffs.items():
        if (sum(abs(x) for x in k) < N) == keep_low:
            out[k] = v
    return TrigPoly._raw(f.dim, out, f.reality, f.debt if keep_low else 0.0,
                         f.is_matrix)


_PACK_BITS = 20
_PACK_OFF = 1 << 19


def _pack_keys(keys):
    # 20 bits per coordinate keeps d <= 3 inside int64
    if keys.shape[1] * _PACK_BITS >= 63:
        raise ValueError("key packing supports dim <= 3")
    if np.abs(keys).max(initial=0) >= _PACK_OFF:
        raise ValueError("support radius exceeds the key-packing range")
    packed = np.zeros(len(keys), dtype=np.int64)
    for j in range(keys.shape[1]):
        packed |= (keys[:, j].astype(np.int64) + _PACK_OFF) << (_PACK_BITS * j)
    return packed


def _unpack_keys(packed, dim):
    out = np.empty((len(packed), dim), dtype=np.int64)
    mask = (1 << _PACK_BITS) - 1
    for j in range(dim):
        out[:, j] = ((packed >> (_PACK_BITS * j)) & mask) - _PACK_OFF
    return out


def _convolve(f: TrigPoly, g: TrigPoly, matrix=None):
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    debt = f.debt * (g.l1() + g.debt) + g.debt * f.l1()
    reality = "general"
    if not f.is_matrix and not g.is_matrix:
        if f.reality == g.reality == "real-scalar":
            reality = "real-scalar"
        else:
            reality = "complex-scalar"
    elif f.reality == g.reality == "SL2-real":
        reality = "SL2-real"
    kf, vf = f.arrays()
    kg, vg = g.arrays()
    matrix = (f.is_matrix or g.is_matrix) if matrix is None else matrix
    if len(kf) == 0 or len(kg) == 0:
        return TrigPoly(f.dim, {}, reality, debt, matrix=matrix)
    keys = (kf[:, None, :] + kg[None, :, :]).reshape(-1, f.dim)
    if f.is_matrix and g.is_matrix:
        vals = np.einsum("aij,bjk->abik", vf, vg).reshape(-1, 2, 2)
    elif f.is_matrix:
        vals = (vf[:, None, :, :] * vg[None, :, None, None]).reshape(-1, 2, 2)
    elif g.is_matrix:
        vals = (vf[:, None, None, None] * vg[None, :, :, :]).reshape(-1, 2, 2)
    else:
        vals = (vf[:, None] * vg[None, :]).reshape(-1)
    if f.dim * _PACK_BITS < 63:
        packed = _pack_keys(keys)
        uniq_p, inv = np.unique(packed, return_inverse=True)
        uniq = _unpack_keys(uniq_p, f.dim)
    else:
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
    acc = np.zeros((len(uniq),) + vals.shape[1:], dtype=complex)
    np.add.at(acc, inv, vals)
    out = {tuple(int(x) for x in uniq[i]): acc[i] if acc.ndim == 3 else complex(acc[i])
           for i in range(len(uniq))}
    return TrigPoly._raw(f.dim, out, reality, debt, matrix)


def _weights_for(kmat, p: NormParams):
    if kmat.shape[1] == 1:
        w = np.abs(kmat[:, 0]) * p.r
    else:
        w = np.abs(kmat[:, 0]) * p.r + np.abs(kmat[:, 1:]).sum(axis=1) * p.s
    return np.exp(TWO_PI * w)


def analytic_norm(f: TrigPoly, p: NormParams, grid=32):
    """Certified weighted-l1 norm (default) or diagnostic sup-strip estimate.

    weighted-l1 returns sum_k |f(k)| e^(2 pi (|k_1| r + |k'| s)) plus the
    accumulated truncation debt; it upper-bounds the sup norm on the strip.
    sup-strip samples |f| on the real grid shifted to the strip corners and
    returns a lower estimate of the sup.
    """
    if p.flavor == "weighted-l1":
        if not f.coeffs:
            return f.debt
        kmat, _ = f.arrays()
        total = float((f.coeff_norms() * _weights_for(kmat, p)).sum())
        return total + f.debt
    best = 0.0
    shifts = [None]
    for signs in _corner_signs(f.dim):
        shifts.append([p.r * signs[0]] + [p.s * sg for sg in signs[1:]])
    for sh in shifts:
        vals = f.evaluate_grid(grid, imag_shift=sh)
        if f.is_matrix:
            mags = np.linalg.norm(vals.reshape(-1, 2, 2), 2, axis=(1, 2))
        else:
            mags = np.abs(vals).ravel()
        best = max(best, float(np.max(mags)))
    return best


def _corner_signs(d):
    out = [[1] * d, [-1] * d]
    if d > 1:
        out.append([1] + [-1] * (d - 1))
        out.append([-1] + [1] * (d - 1))
    return out


def bmr_conversion_check(F: TrigPoly, r, r_plus, grid=48):
    """Weighted-l1 at the smaller radius vs 36/min(1,(r-r+)^2) times sup at r.

    Returns (lhs, rhs, ok); the sup side is a dense grid estimate, so the
    inequality is checked rather than assumed.
    """
    if not r_plus < r:
        raise ValueError("need r_plus < r")
    lhs = analytic_norm(F, NormParams(r_plus))
    sup = analytic_norm(F, NormParams(r, flavor="sup-strip"), grid=grid)
    rhs = 36.0 / min(1.0, (r - r_plus) ** 2) * sup
    return lhs, rhs, lhs <= rhs


# ---------------------------------------------------------------------------
# constant 2x2 helpers
# ---------------------------------------------------------------------------

def rot_mat(g):
    """R_g = [[cos 2 pi g, -sin], [sin, cos]] = e^(-2 pi g J)."""
    c, s = math.cos(TWO_PI * g), math.sin(TWO_PI * g)
    return np.array([[c, -s], [s, c]])


def exp_sl2(F):
    """Matrix exponential of a traceless 2x2 via the closed form."""
    F = np.asarray(F, dtype=complex)
    tr = F[0, 0] + F[1, 1]
    if abs(tr) > 1e-12 * max(1.0, float(np.abs(F).max())):
        raise NotSl2(f"trace {tr} is not zero")
    det = F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]
    w = np.sqrt(-det + 0j)
    if abs(w) < 1e-8:
        # cosh(w) ~ 1 + w^2/2, sinh(w)/w ~ 1 + w^2/6
        coshw = 1.0 + w * w / 2.0 + w ** 4 / 24.0
        sinc = 1.0 + w * w / 6.0 + w ** 4 / 120.0
    else:
        coshw = np.cosh(w)
        sinc = np.sinh(w) / w
    out = coshw * np.eye(2) + sinc * F
    if np.max(np.abs(out.imag)) < 1e-14 * max(1.0, float(np.abs(out.real).max())):
        out = out.real
    return out


def log_sl2(A):
    """Principal log of an SL(2) matrix near the identity (traceless output)."""
    A = np.asarray(A, dtype=float)
    if np.linalg.norm(A - np.eye(2), 2) >= 0.5:
        raise LogDomain("matrix is not within 0.5 of the identity")
    c = 0.5 * (A[0, 0] + A[1, 1])
    B = A - c * np.eye(2)
    if c < 1.0 - 1e-9:
        th = math.acos(max(-1.0, min(1.0, c)))
        coef = th / math.sin(th)
    elif c > 1.0 + 1e-9:
        t = math.acosh(c)
        coef = t / math.sinh(t)
    else:
        coef = 1.0 + (1.0 - c) / 3.0
    return coef * B


# ---------------------------------------------------------------------------
# series exp / log / rotations
# ---------------------------------------------------------------------------

def _cert_norm(f: TrigPoly, params):
    if params is None:
        return f.l1() + f.debt
    return analytic_norm(f, params)


def exp_poly(X: TrigPoly, params=None, tol=1e-17, max_terms=120, floor=1e-18):
    """exp of a (matrix or scalar) series by its power series, with tail debt."""
    if X.is_matrix:
        acc = TrigPoly.constant(X.dim, np.eye(2, dtype=complex))
        term = TrigPoly.constant(X.dim, np.eye(2, dtype=complex))
    else:
        acc = TrigPoly.constant(X.dim, 1.0)
        term = TrigPoly.constant(X.dim, 1.0)
    xnorm = _cert_norm(X, params)
    scale = max(1.0, _cert_norm(acc, params))
    for k in range(1, max_terms + 1):
        term = (term @ X if X.is_matrix else term * X) * (1.0 / k)
        term = term.floor_truncate(floor, params)
        acc = acc + term
        tnorm = _cert_norm(term, params)
        q = xnorm / (k + 1)
        if q < 0.5 and tnorm * q / (1 - q) < tol * scale:
            tail = tnorm * q / (1 - q)
            return TrigPoly(acc.dim, acc.coeffs, acc.reality, acc.debt + tail)
    raise NormBudgetExceeded(
        f"exp series did not converge in {max_terms} terms (|X| ~ {xnorm:.3g})",
        inequality="exp-series-tail")


def log_poly(E: TrigPoly, params=None, tol=1e-17, max_terms=160, floor=1e-18):
    """Principal log of a matrix series near the identity.

    Requires |E - I| < 0.5 in the certification norm; raises LogDomain
    otherwise.
    """
    ident = TrigPoly.constant(E.dim, np.eye(2, dtype=complex))
    X = E - ident
    q = _cert_norm(X, params)
    if q >= 0.5:
        raise LogDomain(f"|E - I| = {q:.4g} >= 0.5 in the certification norm")
    acc = X * 0.0
    power = ident
    sign = 1.0
    for m in range(1, max_terms + 1):
        power = (power @ X).floor_truncate(floor, params)
        acc = acc + power * (sign / m)
        sign = -sign
        tail = (q ** (m + 1)) / ((m + 1) * (1 - q))
        if tail < tol:
            return TrigPoly(acc.dim, acc.coeffs, acc.reality, acc.debt + tail)
    raise NormBudgetExceeded(
        f"log series did not converge in {max_terms} terms (|E-I| ~ {q:.3g})",
        inequality="log-series-tail")


def conj_reflect(f: TrigPoly):
    """Coefficientwise g(k) = conj(f(-k)): the complex conjugate on the real torus."""
    out = {}
    for k, v in f.coeffs.items():
        mk = tuple(-x for x in k)
        out[mk] = np.conj(v) if isinstance(v, np.ndarray) else v.conjugate()
    return TrigPoly(f.dim, out, f.reality, f.debt, matrix=f.is_matrix)


def rot_poly(g: TrigPoly, rho0=0.0, params=None, tol=1e-17):
    """R_(rho0 + g/2pi) = e^(-(2 pi rho0 + g) J) as a matrix series.

    g must be a real-scalar series; uses one scalar exponential series
    E = e^(i g) and assembles cos/sin from E and its reflection.
    """
    if g.is_matrix:
        raise ValueError("rot_poly needs a scalar series")
    E = exp_poly(g * 1j, params=params, tol=tol)
    Ebar = conj_reflect(E)
    cosg = (E + Ebar) * 0.5
    sing = (E - Ebar) * (-0.5j)
    # e^(-gJ) = cos(g) I - sin(g) J
    e00 = cosg
    e01 = sing * -1.0
    e10 = sing
    e11 = cosg
    body = TrigPoly.from_entries(e00, e01, e10, e11, reality="SL2-real")
    return rot_mat(rho0) @ body


def m_decompose(F: TrigPoly):
    """Split a traceless real series in the rotation-diagonalizing basis.

    Returns (fminus, w1, w2) with fminus = (F12 - F21)/2,
    w1 = F11 - i (F12 + F21)/2, w2 = F11 + i (F12 + F21)/2, so that
    F = M^-1 [[i fminus, w1], [w2, -i fminus]] M.
    """
    if not F.is_matrix:
        raise NotSl2("m_decompose needs a matrix series")
    if F.trace_l1() > 1e-11 * max(1.0, F.l1()):
        raise NotSl2(f"trace mass {F.trace_l1():.3g} is not zero")
    f11 = F.entry(0, 0)
    f12 = F.entry(0, 1)
    f21 = F.entry(1, 0)
    fminus = (f12 - f21) * 0.5
    fplus = (f12 + f21) * 0.5
    w1 = f11 - fplus * 1j
    w2 = f11 + fplus * 1j
    return fminus, w1, w2


def m_recompose(fminus: TrigPoly, w1: TrigPoly, w2: TrigPoly):
    """Inverse of m_decompose (coefficient-exact)."""
    f11 = (w1 + w2) * 0.5
    fplus = (w2 - w1) * (-0.5j)
    f12 = fplus + fminus
    f21 = fplus - fminus
    f22 = f11 * -1.0
    return TrigPoly.from_entries(f11, f12, f21, f22, reality="sl2-real")


def adjugate(B: TrigPoly):
    """Coefficientwise adjugate; the pointwise inverse when det B = 1."""
    if not B.is_matrix:
        raise ValueError("adjugate needs a matrix series")
    out = {}
    for k, v in B.coeffs.items():
        out[k] = np.array([[v[1, 1], -v[0, 1]], [-v[1, 0], v[0, 0]]])
    return TrigPoly(B.dim, out, B.reality, B.debt, matrix=True)


def compose_conjugate(B: TrigPoly, A: TrigPoly, alpha, floor=1e-16, params=None):
    """B(. + alpha) A(.) B(.)^-1 by coefficient convolution.

    B must have pointwise determinant 1 (its inverse is then the
    coefficientwise adjugate).  Support grows additively; coefficients below
    the floor are dropped into debt.
    """
    out = B.shift(alpha) @ A @ adjugate(B)
    return out.floor_truncate(floor, params)


def grid_points(dim, n):
    """Uniform grid on the torus: shape (n,)*dim + (dim,)."""
    axes = [np.arange(n) / n for _ in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def poly_to_records(f: TrigPoly):
    """Coefficient table: rows (k..., re, im) or (k..., m11re, ..., m22im)."""
    rows = []
    for k in sorted(f.coeffs):
        v = f.coeffs[k]
        if f.is_matrix:
            flat = []
            for i in (0, 1):
                for j in (0, 1):
                    flat.extend([v[i, j].real, v[i, j].imag])
            rows.append(list(k) + flat)
        else:
            rows.append(list(k) + [v.real, v.imag])
    header = {"dim": f.dim, "reality": f.reality, "matrix": f.is_matrix,
              "debt": f.debt}
    return header, rows


def poly_from_records(header, rows):
    dim = header["dim"]
    coeffs = {}
    for row in rows:
        k = tuple(int(x) for x in row[:dim])
        rest = row[dim:]
        if header["matrix"]:
            vals = [complex(rest[2 * i], rest[2 * i + 1]) for i in range(4)]
            coeffs[k] = np.array([[vals[0], vals[1]], [vals[2], vals[3]]])
        else:
            coeffs[k] = complex(rest[0], rest[1])
    return TrigPoly(dim, coeffs, header.get("reality", "general"),
                    header.get("debt", 0.0))
