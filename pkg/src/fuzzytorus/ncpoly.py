"""Normal-ordered twisted Laurent polynomials with matrix-block coefficients.

A polynomial is a finite sum  sum_k  c_k (x) u^k  with k in Z^d, c_k an m x m
block, and u^k the normal-ordered word u_1^{k_1} ... u_d^{k_d} subject to
u_i u_j = exp(2 pi i theta_ij) u_j u_i.  Products, adjoints, Fourier
multipliers, gradient forms and sup-norm oracles all live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _mats
from .lattice import (
    MEAN_ZERO,
    LengthFunction,
    MultiplierSpec,
    band_mask,
    cocycle_rows_for_coords,
)

PRUNE_REL = 1e-14

__all__ = [
    "TwistMatrix",
    "NCPoly",
    "normal_order_phase",
    "multiply",
    "adjoint",
    "project",
    "mean_zero",
    "l2_norm",
    "apply_multiplier",
    "apply_semigroup",
    "gradient_form",
    "sup_norm_oracle",
    "oracle_error_bound",
    "poly_to_text",
    "poly_from_text",
]


@dataclass(frozen=True, eq=False)
class TwistMatrix:
    """Skew-symmetric twist; upper-triangle entries reduced into [0, 1).

    ``rational`` optionally records theta_12 = p / q for the two-dimensional
    rational-fiber norm oracle.
    """

    theta: np.ndarray
    rational: Optional[tuple[int, int]] = None

    def __post_init__(self):
        th = np.array(self.theta, dtype=float)
        if th.ndim != 2 or th.shape[0] != th.shape[1]:
            raise ValueError("twist must be a square matrix")
        if not np.allclose(th, -th.T, atol=1e-12):
            raise ValueError("twist must be skew-symmetric")
        d = th.shape[0]
        red = np.zeros_like(th)
        for i in range(d):
            for j in range(i + 1, d):
                red[i, j] = th[i, j] % 1.0
                red[j, i] = -red[i, j]
        red.setflags(write=False)
        object.__setattr__(self, "theta", red)

    @classmethod
    def zero(cls, d: int) -> "TwistMatrix":
        return cls(np.zeros((d, d)))

    @classmethod
    def two_dim(cls, theta: float) -> "TwistMatrix":
        return cls(np.array([[0.0, theta], [-theta, 0.0]]))

    @classmethod
    def rational_2d(cls, p: int, q: int) -> "TwistMatrix":
        if q <= 0:
            raise ValueError("denominator must be positive")
        t = cls(np.array([[0.0, p / q], [-p / q, 0.0]]))
        object.__setattr__(t, "rational", (p % q, q))
        return t

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    @property
    def is_zero(self) -> bool:
        return bool(np.all(np.abs(self.theta) < 1e-14))

    def same(self, other: "TwistMatrix") -> bool:
        return self.d == other.d and np.allclose(
            self.theta, other.theta, atol=1e-12
        )


def normal_order_phase(a: Sequence[int], b: Sequence[int], twist: TwistMatrix) -> complex:
    """Scalar with u^a u^b = phase * u^{a+b}: exp(2 pi i sum_{i>j} a_i b_j theta_ij)."""
    if len(a) != twist.d or len(b) != twist.d:
        raise ValueError("dimension mismatch with the twist")
    arg = 0.0
    for i in range(twist.d):
        for j in range(i):
            arg += a[i] * b[j] * twist.theta[i, j]
    return complex(np.exp(2j * np.pi * (arg % 1.0)))


def _adjoint_phase(a: Sequence[int], twist: TwistMatrix) -> complex:
    """(u^a)* = phase * u^{-a}: exp(-2 pi i sum_{i<j} a_i a_j theta_ij)."""
    arg = 0.0
    for i in range(twist.d):
        for j in range(i + 1, twist.d):
            arg += a[i] * a[j] * twist.theta[i, j]
    return complex(np.exp(-2j * np.pi * (arg % 1.0)))


class NCPoly:
    """Immutable band-limited twisted polynomial with m x m block coefficients."""

    __slots__ = ("twist", "m", "coeffs")

    def __init__(self, twist: TwistMatrix, m: int = 1, coeffs=None, prune: bool = True):
        self.twist = twist
        self.m = int(m)
        raw = {}
        for k, block in (coeffs or {}).items():
            arr = np.asarray(block, dtype=complex)
            if arr.shape == () and self.m == 1:
                arr = arr.reshape(1, 1)
            if arr.shape != (self.m, self.m):
                raise ValueError(f"coefficient block at {k} has shape {arr.shape}")
            if len(k) != twist.d:
                raise ValueError(f"index {k} has wrong dimension for the twist")
            raw[tuple(int(c) for c in k)] = arr
        if prune and raw:
            top = max(_mats.max_abs(b) for b in raw.values())
            cut = PRUNE_REL * top
            raw = {k: b for k, b in raw.items() if _mats.max_abs(b) > cut}
        self.coeffs = raw

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, twist: TwistMatrix, m: int = 1) -> "NCPoly":
        return cls(twist, m, {})

    @classmethod
    def one(cls, twist: TwistMatrix, m: int = 1) -> "NCPoly":
        return cls(twist, m, {(0,) * twist.d: np.eye(m)})

    @classmethod
    def monomial(cls, twist: TwistMatrix, k, block=None, m: int = 1) -> "NCPoly":
        if block is None:
            block = np.eye(m)
        return cls(twist, m, {tuple(k): block})

    @classmethod
    def generator(cls, twist: TwistMatrix, axis: int, m: int = 1) -> "NCPoly":
        k = [0] * twist.d
        k[axis] = 1
        return cls.monomial(twist, k, m=m)

    # -- basic structure ---------------------------------------------------

    @property
    def d(self) -> int:
        return self.twist.d

    @property
    def band(self) -> int:
        if not self.coeffs:
            return 0
        return max(max(abs(c) for c in k) for k in self.coeffs)

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.coeffs.keys())

    def get(self, k) -> np.ndarray:
        return self.coeffs.get(tuple(k), np.zeros((self.m, self.m), dtype=complex))

    def mean_block(self) -> np.ndarray:
        return self.get((0,) * self.d)

    def is_selfadjoint(self, tol: float = 1e-12) -> bool:
        diff = self - adjoint(self)
        return all(_mats.max_abs(b) <= tol for b in diff.coeffs.values())

    # -- linear arithmetic --------------------------------------------------

    def _require_compatible(self, other: "NCPoly"):
        if not self.twist.same(other.twist) or self.m != other.m:
            raise ValueError("twist/amplification mismatch")

    def __add__(self, other: "NCPoly") -> "NCPoly":
        self._require_compatible(other)
        out = {k: b.copy() for k, b in self.coeffs.items()}
        for k, b in other.coeffs.items():
            out[k] = out.get(k, 0) + b
        return NCPoly(self.twist, self.m, out)

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return self + (-1.0) * other

    def __rmul__(self, c) -> "NCPoly":
        if np.isscalar(c):
            return NCPoly(
                self.twist, self.m, {k: c * b for k, b in self.coeffs.items()}
            )
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, NCPoly):
            return multiply(self, other)
        if np.isscalar(other):
            return other * self
        return NotImplemented

    def scale_coeffs(self, fn: Callable[[tuple[int, ...]], complex]) -> "NCPoly":
        return NCPoly(
            self.twist, self.m, {k: fn(k) * b for k, b in self.coeffs.items()}
        )


def multiply(f: NCPoly, g: NCPoly) -> NCPoly:
    """Normal-ordered product; coefficient of u^c is the phase-twisted convolution."""
    f._require_compatible(g)
    out: dict[tuple[int, ...], np.ndarray] = {}
    for a, fa in f.coeffs.items():
        for b, gb in g.coeffs.items():
            c = tuple(x + y for x, y in zip(a, b))
            term = normal_order_phase(a, b, f.twist) * (fa @ gb)
            out[c] = out.get(c, 0) + term
    return NCPoly(f.twist, f.m, out)


def adjoint(f: NCPoly) -> NCPoly:
    """Involution: block at -a is adjoint-phase(a) times the conjugate transpose."""
    out = {
        tuple(-c for c in a): _adjoint_phase(a, f.twist) * b.conj().T
        for a, b in f.coeffs.items()
    }
    return NCPoly(f.twist, f.m, out)


def project(f: NCPoly, mask: Callable[[Sequence[int]], bool]) -> NCPoly:
    return NCPoly(f.twist, f.m, {k: b for k, b in f.coeffs.items() if mask(k)})


def mean_zero(f: NCPoly) -> NCPoly:
    return project(f, band_mask(MEAN_ZERO, dim=f.d))


def l2_norm(f: NCPoly) -> float:
    """Normalized-trace L2 norm; normal-ordered monomials are orthonormal."""
    s = 0.0
    for b in f.coeffs.values():
        s += float(np.vdot(b, b).real)
    return math.sqrt(s / f.m)


def apply_multiplier(f: NCPoly, phi: MultiplierSpec) -> NCPoly:
    """Coefficient-wise scaling by phi (reduced into phi's moduli)."""
    if len(phi.moduli) != f.d:
        raise ValueError("multiplier dimension does not match the polynomial")
    return f.scale_coeffs(lambda k: phi.value_at(k))


def apply_semigroup(f: NCPoly, psi: LengthFunction, t: float) -> NCPoly:
    """Heat-type semigroup exp(-t psi) acting coefficient-wise."""
    if psi.dim != f.d:
        raise ValueError("length function dimension mismatch")
    return f.scale_coeffs(lambda k: math.exp(-t * psi.value(k)))


def gradient_form(f: NCPoly, g: NCPoly, psi: LengthFunction) -> NCPoly:
    """Carre du champ: sum_{x,y} fhat(x)* K(x,y) ghat(y) at monomial u^{y-x}.

    The normal-ordering phase of (u^x)* u^y is included, so embedding the
    result into any compatible matrix model matches the model-side gradient.
    """
    f._require_compatible(g)
    if psi.dim != f.d:
        raise ValueError("length function dimension mismatch")
    xs = f.support()
    ys = g.support()
    if not xs or not ys:
        return NCPoly.zero(f.twist, f.m)
    from .lattice import gromov_entries_for_coords

    both = xs + [y for y in ys if y not in set(xs)]
    K = gromov_entries_for_coords(psi, both)
    pos = {k: i for i, k in enumerate(both)}
    out: dict[tuple[int, ...], np.ndarray] = {}
    for x in xs:
        fx = f.coeffs[x].conj().T
        ax = _adjoint_phase(x, f.twist)
        negx = tuple(-c for c in x)
        for y in ys:
            w = K[pos[x], pos[y]]
            if w == 0.0:
                continue
            c = tuple(b - a for a, b in zip(x, y))
            phase = ax * normal_order_phase(negx, y, f.twist)
            out[c] = out.get(c, 0) + (w * phase) * (fx @ g.coeffs[y])
    return NCPoly(f.twist, f.m, out)


# -- sup-norm oracles -------------------------------------------------------

COMMUTATIVE = "commutative"
RATIONAL_FIBER = "rational_fiber"


def _grid_phases(support: list[tuple[int, ...]], G: int, d: int) -> np.ndarray:
    """(G^d, s) matrix of exp(2 pi i <k, t>) over the uniform grid."""
    ks = np.array(support)
    P = np.ones((1, len(support)), dtype=complex)
    t = np.arange(G) / G
    for axis in range(d):
        E = np.exp(2j * np.pi * np.outer(t, ks[:, axis]))
        P = (P[:, None, :] * E[None, :, :]).reshape(-1, len(support))
    return P


def _default_grid(band: int) -> int:
    return max(64, 16 * max(band, 1))


def _check_grid(G: int, band: int):
    if G < 8 * band:
        raise ValueError(f"grid {G} too coarse for band {band}; need G >= 8*band")


def sup_norm_oracle(
    f: NCPoly, mode: Optional[str] = None, grid: Optional[int] = None
) -> float:
    """Certified lower bound of the operator norm via dense grid evaluation.

    Commutative mode evaluates the m x m symbol on a uniform G^d grid;
    rational-fiber mode (d=2, theta = p/q) evaluates the M_m (x) M_q fiber
    symbol on a G^2 grid.  The relative truncation error is bounded by
    ``oracle_error_bound(band, G, d)``.
    """
    if mode is None:
        if f.twist.is_zero:
            mode = COMMUTATIVE
        elif f.twist.rational is not None and f.d == 2:
            mode = RATIONAL_FIBER
        else:
            raise ValueError("no norm oracle available for this twist")
    band = f.band
    G = _default_grid(band) if grid is None else int(grid)
    _check_grid(G, band)
    if not f.coeffs:
        return 0.0
    support = f.support()
    if mode == COMMUTATIVE:
        if not f.twist.is_zero:
            raise ValueError("commutative oracle needs a zero twist")
        P = _grid_phases(support, G, f.d)
        C = np.stack([f.coeffs[k] for k in support])
        S = np.tensordot(P, C, axes=(1, 0))
        return float(_mats.batched_sigma_max(S).max())
    if mode == RATIONAL_FIBER:
        if f.d != 2 or f.twist.rational is None:
            raise ValueError("rational fiber oracle needs d=2 and theta = p/q")
        p, q = f.twist.rational
        u = _mats.clock(q)
        v = _mats.shift(q)
        fibers = np.stack(
            [
                np.kron(
                    f.coeffs[k],
                    _mats.unitary_power(u, k[0], q) @ _mats.unitary_power(v, k[1] * p, q),
                )
                for k in support
            ]
        )
        P = _grid_phases(support, G, 2)
        S = np.tensordot(P, fibers, axes=(1, 0))
        return float(_mats.batched_sigma_max(S).max())
    raise ValueError(f"unknown oracle mode {mode!r}")


def oracle_error_bound(band: int, G: int, d: int) -> float:
    """Relative defect bound of the grid oracle, O((band/G)^2) per dimension."""
    return d * 0.5 * (math.pi * band / G) ** 2


def gradient_sqrt_sup(
    f: NCPoly, psi: LengthFunction, grid: Optional[int] = None
) -> float:
    """|| Gamma(f,f)^(1/2) || through the PSD cocycle assembly on the grid.

    Rows of the cocycle factor give D_i = sum_a G[i,a] fhat(a) u^a; the
    gradient form is sum_i D_i* D_i, so its top eigenvalue is the squared
    largest singular value of the stacked column (D_i)_i evaluated pointwise.
    """
    if not f.coeffs:
        return 0.0
    support = f.support()
    band = f.band
    G = _default_grid(band) if grid is None else int(grid)
    _check_grid(G, band)
    rows = cocycle_rows_for_coords(psi, support)  # (r, s)
    if rows.size == 0:
        return 0.0
    if f.twist.is_zero:
        P = _grid_phases(support, G, f.d)
        C = np.stack([f.coeffs[k] for k in support])  # (s, m, m)
        weighted = np.einsum("rs,sij->rsij", rows, C)
    elif f.twist.rational is not None and f.d == 2:
        p, q = f.twist.rational
        u = _mats.clock(q)
        v = _mats.shift(q)
        fib = np.stack(
            [
                np.kron(
                    f.coeffs[k],
                    _mats.unitary_power(u, k[0], q) @ _mats.unitary_power(v, k[1] * p, q),
                )
                for k in support
            ]
        )
        P = _grid_phases(support, G, 2)
        weighted = np.einsum("rs,sij->rsij", rows, fib)
    else:
        raise ValueError("no norm oracle available for this twist")
    # stacked column: (grid, r*m, m); sigma_max^2 = top eig of Gamma
    D = np.tensordot(P, weighted, axes=(1, 1))  # (grid, r, m, m)
    g, r, mm, _ = D.shape
    D = D.reshape(g, r * mm, mm)
    sv = np.linalg.svd(D, compute_uv=False)[..., 0]
    return float(sv.max())


# -- plain-text serialization ----------------------------------------------


def poly_to_text(f: NCPoly) -> str:
    """Line-based dump: header then one line per index, block entries row-major."""
    upper = [
        f.twist.theta[i, j] for i in range(f.d) for j in range(i + 1, f.d)
    ]
    lines = [
        f"d {f.d} m {f.m}",
        "theta " + " ".join(repr(float(x)) for x in upper),
    ]
    for k in f.support():
        b = f.coeffs[k]
        ent = " ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in b.reshape(-1))
        lines.append(" ".join(map(str, k)) + " " + ent)
    return "\n".join(lines) + "\n"


def poly_from_text(text: str) -> NCPoly:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    head = lines[0].split()
    d, m = int(head[1]), int(head[3])
    upper = [float(x) for x in lines[1].split()[1:]]
    theta = np.zeros((d, d))
    pos = 0
    for i in range(d):
        for j in range(i + 1, d):
            theta[i, j] = upper[pos]
            theta[j, i] = -upper[pos]
            pos += 1
    coeffs = {}
    for ln in lines[2:]:
        parts = ln.split()
        k = tuple(int(x) for x in parts[:d])
        vals = [float(x) for x in parts[d:]]
        re = np.array(vals[0::2])
        im = np.array(vals[1::2])
        coeffs[k] = (re + 1j * im).reshape(m, m)
    return NCPoly(TwistMatrix(theta), m, coeffs)
