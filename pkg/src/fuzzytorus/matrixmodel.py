"""Concrete matrix realizations: clock/shift, fuzzy tori, and M_{n^d} generators.

Every model keeps a list of unitary generators of a common order n together
with the pairwise commutation phases they were built to satisfy; the
constructor verifies unitarity, order and phases to 1e-12 before handing the
model out.  Coefficient transport between polynomials and models goes through
the trace-orthonormal monomial basis W^k.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _mats
from .lattice import LengthFunction, MultiplierSpec, window_range
from .ncpoly import NCPoly, TwistMatrix

__all__ = [
    "MatrixModel",
    "ModelElement",
    "clock_shift",
    "fuzzy_generators",
    "higher_dim_generators",
    "admissible_sizes",
    "embed",
    "fourier_coefficients",
    "op_norm",
    "schatten_norm",
    "model_multiplier",
    "model_semigroup",
    "dump_matrix",
]

RELATION_TOL = 1e-12
DIMENSION_CAP = 4096


def _clock_power(n: int, j: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * (j % n) * np.arange(n) / n))


def _shift_power(n: int, k: int) -> np.ndarray:
    v = np.zeros((n, n), dtype=complex)
    v[(np.arange(n) + k) % n, np.arange(n)] = 1.0
    return v


@dataclass(frozen=True, eq=False)
class MatrixModel:
    """Dense model: generators with declared order and pairwise phase table."""

    dim: int
    order: int
    power_fns: tuple[Callable[[int], np.ndarray], ...]
    phase_table: np.ndarray  # W_r W_s = exp(2 pi i phase[r,s]) W_s W_r
    symbol_twist: TwistMatrix
    provenance: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_mono_cache", {})
        gens = [p(1) for p in self.power_fns]
        eye = np.eye(self.dim)
        for i, (w, p) in enumerate(zip(gens, self.power_fns)):
            if _mats.max_abs(w.conj().T @ w - eye) > RELATION_TOL:
                raise ValueError(f"generator {i} is not unitary to tolerance")
            if _mats.max_abs(p(self.order) - eye) > RELATION_TOL:
                raise ValueError(f"generator {i} does not have order {self.order}")
            if _mats.max_abs(p(-1) - w.conj().T) > RELATION_TOL:
                raise ValueError(f"generator {i} power function breaks adjoints")
        for r in range(len(gens)):
            for s in range(len(gens)):
                if r == s:
                    continue
                phase = np.exp(2j * np.pi * self.phase_table[r, s])
                defect = _mats.max_abs(gens[r] @ gens[s] - phase * gens[s] @ gens[r])
                if defect > RELATION_TOL:
                    raise ValueError(
                        f"commutation phase fails for generators ({r},{s}): {defect}"
                    )

    @property
    def n_generators(self) -> int:
        return len(self.power_fns)

    def generators(self) -> list[np.ndarray]:
        return [p(1) for p in self.power_fns]

    def monomial(self, coords: Sequence[int], axes: Optional[Sequence[int]] = None) -> np.ndarray:
        """Ordered word prod_i W_{axes[i]}^{coords[i]}, cached by folded exponents."""
        axes = tuple(range(self.n_generators)) if axes is None else tuple(axes)
        key = (axes, tuple(int(c) % self.order for c in coords))
        cache = self._mono_cache
        if key not in cache:
            out = None
            for axis, c in zip(axes, key[1]):
                w = self.power_fns[axis](c)
                out = w if out is None else out @ w
            cache[key] = np.eye(self.dim, dtype=complex) if out is None else out
        return cache[key]

    def window(self) -> range:
        return window_range(self.order)


@dataclass(frozen=True, eq=False)
class ModelElement:
    """A matrix in M_m (x) M_N tagged with its model and known band (if any)."""

    model: MatrixModel
    matrix: np.ndarray
    m: int = 1
    band: Optional[int] = None
    axes: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        expect = self.m * self.model.dim
        if self.matrix.shape != (expect, expect):
            raise ValueError("matrix shape does not match model and amplification")


def clock_shift(n: int) -> MatrixModel:
    """Clock u and cyclic shift v on C^n with u v = exp(2 pi i / n) v u."""
    if n < 2:
        raise ValueError("need n >= 2")
    phase = np.array([[0.0, 1.0 / n], [-1.0 / n, 0.0]])
    return MatrixModel(
        dim=n,
        order=n,
        power_fns=(lambda j: _clock_power(n, j), lambda k: _shift_power(n, k)),
        phase_table=phase,
        symbol_twist=TwistMatrix.zero(2),
        provenance="clock_shift",
        params={"n": n},
    )


def admissible_sizes(m: int, count: Optional[int] = None):
    """Sizes n_k = m^{k+1} for which the fuzzy generators span the full algebra."""
    k = 1
    while count is None or k <= count:
        yield m ** (k + 1)
        k += 1


def fuzzy_generators(p: int, m: int, n: int) -> MatrixModel:
    """U = u1(m) (x) u1(n), V = v1(m)^p (x) v1(n) in dimension m n.

    Commutation phase is theta + 1/n with theta = p/m; m must divide n so the
    generators keep order n (take n from ``admissible_sizes(m)`` to get the
    full matrix algebra).
    """
    from math import gcd

    if n < 2:
        raise ValueError("need n >= 2")
    if m < 1 or gcd(p, m) != 1:
        raise ValueError("need gcd(p, m) = 1")
    if n % m != 0:
        raise ValueError("fuzzy model needs m | n so that generator orders equal n")
    theta = (p % m) / m if m > 1 else 0.0
    eta = theta + 1.0 / n
    phase = np.array([[0.0, eta], [-eta, 0.0]])

    def upow(j: int) -> np.ndarray:
        return np.kron(_clock_power(m, j % m), _clock_power(n, j))

    def vpow(k: int) -> np.ndarray:
        return np.kron(_shift_power(m, (k * p) % m), _shift_power(n, k))

    return MatrixModel(
        dim=m * n,
        order=n,
        power_fns=(upow, vpow),
        phase_table=phase,
        symbol_twist=TwistMatrix.rational_2d(p, m) if m > 1 else TwistMatrix.zero(2),
        provenance="fuzzy",
        params={"p": p, "m": m, "n": n, "eta": eta},
    )


def higher_dim_generators(n: int, d: int, cap: int = DIMENSION_CAP) -> MatrixModel:
    """2d unitaries in M_{n^d} with every ordered pair at phase exp(2 pi i / n).

    Slot pattern: pair k acts as G^{(k-1)} (x) {U or V} (x) 1..., G = V U^{-1},
    with a scalar n-th-root correction fixing each generator's order to n.
    """
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    if n**d > cap:
        raise ValueError(f"dimension {n**d} exceeds cap {cap}")
    eyes = [np.eye(n, dtype=complex)]
    om = np.exp(2j * np.pi / n)

    def gpow(j: int) -> np.ndarray:
        # (V U^{-1})^j = om^{-j(j-1)/2} V^j U^{-j}
        return om ** (-j * (j - 1) / 2) * (_shift_power(n, j) @ _clock_power(n, -j))

    def make_power(pair: int, use_clock: bool) -> Callable[[int], np.ndarray]:
        corr = np.exp(1j * np.pi * (n - 1) * (pair - 1) / n)

        def power(j: int) -> np.ndarray:
            core = _clock_power(n, j) if use_clock else _shift_power(n, j)
            out = corr**j * np.eye(1, dtype=complex)
            for _ in range(pair - 1):
                out = np.kron(out, gpow(j))
            out = np.kron(out, core)
            for _ in range(d - pair):
                out = np.kron(out, eyes[0])
            return out

        return power

    fns = []
    for pair in range(1, d + 1):
        fns.append(make_power(pair, True))
        fns.append(make_power(pair, False))
    phase = np.zeros((2 * d, 2 * d))
    for r in range(2 * d):
        for s in range(2 * d):
            if r < s:
                phase[r, s] = 1.0 / n
            elif r > s:
                phase[r, s] = -1.0 / n
    return MatrixModel(
        dim=n**d,
        order=n,
        power_fns=tuple(fns),
        phase_table=phase,
        symbol_twist=TwistMatrix.zero(2 * d),
        provenance="higher_dim",
        params={"n": n, "d": d},
    )


def _embed_axes(f: NCPoly, model: MatrixModel) -> tuple[int, ...]:
    """Generator subset matching the polynomial's dimension and twist."""
    if model.provenance == "clock_shift":
        if f.d == 1 and f.twist.is_zero:
            return (0,)
        if f.d == 2 and f.twist.is_zero:
            return (0, 1)
    elif model.provenance == "fuzzy":
        if f.d == 2 and f.twist.same(model.symbol_twist):
            return (0, 1)
    elif model.provenance == "higher_dim":
        if f.d == model.n_generators and f.twist.is_zero:
            return tuple(range(model.n_generators))
    raise ValueError(
        f"polynomial (d={f.d}) incompatible with {model.provenance} model"
    )


def embed(f: NCPoly, model: MatrixModel) -> ModelElement:
    """Linear coefficient transport sum_k fhat(k) (x) W^k (indices fold mod n)."""
    axes = _embed_axes(f, model)
    N = model.dim
    out = np.zeros((f.m * N, f.m * N), dtype=complex)
    for k, block in f.coeffs.items():
        out += np.kron(block, model.monomial(k, axes))
    return ModelElement(model, out, m=f.m, band=f.band, axes=axes)


def _window_coords(band: int, naxes: int) -> list[tuple[int, ...]]:
    rng = range(-band, band + 1)
    pts = [()]
    for _ in range(naxes):
        pts = [p + (v,) for p in pts for v in rng]
    return pts


def _extract_blocks(
    x: ModelElement, coords: Sequence[tuple[int, ...]], axes: Sequence[int]
) -> dict[tuple[int, ...], np.ndarray]:
    model = x.model
    N = model.dim
    X4 = x.matrix.reshape(x.m, N, x.m, N)
    out = {}
    for k in coords:
        W = model.monomial(k, axes)
        out[k] = np.einsum("aibj,ij->ab", X4, W.conj()) / N
    return out


def fourier_coefficients(
    x: ModelElement, band: int, axes: Optional[Sequence[int]] = None
) -> NCPoly:
    """Trace-pairing coefficients over the band window; inverse of embed there.

    Requires band < n/2 so the window maps injectively into Z_n per axis.
    """
    model = x.model
    if 2 * band >= model.order:
        raise ValueError(f"band {band} must satisfy band < n/2 = {model.order / 2}")
    axes = tuple(range(model.n_generators)) if axes is None else tuple(axes)
    coords = _window_coords(band, len(axes))
    blocks = _extract_blocks(x, coords, axes)
    twist = model.symbol_twist
    if len(axes) != twist.d:
        if len(axes) == 1:
            twist = TwistMatrix.zero(1)
        else:
            raise ValueError("axis subset has no matching symbol twist")
    return NCPoly(twist, x.m, blocks)


def full_window_coefficients(x: ModelElement) -> dict[tuple[int, ...], np.ndarray]:
    """Coefficients over the whole canonical window (exact on the monomial span)."""
    model = x.model
    axes = x.axes if x.axes is not None else tuple(range(model.n_generators))
    pts = [()]
    for _ in axes:
        pts = [p + (v,) for p in pts for v in model.window()]
    return _extract_blocks(x, pts, axes)


def op_norm(x: ModelElement) -> float:
    return _mats.operator_norm(x.matrix)


def schatten_norm(x: ModelElement, p: float) -> float:
    """Normalized-trace Schatten norm, so identity has norm 1 for every p."""
    if p == np.inf:
        return op_norm(x)
    if p < 1:
        raise ValueError("need p >= 1")
    sv = np.linalg.svd(x.matrix, compute_uv=False)
    return float((np.mean(sv**p)) ** (1.0 / p))


def _rescale_coeffs(
    x: ModelElement, scale: Callable[[tuple[int, ...]], complex], verify: bool
) -> ModelElement:
    model = x.model
    axes = x.axes if x.axes is not None else tuple(range(model.n_generators))
    if x.band is not None and 2 * x.band < model.order:
        coords = _window_coords(x.band, len(axes))
        blocks = _extract_blocks(x, coords, axes)
    else:
        blocks = full_window_coefficients(x)
    N = model.dim
    if verify:
        recon = np.zeros_like(x.matrix)
        for k, b in blocks.items():
            recon += np.kron(b, model.monomial(k, axes))
        top = max(1.0, _mats.max_abs(x.matrix))
        if _mats.max_abs(recon - x.matrix) > 1e-8 * top:
            raise ValueError("element overflows the model's monomial window")
    out = np.zeros_like(x.matrix)
    for k, b in blocks.items():
        s = scale(k)
        if s != 0.0:
            out += np.kron(s * b, model.monomial(k, axes))
    return ModelElement(model, out, m=x.m, band=x.band, axes=axes)


def model_multiplier(
    x: ModelElement, phi: MultiplierSpec, verify: bool = True
) -> ModelElement:
    """Extract, scale coefficient-wise by phi, re-embed."""
    return _rescale_coeffs(x, lambda k: phi.value_at(k), verify)


def model_semigroup(
    x: ModelElement, psi: LengthFunction, t: float, verify: bool = True
) -> ModelElement:
    """Heat-type semigroup exp(-t psi) on the model's coefficient basis."""
    return _rescale_coeffs(x, lambda k: np.exp(-t * psi.value(k)), verify)


def dump_matrix(x: ModelElement, path: str) -> None:
    """Debug dump: header b"NCMM" + uint32 rows + uint32 cols (little endian),
    then row-major interleaved (re, im) float64 pairs."""
    mat = np.ascontiguousarray(x.matrix, dtype=complex)
    rows, cols = mat.shape
    with open(path, "wb") as fh:
        fh.write(b"NCMM")
        fh.write(struct.pack("<II", rows, cols))
        inter = np.empty((rows, cols, 2))
        inter[..., 0] = mat.real
        inter[..., 1] = mat.imag
        fh.write(inter.astype("<f8").tobytes())
