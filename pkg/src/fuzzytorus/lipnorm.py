"""Lipschitz seminorms from gradient forms, plus Riesz/Sobolev empirical checks.

The seminorm of x is max(||Gamma(x,x)^(1/2)||, ||Gamma(x*,x*)^(1/2)||),
evaluated either on the symbol side (grid or rational-fiber oracle) or inside
a concrete matrix model.  Gradient matrices are assembled through the PSD
cocycle route sum_i D_i* D_i, so the square root never sees a negative
eigenvalue beyond roundoff.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import _mats
from .lattice import LengthFunction, cocycle_rows_for_coords
from .matrixmodel import (
    ModelElement,
    clock_shift,
    embed,
    full_window_coefficients,
    op_norm,
    _window_coords,
    _extract_blocks,
)
from .ncpoly import (
    NCPoly,
    adjoint,
    gradient_form,
    gradient_sqrt_sup,
    l2_norm,
    sup_norm_oracle,
)

__all__ = [
    "LipReport",
    "lip_seminorm",
    "lip_seminorm_on_model",
    "model_gradient_matrix",
    "riesz_check",
    "sobolev_constant",
    "lip_ball_sample",
]


@dataclass(frozen=True)
class LipReport:
    column: float
    row: float
    lip: float
    mode: str
    psi: str
    m: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "column": self.column,
                "row": self.row,
                "lip": self.lip,
                "mode": self.mode,
                "psi": self.psi,
                "m": self.m,
            }
        )


def _model_psi(psi: LengthFunction, x: ModelElement, naxes: int) -> LengthFunction:
    mods = tuple([x.model.order] * naxes)
    if psi.moduli == mods:
        return psi
    if all(n is None for n in psi.moduli) and psi.dim == naxes:
        return psi.with_moduli(mods)
    raise ValueError("length function moduli do not match the model lattice")


def _model_coeff_list(x: ModelElement):
    axes = x.axes if x.axes is not None else tuple(range(x.model.n_generators))
    if x.band is not None and 2 * x.band < x.model.order:
        coords = _window_coords(x.band, len(axes))
        blocks = _extract_blocks(x, coords, axes)
    else:
        blocks = full_window_coefficients(x)
    blocks = {k: b for k, b in blocks.items() if _mats.max_abs(b) > 1e-15}
    return axes, blocks


_ROWS_CACHE: dict = {}


def cocycle_rows_cached(psi: LengthFunction, support) -> np.ndarray:
    """Cocycle factor rows, memoized on (kind, moduli, support) for the
    built-in length families (supports here are small band windows)."""
    if psi.kind == "custom":
        return cocycle_rows_for_coords(psi, support)
    key = (psi.kind, psi.moduli, tuple(support))
    if key not in _ROWS_CACHE:
        _ROWS_CACHE[key] = cocycle_rows_for_coords(psi, support)
    return _ROWS_CACHE[key]


def _kron_stack(blocks, model, support, axes, m) -> np.ndarray:
    N = model.dim * m
    stack = np.empty((len(support), N, N), dtype=complex)
    for i, k in enumerate(support):
        w = model.monomial(k, axes)
        b = blocks[k]
        stack[i] = b[0, 0] * w if m == 1 else np.kron(b, w)
    return stack.reshape(len(support), N * N)


def model_gradient_matrix(
    x: ModelElement, psi: LengthFunction
) -> np.ndarray:
    """Gamma(x, x) inside the model, PSD by construction.

    With G the cocycle factor of the Gromov form over x's support and
    X_a = xhat(a) (x) W^a, the rows D_i = sum_a G[i,a] X_a satisfy
    Gamma = sum_i D_i* D_i.
    """
    axes, blocks = _model_coeff_list(x)
    if not blocks:
        return np.zeros_like(x.matrix)
    psi_n = _model_psi(psi, x, len(axes))
    support = sorted(blocks.keys())
    rows = cocycle_rows_cached(psi_n, support)
    if rows.size == 0:
        return np.zeros_like(x.matrix)
    N = x.model.dim * x.m
    stack = _kron_stack(blocks, x.model, support, axes, x.m)
    D = (rows @ stack).reshape(-1, N)
    return D.conj().T @ D


def _adjoint_element(x: ModelElement) -> ModelElement:
    return ModelElement(x.model, x.matrix.conj().T, m=x.m, band=x.band, axes=x.axes)


def lip_seminorm(
    x: Union[NCPoly, ModelElement],
    psi: LengthFunction,
    grid: Optional[int] = None,
) -> LipReport:
    """max of the column and row gradient norms of x.

    NCPoly inputs go through the sup-norm oracle of their twist; ModelElement
    inputs are measured by exact dense spectral norms with psi transported to
    the model lattice.
    """
    if isinstance(x, NCPoly):
        col = gradient_sqrt_sup(x, psi, grid=grid)
        row = gradient_sqrt_sup(adjoint(x), psi, grid=grid)
        return LipReport(
            column=col,
            row=row,
            lip=max(col, row),
            mode="oracle",
            psi=psi.describe(),
            m=x.m,
        )
    col = math.sqrt(max(_mats.hermitian_max_eig(model_gradient_matrix(x, psi)), 0.0))
    row = math.sqrt(
        max(_mats.hermitian_max_eig(model_gradient_matrix(_adjoint_element(x), psi)), 0.0)
    )
    naxes = len(x.axes) if x.axes is not None else x.model.n_generators
    return LipReport(
        column=col,
        row=row,
        lip=max(col, row),
        mode="model",
        psi=_model_psi(psi, x, naxes).describe(),
        m=x.m,
    )



def _stacked_model_lip(
    blocks: dict[tuple[int, ...], np.ndarray],
    model,
    psi_n: LengthFunction,
    axes: Sequence[int],
    m: int,
) -> float:
    blocks = {k: b for k, b in blocks.items() if _mats.max_abs(b) > 1e-15}
    if not blocks:
        return 0.0
    support = sorted(blocks.keys())
    rows = cocycle_rows_cached(psi_n, support)
    if rows.size == 0:
        return 0.0
    N = model.dim * m
    stack = _kron_stack(blocks, model, support, axes, m)
    D = (rows @ stack).reshape(-1, N)
    gamma = D.conj().T @ D
    return math.sqrt(max(_mats.hermitian_max_eig(gamma), 0.0))


def _model_adjoint_blocks(
    blocks: dict[tuple[int, ...], np.ndarray], model, axes: Sequence[int]
) -> dict[tuple[int, ...], np.ndarray]:
    """Coefficients of the matrix adjoint: embed(out) == embed(blocks)^H.

    Uses the model's own phase table, which differs from the symbol twist at
    finite n (e.g. theta + 1/n on the fuzzy model).
    """
    out = {}
    for a, b in blocks.items():
        arg = 0.0
        for i in range(len(a)):
            for j in range(i + 1, len(a)):
                arg += a[i] * a[j] * model.phase_table[axes[i], axes[j]]
        mu = np.exp(-2j * np.pi * (arg % 1.0))
        out[tuple(-c for c in a)] = mu * b.conj().T
    return out


def lip_seminorm_on_model(f: NCPoly, model, psi: LengthFunction) -> LipReport:
    """Model-side seminorm of embed(f) straight from the known coefficients.

    Equivalent to lip_seminorm(embed(f, model), psi) but skips the trace
    extraction; the row norm uses the model-phase adjoint so that it matches
    the matrix conjugate-transpose exactly.
    """
    from .matrixmodel import _embed_axes

    axes = _embed_axes(f, model)
    mods = tuple([model.order] * len(axes))
    psi_n = psi if psi.moduli == mods else psi.with_moduli(mods)
    col = _stacked_model_lip(f.coeffs, model, psi_n, axes, f.m)
    row = _stacked_model_lip(
        _model_adjoint_blocks(f.coeffs, model, axes), model, psi_n, axes, f.m
    )
    return LipReport(
        column=col,
        row=row,
        lip=max(col, row),
        mode="model",
        psi=psi_n.describe(),
        m=f.m,
    )


@dataclass(frozen=True)
class RieszReport:
    lhs: float
    rhs_column: float
    rhs_row: float
    ratio: float


def riesz_check(
    x: NCPoly,
    psi: LengthFunction,
    p: float,
    model=None,
) -> RieszReport:
    """Compare ||A^(1/2) x||_p against the max of the two gradient p-norms.

    At p = 2 both sides equal (sum_k psi(k) |xhat(k)|_2^2)^(1/2) exactly; the
    right side is still computed through the assembled gradient form so the
    identity exercises the full bookkeeping path.  p = 4 and p = inf need a
    model to evaluate Schatten norms in.
    """
    mean = x.mean_block()
    scale = max((_mats.max_abs(b) for b in x.coeffs.values()), default=0.0)
    if _mats.max_abs(mean) > 1e-12 * max(scale, 1.0):
        raise ValueError("riesz_check expects a mean-zero element")
    half = x.scale_coeffs(lambda k: math.sqrt(psi.value(k)))
    gamma_c = gradient_form(x, x, psi)
    gamma_r = gradient_form(adjoint(x), adjoint(x), psi)
    if p == 2:
        lhs = l2_norm(half)
        rhs_c = math.sqrt(max(float(np.trace(gamma_c.mean_block()).real) / x.m, 0.0))
        rhs_r = math.sqrt(max(float(np.trace(gamma_r.mean_block()).real) / x.m, 0.0))
    else:
        if model is None:
            raise ValueError("p != 2 needs a matrix model for Schatten norms")
        from .matrixmodel import schatten_norm

        lhs = schatten_norm(embed(half, model), p)
        rhs_c = _psd_sqrt_schatten(embed(gamma_c, model), p)
        rhs_r = _psd_sqrt_schatten(embed(gamma_r, model), p)
    rhs = max(rhs_c, rhs_r)
    ratio = lhs / rhs if rhs > 0 else math.inf if lhs > 0 else 1.0
    return RieszReport(lhs=lhs, rhs_column=rhs_c, rhs_row=rhs_r, ratio=ratio)


def _psd_sqrt_schatten(g: ModelElement, p: float) -> float:
    eigs = np.linalg.eigvalsh(g.matrix)
    sv = np.sqrt(np.clip(eigs, 0.0, None))
    if p == np.inf:
        return float(sv.max(initial=0.0))
    return float((np.mean(sv**p)) ** (1.0 / p))


def sobolev_constant(
    psi: LengthFunction,
    ns: Sequence[int],
    samples: int,
    seed: int,
    band: int = 2,
    tol: float = 1e-9,
) -> dict[int, float]:
    """Empirical per-n constant sup ||x - tau(x) 1|| / L_n(x) on the n-point model."""
    from .ncpoly import TwistMatrix, mean_zero

    out = {}
    for n in ns:
        model = clock_shift(n)
        worst = 0.0
        seen = False
        for i in range(samples):
            rng = np.random.default_rng((seed, n, i))
            coeffs = {
                (k,): rng.standard_normal((1, 1)) + 1j * rng.standard_normal((1, 1))
                for k in range(-band, band + 1)
            }
            f = mean_zero(NCPoly(TwistMatrix.zero(1), 1, coeffs))
            e = embed(f, model)
            lip = lip_seminorm(e, psi).lip
            if lip <= tol:
                continue
            seen = True
            worst = max(worst, op_norm(e) / lip)
        if not seen:
            raise ValueError("all samples were constant; cannot form the ratio")
        out[n] = worst
    return out


def lip_ball_sample(
    R: float,
    band: int,
    m: int,
    count: int,
    seed: int,
    psi: LengthFunction,
    twist=None,
    model=None,
    selfadjoint: bool = False,
    grid: Optional[int] = None,
    max_retries: int = 8,
) -> list[NCPoly]:
    """Random elements of D_R = {L(x) <= 1, ||x|| <= R}, membership exact.

    Coefficient blocks are i.i.d. complex Gaussian on the band window
    (symmetrized in self-adjoint mode), then rescaled by max(L(x), ||x||/R).
    Per-sample generators are seeded with (seed, index) so draws are
    order-independent.
    """
    from .ncpoly import TwistMatrix

    if R <= 0:
        raise ValueError("R must be positive; D_0 has empty interior here")
    if twist is None:
        twist = TwistMatrix.zero(psi.dim)
    d = twist.d
    coords = [()]
    for _ in range(d):
        coords = [c + (k,) for c in coords for k in range(-band, band + 1)]
    out = []
    for i in range(count):
        for attempt in range(max_retries):
            rng = np.random.default_rng((seed, i, attempt))
            coeffs = {
                c: rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
                for c in coords
            }
            f = NCPoly(twist, m, coeffs)
            if selfadjoint:
                f = 0.5 * (f + adjoint(f))
            if model is not None:
                e = embed(f, model)
                norm = op_norm(e)
                lip = lip_seminorm(e, psi).lip
            else:
                norm = sup_norm_oracle(f, grid=grid)
                lip = lip_seminorm(f, psi, grid=grid).lip
            s = max(lip, norm / R)
            if s > 1e-12:
                out.append((1.0 / s) * f)
                break
        else:
            raise ValueError("degenerate draws exhausted the retry budget")
    return out
