"""Experiment suite measuring how fast the matrix models converge.

Each ``run_*`` function consumes an ExperimentConfig and emits ReportRows.
Every experiment is deterministic under (config, seed): per-sample generators
are seeded with structured tuples and aggregation order is fixed, so reruns
produce byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _mats
from .lattice import (
    LengthFunction,
    MultiplierSpec,
    build_smoothing_multiplier,
    cocycle_rows_for_coords,
    gromov_entries_for_coords,
    product_multiplier,
)
from .lipnorm import lip_ball_sample, lip_seminorm, lip_seminorm_on_model
from .matrixmodel import (
    MatrixModel,
    ModelElement,
    clock_shift,
    embed,
    fourier_coefficients,
    fuzzy_generators,
    op_norm,
)
from .ncpoly import (
    NCPoly,
    TwistMatrix,
    adjoint,
    apply_multiplier,
    gradient_form,
    l2_norm,
    mean_zero,
)

__all__ = [
    "ExperimentConfig",
    "ReportRow",
    "EXPERIMENTS",
    "default_config",
    "run_experiment",
    "kendall_decreasing",
    "row_passes",
]


# Metrics listed here pass when value >= bound; everything else when value <= bound.
GE_METRICS = {
    "psd_min_eig/heat",
    "psd_min_eig/word",
    "coverage_fraction",
    "isometry_norm_trend_kendall",
    "isometry_lip_trend_kendall",
    "reach_trend_kendall",
}


def row_passes(metric: str, value: float, bound: float) -> bool:
    if not math.isfinite(value):
        return False
    if metric in GE_METRICS:
        return value >= bound
    return value <= bound


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    n: Optional[int]
    metric: str
    value: float
    bound: float
    passed: bool

    @classmethod
    def make(cls, experiment, n, metric, value, bound) -> "ReportRow":
        return cls(experiment, n, metric, float(value), float(bound),
                   row_passes(metric, float(value), float(bound)))


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by the experiment registry; unused fields are ignored."""

    experiment: str
    seed: int
    psi: str = "heat"
    theta: Optional[tuple[int, int]] = None  # (p, m) rational; None = commutative
    band: int = 2
    amplifications: tuple[int, ...] = (1,)
    n_schedule: tuple[int, ...] = ()
    samples: int = 50
    lip_samples: int = 25
    R: float = 1.0
    eps: float = 0.25
    eps_multiplier: Optional[float] = None
    cutoffs: tuple[int, ...] = (2, 4, 8)
    sample_band: int = 1
    net_cap: int = 500_000
    grid: Optional[int] = None
    lip_grid: int = 128
    tol: float = 1e-10

    def __post_init__(self):
        ns = tuple(self.n_schedule)
        if any(b >= a for a, b in zip(ns[1:], ns[:-1])):
            raise ValueError("n schedule must be strictly increasing")
        if self.theta is not None:
            p, m = self.theta
            if m > 1:
                allowed = set()
                k = m * m
                while k <= max(ns, default=0):
                    allowed.add(k)
                    k *= m
                bad = [n for n in ns if n not in allowed]
                if bad:
                    raise ValueError(
                        f"schedule entries {bad} are not admissible sizes m^(k+1) for m={m}"
                    )


def _length(kind: str, moduli) -> LengthFunction:
    return LengthFunction(kind, tuple(moduli))


def kendall_decreasing(vals: Sequence[float]) -> float:
    """Kendall tau of the sequence against a strictly decreasing template."""
    n = len(vals)
    if n < 2:
        return 1.0
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            s += int(np.sign(vals[i] - vals[j]))
    return s / (n * (n - 1) / 2)


# ---------------------------------------------------------------------------
# shared vectorized oracle helpers (fixed support, many coefficient stacks)
# ---------------------------------------------------------------------------


class SymbolGrid:
    """Grid evaluation of symbols over a fixed support, phases cached."""

    def __init__(self, support: Sequence[tuple[int, ...]], G: int, d: int,
                 fiber: Optional[tuple[int, int]] = None):
        self.support = list(support)
        self.G = G
        self.d = d
        ks = np.array(self.support)
        P = np.ones((1, len(self.support)), dtype=complex)
        t = np.arange(G) / G
        for axis in range(d):
            E = np.exp(2j * np.pi * np.outer(t, ks[:, axis]))
            P = (P[:, None, :] * E[None, :, :]).reshape(-1, len(self.support))
        self.P = P
        self.fiber_mats = None
        if fiber is not None:
            p, q = fiber
            u = _mats.clock(q)
            v = _mats.shift(q)
            self.fiber_mats = [
                _mats.unitary_power(u, k[0], q) @ _mats.unitary_power(v, k[1] * p, q)
                for k in self.support
            ]

    def _lift(self, blocks: dict[tuple[int, ...], np.ndarray], m: int) -> np.ndarray:
        zero_q = 1 if self.fiber_mats is None else self.fiber_mats[0].shape[0]
        X = np.zeros((len(self.support), m * zero_q, m * zero_q), dtype=complex)
        for i, k in enumerate(self.support):
            b = blocks.get(k)
            if b is None:
                continue
            b = np.atleast_2d(b)
            X[i] = b if self.fiber_mats is None else np.kron(b, self.fiber_mats[i])
        return X

    def norm(self, blocks: dict[tuple[int, ...], np.ndarray], m: int = 1) -> float:
        X = self._lift(blocks, m)
        S = np.tensordot(self.P, X, axes=(1, 0))
        return float(_mats.batched_sigma_max(S).max())

    def lip_column(
        self,
        blocks: dict[tuple[int, ...], np.ndarray],
        rows: np.ndarray,
        m: int = 1,
    ) -> float:
        """||Gamma^(1/2)|| from precomputed cocycle rows over this support."""
        X = self._lift(blocks, m)
        W = np.einsum("rs,sij->rsij", rows, X)
        D = np.tensordot(self.P, W, axes=(1, 1))  # (grid, r, mm, mm)
        H = np.einsum("trki,trkj->tij", D.conj(), D)
        return float(np.sqrt(max(_batched_max_eig(H).max(), 0.0)))


def _batched_max_eig(H: np.ndarray) -> np.ndarray:
    mm = H.shape[-1]
    if mm == 1:
        return H[..., 0, 0].real
    if mm == 2:
        tr = (H[..., 0, 0] + H[..., 1, 1]).real
        det = (H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0]).real
        disc = np.maximum(tr * tr - 4.0 * det, 0.0)
        return 0.5 * (tr + np.sqrt(disc))
    return np.linalg.eigvalsh(H)[..., -1]


def _window(band: int, d: int) -> list[tuple[int, ...]]:
    pts = [()]
    for _ in range(d):
        pts = [p + (k,) for p in pts for k in range(-band, band + 1)]
    return pts


def _draw_blocks(rng, coords, m) -> dict[tuple[int, ...], np.ndarray]:
    return {
        c: rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        for c in coords
    }


def _symbol_adjoint_blocks(f: NCPoly) -> dict[tuple[int, ...], np.ndarray]:
    return dict(adjoint(f).coeffs)


# ---------------------------------------------------------------------------
# intertwining
# ---------------------------------------------------------------------------


def run_intertwining(cfg: ExperimentConfig) -> list[ReportRow]:
    """Entrywise defect of Gamma^n(pi_n f, pi_n f) - pi_n Gamma(f, f), d = 1."""
    psi_inf = _length(cfg.psi, (None,))
    tw = TwistMatrix.zero(1)
    rows = []
    for n in cfg.n_schedule:
        if 2 * cfg.band > n:
            raise ValueError("band exceeds n/2; intertwining needs band <= n/2")
        model = clock_shift(n)
        psi_n = psi_inf.with_moduli((n,))
        worst = 0.0
        for i in range(cfg.samples):
            rng = np.random.default_rng((cfg.seed, n, i))
            f = NCPoly(tw, 1, _draw_blocks(rng, _window(cfg.band, 1), 1))
            lhs = _model_gamma_from_poly(f, model, psi_n, axes=(0,))
            rhs = embed(gradient_form(f, f, psi_inf), model).matrix
            worst = max(worst, _mats.max_abs(lhs - rhs))
        rows.append(ReportRow.make(cfg.experiment, n, "intertwining_defect", worst, cfg.tol))
    return rows


def _model_gamma_from_poly(f: NCPoly, model: MatrixModel, psi_n: LengthFunction,
                           axes: Sequence[int]) -> np.ndarray:
    from .lipnorm import _kron_stack, cocycle_rows_cached

    support = f.support()
    rows = cocycle_rows_cached(psi_n, support)
    N = model.dim * f.m
    if rows.size == 0:
        return np.zeros((N, N), dtype=complex)
    stack = _kron_stack(f.coeffs, model, support, axes, f.m)
    D = (rows @ stack).reshape(-1, N)
    return D.conj().T @ D


# ---------------------------------------------------------------------------
# rate
# ---------------------------------------------------------------------------


def _scalar_grid_values(coeffs: dict[tuple[int, ...], complex], G: int) -> np.ndarray:
    t = np.arange(G) / G
    out = np.zeros(G, dtype=complex)
    for (k,), c in coeffs.items():
        out += c * np.exp(2j * np.pi * k * t)
    return out


def run_rate(cfg: ExperimentConfig) -> list[ReportRow]:
    """Norm and gradient-norm defects of the n-point restriction of a fixed
    trig polynomial, with the O(1/n) constant fitted from the sweep."""
    G = cfg.grid or 2048
    for n in cfg.n_schedule:
        if G % n != 0:
            raise ValueError("oracle grid must contain every n-grid as a subgrid")
    c = 1.0 / math.sqrt(2.0)
    fc = {(1,): np.exp(-2j * np.pi * c), (-1,): np.exp(2j * np.pi * c)}
    psi_inf = _length(cfg.psi, (None,))
    tw = TwistMatrix.zero(1)
    f = NCPoly(tw, 1, {k: np.array([[v]]) for k, v in fc.items()})
    fvals = np.abs(_scalar_grid_values(fc, G))
    ref_norm = float(fvals.max())
    gpoly = gradient_form(f, f, psi_inf)
    gvals = _scalar_grid_values({k: g[0, 0] for k, g in gpoly.coeffs.items()}, G).real
    ref_gamma = float(gvals.max())

    rows = []
    scaled = []
    scaled_gamma = []
    for n in cfg.n_schedule:
        step = G // n
        d_norm = ref_norm - float(fvals[::step].max())
        gn = gradient_form(f, f, psi_inf.with_moduli((n,)))
        gn_vals = _scalar_grid_values(
            {k: g[0, 0] for k, g in gn.coeffs.items()}, n
        ).real
        d_gamma = ref_gamma - float(gn_vals.max())
        scaled.append(d_norm * n)
        scaled_gamma.append(d_gamma * n)
        rows.append(ReportRow.make(cfg.experiment, n, "norm_defect", d_norm, math.inf))
        rows.append(ReportRow.make(cfg.experiment, n, "norm_defect_negpart",
                                   max(0.0, -d_norm), 1e-12))
        rows.append(ReportRow.make(cfg.experiment, n, "norm_defect_scaled",
                                   d_norm * n, math.inf))
        rows.append(ReportRow.make(cfg.experiment, n, "gamma_defect", d_gamma, math.inf))
        rows.append(ReportRow.make(cfg.experiment, n, "gamma_defect_negpart",
                                   max(0.0, -d_gamma), 1e-12))
        rows.append(ReportRow.make(cfg.experiment, n, "gamma_defect_scaled",
                                   d_gamma * n, math.inf))
    half = len(cfg.n_schedule) // 2
    tail_min = min(scaled[half:]) if scaled[half:] else math.nan
    const = max(scaled)
    ratio = const / tail_min if tail_min > 0 else math.inf
    rows.append(ReportRow.make(cfg.experiment, None, "rate_constant", const, math.inf))
    rows.append(ReportRow.make(cfg.experiment, None, "rate_spread", ratio, math.inf))
    rows.append(ReportRow.make(cfg.experiment, None, "rate_constant_gamma",
                               max(scaled_gamma), math.inf))
    return rows


# ---------------------------------------------------------------------------
# isometry defect
# ---------------------------------------------------------------------------


def _model_for(cfg: ExperimentConfig, n: int) -> MatrixModel:
    if cfg.theta is None:
        return clock_shift(n)
    p, m = cfg.theta
    return fuzzy_generators(p, m, n)


def _twist_for(cfg: ExperimentConfig) -> TwistMatrix:
    if cfg.theta is None:
        return TwistMatrix.zero(2)
    p, m = cfg.theta
    return TwistMatrix.rational_2d(p, m) if m > 1 else TwistMatrix.zero(2)


def run_isometry_defect(cfg: ExperimentConfig) -> list[ReportRow]:
    """eps(n) = worst |norm ratio - 1| of coefficient transport, plus the
    matching Lipschitz-isometry defect on a smaller sample set."""
    tw = _twist_for(cfg)
    psi_inf = _length(cfg.psi, (None, None))
    support = _window(cfg.band, 2)
    fiber = tw.rational if (tw.rational and not tw.is_zero) else None
    G = cfg.grid or 512
    oracle = SymbolGrid(support, G, 2, fiber=fiber)
    lip_oracle = SymbolGrid(support, cfg.lip_grid, 2, fiber=fiber)
    lip_rows_inf = cocycle_rows_for_coords(psi_inf, support)

    draws = []
    for amp in cfg.amplifications:
        for i in range(cfg.samples):
            rng = np.random.default_rng((cfg.seed, amp, i))
            blocks = _draw_blocks(rng, support, amp)
            f = NCPoly(tw, amp, blocks)
            draws.append((amp, i, f, oracle.norm(blocks, amp)))

    lip_draws = []
    for amp, i, f, _ in draws:
        if amp != cfg.amplifications[0] or i >= cfg.lip_samples:
            continue
        col = lip_oracle.lip_column(f.coeffs, lip_rows_inf, amp)
        row = lip_oracle.lip_column(_symbol_adjoint_blocks(f), lip_rows_inf, amp)
        lip_draws.append((amp, f, max(col, row)))

    rows = []
    norm_defects = []
    lip_defects = []
    final_n = cfg.n_schedule[-1]
    for n in cfg.n_schedule:
        model = _model_for(cfg, n)
        worst = 0.0
        for amp, i, f, ref in draws:
            worst = max(worst, abs(op_norm(embed(f, model)) / ref - 1.0))
        norm_defects.append(worst)
        worst_lip = 0.0
        for amp, f, ref in lip_draws:
            ln = lip_seminorm_on_model(f, model, psi_inf).lip
            worst_lip = max(worst_lip, abs(ln / ref - 1.0))
        lip_defects.append(worst_lip)
        bound = cfg.eps if n == final_n else math.inf
        rows.append(ReportRow.make(cfg.experiment, n, "isometry_norm_defect", worst, bound))
        rows.append(ReportRow.make(cfg.experiment, n, "isometry_lip_defect",
                                   worst_lip, math.inf))
    rows.append(ReportRow.make(cfg.experiment, None, "isometry_norm_trend_kendall",
                               kendall_decreasing(norm_defects), 0.5))
    rows.append(ReportRow.make(cfg.experiment, None, "isometry_lip_trend_kendall",
                               kendall_decreasing(lip_defects), 0.5))
    return rows


# ---------------------------------------------------------------------------
# smoothing tail
# ---------------------------------------------------------------------------


def _product_smoother(psi_coord: LengthFunction, k_freq: int, eps: float) -> MultiplierSpec:
    k_val = psi_coord.coord_value(k_freq)
    part = build_smoothing_multiplier(psi_coord, k_val, eps)
    return product_multiplier([part, part])


def run_smoothing_tail(cfg: ExperimentConfig) -> list[ReportRow]:
    """sup over samples of ||x - T_phi x|| / (||x||_2 + L(x)) and the pure-Lip
    variant, per frequency cutoff; the sup is reported, monotone in the cutoff."""
    n = cfg.n_schedule[-1] if cfg.n_schedule else 64
    if 2 * cfg.band >= n:
        raise ValueError("sample band exceeds the model window; need band < n/2")
    model = clock_shift(n)
    tw = TwistMatrix.zero(2)
    psi_n = _length(cfg.psi, (n, n))
    psi_coord = _length(cfg.psi, (n,))
    eps_part = cfg.eps_multiplier if cfg.eps_multiplier is not None else cfg.eps / 2

    sample_list = []
    for amp in cfg.amplifications:
        for i in range(cfg.samples):
            rng = np.random.default_rng((cfg.seed, amp, i))
            f = mean_zero(NCPoly(tw, amp, _draw_blocks(rng, _window(cfg.band, 2), amp)))
            e = embed(f, model)
            l2 = l2_norm(f)
            lip = lip_seminorm_on_model(f, model, psi_n).lip
            sample_list.append((f, e, l2, lip))

    rows = []
    prev1 = prev2 = None
    for k_freq in cfg.cutoffs:
        phi = _product_smoother(psi_coord, k_freq, eps_part)
        sup1 = 0.0
        sup2 = 0.0
        for f, e, l2, lip in sample_list:
            diff = e.matrix - embed(apply_multiplier(f, phi), model).matrix
            num = _mats.operator_norm(diff)
            sup1 = max(sup1, num / (l2 + lip))
            sup2 = max(sup2, num / lip if lip > 0 else math.inf)
        rows.append(ReportRow.make(cfg.experiment, k_freq, "tail_ratio_l2lip", sup1, math.inf))
        rows.append(ReportRow.make(cfg.experiment, k_freq, "tail_ratio_lip", sup2, math.inf))
        rows.append(ReportRow.make(cfg.experiment, k_freq, "tail_target_gap",
                                   sup1 - cfg.eps, math.inf))
        if prev1 is not None:
            rows.append(ReportRow.make(cfg.experiment, k_freq, "tail_monotone_l2lip",
                                       sup1 - prev1, cfg.tol))
            rows.append(ReportRow.make(cfg.experiment, k_freq, "tail_monotone_lip",
                                       sup2 - prev2, cfg.tol))
        prev1, prev2 = sup1, sup2
    return rows


# ---------------------------------------------------------------------------
# PSD audit
# ---------------------------------------------------------------------------


def run_psd_audit(cfg: ExperimentConfig) -> list[ReportRow]:
    """Heat and word Gromov forms stay PSD on the schedule; the naive square
    length must produce a strictly negative witness somewhere in 4..16."""
    from .lattice import check_conditionally_negative

    rows = []
    ns = cfg.n_schedule or tuple(range(4, 65))
    for kind in ("heat", "word"):
        for n in ns:
            ok, witness = check_conditionally_negative(
                _length(kind, (n,)), tol=cfg.tol
            )
            rows.append(ReportRow.make(cfg.experiment, n, f"psd_min_eig/{kind}",
                                       witness, -cfg.tol))
    worst = math.inf
    for n in range(4, 17):
        _, witness = check_conditionally_negative(
            LengthFunction.naive_square((n,)), tol=cfg.tol
        )
        rows.append(ReportRow.make(cfg.experiment, n, "naive_min_eig", witness, math.inf))
        worst = min(worst, witness)
    rows.append(ReportRow.make(cfg.experiment, None, "naive_max_witness", worst, -cfg.tol))
    return rows


# ---------------------------------------------------------------------------
# covering net
# ---------------------------------------------------------------------------


def _net_axis(limit: float, pitch: float) -> np.ndarray:
    m = int(math.floor(limit / pitch))
    return pitch * np.arange(-m, m + 1)


def run_covering_net(cfg: ExperimentConfig) -> list[ReportRow]:
    """Coefficient-lattice eps-net of the band-limited D_R ball, checked to
    cover model-side samples within (4R+2) eps (d = 1)."""
    n = cfg.n_schedule[-1] if cfg.n_schedule else 64
    b = cfg.sample_band
    R = cfg.R
    eps = cfg.eps
    if R == 0:
        # D_0 = {0}: the one-point net covers it at distance zero
        return [
            ReportRow.make(cfg.experiment, n, "coverage_fraction", 1.0, 1.0),
            ReportRow.make(cfg.experiment, n, "covering_radius", 0.0, 2 * eps),
            ReportRow.make(cfg.experiment, n, "hausdorff_bound", 0.0, 2 * eps),
            ReportRow.make(cfg.experiment, n, "net_size", 1, cfg.net_cap),
        ]
    model = clock_shift(n)
    psi_sym = _length(cfg.psi, (None,))
    psi_n = _length(cfg.psi, (n,))
    coords = [(k,) for k in range(-b, b + 1)]
    s = len(coords)

    pitch = eps / (2 * s)
    axes = [_net_axis(R + pitch, pitch)]
    for k in range(1, b + 1):
        lim = min(R, 1.0 / math.sqrt(2.0 * psi_sym.coord_value(k))) + pitch
        axes.append(_net_axis(lim, pitch))
        axes.append(_net_axis(lim, pitch))
    sizes = [len(a) for a in axes]
    count = int(np.prod([float(x) for x in sizes]))
    if count > cfg.net_cap:
        feasible = pitch * (count / cfg.net_cap) ** (1.0 / len(axes))
        raise ValueError(
            f"net budget exceeded: {count} candidates > cap {cfg.net_cap}; "
            f"a cap-sized net only achieves pitch {feasible:.4g} "
            f"(radius about {s * feasible / 2:.4g}) instead of {pitch:.4g}"
        )
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    C = np.zeros((count, s), dtype=complex)
    C[:, b] = flat[0]
    for k in range(1, b + 1):
        ck = flat[2 * k - 1] + 1j * flat[2 * k]
        C[:, b + k] = ck
        C[:, b - k] = ck.conj()

    ks = np.array([c[0] for c in coords])
    t_n = np.arange(n) / n
    E_n = np.exp(2j * np.pi * np.outer(ks, t_n))  # (s, n)
    Gf = max(64, 16 * b, n)
    E_f = np.exp(2j * np.pi * np.outer(ks, np.arange(Gf) / Gf))

    def batch_lip(Cm: np.ndarray, psi: LengthFunction, E: np.ndarray) -> np.ndarray:
        # Gamma(t) = sum_{s,t'} K[s,t'] conj(c_s) c_t' conj(E_s) E_t' pointwise
        K = gromov_entries_for_coords(psi, coords)
        F = (E.conj()[:, None, :] * E[None, :, :]).reshape(s * s, -1)
        M = (K.reshape(1, s, s) * (Cm.conj()[:, :, None] * Cm[:, None, :])).reshape(-1, s * s)
        g_vals = (M @ F).real
        return np.sqrt(np.maximum(g_vals.max(axis=1), 0.0))

    norms = np.abs(C @ E_f).max(axis=1)
    lips = batch_lip(C, psi_sym, E_f)
    sigma = np.maximum(1.0, np.maximum(lips, norms / R))
    C = C / sigma[:, None]
    net_vals = C @ E_n  # (count, n) model diagonal values

    # direction 2: embedded net points against membership in D_R(M_n)
    lips_n = batch_lip(C, psi_n, E_n)
    norms_n = np.abs(net_vals).max(axis=1)
    sig2 = np.maximum(1.0, np.maximum(lips_n, norms_n / R))
    d2 = float(((1.0 - 1.0 / sig2) * norms_n).max())

    tw = TwistMatrix.zero(1)
    k_val = psi_n.coord_value(1)
    phi = build_smoothing_multiplier(psi_n, k_val, eps)
    samples = lip_ball_sample(
        R, b, 1, cfg.samples, cfg.seed, psi=psi_n, twist=tw, model=model,
        selfadjoint=True,
    )
    radius = 0.0
    covered = 0
    resid = 0.0
    for f in samples:
        e = embed(f, model)
        y_vals = np.diag(e.matrix)
        dist = float(np.abs(net_vals - y_vals[None, :]).max(axis=1).min())
        radius = max(radius, dist)
        if dist <= (4 * R + 2) * eps:
            covered += 1
        y_phi = embed(apply_multiplier(f, phi), model)
        resid = max(resid, _mats.operator_norm(e.matrix - y_phi.matrix))

    rows = [
        ReportRow.make(cfg.experiment, n, "coverage_fraction",
                       covered / len(samples), 1.0),
        ReportRow.make(cfg.experiment, n, "covering_radius", radius, (4 * R + 2) * eps),
        ReportRow.make(cfg.experiment, n, "hausdorff_bound",
                       max(radius, d2), (4 * R + 2) * eps),
        ReportRow.make(cfg.experiment, n, "net_size", count, cfg.net_cap),
        ReportRow.make(cfg.experiment, n, "smoothing_residual_max", resid, math.inf),
    ]
    return rows


# ---------------------------------------------------------------------------
# bridge reach
# ---------------------------------------------------------------------------


def run_bridge_reach(cfg: ExperimentConfig) -> list[ReportRow]:
    """Two-direction transfer of unit-Lip elements between the symbol algebra
    and the fuzzy models; reach is the norm-mismatch surrogate plus the
    smoothing residual, and the block derivation is checked on a = b."""
    if cfg.theta is None:
        raise ValueError("bridge reach needs a rational twist")
    tw = _twist_for(cfg)
    psi_inf = _length(cfg.psi, (None, None))
    psi_coord_inf = _length(cfg.psi, (None,))
    support = _window(cfg.band, 2)
    support_nz = [c for c in support if any(c)]
    fiber = tw.rational
    G = cfg.grid or 128
    oracle = SymbolGrid(support, G, 2, fiber=fiber)
    rows_inf = cocycle_rows_for_coords(psi_inf, support)

    eps_part = cfg.eps_multiplier if cfg.eps_multiplier is not None else 0.01
    k_val = psi_coord_inf.coord_value(cfg.band)
    phi = product_multiplier([build_smoothing_multiplier(psi_coord_inf, k_val, eps_part)] * 2)

    def sym_lip(f: NCPoly, amp: int) -> float:
        col = oracle.lip_column(f.coeffs, rows_inf, amp)
        row = oracle.lip_column(_symbol_adjoint_blocks(f), rows_inf, amp)
        return max(col, row)

    # symbol-side unit-Lip samples, shared across n
    a_side = []
    for amp in cfg.amplifications:
        for i in range(cfg.samples):
            rng = np.random.default_rng((cfg.seed, 1, amp, i))
            f = NCPoly(tw, amp, _draw_blocks(rng, support_nz, amp))
            lam = sym_lip(f, amp)
            if lam <= 1e-9:
                continue
            a = (1.0 / lam) * f
            a_phi = apply_multiplier(a, phi)
            a_side.append(
                (amp, a_phi,
                 oracle.norm(a_phi.coeffs, amp),
                 oracle.norm((a - a_phi).coeffs, amp))
            )

    rows = []
    reaches = []
    final_n = cfg.n_schedule[-1]
    delta_third = 0.0
    delta_consistency = 0.0
    delta_norm_max = 0.0
    for n in cfg.n_schedule:
        model = _model_for(cfg, n)
        psi_n = psi_inf.with_moduli((n, n))
        worst = 0.0
        for amp, a_phi, norm_aphi, resid in a_side:
            bp = embed(a_phi, model)
            ln = lip_seminorm_on_model(a_phi, model, psi_n).lip
            scale = max(1.0, ln)
            mismatch = abs(norm_aphi - op_norm(bp) / scale)
            worst = max(worst, mismatch + resid)
            delta_norm_max = max(
                delta_norm_max, max(1.0, ln / scale, (mismatch + resid) / cfg.eps)
            )
        for amp in cfg.amplifications:
            for i in range(cfg.samples):
                rng = np.random.default_rng((cfg.seed, 2, n, amp, i))
                f = NCPoly(tw, amp, _draw_blocks(rng, support_nz, amp))
                ln = lip_seminorm_on_model(f, model, psi_n).lip
                if ln <= 1e-9:
                    continue
                b = (1.0 / ln) * f
                b_phi = apply_multiplier(b, phi)
                resid = op_norm(embed(b - b_phi, model))
                lam = sym_lip(b_phi, amp)
                scale = max(1.0, lam)
                mismatch = abs(oracle.norm(b_phi.coeffs, amp) / scale
                               - op_norm(embed(b_phi, model)))
                worst = max(worst, mismatch + resid)
        reaches.append(worst)
        bound = cfg.eps if n == final_n else math.inf
        rows.append(ReportRow.make(cfg.experiment, n, "reach", worst, bound))

        # diagonal delta-block checks: transfer of a model element onto itself
        rng = np.random.default_rng((cfg.seed, 3, n))
        f = NCPoly(tw, 1, _draw_blocks(rng, support_nz, 1))
        ln = lip_seminorm_on_model(f, model, psi_n).lip
        b = embed((1.0 / ln) * f, model)
        pulled = fourier_coefficients(b, cfg.band)
        b2 = embed(pulled, model)
        third = op_norm(ModelElement(model, b.matrix - b2.matrix, m=1)) / cfg.eps
        l1 = lip_seminorm_on_model((1.0 / ln) * f, model, psi_n).lip
        l2_ = lip_seminorm_on_model(pulled, model, psi_n).lip
        delta_third = max(delta_third, third)
        delta_consistency = max(
            delta_consistency, abs(max(l1, l2_, third) - max(l1, l2_))
        )
    rows.append(ReportRow.make(cfg.experiment, None, "reach_trend_kendall",
                               kendall_decreasing(reaches), 0.5))
    rows.append(ReportRow.make(cfg.experiment, None, "delta_diag_third_block",
                               delta_third, cfg.tol))
    rows.append(ReportRow.make(cfg.experiment, None, "delta_norm_consistency",
                               delta_consistency, cfg.tol))
    rows.append(ReportRow.make(cfg.experiment, None, "delta_block_norm",
                               delta_norm_max, math.inf))
    return rows


# ---------------------------------------------------------------------------
# heat vs word fractional-power equivalence (recorded, no threshold)
# ---------------------------------------------------------------------------


def run_hp_ratio(cfg: ExperimentConfig) -> list[ReportRow]:
    """Empirical range of ||A^(beta/2) x||_p / ||B^beta x||_p with A the heat
    and B the word generator, p in {2, 4}.  The equivalence constants are not
    pinned anywhere, so the rows are informational."""
    from .matrixmodel import schatten_norm

    n = cfg.n_schedule[-1] if cfg.n_schedule else 64
    model = clock_shift(n)
    heat = _length("heat", (n, n))
    word = _length("word", (n, n))
    beta = 0.5
    tw = TwistMatrix.zero(2)
    rows = []
    for p in (2, 4):
        lo, hi = math.inf, 0.0
        for i in range(cfg.samples):
            rng = np.random.default_rng((cfg.seed, p, i))
            f = mean_zero(NCPoly(tw, 1, _draw_blocks(rng, _window(cfg.band, 2), 1)))
            a = f.scale_coeffs(lambda k: heat.value(k) ** (beta / 2))
            b = f.scale_coeffs(lambda k: word.value(k) ** beta)
            ratio = schatten_norm(embed(a, model), p) / schatten_norm(embed(b, model), p)
            lo, hi = min(lo, ratio), max(hi, ratio)
        rows.append(ReportRow.make(cfg.experiment, p, "hp_ratio_min", lo, math.inf))
        rows.append(ReportRow.make(cfg.experiment, p, "hp_ratio_max", hi, math.inf))
    return rows


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

EXPERIMENTS: dict[str, Callable[[ExperimentConfig], list[ReportRow]]] = {
    "intertwining": run_intertwining,
    "rate": run_rate,
    "isometry": run_isometry_defect,
    "smoothing-tail": run_smoothing_tail,
    "psd-audit": run_psd_audit,
    "covering-net": run_covering_net,
    "bridge-reach": run_bridge_reach,
    "hp-ratio": run_hp_ratio,
}

_DEFAULTS: dict[str, dict] = {
    "intertwining": dict(psi="word", band=4, n_schedule=(16, 32), samples=50),
    "rate": dict(psi="heat", n_schedule=(16, 32, 64, 128, 256, 512, 1024), grid=16384),
    "isometry": dict(psi="heat", band=2, amplifications=(1, 2),
                     n_schedule=(16, 32, 64, 128, 256), samples=100,
                     lip_samples=25, grid=512, eps=0.05),
    "smoothing-tail": dict(psi="heat", band=8, n_schedule=(64,), samples=200,
                           cutoffs=(2, 4, 8), eps=0.25),
    "psd-audit": dict(n_schedule=tuple(range(4, 65))),
    "covering-net": dict(psi="heat", n_schedule=(64,), samples=500, R=1.0,
                         eps=0.25, sample_band=1),
    "bridge-reach": dict(psi="heat", theta=(1, 2), band=2,
                         n_schedule=(8, 16, 32, 64, 128), samples=8,
                         amplifications=(1, 2), eps=0.1, eps_multiplier=0.01,
                         grid=128),
    "hp-ratio": dict(psi="heat", band=4, n_schedule=(64,), samples=40),
}


def default_config(experiment: str, seed: int = 20240901) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment id {experiment!r}")
    return ExperimentConfig(experiment=experiment, seed=seed, **_DEFAULTS[experiment])


def run_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    if cfg.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment id {cfg.experiment!r}")
    return EXPERIMENTS[cfg.experiment](cfg)
