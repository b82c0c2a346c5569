import json
import math

import numpy as np
import pytest

from fuzzytorus.lattice import LengthFunction, build_smoothing_multiplier, product_multiplier
from fuzzytorus.lipnorm import (
    lip_ball_sample,
    lip_seminorm,
    lip_seminorm_on_model,
    model_gradient_matrix,
    riesz_check,
    sobolev_constant,
)
from fuzzytorus.matrixmodel import clock_shift, embed, fuzzy_generators, op_norm
from fuzzytorus.ncpoly import (
    NCPoly,
    TwistMatrix,
    adjoint,
    apply_multiplier,
    mean_zero,
    multiply,
    sup_norm_oracle,
)

HEAT1 = LengthFunction.heat((None,))
HEAT2 = LengthFunction.heat((None, None))


def rand_poly(rng, twist, band, m=1, sa=False, drop_mean=False):
    coords = [()]
    for _ in range(twist.d):
        coords = [c + (k,) for c in coords for k in range(-band, band + 1)]
    f = NCPoly(
        twist,
        m,
        {c: rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)) for c in coords},
    )
    if sa:
        f = 0.5 * (f + adjoint(f))
    if drop_mean:
        f = mean_zero(f)
    return f


# -- seminorm examples ---------------------------------------------------------


def test_lip_examples():
    z1 = TwistMatrix.zero(1)
    for k in (1, 2, 5):
        assert lip_seminorm(NCPoly.monomial(z1, (k,)), HEAT1).lip == pytest.approx(
            abs(k)
        )
    assert lip_seminorm(NCPoly.one(z1), HEAT1).lip == pytest.approx(0.0)
    blk = NCPoly.monomial(z1, (0,), block=np.array([[1.0, 2.0], [0.5, -1.0]]), m=2)
    assert lip_seminorm(blk, HEAT1).lip == pytest.approx(0.0)
    u = NCPoly.generator(z1, 0)
    assert lip_seminorm(u + adjoint(u), HEAT1).lip == pytest.approx(2.0)


def test_lip_report_json_fields():
    z1 = TwistMatrix.zero(1)
    rep = lip_seminorm(NCPoly.generator(z1, 0), HEAT1)
    doc = json.loads(rep.to_json())
    assert set(doc) == {"column", "row", "lip", "mode", "psi", "m"}


def test_lip_requires_an_oracle():
    irr = TwistMatrix.two_dim(1 / math.sqrt(5))
    with pytest.raises(ValueError):
        lip_seminorm(NCPoly.generator(irr, 0), HEAT2)


def test_lip_homogeneity_and_adjoint_symmetry():
    rng = np.random.default_rng(2)
    z2 = TwistMatrix.zero(2)
    for _ in range(10):
        f = rand_poly(rng, z2, 2)
        lf = lip_seminorm(f, HEAT2).lip
        c = complex(rng.standard_normal(), rng.standard_normal())
        assert lip_seminorm(c * f, HEAT2).lip == pytest.approx(abs(c) * lf, rel=1e-10)
        assert lip_seminorm(adjoint(f), HEAT2).lip == pytest.approx(lf, rel=1e-12)


def test_model_mode_matches_symbol_for_word_transport():
    # intertwining transfer: word length on the window is carried exactly
    word1 = LengthFunction.word((None,))
    rng = np.random.default_rng(3)
    n = 64
    model = clock_shift(n)
    z1 = TwistMatrix.zero(1)
    for _ in range(10):
        f = rand_poly(rng, z1, 3)
        sym = lip_seminorm(f, word1, grid=4096).lip
        mod = lip_seminorm(embed(f, model), word1).lip
        assert mod == pytest.approx(sym, rel=2e-3)
        assert mod <= sym + 1e-9  # restriction never exceeds the finer grid


def test_model_paths_agree_and_adjoint_is_matrix_adjoint():
    rng = np.random.default_rng(5)
    for model, tw in (
        (clock_shift(16), TwistMatrix.zero(2)),
        (fuzzy_generators(1, 2, 16), TwistMatrix.rational_2d(1, 2)),
    ):
        for m in (1, 2):
            f = rand_poly(rng, tw, 2, m=m)
            via_extract = lip_seminorm(embed(f, model), HEAT2)
            via_poly = lip_seminorm_on_model(f, model, HEAT2)
            assert via_poly.column == pytest.approx(via_extract.column, rel=1e-10)
            assert via_poly.row == pytest.approx(via_extract.row, rel=1e-10)

            from fuzzytorus.lipnorm import _model_adjoint_blocks
            from fuzzytorus.matrixmodel import _embed_axes

            axes = _embed_axes(f, model)
            adj = NCPoly(tw, m, _model_adjoint_blocks(f.coeffs, model, axes),
                         prune=False)
            assert np.abs(
                embed(adj, model).matrix - embed(f, model).matrix.conj().T
            ).max() <= 1e-12


def test_model_gradient_matrix_is_psd():
    rng = np.random.default_rng(7)
    model = clock_shift(16)
    f = rand_poly(rng, TwistMatrix.zero(2), 2, m=2)
    gam = model_gradient_matrix(embed(f, model), HEAT2)
    eigs = np.linalg.eigvalsh(gam)
    assert eigs.min() >= -1e-10 * max(1.0, eigs.max())


def test_multiplier_contraction_on_lip():
    # L(T_phi x) <= (1+eps) L(x) at amplifications 1 and 2
    n = 32
    model = clock_shift(n)
    heat_n = LengthFunction.heat((n,))
    eps = 0.25
    phi = product_multiplier(
        [build_smoothing_multiplier(heat_n, heat_n.coord_value(2), eps)] * 2
    )
    rng = np.random.default_rng(11)
    tw = TwistMatrix.zero(2)
    for m in (1, 2):
        for _ in range(50):
            f = rand_poly(rng, tw, 3, m=m)
            lx = lip_seminorm_on_model(f, model, HEAT2).lip
            ly = lip_seminorm_on_model(apply_multiplier(f, phi), model, HEAT2).lip
            assert ly <= (1 + eps) * lx + 1e-10


def test_leibniz_on_model():
    n = 24
    model = clock_shift(n)
    rng = np.random.default_rng(13)
    tw = TwistMatrix.zero(2)
    for _ in range(100):
        f = rand_poly(rng, tw, 1, sa=True)
        g = rand_poly(rng, tw, 1, sa=True)
        lf = lip_seminorm_on_model(f, model, HEAT2).lip
        lg = lip_seminorm_on_model(g, model, HEAT2).lip
        nf = op_norm(embed(f, model))
        ng = op_norm(embed(g, model))
        lfg = lip_seminorm_on_model(multiply(f, g), model, HEAT2).lip
        assert lfg <= nf * lg + lf * ng + 1e-9


# -- riesz ----------------------------------------------------------------------


def test_riesz_p2_identity():
    rng = np.random.default_rng(17)
    for kind in ("heat", "word"):
        for d in (1, 2):
            psi = LengthFunction(kind, (None,) * d)
            tw = TwistMatrix.zero(d)
            for _ in range(20):
                f = rand_poly(rng, tw, 3, drop_mean=True)
                rep = riesz_check(f, psi, 2)
                assert abs(rep.lhs - rep.rhs_column) <= 1e-10
                assert abs(rep.lhs - rep.rhs_row) <= 1e-10


def test_riesz_single_frequency_and_mean_guard():
    z1 = TwistMatrix.zero(1)
    u = NCPoly.generator(z1, 0)
    rep = riesz_check(u, HEAT1, 2)
    assert rep.lhs == pytest.approx(1.0)
    assert rep.rhs_column == pytest.approx(1.0)
    rep4 = riesz_check(u, HEAT1, 4, model=clock_shift(16))
    assert rep4.lhs == pytest.approx(rep4.rhs_column, rel=1e-10)
    with pytest.raises(ValueError):
        riesz_check(NCPoly.one(z1), HEAT1, 2)
    with pytest.raises(ValueError):
        riesz_check(u, HEAT1, 4)  # model required


def test_riesz_p4_ratio_finite_sweep():
    rng = np.random.default_rng(19)
    model = clock_shift(64)
    tw = TwistMatrix.zero(2)
    ratios = []
    for _ in range(25):
        f = rand_poly(rng, tw, 4, drop_mean=True)
        rep = riesz_check(f, HEAT2, 4, model=model)
        ratios.append(rep.ratio)
    assert all(np.isfinite(r) for r in ratios)
    assert max(ratios) < 10.0


# -- sobolev / sampling ----------------------------------------------------------


def test_sobolev_examples():
    u_ratio = 1.0 / math.sqrt(HEAT1.coord_value(1))
    n = 16
    model = clock_shift(n)
    z1 = TwistMatrix.zero(1)
    u = NCPoly.generator(z1, 0)
    e = embed(u, model)
    got = op_norm(e) / lip_seminorm(e, HEAT1).lip
    assert got == pytest.approx(u_ratio, rel=2e-2)

    table = sobolev_constant(HEAT1, [16, 32, 64, 128, 256], samples=12, seed=5)
    vals = list(table.values())
    assert max(vals) <= 2 * min(vals)  # within a factor 2 across n


def test_lip_ball_membership():
    tw = TwistMatrix.zero(2)
    samples = lip_ball_sample(
        1.5, 2, 1, 10, 7, psi=HEAT2, twist=tw, selfadjoint=True
    )
    for f in samples:
        assert f.is_selfadjoint()
        assert lip_seminorm(f, HEAT2).lip <= 1 + 1e-12
        assert sup_norm_oracle(f) <= 1.5 + 1e-12

    model = clock_shift(32)
    samples = lip_ball_sample(
        2.0, 1, 1, 5, 9, psi=LengthFunction.heat((32,)),
        twist=TwistMatrix.zero(1), model=model,
    )
    for f in samples:
        e = embed(f, model)
        assert lip_seminorm(e, LengthFunction.heat((32,))).lip <= 1 + 1e-12
        assert op_norm(e) <= 2.0 + 1e-12


def test_lip_ball_rejects_r_zero():
    with pytest.raises(ValueError):
        lip_ball_sample(0.0, 1, 1, 1, 1, psi=HEAT1)
