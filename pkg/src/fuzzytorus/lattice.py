"""Lattice index arithmetic, length functions, Gromov forms and smoothing multipliers.

Everything here lives on Z^d or (Z/nZ)^d.  Finite-modulus coordinates are kept
in the canonical window (-n/2, n/2]; the tie at n/2 for even n resolves to +n/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "canonical_rep",
    "window_range",
    "LatticeIndex",
    "LengthFunction",
    "GromovMatrix",
    "CocycleFactor",
    "MultiplierSpec",
    "length_eval",
    "gromov_matrix",
    "check_conditionally_negative",
    "cocycle_factor",
    "build_smoothing_multiplier",
    "product_multiplier",
    "band_mask",
]


def canonical_rep(k: int, n: Optional[int]) -> int:
    """Reduce k into the canonical window (-n/2, n/2]; identity for n=None."""
    if n is None:
        return int(k)
    lo = -((n - 1) // 2)
    return (int(k) - lo) % n + lo


def window_range(n: int) -> range:
    """All canonical representatives of Z_n, ascending."""
    lo = -((n - 1) // 2)
    return range(lo, lo + n)


@dataclass(frozen=True)
class LatticeIndex:
    """A point of Z^d or (Z/nZ)^d, stored in the canonical window per coordinate.

    ``moduli`` holds one positive int per coordinate, or None for an infinite
    (Z) coordinate.
    """

    coords: tuple[int, ...]
    moduli: tuple[Optional[int], ...]

    def __post_init__(self):
        if len(self.coords) != len(self.moduli):
            raise ValueError("coords and moduli must have equal length")
        reduced = tuple(canonical_rep(c, n) for c, n in zip(self.coords, self.moduli))
        object.__setattr__(self, "coords", reduced)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __sub__(self, other: "LatticeIndex") -> "LatticeIndex":
        if self.moduli != other.moduli:
            raise ValueError("modulus mismatch in lattice subtraction")
        return LatticeIndex(
            tuple(a - b for a, b in zip(self.coords, other.coords)), self.moduli
        )

    def __neg__(self) -> "LatticeIndex":
        return LatticeIndex(tuple(-c for c in self.coords), self.moduli)


WORD = "word"
HEAT = "heat"
NAIVE_SQUARE = "naive_square"
CUSTOM = "custom"

_KINDS = (WORD, HEAT, NAIVE_SQUARE, CUSTOM)


@dataclass(frozen=True)
class LengthFunction:
    """Conditionally negative (candidate) length on Z^d or Z_n^d.

    The value on a d-tuple is the sum of per-coordinate values:

    * word:  |k|_n = min(k mod n, n - k mod n), or |k| for n=None
    * heat:  (n^2 / 2 pi^2) (1 - cos(2 pi k / n)), or k^2 for n=None
    * naive_square: (canonical k)^2 even at finite n -- deliberately NOT
      conditionally negative, kept so the PSD audit has a failing case
    * custom: user-supplied per-coordinate callables on canonical ints
    """

    kind: str
    moduli: tuple[Optional[int], ...]
    custom_fns: tuple[Callable[[int], float], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown length kind {self.kind!r}")
        if self.kind == CUSTOM and len(self.custom_fns) != len(self.moduli):
            raise ValueError("custom length needs one callable per coordinate")

    @classmethod
    def word(cls, moduli: Sequence[Optional[int]]) -> "LengthFunction":
        return cls(WORD, tuple(moduli))

    @classmethod
    def heat(cls, moduli: Sequence[Optional[int]]) -> "LengthFunction":
        return cls(HEAT, tuple(moduli))

    @classmethod
    def naive_square(cls, moduli: Sequence[Optional[int]]) -> "LengthFunction":
        return cls(NAIVE_SQUARE, tuple(moduli))

    @classmethod
    def custom(cls, moduli, fns) -> "LengthFunction":
        return cls(CUSTOM, tuple(moduli), tuple(fns))

    @property
    def dim(self) -> int:
        return len(self.moduli)

    def with_moduli(self, moduli: Sequence[Optional[int]]) -> "LengthFunction":
        """Same family of lengths transported to another modulus tuple."""
        return LengthFunction(self.kind, tuple(moduli), self.custom_fns)

    def coord_value(self, k: int, axis: int = 0) -> float:
        n = self.moduli[axis]
        k = canonical_rep(k, n)
        if self.kind == WORD:
            if n is None:
                return float(abs(k))
            r = k % n
            return float(min(r, n - r))
        if self.kind == HEAT:
            if n is None:
                return float(k) ** 2
            return (n * n / (2 * math.pi**2)) * (1.0 - math.cos(2 * math.pi * k / n))
        if self.kind == NAIVE_SQUARE:
            return float(k) ** 2
        return float(self.custom_fns[axis](k))

    def coord_values(self, ks: np.ndarray, axis: int = 0) -> np.ndarray:
        """Vectorized per-coordinate values on an integer array."""
        n = self.moduli[axis]
        ks = np.asarray(ks, dtype=np.int64)
        if n is not None:
            lo = -((n - 1) // 2)
            ks = (ks - lo) % n + lo
        if self.kind == WORD:
            if n is None:
                return np.abs(ks).astype(float)
            r = ks % n
            return np.minimum(r, n - r).astype(float)
        if self.kind == HEAT:
            if n is None:
                return ks.astype(float) ** 2
            return (n * n / (2 * math.pi**2)) * (1.0 - np.cos(2 * math.pi * ks / n))
        if self.kind == NAIVE_SQUARE:
            return ks.astype(float) ** 2
        return np.vectorize(self.custom_fns[axis], otypes=[float])(ks)

    def value(self, coords: Sequence[int]) -> float:
        if len(coords) != self.dim:
            raise ValueError("dimension mismatch between index and length function")
        return sum(self.coord_value(k, i) for i, k in enumerate(coords))

    def values(self, coords: np.ndarray) -> np.ndarray:
        """Vectorized values over an (..., d) integer array."""
        coords = np.asarray(coords, dtype=np.int64)
        out = np.zeros(coords.shape[:-1])
        for axis in range(self.dim):
            out += self.coord_values(coords[..., axis], axis)
        return out

    def describe(self) -> str:
        mods = ",".join("inf" if n is None else str(n) for n in self.moduli)
        return f"{self.kind}[{mods}]"

    def serialize(self) -> str:
        mods = " ".join("inf" if n is None else str(n) for n in self.moduli)
        return f"kind {self.kind}\nmoduli {mods}\n"


def length_eval(psi: LengthFunction, k: LatticeIndex) -> float:
    """psi(k) with k reduced into psi's moduli.  Errors on modulus mismatch."""
    if k.moduli != psi.moduli:
        raise ValueError(
            f"modulus mismatch: index {k.moduli} vs length {psi.moduli}"
        )
    return psi.value(k.coords)


@dataclass(frozen=True)
class GromovMatrix:
    """K(x,y) = [psi(x) + psi(y) - psi(x - y)] / 2 over an ordered index list."""

    indices: tuple[LatticeIndex, ...]
    entries: np.ndarray

    def default_tolerance(self) -> float:
        m = max(1.0, float(np.abs(self.entries).max(initial=0.0)))
        return 1e-10 * len(self.indices) * m


def _gromov_entries(psi: LengthFunction, coords: np.ndarray) -> np.ndarray:
    vals = psi.values(coords)
    diffs = coords[:, None, :] - coords[None, :, :]
    return 0.5 * (vals[:, None] + vals[None, :] - psi.values(diffs))


def gromov_matrix(psi: LengthFunction, indices: Sequence[LatticeIndex]) -> GromovMatrix:
    """Gromov form of psi over the given indices (group subtraction mod n)."""
    if not indices:
        raise ValueError("empty index list")
    for k in indices:
        if k.moduli != psi.moduli:
            raise ValueError("index moduli do not match the length function")
    coords = np.array([k.coords for k in indices], dtype=np.int64)
    return GromovMatrix(tuple(indices), _gromov_entries(psi, coords))


def gromov_entries_for_coords(
    psi: LengthFunction, coords: Sequence[Sequence[int]]
) -> np.ndarray:
    """Gromov form entries over raw coordinate tuples (no LatticeIndex wrapping)."""
    return _gromov_entries(psi, np.asarray(coords, dtype=np.int64))


def check_conditionally_negative(
    psi: LengthFunction,
    n: Optional[int] = None,
    tol: Optional[float] = None,
    window: Optional[int] = None,
) -> tuple[bool, float]:
    """PSD audit of the Gromov form over all of Z_n (or a window of Z).

    Returns (verdict, witness) where the witness is the minimal eigenvalue.
    One-dimensional by design: product lengths are conditionally negative
    iff each coordinate factor is.
    """
    if psi.dim != 1:
        raise ValueError("audit is per-coordinate; pass a one-dimensional length")
    modulus = psi.moduli[0] if n is None else n
    if modulus is None:
        if window is None:
            raise ValueError("infinite modulus needs a window radius")
        reps: Iterable[int] = range(-window, window + 1)
        psi1 = psi
    else:
        reps = window_range(modulus)
        psi1 = psi.with_moduli((modulus,))
    idx = [LatticeIndex((r,), psi1.moduli) for r in reps]
    K = gromov_matrix(psi1, idx)
    if tol is None:
        tol = K.default_tolerance()
    try:
        eigs = np.linalg.eigvalsh(K.entries)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigen solver failed during PSD audit: {exc}") from exc
    witness = float(eigs.min())
    return witness >= -tol, witness


@dataclass(frozen=True)
class CocycleFactor:
    """Rectangular G with G^T G = K; rows span the cocycle Hilbert space."""

    indices: tuple[LatticeIndex, ...]
    factor: np.ndarray
    rank: int


def cocycle_factor(K: GromovMatrix, tol: Optional[float] = None) -> CocycleFactor:
    """Eigen-based factor of a PSD Gromov matrix.

    Eigenvalues in [-tol, tol] are treated as zero; anything below -tol means
    K is not admissible and raises.
    """
    if tol is None:
        tol = K.default_tolerance()
    eigs, vecs = np.linalg.eigh(K.entries)
    if eigs.min() < -tol:
        raise ValueError(f"Gromov matrix is not PSD within tol: min eig {eigs.min()}")
    keep = eigs > tol
    G = (np.sqrt(eigs[keep])[:, None]) * vecs[:, keep].T
    return CocycleFactor(K.indices, G, rank=int(keep.sum()))


def cocycle_rows_for_coords(
    psi: LengthFunction, coords: Sequence[Sequence[int]], tol: Optional[float] = None
) -> np.ndarray:
    """Factor rows G (r x s) with G^T G = Gromov form over raw coordinates."""
    K = gromov_entries_for_coords(psi, coords)
    m = max(1.0, float(np.abs(K).max(initial=0.0)))
    if tol is None:
        tol = 1e-10 * len(coords) * m
    eigs, vecs = np.linalg.eigh(K)
    if eigs.min() < -tol:
        raise ValueError(f"Gromov matrix is not PSD within tol: min eig {eigs.min()}")
    keep = eigs > tol
    return (np.sqrt(eigs[keep])[:, None]) * vecs[:, keep].T


@dataclass(frozen=True)
class MultiplierSpec:
    """Finitely supported Fourier multiplier symbol phi on a product lattice.

    ``values`` maps canonical coordinate tuples to phi(g); absent keys are 0.
    ``band`` is the length cutoff m (support lies in {psi <= m}), ``cutoff``
    the low-length level k on which |phi - 1| <= eps, ``alpha`` the decay
    scale, ``tail`` the certified window tail sum (which bounds the cb-norm
    defect of the truncation).
    """

    values: dict[tuple[int, ...], complex]
    moduli: tuple[Optional[int], ...]
    band: float
    cutoff: float
    eps: float
    alpha: float
    tail: float
    psi_descr: str

    def value_at(self, coords: Sequence[int]) -> complex:
        key = tuple(canonical_rep(c, n) for c, n in zip(coords, self.moduli))
        return self.values.get(key, 0.0)

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.values.keys())

    def serialize(self) -> str:
        lines = [
            f"psi {self.psi_descr}",
            f"cutoff {self.cutoff!r}",
            f"band {self.band!r}",
            f"eps {self.eps!r}",
            f"alpha {self.alpha!r}",
            f"tail {self.tail!r}",
        ]
        for key in self.support():
            v = complex(self.values[key])
            lines.append(" ".join(map(str, key)) + f" {v.real!r} {v.imag!r}")
        return "\n".join(lines) + "\n"


def _min_alpha(k: float, eps: float) -> float:
    """Smallest alpha with 1 - exp(-k/alpha) <= eps, by doubling + bisection."""
    if k <= 0:
        return 1e-9

    def ok(a: float) -> bool:
        return 1.0 - math.exp(-k / a) <= eps

    hi = 1.0
    while not ok(hi):
        hi *= 2.0
    lo = hi / 2.0 if hi > 1.0 else 1e-12
    while ok(lo):
        hi = lo
        lo /= 2.0
        if lo < 1e-12:
            return hi if ok(hi) else 1e-12
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-6 * hi:
            break
    return hi


def _window_points(psi: LengthFunction, window: Optional[int]) -> list[tuple[int, ...]]:
    per_axis = []
    for n in psi.moduli:
        if n is not None:
            per_axis.append(list(window_range(n)))
        else:
            if window is None:
                raise ValueError("infinite modulus needs a window radius")
            per_axis.append(list(range(-window, window + 1)))
    pts = [()]
    for axis_vals in per_axis:
        pts = [p + (v,) for p in pts for v in axis_vals]
    return pts


def build_smoothing_multiplier(
    psi: LengthFunction, k: float, eps: float, window: Optional[int] = None
) -> MultiplierSpec:
    """Compressing multiplier phi(g) = exp(-psi(g)/alpha) 1[psi(g) <= m].

    alpha is the smallest decay scale keeping |phi - 1| <= eps on {psi <= k};
    m > k is the smallest cutoff whose window tail sum of exp(-psi/alpha) is
    <= eps.  The tail sum certifies that truncation changes the multiplier by
    at most eps in cb-norm, hence the (1 + eps) contraction contract.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    if k < 0:
        raise ValueError("cutoff k must be >= 0")
    alpha = _min_alpha(float(k), eps)
    if window is None and any(n is None for n in psi.moduli):
        window = max(64, 16 * int(math.ceil(k)) + 16)
    pts = _window_points(psi, window)
    vals = np.array([psi.value(p) for p in pts])
    weights = np.exp(-vals / alpha)
    candidates = sorted({v for v in vals if v > k})
    band = None
    tail = None
    for m in candidates:
        t = float(weights[vals > m].sum())
        if t <= eps:
            band = float(m)
            tail = t
            break
    if band is None:
        raise ValueError(
            "no admissible support cutoff in the configured window; enlarge it"
        )
    values = {
        tuple(p): float(w) for p, v, w in zip(pts, vals, weights) if v <= band
    }
    return MultiplierSpec(
        values=values,
        moduli=psi.moduli,
        band=band,
        cutoff=float(k),
        eps=eps,
        alpha=alpha,
        tail=tail,
        psi_descr=psi.describe(),
    )


def product_multiplier(parts: Sequence[MultiplierSpec]) -> MultiplierSpec:
    """Coordinate-wise product of one-dimensional multiplier specs."""
    if not parts or any(len(p.moduli) != 1 for p in parts):
        raise ValueError("expects one-dimensional factors")
    values: dict[tuple[int, ...], complex] = {(): 1.0}
    for p in parts:
        values = {
            key + g: v * p.values[g] for key, v in values.items() for g in p.values
        }
    return MultiplierSpec(
        values=values,
        moduli=tuple(p.moduli[0] for p in parts),
        band=sum(p.band for p in parts),
        cutoff=min(p.cutoff for p in parts),
        eps=1.0 - np.prod([1.0 - p.eps for p in parts]),
        alpha=min(p.alpha for p in parts),
        tail=float(sum(p.tail for p in parts)),
        psi_descr=" x ".join(p.psi_descr for p in parts),
    )


LOW_BAND = "low_band"
TAIL = "tail"
MEAN_ZERO = "mean_zero"


def band_mask(
    kind: str,
    k: int = 0,
    modulus: Optional[int] = None,
    dim: int = 1,
    axis: int = 0,
) -> Callable[[Sequence[int]], bool]:
    """Index predicates: P_k (max-coordinate band), Q_k (tail on one axis),
    and the mean-zero mask dropping only the origin."""
    if kind in (LOW_BAND, TAIL) and modulus is not None and modulus <= 2 * k:
        raise ValueError("need modulus > 2k for a well-defined band")

    def _canon_abs(c: int) -> int:
        return abs(canonical_rep(c, modulus))

    if kind == LOW_BAND:
        return lambda coords: all(_canon_abs(c) <= k for c in coords)
    if kind == TAIL:
        return lambda coords: _canon_abs(coords[axis]) > k
    if kind == MEAN_ZERO:
        return lambda coords: any(c != 0 for c in coords)
    raise ValueError(f"unknown mask kind {kind!r}")
