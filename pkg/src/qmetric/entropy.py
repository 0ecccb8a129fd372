"""Product-entropy estimators: orbit product sets, the shift-entropy
bracket on tensor powers of M_p, Minkowski-sum growth of integer lattice
sets under unimodular toral matrices, the eigenvalue closed form
Σ_{|λ|>=1} log|λ|, and a computable box bound on sum-set cardinalities.

Lattice sets are stored as sorted unique int64 keys packing the
coordinates: 32 bits per coordinate for p <= 2, 16 bits for p in {3, 4}
(the cat-map run to n = 14 reaches coordinates near 5·10^5, beyond 16
bits). Packing overflow aborts rather than wraps.

Growth slopes are tail regressions with per-step log differences reported
as diagnostics; no claimed limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .approxdim import dim_exact_orthonormal
from .caps import check_cap
from .errors import NumericalError, PreconditionError, ResourceLimitError
from .nctorus import TwistedPolynomial
from .weyl import WeylElement, weyl_expand

__all__ = [
    "LatticeSet",
    "GrowthSeries",
    "EntropyEstimate",
    "minkowski_sum",
    "lattice_orbit_card",
    "literal_orbit_set",
    "eigen_entropy",
    "char_poly_int",
    "box_bound_card",
    "entropy_slope",
    "shift_entropy_bracket",
    "product_set",
]


def _coord_bits(p: int) -> int:
    if p <= 2:
        return 32
    if p <= 4:
        return 16
    raise PreconditionError("lattice sets support dimensions p <= 4")


def _pack(points: np.ndarray, p: int) -> np.ndarray:
    bits = _coord_bits(p)
    offset = 1 << (bits - 1)
    if points.size and int(np.abs(points).max()) >= offset:
        raise ResourceLimitError(
            f"lattice coordinate {int(np.abs(points).max())} exceeds {bits}-bit packing"
        )
    keys = np.zeros(len(points), dtype=np.int64)
    for i in range(p):
        keys |= (points[:, i].astype(np.int64) + offset) << (bits * i)
    return keys


def _unpack(keys: np.ndarray, p: int) -> np.ndarray:
    bits = _coord_bits(p)
    offset = 1 << (bits - 1)
    mask = (1 << bits) - 1
    pts = np.empty((len(keys), p), dtype=np.int64)
    for i in range(p):
        pts[:, i] = ((keys >> (bits * i)) & mask) - offset
    return pts


@dataclass(frozen=True)
class LatticeSet:
    """Finite subset of Z^p with set semantics (sorted unique packed keys)."""

    p: int
    keys: np.ndarray = field(repr=False)

    def __post_init__(self):
        keys = np.unique(np.asarray(self.keys, dtype=np.int64))
        keys.flags.writeable = False
        object.__setattr__(self, "keys", keys)

    @classmethod
    def from_points(cls, p: int, points) -> "LatticeSet":
        pts = np.asarray(points, dtype=np.int64).reshape(-1, p)
        return cls(p, _pack(pts, p))

    @classmethod
    def cube(cls, p: int, m: int) -> "LatticeSet":
        if m < 0:
            raise PreconditionError("cube radius must be >= 0")
        axes = [np.arange(-m, m + 1)] * p
        grid = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([g.ravel() for g in grid])
        return cls.from_points(p, pts)

    @property
    def cardinality(self) -> int:
        return int(self.keys.size)

    def points(self) -> np.ndarray:
        return _unpack(self.keys, self.p)

    def linear_image(self, T) -> "LatticeSet":
        T = np.asarray(T, dtype=np.int64)
        if T.shape != (self.p, self.p):
            raise PreconditionError("matrix shape does not match lattice dimension")
        return LatticeSet.from_points(self.p, self.points() @ T.T)

    def __contains__(self, point) -> bool:
        key = _pack(np.asarray(point, dtype=np.int64).reshape(1, self.p), self.p)[0]
        i = np.searchsorted(self.keys, key)
        return bool(i < len(self.keys) and self.keys[i] == key)


def minkowski_sum(a: LatticeSet, b: LatticeSet) -> LatticeSet:
    """{x + y : x in a, y in b}; cardinality kept under the lattice cap."""
    if a.p != b.p:
        raise PreconditionError("summands have different dimensions")
    if a.cardinality == 0 or b.cardinality == 0:
        return LatticeSet(a.p, np.zeros(0, dtype=np.int64))
    small, large = (a, b) if a.cardinality <= b.cardinality else (b, a)
    pts = large.points()
    parts: list[np.ndarray] = []
    running = None
    for offset in small.points():
        parts.append(_pack(pts + offset[None, :], a.p))
        if sum(len(x) for x in parts) > 4_000_000:
            merged = np.unique(np.concatenate(parts))
            running = merged if running is None else np.union1d(running, merged)
            parts = []
            _check_card(len(running))
    if parts:
        merged = np.unique(np.concatenate(parts))
        running = merged if running is None else np.union1d(running, merged)
    _check_card(len(running))
    return LatticeSet(a.p, running)


def _check_card(n: int) -> None:
    check_cap("lattice_card", n, "lattice set")


@dataclass(frozen=True)
class GrowthSeries:
    """c_n = cardinality of the n-fold sum set; nondecreasing when 0 is a summand."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c <= 0 for c in counts):
            raise PreconditionError("growth counts must be positive")
        if any(b < a for a, b in zip(counts, counts[1:])):
            raise PreconditionError("growth counts must be nondecreasing")
        object.__setattr__(self, "counts", counts)

    def log_diffs(self) -> list[float]:
        return [float(np.log(b / a)) for a, b in zip(self.counts, self.counts[1:])]


@dataclass(frozen=True)
class EntropyEstimate:
    slope: float
    diffs: tuple[float, ...]


def _as_unimodular(T) -> np.ndarray:
    T = np.asarray(T)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise PreconditionError("T must be a square matrix")
    Tr = np.rint(np.asarray(T, dtype=float))
    if np.abs(np.asarray(T, dtype=float) - Tr).max(initial=0.0) > 0:
        raise PreconditionError("T must have integer entries")
    T = Tr.astype(np.int64)
    d = _int_det([[int(x) for x in row] for row in T])
    if abs(d) != 1:
        raise PreconditionError(f"|det T| must be 1, got {d}")
    return T


def _int_det(rows: list[list[int]]) -> int:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        total += (-1) ** j * rows[0][j] * _int_det(minor)
    return total


def lattice_orbit_card(T, m: int, n: int) -> GrowthSeries:
    """Cardinalities c_j of K_m + ζ_T K_m + ... + ζ_T^{j-1} K_m for j = 1..n.

    Computed by the equivalent recursion S_{j+1} = ζ_T(S_j) + K_m.
    """
    T = _as_unimodular(T)
    if m < 1 or n < 1:
        raise PreconditionError("need m >= 1 and n >= 1")
    p = T.shape[0]
    K = LatticeSet.cube(p, m)
    S = K
    counts = [S.cardinality]
    for _ in range(1, n):
        S = minkowski_sum(S.linear_image(T), K)
        counts.append(S.cardinality)
    return GrowthSeries(tuple(counts))


def literal_orbit_set(T, m: int, n: int) -> LatticeSet:
    """K_m + ζ_T(K_m) + ... + ζ_T^{n-1}(K_m) summed literally (cross-check oracle)."""
    T = _as_unimodular(T)
    p = T.shape[0]
    K = LatticeSet.cube(p, m)
    term = K
    total = K
    for _ in range(1, n):
        term = term.linear_image(T)
        total = minkowski_sum(total, term)
    return total


def char_poly_int(T) -> list[int]:
    """Monic characteristic polynomial coefficients of an integer matrix,
    highest degree first, by the Faddeev-LeVerrier recursion in exact
    rational arithmetic."""
    T = np.asarray(T)
    n = T.shape[0]
    A = [[Fraction(int(x)) for x in row] for row in T]

    def matmul(X, Y):
        return [
            [sum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)
        ]

    def trace_of(X):
        return sum(X[i][i] for i in range(n))

    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    coeffs = [Fraction(1)]
    M = eye
    AM = A
    for k in range(1, n + 1):
        c = -trace_of(AM) / k
        coeffs.append(c)
        if k < n:
            M = [[AM[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
            AM = matmul(A, M)
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise NumericalError("characteristic polynomial must be integral")
        out.append(int(c))
    return out


def _eigenvalues(T) -> np.ndarray:
    coeffs = char_poly_int(T)
    n = len(coeffs) - 1
    if n == 2:
        # quadratic formula: λ² + b λ + c
        b, c = coeffs[1], coeffs[2]
        disc = complex(b * b - 4 * c)
        root = np.sqrt(disc)
        return np.array([(-b + root) / 2.0, (-b - root) / 2.0])
    return np.roots(np.array(coeffs, dtype=float))


def eigen_entropy(T) -> float:
    """Σ log|λ_i| over eigenvalues of T with |λ_i| >= 1 (spectral multiplicity)."""
    T = _as_unimodular(T)
    lam = _eigenvalues(T)
    mods = np.abs(lam)
    return float(np.sum(np.log(mods[mods >= 1.0 - 1e-9])))


def _real_block_basis(T: np.ndarray):
    """Real basis adapted to the spectral subspaces of T.

    Returns (P, blocks, defective) with T = P A P^{-1}, A block diagonal in
    the returned real basis, blocks a list of (slice, |λ|), and defective
    true when some Jordan block exceeds size 1. Exact via sympy Jordan form;
    conjugate complex chains are merged into real 2d-blocks.
    """
    M = sympy.Matrix([[int(x) for x in row] for row in T])
    n = M.shape[0]
    Psym, Jsym = M.jordan_form()
    raw_blocks = []
    start = 0
    for i in range(n):
        if i == n - 1 or Jsym[i, i + 1] == 0:
            raw_blocks.append((start, i + 1, Jsym[start, start]))
            start = i + 1
    defective = any(e - s > 1 for s, e, _ in raw_blocks)
    Pc = np.array(Psym.evalf(30).tolist(), dtype=complex)
    cols: list[np.ndarray] = []
    blocks: list[tuple[slice, float]] = []
    used = [False] * len(raw_blocks)
    pos = 0
    for bi, (s, e, lam) in enumerate(raw_blocks):
        if used[bi]:
            continue
        lam_c = complex(sympy.N(lam, 30))
        if abs(lam_c.imag) < 1e-12:
            for c in range(s, e):
                cols.append(Pc[:, c].real)
            blocks.append((slice(pos, pos + (e - s)), abs(lam_c)))
            pos += e - s
            used[bi] = True
        else:
            partner = None
            for bj in range(bi + 1, len(raw_blocks)):
                s2, e2, lam2 = raw_blocks[bj]
                if used[bj] or (e2 - s2) != (e - s):
                    continue
                if abs(complex(sympy.N(lam2, 30)) - lam_c.conjugate()) < 1e-20:
                    partner = bj
                    break
            if partner is None:
                raise NumericalError("unpaired complex eigenvalue in Jordan form")
            for c in range(s, e):
                cols.append(Pc[:, c].real)
                cols.append(Pc[:, c].imag)
            blocks.append((slice(pos, pos + 2 * (e - s)), abs(lam_c)))
            pos += 2 * (e - s)
            used[bi] = True
            used[partner] = True
    P = np.column_stack(cols)
    Pinv = np.linalg.inv(P)
    A = Pinv @ T.astype(float) @ P
    mask = np.zeros_like(A, dtype=bool)
    for sl, _ in blocks:
        mask[sl, sl] = True
    off = np.abs(A[~mask]).max(initial=0.0)
    if off > 1e-9 * max(1.0, np.abs(A).max()):
        raise NumericalError(f"spectral basis failed to block-diagonalize T (off={off:.2e})")
    return P, blocks, defective


def box_bound_card(T, m: int, n: int, delta_pad: float = 0.0) -> float:
    """Computable upper bound for c_n = card(K_m + ζ_T K_m + ... + ζ_T^{n-1} K_m).

    In a real spectral basis the sum sets sit inside a coordinate box whose
    extent along a block with eigenvalue modulus |λ| is at most
    Q·r·m·Σ_{j<n} (j+1)(1+δ)^j max(|λ|^j, 1), with r bounding the basis
    change of the unit cube and Q the scanned block-power constant. The
    returned value is 2^p times the box volume, which also covers the unit
    cubes around the counted lattice points. Defective spectra require
    δ_pad > 0 to absorb polynomial Jordan growth.
    """
    T = _as_unimodular(T)
    if m < 1 or n < 1:
        raise PreconditionError("need m >= 1 and n >= 1")
    if delta_pad < 0:
        raise PreconditionError("delta_pad must be >= 0")
    p = T.shape[0]
    P, blocks, defective = _real_block_basis(T)
    if defective and delta_pad <= 0:
        raise PreconditionError("defective spectrum requires delta_pad > 0")
    Pinv = np.linalg.inv(P)
    A = Pinv @ T.astype(float) @ P
    r = float(np.abs(Pinv).sum(axis=1).max())
    q_const = 1.0
    for sl, mod in blocks:
        B = A[sl, sl]
        Bj = np.eye(B.shape[0])
        growth = max(mod, 1.0)
        for j in range(n + 1):
            if j > 0:
                Bj = Bj @ B
            denom = (1.0 + delta_pad) ** j * growth**j
            q_const = max(q_const, float(np.abs(Bj).sum(axis=1).max()) / denom)
    js = np.arange(n, dtype=float)
    bound = (2.0**p) * abs(float(np.linalg.det(P)))
    for sl, mod in blocks:
        growth = max(mod, 1.0)
        extent = q_const * r * m * float(
            np.sum((js + 1.0) * (1.0 + delta_pad) ** js * growth**js)
        )
        for _ in range(sl.stop - sl.start):
            bound *= 2.0 * extent
    return bound


def entropy_slope(series: GrowthSeries, tail: int) -> EntropyEstimate:
    """Least-squares slope of log c_n against n over the last ``tail`` points."""
    if tail < 3:
        raise PreconditionError("tail must be >= 3")
    counts = series.counts
    if len(counts) < tail:
        raise PreconditionError(f"series has {len(counts)} < tail={tail} points")
    y = np.log(np.asarray(counts[-tail:], dtype=float))
    x = np.arange(len(counts) - tail + 1, len(counts) + 1, dtype=float)
    slope = float(np.polyfit(x, y, 1)[0])
    return EntropyEstimate(slope, tuple(series.log_diffs()))


def shift_entropy_bracket(p: int, n: int, delta: float) -> tuple[float, float]:
    """Bracket for the shift's product entropy at stage n.

    lower: (1/n) log D of the p^{2n} orthonormal GNS vectors of the Weyl
    product set at δ. upper: (1/n) log p^{2(2⌈√n⌉+n)}, the dimension of the
    window algebra reached after E_⌈√n⌉ truncation. Both tend to 2 log p.
    """
    if p < 2:
        raise PreconditionError("p must be >= 2")
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if not (0.0 < delta < 1.0):
        raise PreconditionError("delta must lie in (0, 1)")
    m = p ** (2 * n)
    lower = np.log(dim_exact_orthonormal(m, delta)) / n
    root = int(np.ceil(np.sqrt(n)))
    upper = 2.0 * (2 * root + n) * np.log(p) / n
    return float(lower), float(upper)


def _twisted_monomials(omega) -> list[tuple[tuple[int, ...], complex]] | None:
    keys = []
    for a in omega:
        if not isinstance(a, TwistedPolynomial) or not a.is_monomial:
            return None
        (k, c), = a.coeffs.items()
        keys.append((k, c))
    return keys


def product_set(omega, alpha, n: int, cap: int | None = None):
    """All ordered products a_0 α(a_1) ⋯ α^{n-1}(a_{n-1}) for a_i in Ω.

    Twisted-polynomial monomial families take a symbolic path: exponents
    add (with reordering phases folded into the coefficient) and results
    are deduplicated by exponent, first representative kept. Other inputs
    take the dense path, capped at |Ω|^n elements. Weyl elements are
    deduplicated by coefficient support.
    """
    omega = list(omega)
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if not omega:
        raise PreconditionError("Ω must be nonempty")
    if cap is None:
        from .caps import get_cap

        cap = get_cap("product_set")

    monos = _twisted_monomials(omega)
    if monos is not None:
        phase = omega[0].phase
        layers = [monos]
        elems = list(omega)
        symbolic = True
        for _ in range(1, n):
            elems = [alpha(a) for a in elems]
            layer = _twisted_monomials(elems)
            if layer is None:
                symbolic = False
                break
            layers.append(layer)
        if symbolic:
            from .nctorus import reorder_exponent

            acc: dict[tuple[int, ...], complex] = {}
            for k, c in layers[0]:
                acc.setdefault(k, c)
            if len(acc) > cap:
                raise ResourceLimitError("product set exceeds cap")
            for layer in layers[1:]:
                nxt: dict[tuple[int, ...], complex] = {}
                for k1, c1 in acc.items():
                    for k2, c2 in layer:
                        key = tuple(a + b for a, b in zip(k1, k2))
                        if key not in nxt:
                            nxt[key] = c1 * c2 * np.exp(
                                2j * np.pi * reorder_exponent(k1, k2, phase)
                            )
                            if len(nxt) > cap:
                                raise ResourceLimitError("product set exceeds cap")
                acc = nxt
            return [TwistedPolynomial.monomial(phase, k, c) for k, c in sorted(acc.items())]

    total = len(omega) ** n
    if total > cap:
        raise ResourceLimitError(f"dense product set of size {total} exceeds cap {cap}")
    products = list(omega)
    for j in range(1, n):
        layer = omega
        for _ in range(j):
            layer = [alpha(a) for a in layer]
        products = [a * b for a in products for b in layer]
    if products and isinstance(products[0], WeylElement):
        seen: dict[tuple, WeylElement] = {}
        for a in products:
            key = tuple(sorted(weyl_expand(a).data))
            if key not in seen:
                seen[key] = a
        return list(seen.values())
    return products
