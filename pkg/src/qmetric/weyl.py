"""Finite Weyl (clock-and-shift) matrix algebras on site windows.

A window [lo, hi] of sites carries the algebra M_p^{⊗[lo,hi]}. Elements are
dense matrices of side p^(hi-lo+1) together with their expansion in the
Weyl monomial basis u^i v^j per site, where u is the clock matrix
diag(1, ρ, ..., ρ^(p-1)), ρ = exp(2πi/p), and v is the cyclic shift with
1's on the superdiagonal and in the bottom-left entry, so that vu = ρ uv.

The product group (Z_p × Z_p)^window acts by γ_{(r,s)}(u) = ρ^r u,
γ_{(r,s)}(v) = ρ^s v sitewise; with the weighted length
ℓ_λ(g) = Σ_k λ^|k| ℓ(g_k) (ℓ the Euclidean distance to 0 on R²/Z²) this
yields an exact Lip seminorm by exhaustive supremum over the finite group.

Monomial exponents are tuples of (i, j) pairs, one pair per site in window
order. The coefficient basis is the ground truth for conditional
expectations and for GNS vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .caps import check_cap
from .errors import PreconditionError
from .linalg import as_matrix, operator_norm

Exponents = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class WeylWindow:
    p: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.p < 2:
            raise PreconditionError(f"p must be >= 2, got {self.p}")
        if self.lo > self.hi:
            raise PreconditionError(f"empty window [{self.lo}, {self.hi}]")
        check_cap("matrix_dim", self.dim, "Weyl window matrix")

    @property
    def n_sites(self) -> int:
        return self.hi - self.lo + 1

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))

    @property
    def dim(self) -> int:
        return self.p**self.n_sites


@dataclass(frozen=True)
class WeylElement:
    window: WeylWindow
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (self.window.dim, self.window.dim):
            raise PreconditionError(
                f"matrix shape {m.shape} does not match window dimension {self.window.dim}"
            )
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        if not isinstance(other, WeylElement):
            return NotImplemented
        a, b = align(self, other)
        return WeylElement(a.window, a.matrix @ b.matrix)

    def adjoint(self) -> "WeylElement":
        return WeylElement(self.window, self.matrix.conj().T)

    def norm(self) -> float:
        return operator_norm(self.matrix)


@dataclass(frozen=True)
class WeylCoefficients:
    window: WeylWindow
    data: dict[Exponents, complex] = field(repr=False)


@dataclass(frozen=True)
class GroupElement:
    window: WeylWindow
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.pairs) != self.window.n_sites:
            raise PreconditionError("group element length does not match window")
        p = self.window.p
        if any(not (0 <= r < p and 0 <= s < p) for r, s in self.pairs):
            raise PreconditionError("group coordinates must be reduced mod p")

    @property
    def is_identity(self) -> bool:
        return all(pair == (0, 0) for pair in self.pairs)


@lru_cache(maxsize=32)
def clock_shift(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Clock u = diag(1, ρ, ..., ρ^(p-1)) and shift v with vu = ρ uv."""
    if p < 2:
        raise PreconditionError(f"p must be >= 2, got {p}")
    rho = np.exp(2j * np.pi / p)
    u = np.diag(rho ** np.arange(p))
    v = np.zeros((p, p), dtype=np.complex128)
    for i in range(p - 1):
        v[i, i + 1] = 1.0
    v[p - 1, 0] = 1.0
    u.flags.writeable = False
    v.flags.writeable = False
    return u, v


@lru_cache(maxsize=128)
def _site_monomials(p: int) -> np.ndarray:
    """Stack of u^i v^j for all (i, j), indexed [i, j, :, :]."""
    u, v = clock_shift(p)
    out = np.empty((p, p, p, p), dtype=np.complex128)
    ui = np.eye(p, dtype=np.complex128)
    for i in range(p):
        vj = np.eye(p, dtype=np.complex128)
        for j in range(p):
            out[i, j] = ui @ vj
            vj = vj @ v
        ui = ui @ u
    out.flags.writeable = False
    return out


def weyl_monomial(window: WeylWindow, exponents: Exponents) -> WeylElement:
    """Tensor product of per-site u^i v^j over the window."""
    exponents = normalize_exponents(window, exponents)
    mono = _site_monomials(window.p)
    out = np.array([[1.0 + 0j]])
    for i, j in exponents:
        out = np.kron(out, mono[i, j])
    return WeylElement(window, out)


def normalize_exponents(window: WeylWindow, exponents) -> Exponents:
    exponents = tuple((int(i) % window.p, int(j) % window.p) for i, j in exponents)
    if len(exponents) != window.n_sites:
        raise PreconditionError(
            f"{len(exponents)} exponent pairs for a {window.n_sites}-site window"
        )
    return exponents


def _generalized_diagonal_indices(p: int, n_sites: int, jvec: tuple[int, ...]):
    """Row/column flat indices of the entries a[b, b+j] over all b."""
    d = p**n_sites
    rows = np.arange(d)
    digits = (rows[:, None] // (p ** np.arange(n_sites - 1, -1, -1))[None, :]) % p
    cols_digits = (digits + np.asarray(jvec)[None, :]) % p
    cols = cols_digits @ (p ** np.arange(n_sites - 1, -1, -1))
    return rows, cols


def weyl_expand(a: WeylElement, tol: float = 1e-13) -> WeylCoefficients:
    """Weyl-basis coefficients c_m = τ(m* a) via per-shift DFT over Z_p^W.

    For the monomial m with exponents (i_k, j_k) one has
    m[b, b+j] = Π_k ρ^(i_k b_k), so τ(m* a) is the Z_p^W Fourier transform
    of the generalized diagonal b ↦ a[b, b+j].
    """
    w = a.window
    p, W, d = w.p, w.n_sites, w.dim
    m = a.matrix
    data: dict[Exponents, complex] = {}
    shape = (p,) * W
    for jflat in range(p**W):
        jvec = tuple((jflat // p**k) % p for k in range(W - 1, -1, -1))
        rows, cols = _generalized_diagonal_indices(p, W, jvec)
        diag = m[rows, cols].reshape(shape)
        coeff = np.fft.fftn(diag) / d
        nz = np.argwhere(np.abs(coeff) > tol)
        for ivec in nz:
            exps = tuple((int(ivec[k]), jvec[k]) for k in range(W))
            data[exps] = complex(coeff[tuple(ivec)])
    return WeylCoefficients(w, data)


def reconstruct(coeffs: WeylCoefficients) -> WeylElement:
    """Inverse of weyl_expand: Σ c_m · m assembled shiftwise by inverse DFT."""
    w = coeffs.window
    p, W, d = w.p, w.n_sites, w.dim
    by_shift: dict[tuple[int, ...], np.ndarray] = {}
    shape = (p,) * W
    for exps, c in coeffs.data.items():
        jvec = tuple(j for _, j in exps)
        ivec = tuple(i for i, _ in exps)
        tensor = by_shift.setdefault(jvec, np.zeros(shape, dtype=np.complex128))
        tensor[ivec] += c
    m = np.zeros((d, d), dtype=np.complex128)
    for jvec, tensor in by_shift.items():
        diag = np.fft.ifftn(tensor) * d
        rows, cols = _generalized_diagonal_indices(p, W, jvec)
        m[rows, cols] += diag.reshape(-1)
    return WeylElement(w, m)


def trace(a: WeylElement) -> complex:
    """Normalized trace (the unique tracial state on the window algebra)."""
    return complex(np.trace(a.matrix) / a.window.dim)


def align(a: WeylElement, b: WeylElement) -> tuple[WeylElement, WeylElement]:
    """Embed both elements into the hull window, tensoring identities."""
    if a.window.p != b.window.p:
        raise PreconditionError("elements live over different p")
    lo = min(a.window.lo, b.window.lo)
    hi = max(a.window.hi, b.window.hi)
    hull = WeylWindow(a.window.p, lo, hi)
    return embed(a, hull), embed(b, hull)


def embed(a: WeylElement, window: WeylWindow) -> WeylElement:
    if a.window.p != window.p:
        raise PreconditionError("embedding must preserve p")
    if window.lo > a.window.lo or window.hi < a.window.hi:
        raise PreconditionError("target window does not contain the element's window")
    if window == a.window:
        return a
    p = window.p
    left = p ** (a.window.lo - window.lo)
    right = p ** (window.hi - a.window.hi)
    check_cap("matrix_dim", window.dim, "embedded element")
    m = np.kron(np.kron(np.eye(left), a.matrix), np.eye(right))
    return WeylElement(window, m)


def shift_element(a: WeylElement, steps: int = 1) -> WeylElement:
    """Right shift: site k content moves to site k + steps."""
    w = a.window
    return WeylElement(WeylWindow(w.p, w.lo + steps, w.hi + steps), a.matrix)


def shift_lipschitz_number(lam: float) -> float:
    """Lipschitz number of the shift for ℓ_λ.

    Direct computation: the right shift T sends the site-k coordinate to
    site k+1, and sup_g ℓ_λ(Tg)/ℓ_λ(g) is attained on negative sites where
    λ^|k+1| / λ^|k| = λ^(-1). The same value bounds the inverse shift.
    """
    if not (0.0 < lam < 1.0):
        raise PreconditionError("λ must lie in (0, 1)")
    return 1.0 / lam


def conditional_expectation(a: WeylElement, n: int) -> WeylElement:
    """E_n: kill every Weyl coefficient with a nontrivial exponent outside [-n, n]."""
    w = a.window
    if n < 0:
        raise PreconditionError("E_n needs n >= 0")
    if w.hi < -n or w.lo > n:
        raise PreconditionError(f"window [{w.lo},{w.hi}] does not intersect [-{n},{n}]")
    coeffs = weyl_expand(a)
    kept = {
        exps: c
        for exps, c in coeffs.data.items()
        if all(pair == (0, 0) for site, pair in zip(w.sites, exps) if abs(site) > n)
    }
    return reconstruct(WeylCoefficients(w, kept))


def site_length(p: int, r: int, s: int) -> float:
    """Distance of (r/p, s/p) to 0 in R²/Z² with the Euclidean metric."""
    r %= p
    s %= p
    return float(np.hypot(min(r, p - r) / p, min(s, p - s) / p))


def group_length(g: GroupElement, lam: float) -> float:
    """ℓ_λ(g) = Σ_k λ^|k| ℓ(r_k, s_k); zero iff g is the identity."""
    if not (0.0 < lam < 1.0):
        raise PreconditionError("λ must lie in (0, 1)")
    p = g.window.p
    return float(
        sum(
            lam ** abs(site) * site_length(p, r, s)
            for site, (r, s) in zip(g.window.sites, g.pairs)
        )
    )


def weyl_action(g: GroupElement, a: WeylElement) -> WeylElement:
    """γ_g: multiply the coefficient at (i_k, j_k) by Π_k ρ^(r_k i_k + s_k j_k).

    Realized as conjugation by ⊗_k v^(r_k) u^(-s_k), which fixes u ↦ ρ^r u
    and v ↦ ρ^s v sitewise.
    """
    if g.window != a.window:
        raise PreconditionError("group element and element windows differ")
    p = a.window.p
    u, v = clock_shift(p)
    conj = np.array([[1.0 + 0j]])
    for r, s in g.pairs:
        w_site = np.linalg.matrix_power(v, r) @ np.linalg.matrix_power(u, (-s) % p)
        conj = np.kron(conj, w_site)
    return WeylElement(a.window, conj @ a.matrix @ conj.conj().T)


def _enumerate_group(p: int, n_coords: int, chunk: int = 1 << 16):
    """Yield chunks of all vectors in Z_p^n_coords as int64 arrays."""
    total = p**n_coords
    powers = p ** np.arange(n_coords - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % p


def weyl_lip_norm(a: WeylElement, lam: float) -> float:
    """Exact L(a) = sup over nonidentity g of ‖γ_g(a) - a‖ / ℓ_λ(g).

    The supremum runs over all p^(2W) group elements. Since γ_g(a) - a
    depends on g only through the character values on the coefficient
    support, elements are grouped by character fiber and each fiber
    contributes one operator norm, divided by the minimal ℓ_λ over the
    fiber. The result is the exact supremum.
    """
    if not (0.0 < lam < 1.0):
        raise PreconditionError("λ must lie in (0, 1)")
    w = a.window
    p, W = w.p, w.n_sites
    check_cap("group_enum", p ** (2 * W), "Weyl group enumeration")

    coeffs = weyl_expand(a)
    support = [(exps, c) for exps, c in coeffs.data.items() if any(pair != (0, 0) for pair in exps)]
    if not support:
        return 0.0

    # columns ordered (i_0, j_0, i_1, j_1, ...) to pair with group (r_0, s_0, ...)
    E = np.array([[x for pair in exps for x in pair] for exps, _ in support], dtype=np.int64)
    site_weights = np.array([lam ** abs(k) for k in w.sites])
    # per-site length table ℓ(r, s) for r, s in Z_p
    rr, ss = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
    ell_table = np.hypot(np.minimum(rr, p - rr) / p, np.minimum(ss, p - ss) / p)

    best: dict[bytes, float] = {}
    for G in _enumerate_group(p, 2 * W):
        r = G[:, 0::2]
        s = G[:, 1::2]
        lens = (ell_table[r, s] * site_weights[None, :]).sum(axis=1)
        chars = (G @ E.T) % p
        nonzero = chars.any(axis=1)
        chars = np.ascontiguousarray(chars[nonzero].astype(np.uint8))
        lens = lens[nonzero]
        for row, ln in zip(chars, lens):
            key = row.tobytes()
            prev = best.get(key)
            if prev is None or ln < prev:
                best[key] = float(ln)

    rho = np.exp(2j * np.pi / p)
    monos = np.stack([weyl_monomial(w, exps).matrix for exps, _ in support])
    values = np.array([c for _, c in support])
    sup = 0.0
    for key, ln in best.items():
        t = np.frombuffer(key, dtype=np.uint8)
        factors = values * (rho ** t.astype(np.int64) - 1.0)
        diff = np.tensordot(factors, monos, axes=1)
        sup = max(sup, operator_norm(diff) / ln)
    return sup


def monomial_lip_norm(window: WeylWindow, exponents, lam: float) -> float:
    """Closed-form L of a Weyl monomial.

    For a monomial the numerator |Π_k ρ^(r_k i_k + s_k j_k) - 1| is at most
    the sum of per-site terms while ℓ_λ is a sum, so the supremum is
    attained on single-site group elements and reduces to a finite max.
    """
    if not (0.0 < lam < 1.0):
        raise PreconditionError("λ must lie in (0, 1)")
    exponents = normalize_exponents(window, exponents)
    p = window.p
    rho = np.exp(2j * np.pi / p)
    best = 0.0
    for site, (i, j) in zip(window.sites, exponents):
        weight = lam ** abs(site)
        for r in range(p):
            for s in range(p):
                if (r, s) == (0, 0):
                    continue
                num = abs(rho ** ((r * i + s * j) % p) - 1.0)
                best = max(best, num / (weight * site_length(p, r, s)))
    return best


def exponent_index(window: WeylWindow, exps: Exponents) -> int:
    """Flat index of a monomial exponent in the canonical coefficient basis."""
    p = window.p
    idx = 0
    for i, j in exps:
        idx = idx * p * p + i * p + j
    return idx


def gns_vector(a: WeylElement) -> np.ndarray:
    """Coefficient vector of a in the monomial basis (the GNS vector π_τ(a)ξ_τ)."""
    w = a.window
    vec = np.zeros(w.dim**2, dtype=np.complex128)
    for exps, c in weyl_expand(a).data.items():
        vec[exponent_index(w, exps)] = c
    return vec


def element_to_jsonable(a: WeylElement) -> dict:
    coeffs = weyl_expand(a)
    rows = sorted(
        ([list(pair) for pair in exps], c.real, c.imag) for exps, c in coeffs.data.items()
    )
    return {
        "p": a.window.p,
        "lo": a.window.lo,
        "hi": a.window.hi,
        "coefficients": [[e, re, im] for e, re, im in rows],
    }


def element_from_jsonable(obj: dict) -> WeylElement:
    window = WeylWindow(int(obj["p"]), int(obj["lo"]), int(obj["hi"]))
    data: dict[Exponents, complex] = {}
    for exps, re, im in obj["coefficients"]:
        key = normalize_exponents(window, [tuple(pair) for pair in exps])
        data[key] = complex(re, im)
    return reconstruct(WeylCoefficients(window, data))


def element_to_json(a: WeylElement) -> str:
    return json.dumps(element_to_jsonable(a), sort_keys=True)


def element_from_json(text: str) -> WeylElement:
    return element_from_jsonable(json.loads(text))


def weyl_unitary_family(window: WeylWindow) -> list[Exponents]:
    """All monomial exponent tuples on the window (the elementary-tensor family)."""
    p = window.p
    W = window.n_sites
    check_cap("group_enum", p ** (2 * W), "Weyl monomial family")
    out = []
    for flat in range(p ** (2 * W)):
        exps = []
        for k in range(W - 1, -1, -1):
            pair_idx = (flat // (p * p) ** k) % (p * p)
            exps.append((pair_idx // p, pair_idx % p))
        out.append(tuple(exps))
    return out
