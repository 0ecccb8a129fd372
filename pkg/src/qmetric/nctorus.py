"""Symbolic noncommutative p-torus: twisted polynomials over Z^p.

Generators u_1, ..., u_p obey u_j u_i = ρ_ij u_i u_j with
ρ_ij = exp(2πi θ_ij) for a real antisymmetric phase matrix θ (entries
mod 1). Elements are finitely supported coefficient maps k ↦ c_k on Z^p,
understood as normal-ordered sums Σ c_k u_1^{k_1} ⋯ u_p^{k_p}.

Multiplying normal-ordered monomials produces the reordering phase
phase(k, l) = Π_{i<j} ρ_ij^{k_j l_i}, validated against the rational-θ
clock/shift matrix representation rather than trusted from derivation.

The torus action γ_t(u_j) = e^{2πi t_j} u_j with length scaled by 2π gives
L(u_j) = 1; lip_bounds returns certified (lower, upper) brackets that
collapse to |k|_2 on monomials. Operator norms at irrational θ are never
claimed exactly; consumers take brackets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .caps import check_cap
from .errors import PreconditionError
from . import weyl

PRUNE_TOL = 1e-15


def _reduce_mod1(x: np.ndarray) -> np.ndarray:
    return np.mod(x, 1.0)


@dataclass(frozen=True)
class PhaseMatrix:
    p: int
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.p < 1:
            raise PreconditionError("p must be >= 1")
        th = np.asarray(self.theta, dtype=float)
        if th.shape != (self.p, self.p):
            raise PreconditionError(f"theta must be {self.p}x{self.p}")
        th = _reduce_mod1(th)
        if np.abs(np.diag(th)).max(initial=0.0) > 1e-12:
            raise PreconditionError("theta must have zero diagonal")
        skew = _reduce_mod1(th + th.T)
        skew = np.minimum(skew, 1.0 - skew)
        if skew.max(initial=0.0) > 1e-12:
            raise PreconditionError("theta must be antisymmetric mod 1")
        th = th.copy()
        th.flags.writeable = False
        object.__setattr__(self, "theta", th)

    @classmethod
    def two_torus(cls, theta12: float) -> "PhaseMatrix":
        t = float(theta12) % 1.0
        return cls(2, np.array([[0.0, t], [(-t) % 1.0, 0.0]]))

    def __eq__(self, other):
        return (
            isinstance(other, PhaseMatrix)
            and self.p == other.p
            and np.array_equal(self.theta, other.theta)
        )

    def __hash__(self):
        return hash((self.p, self.theta.tobytes()))


def reorder_exponent(k, l, phase: PhaseMatrix) -> float:
    """Additive phase Σ_{i<j} θ_ij k_j l_i with (k-mono)(l-mono) = e^{2πi·} (k+l)-mono."""
    k = np.asarray(k, dtype=np.int64)
    l = np.asarray(l, dtype=np.int64)
    if k.shape != (phase.p,) or l.shape != (phase.p,):
        raise PreconditionError(f"exponents must have length {phase.p}")
    total = 0.0
    th = phase.theta
    for i in range(phase.p):
        for j in range(i + 1, phase.p):
            total += th[i, j] * k[j] * l[i]
    return total


def reorder_phase(k, l, phase: PhaseMatrix) -> complex:
    return complex(np.exp(2j * np.pi * reorder_exponent(k, l, phase)))


def _self_order_exponent(k, phase: PhaseMatrix) -> float:
    """Phase exponent of the reversed product: u_p^{k_p}⋯u_1^{k_1} = e^{2πi·} (k-mono)."""
    total = 0.0
    th = phase.theta
    for i in range(phase.p):
        for j in range(i + 1, phase.p):
            total += th[i, j] * k[i] * k[j]
    return total


class TwistedPolynomial:
    """Finitely supported coefficient map on Z^p with twisted multiplication."""

    __slots__ = ("phase", "coeffs")

    def __init__(self, phase: PhaseMatrix, coeffs: dict[tuple[int, ...], complex]):
        self.phase = phase
        pruned = {}
        for k, c in coeffs.items():
            if len(k) != phase.p:
                raise PreconditionError(f"exponent {k} has wrong length for p={phase.p}")
            c = complex(c)
            if abs(c) > PRUNE_TOL:
                pruned[tuple(int(x) for x in k)] = c
        self.coeffs = pruned

    @classmethod
    def monomial(cls, phase: PhaseMatrix, k, coeff: complex = 1.0) -> "TwistedPolynomial":
        return cls(phase, {tuple(int(x) for x in k): complex(coeff)})

    @classmethod
    def one(cls, phase: PhaseMatrix) -> "TwistedPolynomial":
        return cls.monomial(phase, (0,) * phase.p)

    @classmethod
    def generator(cls, phase: PhaseMatrix, j: int) -> "TwistedPolynomial":
        """u_j, 1-based index as in the relations."""
        if not 1 <= j <= phase.p:
            raise PreconditionError(f"generator index {j} out of range")
        k = [0] * phase.p
        k[j - 1] = 1
        return cls.monomial(phase, k)

    @property
    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.coeffs)

    @property
    def is_monomial(self) -> bool:
        return len(self.coeffs) == 1

    def __add__(self, other: "TwistedPolynomial") -> "TwistedPolynomial":
        self._check_phase(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return TwistedPolynomial(self.phase, out)

    def __sub__(self, other: "TwistedPolynomial") -> "TwistedPolynomial":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "TwistedPolynomial":
        if isinstance(scalar, (int, float, complex)):
            return TwistedPolynomial(
                self.phase, {k: scalar * c for k, c in self.coeffs.items()}
            )
        return NotImplemented

    def __mul__(self, other) -> "TwistedPolynomial":
        if isinstance(other, (int, float, complex)):
            return self.__rmul__(other)
        if isinstance(other, TwistedPolynomial):
            return twisted_product(self, other)
        return NotImplemented

    def adjoint(self) -> "TwistedPolynomial":
        return involution(self)

    def _check_phase(self, other: "TwistedPolynomial") -> None:
        if self.phase != other.phase:
            raise PreconditionError("phase matrices do not match")

    def __repr__(self):
        return f"TwistedPolynomial(p={self.phase.p}, support={len(self.coeffs)})"


def twisted_product(a: TwistedPolynomial, b: TwistedPolynomial) -> TwistedPolynomial:
    a._check_phase(b)
    out: dict[tuple[int, ...], complex] = {}
    for k, ck in a.coeffs.items():
        for l, cl in b.coeffs.items():
            m = tuple(x + y for x, y in zip(k, l))
            out[m] = out.get(m, 0.0) + ck * cl * np.exp(
                2j * np.pi * reorder_exponent(k, l, a.phase)
            )
    return TwistedPolynomial(a.phase, out)


def involution(a: TwistedPolynomial) -> TwistedPolynomial:
    """Adjoint: (c · k-mono)* = conj(c) e^{2πi Σ_{i<j} θ_ij k_i k_j} · (-k)-mono."""
    out: dict[tuple[int, ...], complex] = {}
    for k, c in a.coeffs.items():
        phase = np.exp(2j * np.pi * _self_order_exponent(k, a.phase))
        out[tuple(-x for x in k)] = np.conj(c) * phase
    return TwistedPolynomial(a.phase, out)


def trace(a: TwistedPolynomial) -> complex:
    """τ picks the zero-exponent coefficient (γ-invariance)."""
    return complex(a.coeffs.get((0,) * a.phase.p, 0.0))


def trace_pairing(a: TwistedPolynomial, b: TwistedPolynomial) -> complex:
    """GNS inner product ⟨a, b⟩ = τ(b* a) = Σ_k a_k conj(b_k).

    The reordering and involution phases cancel exactly, so the pairing is
    the plain ℓ² form on coefficients; monomials are orthonormal.
    """
    a._check_phase(b)
    small, large = (a.coeffs, b.coeffs) if len(a.coeffs) <= len(b.coeffs) else (b.coeffs, a.coeffs)
    total = 0.0 + 0.0j
    for k in small:
        if k in large:
            total += a.coeffs[k] * np.conj(b.coeffs[k])
    return complex(total)


def gns_norm(a: TwistedPolynomial) -> float:
    return float(np.sqrt(sum(abs(c) ** 2 for c in a.coeffs.values())))


def gns_vector(a: TwistedPolynomial, exponents: list[tuple[int, ...]]) -> np.ndarray:
    """Coefficient vector of a relative to an ordered exponent list."""
    return np.array([a.coeffs.get(tuple(k), 0.0) for k in exponents], dtype=np.complex128)


def _kronecker_points(p: int, count: int) -> np.ndarray:
    """Deterministic low-discrepancy points on [0,1)^p (Kronecker sequence)."""
    # generalized golden ratio: unique root > 1 of x^(p+1) = x + 1
    phi = 1.5
    for _ in range(80):
        phi = (1.0 + phi) ** (1.0 / (p + 1))
    alpha = np.array([(1.0 / phi) ** (j + 1) % 1.0 for j in range(p)])
    idx = np.arange(1, count + 1)[:, None]
    return np.mod(idx * alpha[None, :], 1.0)


def torus_distance(t: np.ndarray) -> float:
    """Euclidean distance of t to 0 on R^p/Z^p."""
    r = np.mod(np.asarray(t, dtype=float), 1.0)
    r = np.minimum(r, 1.0 - r)
    return float(np.linalg.norm(r))


def sampled_lip_lower(
    a: TwistedPolynomial, n_radii: int = 25, n_lowdisc: int = 1000
) -> float:
    """Sampled lower bound sup_t ‖γ_t(a) - a‖_GNS / ℓ(t) over a fixed grid.

    Valid because the C*-norm dominates the GNS norm. The grid takes
    support directions k/|k|₂ at geometric radii 1e-4..1/4 plus a
    deterministic low-discrepancy Kronecker set; the supremum is attained
    in the limit t → 0 along support directions.
    """
    p = a.phase.p
    ks = np.array([k for k in a.coeffs if any(k)], dtype=np.int64)
    if ks.size == 0:
        return 0.0
    cs = np.array([a.coeffs[tuple(k)] for k in ks])
    norms = np.linalg.norm(ks.astype(float), axis=1)
    dirs = ks.astype(float) / norms[:, None]
    radii = np.geomspace(1e-4, 0.25, n_radii)
    ts = (dirs[:, None, :] * radii[None, :, None]).reshape(-1, p)
    ts = np.vstack([ts, _kronecker_points(p, n_lowdisc)])
    lower = 0.0
    abs2 = np.abs(cs) ** 2
    for t in ts:
        dist = torus_distance(t)
        if dist < 1e-12:
            continue
        num = np.sqrt(np.sum(abs2 * 4.0 * np.sin(np.pi * (ks @ t)) ** 2))
        lower = max(lower, float(num / (2.0 * np.pi * dist)))
    return lower


def lip_bounds(
    a: TwistedPolynomial, n_radii: int = 25, n_lowdisc: int = 1000
) -> tuple[float, float]:
    """Certified bracket (lower, upper) for the torus-action Lip seminorm.

    upper = Σ |c_k| |k|₂ from the triangle inequality and
    |e^{2πik·t} - 1| ≤ ℓ(t)|k|₂ with ℓ scaled by 2π. lower = the sampled
    supremum of ‖γ_t(a) - a‖_GNS / ℓ(t). Supports with a single nonzero
    exponent collapse to the exact value |c||k|₂ (the supremum along
    t ∝ k equals the upper bound).
    """
    ks = np.array([k for k in a.coeffs if any(k)], dtype=np.int64)
    if ks.size == 0:
        return 0.0, 0.0
    cs = np.array([a.coeffs[tuple(k)] for k in ks])
    norms = np.linalg.norm(ks.astype(float), axis=1)
    upper = float(np.sum(np.abs(cs) * norms))
    if len(ks) == 1:
        exact = float(abs(cs[0]) * norms[0])
        return exact, exact
    lower = sampled_lip_lower(a, n_radii=n_radii, n_lowdisc=n_lowdisc)
    return min(lower, upper), upper


def partial_fourier_sum(a: TwistedPolynomial, nvec) -> TwistedPolynomial:
    """Keep coefficients with |k_i| <= n_i for every i."""
    nvec = tuple(int(x) for x in nvec)
    if len(nvec) != a.phase.p or any(x < 0 for x in nvec):
        raise PreconditionError("partial sum orders must be nonnegative, one per generator")
    kept = {
        k: c
        for k, c in a.coeffs.items()
        if all(abs(ki) <= ni for ki, ni in zip(k, nvec))
    }
    return TwistedPolynomial(a.phase, kept)


def cesaro_mean(a: TwistedPolynomial, n: int) -> TwistedPolynomial:
    """σ_n: multiply the coefficient at k by Π_i max(0, 1 - |k_i|/(n+1)).

    Coefficientwise form of averaging the partial Fourier sums s_(n_1..n_p)
    over (n_1, ..., n_p) in {0..n}^p; norm-nonincreasing.
    """
    if n < 0:
        raise PreconditionError("Cesàro order must be >= 0")
    out = {}
    for k, c in a.coeffs.items():
        w = 1.0
        for ki in k:
            w *= max(0.0, 1.0 - abs(ki) / (n + 1.0))
        out[k] = c * w
    return TwistedPolynomial(a.phase, out)


def fejer_eval(n: int, t) -> np.ndarray:
    """Fejér kernel K_n(t) = Σ_{|k|<=n} (1 - |k|/(n+1)) e^{2πikt}.

    Closed form (1/(n+1)) (sin(π(n+1)t)/sin(πt))² for the e^{2πikt}
    character convention on t in [-1/2, 1/2).
    """
    if n < 0:
        raise PreconditionError("Fejér order must be >= 0")
    scalar = np.isscalar(t) or np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    s = np.sin(np.pi * t)
    small = np.abs(s) < 1e-14
    out[small] = n + 1.0
    ts = t[~small]
    out[~small] = (np.sin(np.pi * (n + 1) * ts) / np.sin(np.pi * ts)) ** 2 / (n + 1.0)
    return float(out[0]) if scalar else out


def fejer_abs_moment(n: int) -> float:
    """∫_T |t| K_n(t) dt, exactly: 1/4 - (2/π²) Σ_{odd k<=n} (1 - k/(n+1))/k².

    The odd-k terms are the Fourier coefficients of |t| on [-1/2, 1/2).
    Decays like log n / n.
    """
    if n < 0:
        raise PreconditionError("Fejér order must be >= 0")
    k = np.arange(1, n + 1, 2, dtype=float)
    if k.size == 0:
        return 0.25
    return float(0.25 - (2.0 / np.pi**2) * np.sum((1.0 - k / (n + 1.0)) / k**2))


def phase_fractions(phase: PhaseMatrix, max_denominator: int = 10**4) -> tuple[np.ndarray, int]:
    """Recover θ_ij = q_ij / N with a common denominator N, or fail.

    The denominator cap keeps the 1e-12 rationality test decisive: quadratic
    irrationals have convergents with error ~ 1/(2q²), which stays above the
    tolerance for q <= 1e4.
    """
    p = phase.p
    fracs = [[Fraction(0)] * p for _ in range(p)]
    N = 1
    for i in range(p):
        for j in range(p):
            f = Fraction(float(phase.theta[i, j])).limit_denominator(max_denominator)
            if abs(float(f) - float(phase.theta[i, j])) > 1e-12:
                raise PreconditionError(f"theta[{i},{j}] is not rational within 1e-12")
            fracs[i][j] = f
            N = N * f.denominator // gcd(N, f.denominator)
    q = np.array([[int(fracs[i][j] * N) for j in range(p)] for i in range(p)], dtype=np.int64)
    return q, N


def rational_generators(phase: PhaseMatrix) -> list[np.ndarray]:
    """Unitaries U_1..U_p with U_j U_i = e^{2πi θ_ij} U_i U_j at rational θ.

    One clock/shift pair of size N per generator pair (i, j) on the tensor
    product ⊗_{i<j} C^N: U_i acts as the clock and U_j as shift^(q_ij).
    """
    p = phase.p
    if p < 2:
        raise PreconditionError("rational representation needs p >= 2")
    q, N = phase_fractions(phase)
    n_pairs = p * (p - 1) // 2
    dim = N**n_pairs
    check_cap("rep_dim", dim, "rational representation")
    u, v = weyl.clock_shift(N) if N >= 2 else (np.eye(1, dtype=complex), np.eye(1, dtype=complex))
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    gens = []
    for g in range(p):
        mat = np.array([[1.0 + 0j]])
        for (i, j) in pairs:
            if g == i:
                factor = u
            elif g == j:
                factor = np.linalg.matrix_power(v, int(q[i, j]) % N) if N >= 2 else np.eye(1, dtype=complex)
            else:
                factor = np.eye(N if N >= 2 else 1, dtype=complex)
            mat = np.kron(mat, factor)
        gens.append(mat)
    return gens


def rational_representation(phase: PhaseMatrix, a: TwistedPolynomial) -> np.ndarray:
    """Image of a under the clock/shift representation (a *-homomorphism).

    The operator norm of the image is a certified lower bound for the
    universal C*-norm. The representation trace matches τ only on exponent
    windows where clock/shift powers are trace-free; callers restricting to
    |k_i| < N at θ_ij = q/N in lowest terms are safe.
    """
    if a.phase != phase:
        raise PreconditionError("phase matrices do not match")
    gens = rational_generators(phase)
    dim = gens[0].shape[0]
    # order of every generator divides N * (order of shift powers); powers cycle
    out = np.zeros((dim, dim), dtype=np.complex128)
    for k, c in a.coeffs.items():
        mat = np.eye(dim, dtype=np.complex128)
        for g, kg in enumerate(k):
            if kg:
                mat = mat @ _int_matrix_power(gens[g], kg)
        out += c * mat
    return out


def _int_matrix_power(m: np.ndarray, k: int) -> np.ndarray:
    if k >= 0:
        return np.linalg.matrix_power(m, k)
    return np.linalg.matrix_power(m.conj().T, -k)


def _int_det(T: np.ndarray) -> int:
    T = [[int(x) for x in row] for row in np.asarray(T)]
    n = len(T)
    if n == 1:
        return T[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in T[1:]]
        total += (-1) ** j * T[0][j] * _int_det(np.array(minor))
    return total


@dataclass(frozen=True)
class ToralMap:
    """α_T ∘ γ_t: α_T(u_j) = u_1^{T_1j} ⋯ u_p^{T_pj}, γ_t(u_j) = e^{2πi t_j} u_j."""

    T: np.ndarray = field(repr=True)
    t: np.ndarray = field(default=None, repr=True)

    def __post_init__(self):
        T = np.asarray(self.T)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise PreconditionError("T must be square")
        if not np.issubdtype(T.dtype, np.integer):
            Tr = np.rint(T)
            if np.abs(T - Tr).max(initial=0.0) > 0:
                raise PreconditionError("T must be an integer matrix")
            T = Tr.astype(np.int64)
        else:
            T = T.astype(np.int64)
        if abs(_int_det(T)) != 1:
            raise PreconditionError("|det T| must be 1")
        T = T.copy()
        T.flags.writeable = False
        object.__setattr__(self, "T", T)
        t = np.zeros(T.shape[0]) if self.t is None else np.mod(np.asarray(self.t, float), 1.0)
        if t.shape != (T.shape[0],):
            raise PreconditionError("t must be a p-vector")
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "t", t)

    @property
    def p(self) -> int:
        return self.T.shape[0]


def _monomial_power(v: np.ndarray, m: int, phase: PhaseMatrix) -> tuple[float, np.ndarray]:
    """(v-mono)^m = e^{2πi B(v,v) m(m-1)/2} · (mv)-mono for any integer m."""
    b = reorder_exponent(v, v, phase)
    return b * m * (m - 1) / 2.0, m * v


def toral_map_apply(tm: ToralMap, a: TwistedPolynomial) -> TwistedPolynomial:
    """Apply α_T ∘ γ_t coefficientwise; support maps k ↦ Tk with phases."""
    phase = a.phase
    if tm.p != phase.p:
        raise PreconditionError("toral map dimension does not match the torus")
    p = phase.p
    cols = [tm.T[:, j].astype(np.int64) for j in range(p)]
    out: dict[tuple[int, ...], complex] = {}
    for k, c in a.coeffs.items():
        phi = float(np.dot(k, tm.t))  # γ_t first
        acc = np.zeros(p, dtype=np.int64)
        for j in range(p):
            pw_phi, pw_e = _monomial_power(cols[j], k[j], phase)
            phi += pw_phi + reorder_exponent(acc, pw_e, phase)
            acc = acc + pw_e
        key = tuple(int(x) for x in acc)
        out[key] = out.get(key, 0.0) + c * np.exp(2j * np.pi * phi)
    return TwistedPolynomial(phase, out)


def polynomial_to_jsonable(a: TwistedPolynomial) -> dict:
    rows = sorted((list(k), c.real, c.imag) for k, c in a.coeffs.items())
    return {
        "p": a.phase.p,
        "theta": [[float(x) for x in row] for row in a.phase.theta],
        "coefficients": [[k, re, im] for k, re, im in rows],
    }


def polynomial_from_jsonable(obj: dict) -> TwistedPolynomial:
    phase = PhaseMatrix(int(obj["p"]), np.array(obj["theta"], dtype=float))
    coeffs = {tuple(int(x) for x in k): complex(re, im) for k, re, im in obj["coefficients"]}
    return TwistedPolynomial(phase, coeffs)


def polynomial_to_json(a: TwistedPolynomial) -> str:
    return json.dumps(polynomial_to_jsonable(a), sort_keys=True)


def polynomial_from_json(text: str) -> TwistedPolynomial:
    return polynomial_from_jsonable(json.loads(text))
