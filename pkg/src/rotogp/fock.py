"""Truncated bosonic Fock space: ED, coherent states, symbol calculus.

The basis holds every occupation vector (n_1, ..., n_J) with total below a
cap; its dimension is C(n_max + J, J).  Ladder operators follow the sqrt-n
rules, and the raising operator simply drops the top total-number sector
(the only place truncation is visible).  The model Hamiltonian is

    H = sum_j e_j a+_j a_j + sum_{ijkl} W_{ijkl} a+_i a+_j a_k a_l
        + (C/M) (N_hat - M)^2,

which conserves total particle number, so each sector diagonalizes
independently and truncation is exact on full sectors.

Coherent states, lower/upper symbols of normal-ordered polynomials (the
upper-symbol series terminates for degree <= 4), and the coherent-state
resolution of identity int dz Pi(z) = Id (dz = pi^{-1} dx dy per mode)
live here too, plus the closed-form error constants D1, D2, D3 and the
soft-potential smoothing estimate.
"""

from dataclasses import dataclass, field as dc_field
from math import comb, factorial

import numpy as np
from scipy import optimize, sparse, special
from scipy.sparse.linalg import eigsh

from .backend import USE_NUMBA, njit
from .fields import ComplexField, norm4_pow4, norm_p, grad_norm_sq


# ---------------------------------------------------------------------------
# basis and ladder operators
# ---------------------------------------------------------------------------

class FockBasis:
    """All occupation vectors with sum(n) <= n_max, graded by total number."""

    def __init__(self, modes: int, n_max: int):
        if modes < 1 or n_max < 0:
            raise ValueError("need modes >= 1 and n_max >= 0")
        self.modes = modes
        self.n_max = n_max
        states = []
        occ = [0] * modes

        def rec(j, left):
            if j == modes:
                states.append(tuple(occ))
                return
            for n in range(left + 1):
                occ[j] = n
                rec(j + 1, left - n)
            occ[j] = 0

        rec(0, n_max)
        self.states = np.array(sorted(states, key=lambda t: (sum(t), t)),
                               dtype=np.int64)
        assert self.states.shape[0] == comb(n_max + modes, modes)
        # dense mixed-radix lookup: code = sum n_j (n_max+1)^j
        radix = (n_max + 1) ** np.arange(modes, dtype=np.int64)
        self._radix = radix
        self._lookup = -np.ones((n_max + 1) ** modes, dtype=np.int64)
        self._lookup[self.states @ radix] = np.arange(len(self.states))
        self.totals = self.states.sum(axis=1)

    def __len__(self):
        return self.states.shape[0]

    def index(self, occ) -> int:
        occ = np.asarray(occ, dtype=np.int64)
        code = int(occ @ self._radix)
        idx = int(self._lookup[code]) if 0 <= code < self._lookup.size else -1
        if idx < 0 or not np.array_equal(self.states[idx], occ):
            raise KeyError(f"occupation {tuple(occ)} outside the basis")
        return idx

    def sector(self, total: int) -> np.ndarray:
        """Indices of all states with the given total particle number."""
        idx = np.nonzero(self.totals == total)[0]
        if idx.size == 0:
            raise ValueError(f"sector {total} empty in truncation {self.n_max}")
        return idx


def lowering_operator(basis: FockBasis, j: int) -> sparse.csr_matrix:
    """a_j on the truncated basis (sqrt-n rule)."""
    if not 0 <= j < basis.modes:
        raise IndexError(f"mode {j} out of range")
    src = np.nonzero(basis.states[:, j] > 0)[0]
    amp = np.sqrt(basis.states[src, j].astype(float))
    tgt_occ = basis.states[src].copy()
    tgt_occ[:, j] -= 1
    tgt = basis._lookup[tgt_occ @ basis._radix]
    n = len(basis)
    return sparse.csr_matrix((amp, (tgt, src)), shape=(n, n))


def ladder_operators(basis: FockBasis, j: int):
    """(a_j, a+_j); a+_j annihilates the top total-number sector."""
    a = lowering_operator(basis, j)
    return a, a.conj().T.tocsr()


def number_operator(basis: FockBasis) -> sparse.csr_matrix:
    return sparse.diags(basis.totals.astype(float)).tocsr()


def is_hermitian(m, tol=1e-12) -> bool:
    d = m - m.conj().T
    return bool(abs(d).max() <= tol) if d.nnz else True


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

@dataclass
class ModeBasis:
    """One-particle energies, two-body tensor, and number-penalty data."""

    e: np.ndarray            # one-particle energies, positive nondecreasing
    W: np.ndarray            # W[i,j,k,l], hermitian with i<->j, k<->l symmetry
    C: float = 0.0           # penalty weight
    M: int = 0               # target particle number

    def __post_init__(self):
        self.e = np.asarray(self.e, dtype=float)
        self.W = np.asarray(self.W)
        J = self.e.size
        if np.any(np.diff(self.e) < 0) or np.any(self.e <= 0):
            raise ValueError("energies must be positive and nondecreasing")
        if self.W.shape != (J, J, J, J):
            raise ValueError("W tensor shape must be (J, J, J, J)")
        herm = np.conj(np.transpose(self.W, (2, 3, 0, 1)))
        if not np.allclose(self.W, herm, atol=1e-12):
            raise ValueError("W must be hermitian: W_ijkl = conj(W_klij)")

    @property
    def modes(self):
        return self.e.size


@njit(cache=True)
def _two_body_coo(states, lookup, radix, W, rows, cols, vals):  # pragma: no cover
    dim, J = states.shape
    cnt = 0
    for s in range(dim):
        n = states[s]
        for l in range(J):
            if n[l] == 0:
                continue
            amp_l = np.sqrt(n[l])
            for k in range(J):
                mk = n[k] - (1 if k == l else 0)
                if mk < 1:
                    continue
                amp_k = np.sqrt(mk)
                for j in range(J):
                    mj = n[j] - (1 if j == l else 0) - (1 if j == k else 0)
                    amp_j = np.sqrt(mj + 1.0)
                    for i in range(J):
                        if W[i, j, k, l] == 0.0:
                            continue
                        mi = (n[i] - (1 if i == l else 0) - (1 if i == k else 0)
                              + (1 if i == j else 0))
                        amp_i = np.sqrt(mi + 1.0)
                        code = 0
                        for t in range(J):
                            nt = n[t]
                            if t == l:
                                nt -= 1
                            if t == k:
                                nt -= 1
                            if t == j:
                                nt += 1
                            if t == i:
                                nt += 1
                            code += nt * radix[t]
                        tgt = lookup[code]
                        rows[cnt] = tgt
                        cols[cnt] = s
                        vals[cnt] = W[i, j, k, l] * amp_l * amp_k * amp_j * amp_i
                        cnt += 1
    return cnt


def _two_body_sparse(mb: ModeBasis, basis: FockBasis):
    """Fallback: assemble sum W_ijkl a+_i a+_j a_k a_l from ladder products."""
    J = mb.modes
    a = [lowering_operator(basis, j) for j in range(J)]
    pair = {}
    for k in range(J):
        for l in range(J):
            pair[(k, l)] = (a[k] @ a[l]).tocsr()
    n = len(basis)
    H = sparse.csr_matrix((n, n), dtype=mb.W.dtype)
    for i in range(J):
        for j in range(J):
            left = pair[(j, i)].conj().T  # a+_i a+_j
            for k in range(J):
                for l in range(J):
                    w = mb.W[i, j, k, l]
                    if w != 0:
                        H = H + w * (left @ pair[(k, l)])
    return H


def build_hamiltonian(mb: ModeBasis, basis: FockBasis, include_penalty=False):
    """Sparse hermitian H = sum e_j n_j + two-body + optional number penalty."""
    if mb.modes != basis.modes:
        raise ValueError("mode count mismatch")
    diag = basis.states.astype(float) @ mb.e
    if include_penalty:
        if mb.M <= 0:
            raise ValueError("penalty requires a positive target M")
        diag = diag + (mb.C / mb.M) * (basis.totals - mb.M) ** 2
    H = sparse.diags(diag)
    if USE_NUMBA and np.isrealobj(mb.W):
        J = mb.modes
        cap = len(basis) * J**4
        rows = np.empty(cap, dtype=np.int64)
        cols = np.empty(cap, dtype=np.int64)
        vals = np.empty(cap, dtype=np.float64)
        cnt = _two_body_coo(
            basis.states, basis._lookup, basis._radix,
            np.ascontiguousarray(mb.W, dtype=np.float64), rows, cols, vals,
        )
        H2 = sparse.csr_matrix(
            (vals[:cnt], (rows[:cnt], cols[:cnt])), shape=(len(basis),) * 2
        )
    else:
        H2 = _two_body_sparse(mb, basis)
    H = (H + H2).tocsr()
    return H


def ground_state(H, basis: FockBasis, total: int):
    """(E0, vector) on the fixed-total-number sector; residual <= 1e-10."""
    idx = basis.sector(total)
    sub = H[np.ix_(idx, idx)]
    if idx.size <= 400:
        w, v = np.linalg.eigh(sub.toarray())
        e0, vec = float(w[0]), v[:, 0]
    else:
        w, v = eigsh(sub.tocsc(), k=1, which="SA")
        e0, vec = float(w[0]), v[:, 0]
    resid = np.linalg.norm(sub @ vec - e0 * vec)
    if resid > 1e-10 * max(1.0, abs(e0)):
        raise ArithmeticError(f"eigensolver residual {resid}")
    full = np.zeros(len(basis), dtype=vec.dtype)
    full[idx] = vec
    return e0, full


def hartree_minimum(e, W, n_starts=24, seed=0):
    """min over unit vectors of sum e|c|^2 + sum W_ijkl conj(c_i c_j) c_k c_l."""
    e = np.asarray(e, dtype=float)
    W = np.asarray(W)
    J = e.size

    def value(c):
        c = c / np.linalg.norm(c)
        quad = float(e @ np.abs(c) ** 2)
        quart = np.einsum("ijkl,i,j,k,l->", W, np.conj(c), np.conj(c), c, c)
        return quad + float(quart.real)

    def fun(x):
        c = x[:J] + 1j * x[J:]
        nc = np.linalg.norm(c)
        if nc < 1e-12:
            return 1e6
        return value(c)

    rng = np.random.default_rng(seed)
    best = np.inf
    best_c = None
    for _ in range(n_starts):
        x0 = rng.standard_normal(2 * J)
        res = optimize.minimize(fun, x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14,
                                         "maxiter": 6000})
        if res.fun < best:
            best = res.fun
            c = res.x[:J] + 1j * res.x[J:]
            best_c = c / np.linalg.norm(c)
    return float(best), best_c


def pair_interaction_tensor(u, g=1.0):
    """Symmetrized rank-style tensor W_ijkl = g (u_ik u_jl + u_il u_jk)/2."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or not np.allclose(u, u.T):
        raise ValueError("u must be a symmetric square matrix")
    W = 0.5 * (np.einsum("ik,jl->ijkl", u, u) + np.einsum("il,jk->ijkl", u, u))
    return g * W


# ---------------------------------------------------------------------------
# coherent states
# ---------------------------------------------------------------------------

@dataclass
class CoherentVector:
    z: np.ndarray
    vector: np.ndarray
    truncation_error: float


def coherent_state(z, basis: FockBasis, tol=1e-8) -> CoherentVector:
    """Truncated product coherent state with a Poisson tail certificate."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.size != basis.modes:
        raise ValueError("one amplitude per mode")
    s = float(np.sum(np.abs(z) ** 2))
    # P[Poisson(s) > n_max]: the exact squared-norm deficit of the truncation
    tail = float(special.gammainc(basis.n_max + 1, s)) if s > 0 else 0.0
    if tail > tol:
        raise ValueError(f"coherent tail {tail:.3e} exceeds tolerance {tol:.0e}")
    logfact = special.gammaln(np.arange(basis.n_max + 1) + 1.0)
    amp = np.exp(-0.5 * s) * np.ones(len(basis), dtype=complex)
    for j in range(basis.modes):
        nj = basis.states[:, j]
        zj = z[j]
        if zj == 0:
            amp = np.where(nj == 0, amp, 0.0)
        else:
            amp = amp * np.exp(nj * np.log(zj) - 0.5 * logfact[nj])
    return CoherentVector(z=z, vector=amp, truncation_error=tail)


# ---------------------------------------------------------------------------
# normal-ordered polynomials and their symbols
# ---------------------------------------------------------------------------

@dataclass
class SymbolPolynomial:
    """sum of coeff * prod_j (a+_j)^{p_j} prod_j (a_j)^{q_j}, degree <= 4.

    Also read as the polynomial u(z) = sum coeff * zbar^p z^q, which is the
    lower symbol of the operator.
    """

    modes: int
    terms: dict = dc_field(default_factory=dict)  # {(p, q): coeff}

    def __post_init__(self):
        for (p, q), _ in self.terms.items():
            if len(p) != self.modes or len(q) != self.modes:
                raise ValueError("term arity does not match mode count")
            if sum(p) + sum(q) > 4:
                raise ValueError("symbol calculus is exact only to degree 4")

    @classmethod
    def term(cls, modes, p, q, coeff=1.0):
        return cls(modes, {(tuple(p), tuple(q)): coeff})

    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) + c
        return SymbolPolynomial(self.modes, out)

    def scale(self, c):
        return SymbolPolynomial(
            self.modes, {k: c * v for k, v in self.terms.items()}
        )

    def evaluate(self, z):
        """u(z): the lower symbol."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        val = 0.0 + 0.0j
        for (p, q), c in self.terms.items():
            val += c * np.prod(np.conj(z) ** p) * np.prod(z**q)
        return complex(val)

    def contract(self):
        """sum_j d/dz_j d/dzbar_j applied termwise."""
        out = {}
        for (p, q), c in self.terms.items():
            for j in range(self.modes):
                if p[j] > 0 and q[j] > 0:
                    np_ = tuple(x - (1 if t == j else 0) for t, x in enumerate(p))
                    nq = tuple(x - (1 if t == j else 0) for t, x in enumerate(q))
                    key = (np_, nq)
                    out[key] = out.get(key, 0.0) + c * p[j] * q[j]
        return SymbolPolynomial(self.modes, out)

    def upper(self):
        """Upper-symbol polynomial U = u - Du + D^2 u / 2 (exact, degree <= 4)."""
        d1 = self.contract()
        d2 = d1.contract()
        return self + d1.scale(-1.0) + d2.scale(0.5)

    def to_matrix(self, basis: FockBasis):
        n = len(basis)
        out = sparse.csr_matrix((n, n), dtype=complex)
        a = [lowering_operator(basis, j) for j in range(basis.modes)]
        for (p, q), c in self.terms.items():
            m = sparse.identity(n, dtype=complex, format="csr")
            for j in range(basis.modes):
                for _ in range(p[j]):
                    m = m @ a[j].conj().T
            for j in range(basis.modes):
                for _ in range(q[j]):
                    m = m @ a[j]
            out = out + c * m
        return out


def lower_symbol(poly: SymbolPolynomial, z):
    return poly.evaluate(z)


def upper_symbol(poly: SymbolPolynomial, z):
    return poly.upper().evaluate(z)


def verify_resolution(
    basis: FockBasis, Z=6.0, n_radial=80, n_angle=64, poly=None, n_cut=3
):
    """Operator-norm error of int dz U(z) Pi(z) against the target.

    Single-mode quadrature: Gauss-Legendre radius on [0, Z], uniform angle;
    with poly=None the target is the identity (U = 1); otherwise the target
    is poly's matrix and U its upper symbol.  Compared on the n <= n_cut
    block, which the coherent projector reproduces once Z covers the
    relevant matrix elements.
    """
    if basis.modes != 1:
        raise ValueError("resolution check implemented for a single mode")
    if n_cut >= basis.n_max:
        raise ValueError("n_cut must sit strictly below the truncation")
    r, wr = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * Z * (r + 1.0)
    wr = 0.5 * Z * wr
    th = 2.0 * np.pi * np.arange(n_angle) / n_angle
    zg = np.outer(r, np.exp(1j * th)).ravel()
    wg = np.outer(wr * r, np.full(n_angle, 2.0 * np.pi / n_angle)).ravel() / np.pi
    ns = np.arange(basis.n_max + 1)
    logfact = special.gammaln(ns + 1.0)
    # V[n, g] = z_g^n / sqrt(n!) * e^{-|z_g|^2/2}
    V = np.exp(
        np.outer(ns, np.log(zg)) - 0.5 * logfact[:, None]
        - 0.5 * np.abs(zg)[None, :] ** 2
    )
    if poly is None:
        u = np.ones_like(wg)
        target = np.eye(basis.n_max + 1)
    else:
        up = poly.upper()
        u = np.array([up.evaluate(np.array([z])) for z in zg])
        target = poly.to_matrix(basis).toarray()
    M = (V * (wg * u)[None, :]) @ V.conj().T
    blk = slice(0, n_cut + 1)
    err = np.abs(M[blk, blk] - target[blk, blk]).max()
    return float(err)


# ---------------------------------------------------------------------------
# error constants
# ---------------------------------------------------------------------------

@dataclass
class ErrorConstants:
    D1: float
    D2: float
    D3: float


def error_constants(w1, winf, delta, eta, e, J, M, E, C=0.0) -> ErrorConstants:
    """The three closed-form bookkeeping constants.

    w1, winf: L1 and sup norms of the two-body potential; delta in (0,1);
    eta > 0; e: one-particle spectrum (length >= J); M: particle number;
    E: the a-priori energy-per-particle constant; C: penalty weight.
    """
    e = np.asarray(e, dtype=float)
    if e.size < J:
        raise ValueError("spectrum shorter than J")
    if not (0 < delta < 1) or eta <= 0 or w1 < 0 or winf < 0:
        raise ValueError("bad inputs")
    eJ = e[J - 1]
    s_sqrt = float(np.sum(np.sqrt(e[:J])))
    s_34 = float(np.sum(e[:J] ** 0.75))
    s_e = float(np.sum(e[:J]))

    t_b = 2.0 * np.sqrt(2.0 / 3.0) * (2.0 * np.pi**2) ** (-1.0 / 3.0) \
        * winf ** (1.0 / 6.0) * w1 ** (1.0 / 3.0)
    t_c = (4.0 / (3.0 * np.pi ** (2.0 / 3.0))) * eta**-0.25 * np.sqrt(w1) \
        * eJ**-0.25 * np.sqrt(M * E)
    t_d = (4.0 / np.pi**2) * np.sqrt(2.0 / 27.0) / np.sqrt(eta) * w1 \
        * np.sqrt(M * E)
    t_e = (4.0 / 3.0) ** 1.5 / (2.0 * np.pi**2) / np.sqrt(eta) * w1 * s_sqrt
    t_f = 4.0 * (4.0 / 3.0) ** 1.25 * (2.0 * np.pi**2) ** (-5.0 / 6.0) \
        * w1 ** (5.0 / 6.0) * winf ** (1.0 / 6.0) * eta**-0.75 * s_34

    D1 = 1.0 - delta - eJ**-0.25 * w1 * M * E - t_b - t_c
    D2 = t_b + t_c + t_d + t_e + t_f
    D3 = (
        s_e
        + (2.0 * C * J / M) * (M * E / eJ + 0.5)
        + (4.0 / 3.0) ** 1.5 / (2.0 * np.pi**2) * eta**-1.5 * w1 * M * E * s_sqrt
        + t_f * (M * E / eJ + 0.5)
        + winf / delta
    )
    return ErrorConstants(D1=float(D1), D2=float(D2), D3=float(D3))


# ---------------------------------------------------------------------------
# smoothing estimate
# ---------------------------------------------------------------------------

def smoothing_estimate_check(phi: ComplexField, R: float):
    """(lhs, rhs) of
    |int |phi(x)|^2 |phi(y)|^2 U_R(x-y) - 4 pi ||phi||_4^4|
        <= 8 pi R ||phi||_6^3 ||grad phi||_2.
    The hat potential is discretized on the field's grid and renormalized
    so its lattice integral is exactly 4 pi.
    """
    grid = phi.grid
    if grid.dim != 3:
        raise ValueError("smoothing estimate is a 3D statement")
    if R <= 2.0 * grid.spacing:
        raise ValueError("R must be resolved by a few grid spacings")
    rr = np.sqrt(grid.radius_sq())
    inner = 2.0 ** (-1.0 / 3.0) * R
    U = np.where((rr >= inner) & (rr <= R), 6.0 / R**3, 0.0)
    w = grid.spacing**3
    total = w * U.sum()
    if total == 0.0:
        raise ValueError("hat shell not resolved by the grid")
    U *= 4.0 * np.pi / total
    rho = np.abs(phi.values) ** 2
    conv = np.fft.ifftn(np.fft.fftn(rho) * np.fft.fftn(np.fft.ifftshift(U))).real * w
    lhs = abs(w * np.sum(rho * conv) - 4.0 * np.pi * norm4_pow4(phi))
    rhs = 8.0 * np.pi * R * norm_p(phi, 6) ** 3 * np.sqrt(grad_norm_sq(phi))
    return float(lhs), float(rhs)
