"""Heat-kernel diagonal bounds for confining potentials, with brute oracles.

The smoothing profile

    h_alpha(x) = (2/alpha) int_0^{alpha/4} (1 - 4t/alpha)^{-1/2} j_t(x) dt,
    j_t(x) = (4 pi t)^{-d/2} e^{-|x|^2 / 4t},

integrates to one in any dimension.  The substitution t = (alpha/4)(1 - u^2)
removes the endpoint square-root singularity exactly; parametrizing u = cos(theta)
additionally cancels the t -> 0 blow-up of j_t in one dimension, leaving

    h_alpha(x) = int_0^{pi/2} sin(theta) j_{(alpha/4) sin^2 theta}(x) dtheta

with a bounded integrand (for d = 3 the x -> 0 singularity of h_alpha is
genuine and integrable).  The diagonal bound reads

    e^{alpha(Delta - V)}(x, x) <= (4 pi alpha)^{-d/2} (e^{-alpha V} * h_alpha)(x),

checked against dense finite-difference eigendecompositions (d = 1) or a
partial-wave sum (d = 3, radial V).  Convolutions are direct quadrature, not
FFT: V is unbounded and periodic wraparound would corrupt the tails.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal

_THETA, _WTHETA = np.polynomial.legendre.leggauss(200)
_THETA = 0.25 * np.pi * (_THETA + 1.0)
_WTHETA = 0.25 * np.pi * _WTHETA


@dataclass(frozen=True)
class ConfiningPotential:
    """Nonnegative confining potential; C1, C2 record log-growth constants."""

    func: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"
    C1: float = 0.0      # V(x) >= C1 ln|x| - C2 for |x| >= 1 (log class)
    C2: float = 0.0

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


def harmonic_potential() -> ConfiningPotential:
    return ConfiningPotential(lambda x: x**2, label="harmonic")


def log_potential(C1: float, C2: float = 0.0) -> ConfiningPotential:
    if C1 <= 0:
        raise ValueError("log growth constant must be positive")
    return ConfiningPotential(
        lambda x: C1 * np.log1p(np.abs(x)), label="log", C1=C1, C2=C2
    )


def zero_potential() -> ConfiningPotential:
    return ConfiningPotential(lambda x: np.zeros_like(x), label="zero")


def tabulated_potential(r, v) -> ConfiningPotential:
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("confining potential must be nonnegative")
    return ConfiningPotential(
        lambda x: np.interp(np.abs(x), r, v), label="tabulated"
    )


def _check_nonneg(V: ConfiningPotential, span: float) -> None:
    probe = np.linspace(0.0, span, 64)
    if np.min(V(probe)) < -1e-12:
        raise ValueError("confining potential must be nonnegative")


# ---------------------------------------------------------------------------
# smoothing profile
# ---------------------------------------------------------------------------

def j_t(x, t, d=1):
    x = np.asarray(x, dtype=float)
    return (4.0 * np.pi * t) ** (-d / 2.0) * np.exp(-(x**2) / (4.0 * t))


def h_alpha(x, alpha, d=1):
    """h_alpha at radii x.  Vectorized; h_alpha(0) is infinite for d = 3."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    t = (alpha / 4.0) * np.sin(_THETA) ** 2
    w = np.sin(_THETA) * _WTHETA
    vals = j_t(x[:, None], t[None, :], d=d) @ w
    return vals[0] if scalar else vals


def h_alpha_integral(alpha, d=1, r_max=None):
    """Numerical integral of h_alpha over R^d (radially reduced)."""
    if r_max is None:
        r_max = 12.0 * np.sqrt(alpha)
    if d == 1:
        val, _ = quad(lambda r: h_alpha(r, alpha, d=1), 0.0, r_max, limit=200)
        return 2.0 * val
    if d == 3:
        val, _ = quad(
            lambda r: r * r * h_alpha(r, alpha, d=3), 0.0, r_max, limit=200
        )
        return 4.0 * np.pi * val
    raise ValueError("d must be 1 or 3")


def _shell_average(r, rho, alpha):
    """Average of h_alpha(|x - y|) over the unit sphere in y, d = 3.

    Equals (1 / (2 r rho)) int_{|r-rho|}^{r+rho} sigma h(sigma) dsigma; the
    integrand sigma*h(sigma) is bounded, so plain Gauss-Legendre is accurate.
    """
    if r == 0.0 or rho == 0.0:
        return h_alpha(max(r, rho), alpha, d=3)
    lo, hi = abs(r - rho), r + rho
    u, w = np.polynomial.legendre.leggauss(48)
    sig = 0.5 * (hi - lo) * u + 0.5 * (hi + lo)
    ws = 0.5 * (hi - lo) * w
    return float(np.sum(ws * sig * h_alpha(sig, alpha, d=3))) / (2.0 * r * rho)


def diag_bound(V: ConfiningPotential, alpha, xs, d=1, y_max=None):
    """(4 pi alpha)^{-d/2} (e^{-alpha V} * h_alpha)(x), adaptive quadrature.

    The convolution is integrated directly with a breakpoint at the |x - y|
    cusp of h_alpha; no periodization, so unbounded V is handled exactly up
    to the (certified-negligible) tail beyond y_max.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if y_max is None:
        y_max = np.abs(xs).max() + 12.0 * np.sqrt(alpha) + 8.0
    _check_nonneg(V, y_max)
    pref = (4.0 * np.pi * alpha) ** (-d / 2.0)
    out = np.empty(xs.size)
    if d == 1:
        for i, x in enumerate(xs):
            f = lambda y: np.exp(-alpha * V(y)) * h_alpha(abs(x - y), alpha, 1)
            val, _ = quad(f, -y_max, y_max, points=[x], limit=400)
            out[i] = val
        return pref * out
    if d == 3:
        for i, x in enumerate(xs):
            r = abs(x)
            f = lambda rho: (
                rho * rho * np.exp(-alpha * V(rho)) * _shell_average(r, rho, alpha)
            )
            val, _ = quad(f, 0.0, y_max, points=[r], limit=400)
            out[i] = 4.0 * np.pi * val
        return pref * out
    raise ValueError("d must be 1 or 3")


def _diag_bound_grid(V: ConfiningPotential, alpha, xs, d, y_max, dy=0.01):
    """Fixed-spacing convolution on an equispaced grid, for trace scans.

    The spacing is independent of the domain size so that doubling the
    domain cannot change how well the (possibly sharply peaked) factor
    e^{-alpha V} is resolved.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    pref = (4.0 * np.pi * alpha) ** (-d / 2.0)
    span = 12.0 * np.sqrt(alpha)
    if d == 1:
        y = np.arange(-y_max, y_max + dy / 2, dy)
        ev = np.exp(-alpha * V(y))
        off = np.arange(-int(np.ceil(span / dy)), int(np.ceil(span / dy)) + 1)
        hv = h_alpha(np.abs(off) * dy, alpha, d=1)
        conv = np.convolve(ev, hv, mode="same") * dy
        return pref * np.interp(xs, y, conv)
    if d == 3:
        # angular average via the cumulative kernel G(s) = int_0^s u h(u) du:
        # (e^{-aV} * h)(r) = (2 pi / r) int rho e^{-aV(rho)} [G(r+rho) - G(|r-rho|)] drho
        rho = np.arange(dy, y_max, dy)
        ev = np.exp(-alpha * V(rho)) * rho * dy
        s_tab = np.linspace(0.0, y_max + np.abs(xs).max() + dy, 20000)
        g_int = s_tab * h_alpha(s_tab, alpha, d=3)
        g_int[0] = 0.0
        G = np.concatenate(
            [[0.0], np.cumsum(0.5 * (g_int[1:] + g_int[:-1]) * np.diff(s_tab))]
        )
        out = np.empty(xs.size)
        for i, x in enumerate(xs):
            r = abs(x)
            inner = np.interp(r + rho, s_tab, G) - np.interp(
                np.abs(r - rho), s_tab, G
            )
            out[i] = 2.0 * np.pi / max(r, dy) * np.sum(ev * inner)
        return pref * out
    raise ValueError("d must be 1 or 3")


# ---------------------------------------------------------------------------
# brute-force diagonals
# ---------------------------------------------------------------------------

def _fd_modes(potential_on_grid, spacing):
    """Dirichlet finite-difference eigenpairs of -d^2/dx^2 + V, continuum-normalized."""
    n = potential_on_grid.size
    diag = 2.0 / spacing**2 + potential_on_grid
    off = np.full(n - 1, -1.0 / spacing**2)
    lam, vecs = eigh_tridiagonal(diag, off)
    return lam, vecs / np.sqrt(spacing)


def brute_diag(V: ConfiningPotential, alpha, xs, d=1, box=None, n=2400,
               ell_max=60):
    """Heat-kernel diagonal e^{alpha(Delta - V)}(x, x) from eigendecomposition.

    d = 1: dense finite differences on [-box, box].  d = 3 (radial V):
    partial-wave sum over angular channels, truncated once the lowest
    eigenvalue of a channel no longer contributes.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if box is None:
        box = np.abs(xs).max() + 12.0 * np.sqrt(alpha) + 8.0
    _check_nonneg(V, box)
    if d == 1:
        grid = np.linspace(-box, box, n)
        lam, psi = _fd_modes(V(grid), grid[1] - grid[0])
        keep = lam <= lam[0] + 80.0 / alpha
        w = np.exp(-alpha * lam[keep])
        dens = (psi[:, keep] ** 2) @ w
        return np.interp(xs, grid, dens)
    if d == 3:
        r = np.linspace(0.0, box, n)[1:]
        h = r[1] - r[0]
        out = np.zeros(xs.size)
        for ell in range(ell_max + 1):
            veff = V(r) + ell * (ell + 1) / r**2
            lam, u = _fd_modes(veff, h)
            if ell > 0 and np.exp(-alpha * lam[0]) < 1e-14 * max(out.max(), 1e-300):
                break
            keep = lam <= lam[0] + 80.0 / alpha
            w = np.exp(-alpha * lam[keep])
            dens_r = ((u[:, keep] ** 2) @ w) / r**2
            out += (2.0 * ell + 1.0) / (4.0 * np.pi) * np.interp(np.abs(xs), r, dens_r)
        return out
    raise ValueError("d must be 1 or 3")


def mehler_diag(alpha, xs):
    """Closed-form diagonal of e^{alpha(Delta - x^2)} in one dimension."""
    xs = np.asarray(xs, dtype=float)
    return (2.0 * np.pi * np.sinh(2.0 * alpha)) ** -0.5 * np.exp(
        -(xs**2) * np.tanh(alpha)
    )


# ---------------------------------------------------------------------------
# weighted trace with doubling certificate
# ---------------------------------------------------------------------------

def weighted_trace(V: ConfiningPotential, alpha, s, d=1, L0=8.0, doublings=4,
                   n_per_unit=8, growth_tol=0.01):
    """int |x|^s * diag_bound(x) dx with a domain-doubling certificate.

    Returns {'value', 'converged', 'partials'}; divergence — successive
    domain doublings growing by more than growth_tol — is reported in the
    certificate, never raised.
    """
    if s < 0:
        raise ValueError("weight exponent must be nonnegative")
    partials = []
    for k in range(doublings + 1):
        L = L0 * 2**k
        n = max(int(L * n_per_unit) | 1, 129)
        y_max = L + 12.0 * np.sqrt(alpha)
        if d == 1:
            x = np.linspace(-L, L, n)
            vals = _diag_bound_grid(V, alpha, x, 1, y_max)
            partials.append(float(np.trapezoid(np.abs(x) ** s * vals, x)))
        elif d == 3:
            x = np.linspace(0.0, L, n)[1:]
            vals = _diag_bound_grid(V, alpha, x, 3, y_max)
            partials.append(
                float(4.0 * np.pi * np.trapezoid(x ** (s + 2) * vals, x))
            )
        else:
            raise ValueError("d must be 1 or 3")
    growth = partials[-1] / partials[-2] - 1.0
    return {
        "value": partials[-1],
        "converged": bool(abs(growth) <= growth_tol),
        "partials": np.array(partials),
    }


# ---------------------------------------------------------------------------
# rank-one perturbation
# ---------------------------------------------------------------------------

def xi_alpha(xs, alpha, B, D, n_t=80, y_max=None, n_y=4001):
    """xi(x) = ||Phi||_2^{-1} sup_{0<t<alpha} (j_t * Phi)(x), Phi = sqrt(B) e^{-D|x|}.

    One-dimensional; the t -> 0 limit of the convolution is Phi itself and is
    included in the supremum explicitly.
    """
    if B < 0 or D <= 0 or alpha <= 0:
        raise ValueError("need B >= 0, D > 0, alpha > 0")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if B == 0:
        return np.zeros(xs.size)
    if y_max is None:
        y_max = np.abs(xs).max() + 12.0 * np.sqrt(alpha) + 12.0 / D
    y = np.linspace(-y_max, y_max, n_y)
    wy = np.full(n_y, y[1] - y[0])
    wy[[0, -1]] *= 0.5
    phi = np.sqrt(B) * np.exp(-D * np.abs(y))
    norm_phi = np.sqrt(B / D)  # ||Phi||_2 of the exponential profile
    out = np.sqrt(B) * np.exp(-D * np.abs(xs))
    for t in np.geomspace(1e-4 * alpha, alpha, n_t):
        conv = j_t(xs[:, None] - y[None, :], t, d=1) @ (wy * phi)
        out = np.maximum(out, conv)
    return out / norm_phi


def perturbed_bound_check(V: ConfiningPotential, alpha, B, D, box=14.0, n=1400):
    """Max of |e^{alpha(Delta - V - K)}(x, y)| minus its bound over a 1D grid.

    K is the rank-one integral operator with kernel Phi(x)Phi(y),
    Phi = sqrt(B) e^{-D|x|}; the bound is

        e^{alpha(Delta - V)}(x, y) + (e^{alpha ||Phi||^2} - 1) xi(x) xi(y).

    A negative return value means the bound dominates everywhere tested.
    """
    _check_nonneg(V, box)
    grid = np.linspace(-box, box, n)
    h = grid[1] - grid[0]
    lam0, psi0 = _fd_modes(V(grid), h)
    kern_free = (psi0 * np.exp(-alpha * lam0)) @ psi0.T
    phi = np.sqrt(B) * np.exp(-D * np.abs(grid))
    mat = np.diag(2.0 / h**2 + V(grid))
    mat += np.diag(np.full(n - 1, -1.0 / h**2), 1)
    mat += np.diag(np.full(n - 1, -1.0 / h**2), -1)
    mat += np.outer(phi, phi) * h
    lam, psi = np.linalg.eigh(mat)
    psi = psi / np.sqrt(h)
    kern_pert = (psi * np.exp(-alpha * lam)) @ psi.T
    xi = xi_alpha(grid, alpha, B, D)
    amp = np.exp(alpha * B / D) - 1.0 if B > 0 else 0.0
    bound = kern_free + amp * np.outer(xi, xi)
    return float(np.max(np.abs(kern_pert) - bound))
