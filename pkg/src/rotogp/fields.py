"""Grids, complex fields and spectral operators on a periodic box.

Units are hbar = 2m = 1 throughout: the kinetic operator is -Laplacian and
the rotation gauge field is A(x) = (1/2) Omega ^ x.  The box is centred at
the origin, x_i = -L/2 + i*L/n, and all integrals use midpoint quadrature
(spacing**dim weights), which is spectrally accurate for fields that have
decayed at the boundary.
"""

from dataclasses import dataclass, field

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two objects do not live on the same grid."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L/2, L/2)^dim with n points per axis."""

    dim: int
    n: int
    length: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"n must be even and positive, got {self.n}")
        if self.length <= 0:
            raise ValueError(f"box length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def axis(self) -> np.ndarray:
        """1D coordinate axis, shared by every dimension."""
        return -0.5 * self.length + self.spacing * np.arange(self.n)

    def coords(self):
        """Broadcastable coordinate arrays, one per axis."""
        ax = self.axis
        return [
            ax.reshape((1,) * d + (self.n,) + (1,) * (self.dim - d - 1))
            for d in range(self.dim)
        ]

    @property
    def wavenumbers(self) -> np.ndarray:
        """1D wavenumber axis 2*pi*k/L, k = -n/2 .. n/2-1, fft order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    def kvecs(self):
        """Broadcastable wavenumber arrays, one per axis."""
        k = self.wavenumbers
        return [
            k.reshape((1,) * d + (self.n,) + (1,) * (self.dim - d - 1))
            for d in range(self.dim)
        ]

    def ksq(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for k in self.kvecs():
            out = out + k**2
        return out

    def radius_sq(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for x in self.coords():
            out = out + x**2
        return out


@dataclass
class ComplexField:
    """Complex scalar field sampled on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())

    def normalized(self) -> "ComplexField":
        return ComplexField(self.grid, self.values / norm(self))


@dataclass
class GaugeField:
    """Rotation gauge field A(x) = (1/2) Omega ^ x on a grid.

    omega is always a 3-vector; for a 2D grid it must point along z so the
    in-plane components A = (omega_z/2) * (-y, x) are well defined.
    """

    grid: Grid
    omega: np.ndarray
    components: list = field(init=False)

    def __post_init__(self):
        self.omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        if self.omega.size == 1:
            self.omega = np.array([0.0, 0.0, float(self.omega[0])])
        if self.omega.shape != (3,):
            raise ValueError("omega must be a scalar (z component) or 3-vector")
        if self.grid.dim == 2 and (self.omega[0] != 0 or self.omega[1] != 0):
            raise ValueError("2D grids support rotation about z only")
        x = self.grid.coords()
        wx, wy, wz = self.omega
        if self.grid.dim == 2:
            self.components = [-0.5 * wz * x[1], 0.5 * wz * x[0]]
        else:
            self.components = [
                0.5 * (wy * x[2] - wz * x[1]),
                0.5 * (wz * x[0] - wx * x[2]),
                0.5 * (wx * x[1] - wy * x[0]),
            ]

    def magnitude_sq(self) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        for a in self.components:
            out = out + a**2
        return out


def _check_same_grid(*objs):
    g0 = objs[0].grid
    for o in objs[1:]:
        if o.grid != g0:
            raise GridMismatchError("operands live on different grids")
    return g0


def spectral_transform(f: ComplexField, direction: str = "forward") -> ComplexField:
    """Unitary DFT of a field; inverse(forward(f)) == f to rounding."""
    scale = f.grid.n ** (f.grid.dim / 2.0)
    if direction == "forward":
        return ComplexField(f.grid, np.fft.fftn(f.values) / scale)
    if direction == "inverse":
        return ComplexField(f.grid, np.fft.ifftn(f.values) * scale)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def gradient_arrays(f: ComplexField):
    """Spectral partial derivatives of f, one array per axis."""
    fhat = np.fft.fftn(f.values)
    return [np.fft.ifftn(1j * k * fhat) for k in f.grid.kvecs()]


def laplacian_array(f: ComplexField) -> np.ndarray:
    return np.fft.ifftn(-f.grid.ksq() * np.fft.fftn(f.values))


def apply_gauge_kinetic(phi: ComplexField, A: GaugeField) -> ComplexField:
    """(-i grad + A)^2 phi = -Lap phi - 2i A.grad phi + |A|^2 phi.

    Uses div A = 0, exact for A = (1/2) Omega ^ x.
    """
    _check_same_grid(phi, A)
    grads = gradient_arrays(phi)
    out = laplacian_array(phi) * (-1.0)
    for a, dphi in zip(A.components, grads):
        out = out - 2j * a * dphi
    out = out + A.magnitude_sq() * phi.values
    return ComplexField(phi.grid, out)


def inner(f: ComplexField, g: ComplexField) -> complex:
    """Quadrature inner product <f|g> = spacing^dim sum conj(f) g."""
    grid = _check_same_grid(f, g)
    return grid.spacing**grid.dim * np.vdot(f.values, g.values)


def norm(f: ComplexField) -> float:
    return float(np.sqrt(inner(f, f).real))


def norm4_pow4(f: ComplexField) -> float:
    """The L4 norm to the fourth power, int |f|^4."""
    return float(f.grid.spacing**f.grid.dim * np.sum(np.abs(f.values) ** 4))


def norm_p(f: ComplexField, p: float) -> float:
    """General Lp norm by midpoint quadrature."""
    g = f.grid
    return float((g.spacing**g.dim * np.sum(np.abs(f.values) ** p)) ** (1.0 / p))


def grad_norm_sq(f: ComplexField) -> float:
    """int |grad f|^2 via Parseval."""
    g = f.grid
    fhat = np.fft.fftn(f.values) / g.n**g.dim
    return float(g.length**g.dim * np.sum(g.ksq() * np.abs(fhat) ** 2))


def boundary_decay_ok(f: ComplexField, rel: float = 1e-10) -> bool:
    """True if the field magnitude on the box faces is below rel * max|f|.

    The periodic spectral operators are only trustworthy when this holds.
    """
    mx = np.max(np.abs(f.values))
    if mx == 0:
        return True
    for ax in range(f.grid.dim):
        edge = np.take(f.values, 0, axis=ax)
        if np.max(np.abs(edge)) > rel * mx:
            return False
    return True


def gaussian_field(grid: Grid, width: float = 1.0) -> ComplexField:
    """Normalized isotropic Gaussian exp(-|x|^2 / (2 width^2))."""
    r2 = grid.radius_sq()
    vals = np.exp(-r2 / (2.0 * width**2)).astype(complex)
    return ComplexField(grid, vals).normalized()


def vortex_field(grid: Grid, winding: int = 1, width: float = 1.0) -> ComplexField:
    """Normalized (x + iy)^q Gaussian, a winding-q trial state."""
    x = grid.coords()
    zplane = x[0] + 1j * x[1]
    if winding < 0:
        zplane = np.conj(zplane)
    vals = zplane ** abs(winding) * np.exp(-grid.radius_sq() / (2.0 * width**2))
    return ComplexField(grid, vals).normalized()


# -- binary field dump: float64 (re, im) interleaved, row-major ------------

def write_field(f: ComplexField, path: str, omega=None):
    """Write <path> (raw float64 re/im pairs) and <path>.json sidecar."""
    import json

    flat = np.empty(f.values.size * 2)
    flat[0::2] = f.values.real.ravel()
    flat[1::2] = f.values.imag.ravel()
    flat.astype("<f8").tofile(path)
    side = {
        "dim": f.grid.dim,
        "n": f.grid.n,
        "L": f.grid.length,
        "omega": list(np.atleast_1d(omega if omega is not None else [0.0, 0.0, 0.0]).astype(float)),
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(side, fh, indent=2)


def read_field(path: str):
    """Read a field dump written by write_field; returns (field, omega)."""
    import json

    with open(str(path) + ".json") as fh:
        side = json.load(fh)
    grid = Grid(int(side["dim"]), int(side["n"]), float(side["L"]))
    flat = np.fromfile(path, dtype="<f8")
    vals = (flat[0::2] + 1j * flat[1::2]).reshape(grid.shape)
    return ComplexField(grid, vals), np.asarray(side["omega"])
