"""Doubly periodic grids and Fourier-coefficient fields.

Coefficients follow ``f(x) = sum_k c_k exp(i k.x)``, i.e.
``c = fft2(f) / n**2``.  With this normalization the discrete convolution of
coefficient arrays is exactly the coefficient array of the pointwise
product, so bilinear and paradifferential sums carry no extra constants.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAGIC = b"CWF1"


class AliasingError(RuntimeError):
    """Raised when a product would wrap onto retained modes."""


@dataclass(frozen=True)
class Grid2D:
    """Square periodic grid with ``n`` points per side and period ``L``."""

    n: int
    L: float

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two and at least 8")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def dk(self):
        """Spacing of the frequency lattice."""
        return 2 * np.pi / self.L

    @property
    def dx(self):
        return self.L / self.n

    @cached_property
    def index(self):
        """Integer mode indices ``(j1, j2)`` in numpy FFT order."""
        j = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        return np.meshgrid(j, j, indexing="ij")

    @cached_property
    def k(self):
        """Frequency vectors, shape ``(2, n, n)``."""
        j1, j2 = self.index
        return np.stack([j1 * self.dk, j2 * self.dk])

    @cached_property
    def kabs(self):
        return np.hypot(self.k[0], self.k[1])

    @cached_property
    def x(self):
        """Centred physical coordinates in ``[-L/2, L/2)``, shape ``(2, n, n)``."""
        j = np.arange(self.n)
        c = np.where(j < self.n // 2, j, j - self.n) * self.dx
        return np.stack(np.meshgrid(c, c, indexing="ij"))

    @cached_property
    def xabs(self):
        """Distance to the origin on the torus (minimum image)."""
        return np.hypot(self.x[0], self.x[1])

    @property
    def kmin(self):
        return self.dk

    @property
    def kmax(self):
        """Largest retained frequency along an axis."""
        return (self.n // 2 - 1) * self.dk

    def band_mask(self, fraction):
        """Modes with ``|j_i| < fraction * n / 2`` along both axes."""
        j1, j2 = self.index
        lim = fraction * self.n / 2
        return (np.abs(j1) < lim) & (np.abs(j2) < lim)

    def dealias_mask(self, rule="2/3"):
        """Retention mask for the 2/3 rule (quadratic) or 1/2 rule (cubic)."""
        frac = {"2/3": 2.0 / 3.0, "1/2": 0.5, "none": 1.0}[rule]
        if rule == "none":
            j1, j2 = self.index
            return (np.abs(j1) < self.n // 2) & (np.abs(j2) < self.n // 2)
        return self.band_mask(frac)


class GridField:
    """Fourier coefficients of a (possibly complex) field on a :class:`Grid2D`.

    Instances are treated as immutable values: every operation returns a
    new field.
    """

    __slots__ = ("grid", "coeffs", "real")

    def __init__(self, grid, coeffs, real=False):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (grid.n, grid.n):
            raise ValueError("coefficient array does not match grid")
        self.grid = grid
        self.coeffs = coeffs
        self.real = bool(real)
        if self.real and not is_hermitian(coeffs):
            raise ValueError("real field requires Hermitian-symmetric coefficients")

    # constructors
    @classmethod
    def from_physical(cls, grid, values, real=None):
        values = np.asarray(values)
        if real is None:
            real = not np.iscomplexobj(values)
        c = np.fft.fft2(values) / grid.n**2
        if real:
            c = hermitian_part(c)
        return cls(grid, c, real)

    @classmethod
    def zeros(cls, grid, real=True):
        return cls(grid, np.zeros((grid.n, grid.n), complex), real)

    @classmethod
    def from_function(cls, grid, func, real=None):
        """Sample ``func(x1, x2)`` at the centred physical points."""
        return cls.from_physical(grid, func(grid.x[0], grid.x[1]), real)

    # views
    def physical(self):
        v = np.fft.ifft2(self.coeffs) * self.grid.n**2
        return v.real if self.real else v

    def norm(self):
        """Continuum L2 norm over one period."""
        return float(self.grid.L * np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def norm_physical(self):
        v = self.physical()
        return float(np.sqrt(np.sum(np.abs(v) ** 2)) * self.grid.dx)

    def sup(self):
        return float(np.max(np.abs(self.physical())))

    def mean(self):
        return self.coeffs[0, 0]

    def inner(self, other):
        """Continuum inner product ``int f conj(g)``."""
        return complex(self.grid.L**2 * np.sum(self.coeffs * np.conj(other.coeffs)))

    # algebra
    def _wrap(self, c, real=None):
        if real is None:
            real = self.real
        if real:
            c = hermitian_part(c)
        return GridField(self.grid, c, real)

    def __add__(self, other):
        if isinstance(other, GridField):
            return GridField(self.grid, self.coeffs + other.coeffs, self.real and other.real)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, GridField):
            return GridField(self.grid, self.coeffs - other.coeffs, self.real and other.real)
        return NotImplemented

    def __neg__(self):
        return GridField(self.grid, -self.coeffs, self.real)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            real = self.real and np.isreal(scalar)
            return GridField(self.grid, self.coeffs * scalar, real)
        return NotImplemented

    __rmul__ = __mul__

    def multiply(self, symbol, real=None):
        """Apply a Fourier multiplier given as an ``(n, n)`` array."""
        c = self.coeffs * symbol
        if real is None:
            real = self.real and np.all(np.isreal(symbol)) and is_hermitian(c)
        return self._wrap(c, real)

    def conj(self):
        c = np.conj(self.coeffs)
        flipped = np.roll(c[::-1, ::-1], 1, axis=(0, 1))
        return GridField(self.grid, flipped, self.real)

    def real_part(self):
        return GridField(self.grid, hermitian_part(self.coeffs), True)

    def copy(self):
        return GridField(self.grid, self.coeffs.copy(), self.real)

    def __repr__(self):
        return f"GridField(n={self.grid.n}, L={self.grid.L}, real={self.real})"


def reflect(c):
    """Coefficient array of ``f(-x)``."""
    return np.roll(c[::-1, ::-1], 1, axis=(0, 1))


def hermitian_part(c):
    """Coefficients of the real part of the field with coefficients ``c``."""
    return 0.5 * (c + np.conj(reflect(c)))


def is_hermitian(c, rtol=1e-12):
    scale = np.max(np.abs(c)) if c.size else 0.0
    return np.max(np.abs(c - np.conj(reflect(c))), initial=0.0) <= rtol * max(scale, 1e-300)


# ------------------------------------------------------------- file format

def write_field(path_or_file, field):
    """Write a field in the CWF1 binary format.

    Layout: magic ``b"CWF1"``, ``u32 n``, ``f64 L``, ``u8`` reality flag,
    then ``n*n`` little-endian ``f64`` pairs ``(re, im)`` of the
    coefficients in row-major (numpy FFT) order.
    """
    g = field.grid
    header = MAGIC + struct.pack("<IdB", g.n, g.L, 1 if field.real else 0)
    body = np.empty((g.n, g.n, 2), dtype="<f8")
    body[..., 0] = field.coeffs.real
    body[..., 1] = field.coeffs.imag
    data = header + body.tobytes(order="C")
    if hasattr(path_or_file, "write"):
        path_or_file.write(data)
    else:
        with open(path_or_file, "wb") as fh:
            fh.write(data)


def read_field(path_or_file):
    """Read one CWF1 field; see :func:`write_field`."""
    if hasattr(path_or_file, "read"):
        return _read_stream(path_or_file)
    with open(path_or_file, "rb") as fh:
        return _read_stream(fh)


def _read_stream(fh):
    head = fh.read(4 + 4 + 8 + 1)
    if len(head) < 17 or head[:4] != MAGIC:
        raise ValueError("not a CWF1 field")
    n, L, flag = struct.unpack("<IdB", head[4:])
    raw = fh.read(16 * n * n)
    if len(raw) != 16 * n * n:
        raise ValueError("truncated CWF1 field")
    arr = np.frombuffer(raw, dtype="<f8").reshape(n, n, 2)
    grid = Grid2D(int(n), float(L))
    c = arr[..., 0] + 1j * arr[..., 1]
    return GridField(grid, c, bool(flag) and is_hermitian(c, 1e-12))
