"""Periodic grid functions, Zakharov-Shabat potentials and their symmetry transforms.

Every function lives on the circle R/Z and is stored by its samples at the
uniform grid ``x_j = j / (2N)``, ``j = 0, ..., 2N-1``.  Fourier coefficients
with indices ``-N, ..., N-1`` are derived on demand.  Products are formed on a
zero-padded grid so that quadratic and cubic terms of band-limited inputs are
free of aliasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = [
    "GridFunction",
    "Potential",
    "make_trig",
    "derivative",
    "multiply",
    "integrate",
    "antiderivative",
    "miura",
    "mean",
    "transform",
    "diagonal",
    "random_trig",
    "potential_from_json",
    "potential_to_json",
    "load_potential",
    "CLASS_TAGS",
]

CLASS_TAGS = ("generic", "H_r", "H_i", "E_r", "E_i", "diagonal")

# samples closer than this (absolute) count as equal when detecting reality classes
CLASS_TOL = 1e-10
DEFAULT_MODES = 64


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A complex 1-periodic function sampled on ``2 * n_modes`` equispaced points."""

    values: np.ndarray
    real: bool = field(default=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 1 or v.size < 2 or v.size % 2:
            raise ValueError("GridFunction needs an even number (>= 2) of samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.real and np.max(np.abs(v.imag), initial=0.0) > 1e-12:
            raise ValueError("function tagged real has non-real samples")

    @property
    def n_modes(self) -> int:
        return self.values.size // 2

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.size) / self.size

    # -- Fourier side -------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs, real=False) -> "GridFunction":
        """Build from coefficients ordered ``-N, ..., N-1``."""
        c = np.asarray(coeffs, dtype=complex)
        vals = np.fft.ifft(np.fft.ifftshift(c)) * c.size
        if real:
            vals = vals.real
        return cls(vals, real=real)

    @classmethod
    def zeros(cls, n_modes=DEFAULT_MODES) -> "GridFunction":
        return cls(np.zeros(2 * n_modes), real=True)

    @classmethod
    def constant(cls, c, n_modes=DEFAULT_MODES) -> "GridFunction":
        return cls(np.full(2 * n_modes, c, dtype=complex), real=np.imag(c) == 0)

    def coeffs(self) -> np.ndarray:
        """Fourier coefficients ``c_k``, ``k = -N, ..., N-1``."""
        return np.fft.fftshift(np.fft.fft(self.values)) / self.size

    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.size, 1.0 / self.size)

    def _padded_spectrum(self, m: int) -> np.ndarray:
        # unnormalised spectrum of length m (m >= size); the Nyquist mode is split
        n = self.size
        half = n // 2
        f = np.fft.fft(self.values) / n
        out = np.zeros(m, dtype=complex)
        out[:half] = f[:half]
        out[m - half + 1:] = f[half + 1:]
        if m > n:
            out[half] += 0.5 * f[half]
            out[m - half] += 0.5 * f[half]
        else:
            out[half] = f[half]
        return out

    def resample(self, m: int) -> np.ndarray:
        """Values at ``j / m`` for ``j = 0..m-1`` by trigonometric interpolation."""
        if m < self.size:
            raise ValueError("resample only refines the grid")
        vals = np.fft.ifft(self._padded_spectrum(m)) * m
        return vals.real if self.real else vals

    def evaluate(self, x) -> np.ndarray:
        """Trigonometric interpolant at arbitrary points."""
        x = np.asarray(x, dtype=float)
        c = self.coeffs()
        k = np.arange(-self.n_modes, self.n_modes)
        # split the Nyquist coefficient symmetrically so real data stay real
        nyq = c[0]
        c = c.copy()
        c[0] = 0.5 * nyq
        phase = np.exp(2j * np.pi * np.multiply.outer(x, k))
        vals = phase @ c + 0.5 * nyq * np.exp(2j * np.pi * self.n_modes * x)
        return vals.real if self.real else vals

    def refine(self, n_modes: int) -> "GridFunction":
        """Same function on a grid with ``n_modes`` >= current modes."""
        if n_modes == self.n_modes:
            return self
        return GridFunction(self.resample(2 * n_modes), real=self.real)

    def truncate(self, n_modes: int) -> "GridFunction":
        """Project onto modes ``|k| < n_modes`` on a grid of size ``2 n_modes``."""
        if n_modes > self.n_modes:
            return self.refine(n_modes)
        f = np.fft.fft(self.values) / self.size
        out = np.zeros(2 * n_modes, dtype=complex)
        out[:n_modes] = f[:n_modes]
        out[n_modes + 1:] = f[self.size - n_modes + 1:]
        vals = np.fft.ifft(out) * out.size
        return GridFunction(vals.real if self.real else vals, real=self.real)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.size != self.size:
                raise ValueError("grid size mismatch")
            return other.values, other.real
        return other, np.isrealobj(other) or np.imag(other) == 0

    def __add__(self, other):
        v, r = self._coerce(other)
        return GridFunction(self.values + v, real=self.real and r)

    __radd__ = __add__

    def __sub__(self, other):
        v, r = self._coerce(other)
        return GridFunction(self.values - v, real=self.real and r)

    def __rsub__(self, other):
        v, r = self._coerce(other)
        return GridFunction(v - self.values, real=self.real and r)

    def __neg__(self):
        return GridFunction(-self.values, real=self.real)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return multiply(self, other)
        return GridFunction(self.values * other, real=self.real and np.imag(other) == 0)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return GridFunction(self.values / scalar, real=self.real and np.imag(scalar) == 0)

    def __pow__(self, p: int):
        if not isinstance(p, int) or p < 1:
            raise ValueError("only positive integer powers")
        return multiply(*([self] * p))

    def conj(self) -> "GridFunction":
        return GridFunction(self.values.conj(), real=self.real)

    @property
    def re(self) -> "GridFunction":
        return GridFunction(self.values.real, real=True)

    @property
    def im(self) -> "GridFunction":
        return GridFunction(self.values.imag, real=True)

    def norm(self) -> float:
        """Max-norm over the grid samples (the "grid norm")."""
        return float(np.max(np.abs(self.values)))

    def l2(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def allclose(self, other, atol=1e-12) -> bool:
        return bool(np.max(np.abs(self.values - other.values)) <= atol)

    def is_real(self, atol=CLASS_TOL) -> bool:
        return bool(np.max(np.abs(self.values.imag)) <= atol)

    def as_real(self) -> "GridFunction":
        if not self.is_real():
            raise ValueError("function is not real-valued")
        return GridFunction(self.values.real, real=True)

    def __repr__(self):
        tag = ", real" if self.real else ""
        return f"GridFunction(n_modes={self.n_modes}{tag})"


def make_trig(coeff_table: Mapping[int, complex], n_modes: int = DEFAULT_MODES) -> GridFunction:
    """Samples of ``sum_k c_k exp(2 pi i k x)``.

    Harmonics must satisfy ``|k| < n_modes``.  The result is tagged real when the
    table is conjugate symmetric.
    """
    c = np.zeros(2 * n_modes, dtype=complex)
    for k, ck in coeff_table.items():
        k = int(k)
        if abs(k) >= n_modes:
            raise ValueError(f"harmonic {k} out of range for n_modes={n_modes}")
        c[k + n_modes] += ck
    sym = np.allclose(c[1:], np.conj(c[1:][::-1]), atol=0, rtol=0) and c[0] == 0
    vals = np.fft.ifft(np.fft.ifftshift(c)) * c.size
    if sym:
        return GridFunction(vals.real, real=True)
    return GridFunction(vals)


def derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """Spectral derivative: Fourier multiplier ``(2 pi i k)^order``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    if order == 0:
        return f
    k = f.wavenumbers()
    mult = (2j * np.pi * k) ** order
    if order % 2 == 1:
        # the Nyquist mode has no consistent odd derivative
        mult[f.size // 2] = 0.0
    vals = np.fft.ifft(np.fft.fft(f.values) * mult)
    return GridFunction(vals.real if f.real else vals, real=f.real)


def multiply(*factors: GridFunction) -> GridFunction:
    """Pointwise product computed alias-free on a zero-padded grid.

    ``p`` factors with modes ``|k| < N`` are multiplied on a grid of at least
    ``(p + 1) N`` points and truncated back to ``N`` modes.
    """
    if not factors:
        raise ValueError("need at least one factor")
    n = factors[0].n_modes
    if any(f.n_modes != n for f in factors):
        raise ValueError("grid size mismatch")
    if len(factors) == 1:
        return factors[0]
    p = len(factors)
    m = (p + 1) * n
    m += m % 2
    prod = np.ones(m, dtype=complex)
    for f in factors:
        prod = prod * (np.fft.ifft(f._padded_spectrum(m)) * m)
    real = all(f.real for f in factors)
    big = GridFunction(prod.real if real else prod, real=real)
    return big.truncate(n)


def integrate(f: GridFunction) -> complex:
    """Exact integral over one period of a band-limited function."""
    return complex(np.mean(f.values))


def mean(u: GridFunction) -> complex:
    """The mean ``[u]``, i.e. the zeroth Fourier coefficient."""
    return integrate(u)


def antiderivative(f: GridFunction) -> np.ndarray:
    """Samples of ``int_0^x f(y) dy`` on the grid.

    The mean part integrates to the linear term ``[f] x``; the oscillating part
    is integrated in Fourier space.
    """
    n = f.size
    fh = np.fft.fft(f.values) / n
    c0 = fh[0]
    k = f.wavenumbers()
    gh = np.zeros_like(fh)
    nz = k != 0
    gh[nz] = fh[nz] / (2j * np.pi * k[nz])
    gh[n // 2] = 0.0
    g = np.fft.ifft(gh) * n
    out = c0 * f.grid + (g - g[0])
    return out.real if f.real else out


def miura(u: GridFunction) -> GridFunction:
    """The Miura map ``u -> u_x + u^2`` (product alias-free)."""
    return derivative(u, 1) + multiply(u, u)


def random_trig(rng: np.random.Generator, degree=3, sup=1.0, mean_range=0.4,
                n_modes=DEFAULT_MODES, real=True) -> GridFunction:
    """Random trigonometric polynomial of given degree with sup-norm at most ``sup``."""
    table = {}
    c0 = rng.uniform(-mean_range, mean_range)
    for k in range(1, degree + 1):
        ck = (rng.normal() + 1j * rng.normal()) / k
        table[k] = ck
        table[-k] = np.conj(ck) if real else (rng.normal() + 1j * rng.normal()) / k
    osc = make_trig(table, n_modes)
    fine = np.max(np.abs(osc.resample(16 * osc.size)))
    room = sup - abs(c0)
    scale = rng.uniform(0.3, 1.0) * room / fine
    out = osc * scale + c0
    if real:
        return out.as_real()
    return out


# -- potentials -------------------------------------------------------------


def _classify(minus: GridFunction, plus: GridFunction, tol=CLASS_TOL) -> str:
    a, b = minus.values, plus.values
    if np.max(np.abs(a - b)) <= tol:
        if np.max(np.abs(a.imag)) <= tol:
            return "E_r"
        if np.max(np.abs(a.real)) <= tol:
            return "E_i"
        return "diagonal"
    if np.max(np.abs(b - a.conj())) <= tol:
        return "H_r"
    if np.max(np.abs(b + a.conj())) <= tol:
        return "H_i"
    return "generic"


@dataclass(frozen=True, eq=False)
class Potential:
    """A Zakharov-Shabat potential ``phi = (phi_minus, phi_plus)``."""

    minus: GridFunction
    plus: GridFunction
    class_tag: str = field(init=False)

    def __post_init__(self):
        if self.minus.size != self.plus.size:
            raise ValueError("components live on different grids")
        object.__setattr__(self, "class_tag", _classify(self.minus, self.plus))

    @property
    def n_modes(self) -> int:
        return self.minus.n_modes

    @property
    def is_real_type(self) -> bool:
        """True on the real subspace ``phi_plus = conj(phi_minus)`` (includes real diagonal)."""
        return self.class_tag in ("H_r", "E_r")

    @property
    def is_diagonal(self) -> bool:
        return self.class_tag in ("E_r", "E_i", "diagonal")

    def components(self):
        return self.minus, self.plus

    def __add__(self, other: "Potential") -> "Potential":
        return Potential(self.minus + other.minus, self.plus + other.plus)

    def __sub__(self, other: "Potential") -> "Potential":
        return Potential(self.minus - other.minus, self.plus - other.plus)

    def __mul__(self, s) -> "Potential":
        return Potential(self.minus * s, self.plus * s)

    __rmul__ = __mul__

    def norm(self) -> float:
        return max(self.minus.norm(), self.plus.norm())

    def allclose(self, other: "Potential", atol=1e-12) -> bool:
        return self.minus.allclose(other.minus, atol) and self.plus.allclose(other.plus, atol)

    def __repr__(self):
        return f"Potential(n_modes={self.n_modes}, class_tag={self.class_tag!r})"


def diagonal(u: GridFunction) -> Potential:
    """The diagonal embedding ``u -> (u, u)``."""
    return Potential(u, u)


def _reflect(f: GridFunction) -> GridFunction:
    # f(1 - x_j) = f(x_{2N - j}): an index reversal on the grid
    return GridFunction(np.roll(f.values[::-1], 1), real=f.real)


def transform(phi: Potential, g) -> Potential:
    """Apply ``P`` (swap), ``T`` (reflection x -> 1 - x) or ``('R', alpha)`` (phase rotation).

    ``g`` is ``"P"``, ``"T"``, ``("R", alpha)`` or a float taken as the angle of ``R``.
    """
    if isinstance(g, str):
        name, alpha = g, None
    elif isinstance(g, tuple):
        name, alpha = g
    else:
        name, alpha = "R", float(g)
    if name == "P":
        return Potential(phi.plus, phi.minus)
    if name == "T":
        return Potential(_reflect(phi.minus), _reflect(phi.plus))
    if name == "R":
        e = np.exp(1j * alpha)
        return Potential(phi.minus * e, phi.plus * np.conj(e))
    raise ValueError(f"unknown transform {g!r}")


def transform_vector(g, a: GridFunction, b: GridFunction):
    """Apply the same transform to a pair of grid functions (e.g. a gradient)."""
    out = transform(Potential(a, b), g)
    return out.minus, out.plus


# -- JSON -------------------------------------------------------------------


def _harmonics_to_fn(spec, n_modes) -> GridFunction:
    table = spec.get("harmonics", spec) if isinstance(spec, dict) else {}
    coeffs = {}
    for k, v in table.items():
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError(f"harmonic {k}: expected [re, im]")
            coeffs[int(k)] = complex(float(v[0]), float(v[1]))
        else:
            coeffs[int(k)] = complex(v)
    return make_trig(coeffs, n_modes)


def potential_from_json(obj) -> Potential:
    """Parse the potential format.

    ``{"n_modes": N, "minus": {"harmonics": {"k": [re, im]}}, "plus": {...}}`` or
    ``{"n_modes": N, "diagonal_of": {"harmonics": {...}}}`` for ``(u, u)``.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    n_modes = int(obj.get("n_modes", DEFAULT_MODES))
    if "diagonal_of" in obj:
        u = _harmonics_to_fn(obj["diagonal_of"], n_modes)
        return diagonal(u)
    if "minus" not in obj or "plus" not in obj:
        raise ValueError("potential JSON needs 'minus' and 'plus' or 'diagonal_of'")
    return Potential(_harmonics_to_fn(obj["minus"], n_modes),
                     _harmonics_to_fn(obj["plus"], n_modes))


def _fn_to_harmonics(f: GridFunction, tol=1e-15) -> dict:
    c = f.coeffs()
    out = {}
    for k, ck in zip(range(-f.n_modes, f.n_modes), c):
        if abs(ck) > tol:
            out[str(k)] = [float(ck.real), float(ck.imag)]
    return {"harmonics": out}


def potential_to_json(phi: Potential) -> dict:
    if phi.is_diagonal:
        return {"n_modes": phi.n_modes, "diagonal_of": _fn_to_harmonics(phi.minus)}
    return {"n_modes": phi.n_modes, "minus": _fn_to_harmonics(phi.minus),
            "plus": _fn_to_harmonics(phi.plus)}


def load_potential(path) -> Potential:
    with open(path) as fh:
        return potential_from_json(json.load(fh))
