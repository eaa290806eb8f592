"""Phase-space symbols: evaluation, analytic gradients, angle-Fourier data.

A symbol is a function a(x, xi) on the cylinder (angle x, momentum xi) or,
for the torus catalog entries, a function of z = (z1, z2) on the unit torus.
Two representations are supported:

* ``function``: a closed-form callable, optionally with a closed-form
  gradient callable.  No finite differencing is ever performed here; a
  symbol without a gradient callable simply cannot be differentiated.
* ``fourier``: an angle-Fourier sum a(x, xi) = sum_m c_m(xi) e^{imx} with
  coefficient callables c_m, differentiated termwise.

The angle period is fixed to 2*pi; momenta/actions are unconstrained reals.
Higher-order symbol terms are fixed to zero throughout: everything here is
principal-symbol calculus.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, DomainError

TWO_PI = 2.0 * np.pi


class Symbol:
    """A phase-space function with exact evaluation and analytic gradient.

    Immutable after construction; safe for unsynchronized concurrent reads.
    """

    def __init__(self, name, kind, dim=1, real=False, periodic=True,
                 func=None, grad=None, coeffs=None, coeff_derivs=None,
                 domain=None, x_only=False, xi_only=False, torus_modes=None):
        self.name = name
        self.kind = kind
        self.dim = dim
        self.real = real
        self.periodic = periodic
        self._func = func
        self._grad = grad
        self._coeffs = dict(coeffs) if coeffs else None
        self._coeff_derivs = dict(coeff_derivs) if coeff_derivs else None
        self.domain = dict(domain) if domain else {}
        self.x_only = x_only
        self.xi_only = xi_only
        # integer mode table {(m1, m2): coeff} for torus characters / trig polys
        self.torus_modes = dict(torus_modes) if torus_modes else None
        if kind not in ("function", "fourier"):
            raise ValueError(f"unknown symbol kind {kind!r}")
        if kind == "fourier" and not self._coeffs:
            raise ValueError("fourier symbol needs coefficient callables")
        if kind == "function" and self._func is None:
            raise ValueError("function symbol needs a callable")

    def __repr__(self):
        return f"Symbol({self.name!r}, kind={self.kind!r}, dim={self.dim})"

    # -- evaluation ---------------------------------------------------------

    def _check_domain(self, point):
        names = ("x", "xi") if self.dim == 1 else ("z1", "z2")
        for coord, value in zip(names, point):
            bounds = self.domain.get(coord)
            if bounds is None:
                continue
            v = np.asarray(value)
            if np.any(v < bounds[0]) or np.any(v > bounds[1]):
                bad = v if v.ndim == 0 else v[(v < bounds[0]) | (v > bounds[1])][0]
                raise DomainError(coord, float(bad), bounds)

    def eval_complex(self, point):
        """Evaluate at point=(x, xi), keeping any round-off imaginary part."""
        self._check_domain(point)
        if self.kind == "function":
            return np.asarray(self._func(*point), dtype=complex)
        x, xi = point
        x = np.asarray(x, dtype=float)
        total = np.zeros(np.broadcast(x, np.asarray(xi)).shape, dtype=complex)
        for m, c in self._coeffs.items():
            total = total + np.asarray(c(xi), dtype=complex) * np.exp(1j * m * x)
        return total

    def eval(self, point):
        """Evaluate at point; real part only when the symbol is flagged real."""
        value = self.eval_complex(point)
        if self.real:
            value = value.real
        if value.ndim == 0:
            return complex(value) if not self.real else float(value)
        return value

    # -- gradient -----------------------------------------------------------

    def grad(self, point):
        """Analytic gradient (d/dx, d/dxi) at the given point."""
        self._check_domain(point)
        if self.kind == "function":
            if self._grad is None:
                raise CapabilityError(
                    f"symbol {self.name!r} has no gradient callable"
                )
            gx, gxi = self._grad(*point)
            return np.asarray(gx, dtype=complex), np.asarray(gxi, dtype=complex)
        if self._coeff_derivs is None:
            raise CapabilityError(
                f"fourier symbol {self.name!r} has no coefficient derivatives"
            )
        x, xi = point
        x = np.asarray(x, dtype=float)
        shape = np.broadcast(x, np.asarray(xi)).shape
        gx = np.zeros(shape, dtype=complex)
        gxi = np.zeros(shape, dtype=complex)
        for m, c in self._coeffs.items():
            phase = np.exp(1j * m * x)
            gx = gx + 1j * m * np.asarray(c(xi), dtype=complex) * phase
            gxi = gxi + np.asarray(self._coeff_derivs[m](xi), dtype=complex) * phase
        if self.real:
            gx, gxi = gx.real.astype(complex), gxi.real.astype(complex)
        return gx, gxi


@dataclass
class FourierTable:
    """Angle-Fourier coefficients of a symbol at a fixed action value."""

    coeffs: dict
    cutoff: int
    action: float
    tail_mass: float = 0.0

    def __getitem__(self, m):
        return self.coeffs[m]

    def items(self):
        return self.coeffs.items()


def fourier_coefficients(symbol, cutoff, action=0.0):
    """Angle-Fourier coefficients {m: c_m(action)} for |m| <= cutoff.

    Trapezoidal quadrature on 8*cutoff + 16 equispaced nodes, which is exact
    (to accumulation round-off) for trigonometric polynomials of degree up to
    cutoff.  The tail-mass estimate sums |c_m| over the outermost two rings,
    cutoff-1 <= |m| <= cutoff.
    """
    if symbol.dim != 1 or not symbol.periodic:
        raise CapabilityError(
            f"symbol {symbol.name!r} is not 2*pi-periodic in the angle"
        )
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    n = 8 * cutoff + 16
    x = TWO_PI * np.arange(n) / n
    vals = symbol.eval_complex((x, np.full(n, float(action))))
    spectrum = np.fft.fft(vals) / n  # spectrum[k] = mean(vals * e^{-2 pi i k j / n})
    coeffs = {m: complex(spectrum[m % n]) for m in range(-cutoff, cutoff + 1)}
    tail = sum(abs(coeffs[m]) for m in coeffs
               if cutoff - 1 <= abs(m) <= cutoff and cutoff > 0)
    return FourierTable(coeffs=coeffs, cutoff=cutoff, action=float(action),
                        tail_mass=float(tail))


# -- catalog ----------------------------------------------------------------

def _const(value):
    return lambda xi: value * np.ones_like(np.asarray(xi, dtype=float))


def _zero(xi):
    return np.zeros_like(np.asarray(xi, dtype=float))


def catalog(name, **params):
    """Built-in symbols, addressed by name plus numeric parameters.

    Names: constant, cos, xi, cos-xi, cos-xi2, rotor-H, pendulum-H,
    plane(slope), sine-phase(slope, warp), character(m, n).
    No expression parsing happens anywhere; these are the only symbols an
    experiment configuration can name.
    """
    if name == "constant":
        value = float(params.pop("value", 1.0))
        sym = Symbol("constant", "fourier", real=True, x_only=True,
                     coeffs={0: _const(value)}, coeff_derivs={0: _zero})
    elif name == "cos":
        sym = Symbol("cos", "fourier", real=True, x_only=True,
                     coeffs={1: _const(0.5), -1: _const(0.5)},
                     coeff_derivs={1: _zero, -1: _zero})
    elif name == "xi":
        sym = Symbol("xi", "fourier", real=True, xi_only=True,
                     coeffs={0: lambda xi: np.asarray(xi, dtype=float)},
                     coeff_derivs={0: _const(1.0)})
    elif name == "cos-xi":
        half = lambda xi: 0.5 * np.asarray(xi, dtype=float)
        sym = Symbol("cos-xi", "fourier", real=True,
                     coeffs={1: half, -1: half},
                     coeff_derivs={1: _const(0.5), -1: _const(0.5)})
    elif name == "cos-xi2":
        halfsq = lambda xi: 0.5 * np.asarray(xi, dtype=float) ** 2
        dhalfsq = lambda xi: np.asarray(xi, dtype=float)
        sym = Symbol("cos-xi2", "fourier", real=True,
                     coeffs={1: halfsq, -1: halfsq},
                     coeff_derivs={1: dhalfsq, -1: dhalfsq})
    elif name == "rotor-H":
        sym = Symbol("rotor-H", "fourier", real=True, xi_only=True,
                     coeffs={0: lambda xi: 0.5 * np.asarray(xi, dtype=float) ** 2},
                     coeff_derivs={0: lambda xi: np.asarray(xi, dtype=float)})
    elif name == "pendulum-H":
        sym = Symbol("pendulum-H", "fourier", real=True,
                     coeffs={0: lambda xi: 0.5 * np.asarray(xi, dtype=float) ** 2,
                             1: _const(0.5), -1: _const(0.5)},
                     coeff_derivs={0: lambda xi: np.asarray(xi, dtype=float),
                                   1: _zero, -1: _zero})
    elif name == "plane":
        slope = float(params.pop("slope", params.pop("I0", 1.0)))
        sym = Symbol(f"plane({slope:g})", "function", real=True, periodic=False,
                     func=lambda x, xi: slope * np.asarray(x, dtype=float),
                     grad=lambda x, xi: (slope * np.ones_like(np.asarray(x, dtype=float)),
                                         np.zeros_like(np.asarray(x, dtype=float))))
    elif name == "sine-phase":
        slope = float(params.pop("slope", params.pop("I0", 1.0)))
        warp = float(params.pop("warp", 0.5))
        sym = Symbol(
            f"sine-phase({slope:g},{warp:g})", "function", real=True,
            periodic=False,
            func=lambda x, xi: slope * np.asarray(x, dtype=float)
            + warp * np.sin(np.asarray(x, dtype=float)),
            grad=lambda x, xi: (slope + warp * np.cos(np.asarray(x, dtype=float)),
                                np.zeros_like(np.asarray(x, dtype=float))))
    elif name == "character":
        m = int(params.pop("m", 1))
        n = int(params.pop("n", 0))
        two_pi_i = 2j * np.pi
        sym = Symbol(
            f"character({m},{n})", "function", dim=2, real=False,
            func=lambda z1, z2: np.exp(two_pi_i * (m * np.asarray(z1, dtype=float)
                                                   + n * np.asarray(z2, dtype=float))),
            grad=lambda z1, z2: (
                two_pi_i * m * np.exp(two_pi_i * (m * np.asarray(z1, dtype=float) + n * z2)),
                two_pi_i * n * np.exp(two_pi_i * (m * np.asarray(z1, dtype=float) + n * z2))),
            torus_modes={(m, n): 1.0})
    else:
        raise KeyError(f"unknown catalog symbol {name!r}")
    if params:
        raise ValueError(f"unused parameters for {name!r}: {sorted(params)}")
    return sym


CATALOG_NAMES = ("constant", "cos", "xi", "cos-xi", "cos-xi2",
                 "rotor-H", "pendulum-H", "plane", "sine-phase", "character")


def _poly_pair(coefs):
    """Polynomial in xi and its derivative from low-to-high coefficients."""
    coefs = np.asarray(coefs, dtype=complex)
    dcoefs = coefs[1:] * np.arange(1, len(coefs))

    def f(xi, c=coefs):
        return np.polyval(c[::-1], np.asarray(xi, dtype=float))

    def df(xi, c=dcoefs):
        if len(c) == 0:
            return np.zeros_like(np.asarray(xi, dtype=float), dtype=complex)
        return np.polyval(c[::-1], np.asarray(xi, dtype=float))

    return f, df


def random_fourier_symbol(rng, max_mode=3, max_degree=2, real=True, scale=1.0):
    """Draw a band-limited symbol with polynomial-in-xi mode coefficients.

    Used by hermiticity / linearity / dense-oracle checks; with ``real`` the
    coefficients are conjugate-symmetric, c_{-m} = conj(c_m).
    """
    coeffs = {}
    derivs = {}
    for m in range(0, max_mode + 1):
        c = (rng.standard_normal(max_degree + 1)
             + 1j * rng.standard_normal(max_degree + 1)) * scale
        if m == 0 and real:
            c = c.real.astype(complex)
        f, df = _poly_pair(c)
        coeffs[m], derivs[m] = f, df
        if m > 0:
            if real:
                cm = np.conj(c)
            else:
                cm = (rng.standard_normal(max_degree + 1)
                      + 1j * rng.standard_normal(max_degree + 1)) * scale
            fm, dfm = _poly_pair(cm)
            coeffs[-m], derivs[-m] = fm, dfm
    return Symbol("random-fourier", "fourier", real=real,
                  coeffs=coeffs, coeff_derivs=derivs)


# -- amplitude profiles -------------------------------------------------------

def amplitude(name, **params):
    """Built-in amplitude profiles for patches and states.

    Names: uniform, one-plus-cos, gaussian(center, width),
    bump(center, halfwidth) [C-infinity, exact compact support],
    cos2(center, halfwidth) [cos^2 window, C^1 at the edges].
    """
    if name == "uniform":
        value = float(params.pop("value", 1.0))
        f = lambda u: value * np.ones_like(np.asarray(u, dtype=float))
    elif name == "one-plus-cos":
        f = lambda u: 1.0 + np.cos(np.asarray(u, dtype=float))
    elif name == "gaussian":
        c = float(params.pop("center", 0.0))
        w = float(params.pop("width", 1.0))
        f = lambda u: np.exp(-((np.asarray(u, dtype=float) - c) ** 2) / (2.0 * w * w))
    elif name == "bump":
        c = float(params.pop("center", 0.0))
        h = float(params.pop("halfwidth", 1.0))

        def f(u, c=c, h=h):
            s = (np.asarray(u, dtype=float) - c) / h
            out = np.zeros_like(s)
            inside = np.abs(s) < 1.0
            si = s[inside] if s.ndim else (s if abs(s) < 1 else None)
            if s.ndim == 0:
                return float(np.exp(1.0 - 1.0 / (1.0 - s * s))) if abs(s) < 1 else 0.0
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
            return out
    elif name == "cos2":
        c = float(params.pop("center", 0.0))
        h = float(params.pop("halfwidth", 1.0))

        def f(u, c=c, h=h):
            s = (np.asarray(u, dtype=float) - c) / h
            out = np.where(np.abs(s) < 1.0, np.cos(0.5 * np.pi * s) ** 2, 0.0)
            return float(out) if out.ndim == 0 else out
    elif name == "tilted-gaussian":
        # complex amplitude: gaussian modulus with an x-dependent phase twist.
        # |rho|^2 equals the plain gaussian, but the twist breaks the
        # conjugation symmetry that would otherwise kill the O(hbar) term in
        # static Weyl pairings.
        c = float(params.pop("center", 0.0))
        w = float(params.pop("width", 1.0))
        tilt = float(params.pop("tilt", 0.5))

        def f(u, c=c, w=w, tilt=tilt):
            u = np.asarray(u, dtype=float)
            return np.exp(-((u - c) ** 2) / (2.0 * w * w)
                          + 1j * tilt * np.sin(u - c))
    else:
        raise KeyError(f"unknown amplitude profile {name!r}")
    if params:
        raise ValueError(f"unused parameters for {name!r}: {sorted(params)}")
    return f


AMPLITUDE_NAMES = ("uniform", "one-plus-cos", "gaussian", "bump", "cos2")
