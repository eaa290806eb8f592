"""Grid Hilbert space, Lagrangian-state synthesis, Weyl operators, propagation.

The spatial domain is the circle of circumference 2*pi sampled at N nodes
(N a power of two); the induced momentum lattice is xi_k = hbar*k with
integer k in [-N/2, N/2).  Momentum amplitudes c_k are plane-wave
coefficients, psi_j = sum_k c_k e^{i k x_j}, so the round-trip transform is
exact to round-off and Parseval reads ||psi||^2 = 2*pi * sum |c_k|^2.

Weyl quantization of an angle-Fourier symbol sum_m e^{imx} g_m(xi) is the
mode-sum operator sum_m [multiply by e^{imx}] o [momentum multiplier
g_m(xi + hbar*m/2)]: the half-shift is the exact symmetric ordering, not an
O(hbar) approximation.  The dense oracle evaluates the same kernel integral
independently, as momentum-lattice midpoint matrix elements
<k2| Op[a] |k1> = c_{k2-k1}(hbar*(k1+k2)/2) with the coefficient functions
computed by angle quadrature of the symbol itself.
"""

import warnings

import numpy as np

from .errors import (CapabilityError, ConfigurationError, StabilityWarning,
                     WindingError)
from .symbols import TWO_PI, Symbol

_DENSE_MAX_N = 1024


class Grid:
    """Periodic spatial grid with an attached Planck constant."""

    def __init__(self, n, hbar):
        n = int(n)
        if n < 64 or n > 8192 or (n & (n - 1)) != 0:
            raise ConfigurationError(
                f"grid size must be a power of two in [64, 8192], got {n}")
        if hbar <= 0:
            raise ConfigurationError("hbar must be positive")
        self.n = n
        self.hbar = float(hbar)
        self.dx = TWO_PI / n
        self.x = self.dx * np.arange(n)
        self.k = np.fft.fftfreq(n, d=1.0 / n)  # integers in fft order
        self.xi = self.hbar * self.k

    def __eq__(self, other):
        return (isinstance(other, Grid) and other.n == self.n
                and other.hbar == self.hbar)

    def __repr__(self):
        return f"Grid(n={self.n}, hbar={self.hbar!r})"

    def to_momentum(self, values):
        """Plane-wave coefficients c_k (fft ordering) of nodal values."""
        return np.fft.fft(values) / self.n

    def to_position(self, coeffs):
        return np.fft.ifft(coeffs) * self.n


class WaveFunction:
    """Complex amplitudes on a grid; treated as an immutable value."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n,):
            raise ConfigurationError(
                f"wavefunction shape {values.shape} does not match grid n={grid.n}")
        self.grid = grid
        self.values = values

    def norm2(self):
        """Squared L^2 norm, dx * sum |psi_j|^2."""
        return float(self.grid.dx * np.sum(np.abs(self.values) ** 2))

    def inner(self, other):
        """Hermitian inner product <self, other> = dx * sum conj(self) other."""
        if self.grid != other.grid:
            raise ConfigurationError("wavefunctions live on different grids")
        return complex(self.grid.dx * np.vdot(self.values, other.values))

    def momentum_amplitudes(self):
        return self.grid.to_momentum(self.values)


def _phase_callable(phase):
    if isinstance(phase, Symbol):
        return lambda x: np.real(phase.eval_complex(
            (x, np.zeros_like(np.asarray(x, dtype=float)))))
    return lambda x: np.asarray(phase(x), dtype=float)


def synthesize_state(grid, phase, amplitude):
    """Position-space Lagrangian state psi_j = rho0(x_j) e^{i phi(x_j)/hbar}.

    Requires e^{i phi/hbar} to be single-valued on the circle:
    phi(2*pi) - phi(0) must be an integer multiple of 2*pi*hbar (defect
    tolerance 1e-9).  No normalization is applied; the mass is carried by
    rho0.
    """
    phi = _phase_callable(phase)
    delta = float(phi(TWO_PI) - phi(0.0))
    winding = delta / (TWO_PI * grid.hbar)
    defect = abs(delta - TWO_PI * grid.hbar * np.round(winding))
    if defect > 1e-9:
        raise WindingError(defect, grid.hbar)
    values = np.asarray(amplitude(grid.x), dtype=complex) \
        * np.exp(1j * phi(grid.x) / grid.hbar)
    return WaveFunction(grid, values)


def synthesize_momentum_state(grid, phase, amplitude):
    """Momentum-space Lagrangian state for action-chart patches.

    Coefficients c_k = sqrt(hbar/2*pi) rho0(xi_k) e^{i theta(xi_k)/hbar}
    put the state on the graph {(theta'(I), I)}; the prefactor makes
    ||psi||^2 the Riemann sum of |rho0|^2 over the action window.
    """
    theta = _phase_callable(phase)
    coeffs = np.sqrt(grid.hbar / TWO_PI) \
        * np.asarray(amplitude(grid.xi), dtype=complex) \
        * np.exp(1j * theta(grid.xi) / grid.hbar)
    return WaveFunction(grid, grid.to_position(coeffs))


class WeylOperator:
    """Action of Op[a]: x-diagonal, momentum-diagonal, mode-sum or dense."""

    def __init__(self, grid, form, data, hermitian=False, name=""):
        if form not in ("x", "p", "modes", "dense"):
            raise ConfigurationError(f"unknown operator form {form!r}")
        self.grid = grid
        self.form = form
        self.data = data
        self.hermitian = hermitian
        self.name = name

    def apply(self, wf):
        if wf.grid != self.grid:
            raise ConfigurationError("operator and state grids differ")
        g = self.grid
        psi = wf.values
        if self.form == "x":
            out = self.data * psi
        elif self.form == "p":
            out = g.to_position(self.data * g.to_momentum(psi))
        elif self.form == "modes":
            coeffs = g.to_momentum(psi)
            out = np.zeros(g.n, dtype=complex)
            for m, gm in self.data.items():
                out += np.exp(1j * m * g.x) * g.to_position(gm * coeffs)
        else:  # dense momentum-space matrix
            out = g.to_position(self.data @ g.to_momentum(psi))
        return WaveFunction(g, out)

    def __call__(self, wf):
        return self.apply(wf)


def weyl_quantize(symbol, grid, form="auto"):
    """Quantize a symbol on the grid.

    Angle-Fourier symbols become mode-sum operators with the exact half-shift
    multipliers g_m(xi + hbar*m/2); pure-x and pure-xi symbols become
    diagonal multiplications.  Closed-form symbols that are neither require
    the dense build (form="dense", n <= 1024).
    """
    if symbol.dim != 1:
        raise CapabilityError("only cylinder symbols can be quantized here")
    if form == "dense":
        matrix = dense_weyl_matrix(symbol, grid)
        return WeylOperator(grid, "dense", matrix, hermitian=symbol.real,
                            name=symbol.name)
    if symbol.kind == "fourier":
        if symbol.xi_only:
            data = np.asarray(symbol._coeffs[0](grid.xi), dtype=complex)
            return WeylOperator(grid, "p", data, hermitian=symbol.real,
                                name=symbol.name)
        if symbol.x_only:
            data = symbol.eval_complex((grid.x, np.zeros(grid.n)))
            if symbol.real:
                data = data.real.astype(complex)
            return WeylOperator(grid, "x", data, hermitian=symbol.real,
                                name=symbol.name)
        modes = {}
        half_n = grid.n // 2
        k_int = grid.k.astype(int)
        for m, c in symbol._coeffs.items():
            if abs(m) > half_n:
                raise CapabilityError(
                    f"mode {m} outside the lattice band |m| <= {half_n}")
            gm = np.asarray(c(grid.xi + 0.5 * grid.hbar * m), dtype=complex)
            # zero transitions that would wrap past the lattice edge; this keeps
            # the operator exactly banded (and exactly hermitian for real a)
            target = k_int + m
            gm = np.where((target >= -half_n) & (target < half_n), gm, 0.0)
            modes[m] = gm
        return WeylOperator(grid, "modes", modes, hermitian=symbol.real,
                            name=symbol.name)
    if symbol.x_only:
        data = symbol.eval_complex((grid.x, np.zeros(grid.n)))
        if symbol.real:
            data = data.real.astype(complex)
        return WeylOperator(grid, "x", data, hermitian=symbol.real,
                            name=symbol.name)
    if symbol.xi_only:
        data = symbol.eval_complex((np.zeros(grid.n), grid.xi))
        if symbol.real:
            data = data.real.astype(complex)
        return WeylOperator(grid, "p", data, hermitian=symbol.real,
                            name=symbol.name)
    raise CapabilityError(
        f"closed-form symbol {symbol.name!r} mixes x and xi; "
        "request the dense build explicitly")


def dense_weyl_matrix(symbol, grid, angle_nodes=None):
    """Dense momentum-space Weyl matrix, the slow-path oracle.

    Matrix elements <k2|Op[a]|k1> = c_{k2-k1}(hbar*(k1+k2)/2), with the
    angle-coefficient functions c_m computed by trapezoidal quadrature of the
    symbol's own pointwise evaluation -- independent of any stored mode data.
    """
    n = grid.n
    if n > _DENSE_MAX_N:
        raise CapabilityError(f"dense build capped at n={_DENSE_MAX_N}")
    if angle_nodes is None:
        angle_nodes = max(1024, 2 * n)
    x = TWO_PI * np.arange(angle_nodes) / angle_nodes
    # distinct half-sums hbar*(k1+k2)/2 for k in [-n/2, n/2)
    sums = np.arange(-n, n - 1)  # k1 + k2
    xi_half = 0.5 * grid.hbar * sums
    xx, ss = np.meshgrid(x, xi_half, indexing="ij")
    vals = symbol.eval_complex((xx, ss))
    spectrum = np.fft.fft(vals, axis=0) / angle_nodes  # c_m(xi_half) rows m
    kvec = grid.k.astype(int)
    k1 = kvec[None, :]
    k2 = kvec[:, None]
    m_idx = np.mod(k2 - k1, angle_nodes)
    s_idx = (k2 + k1) + n  # index into sums
    return spectrum[m_idx, s_idx]


def expectation(wf, op):
    """<psi, Op psi>; real up to round-off for hermitian operators."""
    return wf.inner(op.apply(wf))


def split_step_propagate(wf, potential, t, dt):
    """Strang-split propagation under H = xi^2/2 + V(x).

    One step is e^{-iV dt/2hbar} e^{-i xi^2 dt/2hbar} e^{-iV dt/2hbar};
    consecutive half-potential factors are merged, which is the same operator
    product.  A reduced final step covers t that is not an exact multiple of
    dt.  Violating the phase-resolution rule (max|V| dt/hbar <= 0.5,
    max xi^2 dt/(2hbar) <= pi/4) emits a StabilityWarning; the run proceeds.
    """
    g = wf.grid
    t = float(t)
    if t == 0.0:
        return WaveFunction(g, wf.values.copy())
    if t < 0:
        raise ConfigurationError("backward split-step propagation not supported")
    v = np.asarray(potential(g.x) if callable(potential) else potential,
                   dtype=float)
    if v.shape != (g.n,):
        raise ConfigurationError("potential values do not match the grid")
    vmax = float(np.max(np.abs(v)))
    ximax2 = float(np.max(g.xi ** 2))
    if vmax * dt / g.hbar > 0.5 or ximax2 * dt / (2.0 * g.hbar) > np.pi / 4.0:
        warnings.warn(
            f"split-step resolution rule violated (max|V|dt/hbar="
            f"{vmax * dt / g.hbar:.3g}, max xi^2 dt/2hbar="
            f"{ximax2 * dt / (2 * g.hbar):.3g})", StabilityWarning)

    nsteps = int(np.floor(t / dt + 1e-12))
    tail = t - nsteps * dt
    if tail < 1e-12 * max(1.0, t):
        tail = 0.0

    psi = wf.values.copy()
    for step_dt, reps in ((dt, nsteps), (tail, 1 if tail else 0)):
        if reps == 0:
            continue
        half_v = np.exp(-0.5j * v * step_dt / g.hbar)
        kinetic = np.exp(-0.5j * (g.xi ** 2) * step_dt / g.hbar)
        psi = half_v * psi
        for rep in range(reps):
            psi = g.to_position(kinetic * g.to_momentum(psi))
            if rep < reps - 1:
                psi = (half_v * half_v) * psi
        psi = half_v * psi
    return WaveFunction(g, psi)


def random_wavefunction(grid, rng):
    """Normalized random state; used by hermiticity and unitarity checks."""
    values = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    wf = WaveFunction(grid, values)
    return WaveFunction(grid, wf.values / np.sqrt(wf.norm2()))
