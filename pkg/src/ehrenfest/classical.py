"""Classical side of the quantum-to-classical reduction.

Hamiltonian flows on the cylinder, Lagrangian patches with transport
weights, shell (Liouville) averages, quasi-periodic torus predictions,
the transversal-limit density, the periodic-orbit stable-manifold model,
and log-space decay fits.

Phase-space points are (x, xi) pairs; all quadratures are deterministic
for a fixed node count.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (CapabilityError, ConfigurationError,
                     InsufficientDataError, SingularShellError)
from .symbols import TWO_PI, Symbol, fourier_coefficients

_ENDPOINT_TOL = 1e-12


class LagrangianPatch:
    """A one-dimensional Lagrangian patch (Lambda, |rho0|^2).

    ``chart`` selects the parametrization: ``"position"`` embeds the angle
    parameter u as (u, phi'(u)); ``"action"`` embeds the action parameter u
    as (phi'(u), u).  Either way the embedded set is the graph of a gradient,
    hence Lagrangian by construction -- a structural guarantee, not a runtime
    check.  The amplitude must vanish at interval-chart endpoints; a position
    chart spanning the full circle has no boundary and carries no such
    constraint.
    """

    def __init__(self, chart, domain, phase, amplitude, name=""):
        if chart not in ("position", "action"):
            raise ConfigurationError(f"unknown chart kind {chart!r}")
        lo, hi = float(domain[0]), float(domain[1])
        if not hi > lo:
            raise ConfigurationError("empty parameter domain")
        self.chart = chart
        self.domain = (lo, hi)
        self.phase = phase
        self.amplitude = amplitude
        self.name = name or f"patch-{chart}"
        self.periodic = chart == "position" and abs((hi - lo) - TWO_PI) < 1e-9
        if not self.periodic:
            for endpoint in self.domain:
                if abs(amplitude(endpoint)) > _ENDPOINT_TOL:
                    raise ConfigurationError(
                        f"amplitude does not vanish at endpoint u={endpoint!r} "
                        f"(|rho0|={abs(amplitude(endpoint)):.2e})")

    def phase_derivative(self, u):
        if isinstance(self.phase, Symbol):
            gx, _ = self.phase.grad((u, np.zeros_like(np.asarray(u, dtype=float))))
            return np.real(gx)
        return np.asarray(self.phase(u), dtype=float)

    def phase_value(self, u):
        if isinstance(self.phase, Symbol):
            return np.real(self.phase.eval_complex(
                (u, np.zeros_like(np.asarray(u, dtype=float)))))
        raise CapabilityError("patch phase given as derivative callable only")

    def embed(self, u):
        """Map parameter values to phase-space points (x, xi)."""
        u = np.asarray(u, dtype=float)
        dphi = self.phase_derivative(u)
        if self.chart == "position":
            return u, dphi
        return dphi, u

    def quadrature(self, nodes):
        """Quadrature nodes and weights on the parameter domain.

        Trapezoidal for the periodic chart, Gauss-Legendre otherwise.
        """
        if nodes < 16:
            raise ConfigurationError("need at least 16 quadrature nodes")
        lo, hi = self.domain
        if self.periodic:
            u = lo + (hi - lo) * np.arange(nodes) / nodes
            w = np.full(nodes, (hi - lo) / nodes)
        else:
            t, wt = np.polynomial.legendre.leggauss(nodes)
            u = 0.5 * (hi + lo) + 0.5 * (hi - lo) * t
            w = 0.5 * (hi - lo) * wt
        return u, w


class HamiltonianFlow:
    """Flow of a separable Hamiltonian H = xi^2/2 + V(x).

    ``scheme="exact-rotor"`` integrates H = xi^2/2 in closed form;
    ``scheme="verlet"`` is Stoermer-Verlet (kick-drift-kick) with step dt,
    with a reduced final step when t is not an exact multiple of dt.
    """

    def __init__(self, hamiltonian, scheme="verlet", dt=1e-3):
        if scheme not in ("exact-rotor", "verlet"):
            raise ConfigurationError(f"unknown integrator scheme {scheme!r}")
        if dt <= 0:
            raise ConfigurationError("dt must be positive")
        self.hamiltonian = hamiltonian
        self.scheme = scheme
        self.dt = float(dt)
        if scheme == "verlet":
            self._v, self._dv = _split_potential(hamiltonian)

    def frequency(self, action):
        """Frequency map omega(I) = dH0/dI of the angle-averaged Hamiltonian."""
        h = self.hamiltonian
        if h.kind != "fourier" or h._coeff_derivs is None:
            raise CapabilityError("frequency map needs a fourier Hamiltonian")
        return np.real(np.asarray(h._coeff_derivs[0](action), dtype=complex))

    def energy(self, point):
        return np.real(self.hamiltonian.eval_complex(point))

    def evolve(self, point, t):
        """Approximate flow of the point (or arrays of points) for time t."""
        x = np.asarray(point[0], dtype=float)
        xi = np.asarray(point[1], dtype=float)
        t = float(t)
        if self.scheme == "exact-rotor":
            return np.mod(x + t * xi, TWO_PI), xi + 0.0
        sign = 1.0 if t >= 0 else -1.0
        remaining = abs(t)
        nsteps = int(np.floor(remaining / self.dt + 1e-12))
        x, xi = x + 0.0, xi + 0.0
        for _ in range(nsteps):
            x, xi = self._verlet_step(x, xi, sign * self.dt)
        tail = remaining - nsteps * self.dt
        if tail > 1e-12 * max(1.0, abs(t)):
            x, xi = self._verlet_step(x, xi, sign * tail)
        return x, xi

    def _verlet_step(self, x, xi, dt):
        xi_half = xi - 0.5 * dt * self._dv(x)
        x_new = x + dt * xi_half
        xi_new = xi_half - 0.5 * dt * self._dv(x_new)
        return x_new, xi_new


def _split_potential(hamiltonian):
    """Extract (V, V') from a fourier Hamiltonian of the form xi^2/2 + V(x)."""
    if hamiltonian.kind != "fourier":
        raise CapabilityError(
            "Stoermer-Verlet needs a fourier Hamiltonian xi^2/2 + V(x)")
    coeffs = hamiltonian._coeffs
    c0 = coeffs[0]
    probe = np.array([0.5, 1.0, 2.0])
    kinetic = np.asarray(c0(probe), dtype=complex) - complex(np.asarray(c0(0.0), dtype=complex))
    if np.max(np.abs(kinetic - 0.5 * probe**2)) > 1e-10:
        raise CapabilityError("Hamiltonian kinetic part is not xi^2/2")
    vmodes = {m: complex(np.asarray(c(0.0), dtype=complex))
              for m, c in coeffs.items()}

    def v(x, modes=vmodes):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=complex)
        for m, cm in modes.items():
            out = out + cm * np.exp(1j * m * x)
        return out.real

    def dv(x, modes=vmodes):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=complex)
        for m, cm in modes.items():
            out = out + 1j * m * cm * np.exp(1j * m * x)
        return out.real

    return v, dv


@dataclass(frozen=True)
class StableManifoldModel:
    """Model flow on the stable manifold of a periodic orbit.

    Coordinates (r, y) on [0, period) x R^{d-1}; the flow advances r and
    contracts y: Phi^t(r, y) = (r + t mod period, e^{-rate*t} y).
    """

    period: float
    rate: float

    def __post_init__(self):
        if self.period <= 0 or self.rate <= 0:
            raise ConfigurationError("period and rate must be positive")

    def flow(self, r, y, t):
        return np.mod(np.asarray(r, dtype=float) + t, self.period), \
            np.exp(-self.rate * t) * np.asarray(y, dtype=float)


# -- transport and averages ---------------------------------------------------

def mass_density(patch, nodes=1024):
    """Transport weight u -> |rho0(u)|^2 and its total mass."""
    amp = patch.amplitude

    def density(u):
        return np.abs(np.asarray(amp(u), dtype=complex)) ** 2

    u, w = patch.quadrature(nodes)
    total = float(np.sum(w * density(u)))
    return density, total


def mass_coefficients(patch, cutoff, nodes=None):
    """Fourier table mu_m = integral e^{-i m u} |rho0(u)|^2 du on the patch.

    These are the state-density coefficients entering the quasi-periodic
    torus prediction: the prediction pairs mode m of the observable with
    mu_{-m}.
    """
    if nodes is None:
        nodes = max(256, 8 * cutoff + 16)
    u, w = patch.quadrature(nodes)
    dens = np.abs(np.asarray(patch.amplitude(u), dtype=complex)) ** 2
    return {m: complex(np.sum(w * dens * np.exp(-1j * m * u)))
            for m in range(-cutoff, cutoff + 1)}


def suggested_nodes(patch, observable, flow, t, base=64):
    """Node count keeping the oscillatory transport integrand resolved.

    Scales linearly with |t| via the sampled stretching rate of the evolved
    angle along the patch (Nyquist margin ~4x the top active mode).
    """
    if observable.kind == "fourier":
        m_max = max(abs(m) for m in observable._coeffs)
    else:
        m_max = 4
    m_max = max(1, m_max)
    u = np.linspace(patch.domain[0], patch.domain[1], 257)
    x0, xi0 = patch.embed(u)
    xt, _ = flow.evolve((x0, xi0), t)
    xt = np.unwrap(np.asarray(xt, dtype=float))
    stretch = np.max(np.abs(np.diff(xt) / np.diff(u)))
    width = patch.domain[1] - patch.domain[0]
    return int(max(base, np.ceil(4 * m_max * (1.0 + stretch) * width / np.pi)))


def transport_integral(patch, observable, flow, t, nodes=None):
    """Transport pairing: integral of a(Phi^t(embed(u))) |rho0(u)|^2 du."""
    if observable.dim != 1:
        raise ConfigurationError(
            f"observable {observable.name!r} has dimension {observable.dim}, "
            "flow transport needs dimension 1")
    if nodes is None:
        nodes = suggested_nodes(patch, observable, flow, t)
    u, w = patch.quadrature(nodes)
    x0, xi0 = patch.embed(u)
    xt, xit = flow.evolve((x0, xi0), t)
    vals = observable.eval_complex((xt, xit))
    dens = np.abs(np.asarray(patch.amplitude(u), dtype=complex)) ** 2
    return complex(np.sum(w * vals * dens))


def torus_prediction(action, observable, mass_coeffs, omega, t, cutoff):
    """Quasi-periodic prediction sum_m a_m(I) mu_{-m} e^{i m omega(I) t}."""
    freq = float(omega(action)) if callable(omega) else float(omega)
    table = fourier_coefficients(observable, cutoff, action)
    total = 0.0 + 0.0j
    for m in range(-cutoff, cutoff + 1):
        mu = mass_coeffs.get(-m)
        if mu is None:
            continue
        total += table[m] * mu * np.exp(1j * m * freq * t)
    return complex(total)


def transversal_limit(patch, observable, nodes=256, angle_nodes=512):
    """Limit density pairing for an action-chart patch.

    Integrates the angle-average (m = 0 Fourier coefficient) of the
    observable against |rho0(I)|^2 over the action window.
    """
    if patch.chart != "action":
        raise ConfigurationError("transversal limit needs an action-chart patch")
    u, w = patch.quadrature(nodes)
    x = TWO_PI * np.arange(angle_nodes) / angle_nodes
    xx, uu = np.meshgrid(x, u)
    mean_angle = np.mean(observable.eval_complex((xx, uu)), axis=1)
    dens = np.abs(np.asarray(patch.amplitude(u), dtype=complex)) ** 2
    value = np.sum(w * mean_angle * dens)
    return float(value.real) if observable.real else complex(value)


def liouville_average(hamiltonian, energy, observable, samples=2048):
    """Normalized Liouville (shell) average of the observable at the energy.

    Separable H = xi^2/2 + V(x) only.  Rotation shells (E > max V) are
    averaged through the time parametrization dt = dx/|xi| on each of the two
    momentum branches; libration shells use the Gauss-Chebyshev substitution
    around the turning points, which is the same time parametrization without
    evaluating 1/|grad H| near the turning points.  Components are combined
    weighted by their measure (their period).
    """
    v, dv = _split_potential(hamiltonian)
    x = TWO_PI * np.arange(4096) / 4096
    vx = v(x)
    vmax, vmin = float(np.max(vx)), float(np.min(vx))
    energy = float(energy)

    if energy <= vmin:
        raise SingularShellError(f"empty shell: E={energy} <= min V={vmin}")

    def xi_of(xs):
        return np.sqrt(np.maximum(2.0 * (energy - v(xs)), 0.0))

    if energy > vmax:
        xs = TWO_PI * np.arange(samples) / samples
        xi = xi_of(xs)
        grad_norm = np.sqrt(dv(xs) ** 2 + xi ** 2)
        if np.min(grad_norm) < 1e-6:
            raise SingularShellError(
                f"|grad H| = {np.min(grad_norm):.2e} below threshold on shell")
        weight = 1.0 / xi
        period = np.sum(weight)
        up = np.sum(np.real(observable.eval_complex((xs, xi))) * weight)
        down = np.sum(np.real(observable.eval_complex((xs, -xi))) * weight)
        # two rotation components of equal measure
        return float((up + down) / (2.0 * period))

    # libration: locate the two turning points V(x) = E on the circle
    diff = vx - energy
    crossings = []
    for j in range(4096):
        a, b = diff[j], diff[(j + 1) % 4096]
        if a == 0.0:
            crossings.append(x[j])
        elif a * b < 0:
            lo, hi = x[j], x[j] + TWO_PI / 4096
            crossings.append(brentq(lambda s: v(s) - energy, lo, hi, xtol=1e-14))
    if len(crossings) != 2:
        raise CapabilityError(
            f"shell at E={energy} has {len(crossings)} turning points; "
            "only single-well librations are supported")
    # order so that V < E on (x_lo, x_hi)
    x_lo, x_hi = crossings
    mid = 0.5 * (x_lo + x_hi)
    if v(mid) > energy:
        x_lo, x_hi = x_hi, x_lo + TWO_PI
        mid = 0.5 * (x_lo + x_hi)
    if min(abs(float(dv(x_lo))), abs(float(dv(x_hi % TWO_PI)))) < 1e-6:
        raise SingularShellError("turning point too close to a critical point")
    half = 0.5 * (x_hi - x_lo)
    theta = np.pi * (np.arange(samples) + 0.5) / samples
    xs = mid + half * np.cos(theta)
    # smooth factor h = sqrt((x_hi - x)(x - x_lo) / (2(E - V)))
    h = np.sqrt((x_hi - xs) * (xs - x_lo) / (2.0 * (energy - v(xs))))
    xi = xi_of(xs)
    up = np.real(observable.eval_complex((np.mod(xs, TWO_PI), xi)))
    down = np.real(observable.eval_complex((np.mod(xs, TWO_PI), -xi)))
    return float(np.sum((up + down) * h) / (2.0 * np.sum(h)))


# -- stable-manifold model ----------------------------------------------------

def _as_chart_callable(observable):
    if isinstance(observable, Symbol):
        return lambda r, y: observable.eval_complex((r, y))
    return lambda r, y: np.asarray(observable(r, y), dtype=complex)


def stable_manifold_transport(model, observable, density, t,
                              y_halfwidth, r_nodes=256, y_nodes=96):
    """Direct 2D quadrature of the model transport integral at time t."""
    a = _as_chart_callable(observable)
    r = model.period * np.arange(r_nodes) / r_nodes
    ty, wy = np.polynomial.legendre.leggauss(y_nodes)
    y = y_halfwidth * ty
    wy = y_halfwidth * wy
    rr, yy = np.meshgrid(r, y, indexing="ij")
    rt, yt = model.flow(rr, yy, t)
    vals = a(rt, yt) * np.asarray(density(rr, yy), dtype=complex)
    wr = model.period / r_nodes
    return complex(np.sum(vals * wy[None, :]) * wr)


@dataclass
class StableSeries:
    """Per-orbit Fourier reconstruction sum_k b_k e^{2 pi i k t / period}."""

    period: float
    coefficients: dict

    def value(self, t):
        omega = TWO_PI / self.period
        return complex(sum(b * np.exp(1j * k * omega * t)
                           for k, b in self.coefficients.items()))


def stable_manifold_series(model, observable, density, cutoff,
                           y_halfwidth, r_nodes=None, y_nodes=96):
    """Per-orbit coefficients b_k = a_k * sigma_k of the model correlator.

    a_k are the orbit Fourier coefficients of a(r, 0); sigma_k integrates the
    density over the transverse coordinate and takes the e^{+2 pi i k r / T}
    moment in r.  The reconstructed series is the t -> infinity skeleton of
    the direct transport; their difference decays like e^{-rate * t}.
    """
    a = _as_chart_callable(observable)
    if r_nodes is None:
        r_nodes = max(256, 8 * cutoff + 16)
    T = model.period
    r = T * np.arange(r_nodes) / r_nodes
    orbit_vals = a(r, np.zeros_like(r))
    a_k = {k: complex(np.mean(orbit_vals * np.exp(-2j * np.pi * k * r / T)))
           for k in range(-cutoff, cutoff + 1)}

    ty, wy = np.polynomial.legendre.leggauss(y_nodes)
    y = y_halfwidth * ty
    wy = y_halfwidth * wy
    rr, yy = np.meshgrid(r, y, indexing="ij")
    dens = np.asarray(density(rr, yy), dtype=complex)
    transverse = dens @ wy  # integral over y at each r
    wr = T / r_nodes
    sigma_k = {k: complex(np.sum(transverse * np.exp(2j * np.pi * k * r / T)) * wr)
               for k in range(-cutoff, cutoff + 1)}

    b = {k: a_k[k] * sigma_k[k] for k in range(-cutoff, cutoff + 1)}
    return StableSeries(period=T, coefficients=b)


# -- decay fitting ------------------------------------------------------------

@dataclass
class DecayFit:
    """Least-squares fit of |v| ~ amplitude * e^{-rate t} or t^{-rate}."""

    model: str
    rate: float
    amplitude: float
    max_log_residual: float
    rms_log_residual: float
    n_used: int


def decay_fit(times, values, model="exponential", floor=1e-13):
    """Fit a decay law in log coordinates.

    Values with |v| <= floor are treated as converged-to-limit and dropped;
    at least 5 usable points are required.
    """
    if model not in ("exponential", "power"):
        raise ValueError(f"unknown decay model {model!r}")
    t = np.asarray(times, dtype=float)
    v = np.abs(np.asarray(values, dtype=complex))
    keep = v > floor
    if model == "power":
        keep &= t > 0
    t, v = t[keep], v[keep]
    if t.size < 5:
        raise InsufficientDataError(
            f"only {t.size} usable points above floor {floor:g}; need 5")
    logs = np.log(v)
    abscissa = t if model == "exponential" else np.log(t)
    slope, intercept = np.polyfit(abscissa, logs, 1)
    resid = logs - (slope * abscissa + intercept)
    return DecayFit(model=model, rate=float(-slope),
                    amplitude=float(np.exp(intercept)),
                    max_log_residual=float(np.max(np.abs(resid))),
                    rms_log_residual=float(np.sqrt(np.mean(resid ** 2))),
                    n_used=int(t.size))
