"""Hyperbolic toral automorphism and its exact finite quantization.

Classical side: z -> A z mod 1 on [0,1)^2 with A in SL(2, Z), |tr A| > 2,
exact in rational arithmetic on rational points.  Quantum side: the
N-dimensional quantization (hbar = 1/(2 pi N)) with discrete Weyl
translations

    (T_{(n1, n2)} psi)_j = e^{i pi n1 n2 / N} e^{2 pi i n1 j / N} psi_{j + n2}

and a unitary propagator satisfying the exact conjugation identity
U^{-1} T_n U = phase * T_{A n}.  For the default map A = [[2, 1], [1, 1]]
the propagator is the standard normalized quadratic-exponential sum and the
phase is identically 1; general maps are built by factoring the label action
into elementary shears (quadratic-phase diagonals) and Fourier steps, with
the per-label phase extracted numerically.  The conjugation identity itself
is the convention-fixing ground truth, enforced by matrix tests.
"""

import math
from fractions import Fraction

import numpy as np

from .errors import AliasingError, CapabilityError, ConfigurationError

TWO_PI = 2.0 * np.pi


def _as_int_matrix(matrix):
    a = [[int(matrix[0][0]), int(matrix[0][1])],
         [int(matrix[1][0]), int(matrix[1][1])]]
    return a


def _mat_mul(p, q):
    return [[p[0][0] * q[0][0] + p[0][1] * q[1][0],
             p[0][0] * q[0][1] + p[0][1] * q[1][1]],
            [p[1][0] * q[0][0] + p[1][1] * q[1][0],
             p[1][0] * q[0][1] + p[1][1] * q[1][1]]]


def _mat_vec(p, v):
    return (p[0][0] * v[0] + p[0][1] * v[1],
            p[1][0] * v[0] + p[1][1] * v[1])


def _mat_pow(p, t):
    if t < 0:
        # inverse of [[a,b],[c,d]] with det 1 is [[d,-b],[-c,a]]
        inv = [[p[1][1], -p[0][1]], [-p[1][0], p[0][0]]]
        return _mat_pow(inv, -t)
    out = [[1, 0], [0, 1]]
    base = [row[:] for row in p]
    while t:
        if t & 1:
            out = _mat_mul(out, base)
        base = _mat_mul(base, base)
        t >>= 1
    return out


class CatMap:
    """A 2x2 integer hyperbolic toral automorphism."""

    def __init__(self, matrix=((2, 1), (1, 1))):
        self.matrix = _as_int_matrix(matrix)
        a, b = self.matrix[0]
        c, d = self.matrix[1]
        if a * d - b * c != 1:
            raise ConfigurationError("cat map matrix must have determinant 1")
        self.trace = a + d
        if abs(self.trace) <= 2:
            raise ConfigurationError("cat map matrix must satisfy |trace| > 2")
        disc = self.trace * self.trace - 4
        root = math.sqrt(disc)
        self.lam_plus = 0.5 * (abs(self.trace) + root)
        self.lam_minus = 1.0 / self.lam_plus
        self.lyapunov = math.log(self.lam_plus)
        # eigen-directions (1, slope) for A (1, s)^T = lambda (1, s)^T
        lam_p = 0.5 * (self.trace + math.copysign(root, self.trace))
        lam_m = self.trace - lam_p
        if b != 0:
            self.unstable_slope = (lam_p - a) / b
            self.stable_slope = (lam_m - a) / b
        else:
            self.unstable_slope = math.inf
            self.stable_slope = math.inf

    def slope_is_irrational(self):
        """Eigendirection slopes are quadratic irrationals.

        Exact integer check: trace^2 - 4 is never a perfect square for
        |trace| > 2, so sqrt(disc) -- and with it the slope -- is irrational;
        in particular the slope equals no p/q at all, let alone one with
        |p|, |q| <= 1e6.
        """
        disc = self.trace * self.trace - 4
        return math.isqrt(disc) ** 2 != disc

    def step(self, z, steps=1):
        """Apply the map; exact rational arithmetic for rational input."""
        m = _mat_pow(self.matrix, steps)
        z1, z2 = z
        if isinstance(z1, Fraction) or isinstance(z2, Fraction):
            z1, z2 = Fraction(z1), Fraction(z2)
            w = _mat_vec(m, (z1, z2))
            return (w[0] % 1, w[1] % 1)
        w = _mat_vec(m, (float(z1), float(z2)))
        return (w[0] % 1.0, w[1] % 1.0)

    def power(self, t):
        """Exact integer matrix power A^t (t may be negative)."""
        return _mat_pow(self.matrix, t)

    def covector_power(self, t):
        """Exact integer power of the transpose, (A^T)^t."""
        m = self.matrix
        return _mat_pow([[m[0][0], m[1][0]], [m[0][1], m[1][1]]], t)

    def order_mod(self, modulus, cap=100000):
        """Multiplicative order of A modulo the given integer."""
        acc = [[1, 0], [0, 1]]
        for r in range(1, cap + 1):
            acc = [[v % modulus for v in row] for row in _mat_mul(acc, self.matrix)]
            if acc == [[1, 0], [0, 1]]:
                return r
        raise CapabilityError(f"order of A mod {modulus} exceeds cap {cap}")

    def ehrenfest_time(self, n):
        return math.log(n) / self.lyapunov


# -- classical line transport -------------------------------------------------

class TorusLine:
    """Closed rational line {(s, c + alpha*s) mod 1} on the torus.

    For slope alpha = p/q (reduced) the line closes after the parameter s
    runs over [0, q); densities live on that parameter interval.
    """

    def __init__(self, slope=0, offset=0):
        self.slope = Fraction(slope)
        self.offset = Fraction(offset)
        self.period = self.slope.denominator  # 1 for integer slopes

    def frequency(self, cat, mode, t):
        """Exact oscillation frequency q(t) = <(A^T)^t m, (1, alpha)>."""
        mt = _mat_vec(cat.covector_power(t), (int(mode[0]), int(mode[1])))
        return Fraction(mt[0]) + self.slope * mt[1], mt


def line_transport(cat, line, sigma, mode, t, nodes=8192, uniform=False):
    """Transport of a character along the mapped line, reduced exactly.

    For a(z) = e^{2 pi i <m, z>} the integral over the line collapses to the
    Fourier coefficient of sigma at the integer-arithmetic frequency q(t),
    times a constant phase.  With ``uniform=True`` the coefficient is resolved
    exactly: total mass at q = 0, zero otherwise.
    """
    q, mt = line.frequency(cat, mode, t)
    phase = np.exp(2j * np.pi * float(line.offset) * mt[1])
    period = max(1, line.period)
    if uniform:
        if q == 0:
            mass = float(period) if sigma is None else \
                float(np.mean([sigma(s) for s in np.linspace(0, period, 16)])) * period
            return complex(phase * mass)
        return 0.0 + 0.0j
    s = period * np.arange(nodes) / nodes
    vals = np.asarray(sigma(s), dtype=complex)
    kern = np.exp(2j * np.pi * float(q) * s)
    return complex(phase * np.sum(vals * kern) * (period / nodes))


# -- quantization -------------------------------------------------------------

class TorusState:
    """State vector of the N-dimensional torus quantization."""

    def __init__(self, values, momentum_index=None):
        self.values = np.asarray(values, dtype=complex)
        self.n = self.values.shape[0]
        self.momentum_index = momentum_index  # set for pure momentum states

    def norm2(self):
        return float(np.sum(np.abs(self.values) ** 2))


def momentum_state(n, k0=0):
    """Momentum eigenstate: uniform modulus, concentrated on {p = k0/N}."""
    j = np.arange(n)
    return TorusState(np.exp(2j * np.pi * k0 * j / n) / np.sqrt(n),
                      momentum_index=int(k0) % n)


def translation_apply(n_dim, mode, psi):
    """Apply the discrete Weyl translation T_(n1,n2) to a vector."""
    n1, n2 = int(mode[0]), int(mode[1])
    j = np.arange(n_dim)
    phase = np.exp(1j * np.pi * n1 * n2 / n_dim) * np.exp(2j * np.pi * n1 * j / n_dim)
    return phase * np.roll(psi, -n2)  # (T psi)_j = phase_j * psi_{j + n2}


def translation_matrix(n_dim, mode):
    out = np.zeros((n_dim, n_dim), dtype=complex)
    eye = np.eye(n_dim, dtype=complex)
    for col in range(n_dim):
        out[:, col] = translation_apply(n_dim, mode, eye[:, col])
    return out


def _shear_token_dense_apply(c, n_dim, block):
    """Left-multiply by the quadratic-phase diagonal for label [[1, c], [0, 1]].

    The (N+1) factor keeps the phase well defined under j -> j + N for every
    parity of c and N.
    """
    j = np.arange(n_dim)
    diag = np.exp(1j * np.pi * c * (n_dim + 1) * (j * j % (2 * n_dim)) / n_dim)
    return diag[:, None] * block if block.ndim == 2 else diag * block


def _fourier_token_dense_apply(n_dim, block):
    """Left-multiply by the DFT step for label [[0, -1], [1, 0]]."""
    return np.fft.fft(block, axis=0) / np.sqrt(n_dim)


J_LABEL = ((0, -1), (1, 0))


def factor_label_product(matrix):
    """Factor an SL(2, Z) matrix into an ordered product of label maps.

    Returns tokens [t_1, ..., t_r], each ("shear", c) or ("fourier",), whose
    label matrices multiply out (left to right) to the input:
    mat(t_1) @ mat(t_2) @ ... @ mat(t_r) == matrix.
    """
    a = _as_int_matrix(matrix)
    if a[0][0] * a[1][1] - a[0][1] * a[1][0] != 1:
        raise ConfigurationError("can only factor determinant-one matrices")
    # reduce A to the identity by LEFT-multiplying inverse generators;
    # the collected generators, in order, then multiply out to A.
    tokens = []
    work = [row[:] for row in a]

    def left_mul(g):
        nonlocal work
        work = _mat_mul(g, work)

    guard = 0
    while work[1][0] != 0:
        guard += 1
        if guard > 10000:
            raise CapabilityError("factorization did not terminate")
        p, q = work[0][0], work[1][0]
        if abs(p) > abs(q) or (abs(p) == abs(q) and p != 0):
            # kill the upper entry: R_{-k} A has a' = a - k c
            k = round(p / q) if q != 0 else 0
            if k != 0:
                tokens.append(("shear", k))
                left_mul([[1, -k], [0, 1]])
        else:
            # swap rows with J^{-1} = [[0, 1], [-1, 0]]
            tokens.append(("fourier",))
            left_mul([[0, 1], [-1, 0]])
    # now lower-left is 0, so work = [[e, b'], [0, e]] with e = +-1
    e, b = work[0][0], work[0][1]
    if e == 1:
        if b != 0:
            tokens.append(("shear", b))
    else:
        # -I = J^2; -R_{-b} reduction
        if b != 0:
            tokens.append(("shear", -b))
        tokens.append(("fourier",))
        tokens.append(("fourier",))
    return tokens


def token_label_matrix(token):
    if token[0] == "shear":
        return [[1, token[1]], [0, 1]]
    return [list(J_LABEL[0]), list(J_LABEL[1])]


def build_unitary_from_tokens(tokens, n_dim):
    """Dense unitary whose conjugation action realizes the token product.

    Labels compose reversed under operator products, so the operator is
    assembled by applying the tokens' dense factors right-to-left.
    """
    block = np.eye(n_dim, dtype=complex)
    for token in reversed(tokens):
        if token[0] == "shear":
            block = _shear_token_dense_apply(token[1], n_dim, block)
        else:
            block = _fourier_token_dense_apply(n_dim, block)
    return block


class QuantizedCatMap:
    """Unitary propagator on C^N with the exact conjugation property."""

    def __init__(self, cat, n_dim, seed=0):
        if n_dim < 3:
            raise ConfigurationError("need at least N = 3")
        self.cat = cat
        self.n = int(n_dim)
        self.hbar = 1.0 / (TWO_PI * self.n)
        self._phase_cache = {}
        self._rng = np.random.default_rng(np.random.Philox(seed))
        a = cat.matrix
        if a == [[2, 1], [1, 1]]:
            j = np.arange(self.n)
            jj, kk = np.meshgrid(j, j, indexing="ij")
            # quadratic-sum propagator exponent pi (d j^2 - 2 j k + a k^2)/(N b);
            # odd N needs the (N+1) parity factor to stay single-valued under
            # j -> j + N (same classical map, checked by the conjugation test)
            w = 1 if self.n % 2 == 0 else self.n + 1
            quad = np.mod(w * (jj * jj - 2 * jj * kk + 2 * kk * kk), 2 * self.n)
            self.matrix = np.exp(1j * np.pi * quad / self.n) / np.sqrt(self.n)
        else:
            tokens = factor_label_product(a)
            check = [[1, 0], [0, 1]]
            for token in tokens:
                check = _mat_mul(check, token_label_matrix(token))
            if check != a:
                raise CapabilityError("label factorization failed to reproduce A")
            self.matrix = build_unitary_from_tokens(tokens, self.n)
        self.matrix_inv = self.matrix.conj().T

    def propagate(self, state, t):
        psi = state.values.copy()
        op = self.matrix if t >= 0 else self.matrix_inv
        for _ in range(abs(int(t))):
            psi = op @ psi
        return TorusState(psi)

    def egorov_phase(self, mode):
        """Unimodular c(m) with U^{-1} T_m U = c(m) T_{Am}, probe-extracted."""
        key = (int(mode[0]), int(mode[1]))
        if key in self._phase_cache:
            return self._phase_cache[key]
        am = _mat_vec(self.cat.matrix, key)
        for _ in range(8):
            probe = (self._rng.standard_normal(self.n)
                     + 1j * self._rng.standard_normal(self.n))
            probe /= np.linalg.norm(probe)
            ref = translation_apply(self.n, am, probe)
            denom = complex(np.vdot(ref, ref))
            lhs = self.matrix_inv @ translation_apply(self.n, key,
                                                      self.matrix @ probe)
            c = complex(np.vdot(ref, lhs)) / denom
            if abs(abs(c) - 1.0) < 1e-8:
                self._phase_cache[key] = c
                return c
        raise CapabilityError(f"could not extract conjugation phase for {key}")

    def accumulated_phase(self, mode, t):
        """Product of per-step phases along m, Am, ..., A^{t-1} m."""
        c = 1.0 + 0.0j
        label = (int(mode[0]), int(mode[1]))
        for _ in range(int(t)):
            c *= self.egorov_phase(label)
            label = _mat_vec(self.cat.matrix, label)
        return c

    def order(self, cap=2000):
        """Smallest P with U^P proportional to the identity, brute force."""
        acc = np.eye(self.n, dtype=complex)
        for p in range(1, cap + 1):
            acc = self.matrix @ acc
            diag = np.diagonal(acc)
            if np.allclose(acc, np.diag(diag), atol=1e-9) \
                    and np.allclose(diag, diag[0], atol=1e-9):
                return p
        return None


def quantize_map(cat, n_dim, seed=0):
    return QuantizedCatMap(cat, n_dim, seed=seed)


def line_state(cat, n_dim, direction, k0=0, seed=0):
    """Lagrangian state concentrated on the closed line with the given
    integer direction vector (v1, v2), gcd(v1, v2) = 1.

    Built by transporting a momentum state with the quantized SL(2, Z) map
    whose label action has first row (v1, v2): the transported state's
    character expectation <psi, T_m psi> vanishes unless
    v1 m1 + v2 m2 = 0 mod N, which is the discrete statement that the state
    lives on the line.
    """
    v1, v2 = int(direction[0]), int(direction[1])
    g = math.gcd(abs(v1), abs(v2))
    if g != 1:
        raise ConfigurationError("direction vector must be primitive")
    # complete (v1, v2) to [[v1, v2], [s, t]] with determinant 1
    gg, tt, ss = _extended_gcd(v1, -v2)
    # v1*tt + (-v2)*ss = 1  =>  v1*tt - v2*ss = 1: row2 = (ss, tt)
    label = [[v1, v2], [ss, tt]]
    if label[0][0] * label[1][1] - label[0][1] * label[1][0] != 1:
        raise ConfigurationError("failed to complete direction to SL(2, Z)")
    tokens = factor_label_product(label)
    psi = momentum_state(n_dim, k0).values
    for token in reversed(tokens):
        if token[0] == "shear":
            psi = _shear_token_dense_apply(token[1], n_dim, psi)
        else:
            psi = np.fft.fft(psi) / np.sqrt(n_dim)
    return TorusState(psi)


def _extended_gcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        qq = old_r // r
        old_r, r = r, old_r - qq * r
        old_s, s = s, old_s - qq * s
        old_t, t = t, old_t - qq * t
    return old_r, old_s, old_t


def character_ev_static(state, mode):
    """<psi, T_m psi> without any propagation.

    For tagged momentum states this is the closed-form lattice sum: zero
    unless m1 = 0 mod N, else the winding phase times the norm.
    """
    n = state.n
    n1, n2 = int(mode[0]), int(mode[1])
    if state.momentum_index is not None:
        if n1 % n != 0:
            return 0.0 + 0.0j
        k0 = state.momentum_index
        return complex(np.exp(1j * np.pi * n1 * n2 / n)
                       * np.exp(2j * np.pi * k0 * n2 / n) * state.norm2())
    return complex(np.vdot(state.values, translation_apply(n, mode, state.values)))


def quantum_character_ev(qmap, state, mode, t, path="propagated"):
    """Expectation <U^t psi, T_m U^t psi>, by propagation or conjugation.

    The conjugated path uses the exact identity to trade propagation for the
    integer-arithmetic label A^t m and a product of unimodular phases; for
    momentum states the remaining static pairing is a closed-form lattice
    sum.  Both paths must agree to round-off.
    """
    n = qmap.n
    if abs(int(mode[0])) > n // 2 or abs(int(mode[1])) > n // 2:
        raise AliasingError(
            f"mode {tuple(mode)} outside the lattice band |m_i| <= {n // 2}")
    t = int(t)
    if path == "propagated":
        evolved = qmap.propagate(state, t)
        return complex(np.vdot(evolved.values,
                               translation_apply(n, mode, evolved.values)))
    if path == "conjugated":
        label_t = _mat_vec(qmap.cat.power(t), (int(mode[0]), int(mode[1])))
        phase = qmap.accumulated_phase(mode, t)
        return complex(phase * character_ev_static(state, label_t))
    raise ValueError(f"unknown path {path!r}")


def trig_mean(coeffs):
    """Torus average of a trig polynomial {(m1, m2): coeff}: its (0,0) term."""
    return complex(coeffs.get((0, 0), 0.0))


def trig_is_real(coeffs, tol=1e-12):
    for (m1, m2), c in coeffs.items():
        if abs(np.conj(coeffs.get((-m1, -m2), 0.0)) - c) > tol:
            return False
    return True


def trig_ev(qmap, state, coeffs, t, path="propagated"):
    """Expectation of a trig-polynomial observable at integer time t."""
    total = 0.0 + 0.0j
    for mode, c in coeffs.items():
        total += c * quantum_character_ev(qmap, state, mode, t, path=path)
    return complex(total)
