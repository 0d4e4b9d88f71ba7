"""Rational LTI models and fixed-step closed-loop step-response simulation.

Polynomials are plain 1-D coefficient arrays in descending powers of the
Laplace variable s (coeffs[0]*s^n + ... + coeffs[n]).  All modules share this
convention.  No pole-zero cancellation is attempted anywhere: cancelling
floating-point coefficients is fragile, and the marginal integrator pole
contributed by a PID controller is exact by construction, so the integrator
copes with unreduced forms like s/s.
"""

from dataclasses import dataclass

import numpy as np


def poly_trim(c):
    """Drop leading zero coefficients; the zero polynomial collapses to [0]."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    return c[nz[0]:].copy()


def poly_mul(a, b):
    """Polynomial product (coefficient convolution)."""
    return poly_trim(np.convolve(poly_trim(a), poly_trim(b)))


def poly_add(a, b):
    """Polynomial sum with right-aligned coefficients, leading zeros trimmed."""
    a, b = poly_trim(a), poly_trim(b)
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[n - len(a):] += a
    out[n - len(b):] += b
    return poly_trim(out)


@dataclass(frozen=True)
class TransferFunction:
    """Rational transfer function num(s)/den(s), coefficients descending."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = poly_trim(self.num)
        den = poly_trim(self.den)
        if not den.any():
            raise ValueError("zero denominator")
        num.flags.writeable = False
        den.flags.writeable = False
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def relative_degree(self):
        return (len(self.den) - 1) - (len(self.num) - 1)

    def __call__(self, s):
        """Evaluate at a (complex) point or array of points."""
        return np.polyval(self.num, s) / np.polyval(self.den, s)

    def __repr__(self):
        return f"TransferFunction({list(self.num)}, {list(self.den)})"


UNITY = TransferFunction([1.0], [1.0])


def pid_tf(gains):
    """PID controller (Kd s^2 + Kp s + Ki)/s from a (kd, kp, ki) triple.

    The result may be unreduced (e.g. s/s for a pure P controller); the
    simulation path tolerates that.
    """
    kd, kp, ki = (float(g) for g in gains)
    if kd == 0.0 and kp == 0.0 and ki == 0.0:
        raise ValueError("degenerate controller: all gains zero")
    return TransferFunction([kd, kp, ki], [1.0, 0.0])


def closed_loop(controller, plant, delay=None):
    """Unity-feedback closed loop T = L/(1+L) with L = controller*plant*delay.

    Built purely by polynomial arithmetic: T.num = num(L),
    T.den = num(L) + den(L).  Raises if the result is improper.
    """
    if delay is None:
        delay = UNITY
    num_l = poly_mul(poly_mul(controller.num, plant.num), delay.num)
    den_l = poly_mul(poly_mul(controller.den, plant.den), delay.den)
    den_t = poly_add(den_l, num_l)
    if len(num_l) > len(den_t):
        raise ValueError("closed loop is improper")
    return TransferFunction(num_l, den_t)


@dataclass(frozen=True)
class StateSpace:
    """x' = Ax + Bu, y = Cx + Du with B, C kept as 1-D vectors."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float

    @property
    def order(self):
        return self.A.shape[0]


def to_state_space(tf):
    """Controllable-canonical realization of a proper or biproper TF.

    A biproper input yields the nonzero feedthrough D = lead(num)/lead(den);
    a constant transfer function yields an order-0 realization (pure gain).
    """
    den = tf.den
    n = len(den) - 1
    if len(tf.num) - 1 > n:
        raise ValueError("improper transfer function")
    a = den / den[0]
    b = np.zeros(n + 1)
    b[n + 1 - len(tf.num):] = tf.num / den[0]
    d = b[0]
    A = np.zeros((n, n))
    if n > 0:
        A[0, :] = -a[1:]
        A[np.arange(1, n), np.arange(0, n - 1)] = 1.0
    B = np.zeros(n)
    if n > 0:
        B[0] = 1.0
    C = b[1:] - a[1:] * d
    return StateSpace(A, B, C, float(d))


def rk4_transition(A, B, dt):
    """One-step maps (M, N) of classical RK4 for x' = Ax + B*u, u frozen.

    For a linear system with the input held constant over the step, the four
    RK4 stages collapse algebraically to x+ = M x + N u with
    M = I + P + P^2/2 + P^3/6 + P^4/24 and N = dt*(I + P/2 + P^2/6 + P^3/24)B,
    P = dt*A.  Iterating the maps is identical to running the stages.
    """
    n = A.shape[0]
    P = dt * A
    I = np.eye(n)
    P2 = P @ P
    P3 = P2 @ P
    M = I + P + P2 / 2.0 + P3 / 6.0 + P3 @ P / 24.0
    N = dt * ((I + P / 2.0 + P2 / 6.0 + P3 / 24.0) @ B)
    return M, N


@dataclass(frozen=True)
class StepResponse:
    """Sampled unit-step response: t[k] = k*dt, e = 1 - y, len = floor(h/dt)+1.

    diverged is set when the state left |x_i| <= 1e9 (or went non-finite)
    during integration; remaining samples then repeat the last good value.
    """

    dt: float
    horizon: float
    t: np.ndarray
    y: np.ndarray
    e: np.ndarray
    diverged: bool = False

    def __len__(self):
        return len(self.t)


DIVERGENCE_LIMIT = 1e9


def sample_count(dt, horizon):
    # floor(horizon/dt) + 1 with a guard against float quotients landing
    # a hair under an integer (e.g. 0.075/0.01)
    return int(horizon / dt + 1e-9) + 1


def step_response(tf, dt=0.01, horizon=15.0):
    """Unit-step response of a proper/biproper TF by fixed-step RK4.

    Divergence (|x_i| > 1e9 or non-finite state) does not raise: the response
    is flagged and padded so that optimizers can penalize unstable gains.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if horizon < dt:
        raise ValueError("horizon shorter than one step")
    ss = to_state_space(tf)
    M, N = rk4_transition(ss.A, ss.B, dt)
    nsamp = sample_count(dt, horizon)
    t = np.arange(nsamp) * dt
    y = np.empty(nsamp)
    x = np.zeros(ss.order)
    y[0] = ss.D  # x(0) = 0, unit step applied at t = 0
    diverged = False
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, nsamp):
            x = M @ x + N
            if x.size and (not np.isfinite(x).all()
                           or np.abs(x).max() > DIVERGENCE_LIMIT):
                diverged = True
                y[k:] = y[k - 1]
                break
            y[k] = ss.C @ x + ss.D
    e = 1.0 - y
    return StepResponse(dt, horizon, t, y, e, diverged)
