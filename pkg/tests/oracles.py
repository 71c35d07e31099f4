"""Independent oracles for the test suite.

Everything here is deliberately computed by a different route than the
library: plain Python loops for grid suprema, closed-form solutions for
the damped and Coulomb oscillators, central differences for
derivatives.  Expected values frozen into the tests come from these.
"""

import math

import numpy as np


def fd_directional(fun, z_q, z_p, v_q, v_p, eps=1e-6):
    """Central-difference directional derivative of fun(q, p) along (v_q, v_p)."""
    up = fun(z_q + eps * v_q, z_p + eps * v_p)
    dn = fun(z_q - eps * v_q, z_p - eps * v_p)
    return (up - dn) / (2.0 * eps)


def brute_polar_right(f_scalar, d_scalar, z2, axis_values):
    """sup over a grid of d(z', z2) - f(z'), by explicit loops (n = 1).

    ``f_scalar`` and ``d_scalar`` act on plain (q, p) floats /
    ((q1, p1), (q2, p2)) pairs; ``axis_values`` is the 1-d list of grid
    coordinates used for both the q' and p' axes.
    """
    best = -math.inf
    q2, p2 = z2
    for q in axis_values:
        for p in axis_values:
            val = d_scalar((q, p), (q2, p2)) - f_scalar(q, p)
            if val > best:
                best = val
    return best


def omega_scalar(z1, z2):
    """Symplectic form for n = 1 on plain float pairs."""
    (q1, p1), (q2, p2) = z1, z2
    return q2 * p1 - q1 * p2


def damped_oscillator_state(a, t):
    """Closed-form underdamped solution of qddot + a qdot + q = 0 from (1, 0).

    q(t) = e^{-a t / 2} (cos w t + (a / 2w) sin w t),  w = sqrt(1 - a^2/4),
    p(t) = qdot(t) = -e^{-a t / 2} sin(w t) / w.
    """
    w = math.sqrt(1.0 - 0.25 * a * a)
    decay = np.exp(-0.5 * a * np.asarray(t))
    q = decay * (np.cos(w * np.asarray(t)) + (0.5 * a / w) * np.sin(w * np.asarray(t)))
    p = -decay * np.sin(w * np.asarray(t)) / w
    return q, p


def coulomb_turnings(q0, mu, k):
    """Signed turning positions of qddot = -k q - mu sign(qdot) from (q0, 0).

    Each completed half cycle reflects the turning point about the
    shifted center mu sign(x)/k:  x_next = -x + 2 (mu/k) sign(x).
    Motion stops once |k x| <= mu.  Returns the list including q0 and
    the final rest position as its last element.
    """
    xs = [float(q0)]
    x = float(q0)
    while abs(k * x) > mu:
        x = -x + 2.0 * (mu / k) * math.copysign(1.0, x)
        xs.append(x)
    return xs


def coulomb_state(t, q0, mu, k, mass=1.0):
    """Piecewise-analytic Coulomb oscillator state at time t, from (q0, 0).

    Within an arc the motion is harmonic about the shifted center, with
    angular frequency sqrt(k/m); each arc lasts pi/sqrt(k/m).
    """
    w = math.sqrt(k / mass)
    half = math.pi / w
    xs = coulomb_turnings(q0, mu, k)
    arc = int(t // half)
    if arc >= len(xs) - 1:
        return xs[-1], 0.0  # at rest
    tau = t - arc * half
    x = xs[arc]
    center = (mu / k) * math.copysign(1.0, x)
    q = center + (x - center) * math.cos(w * tau)
    p = -mass * w * (x - center) * math.sin(w * tau)
    return q, p


def coulomb_path_length(q0, mu, k):
    """Total variation of q until rest: sum of |x_j - x_{j+1}|."""
    xs = coulomb_turnings(q0, mu, k)
    return float(sum(abs(xs[j] - xs[j + 1]) for j in range(len(xs) - 1)))


def turning_points(traj):
    """(time, q) at the nodes of a 1-dof friction trajectory where p == 0,
    consecutive duplicates collapsed (rest phases produce runs of zeros)."""
    out = []
    for k in range(traj.times.size):
        if traj.p[k, 0] == 0.0:
            if not out or abs(traj.q[k, 0] - out[-1][1]) > 1e-9:
                out.append((float(traj.times[k]), float(traj.q[k, 0])))
    return out
