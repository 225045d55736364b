"""Independent reference computations shared by the test modules.

None of these reuse the production quadrature; they trade speed for
transparency.
"""
import numpy as np
from scipy import integrate
from scipy.optimize import minimize

from psamtrain.mi import BinaryInput, expected_mi


def riemann_conditional_mi(masses, probs, r, v, noise_var, n=600, span=9.0):
    """Conditional MI in nats for complex mass points and a complex channel
    estimate, by a Riemann sum of the output entropy over a square box."""
    masses = np.asarray(masses, dtype=complex)
    probs = np.asarray(probs, dtype=float)
    mu = r * masses
    s = v * np.abs(masses) ** 2 + noise_var
    half = span * np.sqrt(s.max()) + np.abs(mu).max()
    c = mu.mean()
    ax = np.linspace(-half, half, n)
    h = ax[1] - ax[0]
    Y = (c.real + ax)[:, None] + 1j * (c.imag + ax)[None, :]
    f = sum(p * np.exp(-np.abs(Y - m) ** 2 / si) / (np.pi * si)
            for p, m, si in zip(probs, mu, s))
    with np.errstate(divide="ignore", invalid="ignore"):
        hy = -np.sum(np.where(f > 0, f * np.log(f), 0.0)) * h * h
    return hy - np.sum(probs * np.log(np.pi * np.e * s))


def no_csi_mi(inp: BinaryInput, noise_var):
    """MI in nats without channel knowledge (v = 1, zero estimate).

    The output is circular, so everything reduces to ``U = |Y|^2``, a
    mixture of exponentials, and one scipy quad.
    """
    s = np.array([inp.m1 ** 2 + noise_var, inp.m2 ** 2 + noise_var])
    p = np.array([inp.p1, inp.p2])

    def neg_f_log_f(u):
        f = np.sum(p * np.exp(-u / s) / s)
        return -f * np.log(f) if f > 0 else 0.0

    h_u, _ = integrate.quad(neg_f_log_f, 0, np.inf, limit=400, epsabs=1e-13, epsrel=1e-12)
    # h(Y) = h(U) + log(pi) for circular Y; h(Y|X) = sum p log(pi e s)
    return h_u - np.sum(p * (1.0 + np.log(s)))


def nested_expected_mi(inp: BinaryInput, v, noise_var, n_est=24, n_out=300):
    """Expected MI in nats with the complex estimate integrated on a 2-D
    Gauss-Hermite rule (no rotation reduction) and a Riemann inner integral."""
    t, w = np.polynomial.hermite.hermgauss(n_est)
    sd = np.sqrt((1.0 - v) / 2.0)
    total = 0.0
    for a, wa in zip(t, w):
        for b, wb in zip(t, w):
            r = np.sqrt(2.0) * sd * (a + 1j * b)
            total += wa * wb * riemann_conditional_mi(
                [inp.m1, inp.m2], [inp.p1, inp.p2], r, v, noise_var, n=n_out)
    return total / np.pi


def _from_p1_m1(P, p1, m1):
    m2 = np.sqrt(max(P - p1 * m1 * m1, 0.0) / (1.0 - p1))
    return BinaryInput(m1, m2, p1)


def grid_search_isub(P, v, noise_var, quad, n_p=60, n_m=60, refine=3):
    """Exhaustive search over ``(p1, m1)`` with ``m2`` fixed by the power
    constraint, then Powell refinement of the best few points.

    Returns the best rate in nats.
    """
    p1s = 1.0 / (1.0 + np.exp(-np.linspace(-4.0, 7.0, n_p)))
    ts = np.concatenate([[1e-4, 1e-3, 1e-2], np.linspace(0.02, 1.0, n_m - 3)])
    m1s = -ts * np.sqrt(P)
    vals = np.empty((n_p, n_m))
    for i, p1 in enumerate(p1s):
        for j, m1 in enumerate(m1s):
            vals[i, j] = expected_mi(_from_p1_m1(P, p1, m1), v, noise_var, quad, unit="nats")
    best = float(vals.max())
    order = np.argsort(-vals, axis=None)[:refine]
    for flat in order:
        i, j = np.unravel_index(flat, vals.shape)

        def neg(x):
            p1, m1 = x
            if not (1e-6 < p1 < 1 - 1e-6) or not (-np.sqrt(P) <= m1 <= 0.0):
                return 1.0
            return -expected_mi(_from_p1_m1(P, p1, m1), v, noise_var, quad, unit="nats")

        res = minimize(neg, [p1s[i], m1s[j]], method="Powell",
                       options={"xtol": 1e-6, "ftol": 1e-11})
        best = max(best, -float(res.fun))
    return best
