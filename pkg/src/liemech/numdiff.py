"""Central finite differences for derivatives of user-supplied smooth fields."""

import numpy as np

DEFAULT_STEP = 1e-5


def partial_derivative(f, x, index, step=DEFAULT_STEP):
    """d f / d x_index at x by a central difference; f may be array valued."""
    x = np.asarray(x, dtype=float)
    e = np.zeros_like(x)
    e[index] = step
    return (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * step)


def gradient(f, x, step=DEFAULT_STEP):
    """Gradient of a scalar function f at x."""
    x = np.asarray(x, dtype=float)
    return np.array([partial_derivative(f, x, i, step) for i in range(x.size)], dtype=float)


def directional_derivative(f, x, v, step=DEFAULT_STEP):
    """Derivative of f along the vector v at x.

    The step is taken along the unit direction and rescaled by |v|, so the
    finite-difference resolution does not depend on the magnitude of v.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        out = np.asarray(f(x), dtype=float)
        return np.zeros_like(out) if out.ndim else 0.0
    u = v / norm
    return norm * (np.asarray(f(x + step * u)) - np.asarray(f(x - step * u))) / (2.0 * step)


def gradient_qp(f, q, p, step=DEFAULT_STEP):
    """Gradients of f(q, p) with respect to q and p."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    dq = np.array([partial_derivative(lambda qq: f(qq, p), q, i, step) for i in range(q.size)],
                  dtype=float)
    dp = np.array([partial_derivative(lambda pp: f(q, pp), p, j, step) for j in range(p.size)],
                  dtype=float)
    return dq, dp
