"""Pure numpy versions of the kernels in ``_core.pyx``."""
import numpy as np


def cubic_direct(u):
    """Coefficients 0..N of |u|^2 u by exact convolution."""
    u = np.asarray(u, dtype=np.complex128)
    n = u.shape[0] - 1
    acorr = np.convolve(u, np.conj(u[::-1]))
    return np.convolve(u, acorr)[n:2 * n + 1]


def rk4_direct(u, dt, nsteps):
    """Advance ``u`` by ``nsteps`` RK4 steps of du/dt = -i P(|u|^2 u).

    Returns ``(state, bad)`` where ``bad`` is the 1-based index (within this
    call) of the first step producing a non-finite state, or 0.
    """
    y = np.array(u, dtype=np.complex128, copy=True)
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for step in range(nsteps):
        k1 = -1j * cubic_direct(y)
        k2 = -1j * cubic_direct(y + h2 * k1)
        k3 = -1j * cubic_direct(y + h2 * k2)
        k4 = -1j * cubic_direct(y + dt * k3)
        y = y + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            return y, step + 1
    return y, 0
