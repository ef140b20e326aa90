"""Ground-truth nonlinear autoregressive maps for experiments and tests.

A NAR map ``f`` takes a flattened window ``[y_{k-tau}, ..., y_{k-1}]``
(oldest first, ``p * tau`` entries) and returns ``y_k`` (``p`` entries).
"""

from typing import Callable

import numpy as np

from .errors import ContractError


def simulate_nar(f: Callable, initial, n: int, p: int = 1) -> np.ndarray:
    """Iterate ``f`` from an initial window until the series has ``n`` samples.

    Returns shape ``(n,)`` for ``p == 1`` and ``(n, p)`` otherwise.
    """
    z = np.asarray(initial, dtype=np.float64).ravel()
    if z.size % p:
        raise ContractError("initial window length must be a multiple of p")
    tau = z.size // p
    if n < tau:
        raise ContractError(f"n={n} is shorter than the initial window ({tau})")
    out = np.empty((n, p))
    out[:tau] = z.reshape(tau, p)
    for k in range(tau, n):
        out[k] = f(out[k - tau:k].ravel())
    return out[:, 0] if p == 1 else out


def lifted_step(f: Callable, z, p: int = 1) -> np.ndarray:
    """One step of the window dynamics: drop the oldest sample, append ``f(z)``."""
    z = np.asarray(z, dtype=np.float64).ravel()
    return np.concatenate([z[p:], np.atleast_1d(f(z))])


def lifted_power(f: Callable, z, i: int, p: int = 1) -> np.ndarray:
    """``i``-fold composition of :func:`lifted_step`."""
    for _ in range(i):
        z = lifted_step(f, z, p)
    return np.asarray(z, dtype=np.float64)


def j_step_predictor(f: Callable, z, j: int, p: int = 1) -> np.ndarray:
    """Sample ``j`` steps beyond the window ``z``, by direct simulation."""
    z = np.asarray(z, dtype=np.float64).ravel()
    tau = z.size // p
    y = simulate_nar(f, z, tau + j, p)
    return np.atleast_1d(y[-1])


def ar2(a1: float = 1.1, a2: float = -0.3) -> Callable:
    """Linear AR(2): ``y_k = a1 y_{k-1} + a2 y_{k-2}``."""
    return lambda w: a1 * w[-1] + a2 * w[-2]


def companion(a1: float = 1.1, a2: float = -0.3) -> np.ndarray:
    """Matrix advancing ``[y_{k-2}, y_{k-1}]`` to ``[y_{k-1}, y_k]`` for :func:`ar2`."""
    return np.array([[0.0, 1.0], [a2, a1]])
