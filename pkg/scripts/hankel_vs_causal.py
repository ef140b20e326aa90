"""Hankel DMD (per-lag monomials) against causal-jump DMD on a NAR map with a cross-lag term.

    y_k = 0.5 y_{k-1} + 0.3 y_{k-1} y_{k-2}

Hankel DMD can only build predictors that add up functions of single lags,
so it cannot represent the product term exactly. How much that costs in
forecast error depends on tau and order: trajectories decay toward zero,
where the product term is small, and with tau = 3 the per-lag model can
partly compensate through the extra lag.
"""

import numpy as np

from cjdmd.dictionary import build_dictionary
from cjdmd.dmd import fit_causal_jump, fit_hankel_dmd
from cjdmd.forecast import evaluate
from cjdmd.nar import simulate_nar


def cross_lag(w):
    return 0.5 * w[-1] + 0.3 * w[-1] * w[-2]


def main(horizon=50):
    rng = np.random.default_rng(2024)
    make = lambda n: [simulate_nar(cross_lag, rng.uniform(0.2, 1.0, 2), 60) for _ in range(n)]
    train, held = make(20), make(5)
    print(f"{horizon}-step normalized MSE (%) on 5 held-out series")
    print("tau order   causal-jump   hankel-per-lag")
    for tau in (2, 3):
        for order in (1, 2, 3):
            d = build_dictionary(tau, order)
            cj = fit_causal_jump(train, tau, d, d.size)
            hk = fit_hankel_dmd(train, tau, d, d.per_lag(1).size)
            e_cj = evaluate(cj, held, horizon=horizon).normalized_mse_percent
            e_hk = evaluate(hk, held, horizon=horizon).normalized_mse_percent
            print(f"{tau:3d} {order:5d} {e_cj:13.5f} {e_hk:16.5f}")


if __name__ == "__main__":
    main()
