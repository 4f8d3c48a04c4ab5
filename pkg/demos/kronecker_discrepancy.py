"""Discrepancy of Kronecker sequences {n alpha + beta} and the type of alpha.

Run: python3 demos/kronecker_discrepancy.py
"""
import numpy as np

from pointscatter import diophantine as dio

Ns = [10**2, 10**3, 10**4, 10**5]
for alpha in ("sqrt2", "sqrt3", "golden", "e"):
    ft = dio.finite_type_estimate(alpha, 1e6)
    chk = dio.discrepancy_decay_check(alpha, 0.0, Ns)
    print(f"{alpha:7s} tau_hat={ft.tau_hat:.3f}  D_N slope {chk.slope:.3f}  "
          + " ".join(f"{d:.2e}" for d in chk.discrepancies))

# %% the offset only rotates the circle, so D_N does not move
print("spread across offsets (slope, relative constant):", dio.beta_independence("sqrt2", [0, 0.1, 0.37, 0.5, 0.9], Ns))

# %% Erdos-Turan with m = N against the exact value
for N in Ns:
    D = dio.exact_discrepancy(dio.kronecker_sequence("sqrt2", 0.0, N)).discrepancy
    print(N, f"exact {D:.3e}   bound(C=1) {dio.kronecker_erdos_turan_bound('sqrt2', N, N):.3e}")

# %% partial sums of 1/||h alpha|| and 1/(h ||h alpha||)
ms = [10**2, 10**3, 10**4, 10**5]
print("sum 1/||h a||        exponent %.3f" % dio.fit_power(ms, [dio.sum_inv_dist("sqrt2", m) for m in ms])[0])
print("sum 1/(h ||h a||)    values", np.round([dio.sum_inv_hdist("sqrt2", m) for m in ms], 2))
