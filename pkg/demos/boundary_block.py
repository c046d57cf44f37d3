# Where does the 2S/h growth of ||exp(tM)|| come from?
#
# The two boundary rows form a 2x2 block C with eigenvalues 0 and -r.
# Its exponential is known exactly, and its norm saturates at 2S/h where h
# is the width of the last cell.
import numpy as np

from bslbc import (ModelParams, assemble, build_sinh_grid, exp_tC_closed_form, expm,
                   max_norm_sweep, norm_exp_tC, norm_inf)

grid = build_sinh_grid(E=100.0, c=20.0, S=400.0, m=100)
params = ModelParams(r=0.1, sigma=0.3, S=400.0)
op = assemble(grid, params, "forward", "lbc1")

print("C block:\n", op.C)
print("C @ (s_m+1, S) =", op.C @ [grid.s(grid.m + 1), grid.S])
print("C @ (1, 1)     =", op.C @ [1.0, 1.0])

for t in (0.0, 1.0, 10.0, 100.0):
    pade = expm(t * op.C)
    exact = exp_tC_closed_form(grid, params.r, t)
    print(f"t={t:6.1f}  ||exp(tC)||={norm_inf(pade):9.4f}  closed form={norm_exp_tC(grid, params.r, t):9.4f}"
          f"  max entry diff={np.max(np.abs(pade - exact)):.1e}")

# the full operator inherits the same ceiling
print("2S/h            =", 2 * grid.S / grid.h_last)
print("max_t ||e^{tM}|| =", max_norm_sweep(op))
