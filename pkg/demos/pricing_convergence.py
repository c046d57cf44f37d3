# Price a European call with Crank-Nicolson (two damped implicit Euler
# substeps first) and watch the max-norm error shrink as the grid refines.
#
# The forward scheme is first order in 1/m, the central ones second order.
import numpy as np

from bslbc import (CallOption, ModelParams, ThetaConfig, assemble, build_sinh_grid, call_price,
                   fit_order, payoff_vector, solve)

params = ModelParams(r=0.1, sigma=0.3, S=2000.0, E=100.0, T=5.0)
opt = CallOption.from_params(params)
ms = [100, 167, 278, 464, 774]

for scheme in ("forward", "central_a", "mixed_b"):
    errs = []
    for m in ms:
        grid = build_sinh_grid(100.0, 20.0, 2000.0, m)
        op = assemble(grid, params, scheme, "lbc1")
        res = solve(op, payoff_vector(grid, 100.0), config=ThetaConfig(0.5, 2000),
                    reference=call_price(grid.unknown_nodes, 5.0, opt))
        errs.append(res.max_error)
    p = fit_order(1.0 / np.array(ms), errs)
    print(f"{scheme:10s}", " ".join(f"{e:.2e}" for e in errs), f" order {p:.2f}")

# value at the money
grid = build_sinh_grid(100.0, 20.0, 2000.0, 464)
res = solve(assemble(grid, params, "central_a", "lbc1"), payoff_vector(grid, 100.0),
            config=ThetaConfig(0.5, 2000))
print("U(100) ~", np.interp(100.0, grid.unknown_nodes, res.U), " exact", float(call_price(100.0, 5.0, opt)))
