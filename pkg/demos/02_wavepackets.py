#!/usr/bin/env python
"""
The packet families f_n and g_n and how their norms scale with n.
"""
import numpy as np

from dplab.experiments import fit_loglog_slope
from dplab.wavepackets import carrier, grid_for_packets, make_envelope, make_fn, make_gn, packet_diagnostics

# The envelope is defined through its transform, so L must give a fine frequency
# ladder (spacing 1/12 at the default L = 12 pi).
grid = grid_for_packets(8)
env = make_envelope(grid)
print("N =", grid.N, " phi(0) =", env.phi0, " (0.75 / 2pi =", 0.75 / (2 * np.pi), ")")
print("envelope at the interval ends, relative to phi(0):", env.tail_ratio)

# f_n oscillates at 17/12 * 2^n under the envelope; g_n is the bare envelope.
f6 = make_fn(env, 6)
g6 = make_gn(env, 6)
print("carrier(6) =", carrier(6), " max f_6 =", np.abs(f6.values).max(), " max g_6 =", np.abs(g6.values).max())

rows = packet_diagnostics(env, range(4, 9), [0.5, 1.0, 2.0])
ns = np.array(sorted({r["n"] for r in rows}))
for sigma in (0.5, 1.0, 2.0):
    nf = [r["norm_f"] for r in rows if r["sigma"] == sigma]
    fit = fit_loglog_slope(2.0**ns, nf)
    print(f"sigma = {sigma}: log2-slope of ||f_n|| = {fit.slope:+.4f}  (expect {sigma - 1:+.1f})")

# The product g_n d/dx f_n stays of size one even though both factors shrink.
prod = [r["prod_fg"] for r in rows if r["sigma"] == 1.0]
print("||g_n f_n'||_B1_inf,inf:", np.round(prod, 6))
