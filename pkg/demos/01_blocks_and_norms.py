#!/usr/bin/env python
"""
Littlewood-Paley blocks on a periodic grid, step by step.

Run it line by line in ipython, or as a script.
"""
import numpy as np

from dplab.littlewood_paley import BesovParams, besov_norm, block, block_norms, blocks, build_family
from dplab.spectral import Field, make_grid

# A grid on [-pi, pi) with 256 points. Frequencies are integers here.
grid = make_grid(np.pi, 256)
print(grid.N, grid.dx, grid.nyquist)

# cos(3x) sits at xi = 3, which is inside the annulus 4/3*2 <= |xi| <= 2*2 of block j = 1.
u = Field.from_function(grid, lambda x: np.cos(3 * x))
fam = build_family()
print("top block index:", fam.j_max(grid))
print("block sup norms (j = -1, 0, 1, ...):", np.round(block_norms(u), 12))

# Only block 1 carries anything, with weight 2^1, so the B^1_{inf,1} norm is 2.
print("||cos 3x||_B1 =", besov_norm(u, BesovParams(1.0)))

# A constant lives in block -1, whose weight is 2^-s.
print("||3||_B1 =", besov_norm(Field.constant(grid, 3.0), (1.0, np.inf, 1.0)))

# The blocks add back up to the field.
w = Field.from_function(grid, lambda x: np.exp(np.sin(x)))
parts = blocks(w)
print("reconstruction error:", np.abs(parts.sum(axis=0) - w.values).max())

# Blocks two apart never see each other's frequencies.
print("Delta_4 Delta_1 w:", np.abs(block(block(w, 1), 4).values).max())

# Smoothness shows in how fast the block norms fall off.
for s in (0.0, 1.0, 2.0, 3.0):
    print(f"s = {s}: ||exp(sin x)||_B^s = {besov_norm(w, BesovParams(s)):.6f}")
