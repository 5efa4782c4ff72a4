import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
ODD = np.uint64(0xD6E8FEB86659FD93)
LANE2 = np.uint64(0xA0761D6478BD642F)
MERSENNE61 = np.uint64((1 << 61) - 1)

# u is kept inside [2^-40, 1 - 2^-40] so tan() stays finite
U_EPS = 2.0 ** -40
CAUCHY_CLAMP = 2.0 ** 60
