"""Reference inputs and printed results of the four worked examples (SI units).

Pose rows are ``B1, B2, B3, C``; tensions are in kN as printed.
"""

import numpy as np

LENGTHS = {
    1: (20.0, 21.0, 22.0, 21.5),
    2: (20.0, 20.0, 20.1, 20.1),
    3: (20.0, 20.0, 21.0, 21.0),
    4: (20.3, 20.1, 20.5, 20.2),
}

PHI_EXAMPLE_1 = ((0.0, 0.715), (5.565, 6.28))

POSE = {
    2: np.array([[2.000, 2.499, -19.999], [-2.000, 2.499, -19.999],
                 [-2.000, -2.499, -20.099], [0.500, 0.700, -30.038]]),
    3: np.array([[2.000, 2.500, -20.000], [-2.000, 2.500, -20.000],
                 [-2.000, -2.403, -20.981], [0.500, 2.500, -30.198]]),
    4: np.array([[1.996, 2.499, -20.299], [-1.999, 2.499, -20.099],
                 [-1.995, -2.499, -20.000], [-0.001, 0.299, -30.170]]),
}

TENSIONS_KN = {
    2: (39.201, 23.520, 13.229, 22.049),
    3: (61.250, 38.750, 0.0, 0.0),
    4: (5.856, 49.018, 0.0, 43.126),
}

TAUT = {2: (1, 2, 3, 4), 3: (1, 2), 4: (1, 2, 4)}

STRUCTURE_MATRIX_EXAMPLE_2 = np.array([
    [0, 0, 0, 0],
    [-0.00002, -0.00002, 0.00003, 0.00003],
    [-1, -1, -1, -1],
    [-1.79942, -1.79942, 3.19908, 3.19908],
    [1.5, -2.5, -2.5, 1.5],
    [-0.00003, 0.00004, -0.00008, 0.00005],
])

SINGULAR_VALUES_EXAMPLE_2 = (5.43464, 4.08118, 1.32388, 0.00008)

EVEN_TENSIONS_OVER_MG = (0.3625, 0.2375, 0.1375, 0.2625)
