"""Reference values frozen from independent high-precision evaluations.

Produced with mpmath at 30 significant digits from the textbook hydrogen
radial functions (adaptive tanh-sinh quadrature on a split interval) and the
standard E1 rate formula with CODATA 2018 constants; none of the package code
was involved.
"""

# int R_{n1 l1} r R_{n2 l2} r^2 dr, atomic units
RADIAL_DIPOLE = {
    (2, 1, 1, 0): 1.29026620195986,
    (3, 1, 1, 0): 0.516689242618327,
    (4, 2, 3, 1): 7.56541081250162,
    (3, 1, 2, 0): 3.06481540657052,
}

# int R_42(r) j_2(q r) R_10(r) r^2 dr at q = 0.5 a.u.
FORM_FACTOR_4D_Q05 = 0.0117885092203344

# Einstein A for 2p -> 1s, s^-1
EINSTEIN_A_2P_1S = 6.26831504e8
