"""Reference values computed independently of the package and frozen here.

Distribution tails come from 40-digit mpmath evaluations of the regularized
incomplete beta function; the rest is hand arithmetic.
"""
from __future__ import annotations

# log-prices p = [0, 1, 3, 6]: returns [1, 2, 3] at lag 1 and [3, 5] at lag 2
TOY_LOG_PRICES = [0.0, 1.0, 3.0, 6.0]
TOY_RETURNS_LAG1 = [1.0, 2.0, 3.0]
TOY_RETURNS_LAG2 = [3.0, 5.0]
TOY_XI = {  # (tau, q) -> mean |r_tau|^q over overlapping windows
    (1, 1.0): 2.0,
    (2, 1.0): 4.0,
    (3, 1.0): 6.0,
    (1, 2.0): 14.0 / 3.0,
    (2, 2.0): 17.0,
}
TOY_XI_STD_2_1 = 2.0
TOY_XI_NORM_2_1 = 2.0
TOY_XI_DISJOINT = {(2, 1.0): 3.0}  # single full window [0, 3]

# two-sided Student-t tail 2 * P(T_v > |t|)
T_PVALUES = [(2.1, 30, 0.044242471262323535002), (0.7, 5, 0.51514894831481641891)]
# upper F tail P(F_{d1,d2} > f)
F_PVALUES = [(1.3, 49, 12450, 0.077767244501049052863), (2.5, 3, 40, 0.073254352017949903814)]

FGN_ACOV_H047_LAG1 = -0.040735880674735609868  # 0.5 * (2**0.94 - 2)
Z_05 = -1.6448536269514727149
ANNUAL_GAUSSIAN_VAR_UNIT_SIGMA = -26.007419393777877126  # Z_05 * sqrt(250)

# cumulative diagnostics of r = [1, 1, 1]
CV_ONES = [1.0, 2.0, 3.0]
CAV_ONES = [1.0, 2.0]

# toy prices on lags 1..3, q = (1, 2): xi_norm(., 1) = (1, 2, 3) so H_1 = 1 exactly;
# the second increment is the zero-intercept slope of ln(sqrt(Xi(tau,2)/K_2)/tau)
# on ln(tau), evaluated at 30 digits
TOY_H1 = 1.0
TOY_INCREMENT_1_2 = -0.0693904469980306687466133980297

# twenty ascending returns -0.05, -0.03, ..., 0.33; the 5% quantile sits at
# order position 19 * 0.05 = 0.95: -0.05 + 0.95 * 0.02
VAR_SORT_SAMPLE = [-0.05 + 0.02 * i for i in range(20)]
VAR_SORT_Q05 = -0.031
