"""
How much noise a detector tolerates
===================================

The origin value of the one-click Wigner function has a closed form for both
detectors. Setting it to zero gives the dark-count level nu* at which the
detector stops being non-classical.
"""
import numpy as np

from detdeco.decoherence import DENSE_NU_GRID, negativity_curve, threshold

###############################################################################
# Threshold at the calibrated efficiency
# --------------------------------------

for kind in ("apd", "tmd"):
    th = threshold(kind, 0.28)
    print(f"{kind}: nu* = {th.nu_star_exact:.7f} (bisection {th.nu_star_bisect:.7f}), eta/2 = 0.14")

###############################################################################
# Dependence on efficiency
# ------------------------
# For small eta both thresholds approach eta/2; the TMD pulls ahead as the
# efficiency grows because a second bin can still report a single photon.

print("\neta    apd nu*   tmd nu*   eta/2")
for eta in (0.01, 0.05, 0.1, 0.28, 0.5, 0.8, 1.0):
    a = threshold("apd", eta).nu_star_exact
    t = threshold("tmd", eta).nu_star_exact
    print(f"{eta:<5}  {a:.5f}   {t:.5f}   {eta / 2:.5f}")

###############################################################################
# Dense curve
# -----------
# The analytic curve is strictly increasing in nu; its linear-interpolated
# zero crossing lands on the closed-form threshold.

curve = negativity_curve("apd", 0.28, DENSE_NU_GRID)
print("\nmonotone:", bool(np.all(np.diff(curve.origin_values) > 0)))
print("interpolated crossing:", curve.crossing())
