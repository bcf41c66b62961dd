"""
Heralding with a noisy detector
===============================

Condition one arm of a two-mode squeezed vacuum on a detector click and watch
the heralded state lose its Wigner negativity as dark counts rise.
"""
import numpy as np

from detdeco import DetectorSpec, build_povm
from detdeco.decoherence import NOISE_LEVELS
from detdeco.herald import TmsvResource, gaussian_integral_oracle, herald_state, heralded_wigner_section

resource = TmsvResource(0.6)
radii = np.linspace(0.0, 2.0, 5)

###############################################################################
# Heralded states
# ---------------

print("nu     P(click)  p1       W_c(0,0)")
for nu in NOISE_LEVELS:
    povm = build_povm(DetectorSpec("apd", 0.28, nu), 60)
    state = herald_state(povm, 1, resource)
    w0 = heralded_wigner_section(state, [0.0]).origin
    print(f"{nu:.2f}   {state.herald_probability:.5f}   {state.weights[1]:.5f}  {w0:+.5f}")

###############################################################################
# Cross-check in phase space
# --------------------------
# The same section follows from integrating the Gaussian two-mode Wigner
# function against the detector's Wigner function.

povm = build_povm(DetectorSpec("apd", 0.28, 0.0), 60)
fock = heralded_wigner_section(herald_state(povm, 1, resource), radii)
quad = gaussian_integral_oracle(povm, 1, resource, radii)
print("\nr      Fock      quadrature")
for r, a, b in zip(radii, fock.values, quad.values):
    print(f"{r:.2f}   {a:+.6f}  {b:+.6f}")
