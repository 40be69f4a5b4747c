"""Nesting of the K_alpha classes and the decomposition mu^(z) = mu^(cz)^(c^-alpha) mu_c^(z).

A tempered stable law with index 0.5 lies in K_alpha for every alpha <= 0.5.
For each alpha < 0 the cofactor mu_c is built and the identity checked on a
grid of z.
"""
import numpy as np

from kalpha import (LevyTriplet, SphericalAtom, TiltedPowerLaw, apply_phi, factor_decomposition,
                    is_k_alpha, range_check, verify_decomposition)

t = LevyTriplet([[0.2]], [0.1], (SphericalAtom([1.0], 1.0, TiltedPowerLaw(1.0, 0.5, 1.0)),))

print("alpha   in K_alpha")
for a in (-2.0, -1.0, 0.0, 0.5, 0.8, 1.5):
    print(f"{a:5.1f}   {is_k_alpha(t, a).member}")

z = np.linspace(-5, 5, 21)
print("\nalpha    c     max |residual|")
for a in (-1.5, -1.0, -0.5):
    for c in (0.1, 0.5, 0.9):
        f = factor_decomposition(t, a, c)
        print(f"{a:5.1f}  {c:4.1f}   {verify_decomposition(t, f, z):.2e}")

# images of the mapping land in the range, and the iterated map is m-times monotone
for a, m in ((-1.0, 0), (0.0, 2), (0.3, 1)):
    out = apply_phi(t, (a, m))
    print(f"\nPhi_{a}^{m + 1}: gamma~ = {out.gamma[0]:.6f}, A~ = {out.A[0, 0]:.6f}, "
          f"range check: {range_check(out, (a, m)).member}")
