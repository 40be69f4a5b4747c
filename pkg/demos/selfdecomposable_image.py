"""Compound Poisson in, selfdecomposable law out.

Unit jumps at rate 1 are pushed through the alpha = 0 mapping, which gives the
law of int_0^inf e^-t dX_t.  The mapped triplet is compared with a Monte Carlo
sample of the integral through the empirical characteristic function.
"""
import numpy as np
from scipy.special import sici

from kalpha import (DiracAtom, LevyTriplet, SimConfig, SphericalAtom, apply_phi, char_exponent,
                    is_k_alpha, mc_compare)

t = LevyTriplet([[0.0]], [0.0], (SphericalAtom([1.0], 1.0, DiracAtom(1.0, 1.0)),))

for m in (0, 1):
    out = apply_phi(t, (0.0, m))
    nu = out.levy.atoms[0].radial
    u = np.array([0.1, 0.5, 0.9])
    print(f"m={m}: gamma~ = {out.gamma[0]:.6f}, density at {u} = {np.round(nu.density(u), 4)}")
    print(f"      in K_0: {is_k_alpha(out, 0.0).member}, in K_0.5: {is_k_alpha(out, 0.5).member}")

z = np.linspace(-5, 5, 11)
rep = mc_compare(t, (0.0, 0), SimConfig(n_samples=100_000, seed=1), z)
print(f"\nMonte Carlo, n = {rep['n_samples']}: {rep['exceedances']} of {len(z)} points beyond 3 SE")
print("   z     Re emp    Re exact   |dev|/SE")
for zi, e, x, r in zip(z, rep["empirical"], rep["exact"], rep["deviation_over_se"]):
    print(f"{zi:5.1f}  {e[0]:9.5f}  {x[0]:9.5f}  {r:7.2f}")

# closed form: int_0^1 (e^{iu} - 1) du / u = Ci(1) - euler_gamma + i Si(1), and the
# centering terms cancel against gamma~ = pi/4 - 1/2
psi = char_exponent(apply_phi(t, (0.0, 0)), [1.0])
si, ci = sici(1.0)
print(f"\npsi~(1) = {psi.real:.12f} {psi.imag:+.12f}i")
print(f"exact   = {ci - np.euler_gamma:.12f} {si - 0.5:+.12f}i")
