"""Translation and modulation become Weyl displacements on Fock space."""
import numpy as np

from tfinv import fock
from tfinv.hermite import HermiteExpansion

f = HermiteExpansion.from_dict({(0,): 1.0, (2,): 0.5j})
z = fock.spiral_samples(64, 2.0)
for x, xi in [(0.0, 0.0), (1.0, 0.0), (0.5, -1.5), (-2.0, 2.0)]:
    err = fock.covariance_check(f, [x], [xi], z, 40)
    print(f"x = {x:5.2f}, xi = {xi:5.2f}: max relative error {err:.2e}")

# the Weyl operators compose up to a phase and keep the Gaussian-measure norm
F = fock.bargmann(f)
G = fock.weyl(F, 0.8 - 0.3j)
print("||F||^2 =", fock.gaussian_measure_mass(F), " ||W F||^2 =", fock.gaussian_measure_mass(G))
