"""Hermite functions, expansions and the harmonic oscillator."""
import numpy as np

from tfinv.hermite import Grid, HermiteExpansion, analyze, hermite_table, oscillator_power, synthesize

# h_0 .. h_5 on a few points, by the normalized three-term recurrence
x = np.linspace(-3, 3, 7)
table = hermite_table(5, x)
print("h_0(0) =", table[0][3], " pi^(-1/4) =", np.pi ** -0.25)

# expand a Gabor atom and look at how fast its coefficients fall off
grid = Grid(1, 1 / 16, 14)
atom = lambda p: np.exp(2j * p[..., 0] - 0.5 * (p[..., 0] - 1) ** 2)
c = analyze(atom, 40, dimension=1)
for n in (0, 10, 20, 30, 40):
    print(f"|c({n:2d})| = {abs(c.coefficient((n,))):.3e}")

# synthesis round trip on the grid
f = synthesize(c, grid)
exact = atom(grid.points())
print("max synthesis error:", np.max(np.abs(f.samples - exact)))

# the oscillator |x|^2 - d^2/dx^2 is diagonal: h_n -> (2n + 1) h_n
h3 = HermiteExpansion.from_dict({(3,): 1.0})
print("H^-2 h_3 coefficient:", oscillator_power(h3, 2, -1).coefficient((3,)), "= 1/49")
