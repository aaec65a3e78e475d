"""Where does a coefficient sequence sit in the chain of Hermite sequence spaces?"""
import numpy as np

from tfinv import growth

laws = {
    "n!^(-1/2) 2^(-n)": lambda n, lf: np.exp(-0.5 * lf - n * np.log(2)),
    "exp(-n)": lambda n, lf: np.exp(-n),
    "exp(-log(1+n)^2)": lambda n, lf: np.exp(-np.log1p(n) ** 2),
    "exp(-2 sqrt n)": lambda n, lf: np.exp(-2 * np.sqrt(n)),
    "(1+n)^3": lambda n, lf: (1 + n) ** 3.0,
    "exp(2 sqrt n)": lambda n, lf: np.exp(2 * np.sqrt(n)),
    "exp(n)": lambda n, lf: np.exp(n),
    "n!^(1/2) 3^(-n)": lambda n, lf: np.exp(0.5 * lf - n * np.log(3)),
}

for name, law in laws.items():
    c = growth.sequence_expansion(law, 64)
    cls = growth.classify(c)
    flag = "  (near a boundary)" if cls.boundary else ""
    print(f"{name:>20s} -> {cls.tag:<13s} margin {cls.margin:.2f}{flag}")

# exp(-2 sqrt n) satisfies the Sigma1 law only for r <= 2, not for every r,
# so it is put in the coarser Schwartz class
