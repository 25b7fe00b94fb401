"""m n D / eta at low temperature against the closed-form limits."""
import numpy as np

from deltashell.scattering import Interaction
from deltashell.transport import (asymptotic_first, coefficients_first,
                                  diffusion_viscosity_ratio)
from deltashell.xsection import Statistics

CASES = [(-5.0, "g != 1, 3"), (1.0, "g = 1"), (3.0, "g = 3")]

if __name__ == "__main__":
    stats = Statistics.spin_s("1/2")
    print(f"{'case':>10} {'tau':>8} {'mnD/eta':>10} {'limit':>10} {'D/asym':>9} {'eta/asym':>9}")
    for g, label in CASES:
        inter = Interaction(g)
        limit = 0.6 * asymptotic_first(inter, 1.0, "D") / asymptotic_first(inter, 1.0, "eta")
        for tau in np.geomspace(1e-2, 1e-6, 5):
            res = coefficients_first(inter, stats, tau)
            print(f"{label:>10} {tau:8.0e} {diffusion_viscosity_ratio(inter, stats, tau):10.6f} "
                  f"{limit:10.6f} {res.D_norm / asymptotic_first(inter, tau, 'D'):9.6f} "
                  f"{res.eta_norm / asymptotic_first(inter, tau, 'eta'):9.6f}")
