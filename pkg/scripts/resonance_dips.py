"""Locate the eta/eta~ dips in inv_a and their log-contrast at several temperatures.

The s-wave dip sits where R/a ~ r0 k^2 / 2 for thermal k, so it drifts toward
inv_a = 0 only as tau -> 0.
"""
import numpy as np
from scipy.signal import find_peaks

from deltashell.numerics import Bracket, minimize_scalar
from deltashell.scattering import Interaction
from deltashell.transport import coefficients_first
from deltashell.xsection import Statistics

HALF = Statistics.spin_s("1/2")


def eta(inv_a, tau):
    return coefficients_first(Interaction.from_inverse_scattering_length(inv_a), HALF,
                              tau).eta_norm


if __name__ == "__main__":
    grid = np.round(np.arange(-0.4, 0.9001, 0.004), 6)
    for tau in (1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 1.0):
        e = np.array([eta(a, tau) for a in grid])
        idx, props = find_peaks(-np.log(e), prominence=0)
        parts = []
        for i, prom in zip(idx, props["prominences"]):
            loc = minimize_scalar(lambda a: eta(a, tau), Bracket(grid[i] - 0.004,
                                                                grid[i] + 0.004), tol=1e-6)[0]
            parts.append(f"{loc:.4f} ({prom:.3f})")
        print(f"tau={tau:<6g} dips at inv_a (log-contrast): " + (", ".join(parts) or "none"))
