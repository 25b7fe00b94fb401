"""eta/eta~ and m n D / eta versus inv_a at several temperatures, plus the hard-sphere marker."""
from _common import out_dir, run

TAUS = ["0.01", "0.1", "0.3", "1"]

if __name__ == "__main__":
    d = out_dir(__doc__)
    for tau in TAUS:
        run(["resonance", "--tau", tau, "--inv-a-min", "-1", "--inv-a-max", "0.95",
             "--points", "400", "--dilution", "0.01"], d / f"fig3_resonance_tau{tau}.csv")
        run(["resonance", "--tau", tau, "--hard-sphere"], d / f"fig4_hard_sphere_tau{tau}.csv")
