"""Scattering length, effective range and shape parameter versus g (l = 0 and l = 1)."""
from _common import out_dir, run

if __name__ == "__main__":
    d = out_dir(__doc__)
    for l in (0, 1):
        run(["low-energy", "--g-min", "-5", "--g-max", "5", "--points", "101", "--l", str(l)],
            d / f"fig1_low_energy_l{l}.csv")
