"""D/D~ versus tau for several couplings, with the low-temperature asymptotes."""
from _common import out_dir, run

COUPLINGS = ["-5", "0.5", "1", "2", "3", "5"]

if __name__ == "__main__":
    d = out_dir(__doc__)
    for g in COUPLINGS:
        run(["transport", "--g", g, "--stats", "spin-1/2", "--tau-min", "1e-4", "--tau-max", "10",
             "--points", "60", "--spacing", "log", "--order", "1"], d / f"fig2_transport_g{g}.csv")
