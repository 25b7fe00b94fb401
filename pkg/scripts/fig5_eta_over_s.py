"""Minimum of eta/s over tau versus inv_a at three dilutions, and the unitary tau curve."""
from _common import out_dir, run

if __name__ == "__main__":
    d = out_dir(__doc__)
    run(["eta-s", "--g", "1", "--dilution", "0.01", "--tau-min", "0.005", "--tau-max", "5",
         "--points", "80", "--spacing", "log"], d / "fig5_insert_unitary.csv")
    run(["eta-s-min", "--dilution", "0.001", "0.01", "0.1", "--inv-a-min", "-1",
         "--inv-a-max", "0.9", "--points", "200", "--order", "2"], d / "fig5_eta_s_min.csv")
    for dil in ("0.001", "0.01", "0.1"):
        run(["eta-s-min", "--hard-sphere", "--dilution", dil, "--order", "2"],
            d / f"fig5_hard_sphere_{dil}.csv")
