"""Regenerate the bundled sample CSVs consumed by the plots package.

Tiny-scale sweeps: these exist so the figure pipeline has real files to
render, not to reproduce the full experiments.
"""

import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
OUT = ROOT / "plots" / "sample_data"


def eqlab(*args):
    subprocess.run([sys.executable, "-m", "eqlab.cli", *args], check=True)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    common = ["--seeds", "3", "--m", "256", "--steps", "600", "--eval-every", "150",
              "--test-size", "1000"]
    for path in OUT.glob("*.csv"):
        path.unlink()

    eqlab("sweep", "--task", "sd", "--gamma", "1.0", "0.01", "lazy",
          "--L", "2", "4", "8", "16", "--d", "32", *common,
          "--out", str(OUT / "fig1c.csv"),
          "--overlay", str(OUT / "fig1c_theory.csv"))
    eqlab("sweep", "--task", "sd", "--gamma", "1.0", "lazy",
          "--L", "16", "--d", "16", "64", "256", *common,
          "--out", str(OUT / "fig1bf.csv"))
    eqlab("sweep", "--task", "sd_noisy", "--gamma", "1.0", "0.01",
          "--L", "4", "16", "--d", "32", "--sigma2", "0.1", "0.5", *common,
          "--out", str(OUT / "fig2.csv"))
    eqlab("bayes", "--prior", "generalizing", "--sigma2", "0.1", "--d", "32",
          "--n", "20000", "--csv", "--out", str(OUT / "fig2_bayes.csv"))
    eqlab("sweep", "--task", "psvrt", "--gamma", "1.0", "0.01",
          "--L", "8", "32", "--d", "3", "--alpha0", "0.5", *common,
          "--out", str(OUT / "fig3bc.csv"))
    eqlab("sweep", "--task", "pentomino", "--gamma", "1.0", "0.01",
          "--L", "6", "14", "--d", "2", "--alpha0", "0.5", *common,
          "--out", str(OUT / "fig3ef.csv"))
    eqlab("kernel", "--grid", "41", "--out", str(OUT / "kernel.csv"))
    eqlab("margin", "--L", "64", "--d", "8", "--P", "2000",
          "--out", str(OUT / "margin.csv"))

    # alignment report of a small rich run
    weights = OUT / "rich_weights.bin"
    eqlab("train", "--gamma", "1.0", "--L", "8", "--d", "32", "--m", "256",
          "--steps", "800", "--eval-every", "200", "--test-size", "1000",
          "--save-weights", str(weights))
    eqlab("analyze", "--checkpoint", str(weights), "--out", str(OUT / "analyze_rich.csv"))
    weights.unlink()
    (OUT / "margin.eigvals.csv").unlink(missing_ok=True)
    print("sample data written to", OUT)


if __name__ == "__main__":
    main()
