"""Regenerate every committed fixture in this directory from scratch.

    python3 fixtures/make_fixtures.py [out_dir]

All artifacts are produced through the public CLI (plus write_gfn for the
cosine wave data, which no generator family emits), with fixed seeds and
default tolerance profiles, so a rerun must reproduce the committed bytes
exactly.
"""

import json
import os
import sys

import numpy as np

from hypfl import GridFunction, GridSpec, write_gfn
from hypfl.cli import dispatch

TWO_PI = 2.0 * np.pi

WAVE_PROBLEM = {
    "order": 2,
    "coefficients": [
        {"j": 1, "kind": "const", "data": {"value": 0.0}},
        {"j": 2, "kind": "const", "data": {"value": -39.47841760435743}},  # -(2 pi)^2
    ],
    "grid": {"d": 1, "n": 64},
    "T": 1.0,
    "data_files": ["wave_f0.gfn", "wave_f1.gfn"],
}

VARCOEF_PROBLEM = {
    "order": 1,
    "coefficients": [
        {
            "j": 1,
            "kind": "trigpoly",
            "data": {
                "re": {"const": 1.0, "cos": [[1, 0.3]]},
                "im": {"const": 0.005, "sin": [[1, 0.0025]]},
                "scale": [-6.283185307179586, 0.0],        # -2 pi
            },
        }
    ],
    "grid": {"d": 1, "n": 256},
    "T": 0.5,
    "data_files": ["varcoef_f0.gfn"],
}


def run(*argv):
    code = dispatch(list(argv))
    if code != 0:
        raise SystemExit(f"fixture command exited {code}: {argv}")


def dump_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)

    def j(name):
        return os.path.join(out_dir, name)

    # --- norm of a bare lattice mode -------------------------------------
    run("gen", "--kind", "single-mode", "--k", "3", "--n", "64", "--d", "1",
        "--out", j("single_mode_k3.gfn"))
    run("norm", "--space", "fl", "--p", "1", "--s", "0",
        "--input", j("single_mode_k3.gfn"), "--report", j("norm_report.json"))

    # --- constant-coefficient wave problem --------------------------------
    g = GridSpec(1, 64)
    x = g.axis_points()
    write_gfn(j("wave_f0.gfn"), GridFunction(g, np.cos(TWO_PI * x) + 0j))
    write_gfn(j("wave_f1.gfn"), GridFunction(g, np.zeros(64, dtype=complex)))
    dump_json(j("wave.json"), WAVE_PROBLEM)
    run("solve", "--config", j("wave.json"), "--t", "0.125",
        "--out", j("wave_v.gfn"), "--report", j("wave_report.json"),
        "--norms", "2:0,1:0.5")

    # --- variable-coefficient transport with light damping ----------------
    run("gen", "--kind", "dyadic-bump", "--k", "16", "--n", "256", "--d", "1",
        "--out", j("varcoef_f0.gfn"))
    dump_json(j("varcoef.json"), VARCOEF_PROBLEM)
    run("solve", "--config", j("varcoef.json"), "--t", "0.25",
        "--out", j("varcoef_v.gfn"), "--report", j("varcoef_report.json"))

    # --- order-threshold scan for the warped-linear phase -----------------
    run("probe", "threshold", "--phase", "torus-diffeo", "--p", "1",
        "--m-grid=-0.7,-0.5,-0.3",
        "--report", j("threshold_report.json"), "--csv", j("threshold_scan.csv"))

    # --- embedding-failure sweep ------------------------------------------
    run("probe", "embedding", "--which", "besov", "--p", "1", "--q", "1",
        "--r", "1", "--s", "0", "--report", j("embedding_report.json"))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__)))
