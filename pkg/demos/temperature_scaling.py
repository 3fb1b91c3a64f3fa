"""38 C and 50 C desk runs compared on the Arrhenius-scaled clock.

Both runs use the same kinetic parameters and step count; the 50 C run
covers a proportionally shorter time, so row k of one matches row k of
the other after scaling.

    python demos/temperature_scaling.py [--steps N]
"""

import argparse
import math

from asrmeso import config as C
from asrmeso.scenario import run_scenario

T_38 = 600.0  # days, past saturation at 38 C


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=8000)
    args = ap.parse_args()

    base = C.load_preset("asr-cpt-38C-desk")
    E_a, R = C.get(base, "kinetics.E_a"), C.get(base, "kinetics.R")
    factor = math.exp(E_a / R * (1 / 311.15 - 1 / 323.15))
    runs = {}
    for name, T_real in (("asr-cpt-38C-desk", T_38), ("asr-acpt-50C-desk", T_38 / factor)):
        cfg = C.set_path(C.load_preset(name), "solver.T_real", T_real)
        runs[name] = run_scenario(C.set_path(cfg, "solver.n_steps", args.steps)).series
    a, b = runs.values()

    def mean3(ts):
        return (ts["eps_x"] + ts["eps_y"] + ts["eps_z"]) / 3

    print(f"rate factor 50 C / 38 C = {factor:.4f}")
    print(f"final gel strain  38 C {a['mean_eps_gel'][-1]:.4e}  50 C {b['mean_eps_gel'][-1]:.4e}")
    print(" t38 [d]  t50 [d]   exp 38 C   exp 50 C   ratio")
    ea, eb = mean3(a), mean3(b)
    for i in range(len(a) // 10, len(a), len(a) // 10):
        print(f"{a.t[i]:7.1f}  {b.t[i]:7.1f}  {ea[i]:.3e}  {eb[i]:.3e}  {eb[i] / ea[i]:.3f}")


if __name__ == "__main__":
    main()
