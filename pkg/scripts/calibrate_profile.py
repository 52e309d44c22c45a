"""Search CC-CV profile parameters that minimize the larger of the two fit RMSEs.

The synthesized profile stands in for measured charging data, so its stage
timing and CC-stage shape are free.  This prints the best parameters found by
Nelder-Mead from a few starting points; the package defaults came from a run
of this script.

    python scripts/calibrate_profile.py
"""

import argparse
from dataclasses import replace

import numpy as np
from scipy.optimize import minimize

from fafc.battery import FITS, ProfileParams, fit_rmse, standard_pairs, synthesize_cc_cv_profile
from fafc.errors import ConfigError

NAMES = ("trickle_hours", "cc_hours", "cc_voltage_tau_hours", "cc_current_rise_hours")


def score(x, base: ProfileParams, linear: bool) -> float:
    values = dict(zip(NAMES, x))
    if linear:
        values["cc_voltage_tau_hours"] = None
        values["cc_current_rise_hours"] = 0.0
    elif values["cc_voltage_tau_hours"] <= 0.01 or values["cc_current_rise_hours"] < 0:
        return 10.0
    try:
        pairs = standard_pairs(synthesize_cc_cv_profile(params=replace(base, **values)))
    except ConfigError:
        return 10.0
    return max(fit_rmse(f, pairs) for f in FITS.values())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--linear", action="store_true", help="keep the CC voltage ramp linear")
    ap.add_argument("--starts", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    base = ProfileParams()
    rng = np.random.default_rng(args.seed)
    x0 = np.array([base.trickle_hours, base.cc_hours, base.cc_voltage_tau_hours or 0.37,
                   base.cc_current_rise_hours])
    best = None
    for i in range(args.starts):
        start = x0 if i == 0 else x0 * rng.uniform(0.7, 1.3, x0.size)
        res = minimize(score, start, args=(base, args.linear), method="Nelder-Mead",
                       options=dict(xatol=1e-4, fatol=1e-6, maxiter=2000))
        print(f"start {i}: max rmse {res.fun:.5f} at " + " ".join(f"{n}={v:.4f}" for n, v in zip(NAMES, res.x)))
        if best is None or res.fun < best.fun:
            best = res
    params = replace(base, **dict(zip(NAMES, best.x)))
    if args.linear:
        params = replace(params, cc_voltage_tau_hours=None, cc_current_rise_hours=0.0)
    pairs = standard_pairs(synthesize_cc_cv_profile(params=params))
    print("best:", " ".join(f"{name}={fit_rmse(f, pairs):.5f}" for name, f in FITS.items()))


if __name__ == "__main__":
    main()
