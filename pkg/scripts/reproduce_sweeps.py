"""Run the default time and power sweeps, write their CSVs and (optionally) plots.

    python scripts/reproduce_sweeps.py --out results --trials 200 --plot
"""

import argparse
import logging
import time
from pathlib import Path

from fafc.harness import SweepConfig, emit_csv, lookup, power_sweep, time_sweep, write_gnuplot

log = logging.getLogger("reproduce")


def crossover(results, variant):
    ns = sorted({r.n_receivers for r in results})
    d = [lookup(results, n_receivers=n, checkpoint_hours=3.0, variant=variant).mean_soc
         - lookup(results, n_receivers=n, checkpoint_hours=1.0, variant=variant).mean_soc for n in ns]
    for i in range(1, len(ns)):
        if d[i] < 0 <= d[i - 1]:
            return ns[i - 1] + (ns[i] - ns[i - 1]) * d[i - 1] / (d[i - 1] - d[i])
    return float("nan")


def plot(results, kind, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    series_key = (lambda r: (r.transmit_power, r.variant)) if kind == "power" else (
        lambda r: (r.checkpoint_hours, r.variant))
    for key in sorted({series_key(r) for r in results}):
        rows = sorted((r for r in results if series_key(r) == key), key=lambda r: r.n_receivers)
        label = f"{key[0]:g} {'W' if kind == 'power' else 'h'} {key[1]}"
        ax.errorbar([r.n_receivers for r in rows], [r.mean_soc for r in rows],
                    yerr=[2 * r.sem for r in rows], marker="o", ms=3, capsize=2, label=label)
    ax.set_xlabel("receiver number")
    ax.set_ylabel("average SOC")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--ideal-link", action="store_true", help="no link loss after the transmitter")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args.out.mkdir(parents=True, exist_ok=True)

    common = dict(trials=args.trials, seed=args.seed, ideal_link=args.ideal_link)
    for kind, run in (("time", time_sweep), ("power", power_sweep)):
        variants = ("R44", "R45") if kind == "time" else ("R44",)
        t0 = time.perf_counter()
        results = run(SweepConfig.defaults(kind, variants=variants, **common))
        csv_path = emit_csv(results, args.out / f"{kind}_sweep.csv", kind)
        write_gnuplot(results, csv_path, kind)
        log.info("%s sweep: %d rows in %.1f s -> %s", kind, len(results), time.perf_counter() - t0, csv_path)
        if kind == "time":
            for v in variants:
                log.info("  3h/1h crossover (%s): %.2f receivers", v, crossover(results, v))
        else:
            for p in (40.0, 60.0, 80.0, 100.0):
                log.info("  N=10, %g W: mean SOC %.4f", p, lookup(results, n_receivers=10, transmit_power=p).mean_soc)
        if args.plot:
            plot(results, kind, args.out / f"{kind}_sweep.png")


if __name__ == "__main__":
    main()
