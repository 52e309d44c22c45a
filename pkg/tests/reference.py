"""Brute-force scalar FAFC evaluator used as an oracle for the vectorized scheduler.

Plain Python lists and floats only; nothing is imported from the package.
Receivers are served from the head of a queue of live receivers while
transmitting power remains; charged receivers go to the tail.
"""

R44 = ((-3.112, 1.439, 120.4, -7.452, 0.1543), (1.0, -9.881, 44.84, -5.49, 0.4007))
R45 = ((-21.65, 141.2, -11.5, 0.1526, 0.008358), (1.0, -10.7, 41.01, -1.509, -0.3997, 0.0362))
FULL = 6.3865


def poly(coeffs, x):
    y = 0.0
    for c in coeffs:
        y = y * x + c
    return y


def wanted_power(fit, energy):
    if energy >= FULL:
        return 0.0
    p = poly(fit[0], energy) / poly(fit[1], energy)
    return p if p > 0.0 else 0.0


def reference_run(socs, transmit_power, discharges, variant="R44", strict=True, efficiency=0.5,
                  rotate_partial=True, slot_seconds=10.0):
    """Returns dict(soc=[[...] per slot], alloc=..., discharge=..., queues=[...], reason=str).

    ``discharges[s][j]`` is the discharge of the j-th live receiver in queue order during slot s;
    the run length limit is ``len(discharges)`` slots.
    """
    fit = R44 if variant == "R44" else R45
    n = len(socs)
    energy = [s * FULL for s in socs]
    alive = [True] * n
    queue = list(range(n))
    slot_hours = slot_seconds / 3600.0
    out = {"soc": [], "alloc": [], "discharge": [], "queues": [], "reason": None}

    if all(e >= FULL for e in energy):
        out["reason"] = "all_fully_charged"
        return out

    for s, row in enumerate(discharges):
        live = [i for i in queue if alive[i]]
        out["queues"].append(tuple(i + 1 for i in live))
        given = [0.0] * n
        drain = [0.0] * n
        for j, i in enumerate(live):
            drain[i] = row[j]
        left = transmit_power
        charged = []
        for i in live:
            ask = wanted_power(fit, energy[i]) / efficiency
            if left >= ask:
                give = ask
            elif left > 0.0:
                give = left
            else:
                give = 0.0
            left = left - give
            given[i] = give
            if give > 0.0 and (rotate_partial or give >= ask):
                charged.append(i)
        for i in live:
            e = energy[i] + (given[i] * efficiency - drain[i]) * slot_hours
            if e <= 0.0:
                alive[i] = False
                e = 0.0
            energy[i] = min(e, FULL)
        queue = [i for i in queue if i not in charged] + [i for i in queue if i in charged]
        out["soc"].append([e / FULL for e in energy])
        out["alloc"].append(given)
        out["discharge"].append(drain)

        if strict and not all(alive):
            out["reason"] = "battery_exhausted"
        elif all(e >= FULL for e in energy):
            out["reason"] = "all_fully_charged"
        elif s + 1 == len(discharges):
            out["reason"] = "time_limit_reached"
        if out["reason"]:
            break
    return out
