#!/usr/bin/env python3
"""Builds the Kron-reduced classical 9-bus network file used by the multimachine model.

Network, load and power-flow data are the standard WSCC 3-machine 9-bus values
(100 MVA base). Loads are converted to constant admittances at their pre-fault
voltages and the network is reduced to the generator internal nodes. The
fault-on matrix grounds the terminal bus of generator 3.
"""
import cmath
import math
import sys

import numpy as np

BRANCHES = [  # from, to, r, x, total line charging
    (1, 4, 0.0, 0.0576, 0.0), (2, 7, 0.0, 0.0625, 0.0), (3, 9, 0.0, 0.0586, 0.0),
    (4, 5, 0.010, 0.085, 0.176), (4, 6, 0.017, 0.092, 0.158),
    (5, 7, 0.032, 0.161, 0.306), (6, 9, 0.039, 0.170, 0.358),
    (7, 8, 0.0085, 0.072, 0.149), (8, 9, 0.0119, 0.1008, 0.209),
]
LOADS = {5: (1.25, 0.50), 6: (0.90, 0.30), 8: (1.00, 0.35)}
VOLTAGES = {1: (1.040, 0.0), 2: (1.025, 9.3), 3: (1.025, 4.7),
            5: (0.996, -4.0), 6: (1.013, -3.7), 8: (1.016, 0.7)}
GEN_PQ = [(0.716, 0.270), (1.630, 0.067), (0.850, -0.109)]
XD_PRIME = [0.0608, 0.1198, 0.1813]
H_SECONDS = [23.64, 6.40, 3.01]
OMEGA_S = 120.0 * math.pi
DAMPING_RATE = 1.0  # D_i / M_i in 1/s
FAULT_GEN = 3
FAULT_DURATION = 0.2


def bus_admittance():
    y = np.zeros((9, 9), complex)
    for i, j, r, x, b in BRANCHES:
        i, j = i - 1, j - 1
        s = 1.0 / complex(r, x)
        y[i, i] += s + 0.5j * b
        y[j, j] += s + 0.5j * b
        y[i, j] -= s
        y[j, i] -= s
    for bus, (p, q) in LOADS.items():
        v = VOLTAGES[bus][0]
        y[bus - 1, bus - 1] += complex(p, -q) / v**2
    return y


def reduce_to_internal(ybus, grounded=()):
    keep_bus = [b for b in range(9) if b not in grounded]
    n = len(keep_bus)
    ya = np.zeros((n + 3, n + 3), complex)
    ya[:n, :n] = ybus[np.ix_(keep_bus, keep_bus)]
    for g in range(3):
        s = 1.0 / (1j * XD_PRIME[g])
        e = n + g
        ya[e, e] += s
        if g in grounded:
            continue
        t = keep_bus.index(g)
        ya[t, t] += s
        ya[e, t] -= s
        ya[t, e] -= s
    a = ya[n:, n:]
    b = ya[n:, :n]
    c = ya[:n, n:]
    d = ya[:n, :n]
    return a - b @ np.linalg.solve(d, c)


def main(out):
    emf = []
    for g, (p, q) in enumerate(GEN_PQ):
        v = cmath.rect(VOLTAGES[g + 1][0], math.radians(VOLTAGES[g + 1][1]))
        i = np.conj(complex(p, q) / v)
        emf.append(v + 1j * XD_PRIME[g] * i)
    mag = [abs(e) for e in emf]
    ang = [cmath.phase(e) for e in emf]
    ybus = bus_admittance()
    # Exactly symmetric; the reader mirrors the upper triangle.
    pre = reduce_to_internal(ybus)
    pre = 0.5 * (pre + pre.T)
    fault = reduce_to_internal(ybus, grounded=(FAULT_GEN - 1,))
    fault = 0.5 * (fault + fault.T)
    pm = [sum(mag[i] * mag[j] * (pre[i, j].real * math.cos(ang[i] - ang[j]) +
                                 pre[i, j].imag * math.sin(ang[i] - ang[j]))
              for j in range(3)) for i in range(3)]
    lines = ["# Classical 3-machine 9-bus system, Kron-reduced to generator internal nodes.",
             "# Generated by tools/gen_ieee9_classical.py; per-unit on 100 MVA base.",
             "# H column holds 2H/omega_s (s^2/rad), D = 1.0 * (2H/omega_s).",
             "GEN 3"]
    for g in range(3):
        m = 2.0 * H_SECONDS[g] / OMEGA_S
        lines.append(f"G {g + 1} {m:.17g} {DAMPING_RATE * m:.17g} {pm[g]:.17g} {mag[g]:.17g}")
    for name, y in (("", pre), ("YFAULT", fault)):
        if name:
            lines.append(name)
        for i in range(3):
            for j in range(i, 3):
                lines.append(f"Y {i + 1} {j + 1} {y[i, j].real:.17g} {y[i, j].imag:.17g}")
    lines.append(f"FAULT {FAULT_GEN} {FAULT_DURATION}")
    with open(out, "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "ieee9_classical.txt")
