#!/usr/bin/env python3
"""Print K, R and both spectral oracles for the ten reference surfaces."""

import cmath
import math

from erap.manifolds import boy, cylinder, disc, klein, moebius, projective_sphere, rectangle, sphere, torus
from erap.spectral import heat_kernel_mass, mass_report, sharp_mass

SURFACES = [
    torus(1j),
    torus(cmath.exp(1j * math.pi / 3)),
    rectangle(1),
    cylinder(1),
    moebius(1),
    klein(1),
    boy(1),
    disc(),
    sphere(),
    projective_sphere(),
]


def main():
    print(f"{'surface':32s} {'K':>12s} {'R':>12s} {'heat':>12s} {'sharp':>12s}  method")
    for spec in SURFACES:
        rep = mass_report(spec)
        heat = heat_kernel_mass(spec).extrapolated
        sharp = sharp_mass(spec).extrapolated
        print(f"{str(spec):32s} {rep.kronecker_mass:12.7f} {rep.robin_mass:12.7f} {heat:12.7f} {sharp:12.7f}  {rep.method}")


if __name__ == "__main__":
    main()
