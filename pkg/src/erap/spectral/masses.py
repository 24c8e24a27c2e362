"""Closed-form Kronecker and Robin masses for every manifold family."""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from erap.manifolds import ManifoldSpec
from erap.spectral.special import EULER_GAMMA, digamma, jacobi_theta1, log_abs_eta, log_dedekind_eta

# R - K, universal for unit-area surfaces
MORPURGO_SHIFT = (math.log(2) - EULER_GAMMA) / (2 * math.pi)

_G2PI = EULER_GAMMA / (2 * math.pi)
_FOUR_PI = 4 * math.pi


@dataclass(frozen=True)
class MassReport:
    manifold: ManifoldSpec
    kronecker_mass: float
    robin_mass: float
    method: str  # "closed-form", "Morpurgo-derived" or "numeric-oracle"

    def to_dict(self):
        return {
            "spec": self.manifold.to_dict(),
            "K": self.kronecker_mass,
            "R": self.robin_mass,
            "method": self.method,
        }


def _leta(tau):
    """ln eta(tau) for purely imaginary tau (real there)."""
    return log_dedekind_eta(tau).real


def _kronecker_rectangle(rho):
    return _G2PI - (math.log(4 * math.pi**2 * rho) + 4 * _leta(1j * rho)) / _FOUR_PI + (rho + 1 / rho) / 12


def _kronecker_torus(tau):
    return _G2PI - (math.log(16 * math.pi**2 * tau.imag) + 4 * log_abs_eta(tau)) / _FOUR_PI


def _kronecker_cylinder(rho):
    return _G2PI - math.log(16 * math.pi**2 * rho) / _FOUR_PI - _leta(2j * rho) / math.pi + 1 / (24 * rho)


def _kronecker_moebius(rho):
    ratio = 3 * _leta(1j * rho) - _leta(2j * rho) - _leta(0.5j * rho)
    return _G2PI - math.log(4 * math.pi**2 * rho) / _FOUR_PI - ratio / math.pi + 1 / (24 * rho)


def _kronecker_klein(rho):
    return _G2PI - math.log(4 * math.pi**2 * rho) / _FOUR_PI - _leta(0.5j * rho) / math.pi - 1 / (12 * rho)


def _kronecker_boy(rho):
    return _G2PI - math.log(4 * math.pi**2 * rho) / _FOUR_PI - _leta(1j * rho) / math.pi - (rho + 1 / rho) / 24


def _robin_cone(p):
    """Robin mass of the unit-area sector of angle 2 pi / p with glued radii."""
    return (
        -math.log(math.pi) / _FOUR_PI
        + (5 * p - 2) / (8 * math.pi)
        + (EULER_GAMMA + digamma(1 / p)) / (2 * math.pi)
        - math.log(p) / _FOUR_PI
    )


def _kronecker_lune(k, bc):
    arg = math.pi * k if bc == "neumann" else 4 * math.pi * k
    return (k - 2 - math.log(arg)) / _FOUR_PI + _G2PI


def _torus_robin(tau):
    return -(math.log(4 * math.pi**2 * tau.imag) + 4 * log_abs_eta(tau)) / _FOUR_PI


def kronecker_mass(spec):
    """Kronecker mass K of a unit-area manifold."""
    fam = spec.family
    if fam == "rectangle":
        return _kronecker_rectangle(spec.rho)
    if fam == "torus":
        return _kronecker_torus(spec.tau)
    if fam == "cylinder":
        return _kronecker_cylinder(spec.rho)
    if fam == "moebius":
        return _kronecker_moebius(spec.rho)
    if fam == "klein":
        return _kronecker_klein(spec.rho)
    if fam == "boy":
        return _kronecker_boy(spec.rho)
    if fam == "cone":
        return _robin_cone(spec.p) - MORPURGO_SHIFT
    if fam == "disc":
        return _robin_cone(1) - MORPURGO_SHIFT
    if fam == "sphere":
        return -(1 + math.log(4 * math.pi)) / _FOUR_PI + _G2PI
    if fam == "projective_sphere":
        return -math.log(2 * math.pi) / _FOUR_PI + _G2PI - 1 / (2 * math.pi)
    if fam == "lune":
        return _kronecker_lune(spec.k, spec.bc)
    raise ValueError(f"no Kronecker mass for family {fam!r}")


def robin_mass(spec):
    """Robin mass R; closed form for torus, cone and disc, otherwise K + shift."""
    return mass_report(spec).robin_mass


def mass_report(spec):
    fam = spec.family
    K = kronecker_mass(spec)
    if fam == "torus":
        return MassReport(spec, K, _torus_robin(spec.tau), "closed-form")
    if fam in ("cone", "disc"):
        return MassReport(spec, K, _robin_cone(spec.p if fam == "cone" else 1), "closed-form")
    return MassReport(spec, K, K + MORPURGO_SHIFT, "Morpurgo-derived")


# ---------------------------------------------------------------------------
# torus Green function oracle


def torus_green(z, tau):
    """Zero-mean Green function of the unit-area torus R^2 / omega(tau) Z^2.

    ``z`` is the physical displacement x - y written as a complex number.
    G(z) = -ln|theta_1(w; tau)| / (2 pi) + (Im z)^2 / 2, where w is the
    displacement in lattice units (w = z sqrt(Im tau)).
    """
    tau = complex(tau)
    return _raw_green(z, tau) + _green_offset(tau)


_OFFSETS = {}


def _green_offset(tau):
    key = (tau.real, tau.imag)
    if key not in _OFFSETS:
        _OFFSETS[key] = -_raw_green_mean(tau)
    return _OFFSETS[key]


def _raw_green(z, tau):
    w = complex(z) * math.sqrt(tau.imag)
    return -math.log(abs(jacobi_theta1(w, tau))) / (2 * math.pi) + 0.5 * complex(z).imag ** 2


def _raw_green_mean(tau):
    """Cell average of the un-shifted Green function, by quadrature.

    The singular part -ln|z| / (2 pi) is integrated analytically over the
    centred parallelogram (split into four triangles with a vertex at the
    origin); only the smooth remainder is integrated numerically.
    """
    rho = tau.imag
    w1 = 1 / math.sqrt(rho)
    w2 = complex(tau.real, tau.imag) / math.sqrt(rho)
    centre = -(w1 + w2) / 2

    def smooth(s, t):
        z = centre + s * w1 + t * w2
        if abs(z) < 1e-14:
            return _regular_limit(tau)
        return _raw_green(z, tau) + math.log(abs(z)) / (2 * math.pi)

    val, _ = integrate.dblquad(lambda t, s: smooth(s, t), 0, 1, 0, 1, epsabs=1e-13, epsrel=1e-13)
    corners = [centre, centre + w1, centre + w1 + w2, centre + w2]
    log_int = sum(_triangle_log_integral(corners[i], corners[(i + 1) % 4]) for i in range(4))
    return val - log_int / (2 * math.pi)


def _triangle_log_integral(p, q):
    """Integral of ln|z| over the triangle (0, p, q), by the polar formula."""
    # parametrize the far edge; integral = int dphi int_0^{R(phi)} r ln r dr
    a1, a2 = cmath.phase(p), cmath.phase(q)
    dphi = (a2 - a1 + math.pi) % (2 * math.pi) - math.pi
    # distance from origin to the edge line and angle of its foot
    e = q - p
    h = abs((p.conjugate() * e).imag) / abs(e)
    foot = cmath.phase(p - e * ((p.conjugate() * e).real / abs(e) ** 2))

    def radial(phi):
        R = h / math.cos(phi - foot)
        return 0.5 * R * R * (math.log(R) - 0.5)

    val, _ = integrate.quad(radial, a1, a1 + dphi, epsabs=1e-14, epsrel=1e-14)
    return val


def _regular_limit(tau):
    # lim_{z->0} raw G + ln|z|/(2 pi) = -ln(sqrt(rho) |theta_1'(0)|)/(2 pi)
    return -math.log(math.sqrt(tau.imag) * 2 * math.pi * math.exp(3 * log_abs_eta(tau))) / (2 * math.pi)


def torus_robin_numeric(tau, basepoint=0j, radii=(1e-3, 5e-4, 2.5e-4)):
    """Robin mass of Torus(tau) by extracting the coincident-point limit numerically.

    Evaluates G(y + z, y) + ln|z| / (2 pi) with the theta_1 Green function at
    small |z| (several directions), Richardson-extrapolates in |z|^2, and
    subtracts the numerically integrated cell mean of G.  ``basepoint`` is
    the point y; the result does not depend on it.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("Im(tau) must be positive")
    vals = []
    for r in radii:
        acc = []
        for ang in (0.3, 1.4, 2.9):
            z = r * cmath.exp(1j * ang)
            x = basepoint + z
            # the Green function depends on x - y only
            disp = x - basepoint
            acc.append(_raw_green(disp, tau) + math.log(abs(disp)) / (2 * math.pi))
        vals.append(sum(acc) / len(acc))
    r2 = np.array(radii) ** 2
    # leading correction is O(|z|^2): linear fit in r^2
    coef = np.polyfit(r2, vals, 1)
    limit = float(coef[-1])
    return limit - _raw_green_mean(tau)


def tau_scan(re_values, im_values):
    """Table of (Re tau, Im tau, K_T(tau)) over a rectangular grid."""
    rows = []
    for im in im_values:
        for re in re_values:
            tau = complex(re, im)
            rows.append((float(re), float(im), _kronecker_torus(tau)))
    return rows


def fundamental_region_grid(n=200, im_max=1.5):
    """n x n grid covering the canonical region |Re tau| <= 1/2, |tau| >= 1."""
    re = np.linspace(-0.5, 0.5, n)
    im = np.linspace(math.sqrt(3) / 2 - 0.05, im_max, n)
    return re, im


def tau_scan_argmin(rows):
    """Minimizer of K_T over the scanned points inside the fundamental region."""
    best = None
    for re, im, K in rows:
        if abs(complex(re, im)) < 1 - 1e-12 or abs(re) > 0.5 + 1e-12:
            continue
        if best is None or K < best[2]:
            best = (re, im, K)
    return best
