"""Laplace-Beltrami spectra and the two regularized spectral sums.

Flat rectangular families are handled uniformly.  Each is R^2 modulo a
crystallographic group G containing L = 2aZ x 2bZ, with Neumann sides
counted as reflections.  An exponential e_k, k = (m / 2a, n / 2b), spans
an invariant line iff every element of its stabilizer fixes it, i.e.
(-1)^(m alpha + n beta) = 1 for stabilizer elements with translation
(alpha a, beta b).  Summing that indicator over the orbit and dividing by
|G / L| gives exact integer multiplicities.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from erap.spectral.special import EULER_GAMMA

# G / L for the rectangular families, as (s_x, s_y, alpha, beta):
# x -> (s_x x + alpha a, s_y y + beta b)
_COSETS = {
    "rectangle": [(1, 1, 0, 0), (-1, 1, 0, 0), (1, -1, 0, 0), (-1, -1, 0, 0)],
    "cylinder": [(1, 1, 0, 0), (1, 1, 0, 1), (-1, 1, 0, 0), (-1, 1, 0, 1)],
    "moebius": [(1, 1, 0, 0), (-1, 1, 0, 0), (-1, 1, 1, 1), (1, 1, 1, 1)],
    "klein": [(1, 1, 0, 0), (1, 1, 1, 0), (-1, 1, 1, 1), (-1, 1, 0, 1)],
    "boy": [(1, 1, 0, 0), (1, -1, 1, 1), (-1, 1, 1, 1), (-1, -1, 0, 0)],
}

_MERGE_RTOL = 1e-12


@dataclass
class SpectrumStream:
    """Nonzero eigenvalues up to ``cutoff`` with multiplicities, ascending."""

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    cutoff: float

    def __len__(self):
        return len(self.eigenvalues)

    def __iter__(self):
        return zip(self.eigenvalues.tolist(), self.multiplicities.tolist())

    def counting(self, lam):
        """N(lam): eigenvalues <= lam counted with multiplicity (zero mode excluded)."""
        idx = np.searchsorted(self.eigenvalues, lam, side="right")
        return int(self.multiplicities[:idx].sum())


@dataclass
class RegularizationEstimate:
    epsilon: float
    partial: float
    extrapolated: float
    scheme: str  # "heat-kernel p=1" or "sharp"
    ladder: list = field(default_factory=list)  # (eps, constant) pairs used in the fit


def _merge(lams, mults):
    order = np.argsort(lams, kind="stable")
    lams, mults = lams[order], mults[order]
    keep = mults > 0
    lams, mults = lams[keep], mults[keep]
    if len(lams) == 0:
        return lams, mults.astype(np.int64)
    new_group = np.empty(len(lams), dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(lams) > _MERGE_RTOL * lams[1:]
    starts = np.flatnonzero(new_group)
    return lams[starts], np.add.reduceat(mults, starts).astype(np.int64)


def _rectangular_spectrum(family, rho, cutoff):
    cosets = _COSETS[family]
    # lambda = pi^2 (m^2 / rho + n^2 rho)
    m_max = int(math.sqrt(cutoff * rho) / math.pi) + 1
    n_max = int(math.sqrt(cutoff / rho) / math.pi) + 1
    m, n = np.meshgrid(np.arange(m_max + 1), np.arange(n_max + 1), indexing="ij")
    m, n = m.ravel(), n.ravel()
    lam = math.pi**2 * (m * m / rho + n * n * rho)
    sel = (lam > 0) & (lam <= cutoff)
    m, n, lam = m[sel], n[sel], lam[sel]
    total = np.zeros(len(m), dtype=np.int64)
    # sum over the sign variants of (m, n) of the fixed-point character sum
    for sm in (1, -1):
        for sn in (1, -1):
            distinct = ((sm == 1) | (m != 0)) & ((sn == 1) | (n != 0))
            km, kn = sm * m, sn * n
            for sx, sy, al, be in cosets:
                fixes = (sx * km == km) & (sy * kn == kn)
                sign = np.where((km * al + kn * be) % 2 == 0, 1, -1)
                total += np.where(distinct & fixes, sign, 0)
    order = len(cosets)
    if np.any(total % order):
        raise ArithmeticError("non-integer multiplicity; inconsistent group data")
    return _merge(lam, total // order)


def _torus_spectrum(tau, cutoff):
    sigma, rho = tau.real, tau.imag
    # lambda = 4 pi^2 |n + tau m|^2 / rho
    r2 = cutoff * rho / (4 * math.pi**2)
    m_max = int(math.sqrt(r2) / rho) + 1
    lams = []
    for mm in range(-m_max, m_max + 1):
        rem = r2 - (rho * mm) ** 2
        if rem < 0:
            continue
        lo = math.floor(-sigma * mm - math.sqrt(rem)) - 1
        hi = math.ceil(-sigma * mm + math.sqrt(rem)) + 1
        nn = np.arange(lo, hi + 1)
        lam = 4 * math.pi**2 * ((nn + sigma * mm) ** 2 + (rho * mm) ** 2) / rho
        if mm == 0:
            lam = lam[nn != 0]
        lams.append(lam[lam <= cutoff])
    lam = np.concatenate(lams)
    return _merge(lam, np.ones(len(lam), dtype=np.int64))


def _spherical_spectrum(spec, cutoff):
    fam = spec.family
    if fam == "sphere":
        r2 = 1 / (4 * math.pi)
    elif fam == "projective_sphere":
        r2 = 1 / (2 * math.pi)
    else:
        r2 = spec.k / (4 * math.pi)
    nu_max = int(math.sqrt(cutoff * r2)) + 2
    if fam == "lune" and spec.bc == "neumann":
        # cos(mu phi) with mu = j k / 2 and nu = mu + n, each once
        k = spec.k
        nus = []
        for j in range(0, 2 * nu_max // k + 2):
            mu = j * k / 2
            nus.append(mu + np.arange(0, nu_max + 1))
        nu = np.concatenate(nus)
        lam = nu * (nu + 1) / r2
        sel = (lam > 0) & (lam <= cutoff)
        return _merge(lam[sel], np.ones(int(sel.sum()), dtype=np.int64))
    ell = np.arange(1, nu_max + 1)
    if fam == "sphere":
        mult = 2 * ell + 1
    elif fam == "projective_sphere":
        mult = np.where(ell % 2 == 0, 2 * ell + 1, 0)
    else:
        mult = 2 * (ell // spec.k) + 1
    lam = ell * (ell + 1) / r2
    sel = lam <= cutoff
    return _merge(lam[sel].astype(float), mult[sel])


def _bessel_spectrum(spec, cutoff):
    p = spec.p if spec.family == "cone" else 1
    radius = math.sqrt(p / math.pi)
    x_max = math.sqrt(cutoff) * radius
    lams, mults = [], []
    order_idx = 0
    while True:
        nu = order_idx * p
        if nu > x_max + 1:
            break
        # zeros of J'_nu exceed nu, and are spaced by roughly pi
        count = int((x_max - nu) / math.pi) + 3
        if count > 0:
            z = special.jnp_zeros(nu, count)
            z = z[z <= x_max]
            lams.append((z / radius) ** 2)
            mults.append(np.full(len(z), 1 if order_idx == 0 else 2, dtype=np.int64))
        order_idx += 1
    return _merge(np.concatenate(lams), np.concatenate(mults))


def spectrum(spec, cutoff):
    """Exact nonzero Neumann/closed spectrum of the unit-area manifold below ``cutoff``."""
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    fam = spec.family
    if fam in _COSETS:
        lam, mult = _rectangular_spectrum(fam, spec.rho, cutoff)
    elif fam == "torus":
        lam, mult = _torus_spectrum(spec.tau, cutoff)
    elif fam in ("sphere", "projective_sphere", "lune"):
        lam, mult = _spherical_spectrum(spec, cutoff)
    else:
        lam, mult = _bessel_spectrum(spec, cutoff)
    return SpectrumStream(lam, mult, float(cutoff))


def boundary_length(spec):
    """Length of the (Neumann) boundary of the unit-area manifold."""
    fam = spec.family
    if fam == "rectangle":
        a = math.sqrt(spec.rho)
        return 2 * (a + 1 / a)
    if fam in ("cylinder", "moebius"):
        return 2 / math.sqrt(spec.rho)
    if fam == "disc":
        return 2 * math.sqrt(math.pi)
    if fam == "cone":
        return 2 * math.pi * math.sqrt(spec.p / math.pi) / spec.p
    if fam == "lune" and spec.bc == "neumann" and spec.k > 1:
        return 2 * math.pi * math.sqrt(spec.k / (4 * math.pi))
    return 0.0


# heat-kernel truncation: e^{-eps * cutoff} <= e^{-30}, tail well below 1e-10
_TAIL_EXPONENT = 30.0
_LADDER = 9


def _heat_partial(spec_stream, eps):
    lam, mult = spec_stream.eigenvalues, spec_stream.multiplicities
    return math.fsum((mult * np.exp(-eps * lam) / lam).tolist())


def _fit_constant(xs, ys, powers):
    X = np.column_stack([np.asarray(xs) ** p for p in powers])
    coef, *_ = np.linalg.lstsq(X, np.asarray(ys), rcond=None)
    return float(coef[0])


def heat_kernel_mass(spec, eps=0.02, *, stream=None):
    """Heat-kernel (p = 1) regularized sum, extrapolated to eps -> 0.

    For each eps_j = eps * 2^-j (j = 0..8) forms
    sum_l mult e^{-eps_j lam} / lam + ln(eps_j) / (4 pi) + gamma / (4 pi),
    then fits a polynomial in sqrt(eps_j) (boundaries contribute odd
    powers) and returns its constant term.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    ladder = [eps * 2.0**-j for j in range(_LADDER)]
    cutoff = _TAIL_EXPONENT / ladder[-1]
    if stream is None or stream.cutoff < cutoff:
        stream = spectrum(spec, cutoff)
    consts = [_heat_partial(stream, e) + (math.log(e) + EULER_GAMMA) / (4 * math.pi) for e in ladder]
    s = np.sqrt(ladder)
    value = _fit_constant(s, consts, powers=(0, 1, 2, 3, 4))
    partial = _heat_partial(stream, eps)
    return RegularizationEstimate(eps, partial, value, "heat-kernel p=1", list(zip(ladder, consts)))


def sharp_mass(spec, eps=1e-5, *, stream=None, window=64):
    """Sharp-cutoff sum sum_{lam < 1/eps} mult / lam + ln(eps) / (4 pi), extrapolated.

    The raw value oscillates with lattice-point fluctuations, so the
    extrapolated constant is a least-squares fit of
    c + d lam^-1/2 + e lam^-1 over ``window`` log-spaced cutoffs in
    [1/(16 eps), 1/eps].
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    top = 1.0 / eps
    if stream is None or stream.cutoff < top:
        stream = spectrum(spec, top)
    lam, mult = stream.eigenvalues, stream.multiplicities
    cum = np.cumsum(mult / lam)

    def value(L):
        idx = np.searchsorted(lam, L, side="left")
        return (cum[idx - 1] if idx else 0.0) - math.log(L) / (4 * math.pi)

    cuts = np.geomspace(top / 16, top, window)
    vals = [value(L) for L in cuts]
    const = _fit_constant(cuts**-0.5, vals, powers=(0, 1, 2))
    idx = np.searchsorted(lam, top, side="left")
    partial = float(cum[idx - 1]) if idx else 0.0
    return RegularizationEstimate(eps, partial, const, "sharp", list(zip((1 / cuts).tolist(), vals)))
