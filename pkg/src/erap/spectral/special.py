"""Special functions: Dedekind eta, Jacobi theta_1, digamma.

All routines are scalar and double precision.  ``log_dedekind_eta`` exists
because eta underflows for Im(tau) beyond a few hundred, while the masses only
ever need its logarithm.
"""

import cmath
import math

EULER_GAMMA = 0.57721566490153286060651209008240243

# Im(tau) threshold after modular reduction; at 0.8 |q| < 7e-3 and the
# pentagonal series needs at most ~6 terms.
_ETA_IM_MIN = 0.8
_SERIES_TOL = 1e-16


def _check_upper(tau):
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError(f"tau must lie in the upper half plane, got {tau!r}")
    return tau


def _reduce(tau):
    """Move tau to Im >= 0.8 using tau -> tau + n and tau -> -1/tau.

    Returns (tau', log_factor) with log eta(tau) = log_factor + log eta(tau').
    """
    log_factor = 0j
    for _ in range(10_000):
        n = math.floor(tau.real + 0.5)
        if n:
            # eta(tau) = exp(i pi n / 12) eta(tau - n)
            log_factor += 1j * math.pi * n / 12
            tau = tau - n
        if tau.imag >= _ETA_IM_MIN or abs(tau) >= 1.0:
            break
        # eta(tau) = eta(-1/tau) / sqrt(-i tau)
        log_factor -= 0.5 * cmath.log(-1j * tau)
        tau = -1.0 / tau
    return tau, log_factor


def _pentagonal_sum(tau):
    """sum_n (-1)^n q^{n(3n-1)/2}, q = exp(2 pi i tau)."""
    total = 1.0 + 0j
    n = 1
    while True:
        sign = -1.0 if n % 2 else 1.0
        e1 = n * (3 * n - 1) // 2
        e2 = n * (3 * n + 1) // 2
        t = sign * (cmath.exp(2j * math.pi * tau * e1) + cmath.exp(2j * math.pi * tau * e2))
        total += t
        if abs(cmath.exp(2j * math.pi * tau * e2)) < _SERIES_TOL:
            break
        n += 1
    return total


def log_dedekind_eta(tau):
    """Complex logarithm of eta(tau) (branch chosen by the reduction path)."""
    tau = _check_upper(tau)
    if tau.imag >= _ETA_IM_MIN:
        return 1j * math.pi * tau / 12 + cmath.log(_pentagonal_sum(tau))
    red, log_factor = _reduce(tau)
    return log_factor + 1j * math.pi * red / 12 + cmath.log(_pentagonal_sum(red))


def dedekind_eta(tau):
    """Dedekind eta function eta(tau) = q^{1/24} prod (1 - q^n), q = e^{2 pi i tau}.

    Accurate to ~1e-13 relative for moderate Im(tau); underflows to zero
    for very large Im(tau), use :func:`log_dedekind_eta` there.
    """
    return cmath.exp(log_dedekind_eta(tau))


def log_abs_eta(tau):
    """ln |eta(tau)|, safe for any Im(tau) > 0."""
    return log_dedekind_eta(tau).real


def jacobi_theta1(z, tau, *, derivative=False):
    """theta_1(z; tau) with period 1 in z and nome q = exp(i pi tau).

    theta_1(z) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z), so that
    theta_1'(0) = 2 pi eta(tau)^3.  With ``derivative=True`` returns d/dz.
    """
    tau = _check_upper(tau)
    z = complex(z)
    total = 0j
    n = 0
    while True:
        e = (n + 0.5) ** 2
        qn = cmath.exp(1j * math.pi * tau * e)
        k = (2 * n + 1) * math.pi
        term = qn * (k * cmath.cos(k * z) if derivative else cmath.sin(k * z))
        total += (-1) ** n * term
        # sin/cos grow like exp(k |Im z|); stop once the envelope is negligible
        envelope = abs(qn) * math.exp(k * abs(z.imag)) * (k if derivative else 1.0)
        if envelope < _SERIES_TOL * max(abs(total), 1e-300) and n > 2:
            break
        n += 1
        if n > 10_000:
            raise ArithmeticError("theta_1 series did not converge")
    return 2 * total


def digamma(x):
    """psi(x) for real x > 0 via upward recurrence and the asymptotic series."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"digamma implemented for x > 0 only, got {x}")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # Bernoulli terms B_{2k}/(2k x^{2k})
    series = inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 * (1 / 240 - inv2 * (1 / 132 - inv2 * 691 / 32760)))))
    return acc + math.log(x) - 0.5 / x - series


def digamma_rational(p, q):
    """psi(p/q) for integers 0 < p < q, by Gauss's digamma theorem.

    A finite cosine/log-sine sum; used as an independent check on
    :func:`digamma` and in the sector Robin mass.
    """
    if not 0 < p < q:
        raise ValueError("need 0 < p < q")
    total = -EULER_GAMMA - math.log(2 * q) - 0.5 * math.pi / math.tan(math.pi * p / q)
    for k in range(1, (q - 1) // 2 + 1):
        total += 2 * math.cos(2 * math.pi * p * k / q) * math.log(math.sin(math.pi * k / q))
    return total
