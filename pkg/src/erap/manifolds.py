"""Unit-area manifolds: specs, fundamental domains, identification groups, distances.

Every family is normalized to unit area.  Points are stored as chart
coordinates in the fundamental domain:

* flat families (rectangle, torus, cylinder, moebius, klein, boy) and the
  disc: Cartesian ``(x, y)``;
* cone sector: polar ``(u, theta)`` with ``theta`` in ``[0, 2 pi / p]``;
* sphere, projective sphere, lune: colatitude/longitude ``(theta, phi)``.

Flat rectangular families share the chart ``[0, a] x [0, b]`` with
``a = sqrt(rho)`` and ``b = 1 / sqrt(rho)``.  For the cylinder, Moebius strip
and Klein bottle the glued (resp. twisted) pair is the *horizontal* pair of
sides, so the identification acts along ``y``; this is the orientation for
which ``spectral.kronecker_mass`` holds as a function of ``rho``.

Distances on flat quotients are minima over group images of the Euclidean
distance.  Image sets are built once per manifold by breadth-first
composition of the side-pairing generators, keeping only images whose tile
lies within one domain diameter of the domain itself (farther images can
never beat the identity image).
"""

import cmath
import json
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np

FLAT_FAMILIES = ("rectangle", "torus", "cylinder", "moebius", "klein", "boy")
FAMILIES = FLAT_FAMILIES + ("cone", "disc", "sphere", "projective_sphere", "lune")
QUOTIENT_FAMILIES = ("torus", "cylinder", "moebius", "klein", "boy", "cone", "projective_sphere", "lune")

_ALIASES = {
    "mobius": "moebius",
    "möbius": "moebius",
    "cone_sector": "cone",
    "conesector": "cone",
    "sector": "cone",
    "projective-sphere": "projective_sphere",
    "projectivesphere": "projective_sphere",
    "rp2": "projective_sphere",
    "spherical_lune": "lune",
}

BOUNDARY_TOL = 1e-12


def _canonical_family(name):
    name = str(name).strip().lower()
    name = _ALIASES.get(name, name)
    if name not in FAMILIES:
        raise ValueError(f"unknown manifold family {name!r}; expected one of {FAMILIES}")
    return name


@dataclass(frozen=True)
class ManifoldSpec:
    """Parametric description of one unit-area manifold.

    Only the parameter relevant to ``family`` is set: ``rho`` for the
    rectangular families, ``tau`` for the torus, ``p`` for the cone sector,
    ``k`` and ``bc`` for the lune.
    """

    family: str
    rho: float = None
    tau: complex = None
    p: int = None
    k: int = None
    bc: str = None

    def __post_init__(self):
        fam = _canonical_family(self.family)
        object.__setattr__(self, "family", fam)
        if fam in ("rectangle", "cylinder", "moebius", "klein", "boy"):
            rho = 1.0 if self.rho is None else float(self.rho)
            if not (rho > 0 and math.isfinite(rho)):
                raise ValueError(f"rho must be positive, got {self.rho!r}")
            object.__setattr__(self, "rho", rho)
        elif fam == "torus":
            tau = 1j if self.tau is None else complex(self.tau)
            if not tau.imag > 0:
                raise ValueError(f"Im(tau) must be positive, got {tau!r}")
            object.__setattr__(self, "tau", tau)
        elif fam == "cone":
            p = 1 if self.p is None else self.p
            if int(p) != p or p < 1:
                raise ValueError(f"cone order p must be an integer >= 1, got {p!r}")
            object.__setattr__(self, "p", int(p))
        elif fam == "lune":
            k = 1 if self.k is None else self.k
            if int(k) != k or k < 1:
                raise ValueError(f"lune order k must be an integer >= 1, got {k!r}")
            bc = (self.bc or "periodic").lower()
            if bc not in ("periodic", "neumann"):
                raise ValueError(f"lune bc must be 'periodic' or 'neumann', got {self.bc!r}")
            object.__setattr__(self, "k", int(k))
            object.__setattr__(self, "bc", bc)

    def to_dict(self):
        d = {"family": self.family}
        if self.rho is not None:
            d["rho"] = self.rho
        if self.tau is not None:
            d["tau_re"] = self.tau.real
            d["tau_im"] = self.tau.imag
        if self.p is not None:
            d["p"] = self.p
        if self.k is not None:
            d["k"] = self.k
        if self.bc is not None:
            d["bc"] = self.bc
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        fam = d.pop("family")
        tau = None
        if "tau_re" in d or "tau_im" in d:
            tau = complex(float(d.pop("tau_re", 0.0)), float(d.pop("tau_im", 1.0)))
        kwargs = {key: d.pop(key) for key in ("rho", "p", "k", "bc") if key in d}
        if d:
            raise ValueError(f"unexpected keys in manifold spec: {sorted(d)}")
        return cls(fam, tau=tau, **kwargs)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def params(self):
        """Compact parameter string, e.g. ``rho=2`` or ``tau=0.5+0.866i``."""
        if self.rho is not None:
            return f"rho={self.rho:.12g}"
        if self.tau is not None:
            return f"tau={self.tau.real:.12g}{self.tau.imag:+.12g}i"
        if self.family == "cone":
            return f"p={self.p}"
        if self.family == "lune":
            return f"k={self.k};bc={self.bc}"
        return ""

    def __str__(self):
        par = self.params()
        return f"{self.family}({par})" if par else self.family


def rectangle(rho=1.0):
    return ManifoldSpec("rectangle", rho=rho)


def torus(tau=1j):
    return ManifoldSpec("torus", tau=tau)


def cylinder(rho=1.0):
    return ManifoldSpec("cylinder", rho=rho)


def moebius(rho=1.0):
    return ManifoldSpec("moebius", rho=rho)


def klein(rho=1.0):
    return ManifoldSpec("klein", rho=rho)


def boy(rho=1.0):
    return ManifoldSpec("boy", rho=rho)


def cone(p=1):
    return ManifoldSpec("cone", p=p)


def disc():
    return ManifoldSpec("disc")


def sphere():
    return ManifoldSpec("sphere")


def projective_sphere():
    return ManifoldSpec("projective_sphere")


def lune(k=1, bc="periodic"):
    return ManifoldSpec("lune", k=k, bc=bc)


HEXAGONAL_TAU = cmath.exp(1j * math.pi / 3)


@dataclass(frozen=True)
class PlanarIsometry:
    """x -> linear @ x + translation, with linear a signed permutation matrix."""

    linear: tuple  # ((a, b), (c, d)) with entries in {-1, 0, 1}
    translation: tuple

    @staticmethod
    def identity():
        return PlanarIsometry(((1, 0), (0, 1)), (0.0, 0.0))

    @property
    def matrix(self):
        return np.array(self.linear, dtype=np.float64)

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=np.float64)
        return pts @ self.matrix.T + np.asarray(self.translation)

    def compose(self, other):
        """self o other."""
        A = self.matrix @ other.matrix
        t = self.matrix @ np.asarray(other.translation) + np.asarray(self.translation)
        return PlanarIsometry(_int_matrix(A), (float(t[0]), float(t[1])))

    def inverse(self):
        Ainv = self.matrix.T
        t = -Ainv @ np.asarray(self.translation)
        return PlanarIsometry(_int_matrix(Ainv), (float(t[0]) + 0.0, float(t[1]) + 0.0))

    def key(self, scale=1.0):
        return self.linear, tuple(round(c / scale, 9) + 0.0 for c in self.translation)


def _int_matrix(A):
    return tuple(tuple(int(round(v)) for v in row) for row in A)


@numba.njit(cache=True)
def _min_image_sq(X, Y, A, T):
    nx, ny, ni = X.shape[0], Y.shape[0], A.shape[0]
    out = np.empty((nx, ny))
    for j in range(ny):
        y0, y1 = Y[j, 0], Y[j, 1]
        for i in range(nx):
            best = np.inf
            x0, x1 = X[i, 0], X[i, 1]
            p0, p1, q0, q1 = x0, x1, y0, y1
            # fixed argument order makes d(x, y) and d(y, x) bitwise equal
            if (x0 > y0) or (x0 == y0 and x1 > y1):
                p0, p1, q0, q1 = y0, y1, x0, x1
            for g in range(ni):
                gy0 = A[g, 0, 0] * q0 + A[g, 0, 1] * q1 + T[g, 0]
                gy1 = A[g, 1, 0] * q0 + A[g, 1, 1] * q1 + T[g, 1]
                d = (p0 - gy0) ** 2 + (p1 - gy1) ** 2
                if d < best:
                    best = d
            out[i, j] = best
    return out


@numba.njit(cache=True)
def _torus_pair(d0, d1, B, Binv, window):
    if (d0 < 0.0) or (d0 == 0.0 and d1 < 0.0):
        d0, d1 = -d0, -d1
    c0 = Binv[0, 0] * d0 + Binv[0, 1] * d1
    c1 = Binv[1, 0] * d0 + Binv[1, 1] * d1
    c0 -= np.floor(c0 + 0.5)
    c1 -= np.floor(c1 + 0.5)
    best = np.inf
    for n in range(-window, window + 1):
        for m in range(-window, window + 1):
            e0 = c0 + n
            e1 = c1 + m
            z0 = B[0, 0] * e0 + B[0, 1] * e1
            z1 = B[1, 0] * e0 + B[1, 1] * e1
            d = z0 * z0 + z1 * z1
            if d < best:
                best = d
    return best


@numba.njit(cache=True)
def _torus_sq(X, Y, B, Binv, window):
    out = np.empty((X.shape[0], Y.shape[0]))
    for i in range(X.shape[0]):
        for j in range(Y.shape[0]):
            out[i, j] = _torus_pair(X[i, 0] - Y[j, 0], X[i, 1] - Y[j, 1], B, Binv, window)
    return out


@numba.njit(cache=True)
def _torus_paired(x, y, B, Binv, window):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _torus_pair(x[i, 0] - y[i, 0], x[i, 1] - y[i, 1], B, Binv, window)
    return out


def _ordered(x, y):
    swap = (x[:, 0] > y[:, 0]) | ((x[:, 0] == y[:, 0]) & (x[:, 1] > y[:, 1]))
    return np.where(swap[:, None], y, x), np.where(swap[:, None], x, y)


def _as_points(x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != 2:
        raise ValueError(f"points must have trailing dimension 2, got shape {arr.shape}")
    return arr


class Manifold:
    """Handle for a unit-area manifold built from a :class:`ManifoldSpec`."""

    area = 1.0
    is_flat = False
    has_boundary = False

    def __init__(self, spec):
        self.spec = spec

    # -- domain -------------------------------------------------------------
    def contains(self, x):
        """True iff every point lies in the closed fundamental domain."""
        x = _as_points(x)
        return bool(np.all(self._contains(x.reshape(-1, 2))))

    def contains_each(self, x):
        return self._contains(_as_points(x).reshape(-1, 2))

    def canonicalize(self, x):
        """Fundamental-domain representative of each point's orbit."""
        x = _as_points(x)
        return self._canonicalize(x.reshape(-1, 2)).reshape(x.shape)

    def _canonicalize(self, x):
        return x.copy()

    # -- distances ----------------------------------------------------------
    def _check(self, x):
        if not np.all(self._contains(x.reshape(-1, 2))):
            raise ValueError(f"point(s) outside the fundamental domain of {self.spec}")

    def squared_distance(self, x, y):
        """Squared geodesic distance between x and y (broadcast over leading dims)."""
        x, y = _as_points(x), _as_points(y)
        self._check(x)
        self._check(y)
        shape = np.broadcast_shapes(x.shape, y.shape)[:-1]
        xb = np.broadcast_to(x, shape + (2,)).reshape(-1, 2)
        yb = np.broadcast_to(y, shape + (2,)).reshape(-1, 2)
        out = self._paired_sq(xb, yb).reshape(shape)
        return float(out) if out.ndim == 0 else out

    def geodesic_distance(self, x, y):
        return np.sqrt(self.squared_distance(x, y))

    def pairwise_sq(self, X, Y):
        """Matrix of squared distances between all points of X and of Y."""
        X = _as_points(X).reshape(-1, 2)
        Y = _as_points(Y).reshape(-1, 2)
        self._check(X)
        self._check(Y)
        return self._pairwise_sq(np.ascontiguousarray(X), np.ascontiguousarray(Y))

    def _paired_sq(self, x, y):
        # default: diagonal of the pairwise kernel, one pair at a time
        out = np.empty(len(x))
        for i in range(len(x)):
            out[i] = self._pairwise_sq(x[i : i + 1], y[i : i + 1])[0, 0]
        return out

    # -- sampling -----------------------------------------------------------
    def sample_uniform(self, rng, n):
        """n i.i.d. points uniform for the area measure."""
        raise NotImplementedError

    @property
    def diameter(self):
        raise NotImplementedError

    def __repr__(self):
        return f"Manifold({self.spec})"


class RectangularFlat(Manifold):
    """Rectangle chart [0, a] x [0, b] with an optional identification group."""

    is_flat = True

    def __init__(self, spec, image_window=None):
        super().__init__(spec)
        rho = spec.rho
        self.a = math.sqrt(rho)
        self.b = 1.0 / math.sqrt(rho)
        self.generators = self._generators()
        self.window = image_window if image_window is not None else 2 + math.ceil(max(rho, 1.0 / rho))
        self.has_boundary = spec.family in ("rectangle", "cylinder", "moebius")

    def _generators(self):
        a, b = self.a, self.b
        fam = self.spec.family
        if fam == "rectangle":
            return []
        if fam == "cylinder":
            return [PlanarIsometry(((1, 0), (0, 1)), (0.0, b))]
        if fam == "moebius":
            return [PlanarIsometry(((-1, 0), (0, 1)), (a, b))]
        if fam == "klein":
            return [PlanarIsometry(((1, 0), (0, 1)), (a, 0.0)), PlanarIsometry(((-1, 0), (0, 1)), (a, b))]
        if fam == "boy":
            return [PlanarIsometry(((1, 0), (0, -1)), (a, b)), PlanarIsometry(((-1, 0), (0, 1)), (a, b))]
        raise ValueError(fam)

    @property
    def diameter(self):
        return math.hypot(self.a, self.b)

    def _tile_gap(self, g):
        """Euclidean gap between the domain and its image under g."""
        corners = g(np.array([[0, 0], [self.a, 0], [0, self.b], [self.a, self.b]], dtype=float))
        lo, hi = corners.min(axis=0), corners.max(axis=0)
        gx = max(0.0, lo[0] - self.a, -hi[0])
        gy = max(0.0, lo[1] - self.b, -hi[1])
        return math.hypot(gx, gy)

    @cached_property
    def images(self):
        """Group elements within word length ``window`` whose tile is near the domain."""
        ident = PlanarIsometry.identity()
        if not self.generators:
            return [ident]
        gens = self.generators + [g.inverse() for g in self.generators]
        reach = self.diameter * (1 + 1e-9)
        scale = min(self.a, self.b)
        seen = {ident.key(scale): ident}
        frontier = deque([(ident, 0)])
        while frontier:
            g, depth = frontier.popleft()
            if depth >= self.window:
                continue
            for s in gens:
                h = s.compose(g)
                key = h.key(scale)
                if key in seen or self._tile_gap(h) > reach:
                    continue
                seen[key] = h
                frontier.append((h, depth + 1))
        return list(seen.values())

    @cached_property
    def _image_arrays(self):
        A = np.array([g.linear for g in self.images], dtype=np.float64)
        T = np.array([g.translation for g in self.images], dtype=np.float64)
        return A, T

    def _contains(self, x):
        ta, tb = BOUNDARY_TOL * max(self.a, 1), BOUNDARY_TOL * max(self.b, 1)
        return (x[:, 0] >= -ta) & (x[:, 0] <= self.a + ta) & (x[:, 1] >= -tb) & (x[:, 1] <= self.b + tb)

    def _pairwise_sq(self, X, Y):
        A, T = self._image_arrays
        return _min_image_sq(X, Y, A, T)

    def _paired_sq(self, x, y):
        A, T = self._image_arrays
        x, y = _ordered(x, y)
        gy = np.einsum("gij,nj->gni", A, y) + T[:, None, :]
        return np.min(np.sum((x[None] - gy) ** 2, axis=-1), axis=0)

    def _canonicalize(self, x):
        a, b = self.a, self.b
        fam = self.spec.family
        X, Y = x[:, 0].copy(), x[:, 1].copy()
        if fam == "rectangle":
            return x.copy()
        if fam in ("cylinder", "moebius"):
            if np.any((X < -BOUNDARY_TOL) | (X > a + BOUNDARY_TOL)):
                raise ValueError(f"{fam}: x outside the strip [0, {a}] has no representative")
        if fam == "boy":
            i = np.floor(X / a)
            j = np.floor(Y / b)
            i_odd = np.mod(i, 2) == 1
            j_odd = np.mod(j, 2) == 1
            X = np.where(j_odd, (i + 1) * a - X, X - i * a)
            Y = np.where(i_odd, (j + 1) * b - Y, Y - j * b)
        else:
            m = np.floor(Y / b)
            Y = Y - m * b
            if fam in ("moebius", "klein"):
                X = np.where(np.mod(m, 2) == 1, a - X, X)
            if fam == "klein":
                X = X - np.floor(X / a) * a
        out = np.stack([X, Y], axis=-1)
        return np.clip(out, 0.0, [a, b])

    def sample_uniform(self, rng, n):
        u = rng.random((n, 2))
        return u * np.array([self.a, self.b])


class FlatTorus(Manifold):
    """R^2 / omega(tau) Z^2 with omega = [[1, sigma], [0, rho]] / sqrt(rho)."""

    is_flat = True

    def __init__(self, spec, image_window=2):
        super().__init__(spec)
        tau = spec.tau
        sigma, rho = tau.real, tau.imag
        self.omega = np.array([[1.0, sigma], [0.0, rho]]) / math.sqrt(rho)
        self.omega_inv = np.linalg.inv(self.omega)
        self.reduced = _gauss_reduce(self.omega)
        self.reduced_inv = np.linalg.inv(self.reduced)
        self.window = image_window

    @property
    def diameter(self):
        # covering radius of the lattice, bounded by the longest half-diagonal
        b1, b2 = self.reduced[:, 0], self.reduced[:, 1]
        return 0.5 * max(np.linalg.norm(b1 + b2), np.linalg.norm(b1 - b2))

    def lattice_coords(self, x):
        return x @ self.omega_inv.T

    def _contains(self, x):
        c = self.lattice_coords(x)
        return np.all((c >= -BOUNDARY_TOL) & (c <= 1 + BOUNDARY_TOL), axis=1)

    def _canonicalize(self, x):
        c = self.lattice_coords(x)
        c = c - np.floor(c)
        c = np.where(c >= 1.0, 0.0, c)
        return c @ self.omega.T

    def _pairwise_sq(self, X, Y):
        return _torus_sq(X, Y, self.reduced, self.reduced_inv, self.window)

    def _paired_sq(self, x, y):
        return _torus_paired(np.ascontiguousarray(x), np.ascontiguousarray(y), self.reduced, self.reduced_inv, self.window)

    def sample_uniform(self, rng, n):
        return rng.random((n, 2)) @ self.omega.T


def _gauss_reduce(B):
    """Lagrange-Gauss reduction of the 2D lattice basis given as columns of B."""
    b1, b2 = B[:, 0].astype(float), B[:, 1].astype(float)
    if b1 @ b1 > b2 @ b2:
        b1, b2 = b2, b1
    for _ in range(1000):
        mu = round((b1 @ b2) / (b1 @ b1))
        b2 = b2 - mu * b1
        if b2 @ b2 >= b1 @ b1:
            break
        b1, b2 = b2, b1
    return np.column_stack([b1, b2])


class Disc(Manifold):
    """Disc of radius 1/sqrt(pi) centred at the origin, Cartesian chart."""

    has_boundary = True

    def __init__(self, spec):
        super().__init__(spec)
        self.radius = 1.0 / math.sqrt(math.pi)

    @property
    def diameter(self):
        return 2 * self.radius

    def _contains(self, x):
        return np.hypot(x[:, 0], x[:, 1]) <= self.radius * (1 + BOUNDARY_TOL)

    def _pairwise_sq(self, X, Y):
        return np.sum((X[:, None, :] - Y[None, :, :]) ** 2, axis=-1)

    def _paired_sq(self, x, y):
        return np.sum((x - y) ** 2, axis=-1)

    def sample_uniform(self, rng, n):
        u = self.radius * np.sqrt(rng.random(n))
        th = 2 * math.pi * rng.random(n)
        return np.column_stack([u * np.cos(th), u * np.sin(th)])


class ConeSector(Manifold):
    """Sector of angle 2 pi / p with its two radii glued; polar chart (u, theta).

    Unit area fixes pi r^2 = p.  The developed straight segment is the
    geodesic because the identified angular gap never exceeds pi.
    """

    has_boundary = True

    def __init__(self, spec):
        super().__init__(spec)
        self.p = spec.p
        self.alpha = 2 * math.pi / self.p
        self.radius = math.sqrt(self.p / math.pi)

    @property
    def diameter(self):
        r = self.radius
        return max(r, 2 * r * math.sin(min(self.alpha / 2, math.pi) / 2))

    def _contains(self, x):
        u, th = x[:, 0], x[:, 1]
        return (u >= 0) & (u <= self.radius * (1 + BOUNDARY_TOL)) & (th >= -BOUNDARY_TOL) & (th <= self.alpha * (1 + BOUNDARY_TOL))

    def _canonicalize(self, x):
        th = np.mod(x[:, 1], self.alpha)
        return np.column_stack([x[:, 0], th])

    def _sep(self, t1, t2):
        delta = np.mod(np.abs(t1 - t2), self.alpha)
        return np.minimum(delta, self.alpha - delta)

    def _sq(self, u1, t1, u2, t2):
        s = np.sin(0.5 * self._sep(t1, t2))
        return (u1 - u2) ** 2 + 4 * u1 * u2 * s * s

    def _pairwise_sq(self, X, Y):
        return self._sq(X[:, None, 0], X[:, None, 1], Y[None, :, 0], Y[None, :, 1])

    def _paired_sq(self, x, y):
        return self._sq(x[:, 0], x[:, 1], y[:, 0], y[:, 1])

    def sample_uniform(self, rng, n):
        u = self.radius * np.sqrt(rng.random(n))
        th = self.alpha * rng.random(n)
        return np.column_stack([u, th])

    def to_cartesian(self, x):
        x = _as_points(x)
        return np.stack([x[..., 0] * np.cos(x[..., 1]), x[..., 0] * np.sin(x[..., 1])], axis=-1)


class SphericalSurface(Manifold):
    """Sphere, projective sphere and lunes, chart (colatitude, longitude)."""

    def __init__(self, spec):
        super().__init__(spec)
        fam = spec.family
        if fam == "sphere":
            self.radius = 1.0 / math.sqrt(4 * math.pi)
            self.phi_max = 2 * math.pi
        elif fam == "projective_sphere":
            self.radius = 1.0 / math.sqrt(2 * math.pi)
            self.phi_max = 2 * math.pi
        else:
            self.radius = math.sqrt(spec.k / (4 * math.pi))
            self.phi_max = 2 * math.pi / spec.k
        self.has_boundary = fam == "lune" and spec.bc == "neumann" and spec.k > 1

    @property
    def diameter(self):
        if self.spec.family == "projective_sphere":
            return 0.5 * math.pi * self.radius
        return math.pi * self.radius

    @property
    def theta_max(self):
        return 0.5 * math.pi if self.spec.family == "projective_sphere" else math.pi

    def _contains(self, x):
        th, ph = x[:, 0], x[:, 1]
        ok_th = (th >= -BOUNDARY_TOL) & (th <= self.theta_max * (1 + BOUNDARY_TOL))
        ok_ph = (ph >= -BOUNDARY_TOL) & (ph <= self.phi_max * (1 + BOUNDARY_TOL))
        return ok_th & ok_ph

    def _canonicalize(self, x):
        th, ph = x[:, 0].copy(), x[:, 1].copy()
        fam = self.spec.family
        # fold colatitude into [0, pi] (a pole crossing shifts longitude by pi)
        th = np.mod(th, 2 * math.pi)
        over = th > math.pi
        th = np.where(over, 2 * math.pi - th, th)
        ph = np.where(over, ph + math.pi, ph)
        if fam == "projective_sphere":
            south = th > 0.5 * math.pi
            th = np.where(south, math.pi - th, th)
            ph = np.where(south, ph + math.pi, ph)
        if fam == "lune" and self.spec.bc == "neumann":
            return np.column_stack([th, ph])
        ph = np.mod(ph, self.phi_max)
        return np.column_stack([th, ph])

    def _central_angle(self, t1, p1, t2, p2):
        dphi = np.abs(p1 - p2)
        fam = self.spec.family
        if not (fam == "lune" and self.spec.bc == "neumann"):
            dphi = np.mod(dphi, self.phi_max)
            dphi = np.minimum(dphi, self.phi_max - dphi)
        s1 = np.sin(0.5 * (t1 - t2))
        s2 = np.sin(0.5 * dphi)
        hav = s1 * s1 + np.sin(t1) * np.sin(t2) * s2 * s2
        ang = 2 * np.arcsin(np.sqrt(np.clip(hav, 0.0, 1.0)))
        if fam == "projective_sphere":
            ang = np.minimum(ang, math.pi - ang)
        return ang

    def _pairwise_sq(self, X, Y):
        ang = self._central_angle(X[:, None, 0], X[:, None, 1], Y[None, :, 0], Y[None, :, 1])
        return (self.radius * ang) ** 2

    def _paired_sq(self, x, y):
        ang = self._central_angle(x[:, 0], x[:, 1], y[:, 0], y[:, 1])
        return (self.radius * ang) ** 2

    def sample_uniform(self, rng, n):
        z = 2 * rng.random(n) - 1
        th = np.arccos(z)
        ph = self.phi_max * rng.random(n)
        pts = np.column_stack([th, ph])
        if self.spec.family == "projective_sphere":
            pts = self._canonicalize(pts)
        return pts

    def to_cartesian(self, x):
        x = _as_points(x)
        th, ph = x[..., 0], x[..., 1]
        return self.radius * np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def make_manifold(spec, **kwargs):
    """Build the manifold handle for a spec (or a spec dict / JSON string)."""
    if isinstance(spec, str):
        spec = ManifoldSpec.from_json(spec)
    elif isinstance(spec, dict):
        spec = ManifoldSpec.from_dict(spec)
    fam = spec.family
    if fam == "torus":
        return FlatTorus(spec, **kwargs)
    if fam in FLAT_FAMILIES:
        return RectangularFlat(spec, **kwargs)
    if fam == "disc":
        return Disc(spec)
    if fam == "cone":
        return ConeSector(spec)
    return SphericalSurface(spec)


def contains(M, x):
    return M.contains(x)


def canonicalize(M, x):
    return M.canonicalize(x)


def geodesic_distance(M, x, y):
    return M.geodesic_distance(x, y)


def squared_distance(M, x, y):
    return M.squared_distance(x, y)
