"""Point sets: seeded Poisson samples, lattice and Fibonacci grids, replication."""

import csv
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from erap.manifolds import Manifold, ManifoldSpec, make_manifold

GENERATOR_NAME = "numpy.PCG64/SeedSequence"
GOLDEN = (1 + math.sqrt(5)) / 2
# golden-angle increment 2 pi (1 - 1/phi)
GOLDEN_ANGLE = 2 * math.pi * (1 - 1 / GOLDEN)

_ENSEMBLE_CODES = {"P": 1, "PP": 1, "S": 2, "SP": 2, "T": 3, "TP": 3, "F": 4, "FP": 4}


class GridIncompatibility(ValueError):
    pass


def manifold_id(spec):
    """Stable 64-bit id of a spec: blake2b-64 of its canonical JSON."""
    digest = hashlib.blake2b(spec.to_json().encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def ensemble_code(ensemble):
    """Integer code of an ensemble tag; GP(h) maps to 16 h + 5."""
    ens = str(ensemble).upper()
    if ens.startswith("GP"):
        return 16 * parse_gp(ens) + 5
    return _ENSEMBLE_CODES[ens]


def parse_gp(ensemble):
    ens = str(ensemble).upper().replace(" ", "")
    if not (ens.startswith("GP(") and ens.endswith(")")):
        raise ValueError(f"expected GP(h), got {ensemble!r}")
    h = int(ens[3:-1])
    if h < 1:
        raise ValueError("GP replication factor must be >= 1")
    return h


@dataclass(frozen=True)
class SeededStream:
    """Independent RNG stream keyed by (manifold, ensemble, N, instance index)."""

    master_seed: int
    manifold: int
    ensemble: int
    N: int
    index: int

    @classmethod
    def for_instance(cls, master_seed, spec, ensemble, N, index):
        return cls(int(master_seed), manifold_id(spec), ensemble_code(ensemble), int(N), int(index))

    def generator(self):
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.manifold, self.ensemble, self.N, self.index))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class PointSet:
    manifold: ManifoldSpec
    points: np.ndarray
    label: str

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64).reshape(-1, 2)
        if len(self.points) == 0:
            raise ValueError("a point set needs at least one point")

    def __len__(self):
        return len(self.points)

    def to_csv(self, path, seed=None, meta=None):
        """Write ``index,c1,c2`` rows plus a ``.json`` sidecar."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "c1", "c2"])
            for i, (c1, c2) in enumerate(self.points.tolist()):
                w.writerow([i, repr(c1), repr(c2)])
        side = {"manifold": self.manifold.to_dict(), "ensemble": self.label, "seed": seed, "generator": GENERATOR_NAME}
        if meta:
            side.update(meta)
        with open(_sidecar(path), "w") as fh:
            json.dump(side, fh, indent=1, sort_keys=True)

    @classmethod
    def from_csv(cls, path):
        with open(_sidecar(path)) as fh:
            side = json.load(fh)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        pts = np.array([[float(r["c1"]), float(r["c2"])] for r in rows])
        return cls(ManifoldSpec.from_dict(side["manifold"]), pts, side.get("ensemble", "P"))


def _sidecar(path):
    path = str(path)
    return (path[:-4] if path.endswith(".csv") else path) + ".json"


def _handle(M):
    return M if isinstance(M, Manifold) else make_manifold(M)


def sample_poisson(M, N, stream):
    """N i.i.d. area-uniform points drawn from ``stream``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    M = _handle(M)
    rng = stream.generator() if isinstance(stream, SeededStream) else stream
    return PointSet(M.spec, M.sample_uniform(rng, int(N)), "P")


def _as_int(x, what):
    r = round(x)
    if abs(x - r) > 1e-9 * max(1.0, abs(x)):
        raise GridIncompatibility(f"{what} = {x:.12g} is not an integer")
    return int(r)


def lattice_grid(M, k):
    """Cell-centred grid of spacing 1/k (square/rectangular) or the omega(tau) lattice / k."""
    M = _handle(M)
    spec = M.spec
    k = int(k)
    if k < 1:
        raise GridIncompatibility("grid size k must be >= 1")
    if spec.family == "torus":
        i, j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        c = np.column_stack([(i.ravel() + 0.5) / k, (j.ravel() + 0.5) / k])
        pts = c @ M.omega.T
        label = "T" if abs(spec.tau - complex(0.5, math.sqrt(3) / 2)) < 1e-12 else "S"
        return PointSet(spec, pts, label)
    if spec.family in ("rectangle", "cylinder", "moebius", "klein", "boy"):
        nx = _as_int(k * M.a, f"k*sqrt(rho) with k={k}")
        ny = _as_int(k * M.b, f"k/sqrt(rho) with k={k}")
        i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        pts = np.column_stack([(i.ravel() + 0.5) / k, (j.ravel() + 0.5) / k])
        return PointSet(spec, pts, "S")
    raise GridIncompatibility(f"no lattice grid on {spec.family}")


def grid_side(N, what="N"):
    """k with k^2 = N, or GridIncompatibility."""
    k = math.isqrt(int(N))
    if k * k != N:
        raise GridIncompatibility(f"{what} = {N} is not a perfect square")
    return k


def fibonacci_grid(M, N):
    """Golden-angle spiral points on the sphere, disc or projective sphere."""
    M = _handle(M)
    spec = M.spec
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    fam = spec.family
    if fam == "sphere" or fam == "projective_sphere":
        total = N if fam == "sphere" else 2 * N
        j = np.arange(total)
        # z / r = 1 - (2 j + 1) / total
        theta = np.arccos(1 - (2 * j + 1) / total)
        phi = np.mod(GOLDEN_ANGLE * j, 2 * math.pi)
        pts = np.column_stack([theta, phi])[:N]
        return PointSet(spec, pts, "F")
    if fam == "disc":
        j = np.arange(N)
        u = M.radius * np.sqrt((j + 0.5) / N)
        phi = np.mod(GOLDEN_ANGLE * j, 2 * math.pi)
        return PointSet(spec, np.column_stack([u * np.cos(phi), u * np.sin(phi)]), "F")
    raise GridIncompatibility(f"no Fibonacci grid on {fam}")


def replicate(ps, h):
    """Repeat every point h times consecutively."""
    h = int(h)
    if h < 1:
        raise ValueError("h must be >= 1")
    if h == 1:
        return ps
    return PointSet(ps.manifold, np.repeat(ps.points, h, axis=0), f"Replicated({h})")


def grid_for_ensemble(M, ensemble, N):
    """Deterministic red set of the grid-Poisson ensembles SP, TP, FP and GP(h)."""
    M = _handle(M)
    ens = str(ensemble).upper()
    if ens == "SP":
        return lattice_grid(M, grid_side(N))
    if ens == "TP":
        tau = M.spec.tau
        if M.spec.family != "torus" or abs(tau - complex(0.5, math.sqrt(3) / 2)) > 1e-12:
            raise GridIncompatibility("TP needs the hexagonal torus tau = exp(i pi / 3)")
        return lattice_grid(M, grid_side(N))
    if ens == "FP":
        return fibonacci_grid(M, N)
    if ens.startswith("GP"):
        h = parse_gp(ens)
        return lattice_grid(M, grid_side(h * N, f"h*N (h={h})"))
    raise ValueError(f"{ensemble!r} has no grid")
