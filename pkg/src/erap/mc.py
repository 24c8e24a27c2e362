"""Monte Carlo harness: ensembles of assignment instances, c-estimates, fits, differences."""

import csv
import json
import math
import multiprocessing as mp
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from erap import __version__
from erap.lap import assignment_cost, build_cost_matrix, solve_jv
from erap.manifolds import ManifoldSpec, make_manifold
from erap.pointsets import (
    GENERATOR_NAME,
    GOLDEN_ANGLE,
    SeededStream,
    grid_for_ensemble,
    parse_gp,
    replicate,
    sample_poisson,
)
from erap.spectral.masses import kronecker_mass

CSV_HEADER = ["family", "params", "ensemble", "N", "instances", "mean_cost", "std_err", "c_estimate", "seed", "generator"]
ENSEMBLES = ("PP", "SP", "TP", "FP")
DEFAULT_SIZES = (32, 64, 128, 256, 512)

CONVENTIONS = {
    "cost": "sum of squared geodesic distances of the optimal assignment; GP(h) divides by h",
    "c_estimate": "PP: (E - ln N / (2 pi)) / 2; grid ensembles: E - ln N / (4 pi)",
    "fit_basis": "1, N^-1/2, N^-1 (no ln ln N term)",
    "grids": "cell-centred lattice grids, offset 1/(2k)",
    "fibonacci": f"phi_j = j * {GOLDEN_ANGLE!r} mod 2 pi, z_j = r (1 - (2 j + 1) / N)",
    "lune_neumann_distance": "ambient great-circle distance",
    "streams": "SeedSequence(seed, spawn_key=(blake2b64(spec json), ensemble code, N, instance))",
}


def normalize_ensemble(ensemble):
    ens = str(ensemble).strip().upper().replace(" ", "")
    if ens.startswith("GP"):
        return f"GP({parse_gp(ens)})"
    if ens not in ENSEMBLES:
        raise ValueError(f"unknown ensemble {ensemble!r}; expected PP, SP, TP, FP or GP(h)")
    return ens


@dataclass
class ExperimentConfig:
    manifold: ManifoldSpec
    ensemble: str
    sizes: tuple = DEFAULT_SIZES
    instances: int = 10_000
    seed: int = 0
    output: str = None
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.manifold, dict):
            self.manifold = ManifoldSpec.from_dict(self.manifold)
        self.ensemble = normalize_ensemble(self.ensemble)
        self.sizes = tuple(int(n) for n in self.sizes)
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if any(n < 1 for n in self.sizes):
            raise ValueError("sizes must be positive")
        if self.instances < 2:
            raise ValueError("need at least 2 instances for a standard error")

    def to_dict(self):
        return {
            "manifold": self.manifold.to_dict(),
            "ensemble": self.ensemble,
            "sizes": list(self.sizes),
            "instances": self.instances,
            "seed": self.seed,
            "output": self.output,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {"manifold", "ensemble", "sizes", "instances", "seed", "output", "threads"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        missing = {"manifold", "ensemble", "sizes", "instances", "seed"} - set(d)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ExperimentRecord:
    family: str
    params: str
    ensemble: str
    N: int
    instances: int
    mean_cost: float
    std_err: float
    c_estimate: float
    seed: int
    generator: str = GENERATOR_NAME

    def row(self):
        return [
            self.family,
            self.params,
            self.ensemble,
            str(self.N),
            str(self.instances),
            repr(self.mean_cost),
            repr(self.std_err),
            repr(self.c_estimate),
            str(self.seed),
            self.generator,
        ]

    @classmethod
    def from_row(cls, row):
        return cls(
            row["family"],
            row["params"],
            row["ensemble"],
            int(row["N"]),
            int(row["instances"]),
            float(row["mean_cost"]),
            float(row["std_err"]),
            float(row["c_estimate"]),
            int(row["seed"]),
            row["generator"],
        )

    @property
    def c_error(self):
        """Standard error of the c-estimate."""
        return self.std_err / 2 if self.ensemble == "PP" else self.std_err


@dataclass
class FitResult:
    coefficients: tuple  # (a, b, c) in a + b N^-1/2 + c N^-1
    covariance: np.ndarray
    chi2_dof: float
    sizes: tuple = field(default_factory=tuple)

    @property
    def a(self):
        return self.coefficients[0]

    @property
    def sigma(self):
        return tuple(float(s) for s in np.sqrt(np.diag(self.covariance)))

    def predict(self, N):
        N = np.asarray(N, dtype=float)
        a, b, c = self.coefficients
        return a + b * N**-0.5 + c / N


# ---------------------------------------------------------------------------
# single instances

_WORKER_CACHE = {}


def _context(spec_json, ensemble, N):
    key = (spec_json, ensemble, N)
    ctx = _WORKER_CACHE.get(key)
    if ctx is None:
        if len(_WORKER_CACHE) > 16:
            _WORKER_CACHE.clear()
        M = make_manifold(ManifoldSpec.from_json(spec_json))
        grid = None if ensemble == "PP" else grid_for_ensemble(M, ensemble, N)
        ctx = _WORKER_CACHE[key] = (M, grid)
    return ctx


def instance_cost(spec, ensemble, N, seed, index):
    """Optimal assignment cost of one instance (deterministic in its arguments)."""
    ensemble = normalize_ensemble(ensemble)
    spec_json = spec.to_json() if isinstance(spec, ManifoldSpec) else spec
    M, grid = _context(spec_json, ensemble, N)
    stream = SeededStream.for_instance(seed, M.spec, ensemble, N, index)
    rng = stream.generator()
    if ensemble == "PP":
        X = sample_poisson(M, N, rng)
        Y = sample_poisson(M, N, rng)
        C = build_cost_matrix(M, X, Y)
        return solve_jv(C).cost
    blue = sample_poisson(M, N, rng)
    h = parse_gp(ensemble) if ensemble.startswith("GP") else 1
    blue = replicate(blue, h)
    C = build_cost_matrix(M, grid, blue)
    sol = solve_jv(C)
    return assignment_cost(C, sol.permutation) / h


def _cost_task(args):
    return instance_cost(*args)


def _instance_costs(spec, ensemble, N, seed, count, threads, start=0):
    spec_json = spec.to_json()
    tasks = [(spec_json, ensemble, N, seed, i) for i in range(start, start + count)]
    if threads <= 1 or count < 2:
        return [_cost_task(t) for t in tasks]
    chunk = max(1, min(64, count // (8 * threads)))
    with mp.get_context("fork").Pool(threads) as pool:
        return list(pool.imap(_cost_task, tasks, chunksize=chunk))


def estimate_c(record_or_ensemble, N=None, mean_cost=None):
    """c-estimate from a record, or from (ensemble, N, mean cost)."""
    if isinstance(record_or_ensemble, ExperimentRecord):
        r = record_or_ensemble
        ensemble, N, mean_cost = r.ensemble, r.N, r.mean_cost
    else:
        ensemble = normalize_ensemble(record_or_ensemble)
    if ensemble == "PP":
        return (mean_cost - math.log(N) / (2 * math.pi)) / 2
    return mean_cost - math.log(N) / (4 * math.pi)


def summarize(costs):
    """(mean, standard error) with exactly rounded sums."""
    M = len(costs)
    mean = math.fsum(costs) / M
    var = math.fsum((c - mean) ** 2 for c in costs) / (M - 1)
    return mean, math.sqrt(var / M)


def make_record(spec, ensemble, N, seed, costs):
    mean, se = summarize(costs)
    return ExperimentRecord(
        spec.family,
        spec.params(),
        ensemble,
        int(N),
        len(costs),
        mean,
        se,
        estimate_c(ensemble, N, mean),
        int(seed),
    )


# ---------------------------------------------------------------------------
# experiments


def _metadata(cfg):
    return {
        "version": __version__,
        "config": cfg.to_dict(),
        "generator": GENERATOR_NAME,
        "conventions": CONVENTIONS,
    }


def _meta_path(path):
    return (path[:-4] if path.endswith(".csv") else path) + ".json"


def read_records(path):
    with open(path, newline="") as fh:
        return [ExperimentRecord.from_row(r) for r in csv.DictReader(fh)]


def write_records(path, records, meta):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.row())
    os.replace(tmp, path)
    tmp = _meta_path(path) + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
    os.replace(tmp, _meta_path(path))


def _resume(cfg, meta):
    """Records of a previous run of the same configuration, if any."""
    path = cfg.output
    if not path or not os.path.exists(path) or not os.path.exists(_meta_path(path)):
        return {}
    with open(_meta_path(path)) as fh:
        old = json.load(fh)
    same = (
        old.get("version") == meta["version"]
        and old["config"]["manifold"] == meta["config"]["manifold"]
        and old["config"]["ensemble"] == cfg.ensemble
        and old["config"]["instances"] == cfg.instances
        and old["config"]["seed"] == cfg.seed
    )
    if not same:
        return {}
    return {r.N: r for r in read_records(path)}


def run_experiment(cfg, *, progress=None):
    """Run every size of ``cfg``; with ``cfg.output`` set, results are written
    after each size and completed sizes of an identical earlier run are reused."""
    meta = _metadata(cfg)
    done = _resume(cfg, meta)
    records = []
    for N in cfg.sizes:
        if N in done:
            records.append(done[N])
            continue
        if cfg.ensemble != "PP":
            # surface grid incompatibility before any work on this size
            grid_for_ensemble(make_manifold(cfg.manifold), cfg.ensemble, N)
        costs = _instance_costs(cfg.manifold, cfg.ensemble, N, cfg.seed, cfg.instances, cfg.threads)
        rec = make_record(cfg.manifold, cfg.ensemble, N, cfg.seed, costs)
        records.append(rec)
        if cfg.output:
            keep = sorted({**done, **{r.N: r for r in records}}.values(), key=lambda r: r.N)
            write_records(cfg.output, keep, meta)
        if progress:
            progress(rec)
    return records


def fit_quadratic_invsqrt(series):
    """Weighted least squares of c(N) on {1, N^-1/2, N^-1}.

    ``series`` holds (N, c, err) triples or ExperimentRecords.
    """
    rows = []
    for item in series:
        if isinstance(item, ExperimentRecord):
            rows.append((item.N, item.c_estimate, item.c_error))
        else:
            rows.append(tuple(item))
    Ns = np.array([r[0] for r in rows], dtype=float)
    cs = np.array([r[1] for r in rows], dtype=float)
    errs = np.array([r[2] for r in rows], dtype=float)
    if len(set(Ns.tolist())) < 3:
        raise ValueError("need at least 3 distinct sizes")
    if np.any(errs <= 0):
        raise ValueError("errors must be positive")
    X = np.column_stack([np.ones_like(Ns), Ns**-0.5, 1 / Ns])
    w = 1 / errs**2
    A = X.T @ (w[:, None] * X)
    if np.linalg.cond(A) > 1e14:
        raise ValueError("degenerate design matrix")
    cov = np.linalg.inv(A)
    coef = cov @ (X.T @ (w * cs))
    resid = (cs - X @ coef) / errs
    dof = len(Ns) - 3
    chi2 = float(resid @ resid / dof) if dof > 0 else float("nan")
    return FitResult(tuple(float(c) for c in coef), cov, chi2, tuple(int(n) for n in Ns))


def predict_difference(spec_a, spec_b, ensemble):
    """Predicted large-N cost difference E_A - E_B."""
    dk = kronecker_mass(spec_a) - kronecker_mass(spec_b)
    return 2 * dk if normalize_ensemble(ensemble) == "PP" else dk


def measure_difference(spec_a, spec_b, ensemble, N, M, seed, threads=1, outputs=(None, None)):
    """(E_A - E_B, combined standard error) from independent runs.

    Streams are keyed by manifold, so distinct specs are independent under
    one seed; a self-difference runs B with ``seed + 1``.
    """
    recs = []
    seeds = (seed, seed + 1 if spec_a == spec_b else seed)
    for spec, s, out in zip((spec_a, spec_b), seeds, outputs):
        cfg = ExperimentConfig(spec, ensemble, (N,), M, s, out, threads)
        recs.append(run_experiment(cfg)[0])
    a, b = recs
    return a.mean_cost - b.mean_cost, math.hypot(a.std_err, b.std_err)


@dataclass
class UniversalityRow:
    manifold: ManifoldSpec
    c: float
    c_err: float
    K: float

    @property
    def offset(self):
        return self.c - self.K


def universality_check(entries):
    """Per-manifold c - K and the spread max - min.

    ``entries`` holds (spec, FitResult) or (spec, c, err) tuples.
    """
    rows = []
    for item in entries:
        spec = item[0]
        if isinstance(item[1], FitResult):
            c, err = item[1].a, item[1].sigma[0]
        else:
            c, err = item[1], item[2]
        rows.append(UniversalityRow(spec, c, err, kronecker_mass(spec)))
    spread = max(r.offset for r in rows) - min(r.offset for r in rows) if rows else 0.0
    return rows, spread


@dataclass
class SandwichVerdict:
    N: int
    estimates: dict  # h -> (c, err)
    pairs: list  # (h, h', lhs, rhs, ok)

    @property
    def holds(self):
        return all(p[-1] for p in self.pairs)


def sandwich_verdict(N, estimates):
    """Check c_GP(h) - 1/(6h) <= c_GP(h') (+3 sigma) for every ordered pair h != h'.

    ``estimates`` maps h to (c, err).  Both sides bracket the same
    uniform-Poisson constant, so the inequality must hold in either order.
    """
    pairs = []
    for h, (c, err) in estimates.items():
        for h2, (c2, err2) in estimates.items():
            if h == h2:
                continue
            lhs = c - 1 / (6 * h)
            ok = lhs <= c2 + 3 * math.hypot(err, err2)
            pairs.append((h, h2, lhs, c2, ok))
    return SandwichVerdict(N, dict(estimates), pairs)


def gp_up_sandwich(spec, N, hs, M, seed, threads=1, output_dir=None):
    """Run GP(h) on a torus for each h and apply :func:`sandwich_verdict`."""
    est = {}
    for h in hs:
        out = os.path.join(output_dir, f"gp{h}.csv") if output_dir else None
        rec = run_experiment(ExperimentConfig(spec, f"GP({h})", (N,), M, seed, out, threads))[0]
        est[h] = (rec.c_estimate, rec.std_err)
    return sandwich_verdict(N, est)


def direct_moment(spec, n_pairs, seed):
    """Mean squared distance of independent uniform pairs, without the solver."""
    M = make_manifold(spec)
    rng = np.random.default_rng(seed)
    x = M.sample_uniform(rng, n_pairs)
    y = M.sample_uniform(rng, n_pairs)
    d = M.squared_distance(x, y)
    return float(np.mean(d)), float(np.std(d, ddof=1) / math.sqrt(n_pairs))


def records_to_dicts(records):
    return [asdict(r) for r in records]


__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "FitResult",
    "run_experiment",
    "estimate_c",
    "fit_quadratic_invsqrt",
    "predict_difference",
    "measure_difference",
    "universality_check",
    "sandwich_verdict",
    "gp_up_sandwich",
]
