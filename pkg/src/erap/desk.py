"""Desk-scale Monte Carlo protocol: the fixed set of runs behind the acceptance checks.

Every run is a plain :class:`~erap.mc.ExperimentConfig` with its own CSV in
the results directory, so interrupted runs resume by size and finished runs
are reused.  Delete the directory to recompute from scratch.
"""

import os
from pathlib import Path

from erap import mc
from erap.manifolds import cylinder, klein, boy, rectangle, torus

SEED = 20240611
INSTANCES = 10_000
PP_SIZES = (32, 64, 128, 256, 512)
SP_SIZES = (36, 64, 100, 144, 256, 400)
GP_N = 16
GP_H = (1, 4, 9)


def results_dir():
    return Path(os.environ.get("ERAP_RESULTS", Path(__file__).resolve().parents[2] / "results"))


def plan():
    """name -> ExperimentConfig (output paths filled in by :func:`config`)."""
    runs = {
        "pp_torus": mc.ExperimentConfig(torus(1j), "PP", PP_SIZES, INSTANCES, SEED),
        "pp_rectangle": mc.ExperimentConfig(rectangle(1), "PP", PP_SIZES, INSTANCES, SEED),
        "pp_klein": mc.ExperimentConfig(klein(1), "PP", PP_SIZES, INSTANCES, SEED),
        "pp_boy": mc.ExperimentConfig(boy(1), "PP", PP_SIZES, INSTANCES, SEED),
        "pp_cylinder": mc.ExperimentConfig(cylinder(1), "PP", PP_SIZES, INSTANCES, SEED),
        # second, independent torus run at N = 256 for the self-difference
        "pp_torus_self": mc.ExperimentConfig(torus(1j), "PP", (256,), INSTANCES, SEED + 1),
        "sp_torus": mc.ExperimentConfig(torus(1j), "SP", SP_SIZES, INSTANCES, SEED),
        "sp_klein": mc.ExperimentConfig(klein(1), "SP", SP_SIZES, INSTANCES, SEED),
    }
    for h in GP_H:
        runs[f"gp{h}_torus"] = mc.ExperimentConfig(torus(1j), f"GP({h})", (GP_N,), INSTANCES, SEED)
    return runs


def config(name, threads=1):
    cfg = plan()[name]
    cfg.output = str(results_dir() / f"{name}.csv")
    cfg.threads = threads
    return cfg


def records(name, threads=1):
    """Records of one planned run, computing whatever is missing."""
    cfg = config(name, threads)
    results_dir().mkdir(parents=True, exist_ok=True)
    return {r.N: r for r in mc.run_experiment(cfg)}


def run_all(threads=1, names=None, progress=None):
    for name in names or plan():
        if progress:
            progress(name, None)
        recs = records(name, threads)
        if progress:
            progress(name, recs)
