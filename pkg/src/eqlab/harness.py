"""Experiment orchestration: grids over (task, gamma, L, d, sigma2),
seed fans, and append-only CSV persistence.

Per-run seeds are a SHA-256 hash of the master seed and the grid
coordinates, so extending a grid never reshuffles existing runs.  A
row is written only after its run completes; interrupting a sweep
keeps everything finished so far.
"""

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from . import analysis, mlp, sdtask, theory, visiontask
from .rand import derive_seed, spawn_rng

TASKS = ("sd", "sd_noisy", "psvrt", "pentomino", "features")

CSV_COLUMNS = [
    "task",
    "gamma",
    "L",
    "d",
    "sigma2",
    "m",
    "seed",
    "steps",
    "best_test_acc",
    "final_train_acc",
    "readout_ratio",
    "mean_pos_align",
    "mean_neg_align",
    "richness_metric",
    "wall_time_s",
]

LAZY = "lazy"  # placeholder gamma resolved to 1e-5 / sqrt(d) at run time


@dataclass(frozen=True)
class SweepSpec:
    task: str
    gamma_list: tuple
    L_list: tuple
    d_list: tuple
    sigma2_list: tuple = (0.0,)
    seeds: int = 6
    m: int = 1024
    steps: int = 2000
    batch: int = 128
    alpha0: float = 0.1
    eval_every: int = 250
    test_size: int = 6000
    master_seed: int = 0
    feature_path: str = ""  # only for task == "features"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        for name in ("gamma_list", "L_list", "d_list", "sigma2_list"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be nonempty")
        if self.task == "features" and not self.feature_path:
            raise ValueError("features task needs feature_path")


@dataclass
class RunRecord:
    task: str
    gamma: float
    L: int
    d: int
    sigma2: float
    m: int
    seed: int
    steps: int
    best_test_acc: float
    final_train_acc: float
    readout_ratio: float
    mean_pos_align: float
    mean_neg_align: float
    richness_metric: float
    wall_time_s: float

    def to_row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


def resolve_gamma(gamma, d):
    """Map the 'lazy' placeholder to the numeric lazy-limit richness."""
    if gamma == LAZY:
        return 1e-5 / math.sqrt(d)
    return float(gamma)


def _vector_sources(L, d, sigma2, run_seed):
    noise = sdtask.NoiseSpec(sigma2=sigma2)
    pool = sdtask.sample_symbol_pool(L, d, seed=derive_seed(run_seed, "pool"))

    def train_source(rng, n):
        return sdtask.make_train_batch(pool, n, noise, rng)

    def test_source(rng, n):
        return sdtask.make_test_batch(n, d, noise, rng)

    return train_source, test_source, "inv_sqrt_d"


def _psvrt_sources(L, d, run_seed):
    cfg = visiontask.PsvrtConfig(
        n_train_patterns=L, patches_per_side=d, seed=derive_seed(run_seed, "psvrt")
    )

    def train_source(rng, n):
        return visiontask.generate_psvrt_batch(cfg, "train", n, rng)

    def test_source(rng, n):
        return visiontask.generate_psvrt_batch(cfg, "test", n, rng)

    return train_source, test_source, "unit"


def _pentomino_sources(L, d, run_seed):
    train_shapes, _ = visiontask.random_shape_split(L, seed=derive_seed(run_seed, "pent"))
    cfg = visiontask.PentominoConfig(train_shapes=train_shapes, patches_per_side=d)

    def train_source(rng, n):
        return visiontask.generate_pentomino_batch(cfg, "train", n, rng)

    def test_source(rng, n):
        return visiontask.generate_pentomino_batch(cfg, "test", n, rng)

    return train_source, test_source, "unit"


def _feature_sources(path):
    data = visiontask.load_feature_dataset(path, normalize=True)

    def source(rng, n):
        return data.make_batch(n, rng)

    return source, source, "inv_sqrt_d"


def run_point(spec, gamma, L, d, sigma2, seed_index, return_train_result=False):
    """Execute one grid point and return its RunRecord (optionally also
    the full TrainResult)."""
    run_seed = derive_seed(
        spec.master_seed, spec.task, str(gamma), L, d, sigma2, seed_index
    )
    if spec.task in ("sd", "sd_noisy"):
        train_source, test_source, scale = _vector_sources(L, d, sigma2, run_seed)
    elif spec.task == "psvrt":
        train_source, test_source, scale = _psvrt_sources(L, d, run_seed)
    elif spec.task == "pentomino":
        train_source, test_source, scale = _pentomino_sources(L, d, run_seed)
    else:
        train_source, test_source, scale = _feature_sources(spec.feature_path)

    probe = test_source(spawn_rng(run_seed, "probe"), 2)
    D = probe.x.shape[1]
    gamma_val = resolve_gamma(gamma, D / 2)

    config = mlp.TrainConfig(
        gamma=gamma_val,
        m=spec.m,
        alpha0=spec.alpha0,
        batch=spec.batch,
        steps=spec.steps,
        eval_every=spec.eval_every,
        test_size=spec.test_size,
        seed=run_seed,
        output_scale=scale,
    )
    t0 = time.perf_counter()
    result = mlp.train(config, train_source, test_source)
    wall = time.perf_counter() - t0

    params = result.params_final
    try:
        ratio = analysis.readout_ratio(params)
    except ValueError:
        ratio = float("nan")
    if params.D % 2 == 0:
        rep = analysis.alignment_report(params)
        pos_align, neg_align = rep.mean_pos_align, rep.mean_neg_align
    else:
        pos_align = neg_align = float("nan")
    probe_batch = test_source(spawn_rng(run_seed, "richness"), 512)
    rich = analysis.richness_metric(result.params_init, params, probe_batch.x)

    record = RunRecord(
        task=spec.task,
        gamma=gamma_val,
        L=L,
        d=d,
        sigma2=sigma2,
        m=spec.m,
        seed=seed_index,
        steps=spec.steps,
        best_test_acc=result.best_test_acc,
        final_train_acc=result.history[-1][1],
        readout_ratio=ratio,
        mean_pos_align=pos_align,
        mean_neg_align=neg_align,
        richness_metric=rich,
        wall_time_s=wall,
    )
    return (record, result) if return_train_result else record


def append_records(path, records):
    """Append finished records to a CSV, writing the header on first use."""
    new_file = not (os.path.exists(path) and os.path.getsize(path) > 0)
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.to_row())


def grid_points(spec):
    for gamma in spec.gamma_list:
        for L in spec.L_list:
            for d in spec.d_list:
                for sigma2 in spec.sigma2_list:
                    for seed_index in range(spec.seeds):
                        yield gamma, L, d, sigma2, seed_index


def run_sweep(spec, out, workers=1, log=None):
    """Run the full grid x seed fan, appending one CSV row per finished
    run.  Returns the list of RunRecords."""
    new_file = not (os.path.exists(out) and os.path.getsize(out) > 0)
    records = []
    points = list(grid_points(spec))
    with open(out, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(CSV_COLUMNS)
            fh.flush()

        def emit(rec):
            writer.writerow(rec.to_row())
            fh.flush()
            records.append(rec)
            if log is not None:
                log(rec)

        if workers <= 1:
            for point in points:
                emit(run_point(spec, *point))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_point, spec, *p) for p in points]
                for fut in futures:
                    emit(fut.result())
    return records


def theory_overlay(L_list, rho=1.5, out=None):
    """Predicted rich accuracy per L, optionally written as CSV."""
    rows = [(int(L), theory.rich_accuracy_prediction(int(L), rho)) for L in L_list]
    if out is not None:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["L", "predicted_acc"])
            writer.writerows(rows)
    return rows


def load_records(path):
    """Read a sweep CSV back into RunRecords."""
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                RunRecord(
                    task=row["task"],
                    gamma=float(row["gamma"]),
                    L=int(row["L"]),
                    d=int(row["d"]),
                    sigma2=float(row["sigma2"]),
                    m=int(row["m"]),
                    seed=int(row["seed"]),
                    steps=int(row["steps"]),
                    best_test_acc=float(row["best_test_acc"]),
                    final_train_acc=float(row["final_train_acc"]),
                    readout_ratio=float(row["readout_ratio"]),
                    mean_pos_align=float(row["mean_pos_align"]),
                    mean_neg_align=float(row["mean_neg_align"]),
                    richness_metric=float(row["richness_metric"]),
                    wall_time_s=float(row["wall_time_s"]),
                )
            )
    return records


# Desk-scale presets mirroring the headline experiment panels.
PRESETS = {
    "fig1c": SweepSpec(
        task="sd",
        gamma_list=(1.0, 0.01, LAZY),
        L_list=(2, 3, 5, 8, 16, 32),
        d_list=(64,),
        seeds=3,
        m=512,
        steps=1500,
    ),
    "fig1bf": SweepSpec(
        task="sd",
        gamma_list=(1.0, 0.01, LAZY),
        L_list=(16,),
        d_list=(16, 64, 256),
        seeds=3,
        m=512,
        steps=1500,
    ),
    "fig2": SweepSpec(
        task="sd_noisy",
        gamma_list=(1.0, 0.01),
        L_list=(4, 16, 64),
        d_list=(64,),
        sigma2_list=(0.1, 0.5),
        seeds=3,
        m=512,
        steps=1500,
    ),
    "fig3bc": SweepSpec(
        task="psvrt",
        gamma_list=(1.0, 0.01),
        L_list=(8, 64),
        d_list=(5,),
        seeds=3,
        m=512,
        steps=3000,
        alpha0=0.5,
        test_size=2000,
    ),
    "fig3ef": SweepSpec(
        task="pentomino",
        gamma_list=(1.0, 0.01),
        L_list=(6, 14),
        d_list=(2,),
        seeds=3,
        m=512,
        steps=3000,
        alpha0=0.5,
        test_size=2000,
    ),
}


def preset(name, **overrides):
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    spec = PRESETS[name]
    return replace(spec, **overrides) if overrides else spec
