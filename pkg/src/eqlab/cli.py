"""Command-line interface.

Subcommands: train, sweep, markov, bayes, kernel, margin, analyze,
psvrt, pentomino, handcrafted.  A plain-text `key = value` config file
can seed any long flag via --config; flags given on the command line
win.  Exit status is 0 on success, 1 with a one-line diagnostic on
error.
"""

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import analysis, bayes, harness, io, markov, mlp, sdtask, theory, visiontask
from .rand import spawn_rng


def load_config(path):
    """Parse `key = value` lines; '#' starts a comment."""
    cfg = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def _inject_config(argv):
    """Expand --config into flags placed before the user's own flags,
    so explicit flags override file values."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        raise ValueError("--config needs a file path")
    rest = argv[:i] + argv[i + 2 :]
    if not rest:
        raise ValueError("--config requires a subcommand")
    injected = []
    for key, val in load_config(path).items():
        flag = "--" + key.replace("_", "-")
        injected.append(flag)
        injected.extend(val.split())
    return [rest[0]] + injected + rest[1:]


def _out_stream(path):
    return open(path, "w", newline="") if path else sys.stdout


def _close(fh):
    if fh is not sys.stdout:
        fh.close()


def cmd_train(args):
    spec = harness.SweepSpec(
        task=args.task,
        gamma_list=(args.gamma,),
        L_list=(args.L,),
        d_list=(args.d,),
        sigma2_list=(args.sigma2,),
        seeds=1,
        m=args.m,
        steps=args.steps,
        batch=args.batch,
        alpha0=args.alpha0,
        eval_every=args.eval_every,
        test_size=args.test_size,
        master_seed=args.seed,
        feature_path=args.features or "",
    )
    record, result = harness.run_point(
        spec, args.gamma, args.L, args.d, args.sigma2, 0, return_train_result=True
    )
    if args.out:
        harness.append_records(args.out, [record])
    if args.save_weights:
        io.save_weights(args.save_weights, result.params_final, result.snapshot)
    print(
        f"task={record.task} gamma={record.gamma:g} L={record.L} d={record.d} "
        f"sigma2={record.sigma2:g} best_test_acc={record.best_test_acc:.4f} "
        f"final_train_acc={record.final_train_acc:.4f} wall={record.wall_time_s:.1f}s"
    )
    return 0


def cmd_sweep(args):
    if args.preset:
        overrides = {}
        if args.steps is not None:
            overrides["steps"] = args.steps
        if args.seeds is not None:
            overrides["seeds"] = args.seeds
        if args.m is not None:
            overrides["m"] = args.m
        spec = harness.preset(args.preset, **overrides)
    else:
        if not (args.gamma and args.L and args.d):
            raise ValueError("sweep needs --preset or --gamma/--L/--d grids")
        gammas = tuple(g if g == harness.LAZY else float(g) for g in args.gamma)
        spec = harness.SweepSpec(
            task=args.task,
            gamma_list=gammas,
            L_list=tuple(args.L),
            d_list=tuple(args.d),
            sigma2_list=tuple(args.sigma2),
            seeds=args.seeds if args.seeds is not None else 6,
            m=args.m if args.m is not None else 1024,
            steps=args.steps if args.steps is not None else 2000,
            batch=args.batch,
            alpha0=args.alpha0,
            eval_every=args.eval_every,
            test_size=args.test_size,
            master_seed=args.master_seed,
            feature_path=args.features or "",
        )
    done = 0

    def log(rec):
        nonlocal done
        done += 1
        print(
            f"[{done}] gamma={rec.gamma:g} L={rec.L} d={rec.d} sigma2={rec.sigma2:g} "
            f"seed={rec.seed} acc={rec.best_test_acc:.4f}",
            flush=True,
        )

    try:
        harness.run_sweep(spec, args.out, workers=args.workers, log=log)
    except OSError as exc:
        raise OSError(f"{exc} (completed {done} rows)") from exc
    if args.overlay:
        harness.theory_overlay(spec.L_list, out=args.overlay)
    print(f"wrote {done} rows to {args.out}")
    return 0


def cmd_markov(args):
    fh = _out_stream(args.out)
    writer = csv.writer(fh)
    writer.writerow(["seed", "mu_hat", "final_alignment", "n_plus_final"])
    for seed in range(args.seeds):
        ensemble, stats = markov.run_markov(
            args.L, args.batch, args.steps, readout_sign=args.sign, seed=seed
        )
        align = markov.limiting_alignment(ensemble)
        writer.writerow(
            [seed, f"{stats.mu_hat:.6f}", f"{align:.6f}", int(stats.n_plus_trace[-1])]
        )
    _close(fh)
    return 0


def cmd_bayes(args):
    pool = None
    if args.prior == "memorizing":
        pool = sdtask.sample_symbol_pool(args.L, args.d, seed=args.seed)
    res = bayes.bayes_accuracy_mc(
        args.prior, args.sigma2, args.d, pool=pool, n=args.n, seed=args.seed
    )
    if args.csv:
        fh = _out_stream(args.out)
        writer = csv.writer(fh)
        writer.writerow(["prior", "sigma2", "d", "L", "n", "accuracy", "ci95"])
        writer.writerow(
            [
                args.prior,
                args.sigma2,
                args.d,
                args.L if pool else "",
                res.n,
                f"{res.accuracy:.6f}",
                f"{res.stderr95:.6f}",
            ]
        )
        _close(fh)
    else:
        print(f"{args.prior} bayes accuracy: {res.accuracy:.4f} +- {res.stderr95:.4f}")
    return 0


def cmd_kernel(args):
    fh = _out_stream(args.out)
    writer = csv.writer(fh)
    writer.writerow(["u", "K"])
    for u in np.linspace(-1.0, 1.0, args.grid):
        writer.writerow([f"{u:.8f}", f"{theory.ntk_kernel(float(u)):.8f}"])
    _close(fh)
    return 0


def cmd_margin(args):
    pool = sdtask.sample_symbol_pool(args.L, args.d, seed=args.seed)
    rng = spawn_rng(args.seed, "margin-batch")
    batch = sdtask.make_train_batch(pool, args.P, sdtask.NoiseSpec(0.0), rng)
    mm = theory.empirical_margin_matrix(batch, normalize=True)
    np.savetxt(args.out, mm.X, delimiter=",")
    eig_path = os.path.splitext(args.out)[0] + ".eigvals.csv"
    np.savetxt(eig_path, np.sort(np.linalg.eigvalsh(mm.X))[::-1], delimiter=",")
    print(f"wrote {args.out} and {eig_path}")
    return 0


def cmd_analyze(args):
    params, snap = io.load_weights(args.checkpoint)
    rep = analysis.alignment_report(params)
    try:
        ratio = analysis.readout_ratio(params)
    except ValueError:
        ratio = float("nan")
    fh = _out_stream(args.out)
    writer = csv.writer(fh)
    writer.writerow(["unit", "a", "cos_align", "norm1", "norm2"])
    for i in range(params.m):
        writer.writerow(
            [
                i,
                f"{rep.a[i]:.8f}",
                f"{rep.cos_align[i]:.8f}",
                f"{rep.norm1[i]:.8f}",
                f"{rep.norm2[i]:.8f}",
            ]
        )
    writer.writerow(
        [
            "summary",
            f"{rep.mean_pos_align:.8f}",
            f"{rep.mean_neg_align:.8f}",
            f"{rep.sign_match_rate:.8f}",
            f"{ratio:.8f}",
        ]
    )
    _close(fh)
    return 0


def _dump_images(batch, out_dir, side, prefix):
    os.makedirs(out_dir, exist_ok=True)
    for i in range(len(batch)):
        img = batch.x[i].reshape(side, side)
        io.write_pgm(os.path.join(out_dir, f"{prefix}_{i:03d}_y{batch.y[i]}.pgm"), img)


def cmd_psvrt(args):
    cfg = visiontask.PsvrtConfig(
        n_train_patterns=args.patterns,
        patch_px=args.patch_px,
        patches_per_side=args.board,
        seed=args.seed,
    )
    rng = spawn_rng(args.seed, "psvrt-cli")
    batch = visiontask.generate_psvrt_batch(cfg, args.split, args.n, rng)
    _dump_images(batch, args.out, cfg.patch_px * cfg.patches_per_side, "psvrt")
    print(f"wrote {len(batch)} images to {args.out}")
    return 0


def cmd_pentomino(args):
    train_shapes, _ = visiontask.random_shape_split(args.train_shapes, seed=args.seed)
    cfg = visiontask.PentominoConfig(
        train_shapes=train_shapes,
        patch_px=args.patch_px,
        patches_per_side=args.board,
        seed=args.seed,
    )
    rng = spawn_rng(args.seed, "pentomino-cli")
    batch = visiontask.generate_pentomino_batch(cfg, args.split, args.n, rng)
    _dump_images(batch, args.out, cfg.patch_px * cfg.patches_per_side, "pentomino")
    print(f"wrote {len(batch)} images to {args.out}")
    return 0


def cmd_handcrafted(args):
    params = theory.build_handcrafted(args.d, args.rho)
    snap = mlp.zero_snapshot(params)
    exact = theory.handcrafted_diff_accuracy(args.rho)
    rng = spawn_rng(args.seed, "handcrafted-cli")
    half = args.samples // 2
    scale = 1.0 / math.sqrt(args.d)
    zs = rng.normal(0.0, scale, size=(half, args.d))
    same_x = np.concatenate([zs, zs], axis=1)
    za = rng.normal(0.0, scale, size=(half, args.d))
    zb = rng.normal(0.0, scale, size=(half, args.d))
    diff_x = np.concatenate([za, zb], axis=1)
    same_acc = float(np.mean(mlp.forward_centered(params, snap, same_x) > 0))
    diff_acc = float(np.mean(mlp.forward_centered(params, snap, diff_x) < 0))
    print(f"closed-form different accuracy: {exact:.4f}")
    print(f"monte-carlo different accuracy: {diff_acc:.4f} ({half} samples)")
    print(f"monte-carlo same accuracy:      {same_acc:.4f} ({half} samples)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eqlab", description="equality-reasoning laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_train(p):
        p.add_argument("--gamma", type=float, default=1.0)
        p.add_argument("--L", type=int, default=16)
        p.add_argument("--d", type=int, default=64)
        p.add_argument("--m", type=int, default=1024)
        p.add_argument("--sigma2", type=float, default=0.0)
        p.add_argument("--steps", type=int, default=2000)
        p.add_argument("--batch", type=int, default=128)
        p.add_argument("--alpha0", type=float, default=0.1)
        p.add_argument("--eval-every", type=int, default=250)
        p.add_argument("--test-size", type=int, default=6000)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="run one training job")
    p.add_argument("--task", choices=harness.TASKS, default="sd")
    add_common_train(p)
    p.add_argument("--features", default="", help="feature file for task=features")
    p.add_argument("--out", default="", help="append the run record to this CSV")
    p.add_argument("--save-weights", default="", help="write final weights here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run a grid of training jobs")
    p.add_argument("--task", choices=harness.TASKS, default="sd")
    p.add_argument("--preset", default="", choices=[""] + sorted(harness.PRESETS))
    p.add_argument("--gamma", nargs="+", default=None)
    p.add_argument("--L", type=int, nargs="+", default=None)
    p.add_argument("--d", type=int, nargs="+", default=None)
    p.add_argument("--sigma2", type=float, nargs="+", default=[0.0])
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--alpha0", type=float, default=0.1)
    p.add_argument("--eval-every", type=int, default=250)
    p.add_argument("--test-size", type=int, default=6000)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--features", default="")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--overlay", default="", help="also write theory overlay CSV here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("markov", help="walker-ensemble simulation")
    p.add_argument("--L", type=int, default=16)
    p.add_argument("--batch", type=int, default=512)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--sign", choices=markov.READOUT_SIGNS, default="positive")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("bayes", help="Monte-Carlo Bayes-optimal accuracy")
    p.add_argument("--prior", choices=("generalizing", "memorizing"), required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--L", type=int, default=16, help="pool size for memorizing prior")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_bayes)

    p = sub.add_parser("kernel", help="print the NTK kernel on a grid")
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("margin", help="empirical margin matrix and eigenvalues")
    p.add_argument("--L", type=int, default=64)
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--P", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("analyze", help="weight-structure report for a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("psvrt", help="dump PSVRT example images")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--patterns", type=int, default=64)
    p.add_argument("--patch-px", type=int, default=5)
    p.add_argument("--board", type=int, default=5)
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_psvrt)

    p = sub.add_parser("pentomino", help="dump pentomino example images")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--train-shapes", type=int, default=14)
    p.add_argument("--patch-px", type=int, default=7)
    p.add_argument("--board", type=int, default=2)
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pentomino)

    p = sub.add_parser("handcrafted", help="four-unit solution sanity check")
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--rho", type=float, default=1.5)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_handcrafted)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _inject_config(argv)
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"eqlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
