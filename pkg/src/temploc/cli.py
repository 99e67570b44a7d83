"""Command-line front end: gen, train, score, detect, eval, bench.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors (missing or
malformed files, dimension mismatches, diverged training).  Every
subcommand prints one machine-parsable ``<cmd> ok key=value ...`` line on
success, and all randomness flows from explicit ``--seed`` flags, so
identical invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import formats
from .evaluation import DEFAULT_SIGMAS, Detection, mean_ap
from .model import init_params, load_checkpoint, read_checkpoint_class_names, save_checkpoint, score_frames
from .postprocess import DurationPrior, PipelineConfig, detect, detect_flat, fit_duration_prior
from .synth import SynthConfig, generate_dataset
from .train import TrainConfig, TrainingDiverged, train

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    # Usage errors must exit 1 (argparse defaults to 2, which we reserve
    # for data errors).
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return int(parts[0]), int(parts[1])


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(","))


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",")]


def build_parser() -> _Parser:
    parser = _Parser(prog="temploc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-clips", type=int, default=200)
    p.add_argument("--test-seqs", type=int, default=20)
    p.add_argument("--num-classes", type=int, default=3)
    p.add_argument("--dim", type=int, default=9)
    p.add_argument("--noise-std", type=float, default=0.3)
    p.add_argument("--part-signal", type=float, default=1.0)
    p.add_argument("--window-len", type=_int_pair, default=(6, 16), metavar="LO,HI")
    p.add_argument("--windows-per-seq", type=_int_pair, default=(2, 4), metavar="LO,HI")
    p.add_argument("--train-len", type=_int_pair, default=(40, 80), metavar="LO,HI")
    p.add_argument("--test-len", type=_int_pair, default=(200, 400), metavar="LO,HI")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train the linear scorer on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="model checkpoint path")
    p.add_argument("--history", help="optional per-epoch loss TSV")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda-cls", type=float, default=0.5)
    p.add_argument("--margin-mode", choices=["gt-length", "fixed"], default="gt-length")
    p.add_argument("--margin-value", type=float, default=1.0)
    p.add_argument("--no-middle-balancing", action="store_true")
    p.add_argument("--boundary-jitter", action="store_true")
    p.add_argument("--lr-decay", action="store_true")
    p.add_argument("--init-scale", type=float, default=0.01)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("score", help="write per-video part-score files")
    p.add_argument("--manifest", required=True, help="test manifest (id, features)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("detect", help="run the detection pipeline on score files")
    p.add_argument("--scores-dir", required=True)
    p.add_argument("--out", required=True, help="detections TSV path")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--fps", type=float, default=5.0)
    p.add_argument("--snippet-seconds", type=float, default=20.0)
    p.add_argument("--overlap-seconds", type=float, default=18.0)
    p.add_argument("--nms-iou", type=float, default=0.4)
    p.add_argument("--no-prior", action="store_true")
    p.add_argument("--no-length-norm", action="store_true")
    p.add_argument("--mode", choices=["sms", "flat"], default="sms")
    p.add_argument("--mean-center", action="store_true", help="flat mode: subtract each class's mean score")
    p.add_argument("--priors", help="JSON duration priors (from a previous fit)")
    p.add_argument("--prior-manifest", help="train manifest to fit duration priors from")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("eval", help="score detections against annotations")
    p.add_argument("--detections", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--sigma", type=_float_list, default=DEFAULT_SIGMAS, metavar="S1,S2,...")
    p.add_argument("--out", help="optional AP table TSV path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="scaling benchmark of the window searches")
    p.add_argument("--ns", type=_int_list, default=[10_000, 31_623, 100_000, 316_228, 1_000_000], metavar="N1,N2,...")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--brute-cap", type=int, default=2000)
    p.add_argument("--out", help="optional report TSV path")
    p.add_argument("--plot-data", help="optional (n, seconds) TSV of the structured search")
    p.set_defaults(func=_cmd_bench)

    return parser


def _cmd_gen(args) -> str:
    config = SynthConfig(
        num_classes=args.num_classes,
        dim=args.dim,
        train_clips=args.train_clips,
        test_sequences=args.test_seqs,
        train_clip_length=args.train_len,
        sequence_length=args.test_len,
        windows_per_sequence=args.windows_per_seq,
        window_length=args.window_len,
        noise_std=args.noise_std,
        part_signal=args.part_signal,
        seed=args.seed,
    )
    paths = generate_dataset(config, args.out)
    return (
        f"gen ok out={paths.root} train_clips={config.train_clips} "
        f"test_seqs={config.test_sequences} classes={config.num_classes} dim={config.dim} seed={config.seed}"
    )


def _cmd_train(args) -> str:
    examples, names = formats.load_train_examples(args.manifest)
    dim = examples[0].features.shape[1]
    config = TrainConfig(
        lambda_cls=args.lambda_cls,
        margin_mode=args.margin_mode,
        margin_value=args.margin_value,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        middle_balancing=not args.no_middle_balancing,
        boundary_jitter=args.boundary_jitter,
        lr_decay=args.lr_decay,
    )
    params = init_params(len(names), dim, seed=args.seed, scale=args.init_scale)
    params, history = train(examples, params, config)
    save_checkpoint(params, args.out, class_names=names)
    if args.history:
        formats.write_history(args.history, history)
    final = history[-1]
    return (
        f"train ok examples={len(examples)} classes={len(names)} dim={dim} "
        f"epochs={config.epochs} final_loc={final.loc_loss:.6f} final_cls={final.cls_loss:.6f} "
        f"final_total={final.total:.6f} out={args.out}"
    )


def _cmd_score(args) -> str:
    params = load_checkpoint(args.checkpoint)
    names = read_checkpoint_class_names(args.checkpoint)
    rows = formats.read_test_manifest(args.manifest)
    base = Path(args.manifest).parent
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def score_one(row):
        video_id, rel = row
        feats = formats.read_feature_file(base / rel)
        tracks = {c: score_frames(params, feats, c) for c in range(params.num_classes)}
        formats.write_scores_file(out_dir / f"{video_id}.scores", names, tracks)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            list(pool.map(score_one, rows))
    else:
        for row in rows:
            score_one(row)
    return f"score ok videos={len(rows)} classes={params.num_classes} out_dir={out_dir}"


def _load_priors(args, names: list[str]) -> dict[int, DurationPrior] | None:
    if args.priors:
        raw = formats.read_priors(args.priors)
        return {
            i: DurationPrior(i, *raw[name]) for i, name in enumerate(names) if name in raw
        }
    if args.prior_manifest:
        rows = formats.read_train_manifest(args.prior_manifest)
        durations: dict[str, list[int]] = {}
        for _, _, window, name in rows:
            durations.setdefault(name, []).append(window.length)
        return {
            i: fit_duration_prior(durations[name], i)
            for i, name in enumerate(names)
            if name in durations
        }
    return None


def _cmd_detect(args) -> str:
    score_files = sorted(Path(args.scores_dir).glob("*.scores"))
    if not score_files:
        raise FileNotFoundError(f"no .scores files in {args.scores_dir}")
    config = PipelineConfig(
        fps=args.fps,
        snippet_seconds=args.snippet_seconds,
        overlap_seconds=args.overlap_seconds,
        k=args.k,
        nms_iou=args.nms_iou,
        use_prior=not args.no_prior,
        use_length_norm=not args.no_length_norm,
    )
    names: list[str] | None = None
    priors: dict[int, DurationPrior] | None = None

    def detect_one(path: Path):
        nonlocal names, priors
        file_names, tracks = formats.read_scores_file(path)
        if names is None:
            names = file_names
            priors = _load_priors(args, names) if config.use_prior else None
        elif file_names != names:
            raise ValueError(f"{path}: class names disagree with {score_files[0]}")
        if args.mode == "sms":
            dets = detect(tracks, priors, config)
        else:
            flat = {
                c: np.asarray(
                    (s.start_scores + s.middle_scores + s.end_scores) / 3.0
                )
                for c, s in tracks.items()
            }
            if args.mean_center:
                flat = {c: t - t.mean() for c, t in flat.items()}
            dets = detect_flat(flat, priors, config)
        return [(path.stem, names[d.class_id], d.window, d.score) for d in dets]

    rows = []
    if args.threads > 1:
        # First file runs alone so names/priors initialize deterministically.
        rows.extend(detect_one(score_files[0]))
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for result in pool.map(detect_one, score_files[1:]):
                rows.extend(result)
    else:
        for path in score_files:
            rows.extend(detect_one(path))
    formats.write_detections(args.out, rows, config.fps)
    prior_state = "on" if (priors and config.use_prior) else "off"
    return (
        f"detect ok videos={len(score_files)} detections={len(rows)} mode={args.mode} "
        f"k={config.k} fps={config.fps:g} prior={prior_state} out={args.out}"
    )


def _cmd_eval(args) -> str:
    det_rows = formats.read_detections(args.detections)
    ann_rows = formats.read_annotations(args.annotations)
    names = sorted({r[1] for r in ann_rows} | {r[1] for r in det_rows})
    ids = {name: i for i, name in enumerate(names)}
    gts: dict[tuple[str, int], list] = {}
    for video_id, name, window in ann_rows:
        gts.setdefault((video_id, ids[name]), []).append(window)
    dets = [Detection(video_id, ids[name], window, score) for video_id, name, window, score in det_rows]
    result = mean_ap(dets, gts, args.sigma)
    header = "class\t" + "\t".join(f"ap@{s:g}" for s in result.sigmas)
    print(header)
    for c in result.classes:
        print(names[c] + "\t" + "\t".join(f"{result.per_class[c][s]:.6f}" for s in result.sigmas))
    print("mAP\t" + "\t".join(f"{result.map_at[s]:.6f}" for s in result.sigmas))
    if args.out:
        formats.write_ap_table(args.out, names, result)
    summary = " ".join(f"map@{s:g}={result.map_at[s]:.6f}" for s in result.sigmas)
    return f"eval ok detections={len(dets)} classes={len(result.classes)} {summary}"


def _cmd_bench(args) -> str:
    report = bench_mod.bench_scaling(
        args.ns, k=args.k, reps=args.reps, seed=args.seed, brute_cap=args.brute_cap
    )
    print("n\tk\talgorithm\treps\tmedian_seconds\ttop1\tmatches_fast")
    for r in report.rows:
        match = "" if r.matches_fast is None else str(r.matches_fast).lower()
        print(f"{r.n}\t{r.k}\t{r.algorithm}\t{r.reps}\t{r.median_seconds:.9f}\t{r.checksum}\t{match}")
    if args.out:
        bench_mod.write_report(args.out, report)
    if args.plot_data:
        pairs = report.medians("sms")
        Path(args.plot_data).write_text(
            "n\tseconds\n" + "\n".join(f"{n}\t{t:.9f}" for n, t in pairs) + "\n"
        )
    slope = bench_mod.loglog_slope(report.medians("sms")) if len(args.ns) >= 2 else float("nan")
    mismatches = sum(1 for r in report.rows if r.matches_fast is False)
    return f"bench ok rows={len(report.rows)} sms_slope={slope:.3f} brute_mismatches={mismatches}"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        summary = args.func(args)
    except (formats.FormatError, FileNotFoundError, OSError, ValueError, TrainingDiverged) as exc:
        print(f"temploc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
