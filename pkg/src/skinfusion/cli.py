"""Command-line driver: fixture -> prepare -> search-train -> eval -> combine -> report."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import reference
from .color import FeatureKind, features_from_rgb
from .data import (
    DataError,
    DataFile,
    PixelPool,
    data_file_name,
    ingest,
    load_pair,
    read_data_files,
    read_manifest,
    sample_indices,
    save_mask,
    select_test_images,
    split_files,
    write_data_file,
    write_manifest,
)
from .ensemble import (
    EnsembleSpec,
    build_stacker_dataset,
    calibrate_threshold,
    compute_weights,
    fuse,
    member_outputs,
    train_stacker,
    weighted_sum,
)
from .evaluate import EvalResult, count, read_report, segment, threshold, write_report
from .fixture import FixtureParams, make_fixture
from .mlp import (
    FormatError,
    Network,
    TrainConfig,
    Topology,
    init_network,
    load_network,
    save_network,
    train_lm,
)
from .search import SearchSettings, coarse_to_fine

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3

# the three features the classifier-fusion stage works with
FUSION_FEATURES = (FeatureKind.CB_MINUS_CR, FeatureKind.CB_OVER_CR, FeatureKind.CR)


@dataclass(frozen=True)
class RunConfig:
    n_train: int
    n_val: int
    files: int
    per_file: int
    runs: int
    n_test: int
    threshold: float = 0.5

    def __post_init__(self):
        counts = (self.n_train, self.n_val, self.files, self.per_file, self.runs)
        if any(c < 1 for c in counts) or self.n_test < 0:
            raise ValueError("all counts must be >= 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")


SCALES = {
    "desk": RunConfig(n_train=600, n_val=600, files=3, per_file=200, runs=5, n_test=20),
    "full": RunConfig(
        n_train=420_000, n_val=420_000, files=30, per_file=14_000, runs=30, n_test=100
    ),
}


def derive_seed(seed: int, tag: str) -> int:
    ss = np.random.SeedSequence([int(seed), zlib.crc32(tag.encode())])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _log(msg: str) -> None:
    print(msg, flush=True)


def _dump_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def _rel(path, root) -> str:
    return Path(os.path.relpath(Path(path).resolve(), Path(root).resolve())).as_posix()


# -- fixture ------------------------------------------------------------------


def run_fixture(out, seed: int = 1, n_images: int = 30, size: int = 64, separation: float = 1.0):
    params = FixtureParams(n_images=n_images, width=size, height=size,
                           separation=separation, seed=seed)
    manifest = make_fixture(out, params)
    _log(f"fixture: {n_images} images of {size}x{size} -> {n_images * size * size} labelled pixels in {out}")
    return manifest


# -- prepare ------------------------------------------------------------------


def run_prepare(
    manifest_path,
    out,
    seed: int,
    cfg: RunConfig,
    balanced: bool = False,
    exclude_test: bool = True,
    stacker: bool = True,
) -> dict:
    out = Path(out)
    manifest = read_manifest(manifest_path)
    for img, mask in manifest.entries:
        for p in (img, mask):
            if not Path(p).is_file():
                raise FileNotFoundError(f"file listed in {manifest_path} not found: {p}")
    test_ids = select_test_images(len(manifest), cfg.n_test, derive_seed(seed, "test"))
    excluded = set(test_ids) if exclude_test else set()
    pool_ids = [i for i in range(len(manifest)) if i not in excluded]
    pool = ingest(manifest, pool_ids)
    if cfg.n_train != cfg.files * cfg.per_file or cfg.n_val != cfg.files * cfg.per_file:
        raise DataError(
            f"{cfg.files} files x {cfg.per_file} pixels does not match "
            f"n_train={cfg.n_train}, n_val={cfg.n_val}"
        )

    tr, va = sample_indices(pool, cfg.n_train, cfg.n_val, derive_seed(seed, "pools"), balanced)
    files = split_files(pool.take(tr), pool.take(va), cfg.files, cfg.per_file,
                        derive_seed(seed, "split"))
    groups = {"files": files}
    if stacker:
        str_, sva = sample_indices(pool, cfg.n_train, cfg.n_val, derive_seed(seed, "stacker-pools"),
                                   balanced, exclude=np.concatenate([tr, va]))
        groups["stacker"] = split_files(pool.take(str_), pool.take(sva), cfg.files, cfg.per_file,
                                        derive_seed(seed, "stacker-split"))
    for sub, dfs in groups.items():
        (out / sub).mkdir(parents=True, exist_ok=True)
        for df in dfs:
            write_data_file(df, out / sub / data_file_name(df.index))

    write_manifest(manifest.subset(test_ids), out / "test_manifest.tsv", relative_to=out)
    summary = {
        "seed": seed,
        "manifest_images": len(manifest),
        "pool_images": len(pool_ids),
        "pool_pixels": len(pool),
        "pool_skin_fraction": round(pool.skin_fraction, 6),
        "n_train": cfg.n_train,
        "n_val": cfg.n_val,
        "files": cfg.files,
        "per_file": cfg.per_file,
        "balanced": balanced,
        "test_images": len(test_ids),
        "test_excluded_from_pools": exclude_test,
        "train_skin_fraction": round(float(pool.label[tr].mean()), 6),
        "val_skin_fraction": round(float(pool.label[va].mean()), 6),
        "stacker_files": stacker,
    }
    _dump_json(summary, out / "prepare.json")
    _log(
        f"prepare: pool {len(pool)} pixels from {len(pool_ids)} images "
        f"(skin {summary['pool_skin_fraction']:.3f}); {cfg.files} files x "
        f"({cfg.per_file}+{cfg.per_file}); {len(test_ids)} test images"
    )
    return summary


# -- search + train -----------------------------------------------------------


def _feature_split(df: DataFile, kinds):
    return (
        (features_from_rgb(df.train.rgb, kinds), df.train.label.astype(np.float64)),
        (features_from_rgb(df.val.rgb, kinds), df.val.label.astype(np.float64)),
    )


def model_name(kinds: Sequence[FeatureKind]) -> str:
    return "+".join(k.value for k in kinds)


def run_search_train(
    data_dir,
    kinds: Sequence[FeatureKind],
    out,
    seed: int,
    runs: int,
    min_files: int,
    cfg: TrainConfig = TrainConfig(),
    name: Optional[str] = None,
) -> tuple[Path, object]:
    data_dir, out = Path(data_dir), Path(out)
    files = read_data_files(data_dir / "files")
    splits = [_feature_split(df, kinds) for df in files]
    settings = SearchSettings(runs=runs, min_files=min_files, base_seed=derive_seed(seed, "search"))
    report = coarse_to_fine(kinds, splits, cfg, settings)

    pooled_train = PixelPool.concat([df.train for df in files])
    pooled_val = PixelPool.concat([df.val for df in files])
    final_seed = derive_seed(seed, "final")
    net = init_network(Topology(len(kinds), report.hn_star), kinds, final_seed)
    res = train_lm(
        net,
        (features_from_rgb(pooled_train.rgb, kinds), pooled_train.label),
        (features_from_rgb(pooled_val.rgb, kinds), pooled_val.label),
        cfg,
    )
    final = res.network.with_params(res.network.params, data="pooled", n_files=len(files))

    out.mkdir(parents=True, exist_ok=True)
    name = name or model_name(kinds)
    model_path = out / f"{name}.json"
    save_network(final, model_path)
    report.save(out / f"{name}.search.json")
    (out / f"{name}.search.csv").write_text(report.to_csv())
    _log(
        f"search-train {name}: HN_B={report.hn_b} fine={report.fine_range} "
        f"-> {final.topology} (val MSE {final.provenance['val_mse']:.5f})"
    )
    return model_path, report


# -- eval ---------------------------------------------------------------------


class _Models:
    """Loads networks and ensemble specs, caching member output maps per image."""

    def __init__(self):
        self.nets: dict[Path, Network] = {}
        self.raw: dict[tuple[Path, int], np.ndarray] = {}

    def net(self, path) -> Network:
        path = Path(path).resolve()
        if path not in self.nets:
            self.nets[path] = load_network(path)
        return self.nets[path]

    def raw_map(self, path, image_id: int, image) -> np.ndarray:
        key = (Path(path).resolve(), image_id)
        if key not in self.raw:
            _, self.raw[key] = segment(self.net(path), image)
        return self.raw[key]

    def predict(self, path, image_id: int, image, t: float) -> np.ndarray:
        path = Path(path)
        doc = json.loads(path.read_text())
        if doc.get("format") == "skinfusion-ensemble":
            spec = EnsembleSpec.from_dict(doc)
            members = [path.parent / m for m in spec.members]
            raws = [self.raw_map(m, image_id, image) for m in members]
            stacker = self.net(path.parent / spec.stacker) if spec.stacker else None
            return fuse(spec, raws, stacker, t)
        return threshold(self.raw_map(path, image_id, image), t)


def classifier_id(path) -> str:
    return Path(path).name.removesuffix(".json")


def run_eval(
    models: Sequence,
    test_manifest,
    out,
    t: float = 0.5,
    dump_masks=None,
    cache: Optional[_Models] = None,
) -> list[tuple[str, EvalResult]]:
    manifest = read_manifest(test_manifest)
    if len(manifest) == 0:
        raise DataError("empty test set")
    cache = cache or _Models()
    results = {str(m): EvalResult(0, 0, 0, 0) for m in models}
    for image_id in range(len(manifest)):
        img, truth = load_pair(manifest, image_id)
        for m in models:
            pred = cache.predict(m, image_id, img, t)
            results[str(m)] = results[str(m)] + count(pred, truth)
            if dump_masks is not None:
                d = Path(dump_masks) / classifier_id(m)
                d.mkdir(parents=True, exist_ok=True)
                save_mask(pred, d / Path(manifest.entries[image_id][0]).with_suffix(".png").name)
    rows = [(classifier_id(m), results[str(m)]) for m in models]
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    write_report(rows, out)
    for name, r in rows:
        _log(f"eval {name}: CDR {r.cdr:.2f}  FAR {r.far:.2f}  FRR {r.frr:.2f}")
    return rows


# -- combine ------------------------------------------------------------------


def _calibration_pool(data_dir) -> PixelPool:
    return PixelPool.concat([df.val for df in read_data_files(Path(data_dir) / "files")])


def run_combine(
    rule: str,
    models: Sequence,
    out,
    seed: int = 0,
    calibrate=None,
    cdr_report=None,
    data_dir=None,
    runs: int = 5,
    min_files: int = 3,
    t: float = 0.5,
    cfg: TrainConfig = TrainConfig(),
) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    members = [Path(m) for m in models]
    for m in members:
        if not m.is_file():
            raise FileNotFoundError(f"model not found: {m}")
    rel_members = [_rel(m, out.parent) for m in members]
    notes: dict = {}
    weights = None
    threshold_ = t
    stacker_rel = None

    if rule == "sow":
        nets = [load_network(m) for m in members]
        if cdr_report is not None:
            table = {name: r for name, r in read_report(cdr_report)}
            missing = [classifier_id(m) for m in members if classifier_id(m) not in table]
            if missing:
                raise DataError(f"{cdr_report} has no rows for {missing}")
            cdrs = [round(table[classifier_id(m)].cdr, 2) for m in members]
            notes["cdr_source"] = _rel(cdr_report, out.parent)
        else:
            if calibrate is None:
                raise DataError("sum-of-weights needs --cdr-report or --calibrate")
            pool = _calibration_pool(calibrate)
            outs = member_outputs(nets, pool.rgb)
            cdrs = [count(threshold(outs[:, j], t), pool.label).cdr for j in range(len(nets))]
            notes["cdr_source"] = "calibration pool"
        weights = compute_weights(cdrs)
        if calibrate is not None:
            pool = _calibration_pool(calibrate)
            sums = weighted_sum(list(member_outputs(nets, pool.rgb).T), weights)
            threshold_ = calibrate_threshold(sums, pool.label)
            notes["threshold_source"] = "calibrated on validation pool"
        else:
            notes["threshold_source"] = "fixed"
    elif rule == "stack":
        if data_dir is None:
            raise DataError("stacking needs --data (a prepared directory with stacker files)")
        nets = [load_network(m) for m in members]
        st_files = read_data_files(Path(data_dir) / "stacker")
        splits = [(build_stacker_dataset(nets, df.train), build_stacker_dataset(nets, df.val))
                  for df in st_files]
        pooled_tr = PixelPool.concat([df.train for df in st_files])
        pooled_va = PixelPool.concat([df.val for df in st_files])
        settings = SearchSettings(runs=runs, min_files=min_files,
                                  base_seed=derive_seed(seed, "stacker-search"))
        stacker, report = train_stacker(
            splits,
            build_stacker_dataset(nets, pooled_tr),
            build_stacker_dataset(nets, pooled_va),
            cfg,
            settings,
            seed=derive_seed(seed, "stacker-final"),
        )
        stem = out.name.removesuffix(".json")
        save_network(stacker, out.parent / f"{stem}.stacker.json")
        report.save(out.parent / f"{stem}.stacker.search.json")
        (out.parent / f"{stem}.stacker.search.csv").write_text(report.to_csv())
        stacker_rel = f"{stem}.stacker.json"
        notes["stacker_topology"] = str(stacker.topology)

    spec = EnsembleSpec(rule, rel_members, weights, threshold_, stacker_rel, notes)
    spec.save(out)
    extra = ""
    if weights is not None:
        extra = f" weights={tuple(round(w, 4) for w in weights.weights)} t={threshold_:.2f}"
    if stacker_rel:
        extra = f" stacker={notes['stacker_topology']}"
    _log(f"combine {rule}: {', '.join(classifier_id(m) for m in members)}{extra}")
    return out


# -- report -------------------------------------------------------------------


def _is_single(name: str) -> bool:
    return "+" not in name and not name.startswith(("and", "or", "vote", "sow", "stack"))


def run_report(inputs: Sequence, out=None, with_reference: bool = False) -> list[tuple[str, EvalResult]]:
    if not inputs:
        raise DataError("no reports")
    rows = []
    for p in inputs:
        rows.extend(read_report(p))
    rows.sort(key=lambda r: (-r[1].correct / r[1].total, r[0]))
    lines = [f"{'classifier':<40} {'CDR':>7} {'FAR':>7} {'FRR':>7} {'total':>9}"]
    for name, r in rows:
        lines.append(f"{name:<40} {r.cdr:>7.2f} {r.far:>7.2f} {r.frr:>7.2f} {r.total:>9d}")
    singles = [r for r in rows if _is_single(r[0])]
    fused = [r for r in rows if not _is_single(r[0])]
    if singles and fused:
        bs, bf = singles[0], fused[0]
        lines.append(
            f"best combination {bf[0]} vs best single {bs[0]}: "
            f"{bf[1].cdr - bs[1].cdr:+.2f} CDR points"
        )
    if with_reference:
        lines.append("")
        lines.append("published reference (Compaq database):")
        for ref in reference.ALL_ROWS:
            lines.append(f"{'ref ' + ref.classifier:<40} {ref.cdr:>7.2f} {ref.far:>7.2f} {ref.frr:>7.2f}")
        lines.append(f"published gain of best fusion over best single feature: {reference.headline_gain():+.2f}")
    text = "\n".join(lines) + "\n"
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_report(rows, out)
        out.with_suffix(".txt").write_text(text)
    sys.stdout.write(text)
    return rows


# -- full pipeline ------------------------------------------------------------


def run_pipeline(
    out,
    seed: int = 42,
    cfg: RunConfig = SCALES["desk"],
    fixture_images: int = 30,
    fixture_size: int = 64,
    separation: float = 1.0,
    features: Sequence[FeatureKind] = FUSION_FEATURES,
    train_cfg: TrainConfig = TrainConfig(),
    min_files: Optional[int] = None,
) -> list[tuple[str, EvalResult]]:
    """Fixture corpus through every stage, including all five fusion rules."""
    out = Path(out)
    min_files = cfg.files if min_files is None else min_files
    run_fixture(out / "fixture", seed=derive_seed(seed, "fixture"), n_images=fixture_images,
                size=fixture_size, separation=separation)
    run_prepare(out / "fixture" / "manifest.tsv", out / "data", seed, cfg)
    models = []
    for k in features:
        path, _ = run_search_train(out / "data", [k], out / "models", seed, cfg.runs, min_files, train_cfg)
        models.append(path)
    test_manifest = out / "data" / "test_manifest.tsv"
    cache = _Models()
    singles_csv = out / "reports" / "singles.csv"
    run_eval(models, test_manifest, singles_csv, cfg.threshold, cache=cache)

    ens = out / "ensembles"
    specs = [
        run_combine("and", models, ens / "and.json", seed),
        run_combine("or", models, ens / "or.json", seed),
        run_combine("vote", models, ens / "vote.json", seed),
        run_combine("sow", models, ens / "sow.json", seed, calibrate=out / "data",
                    cdr_report=singles_csv),
        run_combine("stack", models, ens / "stack.json", seed, data_dir=out / "data",
                    runs=cfg.runs, min_files=min_files, cfg=train_cfg),
    ]
    fused_csv = out / "reports" / "ensembles.csv"
    run_eval(specs, test_manifest, fused_csv, cfg.threshold, cache=cache)
    return run_report([singles_csv, fused_csv], out / "reports" / "summary.csv")


# -- argument parsing ---------------------------------------------------------


def _common(defaults: bool) -> argparse.ArgumentParser:
    """Global flags, accepted before or after the subcommand."""
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(42), help="base seed (default 42)")
    p.add_argument("--out", default=d(None), help="output file or directory")
    p.add_argument("--scale", choices=sorted(SCALES), default=d("desk"),
                   help="default sizes: desk (3 files x 200, 5 runs) or full (30 x 14000, 30 runs)")
    return p


def _kinds(values) -> list[FeatureKind]:
    return [FeatureKind.parse(v) for v in values]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skinfusion", parents=[_common(True)],
                                     description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(False)

    p = sub.add_parser("fixture", parents=[common], help="generate a synthetic image/mask corpus")
    p.add_argument("--n-images", type=int, default=30)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--separation", type=float, default=1.0)

    p = sub.add_parser("prepare", parents=[common], help="sample pixel pools and data files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--n-train", type=int)
    p.add_argument("--n-val", type=int)
    p.add_argument("--files", type=int)
    p.add_argument("--per-file", type=int)
    p.add_argument("--n-test", type=int)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--no-exclude-test", action="store_true",
                   help="let pool pixels come from test images too")
    p.add_argument("--no-stacker", action="store_true", help="skip the stacker sample")

    p = sub.add_parser("search-train", parents=[common],
                       help="coarse-to-fine hidden size search, then train the final network")
    p.add_argument("--data", required=True, help="directory written by prepare")
    p.add_argument("--features", nargs="+", required=True,
                   help="feature kinds, e.g. cb_minus_cr cb_over_cr cr")
    p.add_argument("--runs", type=int)
    p.add_argument("--min-files", type=int)
    p.add_argument("--max-epochs", type=int, default=500)
    p.add_argument("--name")

    p = sub.add_parser("segment", parents=[common], help="segment one image with one network")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--raw", help="also save the raw output map (.npy)")

    p = sub.add_parser("eval", parents=[common], help="CDR/FAR/FRR of models on test images")
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--test-manifest", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--dump-masks")

    p = sub.add_parser("combine", parents=[common], help="build a fused classifier")
    p.add_argument("--rule", choices=["and", "or", "vote", "sow", "stack"], required=True)
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--calibrate", help="prepared directory whose validation pool sets the threshold")
    p.add_argument("--cdr-report", help="eval CSV supplying member CDRs for the weights")
    p.add_argument("--data", help="prepared directory with stacker files (stack rule)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--runs", type=int)
    p.add_argument("--min-files", type=int)

    p = sub.add_parser("report", parents=[common], help="merge eval reports into one table")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--with-reference", action="store_true")

    p = sub.add_parser("pipeline", parents=[common], help="run everything on a synthetic fixture")
    p.add_argument("--n-images", type=int, default=30)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--features", nargs="+", default=[k.value for k in FUSION_FEATURES])
    return parser


def _scaled(args) -> RunConfig:
    base = SCALES[args.scale]
    files = getattr(args, "files", None) or base.files
    per_file = getattr(args, "per_file", None) or base.per_file
    return RunConfig(
        n_train=getattr(args, "n_train", None) or files * per_file,
        n_val=getattr(args, "n_val", None) or files * per_file,
        files=files,
        per_file=per_file,
        runs=getattr(args, "runs", None) or base.runs,
        n_test=base.n_test if getattr(args, "n_test", None) is None else args.n_test,
        threshold=getattr(args, "threshold", base.threshold),
    )


def _require_out(args) -> Path:
    if args.out is None:
        raise argparse.ArgumentTypeError(f"{args.command} needs --out")
    return Path(args.out)


def dispatch(args) -> None:
    cmd = args.command
    cfg = _scaled(args)
    if cmd == "fixture":
        run_fixture(_require_out(args), args.seed, args.n_images, args.size, args.separation)
    elif cmd == "prepare":
        if not Path(args.manifest).is_file():
            raise FileNotFoundError(f"manifest not found: {args.manifest}")
        run_prepare(args.manifest, _require_out(args), args.seed, cfg, args.balanced,
                    not args.no_exclude_test, not args.no_stacker)
    elif cmd == "search-train":
        run_search_train(args.data, _kinds(args.features), _require_out(args), args.seed,
                         cfg.runs, args.min_files or SCALES[args.scale].files,
                         TrainConfig(max_epochs=args.max_epochs), args.name)
    elif cmd == "segment":
        net = load_network(args.model)
        mask, raw = segment(net, args.image, args.threshold)
        out = _require_out(args)
        save_mask(mask, out)
        if args.raw:
            np.save(args.raw, raw)
        _log(f"segment: {int(mask.sum())} of {mask.size} pixels marked skin -> {out}")
    elif cmd == "eval":
        run_eval(args.models, args.test_manifest, _require_out(args), args.threshold,
                 args.dump_masks)
    elif cmd == "combine":
        run_combine(args.rule, args.models, _require_out(args), args.seed, args.calibrate,
                    args.cdr_report, args.data, cfg.runs,
                    args.min_files or SCALES[args.scale].files, args.threshold)
    elif cmd == "report":
        run_report(args.inputs, args.out, args.with_reference)
    elif cmd == "pipeline":
        run_pipeline(_require_out(args), args.seed, cfg, args.n_images, args.size,
                     args.separation, _kinds(args.features))


def _error(code: int, exc: BaseException) -> int:
    line = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
    print(json.dumps(line), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        dispatch(args)
    except (OSError, DataError, FormatError, argparse.ArgumentTypeError, csv.Error,
            json.JSONDecodeError) as exc:
        return _error(EXIT_INPUT, exc)
    except ValueError as exc:
        # bad argument values surface as ValueError from the constructors
        return _error(EXIT_INPUT, exc)
    except Exception as exc:  # noqa: BLE001
        return _error(EXIT_RUNTIME, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
