"""Batch command-line driver.

Design rules shared by every subcommand:

* flags are validated before any input is read (exit 1 on usage problems,
  2 on runtime errors, with ``ERR:<code>:`` prefixes on stderr);
* results are computed fully before anything is written, and each file is
  written to a temp name and renamed, so a failed run leaves no partial
  reports;
* every report embeds the resolved configuration that affects its numbers
  (the luma convention and RNG algorithm included). Execution-only knobs
  such as --threads are deliberately not embedded: runs with different
  thread counts must produce identical reports;
* numeric CSV fields use 17 significant digits, enough to round-trip
  float64 exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .correlate import (
    CorrSurface,
    VerifyConfig,
    autocorr,
    ncc_surface,
    pce_from_surface,
    verify,
)
from .denoise import DenoiseConfig, residual
from .errors import BadArgumentError, ToolkitError, UnreadableFileError
from .fingerprint import (
    FingerprintAccumulator,
    accumulate,
    finalize,
    load_fingerprint,
    merge_tree,
    save_fingerprint,
    wiener_fft,
    zero_mean,
)
from .jpegmeta import detect_mfp
from .lattice import cross_model_screen, detect_lattice
from .localmap import (
    BlockCorrMap,
    BokehMask,
    ShiftMap,
    adapt_fingerprint,
    block_corr_map,
    block_grid,
    block_shift_map,
    bokeh_mask,
    masked_pce,
)
from .rocreport import ScoreEntry, ScoreSet, auc, rates_at, roc
from .svgplot import curve_svg, heatmap_svg, scatter_svg, shift_field_svg
from .synthcam import RNG_ALGORITHM, PatternSpec, SynthSpec, capture, gen_prnu
from .tensorio import (
    DatasetManifest,
    ManifestEntry,
    analysis_luma,
    crop_center,
    load_image,
    load_manifest,
    load_plane,
    save_image,
    save_manifest,
    save_plane,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, writing nothing."""

    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_json(path: str, obj) -> None:
    _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _atomic_save(path: str, saver) -> None:
    tmp = f"{path}.tmp"
    saver(tmp)
    os.replace(tmp, path)


def _csv_text(config: dict, header: str, rows) -> str:
    lines = [f"# {k}={config[k]}" for k in sorted(config)]
    lines.append(header)
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def _parallel_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _base_config(args, command: str) -> dict:
    return {
        "command": command,
        "tool_version": __version__,
        "kernels_backend": BACKEND,
        "luma": "bt601",
        "seed": getattr(args, "seed", 0),
    }


def _denoise_config(args) -> DenoiseConfig:
    return DenoiseConfig(levels=args.levels, base_noise_sigma=args.sigma0)


def _denoise_config_dict(cfg: DenoiseConfig) -> dict:
    return {
        "denoise_levels": cfg.levels,
        "denoise_sigma0": cfg.base_noise_sigma,
        "denoise_windows": ",".join(str(w) for w in cfg.window_sizes),
    }


def _ensure_outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _resolve_entry(manifest_path: str, entry_path: str) -> str:
    """Manifest entries are taken relative to the manifest's directory."""
    if os.path.isabs(entry_path):
        return entry_path
    return os.path.join(os.path.dirname(os.path.abspath(manifest_path)), entry_path)


def _add_common(parser, *, denoise_flags=False):
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    if denoise_flags:
        parser.add_argument("--sigma0", type=float, default=3.0)
        parser.add_argument("--levels", type=int, default=4)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_fingerprint(args) -> None:
    cfg = _denoise_config(args)
    manifest = load_manifest(args.manifest)
    refs = manifest.with_role("reference")
    if not refs:
        raise BadArgumentError("manifest holds no reference entries")

    def one(entry):
        img = load_image(_resolve_entry(args.manifest, entry.path), source_tag=entry.path)
        res = residual(img, cfg)
        shard = FingerprintAccumulator.empty(img.height, img.width)
        return accumulate(shard, img, res, downweight_saturated=not args.keep_saturated)

    shards = _parallel_map(one, refs, args.threads)
    acc = merge_tree(shards)
    fp = finalize(acc, eps=args.eps)
    if args.zero_mean:
        fp = zero_mean(fp)
    if args.wiener is not None:
        fp = wiener_fft(fp, strength=args.wiener)

    out = _ensure_outdir(args.out)
    config = _base_config(args, "fingerprint")
    config.update(_denoise_config_dict(cfg))
    config.update(
        eps=args.eps,
        saturation_downweight=not args.keep_saturated,
        post_flags=",".join(fp.post_flags),
        reference_count=acc.count,
    )
    fp_path = os.path.join(out, f"{args.name}.fpt")
    _atomic_save(fp_path, lambda p: save_fingerprint(fp, p, denoise_config=cfg))
    os.replace(f"{fp_path}.tmp.meta", f"{fp_path}.meta")
    _atomic_write_json(os.path.join(out, f"{args.name}.json"), {"config": config})


def _cmd_verify(args) -> None:
    vcfg = VerifyConfig(tau=args.tau, search=args.search)
    cfg = _denoise_config(args)
    fp = load_fingerprint(args.fingerprint)
    manifest = load_manifest(args.manifest)
    tests = manifest.with_role("test")
    if not tests:
        raise BadArgumentError("manifest holds no test entries")
    fingerprint_id = os.path.basename(args.fingerprint)

    def one(entry):
        img = load_image(_resolve_entry(args.manifest, entry.path), source_tag=entry.path)
        res = residual(img, cfg)
        term = fp.plane * analysis_luma(img)
        result = pce_from_surface(ncc_surface(res.plane, term))
        decision = verify(result, vcfg)
        return entry, result, decision

    results = _parallel_map(one, tests, args.threads)
    rows = [
        ",".join(
            [
                entry.path,
                fingerprint_id,
                _fmt(result.pce),
                str(result.peak_shift[0]),
                str(result.peak_shift[1]),
                _fmt(result.rho_max),
                decision,
            ]
        )
        for entry, result, decision in results
    ]
    config = _base_config(args, "verify")
    config.update(_denoise_config_dict(cfg))
    config.update(tau=args.tau, search=args.search, fingerprint=fingerprint_id)
    out = _ensure_outdir(args.out)
    _atomic_write_text(
        os.path.join(out, "verify.csv"),
        _csv_text(
            config,
            "test_path,fingerprint_id,pce,peak_s1,peak_s2,rho_max,decision",
            rows,
        ),
    )


def _cmd_autocorr(args) -> None:
    fp = load_fingerprint(args.fingerprint)
    if args.window % 2 == 0 or args.window > min(fp.plane.shape):
        raise BadArgumentError("window must be odd and fit the fingerprint")
    surface = autocorr(fp.plane)
    window_view = crop_center(surface.centered(), args.window, args.window)
    out = _ensure_outdir(args.out)
    config = _base_config(args, "autocorr")
    config.update(window=args.window, fingerprint=os.path.basename(args.fingerprint))
    _atomic_save(os.path.join(out, "autocorr.fpt"), lambda p: save_plane(surface.values, p))
    _atomic_write_text(
        os.path.join(out, "autocorr.svg"),
        heatmap_svg(window_view, title="centered autocorrelation window"),
    )
    _atomic_write_json(os.path.join(out, "autocorr.json"), {"config": config})


def _cmd_lattice(args) -> None:
    values = load_plane(args.surface)
    surface = CorrSurface(values=np.clip(values, -1.0, 1.0))
    report = detect_lattice(surface, window=args.window, min_peak=args.min_peak)
    config = _base_config(args, "lattice")
    config.update(window=args.window, min_peak=args.min_peak, surface=os.path.basename(args.surface))
    out = _ensure_outdir(args.out)
    _atomic_write_json(
        os.path.join(out, "lattice.json"),
        {"config": config, "report": report.to_json()},
    )


def _cmd_collide(args) -> None:
    if len(args.fingerprints) < 2:
        raise BadArgumentError("collide needs at least 2 fingerprints")
    fps = [load_fingerprint(path) for path in args.fingerprints]
    names = [os.path.splitext(os.path.basename(p))[0] for p in args.fingerprints]
    vcfg = VerifyConfig(tau=args.tau)
    reports = cross_model_screen(fps, config=vcfg, window=args.window, min_peak=args.min_peak)

    config = _base_config(args, "collide")
    config.update(tau=args.tau, window=args.window, min_peak=args.min_peak)
    matrix = {}
    rows = []
    groups = {}
    for (i, j), report in sorted(reports.items()):
        pair = f"{names[i]}|{names[j]}"
        matrix[pair] = report.to_json()
        rows.append(
            ",".join(
                [pair, names[i], names[j], _fmt(report.pce_ab.pce), report.verdict]
            )
        )
        groups.setdefault(f"{names[i]} vs {names[j]}", []).append(report.pce_ab.pce)
    out = _ensure_outdir(args.out)
    _atomic_write_json(os.path.join(out, "collide.json"), {"config": config, "pairs": matrix})
    _atomic_write_text(
        os.path.join(out, "scatter.csv"),
        _csv_text(config, "pair_id,group_a,group_b,pce,verdict", rows),
    )
    _atomic_write_text(
        os.path.join(out, "scatter.svg"),
        scatter_svg(groups, title="pairwise fingerprint PCE"),
    )


def _cmd_hdr_map(args) -> None:
    cfg = _denoise_config(args)
    fp = load_fingerprint(args.fingerprint)
    img = load_image(args.image)
    res = residual(img, cfg)
    term = fp.plane * analysis_luma(img)
    smap = block_shift_map(
        res.plane, term, block=args.block, search_radius=args.search_radius
    )
    config = _base_config(args, "hdr-map")
    config.update(_denoise_config_dict(cfg))
    config.update(
        block=args.block,
        search_radius=args.search_radius,
        fingerprint=os.path.basename(args.fingerprint),
        image=args.image,
    )
    out = _ensure_outdir(args.out)
    _atomic_write_json(
        os.path.join(out, "hdr_map.json"), {"config": config, "map": smap.to_json()}
    )
    _atomic_write_text(
        os.path.join(out, "hdr_map.svg"),
        shift_field_svg(smap.shifts, smap.confidences, title="block shift field"),
    )
    _atomic_save(
        os.path.join(out, "hdr_map_d1.fpt"),
        lambda p: save_plane(smap.shifts[:, :, 0].astype(np.float64), p),
    )
    _atomic_save(
        os.path.join(out, "hdr_map_d2.fpt"),
        lambda p: save_plane(smap.shifts[:, :, 1].astype(np.float64), p),
    )
    _atomic_save(
        os.path.join(out, "hdr_map_confidence.fpt"),
        lambda p: save_plane(smap.confidences, p),
    )


def _cmd_adapt(args) -> None:
    fp = load_fingerprint(args.fingerprint)
    with open(args.map, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    smap = ShiftMap.from_json(payload["map"] if "map" in payload else payload)
    adapted = adapt_fingerprint(fp, smap)
    out = _ensure_outdir(args.out)
    fp_path = os.path.join(out, f"{args.name}.fpt")
    _atomic_save(fp_path, lambda p: save_fingerprint(adapted, p))
    os.replace(f"{fp_path}.tmp.meta", f"{fp_path}.meta")


def _cmd_bokeh_map(args) -> None:
    cfg = _denoise_config(args)
    fp = load_fingerprint(args.fingerprint)
    img = load_image(args.image)
    res = residual(img, cfg)
    term = fp.plane * analysis_luma(img)
    bmap = block_corr_map(res.plane, term, block=args.block)
    config = _base_config(args, "bokeh-map")
    config.update(_denoise_config_dict(cfg))
    config.update(block=args.block, image=args.image)
    out = _ensure_outdir(args.out)
    _atomic_write_json(
        os.path.join(out, "bokeh_map.json"), {"config": config, "map": bmap.to_json()}
    )
    _atomic_save(os.path.join(out, "bokeh_map.fpt"), lambda p: save_plane(bmap.grid, p))
    _atomic_write_text(
        os.path.join(out, "bokeh_map.svg"),
        heatmap_svg(bmap.grid, cell=8, title="block correlation map"),
    )


def _mask_to_json(mask: BokehMask, dims) -> dict:
    return {
        "block": mask.block,
        "dims": list(dims),
        "threshold_used": mask.threshold_used,
        "degenerate": mask.degenerate,
        "block_mask": mask.block_mask.astype(int).tolist(),
    }


def _mask_from_json(obj: dict) -> BokehMask:
    block = int(obj["block"])
    dims = tuple(obj["dims"])
    block_mask = np.asarray(obj["block_mask"], dtype=bool)
    pixel = np.zeros(dims, dtype=np.float64)
    for r0, c0, bh, bw in block_grid(dims[0], dims[1], block, block):
        if block_mask[r0 // block, c0 // block]:
            pixel[r0 : r0 + bh, c0 : c0 + bw] = 1.0
    return BokehMask(
        block_mask=block_mask,
        pixel_mask=pixel,
        threshold_used=float(obj["threshold_used"]),
        block=block,
        degenerate=bool(obj["degenerate"]),
    )


def _cmd_bokeh_mask(args) -> None:
    if args.auto == (args.threshold is not None):
        raise UsageError("bokeh-mask needs exactly one of --threshold VALUE or --auto")
    with open(args.map, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    bmap = BlockCorrMap.from_json(payload["map"] if "map" in payload else payload)
    mask = bokeh_mask(bmap, threshold=None if args.auto else args.threshold)
    config = _base_config(args, "bokeh-mask")
    config.update(
        threshold="auto" if args.auto else _fmt(args.threshold),
        threshold_used=_fmt(mask.threshold_used),
        degenerate=mask.degenerate,
    )
    out = _ensure_outdir(args.out)
    _atomic_write_json(
        os.path.join(out, "bokeh_mask.json"),
        {"config": config, "mask": _mask_to_json(mask, bmap.dims)},
    )
    _atomic_save(os.path.join(out, "bokeh_mask.fpt"), lambda p: save_plane(mask.pixel_mask, p))


def _cmd_masked_verify(args) -> None:
    cfg = _denoise_config(args)
    fp = load_fingerprint(args.fingerprint)
    img = load_image(args.image)
    with open(args.mask, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    mask = _mask_from_json(payload["mask"] if "mask" in payload else payload)
    res = residual(img, cfg)
    term = fp.plane * analysis_luma(img)
    result = masked_pce(res.plane, term, mask)
    vcfg = VerifyConfig(tau=args.tau)
    decision = verify(result, vcfg)
    config = _base_config(args, "masked-verify")
    config.update(_denoise_config_dict(cfg))
    config.update(tau=args.tau, image=args.image, mask=os.path.basename(args.mask))
    row = ",".join(
        [
            args.image,
            os.path.basename(args.fingerprint),
            _fmt(result.pce),
            str(result.peak_shift[0]),
            str(result.peak_shift[1]),
            _fmt(result.rho_max),
            decision,
        ]
    )
    out = _ensure_outdir(args.out)
    _atomic_write_text(
        os.path.join(out, "masked_verify.csv"),
        _csv_text(
            config,
            "test_path,fingerprint_id,pce,peak_s1,peak_s2,rho_max,decision",
            [row],
        ),
    )


def _cmd_mfp_scan(args) -> None:
    paths = list(args.images or [])
    if args.manifest:
        manifest = load_manifest(args.manifest)
        paths.extend(_resolve_entry(args.manifest, e.path) for e in manifest.entries)
    if not paths:
        raise BadArgumentError("mfp-scan needs --images or --manifest")
    rows = []
    for path in paths:
        try:
            with open(path, "rb") as fh:
                tags = detect_mfp(fh.read())
        except OSError as exc:
            raise UnreadableFileError(f"cannot read {path}: {exc}") from exc
        zoom_num = "" if tags.zoom_ratio is None else str(tags.zoom_ratio[0])
        zoom_den = "" if tags.zoom_ratio is None else str(tags.zoom_ratio[1])
        rows.append(
            ",".join(
                [
                    path,
                    str(int(tags.mhdr)),
                    str(int(tags.lhdr)),
                    str(int(tags.mfp3)),
                    str(int(tags.is_mfp)),
                    zoom_num,
                    zoom_den,
                ]
            )
        )
    config = _base_config(args, "mfp-scan")
    out = _ensure_outdir(args.out)
    _atomic_write_text(
        os.path.join(out, "mfp_scan.csv"),
        _csv_text(config, "path,mhdr,lhdr,mfp3,is_mfp,zoom_num,zoom_den", rows),
    )


def _parse_synth_spec(path: str, seed_override: int | None):
    """Flat key=value grammar; see the README for the full key list."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise BadArgumentError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            raw[key] = value

    def geti(key, default):
        return int(raw.get(key, default))

    def getf(key, default):
        return float(raw.get(key, default))

    def getpair(key, default):
        text = raw.get(key)
        if text is None:
            return default
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise BadArgumentError(f"{key} must be two comma-separated integers")
        return int(parts[0]), int(parts[1])

    pattern = None
    waveform = raw.get("pattern", "none")
    if waveform != "none":
        pattern = PatternSpec(
            basis=getpair("basis", (60, 65)),
            amplitude=getf("amplitude", 2.0),
            phase=getpair("phase", (0, 0)),
            waveform=waveform,
            seed=geti("pattern_seed", 0),
        )
    spec = SynthSpec(
        height=geti("height", 512),
        width=geti("width", 512),
        prnu_sigma=getf("prnu_sigma", 0.02),
        noise_sigma=getf("noise_sigma", 3.0),
        scene=raw.get("scene", "flat"),
        intensity=getf("intensity", 128.0),
        scene_seed=geti("scene_seed", 0),
        pattern=pattern,
        seed=geti("seed", 0) if seed_override is None else seed_override,
    )
    extras = {
        "count": geti("count", 1),
        "start_index": geti("start_index", 0),
        "role": raw.get("role", "reference"),
        "label": raw.get("label", "genuine"),
    }
    return spec, extras


def _cmd_synth_gen(args) -> None:
    spec, extras = _parse_synth_spec(args.spec, args.seed if args.seed_set else None)
    count = args.count if args.count is not None else extras["count"]
    if count < 1:
        raise BadArgumentError("count must be >= 1")
    prnu = gen_prnu(spec)
    out = _ensure_outdir(args.out)
    entries = []
    truth_pattern = None
    for offset in range(count):
        index = extras["start_index"] + offset
        img, truth = capture(spec, prnu, index=index)
        name = f"img_{index:04d}.pgm"
        _atomic_save(os.path.join(out, name), lambda p, im=img: save_image(im, p))
        entries.append(
            ManifestEntry(path=name, role=extras["role"], label=extras["label"], tags=frozenset())
        )
        truth_pattern = truth.pattern_plane
    _atomic_save(os.path.join(out, "truth_prnu.fpt"), lambda p: save_plane(prnu, p))
    if truth_pattern is not None:
        _atomic_save(
            os.path.join(out, "truth_pattern.fpt"),
            lambda p: save_plane(truth_pattern, p),
        )
    manifest = DatasetManifest(entries=tuple(entries))
    _atomic_save(os.path.join(out, "manifest.txt"), lambda p: save_manifest(manifest, p))
    config = _base_config(args, "synth-gen")
    config.update(
        rng=RNG_ALGORITHM,
        count=count,
        height=spec.height,
        width=spec.width,
        prnu_sigma=spec.prnu_sigma,
        noise_sigma=spec.noise_sigma,
        scene=spec.scene,
        pattern="none" if spec.pattern is None else spec.pattern.waveform,
        synth_seed=spec.seed,
    )
    _atomic_write_json(os.path.join(out, "synth_gen.json"), {"config": config})


def _cmd_roc(args) -> None:
    entries = []
    with open(args.scores, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if parts[0] == "score":
                continue  # header
            if len(parts) < 2:
                raise BadArgumentError(f"{args.scores}:{lineno}: expected score,label[,group]")
            group = parts[2] if len(parts) > 2 else ""
            entries.append(ScoreEntry(score=float(parts[0]), label=parts[1], group=group))
    scores = ScoreSet(entries=tuple(entries))
    points = roc(scores)
    tpr, fpr = rates_at(scores, args.tau)
    config = _base_config(args, "roc")
    config.update(tau=args.tau, auc=_fmt(auc(points)))
    rows = [f"{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}" for p in points]
    out = _ensure_outdir(args.out)
    _atomic_write_text(
        os.path.join(out, "roc.csv"), _csv_text(config, "fpr,tpr,threshold", rows)
    )
    _atomic_write_text(
        os.path.join(out, "rates.csv"),
        _csv_text(config, "tau,tpr,fpr", [f"{_fmt(args.tau)},{_fmt(tpr)},{_fmt(fpr)}"]),
    )
    _atomic_write_text(
        os.path.join(out, "roc.svg"),
        curve_svg([(p[0], p[1]) for p in points], title="ROC"),
    )
    groups = {}
    for e in scores.entries:
        groups.setdefault(e.group or e.label, []).append(e.score)
    _atomic_write_text(
        os.path.join(out, "scatter.svg"), scatter_svg(groups, title="scores by group")
    )


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="prnuscope", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fingerprint", help="estimate a fingerprint from reference images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--name", default="fingerprint")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--keep-saturated", action="store_true")
    p.add_argument("--zero-mean", action="store_true")
    p.add_argument("--wiener", type=float, default=None, metavar="STRENGTH")
    _add_common(p, denoise_flags=True)
    p.set_defaults(func=_cmd_fingerprint)

    p = sub.add_parser("verify", help="PCE decisions for test images")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--tau", type=float, default=60.0)
    p.add_argument("--search", choices=("full", "zero_only"), default="full")
    _add_common(p, denoise_flags=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("autocorr", help="autocorrelation surface of a fingerprint")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--window", type=int, default=551)
    _add_common(p)
    p.set_defaults(func=_cmd_autocorr)

    p = sub.add_parser("lattice", help="periodic peak-train report for a surface")
    p.add_argument("--surface", required=True)
    p.add_argument("--window", type=int, default=551)
    p.add_argument("--min-peak", type=float, default=0.02)
    _add_common(p)
    p.set_defaults(func=_cmd_lattice)

    p = sub.add_parser("collide", help="all-pairs fingerprint collision screen")
    p.add_argument("--fingerprints", nargs="+", required=True)
    p.add_argument("--tau", type=float, default=60.0)
    p.add_argument("--window", type=int, default=551)
    p.add_argument("--min-peak", type=float, default=0.02)
    _add_common(p)
    p.set_defaults(func=_cmd_collide)

    p = sub.add_parser("hdr-map", help="block-wise shift map between a pair")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--block", type=int, default=512)
    p.add_argument("--search-radius", type=int, default=20)
    _add_common(p, denoise_flags=True)
    p.set_defaults(func=_cmd_hdr_map)

    p = sub.add_parser("adapt", help="resample a fingerprint through a shift map")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--name", default="adapted")
    _add_common(p)
    p.set_defaults(func=_cmd_adapt)

    p = sub.add_parser("bokeh-map", help="block correlation map for an image")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--block", type=int, default=21)
    _add_common(p, denoise_flags=True)
    p.set_defaults(func=_cmd_bokeh_map)

    p = sub.add_parser("bokeh-mask", help="threshold a correlation map into a mask")
    p.add_argument("--map", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--auto", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_bokeh_mask)

    p = sub.add_parser("masked-verify", help="verify with a bokeh mask applied")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--tau", type=float, default=60.0)
    _add_common(p, denoise_flags=True)
    p.set_defaults(func=_cmd_masked_verify)

    p = sub.add_parser("mfp-scan", help="scan JPEGs for multi-frame-processing tags")
    p.add_argument("--images", nargs="*", default=None)
    p.add_argument("--manifest", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_mfp_scan)

    p = sub.add_parser("synth-gen", help="generate a synthetic capture set")
    p.add_argument("--spec", required=True)
    p.add_argument("--count", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_synth_gen)

    p = sub.add_parser("roc", help="ROC curve and operating point from a score CSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--tau", type=float, default=60.0)
    _add_common(p)
    p.set_defaults(func=_cmd_roc)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.seed_set = any(a == "--seed" or a.startswith("--seed=") for a in argv)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        args.func(args)
    except UsageError as exc:
        print(f"ERR:usage:{exc}", file=sys.stderr)
        return EXIT_USAGE
    except ToolkitError as exc:
        print(f"ERR:{exc.code}:{exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"ERR:io:{exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
