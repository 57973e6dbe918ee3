"""Acceptance suite.

Each test enforces one acceptance criterion at its stated tolerance and
prints a single PASS line (run with ``pytest -s`` or ``-v`` to see them; a
failed assert is the FAIL signal). The synthetic-camera criteria use the
fixed seeds below, so the suite is fully deterministic.
"""

import os
import time

import numpy as np
import pytest

from prnuscope.correlate import (
    autocorr,
    ncc_surface,
    pce_from_surface,
)
from prnuscope.denoise import denoise, dwt2, idwt2, residual
from prnuscope.errors import ToolkitError
from prnuscope.fingerprint import FingerprintAccumulator, accumulate, finalize
from prnuscope.jpegmeta import detect_mfp
from prnuscope.lattice import detect_lattice
from prnuscope.localmap import (
    adapt_fingerprint,
    block_corr_map,
    block_shift_map,
    bokeh_mask,
    masked_pce,
)
from prnuscope.synthcam import (
    PatternSpec,
    SynthSpec,
    apply_bokeh,
    apply_hdr_shifts,
    capture,
    gen_prnu,
)
from prnuscope.tensorio import analysis_luma, resize_bicubic

from conftest import build_fingerprint, shared_pattern

TAU = 60.0


def report(criterion, text):
    print(f"\n[acceptance {criterion}] PASS: {text}")


def term_for(fp, img):
    return fp.plane * analysis_luma(img)


def genuine_pce(fp, spec, k, index):
    img, _ = capture(spec, k, index=index)
    res = residual(img)
    return pce_from_surface(ncc_surface(res.plane, term_for(fp, img))).pce


@pytest.fixture(scope="module")
def reference_device():
    """Criterion-3 setup: 512^2, 20 flat references, sigma_K=0.02, sigma_T=3."""
    t0 = time.time()
    spec = SynthSpec(
        height=512, width=512, prnu_sigma=0.02, noise_sigma=3.0,
        scene="flat", intensity=128.0, seed=1001,
    )
    k = gen_prnu(spec)
    fp = build_fingerprint(spec, k, count=20)
    genuine = [genuine_pce(fp, spec, k, 2000 + i) for i in range(100)]
    impostor = []
    for i in range(200):
        spec_i = SynthSpec(
            height=512, width=512, prnu_sigma=0.02, noise_sigma=3.0,
            scene="flat", intensity=128.0, seed=50000 + i,
        )
        impostor.append(genuine_pce(fp, spec_i, gen_prnu(spec_i), 0))
    return {
        "spec": spec,
        "k": k,
        "fp": fp,
        "genuine": np.array(genuine),
        "impostor": np.array(impostor),
        "elapsed": time.time() - t0,
    }


def test_criterion_01_correlation_correctness():
    """FFT surface equals direct-summation brute force, 200 planes, < 10 s."""
    t0 = time.time()
    rng = np.random.default_rng(42)
    sizes = [8] * 67 + [16] * 67 + [32] * 66
    worst = 0.0
    for size in sizes:
        a = rng.standard_normal((size, size))
        b = rng.standard_normal((size, size))
        values = ncc_surface(a, b).values
        ca = a - a.mean()
        cb = b - b.mean()
        norm = np.sqrt((ca**2).sum() * (cb**2).sum())
        brute = np.empty_like(values)
        for s1 in range(size):
            rolled = np.roll(cb, -s1, axis=0)
            for s2 in range(size):
                brute[s1, s2] = (ca * np.roll(rolled, -s2, axis=1)).sum() / norm
        worst = max(worst, float(np.abs(values - brute).max()))
    elapsed = time.time() - t0
    assert worst < 1e-8
    assert elapsed < 10.0
    report(1, f"max |fft - brute| = {worst:.2e} over 200 planes in {elapsed:.1f}s")


def test_criterion_02_pce_null_calibration():
    """Independent 256^2 Gaussian pairs: >=99% below tau, aligned median < 10."""
    full, zero = [], []
    for seed in range(200):
        rng = np.random.default_rng(10_000 + seed)
        r = pce_from_surface(
            ncc_surface(rng.standard_normal((256, 256)), rng.standard_normal((256, 256)))
        )
        full.append(r.pce)
        zero.append(r.pce_zero)
    full = np.array(full)
    zero = np.array(zero)
    frac_full = float((full < TAU).mean())
    frac_zero = float((np.abs(zero) < TAU).mean())
    median_zero = float(np.median(np.abs(zero)))
    assert frac_full >= 0.99
    assert frac_zero >= 0.99
    # the sub-10 median belongs to the aligned (zero-shift) statistic; the
    # full-search maximum concentrates near 2*ln(HW) =~ 22 by extreme-value
    # behaviour, which the sanity bound below pins down
    assert median_zero < 10.0
    assert float(np.median(full)) < TAU
    report(
        2,
        f"{frac_full:.0%} full / {frac_zero:.0%} aligned below 60, "
        f"median |aligned| = {median_zero:.2f}",
    )


def test_criterion_03_genuine_detection(reference_device):
    dev = reference_device
    tpr = float((dev["genuine"] > TAU).mean())
    impostor_100 = dev["impostor"][:100]
    fp_rate = float((impostor_100 > TAU).mean())
    assert tpr >= 0.95
    assert fp_rate == 0.0
    assert dev["elapsed"] < 300.0
    report(
        3,
        f"TPR {tpr:.2f} over 100 genuine, 0/100 impostor over 60, "
        f"built+scored in {dev['elapsed']:.0f}s",
    )


def test_criterion_04_collision_reproduction(reference_device):
    pattern = shared_pattern(amplitude_ratio=4.0)
    hits = 0
    for seed in range(50):
        spec_a = SynthSpec(height=512, width=512, pattern=pattern, seed=3000 + seed)
        fp_a = build_fingerprint(spec_a, gen_prnu(spec_a), count=5)
        spec_b = SynthSpec(height=512, width=512, pattern=pattern, seed=4000 + seed)
        value = genuine_pce(fp_a, spec_b, gen_prnu(spec_b), 7)
        hits += value > TAU
    assert hits >= 45

    dev = reference_device
    raw_fpr = float((dev["impostor"] > TAU).mean())
    raw_tpr = float((dev["genuine"] > TAU).mean())
    assert raw_fpr == 0.0
    assert raw_tpr >= 0.95
    report(
        4,
        f"shared-pattern impostors over 60: {hits}/50; "
        f"pattern-free FPR {raw_fpr:.4f} (0/200), TPR {raw_tpr:.2f}",
    )


def test_criterion_05_lattice_detection():
    pattern = PatternSpec(basis=(60, 65), amplitude=2.0, seed=501)
    recovered = 0
    for seed in range(50):
        spec = SynthSpec(height=768, width=768, pattern=pattern, seed=6000 + seed)
        img, _ = capture(spec, gen_prnu(spec), index=0)
        rep = detect_lattice(autocorr(residual(img).plane), window=551, min_peak=0.02)
        if rep.found and abs(rep.basis[0] - 60) <= 1 and abs(rep.basis[1] - 65) <= 1:
            recovered += 1
    assert recovered >= 48  # >= 95% of 50

    false_hits = 0
    for seed in range(100):
        noise = np.random.default_rng(7000 + seed).standard_normal((256, 256))
        false_hits += detect_lattice(autocorr(noise), window=255, min_peak=0.02).found
    assert false_hits <= 1

    rng = np.random.default_rng(715)
    from prnuscope.synthcam import pattern_plane

    big = pattern_plane((4080, 3060), PatternSpec(basis=(60, 65), amplitude=4.0, seed=502))
    big = big + rng.standard_normal(big.shape)
    small = resize_bicubic(big, 4000, 3000)
    rep = detect_lattice(autocorr(small), window=551, min_peak=0.02)
    expected = (60 * 4000 / 4080, 65 * 3000 / 3060)
    assert rep.found
    assert abs(rep.basis[0] - expected[0]) <= 1.0
    assert abs(rep.basis[1] - expected[1]) <= 1.0
    report(
        5,
        f"basis recovered {recovered}/50, false hits {false_hits}/100, "
        f"resized basis {rep.basis} vs {tuple(round(e, 1) for e in expected)}",
    )


def test_criterion_06_hdr_shift_maps():
    pattern = shared_pattern(amplitude_ratio=4.0, seed=61)
    spec = SynthSpec(height=512, width=512, pattern=pattern, seed=8000)
    k = gen_prnu(spec)
    fp = build_fingerprint(spec, k, count=8)
    regions = [((0, 0, 256, 256), (5, 3)), ((256, 0, 256, 256), (5, -3))]
    exact = 0
    for seed in range(25):
        img, _ = capture(spec, k, index=9000 + seed)
        shifted, truth = apply_hdr_shifts(img, regions, block=128)
        smap = block_shift_map(
            residual(shifted).plane, term_for(fp, shifted), block=128, search_radius=20
        )
        exact += np.array_equal(smap.shifts, truth.shifts)
    assert exact == 25

    plain_spec = SynthSpec(height=512, width=512, seed=8100)
    plain_k = gen_prnu(plain_spec)
    plain_fp = build_fingerprint(plain_spec, plain_k, count=8)
    options = [
        (d1, d2) for d1 in range(-10, 11) for d2 in range(-10, 11) if (d1, d2) != (0, 0)
    ]
    failing = converted = 0
    for seed in range(25):
        rng = np.random.default_rng(9500 + seed)
        chosen = rng.choice(len(options), size=64, replace=False)
        regions64 = []
        for idx, (r0, c0) in enumerate(
            (r, c) for r in range(0, 512, 64) for c in range(0, 512, 64)
        ):
            regions64.append(((r0, c0, 64, 64), options[chosen[idx]]))
        img, _ = capture(plain_spec, plain_k, index=9600 + seed)
        shifted, _ = apply_hdr_shifts(img, regions64, block=64)
        res = residual(shifted).plane
        term = term_for(plain_fp, shifted)
        pre = pce_from_surface(ncc_surface(res, term)).pce
        if pre > TAU:
            continue
        failing += 1
        smap = block_shift_map(res, term, block=64, search_radius=12)
        adapted = adapt_fingerprint(plain_fp, smap)
        post = pce_from_surface(ncc_surface(res, term_for(adapted, shifted))).pce
        converted += post > TAU
    assert failing >= 20  # the scramble is supposed to break full-frame PCE
    assert converted >= 0.8 * failing
    report(
        6,
        f"shifts (5,3)/(5,-3) exact in {exact}/25; "
        f"adaptation converted {converted}/{failing} failing pairs",
    )


def test_criterion_07_bokeh_localization():
    spec = SynthSpec(height=512, width=512, seed=8200)
    k = gen_prnu(spec)
    fp = build_fingerprint(spec, k, count=8)
    ii, jj = np.meshgrid(np.arange(512), np.arange(512), indexing="ij")
    truth = ((ii - 256) ** 2 + (jj - 320) ** 2) < 140**2
    ious, contrasts, improvements = [], [], 0
    for seed in range(25):
        img, _ = capture(spec, k, index=9800 + seed)
        blurred, _ = apply_bokeh(img, truth, blur_sigma=4.0, grain_sigma=2.0, seed=seed)
        res = residual(blurred).plane
        term = term_for(fp, blurred)
        bmap = block_corr_map(res, term, block=21)
        mask = bokeh_mask(bmap)
        predicted = mask.pixel_mask > 0.5
        ious.append((predicted & truth).sum() / (predicted | truth).sum())
        inside = bmap.grid[mask.block_mask].mean()
        outside = bmap.grid[~mask.block_mask].mean()
        contrasts.append(inside / outside)
        plain = pce_from_surface(ncc_surface(res, term)).pce
        masked = masked_pce(res, term, mask).pce
        improvements += masked > plain
    assert min(ious) >= 0.7
    assert max(contrasts) < 0.25
    assert improvements >= 23  # >= 90% of 25
    report(
        7,
        f"IoU min {min(ious):.2f}, inside/outside max {max(contrasts):.3f}, "
        f"masked beats plain in {improvements}/25",
    )


def test_criterion_08_jpeg_metadata():
    from util_jpeg import build_exif_app1, build_jpeg

    rng = np.random.default_rng(88)
    strings = (b"MHDR", b"LHDR", b"MFP3")
    for case in range(500):
        want = tuple(bool(rng.integers(0, 2)) for _ in range(3))
        zoom = (int(rng.integers(1, 100)), int(rng.integers(1, 10))) if rng.integers(0, 2) else None
        filler = rng.integers(0, 256, size=int(rng.integers(0, 40)), dtype=np.uint8).tobytes()
        for needle in strings:
            filler = filler.replace(needle, b"....")
        payload = filler + b"".join(n for n, w in zip(strings, want) if w)
        segments = [(0xE4, payload)]
        if zoom is not None:
            segments.append((0xE1, build_exif_app1(zoom=zoom, big_endian=bool(rng.integers(0, 2)))))
        tags = detect_mfp(build_jpeg(segments))
        assert (tags.mhdr, tags.lhdr, tags.mfp3) == want, f"case {case}"
        assert tags.zoom_ratio == zoom, f"case {case}"

    base = bytearray(
        build_jpeg(
            [(0xE4, b"xx MHDR LHDR MFP3"), (0xE1, build_exif_app1(zoom=(3, 2)))]
        )
    )
    crashes = 0
    for _ in range(10_000):
        data = bytearray(base)
        for _ in range(int(rng.integers(1, 9))):
            data[int(rng.integers(0, len(data)))] = int(rng.integers(0, 256))
        try:
            detect_mfp(bytes(data))
        except ToolkitError:
            pass
        except Exception:  # noqa: BLE001 - the criterion is "no other escape"
            crashes += 1
    assert crashes == 0
    report(8, "500/500 crafted round-trips exact; 10000 mutations, 0 crashes")


def test_criterion_09_determinism(tmp_path):
    from prnuscope.cli import main

    spec_text = (
        "height=256\nwidth=256\nseed=31\ncount=12\nrole=reference\nlabel=genuine\n"
    )
    data = tmp_path / "data"
    spec_path = tmp_path / "gen.spec"
    spec_path.write_text(spec_text)
    assert main(["synth-gen", "--spec", str(spec_path), "--out", str(data)]) == 0
    test_spec = tmp_path / "tests.spec"
    test_spec.write_text(spec_text.replace("count=12", "count=6\nstart_index=100").replace("role=reference", "role=test"))
    tests_dir = tmp_path / "tests"
    assert main(["synth-gen", "--spec", str(test_spec), "--out", str(tests_dir)]) == 0

    outputs = {}
    for threads in ("1", "4"):
        fp_dir = tmp_path / f"fp{threads}"
        v_dir = tmp_path / f"v{threads}"
        assert (
            main(
                [
                    "fingerprint", "--manifest", str(data / "manifest.txt"),
                    "--out", str(fp_dir), "--threads", threads,
                ]
            )
            == 0
        )
        assert (
            main(
                [
                    "verify", "--fingerprint", str(fp_dir / "fingerprint.fpt"),
                    "--manifest", str(tests_dir / "manifest.txt"),
                    "--out", str(v_dir), "--threads", threads,
                ]
            )
            == 0
        )
        outputs[threads] = (
            (fp_dir / "fingerprint.fpt").read_bytes(),
            (v_dir / "verify.csv").read_bytes(),
        )
    assert outputs["1"][0] == outputs["4"][0]
    assert outputs["1"][1] == outputs["4"][1]
    report(9, "1-thread and 4-thread pipelines produced byte-identical reports")


def test_criterion_10_denoiser_sanity():
    rng = np.random.default_rng(77)
    worst_pr = 0.0
    for _ in range(3):
        p = rng.standard_normal((128, 128)) * 30 + 120
        worst_pr = max(worst_pr, float(np.abs(idwt2(dwt2(p, 4)) - p).max()))
    assert worst_pr < 1e-6

    flat = np.full((128, 128), 77.0)
    assert np.abs(flat - denoise(flat)).max() < 1e-9

    worst_ratio = 0.0
    for seed in range(50):
        noise = np.random.default_rng(600 + seed).standard_normal((128, 128)) * 3.0
        worst_ratio = max(worst_ratio, float(denoise(noise).var() / noise.var()))
    assert worst_ratio <= 0.15  # >= 85% variance removed
    report(
        10,
        f"reconstruction {worst_pr:.1e}, constant residual 0, "
        f"worst retained noise variance {worst_ratio:.3f}",
    )
