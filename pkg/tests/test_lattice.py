import numpy as np
import pytest

from prnuscope.correlate import VerifyConfig, autocorr
from prnuscope.errors import BadArgumentError, DimensionError
from prnuscope.fingerprint import Fingerprint
from prnuscope.lattice import (
    VERDICT_COLLISION,
    VERDICT_DISTINCT,
    collision_screen,
    cross_model_screen,
    detect_lattice,
)
from prnuscope.synthcam import PatternSpec, pattern_plane
from prnuscope.tensorio import resize_bicubic

from conftest import build_fingerprint, shared_pattern
from prnuscope.synthcam import SynthSpec, gen_prnu


def stripe(dims, basis=(60, 65), amplitude=1.0, seed=0, phase=(0, 0)):
    return pattern_plane(
        dims, PatternSpec(basis=basis, amplitude=amplitude, seed=seed, phase=phase)
    )


class TestDetectLattice:
    def test_white_noise_gives_empty_report(self):
        for seed in range(5):
            p = np.random.default_rng(seed).standard_normal((256, 256))
            report = detect_lattice(autocorr(p), window=255, min_peak=0.02)
            assert not report.found
            assert report.basis == (0, 0)
            assert report.strength == 0.0

    def test_stripe_basis_and_multiples(self):
        report = detect_lattice(autocorr(stripe((768, 768))), window=551)
        assert report.basis == (60, 65)
        positive = [p.shift for p in report.peaks if p.polarity == "positive"]
        assert (120, 130) in positive
        assert (180, 195) in positive
        assert report.strength > 0.5

    def test_phase_invariance(self):
        a = detect_lattice(autocorr(stripe((768, 768)))).basis
        b = detect_lattice(autocorr(stripe((768, 768), phase=(17, 29)))).basis
        assert a == b == (60, 65)

    def test_scale_invariance_of_plane(self):
        p = stripe((768, 768), amplitude=0.5, seed=5)
        a = detect_lattice(autocorr(p))
        b = detect_lattice(autocorr(37.0 * p))
        assert a.basis == b.basis
        assert a.strength == pytest.approx(b.strength, rel=1e-9)

    def test_survives_noise(self):
        rng = np.random.default_rng(3)
        p = stripe((768, 768), amplitude=2.0, seed=4) + rng.standard_normal((768, 768)) * 3.0
        report = detect_lattice(autocorr(p), window=551)
        assert report.basis == (60, 65)

    def test_basis_scales_under_resize(self):
        rng = np.random.default_rng(6)
        p = stripe((1020, 1040), amplitude=4.0, seed=6) + rng.standard_normal((1020, 1040))
        small = resize_bicubic(p, 918, 936)  # factor 0.9 per axis
        report = detect_lattice(autocorr(small), window=551)
        assert report.found
        assert abs(report.basis[0] - 54.0) <= 1.0
        assert abs(report.basis[1] - 58.5) <= 1.0

    def test_anti_diagonal_basis(self):
        # mirrored stripe: descending diagonal train
        p = stripe((768, 768), seed=8)[:, ::-1].copy()
        report = detect_lattice(autocorr(p), window=551)
        assert report.basis[0] == 60
        assert abs(report.basis[1]) == 65
        assert report.basis[1] < 0

    def test_window_validation(self):
        surface = autocorr(np.random.default_rng(0).standard_normal((64, 64)))
        with pytest.raises(BadArgumentError):
            detect_lattice(surface, window=65)
        with pytest.raises(BadArgumentError):
            detect_lattice(surface, window=62)
        with pytest.raises(BadArgumentError):
            detect_lattice(surface, window=63, min_peak=1.5)


class TestCollisionScreen:
    def test_independent_fingerprints_distinct(self, flat_device):
        spec2 = SynthSpec(height=512, width=512, seed=999)
        other = build_fingerprint(spec2, gen_prnu(spec2))
        report = collision_screen(flat_device["fp"], other)
        assert report.verdict == VERDICT_DISTINCT
        assert report.pce_ab.pce <= 60

    def test_shared_pattern_collides(self, patterned_device):
        spec2 = SynthSpec(
            height=512, width=512, pattern=patterned_device["spec"].pattern, seed=888
        )
        other = build_fingerprint(spec2, gen_prnu(spec2))
        report = collision_screen(patterned_device["fp"], other)
        assert report.verdict == VERDICT_COLLISION
        assert report.pce_ab.pce > 60
        assert report.basis_match
        assert report.lattice_a.basis == (60, 65)

    def test_self_comparison_collides(self, flat_device):
        report = collision_screen(flat_device["fp"], flat_device["fp"])
        assert report.verdict == VERDICT_COLLISION
        assert report.pce_ab.pce > 60

    def test_dims_checked(self, flat_device):
        small = Fingerprint(plane=np.random.default_rng(0).standard_normal((64, 64)))
        with pytest.raises(DimensionError):
            collision_screen(flat_device["fp"], small)

    def test_verdict_monotone_in_amplitude(self):
        verdicts = []
        for scale in (1.0, 2.0, 4.0):
            pattern = shared_pattern(amplitude_ratio=4.0 * scale, seed=55)
            spec_a = SynthSpec(height=512, width=512, pattern=pattern, seed=70)
            spec_b = SynthSpec(height=512, width=512, pattern=pattern, seed=71)
            fa = build_fingerprint(spec_a, gen_prnu(spec_a), count=4)
            fb = build_fingerprint(spec_b, gen_prnu(spec_b), count=4)
            verdicts.append(collision_screen(fa, fb).verdict)
        suspected = [v == VERDICT_COLLISION for v in verdicts]
        assert suspected == sorted(suspected)  # never flips back to distinct


class TestCrossModelScreen:
    def test_independent_all_distinct(self):
        fps = []
        for seed in (301, 302, 303):
            spec = SynthSpec(height=256, width=256, seed=seed)
            fps.append(build_fingerprint(spec, gen_prnu(spec), count=4))
        reports = cross_model_screen(fps)
        assert len(reports) == 3
        assert all(r.verdict == VERDICT_DISTINCT for r in reports.values())

    def test_collisions_only_within_groups(self):
        pattern_a = shared_pattern(seed=81)
        pattern_b = PatternSpec(basis=(72, 58), amplitude=pattern_a.amplitude, seed=82)
        fps = []
        for seed, pattern in ((401, pattern_a), (402, pattern_a), (403, pattern_b), (404, pattern_b)):
            spec = SynthSpec(height=512, width=512, pattern=pattern, seed=seed)
            fps.append(build_fingerprint(spec, gen_prnu(spec), count=4))
        reports = cross_model_screen(fps)
        assert reports[(0, 1)].verdict == VERDICT_COLLISION
        assert reports[(2, 3)].verdict == VERDICT_COLLISION
        for pair in [(0, 2), (0, 3), (1, 2), (1, 3)]:
            assert reports[pair].verdict == VERDICT_DISTINCT

    def test_mixed_sizes_resized_to_common(self):
        spec_small = SynthSpec(height=256, width=256, seed=501)
        spec_large = SynthSpec(height=320, width=288, seed=502)
        fps = [
            build_fingerprint(spec_small, gen_prnu(spec_small), count=3),
            build_fingerprint(spec_large, gen_prnu(spec_large), count=3),
        ]
        reports = cross_model_screen(fps)
        assert reports[(0, 1)].pce_ab.dims == (256, 256)

    def test_needs_two(self, flat_device):
        with pytest.raises(BadArgumentError):
            cross_model_screen([flat_device["fp"]])
