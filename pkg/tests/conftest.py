import numpy as np
import pytest

from prnuscope.denoise import residual
from prnuscope.fingerprint import FingerprintAccumulator, accumulate, finalize
from prnuscope.synthcam import PatternSpec, SynthSpec, capture, gen_prnu


def build_fingerprint(spec, k, count=8, start_index=0):
    acc = FingerprintAccumulator.empty(spec.height, spec.width)
    for i in range(count):
        img, _ = capture(spec, k, index=start_index + i)
        acc = accumulate(acc, img, residual(img))
    return finalize(acc)


def shared_pattern(amplitude_ratio=4.0, prnu_sigma=0.02, intensity=128.0, seed=77):
    """Pattern whose image-domain energy is `ratio` times the sensor pattern's."""
    amplitude = float(np.sqrt(amplitude_ratio) * prnu_sigma * intensity)
    return PatternSpec(basis=(60, 65), amplitude=amplitude, seed=seed)


@pytest.fixture(scope="session")
def flat_device():
    """Pattern-free 512x512 device with an 8-image reference fingerprint."""
    spec = SynthSpec(height=512, width=512, seed=11)
    k = gen_prnu(spec)
    return {"spec": spec, "k": k, "fp": build_fingerprint(spec, k)}


@pytest.fixture(scope="session")
def patterned_device():
    """Same geometry with a strong shared diagonal pattern injected."""
    spec = SynthSpec(height=512, width=512, pattern=shared_pattern(), seed=12)
    k = gen_prnu(spec)
    return {"spec": spec, "k": k, "fp": build_fingerprint(spec, k)}
