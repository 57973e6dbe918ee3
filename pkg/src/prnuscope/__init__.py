"""Camera source verification from sensor pattern noise.

Pipelines: noise-residual extraction, fingerprint estimation, circular
NCC / PCE hypothesis testing, periodic-artifact lattice detection,
block-wise shift and correlation maps, JPEG metadata probes, and a
deterministic synthetic camera for ground-truth experiments.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .correlate import (
    CorrSurface,
    PceResult,
    VerifyConfig,
    autocorr,
    ncc_at,
    ncc_surface,
    pce,
    pce_from_surface,
    verify,
)
from .denoise import DenoiseConfig, Residual, denoise, dwt2, idwt2, residual
from .errors import ToolkitError
from .fingerprint import (
    Fingerprint,
    FingerprintAccumulator,
    accumulate,
    finalize,
    load_fingerprint,
    merge,
    merge_tree,
    save_fingerprint,
    wiener_fft,
    zero_mean,
)
from .jpegmeta import MfpTags, SegmentList, detect_mfp, parse_zoom, scan_segments
from .lattice import (
    CollisionReport,
    LatticeReport,
    collision_screen,
    cross_model_screen,
    detect_lattice,
)
from .localmap import (
    BlockCorrMap,
    BokehMask,
    ShiftMap,
    adapt_fingerprint,
    block_corr_map,
    block_shift_map,
    bokeh_mask,
    masked_pce,
)
from .rocreport import ScoreEntry, ScoreSet, auc, rates_at, roc
from .synthcam import (
    PatternSpec,
    SynthSpec,
    TruthBundle,
    apply_bokeh,
    apply_hdr_shifts,
    capture,
    capture_set,
    gen_prnu,
    pattern_plane,
)
from .tensorio import (
    DatasetManifest,
    Image,
    ManifestEntry,
    analysis_luma,
    crop_center,
    load_fpt,
    load_image,
    load_manifest,
    load_plane,
    resize_bicubic,
    save_fpt,
    save_image,
    save_manifest,
    save_plane,
    to_luma,
)
