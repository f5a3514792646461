"""Frequency-domain adaptation toolkit for ultrasound-style grayscale images.

Subpackages by task:

* :mod:`echoadapt.spectral` — exact 2D DFT analysis (forward/inverse,
  magnitude/phase, center shifts).
* :mod:`echoadapt.fda` — low-frequency magnitude transplant between images.
* :mod:`echoadapt.simulator` — seeded speckle rendering from binary masks.
* :mod:`echoadapt.dataset` — splits, pairing plans, verified manifests.
* :mod:`echoadapt.metrics` — Dice scoring and batch evaluation reports.
* :mod:`echoadapt.cli` — the ``echoadapt`` command-line pipeline.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    EchoAdaptError,
    IngestionError,
    IntegrityError,
    InvalidInputError,
    ManifestError,
    PairingError,
    ParameterError,
    ShapeMismatchError,
    SpectralInconsistencyError,
)
from .spectral import (
    Image2D,
    MagPhase,
    Spectrum2D,
    forward_dft,
    inverse_dft,
    recombine,
    shift_dc,
    split_mag_phase,
    unshift_dc,
)
from .fda import (
    FdaParams,
    LowFreqMask,
    adapt,
    adapt_batch,
    adapt_raw,
    adapt_with_mask,
    apply_range_policy,
    build_mask,
)
from .simulator import (
    PhantomSpec,
    PsfParams,
    Scatterers,
    SimulatedSample,
    choose_masks,
    generate_dataset,
    render_bmode,
    scatter_field,
    simulate_sample,
)
from .dataset import (
    DatasetManifest,
    PairingPlan,
    SplitResult,
    SplitSpec,
    hash_file,
    load_manifest,
    make_pairing,
    resolve_pairing,
    split,
    write_manifest,
)
from .metrics import BinaryMask, EvalReport, dice, evaluate_batch, threshold

__all__ = [
    "__version__",
    # errors
    "EchoAdaptError",
    "InvalidInputError",
    "SpectralInconsistencyError",
    "ShapeMismatchError",
    "ParameterError",
    "IngestionError",
    "ConfigurationError",
    "ManifestError",
    "IntegrityError",
    "PairingError",
    # spectral
    "Image2D",
    "Spectrum2D",
    "MagPhase",
    "forward_dft",
    "inverse_dft",
    "split_mag_phase",
    "recombine",
    "shift_dc",
    "unshift_dc",
    # fda
    "LowFreqMask",
    "FdaParams",
    "build_mask",
    "adapt",
    "adapt_raw",
    "adapt_with_mask",
    "adapt_batch",
    "apply_range_policy",
    # simulator
    "PhantomSpec",
    "PsfParams",
    "Scatterers",
    "SimulatedSample",
    "scatter_field",
    "render_bmode",
    "simulate_sample",
    "choose_masks",
    "generate_dataset",
    # dataset
    "SplitSpec",
    "SplitResult",
    "split",
    "PairingPlan",
    "make_pairing",
    "resolve_pairing",
    "DatasetManifest",
    "write_manifest",
    "load_manifest",
    "hash_file",
    # metrics
    "BinaryMask",
    "EvalReport",
    "dice",
    "threshold",
    "evaluate_batch",
]
