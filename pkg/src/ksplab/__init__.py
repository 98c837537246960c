"""Multi-coil cardiac MR k-space toolkit.

Simulation (phantoms, coil maps, undersampling masks), classical
calibration and reconstruction, frequency-domain loss components with
analytic gradients, evaluation metrics, bit-exact file formats, and a
grouped experiment harness.
"""

from .calibration import estimate_sens_maps
from .experiment import (
    ExperimentManifest,
    ExperimentResult,
    GroupSpec,
    default_manifest,
    run_experiment,
)
from .fileio import KspContainer, KspFormatError, read_ksp, write_ksp, write_pgm, write_report
from .filters import (
    HighPassSpec,
    SCHARR_X,
    SCHARR_Y,
    filtered_magnitude,
    highpass_filter,
    patch_variance,
    scharr_gradients,
)
from .losses import (
    ConvFeatureExtractor,
    ConvLayer,
    EagleSpec,
    GradCheckReport,
    LossReport,
    LossWeights,
    eagle_loss,
    fidelity_loss,
    grad_check,
    identity_extractor,
    make_grad_probe,
    perceptual_loss,
    random_extractor,
    reg_loss,
    ssim_loss,
    total_loss,
)
from .metrics import hf_nmse, nmse, psnr, ssim
from .phantom import PhantomSpec, make_phantom, simulate_kspace
from .recon import (
    ReconConfig,
    ReconDivergenceError,
    data_consistency,
    gd_reconstruct,
    tune_step,
    zero_filled,
)
from .sampling import SamplingMask, apply_mask, make_random_mask, make_uniform_mask
from .transforms import fft2c, ifft2c, rss_combine, sense_expand

__version__ = "0.1.0"
