import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ksplab import (
    PhantomSpec,
    apply_mask,
    make_phantom,
    make_uniform_mask,
    simulate_kspace,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def phantom_8x():
    """Standard 8x-undersampled setup shared by recon-level tests."""
    images, maps = make_phantom(PhantomSpec(64, 64, coils=10, seed=1))
    gt = images[0]
    k_full = simulate_kspace(gt, maps)
    mask = make_uniform_mask(64, 64, 8, 16)
    masked = apply_mask(k_full, mask)
    return {"gt": gt, "maps": maps, "k_full": k_full, "mask": mask, "masked": masked}
