import math

import numpy as np
import pytest

from conescan.geometry import CameraRig, PoseSE3


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random rotation from the QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def random_pose(rng: np.random.Generator, translation_scale: float = 10.0) -> PoseSE3:
    return PoseSE3(random_rotation(rng),
                   translation_scale * rng.standard_normal(3))


@pytest.fixture
def cam() -> CameraRig:
    return CameraRig(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480,
                     gamma=math.radians(55.0), beta=math.radians(40.0))
