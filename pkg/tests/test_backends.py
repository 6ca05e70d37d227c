import subprocess
import sys

import numpy as np
import pytest

from fbmilt import _backend
from fbmilt._kernels_py import gauss_weight_sum as gauss_py


def test_backend_name_is_known():
    assert _backend.backend_name in ("cython", "python")


@pytest.mark.parametrize("n,d", [(1, 2), (7, 2), (64, 3), (300, 4)])
def test_backends_agree(n, d):
    rng = np.random.default_rng(n * 10 + d)
    x = rng.normal(size=(n, d))
    y = rng.normal(size=(n, d))
    wx = rng.random(n)
    wy = rng.random(n)
    a = _backend.gauss_weight_sum(x, y, wx, wy, 0.3)
    b = gauss_py(x, y, wx, wy, 0.3)
    assert a == pytest.approx(b, rel=1e-10)


def test_python_backend_forced_via_env():
    code = (
        "import fbmilt._backend as b; print(b.backend_name)"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "FBMILT_BACKEND": "python"},
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_unknown_backend_env_rejected():
    code = "import fbmilt._backend"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "FBMILT_BACKEND": "fortran"},
        capture_output=True, text=True,
    )
    assert out.returncode != 0
