import importlib.util
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from bemlab import kernels


def surfaces():
    x = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    u1 = 1.0 + 0.1 * np.cos(x) + 0.03 * np.sin(3 * x)
    g = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    u2 = 1.0 + 0.1 * np.cos(g)[:, None] * np.sin(2 * g)[None, :]
    return [(u1, x[1] - x[0]), (u2, g[1] - g[0])]


@pytest.mark.parametrize("case", [0, 1])
def test_loop_and_stencil_kernels_agree(case):
    u, dx = surfaces()[case]
    a, ap, fp = np.exp(-u), -np.exp(-u), 0.2 * np.cos(u)
    ref = kernels.graph_hf_numpy(u, a, ap, fp, dx)
    got = kernels.graph_hf_loops(u, a, ap, fp, dx)
    for r, g in zip(ref, got):
        assert np.allclose(r, g, rtol=1e-12, atol=1e-12)


SCRIPT = """
import json
import numpy as np
from bemlab._accel import NUMBA_ENABLED
from bemlab.focusing import model_blowup
from bemlab.kernels import graph_hf
x = np.linspace(0, 2 * np.pi, 64, endpoint=False)
u = 1.0 + 0.1 * np.cos(x)
hf = graph_hf(u, np.exp(-u), -np.exp(-u), 0.1 * u, x[1] - x[0])[0]
blow = [model_blowup(q, x0)[0] for q, x0 in ((0.0, -1.0), (1.0, -2.0), (-1.0, -0.5))]
print(json.dumps({"numba": NUMBA_ENABLED, "hf": hf.tolist(), "blow": blow}))
"""


def run_backend(disable):
    env = dict(os.environ, BEMLAB_DISABLE_NUMBA=disable)
    proc = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def test_environment_switch_selects_backend_and_results_match():
    fast, slow = run_backend("0"), run_backend("1")
    assert slow["numba"] is False
    assert fast["numba"] is (importlib.util.find_spec("numba") is not None)
    assert np.allclose(fast["hf"], slow["hf"], rtol=1e-12, atol=1e-12)
    assert np.allclose(fast["blow"], slow["blow"], rtol=1e-12, atol=0)


def test_riccati_kernel_flat_case():
    t_blow, detected, steps = kernels.riccati_model(0.0, -2.0, 5.0, 1e-10, 1e8, 0.0)
    assert detected and steps > 0
    assert abs(t_blow - 0.5) < 1e-7
