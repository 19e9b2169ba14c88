import json
import os
import subprocess
import sys

import numpy as np
import pytest

from logconcave import kernels
from logconcave.kernels import python_backend as py

needs_compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled extension not built")
cy = kernels.compiled_backend


def test_dispatch_matches_env():
    forced = os.environ.get("LOGCONCAVE_PURE_PYTHON", "") in ("1", "true", "yes")
    assert kernels.BACKEND_NAME == ("python" if forced or cy is None else "cython")


def _tridiag(n, rng):
    d = rng.uniform(1, 3, n)
    e2 = rng.uniform(0.1, 1.0, n - 1)
    return d, e2


def _dense(d, e2):
    e = np.sqrt(e2)
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


@pytest.mark.parametrize("backend", [py, pytest.param(cy, marks=needs_compiled)], ids=["python", "cython"])
def test_tridiag_eigenvalue_vs_dense(backend):
    rng = np.random.default_rng(1)
    d, e2 = _tridiag(40, rng)
    ev = np.linalg.eigvalsh(_dense(d, e2))
    lo, hi = ev[0] - 10, ev[-1] + 10
    for k in (0, 1, 7, 39):
        assert abs(backend.tridiag_eigenvalue(d, e2, k, lo, hi) - ev[k]) <= 1e-10 * max(1, abs(ev[k]))
    assert backend.sturm_count(d, e2, float(ev[5] + 1e-9)) == 6


@needs_compiled
def test_conv_logdensity_agree():
    x = np.linspace(-3, 3, 301)
    ld = -np.abs(x)
    y = np.linspace(-4, 4, 257)
    for beta in (0.05, 0.5, 2.0):
        a = np.asarray(py.conv_logdensity(x, ld, y, beta))
        b = np.asarray(cy.conv_logdensity(x, ld, y, beta))
        fin = np.isfinite(a)
        assert np.array_equal(fin, np.isfinite(b))
        assert np.max(np.abs(a[fin] - b[fin])) <= 1e-10


@needs_compiled
def test_band_matched_mass_agree():
    rng = np.random.default_rng(2)
    x = np.linspace(-2, 2, 200)
    a, b = rng.dirichlet(np.ones(200)), rng.dirichlet(np.ones(200))
    for eps in (0.0, 0.05, 0.3, 5.0):
        assert abs(py.band_matched_mass(x, a, x, b, eps) - cy.band_matched_mass(x, a, x, b, eps)) <= 1e-12
    assert abs(cy.band_matched_mass(x, a, x, b, 10.0) - 1.0) <= 1e-12


@needs_compiled
def test_brute_force_agree():
    rng = np.random.default_rng(3)
    n = 60
    x = np.linspace(-2, 2, n)
    F = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, n - 2)), [1.0]])
    q = rng.uniform(0, 1, n)
    u = np.linspace(0.05, 0.5, 10)
    assert np.allclose(py.bf_isoperimetric(F, q, u), cy.bf_isoperimetric(F, q, u), rtol=0, atol=1e-14)
    Fm, Fp = np.clip(F - 0.1, 0, 1), np.clip(F + 0.1, 0, 1)
    assert abs(py.bf_concentration(x, F, Fm, Fp, 0.3) - cy.bf_concentration(x, F, Fm, Fp, 0.3)) <= 1e-14


SCRIPT = """
import json, math
from logconcave import BACKEND_NAME, oracle, realize, gaussian, exponential_symmetric, uniform, tv, levy_prokhorov
from logconcave.measure1d import convolve_gaussian
g = realize(gaussian(0, 1, n=256))
e = realize(exponential_symmetric(1, n=1024))
u = realize(uniform(-1, 1, n=128))
print(json.dumps({
    "backend": BACKEND_NAME,
    "cp_g": oracle.spectral_poincare(g).c_p,
    "cp_u": oracle.spectral_poincare(u).c_p,
    "tv": tv(convolve_gaussian(e, 0.4), g),
    "lp": levy_prokhorov(e, g, k=512),
    "bf": oracle.brute_force_isoperimetric(u, __import__("numpy").array([0.1, 0.3]))[0].tolist(),
}))
"""


def _run(env_flag):
    env = dict(os.environ)
    env.pop("LOGCONCAVE_PURE_PYTHON", None)
    if env_flag:
        env["LOGCONCAVE_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_pure_python_fallback_small_n():
    pure = _run(True)
    assert pure["backend"] == "python"
    assert abs(pure["cp_u"] - 4 / np.pi ** 2) <= 2e-3
    if cy is None:
        return
    comp = _run(False)
    assert comp["backend"] == "cython"
    for k in ("cp_g", "cp_u", "tv", "lp"):
        assert abs(pure[k] - comp[k]) <= 1e-9 * max(1.0, abs(comp[k])), k
    assert np.allclose(pure["bf"], comp["bf"], atol=1e-12)
