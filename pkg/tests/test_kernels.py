"""The compiled kernels agree with the pure-Python ones."""

import importlib
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from padicgap import _kernels_py as py

try:
    from padicgap import _kernels as cy
except ImportError:  # pragma: no cover - extension not built
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")

moduli = st.sampled_from([2**10, 3**20, 5**25, 2**61 - 1, 3**39, 7**30, 2**200])


def series(mod, max_len=12):
    return st.lists(st.integers(0, mod - 1), min_size=1, max_size=max_len)


@needs_ext
@settings(max_examples=150, deadline=None)
@given(st.data(), moduli, st.integers(0, 14))
def test_mul_trunc_agrees(data, mod, D):
    a = data.draw(series(mod))
    b = data.draw(series(mod))
    assert cy.mul_trunc(a, b, D, mod) == py.mul_trunc(a, b, D, mod)


@needs_ext
@settings(max_examples=150, deadline=None)
@given(st.data(), moduli, st.integers(1, 14))
def test_compose_agrees(data, mod, D):
    f = data.draw(series(mod))
    g = data.draw(series(mod))
    assert cy.compose(f, g, D, mod) == py.compose(f, g, D, mod)


@needs_ext
@settings(max_examples=150, deadline=None)
@given(st.data(), moduli)
def test_horner_agrees(data, mod):
    cs = data.draw(series(mod, 20))
    x = data.draw(st.integers(0, mod - 1))
    assert cy.horner(cs, x, mod) == py.horner(cs, x, mod)


def test_python_kernels_by_hand():
    mod = 3**5
    assert py.mul_trunc([1, 1], [1, 1], 2, mod) == [1, 2, 1]
    assert py.mul_trunc([1, 1], [1, 1], 1, mod) == [1, 2]
    # (1 + z)**2 at z = 3z
    assert py.compose([1, 2, 1], [0, 3], 2, mod) == [1, 6, 9]
    assert py.horner([1, 2, 1], 2, mod) == 9


def test_pure_flag_selects_python():
    code = "import padicgap.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, PADICGAP_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_default_backend_is_compiled():
    if os.environ.get("PADICGAP_PURE"):
        pytest.skip("pure mode forced in this run")
    k = importlib.import_module("padicgap.kernels")
    assert k.BACKEND == "cython"
