import pytest

from adetag import crf


def _backends():
    mods = {"python": crf.python_backend()}
    if crf.BACKEND == "cython":
        mods["cython"] = crf.active_backend()
    return mods


@pytest.fixture(params=sorted(_backends()))
def crf_backend(request, monkeypatch):
    """Run CRF tests against both the numpy fallback and the compiled kernels."""
    monkeypatch.setattr(crf, "_kernels", _backends()[request.param])
    return request.param
