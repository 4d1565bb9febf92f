"""Python interface to the boostcast forecasting toolkit.

The heavy lifting lives in a compiled Rust extension. This package looks
for it in three places, in order:

1. the ``BOOSTCAST_PY_NATIVE`` environment variable (full path),
2. a ``_native*`` file next to this ``__init__.py`` (installed layout),
3. the workspace ``target/{release,debug}`` directory (source checkout).

In a source checkout, build it first::

    cargo build --release -p boostcast-py
"""

import importlib.machinery
import importlib.util
import os
import pathlib
import sys

_PKG_DIR = pathlib.Path(__file__).resolve().parent


def _candidates():
    override = os.environ.get("BOOSTCAST_PY_NATIVE")
    if override:
        yield pathlib.Path(override)
    for suffix in importlib.machinery.EXTENSION_SUFFIXES:
        yield from sorted(_PKG_DIR.glob("_native*" + suffix))
    workspace = _PKG_DIR.parent.parent
    for profile in ("release", "debug"):
        target = workspace / "target" / profile
        for name in ("libboostcast_py.so", "libboostcast_py.dylib", "boostcast_py.dll"):
            yield target / name


def _load_native():
    tried = []
    for path in _candidates():
        if path.is_file():
            loader = importlib.machinery.ExtensionFileLoader(
                "boostcast_py._native", str(path)
            )
            spec = importlib.util.spec_from_loader(
                "boostcast_py._native", loader, origin=str(path)
            )
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            sys.modules["boostcast_py._native"] = module
            return module
        tried.append(str(path))
    raise ImportError(
        "boostcast_py: compiled extension not found; run "
        "`cargo build --release -p boostcast-py` in the workspace root "
        "(searched: " + ", ".join(tried) + ")"
    )


_native = _load_native()

SeriesFrame = _native.SeriesFrame
WindowForecaster = _native.WindowForecaster
NaiveForecaster = _native.NaiveForecaster
persistence = _native.persistence
rmse = _native.rmse
mae = _native.mae
wape = _native.wape
mape = _native.mape
rse = _native.rse
pearson = _native.pearson
evaluate = _native.evaluate
ar1 = _native.ar1
random_walk = _native.random_walk
seasonal = _native.seasonal
run_config = _native.run_config
__version__ = _native.__version__

__all__ = [
    "SeriesFrame",
    "WindowForecaster",
    "NaiveForecaster",
    "persistence",
    "rmse",
    "mae",
    "wape",
    "mape",
    "rse",
    "pearson",
    "evaluate",
    "ar1",
    "random_walk",
    "seasonal",
    "run_config",
]
