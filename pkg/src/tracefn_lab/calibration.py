"""The calibration manifest: frozen thresholds for asymptotic-bound tests.

Square-root cancellation statements come with implicit constants, so each
ratio suite carries a threshold frozen in a versioned JSON manifest that
is checked into the repository.  Assert-mode runs (tests, the service,
the CLI suites) read the checked-in manifest; only the explicit
``calibrate`` command regenerates observed maxima, proposing 2x the
observed value as the frozen threshold over the declared grid.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

_MANIFEST_NAME = "calibration.json"
_cached: dict | None = None


def load_manifest() -> dict:
    global _cached
    if _cached is None:
        ref = resources.files("tracefn_lab").joinpath("data", _MANIFEST_NAME)
        with ref.open() as fh:
            _cached = json.load(fh)
    return _cached


def threshold(suite: str) -> float:
    entry = load_manifest()["suites"][suite]
    return float(entry["threshold"])


def grid(suite: str) -> list:
    return load_manifest()["suites"][suite].get("grid", [])


def write_manifest(manifest: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")


def propose(observed: float) -> float:
    """Frozen threshold rule: twice the observed maximum on the grid."""
    return 2.0 * observed
