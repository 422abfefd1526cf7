"""Run manifests: record what an experiment produced and replay it."""

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path

from .. import __version__
from ..errors import ReproductionError
from .config import ExperimentConfig
from .experiments import RUNNERS

MANIFEST = "manifest.json"


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_json(path, obj):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def run_experiment(cfg, out_root, workers=1):
    """Run ``cfg`` into ``out_root/<id>`` and write its manifest.

    Returns the manifest dict.
    """
    out = Path(out_root) / cfg.id
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files = RUNNERS[cfg.kind](cfg, out, workers)
    wall = time.perf_counter() - t0
    manifest = {
        "id": cfg.id,
        "kind": cfg.kind,
        "config": cfg.to_dict(),
        "config_hash": cfg.hash(),
        "version": __version__,
        "seeds": dict(cfg.seeds),
        "wall_clock_seconds": round(wall, 3),
        "outputs": {Path(f).name: sha256_file(f) for f in sorted(set(map(str, files)))},
    }
    _atomic_json(out / MANIFEST, manifest)
    return manifest


def load_manifest(path):
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    return json.loads(path.read_text())


def reproduce(manifest_path, workers=1, scratch=None, suffixes=(".csv",)):
    """Re-run a manifest's config and compare output bytes.

    Only outputs with the given suffixes are compared (CSVs by default).
    Raises :class:`ReproductionError` listing mismatching files.
    """
    old = load_manifest(manifest_path)
    cfg = ExperimentConfig.from_dict(old["config"])
    if cfg.hash() != old["config_hash"]:
        raise ReproductionError("manifest config does not match its recorded hash")
    with tempfile.TemporaryDirectory(dir=scratch) as tmp:
        new = run_experiment(cfg, tmp, workers)
    bad = [name for name, digest in old["outputs"].items()
           if name.endswith(tuple(suffixes)) and new["outputs"].get(name) != digest]
    missing = [n for n in old["outputs"] if n not in new["outputs"]]
    if bad or missing:
        raise ReproductionError(f"outputs differ on re-run: {sorted(set(bad + missing))}")
    return new
