"""Experiment manifests and self-describing artifact files.

Every CLI command writes its outputs through an ArtifactSet: the manifest
hash (a digest of the run-defining fields: experiment name, parameters,
seed, tool version) is embedded in each CSV (comment line), JSON (field),
and SVG (comment), and manifest.json lists every artifact.  Rerunning a
command with the same manifest therefore produces bit-identical artifacts;
wall-clock time lives only in manifest.json, which is metadata rather than
an artifact.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["manifest_hash", "ArtifactSet", "verify_artifact_dir"]


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=float)


def manifest_hash(experiment: str, params: dict, seed: int, version: str) -> str:
    payload = _canonical({"experiment": experiment, "params": params, "seed": seed, "version": version})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class ArtifactSet:
    """Writer that stamps every artifact with the run's manifest hash."""

    out_dir: Path
    experiment: str
    params: dict
    seed: int
    version: str
    outputs: list = field(default_factory=list)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.hash = manifest_hash(self.experiment, self.params, self.seed, self.version)

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out_dir / name

    def write_csv(self, name: str, header: str, rows) -> Path:
        p = self.path(name)
        with open(p, "w") as fh:
            fh.write(f"# manifest {self.hash}\n")
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row) + "\n")
        return p

    def write_json(self, name: str, obj: dict) -> Path:
        p = self.path(name)
        payload = dict(obj)
        payload["manifest"] = self.hash
        with open(p, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
        return p

    def write_svg(self, name: str, svg: str) -> Path:
        p = self.path(name)
        if not svg.startswith("<!--"):
            svg = f"<!-- manifest {self.hash} -->\n" + svg
        with open(p, "w") as fh:
            fh.write(svg)
        return p

    def finish(self, wall_clock_s: float, exit_status: int) -> Path:
        manifest = {
            "experiment": self.experiment,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "hash": self.hash,
            "outputs": sorted(self.outputs),
            "wall_clock_s": wall_clock_s,
            "exit_status": exit_status,
        }
        p = self.out_dir / "manifest.json"
        with open(p, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
        return p


def verify_artifact_dir(out_dir) -> bool:
    """Check that every artifact listed in manifest.json exists and carries
    the manifest hash."""
    out_dir = Path(out_dir)
    with open(out_dir / "manifest.json") as fh:
        manifest = json.load(fh)
    h = manifest["hash"]
    for name in manifest["outputs"]:
        p = out_dir / name
        if not p.exists():
            return False
        text = p.read_text()
        if h not in text:
            return False
    return True
