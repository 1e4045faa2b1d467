"""
Artifact storage for wtkin runs: JSON reports, spectra CSV and trajectories
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from kinetics.evolve import TrajectoryRecord
from kinetics.grid import Spectrum, read_spectrum_csv, write_spectrum_csv


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return {"real": to_jsonable(value.real), "imag": to_jsonable(value.imag)}
    return value


class ArtifactStore:
    """
    Writes everything a command produces into one output directory.

    JSON is written with sorted keys so reruns diff cleanly.
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        """
        Write a JSON document

        Args:
            name: File name inside the output directory
            payload: Report content

        Returns:
            Path of the written file
        """
        target = self.path(name)
        text = json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False)
        target.write_text(text + "\n", encoding="utf-8")
        return target

    def load_json(self, name: str) -> Dict[str, Any]:
        return json.loads(self.path(name).read_text(encoding="utf-8"))

    def write_spectrum(self, name: str, s: Spectrum, header: str = "epsilon,f") -> Path:
        return write_spectrum_csv(self.path(name), s, header)

    def write_config(self, text: str, name: str = "config.echo.conf") -> Path:
        target = self.path(name)
        target.write_text(text, encoding="utf-8")
        return target

    def save_trajectory(self, record: TrajectoryRecord, extra: Dict[str, Any]) -> Path:
        """trajectory.json plus one snap_<index>.csv per snapshot"""
        data = record.to_dict()
        for name, snapshot in zip(data["snapshots"], record.snapshots):
            self.write_spectrum(name, snapshot)
        data.update(extra)
        return self.write_json("trajectory.json", data)

    def load_trajectory(self) -> TrajectoryRecord:
        """Rebuild a TrajectoryRecord from trajectory.json and its snapshots"""
        data = self.load_json("trajectory.json")
        snapshots: List[Spectrum] = [read_spectrum_csv(self.path(name)) for name in data["snapshots"]]
        if snapshots:
            grid = snapshots[0].grid
            snapshots = [Spectrum(grid, s.values) for s in snapshots]
        return TrajectoryRecord.from_dict(data, snapshots)


# Global instance
_store_instance: Optional[ArtifactStore] = None


def get_store(out_dir: Union[str, Path, None] = None) -> ArtifactStore:
    """
    Get or create the shared ArtifactStore

    Args:
        out_dir: Output directory. If None, uses the configured default.

    Returns:
        ArtifactStore for that directory
    """
    global _store_instance

    if out_dir is None:
        from config import config
        out_dir = config.OUTPUT_DIR

    if _store_instance is None or _store_instance.out_dir != Path(out_dir):
        _store_instance = ArtifactStore(out_dir)

    return _store_instance
