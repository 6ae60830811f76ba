"""Node deployment, distances and RNG substream conventions.

Every random stage draws from its own substream derived from the
deployment seed, so stages can be re-run independently::

    SeedSequence([seed, stream, *keys])

with ``stream`` one of the ``STREAM_*`` constants below and ``keys``
extra integers (source id, trial index, ...).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DegeneratePairError

STREAM_POSITIONS = 0
STREAM_SOCIAL = 1
STREAM_DESTINATION = 2
STREAM_PHASES = 3
STREAM_CLUSTER = 4
STREAM_SOURCES = 5

MODES = ("dense", "extended")


def substream(seed: int, stream: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, stream, *keys)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream), *map(int, keys)])
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class NetworkConfig:
    """Network size, geometry mode and radio constants.

    ``side_length`` defaults to 1 in dense mode and sqrt(n) in extended
    mode. ``power`` is the transmit power in units of the noise variance.
    """

    n: int
    mode: str = "dense"
    side_length: float | None = None
    seed: int = 0
    path_loss_alpha: float = 3.0
    power: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n}")
        if self.side_length is None:
            side = 1.0 if self.mode == "dense" else math.sqrt(self.n)
            object.__setattr__(self, "side_length", side)
        if not (self.side_length > 0 and math.isfinite(self.side_length)):
            raise ConfigurationError(f"side_length must be positive, got {self.side_length}")
        if not self.path_loss_alpha >= 2:
            raise ConfigurationError(f"path_loss_alpha must be >= 2, got {self.path_loss_alpha}")
        if not self.power >= 0:
            raise ConfigurationError(f"power must be >= 0, got {self.power}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "side_length", float(self.side_length))

    def replace(self, **changes) -> "NetworkConfig":
        data = asdict(self)
        if "n" in changes or "mode" in changes:
            # let the default side track the new size unless it is given
            data["side_length"] = None
        data.update(changes)
        return NetworkConfig(**data)


@dataclass(frozen=True)
class Deployment:
    config: NetworkConfig
    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (self.config.n, 2):
            raise ConfigurationError(
                f"positions must have shape ({self.config.n}, 2), got {pos.shape}")
        L = self.config.side_length
        if np.any(pos < 0) or np.any(pos > L):
            raise ConfigurationError("positions must lie inside [0, L]^2")
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def side_length(self) -> float:
        return self.config.side_length

    def distances_from(self, i: int) -> np.ndarray:
        """Distances from node ``i`` to every node (entry ``i`` is 0)."""
        return np.hypot(*(self.positions - self.positions[i]).T)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node_id", "x", "y"])
        for k, (x, y) in enumerate(self.positions):
            writer.writerow([k, repr(float(x)), repr(float(y))])
        return buf.getvalue()

    def header(self) -> dict:
        return asdict(self.config)

    def save(self, prefix: str | Path) -> tuple[Path, Path]:
        """Write ``<prefix>.nodes.csv`` and ``<prefix>.json``."""
        prefix = Path(prefix)
        csv_path = prefix.with_name(prefix.name + ".nodes.csv")
        json_path = prefix.with_name(prefix.name + ".json")
        csv_path.write_text(self.to_csv())
        json_path.write_text(json.dumps(self.header(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path

    @classmethod
    def load(cls, prefix: str | Path) -> "Deployment":
        prefix = Path(prefix)
        header = json.loads(prefix.with_name(prefix.name + ".json").read_text())
        config = NetworkConfig(**header)
        with open(prefix.with_name(prefix.name + ".nodes.csv"), newline="") as fh:
            rows = list(csv.DictReader(fh))
        pos = np.empty((len(rows), 2))
        for row in rows:
            pos[int(row["node_id"])] = float(row["x"]), float(row["y"])
        return cls(config, pos)


def deploy(config: NetworkConfig) -> Deployment:
    """Place ``config.n`` nodes i.i.d. uniformly in the square [0, L]^2."""
    rng = substream(config.seed, STREAM_POSITIONS)
    pos = rng.uniform(0.0, config.side_length, size=(config.n, 2))
    return Deployment(config, pos)


def distance(d: Deployment, i: int, j: int) -> float:
    if i == j:
        raise DegeneratePairError(f"distance of node {i} to itself is undefined")
    n = d.n
    if not (0 <= i < n and 0 <= j < n):
        raise ConfigurationError(f"node ids must be in [0, {n}), got {i}, {j}")
    (x1, y1), (x2, y2) = d.positions[i], d.positions[j]
    dist = math.hypot(x1 - x2, y1 - y2)
    if dist == 0.0:
        raise DegeneratePairError(f"nodes {i} and {j} coincide")
    return dist
