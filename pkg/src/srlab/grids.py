"""Scalar fields on rectangular or shock-fitted strip grids, with file I/O.

Binary layout (grid payload, little endian):
    magic "SRLGRID1" | u64 nx | u64 ny | f64 xs[nx] | f64 ys[ny] | f64 psi[nx*ny]
with psi stored row-major in x (index i*ny + j).  A JSON sidecar carries the
geometry descriptor, solver metadata, and the run-configuration digest.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["ScalarField2D", "geometric_axis", "uniform_axis"]

_MAGIC = b"SRLGRID1"


def uniform_axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 3:
        raise ValueError("need at least 3 nodes per axis")
    return np.linspace(lo, hi, n)


def geometric_axis(length: float, n: int, q: float = 0.95) -> np.ndarray:
    """Nodes on [0, length], geometrically graded toward 0 with spacing ratio q.

    Adjacent spacings satisfy h_{k} = h_{k+1} * q moving toward 0, so the
    finest cell touches x = 0.  q = 1 reduces to the uniform axis.
    """
    if n < 3:
        raise ValueError("need at least 3 nodes per axis")
    if not 0.0 < q <= 1.0:
        raise ValueError(f"grading ratio must lie in (0, 1], got {q}")
    m = n - 1
    if q == 1.0:
        return np.linspace(0.0, length, n)
    ratio = 1.0 / q
    h0 = length * (ratio - 1.0) / (ratio**m - 1.0)
    steps = h0 * ratio ** np.arange(m)
    xs = np.concatenate([[0.0], np.cumsum(steps)])
    xs[-1] = length
    return xs


@dataclass
class ScalarField2D:
    """Grid values psi with geometry metadata.

    geometry["kind"] is "rect" (ys are physical ordinates) or "sonic_strip"
    (ys is the normalized ordinate s in [0, 1]; geometry carries the shock
    image fhat and its chart derivatives per x-node, plus the configuration).
    """

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    geometry: dict = field(default_factory=lambda: {"kind": "rect"})
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.xs.size, self.ys.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match axes "
                f"({self.xs.size}, {self.ys.size})"
            )
        if np.any(np.diff(self.xs) <= 0.0) or np.any(np.diff(self.ys) <= 0.0):
            raise ValueError("axis coordinates must be strictly increasing")

    @property
    def nx(self) -> int:
        return self.xs.size

    @property
    def ny(self) -> int:
        return self.ys.size

    @property
    def kind(self) -> str:
        return self.geometry.get("kind", "rect")

    def copy(self) -> "ScalarField2D":
        return ScalarField2D(
            self.xs.copy(), self.ys.copy(), self.values.copy(),
            json.loads(json.dumps(self.geometry)), json.loads(json.dumps(self.meta)),
        )

    # -- I/O -------------------------------------------------------------

    def save(self, path) -> None:
        """Write <path> binary payload and <path>.json sidecar."""
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<QQ", self.nx, self.ny))
            fh.write(self.xs.astype("<f8").tobytes())
            fh.write(self.ys.astype("<f8").tobytes())
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        sidecar = {
            "format": _MAGIC.decode("ascii"),
            "nx": self.nx,
            "ny": self.ny,
            "geometry": self.geometry,
            "meta": self.meta,
        }
        with open(path.with_suffix(path.suffix + ".json"), "w", encoding="ascii") as fh:
            json.dump(sidecar, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ScalarField2D":
        path = Path(path)
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != _MAGIC:
                raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
            nx, ny = struct.unpack("<QQ", fh.read(16))
            xs = np.frombuffer(fh.read(8 * nx), dtype="<f8").copy()
            ys = np.frombuffer(fh.read(8 * ny), dtype="<f8").copy()
            vals = np.frombuffer(fh.read(8 * nx * ny), dtype="<f8").copy().reshape(nx, ny)
        geometry, meta = {"kind": "rect"}, {}
        sidecar = path.with_suffix(path.suffix + ".json")
        if sidecar.exists():
            with open(sidecar, encoding="ascii") as fh:
                d = json.load(fh)
            geometry = d.get("geometry", geometry)
            meta = d.get("meta", meta)
        return cls(xs, ys, vals, geometry, meta)

    def export_csv(self, path, digest: str | None = None, x_index=None, y_index=None) -> None:
        """Write (x, y, psi) rows; restrict to one grid line with x_index/y_index."""
        ii = range(self.nx) if x_index is None else [x_index]
        jj = range(self.ny) if y_index is None else [y_index]
        with open(path, "w", encoding="ascii") as fh:
            if digest is not None:
                fh.write(f"# runconfig_digest={digest}\n")
            fh.write("x,y,psi\n")
            for i in ii:
                for j in jj:
                    fh.write(f"{float(self.xs[i])!r},{float(self.ys[j])!r},{float(self.values[i, j])!r}\n")
