"""CSV round-trip for shock-boundary traces (x, y, psi, psi_x, psi_y, b1, b2, b3)."""

import numpy as np

__all__ = ["write_trace_csv", "read_trace_csv"]

_COLUMNS = ("x", "y", "psi", "psi_x", "psi_y", "b1", "b2", "b3")


def write_trace_csv(path, x, y, psi, psi_x, psi_y, b1, b2, b3, digest: str | None = None):
    cols = [np.asarray(c, dtype=float) for c in (x, y, psi, psi_x, psi_y, b1, b2, b3)]
    n = cols[0].size
    with open(path, "w", encoding="ascii") as fh:
        if digest is not None:
            fh.write(f"# runconfig_digest={digest}\n")
        fh.write(",".join(_COLUMNS) + "\n")
        for i in range(n):
            fh.write(",".join(repr(float(c[i])) for c in cols) + "\n")


def read_trace_csv(path):
    rows = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("x,"):
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(_COLUMNS)}
