"""Deterministic file formats for grids and tables.

Every emitted file is a single JSON header line followed by CSV rows; floats
are printed with 17 significant digits so parsing recovers the exact bit
pattern, and headers use sorted keys so identical jobs emit identical bytes.
"""

import json

import numpy as np

__all__ = [
    "fmt17",
    "write_wigner_grid",
    "read_wigner_grid",
    "write_prob_table",
    "read_prob_table",
]


def fmt17(x):
    """Format a float with 17 significant digits (round-trip exact)."""
    return format(float(x), ".17g")


def _params_dict(params):
    return {"nu": params.nu, "delta": params.delta, "hbar": params.hbar,
            "zeta": params.zeta}


def _header_line(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def write_wigner_grid(grid, path):
    """Emit a WignerGrid: JSON header, then CSV rows r,q,theta,W."""
    header = _header_line(
        {
            "type": "wigner_grid",
            "state": {"k": grid.k, "l": grid.l},
            "params": _params_dict(grid.params),
            "axes": {
                "r": [fmt17(v) for v in grid.r_axis],
                "q": [fmt17(v) for v in grid.q_axis],
                "theta": [fmt17(v) for v in grid.theta_axis],
            },
            "nodes": [
                [[fmt17(x), fmt17(y)] for x, y in slice_pts]
                for slice_pts in grid.nodes
            ],
        }
    )
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write("r,q,theta,W\n")
        for i, r in enumerate(grid.r_axis):
            for j, q in enumerate(grid.q_axis):
                for s, th in enumerate(grid.theta_axis):
                    fh.write(
                        f"{fmt17(r)},{fmt17(q)},{fmt17(th)},{fmt17(grid.values[i, j, s])}\n"
                    )


def read_wigner_grid(path):
    """Parse a grid file back; returns (header dict, values ndarray).

    The values array is reshaped to (len(r), len(q), len(theta)) and is
    bitwise identical to what was written.
    """
    with open(path) as fh:
        header = json.loads(fh.readline())
        assert fh.readline().strip() == "r,q,theta,W"
        vals = [float(line.rsplit(",", 1)[1]) for line in fh if line.strip()]
    nr = len(header["axes"]["r"])
    nq = len(header["axes"]["q"])
    nt = len(header["axes"]["theta"])
    values = np.array(vals).reshape(nr, nq, nt)
    header["axes"] = {k: [float(v) for v in ax] for k, ax in header["axes"].items()}
    header["nodes"] = [
        [(float(x), float(y)) for x, y in slice_pts] for slice_pts in header["nodes"]
    ]
    return header, values


def write_prob_table(rows, params, path, extra=None):
    """Emit a probability table: JSON header, then CSV k,l,r,p,theta,v,t,P."""
    payload = {"type": "prob_table", "params": _params_dict(params)}
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        fh.write(_header_line(payload) + "\n")
        fh.write("k,l,r,p,theta,v,t,P\n")
        for k, l, r, p, th, v, t, prob in rows:
            fh.write(
                f"{k},{l},{fmt17(r)},{fmt17(p)},{fmt17(th)},"
                f"{fmt17(v)},{fmt17(t)},{fmt17(prob)}\n"
            )


def read_prob_table(path):
    """Parse a probability table back; returns (header dict, row list)."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        assert fh.readline().strip() == "k,l,r,p,theta,v,t,P"
        rows = []
        for line in fh:
            if not line.strip():
                continue
            k, l, *floats = line.strip().split(",")
            rows.append((int(k), int(l), *(float(x) for x in floats)))
    return header, rows
