from __future__ import annotations

import math

import numpy as np
import pytest

from protview.pdb import Atom, ProteinStructure, SecondaryStructure, SecondaryStructureSpan
from protview.scene import PACKED_WIDTH


def pdb_atom_line(
    serial: int,
    name: str,
    residue: str,
    chain: str,
    seq: int,
    x: float,
    y: float,
    z: float,
    element: str = "",
    hetero: bool = False,
    alt_loc: str = " ",
) -> str:
    tag = "HETATM" if hetero else "ATOM  "
    name4 = name if len(name) == 4 else f" {name:<3s}"
    line = (
        f"{tag}{serial:5d} {name4}{alt_loc}{residue:>3s} {chain}{seq:4d}    "
        f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00          {element:>2s}"
    )
    return line


def ca_structure(positions, chain: str = "A", spans=()) -> ProteinStructure:
    """Alpha-carbon-only structure from a coordinate list."""
    atoms = tuple(
        Atom(
            serial=i + 1,
            name=" CA ",
            element="C",
            residue_name="GLY",
            residue_seq=i + 1,
            chain_id=chain,
            position=tuple(float(v) for v in p),
        )
        for i, p in enumerate(positions)
    )
    return ProteinStructure(
        id="test", atoms=atoms, chains=(chain,), ss_spans=tuple(spans)
    )


def helix_positions(n: int = 12, radius: float = 2.3, rise: float = 1.5):
    turn = math.radians(100.0)
    return [
        (radius * math.cos(turn * i), radius * math.sin(turn * i), rise * i)
        for i in range(n)
    ]


@pytest.fixture
def helix_structure() -> ProteinStructure:
    pts = helix_positions(12)
    span = SecondaryStructureSpan(SecondaryStructure.HELIX, "A", 1, 12)
    return ca_structure(pts, spans=[span])


def random_packed_scene(rng: np.random.Generator, max_prims: int = 10):
    """Random packed (kinds, params) mix of all primitive types."""
    n = int(rng.integers(1, max_prims + 1))
    kinds = rng.integers(0, 3, n).astype(np.int32)
    params = np.zeros((n, PACKED_WIDTH))
    for i, kind in enumerate(kinds):
        if kind == 0:
            params[i, 0:3] = rng.normal(0.0, 1.5, 3)
            params[i, 3] = rng.uniform(0.2, 1.8)
            params[i, 4:7] = rng.integers(0, 256, 3)
        elif kind == 1:
            params[i, 0:3] = rng.normal(0.0, 1.5, 3)
            params[i, 3:6] = rng.normal(0.0, 1.5, 3)
            params[i, 6] = rng.uniform(0.1, 0.9)
            params[i, 7] = float(rng.integers(0, 2))
            params[i, 8:11] = rng.integers(0, 256, 3)
        else:
            params[i, 0:9] = rng.normal(0.0, 1.5, 9)
            params[i, 9:12] = rng.integers(0, 256, 3)
    return kinds, params
