"""Dataset manifests and a synthetic two-class structure generator.

The generator builds helix bundles (class 0) and sheet barrels (class 1)
with full N/CA/C/O backbones and HELIX/SHEET annotations, for exercising
the pipeline when no curated structure sets are at hand.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyDatasetError, ManifestError
from .geometry import _any_perpendicular, _normalize
from .pdb import Atom, ProteinStructure, SecondaryStructure, SecondaryStructureSpan, to_pdb_text

MANIFEST_HEADER = ["protein_id", "pdb_path", "class_label", "class_name"]


@dataclass(frozen=True)
class ManifestEntry:
    protein_id: str
    pdb_path: Path
    class_label: int
    class_name: str


@dataclass
class DatasetManifest:
    name: str
    entries: list[ManifestEntry]

    @property
    def labels(self) -> dict[str, int]:
        return {e.protein_id: e.class_label for e in self.entries}

    @property
    def n_classes(self) -> int:
        return max(e.class_label for e in self.entries) + 1

    def class_names(self) -> list[str]:
        names = {e.class_label: e.class_name for e in self.entries}
        return [names[c] for c in range(self.n_classes)]


def load_manifest(path) -> DatasetManifest:
    """Load and validate a manifest CSV (ids unique, paths resolvable,
    labels contiguous from zero)."""
    path = Path(path)
    entries: list[ManifestEntry] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise ManifestError(f"manifest header must be {','.join(MANIFEST_HEADER)}")
        for rec in reader:
            if len(rec) != 4:
                raise ManifestError(f"bad manifest row: {rec!r}")
            pdb_path = Path(rec[1])
            if not pdb_path.is_absolute():
                pdb_path = path.parent / pdb_path
            entries.append(ManifestEntry(rec[0], pdb_path, int(rec[2]), rec[3]))
    if not entries:
        raise EmptyDatasetError("manifest holds no proteins")
    ids = [e.protein_id for e in entries]
    if len(set(ids)) != len(ids):
        raise ManifestError("protein ids must be unique")
    labels = sorted({e.class_label for e in entries})
    if labels != list(range(len(labels))):
        raise ManifestError("class labels must be contiguous from 0")
    for e in entries:
        if not e.pdb_path.is_file():
            raise ManifestError(f"missing pdb file: {e.pdb_path}")
    return DatasetManifest(name=path.stem, entries=entries)


def write_manifest(path, entries: list[ManifestEntry]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for e in entries:
            writer.writerow([e.protein_id, str(e.pdb_path), e.class_label, e.class_name])


# -- synthetic structures -------------------------------------------------------

_RESIDUES = [
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE",
    "LEU", "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL",
]

# backbone offsets along the chain tangent (angstroms)
_N_OFFSET = 1.2
_C_OFFSET = 1.2
_O_OFFSET = 1.0


def _backbone_atoms(ca_points: np.ndarray, residue_names: list[str]) -> list[Atom]:
    atoms: list[Atom] = []
    n = len(ca_points)
    serial = 1
    for i in range(n):
        prev_p = ca_points[max(0, i - 1)]
        next_p = ca_points[min(n - 1, i + 1)]
        tangent = _normalize(next_p - prev_p)
        perp = _any_perpendicular(tangent)
        ca = ca_points[i]
        res = residue_names[i]
        for name, pos in (
            (" N  ", ca - _N_OFFSET * tangent),
            (" CA ", ca),
            (" C  ", ca + _C_OFFSET * tangent),
            (" O  ", ca + _C_OFFSET * tangent + _O_OFFSET * perp),
        ):
            atoms.append(
                Atom(
                    serial=serial,
                    name=name,
                    element=name.strip()[0],
                    residue_name=res,
                    residue_seq=i + 1,
                    chain_id="A",
                    position=(round(pos[0], 3), round(pos[1], 3), round(pos[2], 3)),
                )
            )
            serial += 1
    return atoms


def _connector(start: np.ndarray, end: np.ndarray, spacing: float = 3.5) -> list[np.ndarray]:
    gap = float(np.linalg.norm(end - start))
    steps = max(1, int(math.ceil(gap / spacing)))
    return [start + (end - start) * (k / steps) for k in range(1, steps)]


def make_helix_bundle(protein_id: str, rng: np.random.Generator) -> ProteinStructure:
    """Several ideal alpha helices around a bundle axis, joined by loops."""
    n_helices = int(rng.integers(3, 6))
    bundle_r = float(rng.uniform(5.5, 8.5))
    rise, turn, helix_r = 1.5, math.radians(100.0), 2.3
    ca: list[np.ndarray] = []
    spans: list[tuple[int, int]] = []
    for h in range(n_helices):
        phi = 2.0 * math.pi * h / n_helices + float(rng.normal(0, 0.1))
        base = np.array([bundle_r * math.cos(phi), bundle_r * math.sin(phi), rng.uniform(-2, 0)])
        axis = _normalize(np.array([rng.normal(0, 0.12), rng.normal(0, 0.12), 1.0 if h % 2 == 0 else -1.0]))
        u = _any_perpendicular(axis)
        v = np.cross(axis, u)
        phase = float(rng.uniform(0, 2 * math.pi))
        n_res = int(rng.integers(10, 17))
        start_pts = []
        for i in range(n_res):
            ang = turn * i + phase
            p = base + axis * (rise * i) + helix_r * (math.cos(ang) * u + math.sin(ang) * v)
            start_pts.append(p)
        if ca:
            ca.extend(_connector(ca[-1], start_pts[0]))
        first = len(ca) + 1
        ca.extend(start_pts)
        spans.append((first, len(ca)))
    points = np.array(ca) + rng.normal(0, 0.15, (len(ca), 3))
    names = [str(_RESIDUES[int(rng.integers(0, 20))]) for _ in range(len(points))]
    atoms = _backbone_atoms(points, names)
    ss = tuple(
        SecondaryStructureSpan(SecondaryStructure.HELIX, "A", a, b) for a, b in spans
    )
    return ProteinStructure(id=protein_id, atoms=tuple(atoms), chains=("A",), ss_spans=ss)


def make_sheet_barrel(protein_id: str, rng: np.random.Generator) -> ProteinStructure:
    """Pleated beta strands on a barrel surface, alternating direction."""
    n_strands = int(rng.integers(6, 9))
    barrel_r = float(rng.uniform(6.0, 8.5))
    spacing, pleat = 3.4, 0.45
    shear = float(rng.uniform(0.25, 0.5))
    ca: list[np.ndarray] = []
    spans: list[tuple[int, int]] = []
    for s in range(n_strands):
        phi = 2.0 * math.pi * s / n_strands
        radial = np.array([math.cos(phi), math.sin(phi), 0.0])
        tangential = np.array([-math.sin(phi), math.cos(phi), 0.0])
        n_res = int(rng.integers(8, 13))
        up = s % 2 == 0
        z0 = 0.0 if up else spacing * (n_res - 1)
        direction = 1.0 if up else -1.0
        pts = []
        for i in range(n_res):
            z = z0 + direction * spacing * i
            wobble = pleat * (1 if i % 2 == 0 else -1)
            p = (barrel_r + wobble) * radial + tangential * (shear * i * direction) + np.array([0.0, 0.0, z])
            pts.append(p)
        if ca:
            ca.extend(_connector(ca[-1], pts[0]))
        first = len(ca) + 1
        ca.extend(pts)
        spans.append((first, len(ca)))
    points = np.array(ca) + rng.normal(0, 0.15, (len(ca), 3))
    names = [str(_RESIDUES[int(rng.integers(0, 20))]) for _ in range(len(points))]
    atoms = _backbone_atoms(points, names)
    ss = tuple(
        SecondaryStructureSpan(SecondaryStructure.SHEET, "A", a, b) for a, b in spans
    )
    return ProteinStructure(id=protein_id, atoms=tuple(atoms), chains=("A",), ss_spans=ss)


def generate_synthetic_dataset(out_dir, n_per_class: int = 20, seed: int = 0) -> Path:
    """Write PDB files plus a manifest.csv; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries: list[ManifestEntry] = []
    makers = [("helix_bundle", make_helix_bundle), ("sheet_barrel", make_sheet_barrel)]
    for label, (class_name, maker) in enumerate(makers):
        for i in range(n_per_class):
            pid = f"{class_name[:5]}{i:03d}"
            structure = maker(pid, rng)
            pdb_path = out_dir / f"{pid}.pdb"
            pdb_path.write_text(to_pdb_text(structure))
            entries.append(ManifestEntry(pid, pdb_path, label, class_name))
    manifest_path = out_dir / "manifest.csv"
    write_manifest(manifest_path, entries)
    return manifest_path
