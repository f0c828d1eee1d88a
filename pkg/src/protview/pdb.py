"""Fixed-column PDB parsing and the typed structure model.

Handles ATOM/HETATM/HELIX/SHEET/MODEL records of PDB v3.3.  Only the first
MODEL of multi-model files is kept, alternate locations other than blank or
'A' are dropped, and HETATM records are excluded unless requested.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .elements import element_info
from .errors import MalformedRecordError, NoAtomsError, UnknownResidueError

# Slack added to the covalent-radii sum when deciding bonds; the lower guard
# rejects duplicate coordinates.
BOND_SLACK = 0.45
BOND_MIN_DIST = 0.4


class SecondaryStructure(enum.Enum):
    HELIX = "helix"
    SHEET = "sheet"
    COIL = "coil"


@dataclass(frozen=True)
class Atom:
    serial: int
    name: str  # raw 4-char atom-name field
    element: str
    residue_name: str
    residue_seq: int
    chain_id: str
    position: tuple[float, float, float]
    is_hetero: bool = False


@dataclass(frozen=True)
class SecondaryStructureSpan:
    kind: SecondaryStructure
    chain_id: str
    start_residue_seq: int
    end_residue_seq: int

    def __post_init__(self) -> None:
        if self.start_residue_seq > self.end_residue_seq:
            raise ValueError("span start must not exceed end")

    def contains(self, chain_id: str, residue_seq: int) -> bool:
        return (
            chain_id == self.chain_id
            and self.start_residue_seq <= residue_seq <= self.end_residue_seq
        )


@dataclass
class ProteinStructure:
    """Immutable-by-convention container for one parsed structure."""

    id: str
    atoms: tuple[Atom, ...]
    chains: tuple[str, ...]
    bonds: tuple[tuple[int, int], ...] = ()
    ss_spans: tuple[SecondaryStructureSpan, ...] = ()
    _positions: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def positions(self) -> np.ndarray:
        """(n_atoms, 3) float64 array of coordinates, cached."""
        if self._positions is None:
            self._positions = np.array([a.position for a in self.atoms], dtype=np.float64)
        return self._positions

    def ca_indices(self, chain_id: str) -> list[int]:
        """Indices of alpha-carbon atoms of one chain, in file order."""
        return [
            i
            for i, a in enumerate(self.atoms)
            if a.chain_id == chain_id and a.name.strip() == "CA" and not a.is_hetero
        ]

    def residue_exists(self, chain_id: str, residue_seq: int) -> bool:
        return any(
            a.chain_id == chain_id and a.residue_seq == residue_seq for a in self.atoms
        )


def _infer_element_from_name(name_field: str) -> str:
    """Element from the atom-name columns when columns 77-78 are blank."""
    head = name_field[:2].strip()
    letters = "".join(ch for ch in head if ch.isalpha())
    if not letters:
        letters = "".join(ch for ch in name_field if ch.isalpha())
    if not letters:
        return "X"
    if len(letters) >= 2 and name_field[0] != " ":
        return letters[:2].upper()
    return letters[0].upper()


def _parse_span(line: str, kind: SecondaryStructure) -> SecondaryStructureSpan | None:
    if kind is SecondaryStructure.HELIX:
        chain, start_s, end_s = line[19], line[21:25], line[33:37]
    else:
        chain, start_s, end_s = line[21], line[22:26], line[33:37]
    try:
        start, end = int(start_s), int(end_s)
    except ValueError:
        return None
    if start > end:
        start, end = end, start
    return SecondaryStructureSpan(kind, chain, start, end)


def parse_pdb(
    text: str, *, structure_id: str = "", include_hetero: bool = False
) -> ProteinStructure:
    """Parse PDB text into a :class:`ProteinStructure`.

    Raises :class:`NoAtomsError` when no atom records survive filtering and
    :class:`MalformedRecordError` (with the 1-based line number) when an
    ATOM/HETATM line is too short or its coordinates do not parse.
    """
    atoms: list[Atom] = []
    spans: list[SecondaryStructureSpan] = []
    chains: list[str] = []
    past_first_model = False

    for line_no, line in enumerate(text.splitlines(), start=1):
        record = line[:6]
        tag = record.strip()
        if tag == "ENDMDL":
            past_first_model = True
            continue
        if tag in ("HELIX", "SHEET"):
            kind = SecondaryStructure.HELIX if tag == "HELIX" else SecondaryStructure.SHEET
            span = _parse_span(line, kind)
            if span is not None:
                spans.append(span)
            continue
        if tag not in ("ATOM", "HETATM") or past_first_model:
            continue
        if tag == "HETATM" and not include_hetero:
            continue
        if len(line) < 54:
            raise MalformedRecordError(line_no, "record too short to hold coordinates")
        alt_loc = line[16]
        if alt_loc not in (" ", "A"):
            continue
        try:
            x = float(line[30:38])
            y = float(line[38:46])
            z = float(line[46:54])
        except ValueError:
            raise MalformedRecordError(line_no, "unparsable coordinates") from None
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise MalformedRecordError(line_no, "non-finite coordinates")
        try:
            serial = int(line[6:11])
        except ValueError:
            serial = len(atoms) + 1
        name = line[12:16]
        element = line[76:78].strip().upper() if len(line) >= 78 else ""
        if not element:
            element = _infer_element_from_name(name)
        residue_name = line[17:20].strip()
        try:
            residue_seq = int(line[22:26])
        except ValueError:
            raise MalformedRecordError(line_no, "unparsable residue number") from None
        chain_id = line[21]
        if chain_id not in chains:
            chains.append(chain_id)
        atoms.append(
            Atom(
                serial=serial,
                name=name,
                element=element,
                residue_name=residue_name,
                residue_seq=residue_seq,
                chain_id=chain_id,
                position=(x, y, z),
                is_hetero=(tag == "HETATM"),
            )
        )

    if not atoms:
        raise NoAtomsError("no ATOM records found")
    return ProteinStructure(
        id=structure_id,
        atoms=tuple(atoms),
        chains=tuple(chains),
        ss_spans=_dedupe_spans(spans),
    )


def _dedupe_spans(
    spans: list[SecondaryStructureSpan],
) -> tuple[SecondaryStructureSpan, ...]:
    """Drop spans overlapping an earlier span of the same chain."""
    kept: list[SecondaryStructureSpan] = []
    for span in spans:
        clash = any(
            k.chain_id == span.chain_id
            and k.start_residue_seq <= span.end_residue_seq
            and span.start_residue_seq <= k.end_residue_seq
            for k in kept
        )
        if not clash:
            kept.append(span)
    return tuple(kept)


def to_pdb_text(structure: ProteinStructure) -> str:
    """Serialize back to canonical fixed-column PDB text."""
    lines: list[str] = []
    helix_n = sheet_n = 0
    for span in structure.ss_spans:
        a, b = span.start_residue_seq, span.end_residue_seq
        if span.kind is SecondaryStructure.HELIX:
            helix_n += 1
            lines.append(
                f"HELIX  {helix_n:3d} {helix_n:3d} UNK {span.chain_id} {a:4d}  UNK {span.chain_id} {b:4d}  1{'':30s}"
            )
        else:
            sheet_n += 1
            lines.append(
                f"SHEET  {sheet_n:3d}   A 1 UNK {span.chain_id}{a:4d}  UNK {span.chain_id}{b:4d}  0"
            )
    for atom in structure.atoms:
        tag = "HETATM" if atom.is_hetero else "ATOM  "
        x, y, z = atom.position
        lines.append(
            f"{tag}{atom.serial:5d} {atom.name:<4.4s} {atom.residue_name:>3.3s} "
            f"{atom.chain_id}{atom.residue_seq:4d}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          {atom.element:>2.2s}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"


def infer_bonds(structure: ProteinStructure) -> tuple[tuple[int, int], ...]:
    """Distance-based bonds: d <= cov_i + cov_j + slack, d > the duplicate guard.

    Atoms in different chains are never bonded.
    """
    n = len(structure.atoms)
    if n == 0:
        return ()
    positions = structure.positions
    cov = np.array(
        [element_info(a.element).covalent_radius for a in structure.atoms]
    )
    max_cut = 2.0 * float(cov.max()) + BOND_SLACK
    tree = cKDTree(positions)
    bonds: list[tuple[int, int]] = []
    for i, j in sorted(tree.query_pairs(max_cut)):
        if structure.atoms[i].chain_id != structure.atoms[j].chain_id:
            continue
        d = float(np.linalg.norm(positions[i] - positions[j]))
        if BOND_MIN_DIST < d <= cov[i] + cov[j] + BOND_SLACK:
            bonds.append((i, j))
    return tuple(bonds)


def centroid(structure: ProteinStructure) -> np.ndarray:
    """Unweighted mean of atom positions."""
    if not structure.atoms:
        raise NoAtomsError("centroid of empty structure")
    return structure.positions.mean(axis=0)


def secondary_structure_of(
    structure: ProteinStructure, chain_id: str, residue_seq: int
) -> SecondaryStructure:
    """Three-way HELIX/SHEET/COIL assignment from the parsed spans."""
    if not structure.residue_exists(chain_id, residue_seq):
        raise UnknownResidueError(f"residue {chain_id}/{residue_seq} not in structure")
    for span in structure.ss_spans:
        if span.contains(chain_id, residue_seq):
            return span.kind
    return SecondaryStructure.COIL
