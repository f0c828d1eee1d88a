"""Build render scenes from a structure under the 13 representation styles.

Display formats (spacefill, wireframe, ball&stick), backbone-derived display
structures (backbone, cartoon, ribbons, rockets, strands, trace), and the
four recolored ball&stick variants (amino, chain, charge, structure).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import palettes
from .elements import element_info
from .errors import EmptySceneError
from .geometry import _any_perpendicular, _normalize, ribbon_frames, spline_through
from .palettes import RGB
from .pdb import (
    Atom,
    ProteinStructure,
    SecondaryStructure,
    infer_bonds,
    secondary_structure_of,
)
from .scene import Cylinder, Scene, Sphere, TriMesh


class RepresentationType(enum.Enum):
    BALL_AND_STICK = "ballstick"
    SPACEFILL = "spacefill"
    WIREFRAME = "wireframe"
    BACKBONE = "backbone"
    CARTOON = "cartoon"
    RIBBONS = "ribbons"
    ROCKETS = "rockets"
    STRANDS = "strands"
    TRACE = "trace"
    AMINO = "amino"
    CHAIN = "chain"
    CHARGE = "charge"
    STRUCTURE = "structure"

    @classmethod
    def from_name(cls, name: str) -> "RepresentationType":
        for rep in cls:
            if rep.value == name.lower():
                return rep
        raise ValueError(f"unknown representation {name!r}")


# The recolored variants share ball&stick geometry.
_RECOLORED = {
    RepresentationType.AMINO,
    RepresentationType.CHAIN,
    RepresentationType.CHARGE,
    RepresentationType.STRUCTURE,
}


class ColorScheme(enum.Enum):
    CPK = "cpk"
    AMINO = "amino"
    CHAIN = "chain"
    CHARGE = "charge"
    STRUCTURE = "structure"


# Residue-level formal charges for the charge gradient.
FORMAL_CHARGES = {"ASP": -1.0, "GLU": -1.0, "LYS": 1.0, "ARG": 1.0}


@dataclass(frozen=True)
class StyleConfig:
    """Geometry thickness and tessellation settings.

    The *_units fields are thickness integers converted to angstrom radii
    via ``unit_to_angstrom`` (1 unit = 1/250 angstrom).  The spacefill cap
    stays off by default: capping at 200 units (0.8 angstrom) would shrink
    every atom below its van der Waals radius.
    """

    spacefill_units: int = 200
    wireframe_units: int = 60
    backbone_units: int = 150
    strands_units: int = 300
    trace_units: int = 300
    unit_to_angstrom: float = 1.0 / 250.0
    ballstick_sphere_fraction: float = 0.25
    ballstick_stick_radius: float = 0.15
    ribbon_width: float = 1.5
    strands_thread_count: int = 5
    spacefill_cap_enabled: bool = False
    spline_samples: int = 6
    cartoon_sheet_scale: float = 1.8
    cartoon_arrow_scale: float = 2.4
    cartoon_arrow_length: float = 1.2
    rocket_radius: float = 1.5
    rocket_cone_scale: float = 1.6
    rocket_cone_length: float = 2.5
    rocket_facets: int = 12
    plank_width: float = 2.2
    plank_thickness: float = 0.6
    coil_radius: float = 0.3
    strand_thread_radius: float = 0.12

    def __post_init__(self) -> None:
        numeric = {k: v for k, v in vars(self).items() if not isinstance(v, bool)}
        if any(v <= 0 for v in numeric.values()):
            raise ValueError("all style values must be positive")

    @property
    def wireframe_radius(self) -> float:
        return self.wireframe_units * self.unit_to_angstrom

    @property
    def backbone_radius(self) -> float:
        return self.backbone_units * self.unit_to_angstrom

    @property
    def trace_radius(self) -> float:
        return self.trace_units * self.unit_to_angstrom

    @property
    def strands_half_width(self) -> float:
        return self.strands_units * self.unit_to_angstrom

    @property
    def spacefill_cap(self) -> float:
        return self.spacefill_units * self.unit_to_angstrom


def color_for(atom: Atom, scheme: ColorScheme, structure: ProteinStructure) -> RGB:
    """Color of one atom under a scheme; every input maps to a valid RGB."""
    if scheme is ColorScheme.CPK:
        return element_info(atom.element).cpk_color
    if scheme is ColorScheme.AMINO:
        return palettes.amino_color(atom.residue_name)
    if scheme is ColorScheme.CHAIN:
        try:
            idx = structure.chains.index(atom.chain_id)
        except ValueError:
            idx = 0
        return palettes.chain_color(idx)
    if scheme is ColorScheme.CHARGE:
        return palettes.charge_color(FORMAL_CHARGES.get(atom.residue_name.upper(), 0.0))
    ss = secondary_structure_of(structure, atom.chain_id, atom.residue_seq)
    return palettes.STRUCTURE_COLORS[ss.name]


def _mean_color(a: RGB, b: RGB) -> RGB:
    return tuple(round((a[i] + b[i]) / 2.0) for i in range(3))  # type: ignore[return-value]


def _scheme_for(rep: RepresentationType) -> ColorScheme:
    if rep in _RECOLORED:
        return ColorScheme(rep.value)
    return ColorScheme.CPK


class _Builder:
    def __init__(self, structure: ProteinStructure, style: StyleConfig, scheme: ColorScheme):
        self.structure = structure
        self.style = style
        self.scheme = scheme
        self.colors = [color_for(a, scheme, structure) for a in structure.atoms]

    # -- shared helpers -----------------------------------------------------

    def bonds(self) -> tuple[tuple[int, int], ...]:
        return self.structure.bonds or infer_bonds(self.structure)

    def bond_cylinders(self, radius: float) -> list[Cylinder]:
        pos = self.structure.positions
        out = []
        for i, j in self.bonds():
            color = _mean_color(self.colors[i], self.colors[j])
            out.append(Cylinder(tuple(pos[i]), tuple(pos[j]), radius, color))
        return out

    def chain_cas(self) -> list[list[int]]:
        """Alpha-carbon atom indices per chain, chains in file order."""
        groups = [self.structure.ca_indices(c) for c in self.structure.chains]
        return [g for g in groups if g]

    def residue_ss(self, atom_idx: int) -> SecondaryStructure:
        a = self.structure.atoms[atom_idx]
        return secondary_structure_of(self.structure, a.chain_id, a.residue_seq)

    def spline_with_controls(
        self, control_pos: np.ndarray, control_atoms: list[int]
    ) -> tuple[np.ndarray, np.ndarray]:
        """Sampled spline plus the control index owning each sample."""
        spp = self.style.spline_samples
        samples = spline_through(control_pos, spp)
        owner = np.minimum(np.arange(len(samples)) // spp, len(control_atoms) - 1)
        return samples, owner

    def tube(self, points: np.ndarray, radius: float, seg_colors: list[RGB]) -> list[Cylinder]:
        out = []
        for i in range(len(points) - 1):
            a, b = points[i], points[i + 1]
            if float(np.linalg.norm(b - a)) <= 0.0:
                continue
            out.append(Cylinder(tuple(a), tuple(b), radius, seg_colors[i]))
        return out

    # -- display formats ----------------------------------------------------

    def spacefill(self) -> list:
        cap = self.style.spacefill_cap if self.style.spacefill_cap_enabled else math.inf
        return [
            Sphere(a.position, min(element_info(a.element).vdw_radius, cap), self.colors[i])
            for i, a in enumerate(self.structure.atoms)
        ]

    def wireframe(self) -> list:
        return self.bond_cylinders(self.style.wireframe_radius)

    def ballstick(self) -> list:
        spheres = [
            Sphere(
                a.position,
                element_info(a.element).vdw_radius * self.style.ballstick_sphere_fraction,
                self.colors[i],
            )
            for i, a in enumerate(self.structure.atoms)
        ]
        return spheres + self.bond_cylinders(self.style.ballstick_stick_radius)

    # -- display structures -------------------------------------------------

    def backbone(self) -> list:
        prims: list = []
        pos = self.structure.positions
        for cas in self.chain_cas():
            if len(cas) == 1:
                prims.append(
                    Sphere(tuple(pos[cas[0]]), self.style.backbone_radius, self.colors[cas[0]])
                )
                continue
            for i, j in zip(cas, cas[1:]):
                prims.append(
                    Cylinder(tuple(pos[i]), tuple(pos[j]), self.style.backbone_radius, self.colors[i])
                )
        return prims

    def trace(self) -> list:
        prims: list = []
        pos = self.structure.positions
        for cas in self.chain_cas():
            if len(cas) == 1:
                prims.append(
                    Sphere(tuple(pos[cas[0]]), self.style.trace_radius, self.colors[cas[0]])
                )
                continue
            ca_pos = pos[cas]
            if len(cas) == 2:
                controls, owners = ca_pos, cas
            else:
                # smooth curve through midpoints of successive alpha carbons
                controls = 0.5 * (ca_pos[:-1] + ca_pos[1:])
                owners = cas[:-1]
            if len(controls) < 2:
                continue
            samples, owner_idx = self.spline_with_controls(controls, list(owners))
            seg_colors = [self.colors[owners[owner_idx[i]]] for i in range(len(samples) - 1)]
            prims.extend(self.tube(samples, self.style.trace_radius, seg_colors))
        return prims

    def _ribbon_mesh(
        self,
        samples: np.ndarray,
        owner_idx: np.ndarray,
        owners: list[int],
        half_widths: np.ndarray,
    ) -> TriMesh:
        _, _, binormals = ribbon_frames(samples)
        n = len(samples)
        verts = np.empty((2 * n, 3))
        verts[0::2] = samples - half_widths[:, None] * binormals
        verts[1::2] = samples + half_widths[:, None] * binormals
        faces = []
        face_colors = []
        for i in range(n - 1):
            color = self.colors[owners[owner_idx[i]]]
            faces.append((2 * i, 2 * i + 1, 2 * i + 2))
            faces.append((2 * i + 2, 2 * i + 1, 2 * i + 3))
            face_colors.extend([color, color])
        return TriMesh(verts, np.array(faces), np.array(face_colors, dtype=np.uint8))

    def ribbons(self) -> list:
        return self._ribbon_family(widen_sheets=False, arrows=False)

    def cartoon(self) -> list:
        return self._ribbon_family(widen_sheets=True, arrows=True)

    def _ribbon_family(self, widen_sheets: bool, arrows: bool) -> list:
        prims: list = []
        pos = self.structure.positions
        half = self.style.ribbon_width / 2.0
        for cas in self.chain_cas():
            if len(cas) == 1:
                prims.append(Sphere(tuple(pos[cas[0]]), half, self.colors[cas[0]]))
                continue
            samples, owner_idx = self.spline_with_controls(pos[cas], cas)
            if len(samples) < 3:
                continue
            sheet = np.array(
                [self.residue_ss(cas[owner_idx[i]]) is SecondaryStructure.SHEET for i in range(len(samples))]
            )
            widths = np.full(len(samples), half)
            if widen_sheets:
                widths[sheet] = half * self.style.cartoon_sheet_scale
            prims.append(self._ribbon_mesh(samples, owner_idx, cas, widths))
            if arrows and sheet.any():
                prims.extend(self._sheet_arrows(samples, owner_idx, cas, sheet))
        return prims

    def _sheet_arrows(
        self,
        samples: np.ndarray,
        owner_idx: np.ndarray,
        owners: list[int],
        sheet_mask: np.ndarray,
    ) -> list[TriMesh]:
        tangents, _, binormals = ribbon_frames(samples)
        arrows = []
        half = self.style.ribbon_width / 2.0
        ends = np.flatnonzero(sheet_mask[:-1] & ~sheet_mask[1:]).tolist()
        if sheet_mask[-1]:
            ends.append(len(samples) - 1)
        for e in ends:
            base = samples[e]
            tip = base + tangents[e] * self.style.cartoon_arrow_length
            w = half * self.style.cartoon_arrow_scale
            color = self.colors[owners[owner_idx[e]]]
            verts = np.array([base - w * binormals[e], base + w * binormals[e], tip])
            arrows.append(
                TriMesh(verts, np.array([(0, 1, 2)]), np.array([color], dtype=np.uint8))
            )
        return arrows

    def strands(self) -> list:
        prims: list = []
        pos = self.structure.positions
        count = self.style.strands_thread_count
        for cas in self.chain_cas():
            if len(cas) == 1:
                prims.append(
                    Sphere(tuple(pos[cas[0]]), self.style.strand_thread_radius, self.colors[cas[0]])
                )
                continue
            samples, owner_idx = self.spline_with_controls(pos[cas], cas)
            if len(samples) < 3:
                continue
            _, _, binormals = ribbon_frames(samples)
            seg_colors = [self.colors[cas[owner_idx[i]]] for i in range(len(samples) - 1)]
            for k in range(count):
                frac = 0.0 if count == 1 else k / (count - 1) - 0.5
                offset = 2.0 * self.style.strands_half_width * frac
                thread = samples + offset * binormals
                prims.extend(self.tube(thread, self.style.strand_thread_radius, seg_colors))
        return prims

    # -- rockets ------------------------------------------------------------

    def rockets(self) -> list:
        prims: list = []
        pos = self.structure.positions
        for cas in self.chain_cas():
            runs = self._ss_runs(cas)
            for kind, idxs in runs:
                if kind is SecondaryStructure.HELIX and len(idxs) >= 2:
                    prims.extend(self._helix_rocket(pos, idxs))
                elif kind is SecondaryStructure.SHEET and len(idxs) >= 2:
                    prims.extend(self._sheet_plank(pos, idxs))
                else:
                    prims.extend(self._coil_tube(pos, cas, idxs))
        return prims

    def _ss_runs(self, cas: list[int]) -> list[tuple[SecondaryStructure, list[int]]]:
        runs: list[tuple[SecondaryStructure, list[int]]] = []
        for idx in cas:
            kind = self.residue_ss(idx)
            if runs and runs[-1][0] is kind:
                runs[-1][1].append(idx)
            else:
                runs.append((kind, [idx]))
        return runs

    def _axis_frame(self, pos: np.ndarray, idxs: list[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Axis direction plus a covariant perpendicular for a residue run.

        The perpendicular comes from the run's own geometry (off-axis atom
        offsets, alternating to capture pleating) and stays covariant under
        rigid motion; perfectly collinear runs fall back to a fixed choice.
        """
        a, b = pos[idxs[0]], pos[idxs[-1]]
        axis = _normalize(b - a)
        acc = np.zeros(3)
        for k, idx in enumerate(idxs):
            rel = pos[idx] - a
            perp = rel - np.dot(rel, axis) * axis
            acc += perp if k % 2 == 0 else -perp
        if float(np.linalg.norm(acc)) > 1e-9:
            u = _normalize(acc - np.dot(acc, axis) * axis)
        else:
            u = _any_perpendicular(axis)
        return axis, u, np.cross(axis, u)

    def _helix_rocket(self, pos: np.ndarray, idxs: list[int]) -> list:
        style = self.style
        a, b = pos[idxs[0]], pos[idxs[-1]]
        length = float(np.linalg.norm(b - a))
        axis, u, v = self._axis_frame(pos, idxs)
        cone_len = min(style.rocket_cone_length, 0.5 * length)
        base = b - axis * cone_len
        color = self.colors[idxs[len(idxs) // 2]]
        cyl = Cylinder(tuple(a), tuple(base), style.rocket_radius, color, capped=True)
        cone = self._cone(base, b, axis, u, v, style.rocket_radius * style.rocket_cone_scale, color)
        return [cyl, cone]

    def _cone(self, base, tip, axis, u, v, radius, color) -> TriMesh:
        facets = self.style.rocket_facets
        ring = [
            base + radius * (math.cos(2 * math.pi * k / facets) * u + math.sin(2 * math.pi * k / facets) * v)
            for k in range(facets)
        ]
        verts = np.array(ring + [tip, base])
        faces = []
        for k in range(facets):
            nk = (k + 1) % facets
            faces.append((facets, k, nk))  # side
            faces.append((facets + 1, nk, k))  # base disk
        colors = np.array([color] * len(faces), dtype=np.uint8)
        return TriMesh(verts, np.array(faces), colors)

    def _sheet_plank(self, pos: np.ndarray, idxs: list[int]) -> list:
        style = self.style
        a, b = pos[idxs[0]], pos[idxs[-1]]
        length = float(np.linalg.norm(b - a))
        axis, w_dir, t_dir = self._axis_frame(pos, idxs)
        arrow_len = min(style.cartoon_arrow_length * 1.5, 0.4 * length)
        plank_end = b - axis * arrow_len
        color = self.colors[idxs[len(idxs) // 2]]
        hw = style.plank_width / 2.0
        ht = style.plank_thickness / 2.0
        prims = [self._box_mesh(a, plank_end, w_dir * hw, t_dir * ht, color)]
        prims.append(self._arrow_wedge(plank_end, b, w_dir * hw * 1.6, t_dir * ht, color))
        return prims

    def _box_mesh(self, a, b, w, t, color) -> TriMesh:
        verts = np.array(
            [a - w - t, a + w - t, a + w + t, a - w + t, b - w - t, b + w - t, b + w + t, b - w + t]
        )
        quads = [
            (0, 1, 2, 3), (4, 7, 6, 5), (0, 4, 5, 1), (1, 5, 6, 2), (2, 6, 7, 3), (3, 7, 4, 0),
        ]
        faces = []
        for q in quads:
            faces.append((q[0], q[1], q[2]))
            faces.append((q[0], q[2], q[3]))
        return TriMesh(np.array(verts), np.array(faces), np.array([color] * len(faces), dtype=np.uint8))

    def _arrow_wedge(self, base, tip, w, t, color) -> TriMesh:
        verts = np.array(
            [base - w - t, base + w - t, tip - t, base - w + t, base + w + t, tip + t]
        )
        faces = [
            (0, 1, 2), (3, 5, 4),  # bottom/top
            (0, 2, 5), (0, 5, 3),  # edges
            (1, 4, 5), (1, 5, 2),
            (0, 3, 4), (0, 4, 1),
        ]
        return TriMesh(verts, np.array(faces), np.array([color] * len(faces), dtype=np.uint8))

    def _coil_tube(self, pos: np.ndarray, cas: list[int], idxs: list[int]) -> list:
        # extend to neighbors so coil tubes meet the adjacent rockets/planks
        lo = cas.index(idxs[0])
        hi = cas.index(idxs[-1])
        ext = cas[max(0, lo - 1) : hi + 2]
        if len(ext) < 2:
            return [Sphere(tuple(pos[ext[0]]), self.style.coil_radius, self.colors[ext[0]])] if ext else []
        pts = pos[ext]
        seg_colors = [self.colors[ext[i]] for i in range(len(ext) - 1)]
        return self.tube(pts, self.style.coil_radius, seg_colors)


_BUILDERS = {
    RepresentationType.SPACEFILL: _Builder.spacefill,
    RepresentationType.WIREFRAME: _Builder.wireframe,
    RepresentationType.BALL_AND_STICK: _Builder.ballstick,
    RepresentationType.AMINO: _Builder.ballstick,
    RepresentationType.CHAIN: _Builder.ballstick,
    RepresentationType.CHARGE: _Builder.ballstick,
    RepresentationType.STRUCTURE: _Builder.ballstick,
    RepresentationType.BACKBONE: _Builder.backbone,
    RepresentationType.TRACE: _Builder.trace,
    RepresentationType.RIBBONS: _Builder.ribbons,
    RepresentationType.CARTOON: _Builder.cartoon,
    RepresentationType.STRANDS: _Builder.strands,
    RepresentationType.ROCKETS: _Builder.rockets,
}


def build_scene(
    structure: ProteinStructure,
    rep: RepresentationType,
    style: StyleConfig | None = None,
) -> Scene:
    """Build the colored primitive scene for one representation.

    Raises :class:`EmptySceneError` when the representation produces no
    geometry (e.g. wireframe on a structure without bonds).
    """
    style = style or StyleConfig()
    builder = _Builder(structure, style, _scheme_for(rep))
    primitives = _BUILDERS[rep](builder)
    if not primitives:
        raise EmptySceneError(f"{rep.value} produced no geometry for {structure.id!r}")
    return Scene(source_id=structure.id, representation=rep.value, primitives=primitives)
