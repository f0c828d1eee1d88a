"""Per-element radii and colors used for rendering and bond inference."""

from __future__ import annotations

from dataclasses import dataclass

from .palettes import RGB, cpk_color


@dataclass(frozen=True)
class ElementInfo:
    symbol: str
    vdw_radius: float  # angstroms
    covalent_radius: float  # angstroms
    cpk_color: RGB


# Bondi vdW radii + classic single-bond covalent radii.
_RADII: dict[str, tuple[float, float]] = {
    "H": (1.20, 0.37),
    "C": (1.70, 0.77),
    "N": (1.55, 0.75),
    "O": (1.52, 0.73),
    "S": (1.80, 1.02),
    "P": (1.80, 1.06),
    "SE": (1.90, 1.16),
    "FE": (1.80, 1.25),
}

# Fallback for exotic atoms so rendering never fails.
DEFAULT_ELEMENT = ElementInfo("X", 1.7, 0.77, cpk_color("DEFAULT"))

ELEMENT_TABLE: dict[str, ElementInfo] = {
    sym: ElementInfo(sym, vdw, cov, cpk_color(sym)) for sym, (vdw, cov) in _RADII.items()
}


def element_info(symbol: str) -> ElementInfo:
    return ELEMENT_TABLE.get(symbol.upper(), DEFAULT_ELEMENT)


def known_element(symbol: str) -> bool:
    return symbol.upper() in ELEMENT_TABLE
