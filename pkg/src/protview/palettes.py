"""Color palette tables, loaded from the shipped ``data/palette.txt``."""

from __future__ import annotations

from importlib import resources

RGB = tuple[int, int, int]

_PALETTE_FILE = "palette.txt"


def _load_tables() -> dict[str, dict[str, RGB]]:
    tables: dict[str, dict[str, RGB]] = {}
    text = resources.files("protview").joinpath("data", _PALETTE_FILE).read_text()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, rgb_text = line.split()
        scheme, key = name.split(".", 1)
        r, g, b = (int(v) for v in rgb_text.split(","))
        if not all(0 <= v <= 255 for v in (r, g, b)):
            raise ValueError(f"palette entry {name} out of range: {rgb_text}")
        tables.setdefault(scheme, {})[key] = (r, g, b)
    return tables


_TABLES = _load_tables()

CPK_COLORS: dict[str, RGB] = _TABLES["cpk"]
AMINO_COLORS: dict[str, RGB] = _TABLES["amino"]
CHAIN_COLORS: list[RGB] = [_TABLES["chain"][str(i)] for i in range(len(_TABLES["chain"]))]
STRUCTURE_COLORS: dict[str, RGB] = _TABLES["structure"]
CHARGE_COLORS: dict[str, RGB] = _TABLES["charge"]


def cpk_color(element: str) -> RGB:
    return CPK_COLORS.get(element.upper(), CPK_COLORS["DEFAULT"])


def amino_color(residue_name: str) -> RGB:
    return AMINO_COLORS.get(residue_name.upper(), AMINO_COLORS["DEFAULT"])


def chain_color(chain_index: int) -> RGB:
    return CHAIN_COLORS[chain_index % len(CHAIN_COLORS)]


def charge_color(charge: float) -> RGB:
    """Linear red(-1) -> white(0) -> blue(+1) gradient, clamped to [-1, 1]."""
    t = min(1.0, max(-1.0, charge))
    lo = CHARGE_COLORS["NEGATIVE"] if t < 0 else CHARGE_COLORS["POSITIVE"]
    hi = CHARGE_COLORS["ZERO"]
    a = abs(t)
    return tuple(round(a * lo[i] + (1.0 - a) * hi[i]) for i in range(3))  # type: ignore[return-value]
