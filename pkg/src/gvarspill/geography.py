"""Static reference data for the 50-state universe.

County counts follow the 2010 census vintage (Virginia with 134 county
equivalents, Alaska with 29 boroughs/census areas), which adds up to 3142.
Climate regions are the nine NOAA U.S. climate regions; Alaska and Hawaii are
not part of any region.
"""

from __future__ import annotations

COUNTIES: dict[str, int] = {
    "AK": 29, "AL": 67, "AR": 75, "AZ": 15, "CA": 58, "CO": 64, "CT": 8,
    "DE": 3, "FL": 67, "GA": 159, "HI": 5, "IA": 99, "ID": 44, "IL": 102,
    "IN": 92, "KS": 105, "KY": 120, "LA": 64, "MA": 14, "MD": 24, "ME": 16,
    "MI": 83, "MN": 87, "MO": 115, "MS": 82, "MT": 56, "NC": 100, "ND": 53,
    "NE": 93, "NH": 10, "NJ": 21, "NM": 33, "NV": 17, "NY": 62, "OH": 88,
    "OK": 77, "OR": 36, "PA": 67, "RI": 5, "SC": 46, "SD": 66, "TN": 95,
    "TX": 254, "UT": 29, "VA": 134, "VT": 14, "WA": 39, "WI": 72, "WV": 55,
    "WY": 23,
}

STATES: tuple[str, ...] = tuple(sorted(COUNTIES))

N_COUNTIES = 3142

REGION_ORDER: tuple[str, ...] = ("NE", "SE", "S", "UMW", "OV", "NP", "SW", "W", "NW")

REGION_NAMES = {
    "NE": "Northeast",
    "SE": "Southeast",
    "S": "South",
    "UMW": "Upper Midwest",
    "OV": "Ohio Valley",
    "NP": "Northern Rockies and Plains",
    "SW": "Southwest",
    "W": "West",
    "NW": "Northwest",
}

_REGION_MEMBERS = {
    "NE": ("CT", "DE", "MA", "MD", "ME", "NH", "NJ", "NY", "PA", "RI", "VT"),
    "SE": ("AL", "FL", "GA", "NC", "SC", "VA"),
    "S": ("AR", "KS", "LA", "MS", "OK", "TX"),
    "UMW": ("IA", "MI", "MN", "WI"),
    "OV": ("IL", "IN", "KY", "MO", "OH", "TN", "WV"),
    "NP": ("MT", "ND", "NE", "SD", "WY"),
    "SW": ("AZ", "CO", "NM", "UT"),
    "W": ("CA", "NV"),
    "NW": ("ID", "OR", "WA"),
}

CLIMATE_REGIONS: dict[str, str | None] = {s: None for s in STATES}
for _region, _members in _REGION_MEMBERS.items():
    for _s in _members:
        CLIMATE_REGIONS[_s] = _region

# Land borders between contiguous states; four-corner point contacts excluded.
_NEIGHBORS = {
    "AL": "FL GA MS TN",
    "AR": "LA MO MS OK TN TX",
    "AZ": "CA NM NV UT",
    "CA": "AZ NV OR",
    "CO": "KS NE NM OK UT WY",
    "CT": "MA NY RI",
    "DE": "MD NJ PA",
    "FL": "AL GA",
    "GA": "AL FL NC SC TN",
    "IA": "IL MN MO NE SD WI",
    "ID": "MT NV OR UT WA WY",
    "IL": "IA IN KY MO WI",
    "IN": "IL KY MI OH",
    "KS": "CO MO NE OK",
    "KY": "IL IN MO OH TN VA WV",
    "LA": "AR MS TX",
    "MA": "CT NH NY RI VT",
    "MD": "DE PA VA WV",
    "ME": "NH",
    "MI": "IN OH WI",
    "MN": "IA ND SD WI",
    "MO": "AR IA IL KS KY NE OK TN",
    "MS": "AL AR LA TN",
    "MT": "ID ND SD WY",
    "NC": "GA SC TN VA",
    "ND": "MN MT SD",
    "NE": "CO IA KS MO SD WY",
    "NH": "MA ME VT",
    "NJ": "DE NY PA",
    "NM": "AZ CO OK TX",
    "NV": "AZ CA ID OR UT",
    "NY": "CT MA NJ PA VT",
    "OH": "IN KY MI PA WV",
    "OK": "AR CO KS MO NM TX",
    "OR": "CA ID NV WA",
    "PA": "DE MD NJ NY OH WV",
    "RI": "CT MA",
    "SC": "GA NC",
    "SD": "IA MN MT ND NE WY",
    "TN": "AL AR GA KY MO MS NC VA",
    "TX": "AR LA NM OK",
    "UT": "AZ CO ID NV WY",
    "VA": "KY MD NC TN WV",
    "VT": "MA NH NY",
    "WA": "ID OR",
    "WI": "IA IL MI MN",
    "WV": "KY MD OH PA VA",
    "WY": "CO ID MT NE SD UT",
}

BORDERS: frozenset[frozenset[str]] = frozenset(
    frozenset((a, b)) for a, nbrs in _NEIGHBORS.items() for b in nbrs.split()
)

# Partner used for the non-contiguous states under adjacency weights.
ISLAND_FALLBACK = {"AK": "WA", "HI": "CA"}


def neighbor_table() -> dict[str, tuple[str, ...]]:
    """Neighbor lists as written above (used to check symmetry in tests)."""
    return {k: tuple(v.split()) for k, v in _NEIGHBORS.items()}
