"""Bundled building asset catalog and description templating.

Each asset carries the attributes used to render landmark descriptions
(color, height class, material, signage). A third of the tags are reserved
for test maps so training exports never see them.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BuildingAsset:
    tag: str
    color: str
    height_class: str  # low / mid / tall
    material: str
    signage: str  # "" for unsigned buildings
    test_only: bool = False


_RAW = [
    # (tag, color, height, material, signage)
    ("brick_rowhouse", "red", "low", "brick", ""),
    ("glass_tower", "light blue", "tall", "glass", ""),
    ("corner_cafe", "cream", "low", "stucco", "Nordica Cafe"),
    ("concrete_office", "gray", "mid", "concrete", ""),
    ("green_deli", "green", "low", "brick", "Fresh Deli"),
    ("steel_plaza", "silver", "tall", "steel and glass", ""),
    ("sandstone_bank", "beige", "mid", "sandstone", "Union Bank"),
    ("blue_apartments", "blue", "mid", "painted concrete", ""),
    ("terracotta_lofts", "orange", "mid", "terracotta", ""),
    ("white_clinic", "white", "low", "stucco", "City Clinic"),
    ("dark_hotel", "charcoal", "tall", "stone and glass", "Hotel Meridian"),
    ("yellow_bakery", "yellow", "low", "brick", "Sunrise Bakery"),
    ("mirrored_hq", "sky blue", "tall", "mirrored glass", ""),
    ("granite_courthouse", "light gray", "mid", "granite", ""),
    ("red_theater", "deep red", "mid", "brick", "Orpheum"),
    ("copper_museum", "copper", "mid", "copper-clad steel", ""),
    ("pink_boutique", "pink", "low", "stucco", "Maison Fleur"),
    ("brown_warehouse", "brown", "low", "corrugated steel", ""),
    ("ivory_library", "ivory", "mid", "limestone", "Public Library"),
    ("teal_studio", "teal", "low", "painted brick", ""),
    ("slate_condos", "slate gray", "tall", "concrete and glass", ""),
    ("amber_pub", "amber", "low", "timber and brick", "The Copper Kettle"),
    ("navy_tech", "navy", "mid", "glass", "Vector Labs"),
    ("pearl_gallery", "pearl white", "low", "polished concrete", ""),
    ("rust_foundry", "rust", "mid", "weathered steel", ""),
    ("lime_market", "lime green", "low", "stucco", "Greenway Market"),
    ("onyx_tower", "black", "tall", "tinted glass", ""),
    ("maroon_books", "maroon", "low", "brick", "Page & Co"),
    ("silver_cinema", "silver", "mid", "aluminum panel", "Astra Cinema"),
    ("olive_offices", "olive", "mid", "precast concrete", ""),
    ("coral_salon", "coral", "low", "stucco", "Salon Aria"),
    ("smoke_garage", "smoke gray", "low", "concrete", ""),
    ("gold_exchange", "gold", "tall", "bronze and glass", ""),
    ("plum_records", "plum", "low", "painted brick", "Vinyl Vault"),
    ("sage_pharmacy", "sage green", "low", "brick", "Careway Pharmacy"),
    ("denim_hostel", "denim blue", "mid", "fiber cement", "Transit Hostel"),
    ("bone_chapel", "bone white", "low", "stone", ""),
    ("carbon_datacenter", "dark gray", "low", "steel panel", ""),
    ("ruby_noodles", "ruby red", "low", "stucco", "Lucky Noodle"),
    ("frost_dental", "frost white", "low", "glass and stucco", "Bright Dental"),
    ("moss_florist", "moss green", "low", "timber", "Bloom Room"),
    ("ash_print", "ash gray", "low", "brick", "Press Works"),
    ("azure_aquarium", "azure", "mid", "glass", ""),
    ("honey_lofts", "honey", "mid", "brick", ""),
    ("violet_arcade", "violet", "low", "painted concrete", "Pixel Palace"),
    ("khaki_storage", "khaki", "low", "corrugated steel", "StorSafe"),
    ("cobalt_gym", "cobalt blue", "low", "steel panel", "Iron Works Gym"),
    ("peach_inn", "peach", "mid", "stucco", "Orchard Inn"),
]

# Every third tag (sorted order) is held out for test maps: a 33% exclusive split.
_SORTED_TAGS = sorted(t[0] for t in _RAW)
_TEST_ONLY = {tag for i, tag in enumerate(_SORTED_TAGS) if i % 3 == 2}

CATALOG: dict[str, BuildingAsset] = {
    tag: BuildingAsset(tag, color, height, material, signage, tag in _TEST_ONLY)
    for tag, color, height, material, signage in _RAW
}


def catalog_tags(split: str = "all") -> list[str]:
    """Asset tags for a split: 'all', 'train' (no test-only tags), or 'test'."""
    if split == "all":
        return sorted(CATALOG)
    if split == "train":
        return sorted(t for t, a in CATALOG.items() if not a.test_only)
    if split == "test":
        return sorted(t for t, a in CATALOG.items() if a.test_only)
    raise ValueError(f"unknown catalog split: {split!r}")


_HEIGHT_WORDS = {"low": "low-rise", "mid": "mid-rise", "tall": "tall"}


def describe(asset: BuildingAsset) -> str:
    """Template the asset attributes into a landmark description phrase."""
    base = f"a {_HEIGHT_WORDS[asset.height_class]} {asset.color} {asset.material} building"
    if asset.signage:
        return f'{base} with a "{asset.signage}" sign'
    return base
