"""Validate the ranked GeoJSON with shapely, independently of the C++ code."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from shapely.geometry import shape

PALETTE = ["#fee5d9", "#fcae91", "#fb6a4a", "#de2d26", "#a50f15"]


def main() -> int:
    cli, config = sys.argv[1], Path(sys.argv[2])
    with tempfile.TemporaryDirectory() as out:
        subprocess.run([cli, "index", "-c", str(config), "--out", out], check=True, capture_output=True)
        ranked = json.loads((Path(out) / "regions_ranked.geojson").read_text())
    source = json.loads((config.parent / "regions.geojson").read_text())

    assert ranked["type"] == "FeatureCollection"
    assert len(ranked["features"]) == len(source["features"])
    for got, want in zip(ranked["features"], source["features"]):
        assert got["type"] == "Feature"
        geom = shape(got["geometry"])
        assert geom.is_valid, got["properties"]["region_id"]
        assert got["geometry"] == want["geometry"]
        props = got["properties"]
        for key, value in want["properties"].items():
            assert props[key] == value
        assert 1 <= props["rank"] <= 5
        assert props["rank_color"] == PALETTE[props["rank"] - 1]
        assert isinstance(props["risk_index"], float)
        assert isinstance(props["hazard_index"], float)
    print(f"{len(ranked['features'])} features valid")
    return 0


if __name__ == "__main__":
    sys.exit(main())
