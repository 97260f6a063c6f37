"""Geographic primitives: points, boxes, circles, great-circle distance."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

EARTH_RADIUS_M = 6371000.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")

    def to_dict(self) -> dict:
        return {"lat": self.lat, "lon": self.lon}

    @classmethod
    def from_dict(cls, d: dict) -> "GeoPoint":
        return cls(lat=float(d["lat"]), lon=float(d["lon"]))


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box. Antimeridian-crossing boxes are rejected:
    exercise regions are small, so south_west must be <= north_east
    on both axes."""

    south_west: GeoPoint
    north_east: GeoPoint

    def __post_init__(self):
        if self.south_west.lat > self.north_east.lat:
            raise ValueError("south_west.lat exceeds north_east.lat")
        if self.south_west.lon > self.north_east.lon:
            raise ValueError(
                "south_west.lon exceeds north_east.lon (antimeridian wrap unsupported)"
            )

    def contains(self, p: GeoPoint) -> bool:
        """Boundary-inclusive containment."""
        return (
            self.south_west.lat <= p.lat <= self.north_east.lat
            and self.south_west.lon <= p.lon <= self.north_east.lon
        )

    def random_point(self, rng: random.Random) -> GeoPoint:
        return GeoPoint(
            lat=self.south_west.lat
            + rng.random() * (self.north_east.lat - self.south_west.lat),
            lon=self.south_west.lon
            + rng.random() * (self.north_east.lon - self.south_west.lon),
        )

    def to_dict(self) -> dict:
        return {
            "south_west": self.south_west.to_dict(),
            "north_east": self.north_east.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundingBox":
        return cls(
            south_west=GeoPoint.from_dict(d["south_west"]),
            north_east=GeoPoint.from_dict(d["north_east"]),
        )


@dataclass(frozen=True)
class GeoCircle:
    center: GeoPoint
    radius_m: float

    def __post_init__(self):
        if not 0 < self.radius_m <= 1_000_000:
            raise ValueError(f"radius {self.radius_m} m outside (0, 1000000]")

    def contains(self, p: GeoPoint) -> bool:
        """Boundary-inclusive great-circle containment."""
        return haversine_m(self.center, p) <= self.radius_m


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a mean-radius sphere."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(h))
