"""City feature files: ``name,country,population,latitude,longitude``."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Empirical

CITY_HEADER = ["name", "country", "population", "latitude", "longitude"]


@dataclass(frozen=True)
class CityRecord:
    name: str
    country: str
    population: float
    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")
        if not self.population >= 0:
            raise ValueError(f"population {self.population} is negative")


def read_cities(path: str | Path) -> list[CityRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != CITY_HEADER:
            raise ValueError(f"{path}:1: expected header {','.join(CITY_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            try:
                records.append(CityRecord(row[0], row[1], float(row[2]), float(row[3]), float(row[4])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not records:
        raise ValueError(f"{path}: no city rows")
    return records


def city_distribution(records: list[CityRecord]) -> Empirical:
    """Population-weighted distribution over (latitude, longitude) in degrees."""
    pts = np.array([(r.latitude, r.longitude) for r in records])
    pop = np.array([r.population for r in records])
    if pop.sum() <= 0:
        raise ValueError("total population is zero")
    return Empirical(pts, pop, replace=True)


def load_city_features(path: str | Path, n: int, rng: np.random.Generator) -> tuple[Empirical, np.ndarray]:
    """Distribution over all rows and ``n`` population-weighted draws with replacement."""
    dist = city_distribution(read_cities(path))
    return dist, dist.sample(n, rng)


def write_synthetic_cities(path: str | Path, rows: int, rng: np.random.Generator) -> None:
    """Random city file over a European-sized box with heavy-tailed populations."""
    lat = rng.uniform(35.0, 70.0, rows)
    lon = rng.uniform(-10.0, 40.0, rows)
    pop = np.floor(rng.pareto(1.2, rows) * 1000.0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CITY_HEADER)
        for i in range(rows):
            w.writerow([f"city{i}", "XX", int(pop[i]), repr(float(lat[i])), repr(float(lon[i]))])
