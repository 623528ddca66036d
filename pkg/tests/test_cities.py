import math

import numpy as np
import pytest

from localdeg.cities import CityRecord, city_distribution, load_city_features, read_cities, write_synthetic_cities
from localdeg.model import ExponentialDecay, RcmSpec, model_truth, true_connection_probability


def _write(path, rows):
    path.write_text("name,country,population,latitude,longitude\n" + "".join(r + "\n" for r in rows))
    return path


def test_single_city(tmp_path, rng):
    path = _write(tmp_path / "c.csv", ["Solo,AA,100,10.5,-20.25"])
    dist, feats = load_city_features(path, 3, rng)
    np.testing.assert_array_equal(feats, [[10.5, -20.25]] * 3)
    assert dist.dim == 2


def test_zero_population_city_never_drawn(tmp_path, rng):
    path = _write(tmp_path / "c.csv", ["Ghost,AA,0,1,1", "Town,AA,10,2,2"])
    _, feats = load_city_features(path, 500, rng)
    np.testing.assert_array_equal(feats, np.tile([2.0, 2.0], (500, 1)))


def test_zero_total_population(tmp_path, rng):
    path = _write(tmp_path / "c.csv", ["A,AA,0,1,1", "B,AA,0,2,2"])
    with pytest.raises(ValueError, match="zero"):
        load_city_features(path, 1, rng)


def test_quoted_fields(tmp_path):
    path = _write(tmp_path / "c.csv", ['"Washington, D.C.",US,700000,38.9,-77.0'])
    assert read_cities(path)[0].name == "Washington, D.C."


@pytest.mark.parametrize(
    "rows, line",
    [(["A,AA,1,1"], 2), (["A,AA,1,1,1", "B,AA,many,1,1"], 3), (["A,AA,1,91,0"], 2), (["A,AA,1,0,181"], 2),
     (["A,AA,-5,0,0"], 2)],
)
def test_malformed_rows_name_the_line(tmp_path, rows, line):
    path = _write(tmp_path / "c.csv", rows)
    with pytest.raises(ValueError, match=f"c.csv:{line}:"):
        read_cities(path)


def test_bad_header(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("city,pop\nA,1\n")
    with pytest.raises(ValueError, match=":1:"):
        read_cities(path)


@pytest.mark.parametrize("lat, lon", [(-90.5, 0), (0, -180.5)])
def test_record_invariants(lat, lon):
    with pytest.raises(ValueError):
        CityRecord("x", "y", 1, lat, lon)


def test_draw_frequencies_match_population(tmp_path, rng):
    pops = [1, 5, 20, 74]
    path = _write(tmp_path / "c.csv", [f"c{i},AA,{p},{i},{i}" for i, p in enumerate(pops)])
    draws = 100_000
    _, feats = load_city_features(path, draws, rng)
    share = np.array(pops) / sum(pops)
    counts = np.array([(feats[:, 0] == i).sum() for i in range(len(pops))])
    se = np.sqrt(draws * share * (1 - share))
    assert np.all(np.abs(counts - draws * share) < 3 * se)


def test_empirical_exact_matches_brute_force_bitwise(tmp_path, rng):
    path = tmp_path / "cities.csv"
    write_synthetic_cities(path, 15549, rng)
    recs = read_cities(path)
    assert len(recs) == 15549
    dist, feats = load_city_features(path, 250, rng)
    assert feats.shape == (250, 2)
    origin = (recs[7].latitude, recs[7].longitude)
    t = true_connection_probability(dist, ExponentialDecay(2 / 3), origin, "empirical-exact")
    # independent loop over the file rows, every row counted once regardless of population
    vals = [math.exp(-(2 / 3) * math.sqrt((r.latitude - origin[0]) ** 2 + (r.longitude - origin[1]) ** 2))
            for r in recs]
    assert t.value == math.fsum(vals) / len(vals)
    assert model_truth(RcmSpec(city_distribution(recs), ExponentialDecay(2 / 3), origin)).value == t.value


def test_synthetic_file_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_synthetic_cities(a, 50, np.random.default_rng(4))
    write_synthetic_cities(b, 50, np.random.default_rng(4))
    assert a.read_bytes() == b.read_bytes()
