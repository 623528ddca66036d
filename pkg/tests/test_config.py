from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from localdeg.config import (
    BOOL,
    FLOAT,
    FLOATS,
    INT,
    INTS,
    MATRIX,
    SCHEMA,
    STR,
    STRS,
    ConfigError,
    RunConfig,
    build_model,
    build_plan,
    build_schemes,
    format_config,
    load_config,
    parse_config,
)
from localdeg.estimator import AnnulusSize, ConstantOne, Geometric
from localdeg.model import EXAMPLE_SBM, ExponentialDecay, GaussianMixture, RcmSpec, sbm_truth

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
word = st.text(st.characters(whitelist_categories=("L", "N"), whitelist_characters="_-./"), min_size=1, max_size=12)
VALUES = {
    id(INT): st.integers(-2**40, 2**40),
    id(FLOAT): finite,
    id(STR): word,
    id(BOOL): st.booleans(),
    id(INTS): st.lists(st.integers(0, 10**6), min_size=1, max_size=5).map(tuple),
    id(FLOATS): st.lists(finite, min_size=1, max_size=5).map(tuple),
    id(STRS): st.lists(word, min_size=1, max_size=4).map(tuple),
    id(MATRIX): st.integers(1, 3).flatmap(
        lambda c: st.lists(st.lists(finite, min_size=c, max_size=c).map(tuple), min_size=1, max_size=3).map(tuple)),
}


@st.composite
def run_configs(draw):
    sections = {}
    for name, keys in SCHEMA.items():
        if draw(st.booleans()):
            chosen = draw(st.sets(st.sampled_from(sorted(keys)), max_size=len(keys)))
            sections[name] = {k: draw(VALUES[id(keys[k])]) for k in sorted(chosen)}
    return RunConfig(sections)


@given(run_configs())
def test_round_trip(cfg):
    once = parse_config(format_config(cfg))
    assert once == cfg
    assert parse_config(format_config(once)) == once


def test_every_schema_converter_has_a_strategy():
    for keys in SCHEMA.values():
        for conv in keys.values():
            assert id(conv) in VALUES


@pytest.mark.parametrize(
    "text, match",
    [
        ("[model]\nkind = sbm\ncolour = red\n", "unknown key"),
        ("[plotting]\nx = 1\n", "unknown section"),
        ("[run]\nseed = twelve\n", r"\[run\] seed"),
        ("[run]\nseed = 1\nseed = 2\n", "seed"),
        ("seed = 1\n", "section"),
        ("[model]\nreplace = maybe\n", "boolean"),
    ],
)
def test_rejects_invalid(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/run.cfg")


def test_comments_and_blank_lists():
    cfg = parse_config("# note\n[estimator]\nschemes =\n")
    assert cfg.get("estimator", "schemes") == ()


def test_require_names_the_key():
    with pytest.raises(ConfigError, match=r"\[model\] q"):
        RunConfig({"model": {}}).require("model", "q")


def test_example_sbm_config():
    cfg = load_config(CONFIGS / "sbm_example.cfg")
    model = build_model(cfg)
    assert model == EXAMPLE_SBM
    assert sbm_truth(model).value == 0.062
    assert build_schemes(cfg) == (AnnulusSize(), ConstantOne(), Geometric(0.1))
    plan = build_plan(cfg, 5)
    assert (plan.M, plan.fraction, plan.seed) == (100, 0.5, 5)


def test_wireless_config():
    model = build_model(load_config(CONFIGS / "wireless.cfg"))
    assert isinstance(model, RcmSpec) and isinstance(model.dist, GaussianMixture)
    np.testing.assert_array_equal(model.origin, [3.0, 3.0])
    np.testing.assert_array_equal(model.dist.covariances[2], [[4, 2], [2, 4]])


def test_cities_config_origin_from_data():
    cfg = load_config(CONFIGS / "cities.cfg")
    model = build_model(cfg)
    assert model.cf == ExponentialDecay(2 / 3)
    first = (CONFIGS.parent / "data" / "cities_synthetic.csv").read_text().splitlines()[1].split(",")
    np.testing.assert_array_equal(model.origin, [float(first[3]), float(first[4])])


def test_origin_from_data_unknown_name():
    cfg = load_config(CONFIGS / "cities.cfg")
    cfg.sections["model"]["origin_from_data"] = "atlantis"
    with pytest.raises(ConfigError, match="atlantis"):
        build_model(cfg)


@pytest.mark.parametrize(
    "model, match",
    [({"kind": "lattice"}, "kind"), ({"kind": "rcm", "distribution": "cauchy"}, "distribution"),
     ({"kind": "rcm", "distribution": "uniform-cube", "d": 2, "connection": "step"}, "connection")],
)
def test_unknown_model_parts(model, match):
    with pytest.raises(ConfigError, match=match):
        build_model(RunConfig({"model": model}))


def test_geometric_needs_gamma():
    with pytest.raises(ConfigError, match="gamma"):
        build_schemes(RunConfig({"estimator": {"schemes": ("geometric",)}}))


def test_empirical_points_file(tmp_path):
    (tmp_path / "pts.csv").write_text("x,y,weight\n0,0,1\n1,1,3\n")
    cfg = parse_config("[model]\nkind = rcm\ndistribution = empirical\npoints_path = pts.csv\n"
                       "connection = hard-threshold\nalpha = 2\norigin = 0, 0\n", tmp_path)
    model = build_model(cfg)
    np.testing.assert_array_equal(model.dist.points, [[0, 0], [1, 1]])
    np.testing.assert_array_equal(model.dist.weights, [0.25, 0.75])


def test_empirical_points_bad_row(tmp_path):
    (tmp_path / "pts.csv").write_text("x\n0\nzero\n")
    cfg = parse_config("[model]\nkind = rcm\ndistribution = empirical\npoints_path = pts.csv\n", tmp_path)
    with pytest.raises(ConfigError, match=":3:"):
        build_model(cfg)


@pytest.mark.parametrize("name", ["sbm_example", "growing_sbm", "wireless", "design", "cities"])
def test_shipped_configs_parse(name):
    cfg = load_config(CONFIGS / f"{name}.cfg")
    assert parse_config(format_config(cfg)) == cfg
