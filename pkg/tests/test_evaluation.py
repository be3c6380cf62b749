"""Selection, perturbation, and method-ranking behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_selector_model
from tsxplain.evaluation import (
    AbsValue,
    DatasetStats,
    EvalResult,
    PerturbationConfig,
    TopPercent,
    default_config_grid,
    evaluate_grid,
    evaluate_method,
    perturb,
    rank_methods,
    ranking_table,
    select_relevant,
)
from tsxplain.attributions import build_attribution_matrix
from tsxplain.errors import (
    IndexOutOfRangeError,
    InvalidParamsError,
    MissingAttributionsError,
)

STATS = DatasetStats(mean=10.0, min=-5.0, max=7.0)


# -- selection ----------------------------------------------------------------


def test_select_top_percent_hand_values():
    np.testing.assert_array_equal(
        select_relevant(np.array([0.1, -0.9, 0.2, 0.8]), TopPercent(50.0)), [1, 3]
    )
    np.testing.assert_array_equal(
        select_relevant(np.arange(4) + 1.0, TopPercent(100.0)), [0, 1, 2, 3]
    )


def test_select_ties_keep_lowest_index():
    np.testing.assert_array_equal(select_relevant(np.ones(4), TopPercent(25.0)), [0])


def test_select_abs_threshold():
    np.testing.assert_array_equal(
        select_relevant(np.array([0.6, -0.2, 0.5]), AbsValue(0.5)), [0, 2]
    )
    assert select_relevant(np.array([0.1, 0.2]), AbsValue(0.5)).size == 0


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-100, 100), min_size=1, max_size=40),
    st.floats(0.1, 100.0),
)
def test_select_top_percent_count_is_ceil(values, p):
    values = np.asarray(values)
    idx = select_relevant(values, TopPercent(p))
    assert idx.size == int(np.ceil(p * values.size / 100.0))
    assert np.all(np.diff(idx) > 0)


def test_select_rejects_bad_input():
    with pytest.raises(InvalidParamsError):
        select_relevant(np.ones((2, 2)), TopPercent(10.0))
    with pytest.raises(InvalidParamsError):
        select_relevant(np.array([]), TopPercent(10.0))
    with pytest.raises(InvalidParamsError):
        select_relevant(np.ones(3), 0.5)


def test_threshold_validation():
    with pytest.raises(InvalidParamsError):
        TopPercent(0.0)
    with pytest.raises(InvalidParamsError):
        TopPercent(101.0)
    with pytest.raises(InvalidParamsError):
        AbsValue(np.inf)


# -- perturbation -------------------------------------------------------------


def test_point_strategies_hand_values():
    x = np.array([1.0, -2.0, 3.0])
    cases = {
        "zero": [1.0, 0.0, 3.0],
        "inverse": [1.0, 2.0, 3.0],
        "mean": [1.0, 10.0, 3.0],
        "min": [1.0, -5.0, 3.0],
        "max": [1.0, 7.0, 3.0],
    }
    for strategy, expected in cases.items():
        cfg = PerturbationConfig("point", strategy, TopPercent(10.0))
        np.testing.assert_array_equal(perturb(x, [1], cfg, STATS), expected)


def test_point_perturb_leaves_rest_bitwise_identical():
    x = np.array([0.1, 0.2, 0.3, 0.4])
    cfg = PerturbationConfig("point", "zero", TopPercent(10.0))
    out = perturb(x, [2], cfg, STATS)
    assert out[2] == 0.0
    for i in (0, 1, 3):
        assert out[i] == x[i]


def test_time_swap_reverses_the_window():
    x = np.arange(6, dtype=float)
    cfg = PerturbationConfig("time", "swap", TopPercent(10.0), span=3)
    np.testing.assert_array_equal(perturb(x, [2], cfg, STATS), [0, 3, 2, 1, 4, 5])


def test_time_windows_merge_when_overlapping():
    x = np.arange(6, dtype=float)
    cfg = PerturbationConfig("time", "zero", TopPercent(10.0), span=3)
    np.testing.assert_array_equal(perturb(x, [1, 3], cfg, STATS), [0, 0, 0, 0, 0, 5])


def test_time_window_clamps_at_edges():
    x = np.arange(5, dtype=float)
    cfg = PerturbationConfig("time", "zero", TopPercent(10.0), span=3)
    np.testing.assert_array_equal(perturb(x, [0], cfg, STATS), [0, 0, 2, 3, 4])
    np.testing.assert_array_equal(perturb(x, [4], cfg, STATS), [0, 1, 2, 0, 0])


def test_empty_selection_is_identity():
    x = np.array([3.0, 1.0, 4.0])
    cfg = PerturbationConfig("time", "swap", TopPercent(10.0), span=5)
    np.testing.assert_array_equal(perturb(x, [], cfg, STATS), x)


def test_perturb_rejects_out_of_range():
    cfg = PerturbationConfig("point", "zero", TopPercent(10.0))
    with pytest.raises(IndexOutOfRangeError):
        perturb(np.ones(4), [4], cfg, STATS)
    with pytest.raises(IndexOutOfRangeError):
        perturb(np.ones(4), [-1], cfg, STATS)


def test_config_validation():
    with pytest.raises(InvalidParamsError):
        PerturbationConfig("global", "zero", TopPercent(10.0))
    with pytest.raises(InvalidParamsError):
        PerturbationConfig("point", "swap", TopPercent(10.0))  # swap needs spans
    with pytest.raises(InvalidParamsError):
        PerturbationConfig("time", "zero", TopPercent(10.0), span=0)
    with pytest.raises(InvalidParamsError):
        PerturbationConfig("point", "zero", 10.0)


def test_config_labels():
    assert PerturbationConfig("point", "zero", TopPercent(10.0)).label() == "point/zero@top10"
    assert (
        PerturbationConfig("time", "swap", TopPercent(10.0), span=5).label()
        == "time/swap@top10/L5"
    )
    assert PerturbationConfig("point", "mean", AbsValue(0.5)).label() == "point/mean@abs0.5"


def test_dataset_stats():
    stats = DatasetStats.from_samples(np.array([[1.0, 2.0], [3.0, 6.0]]))
    assert stats == DatasetStats(mean=3.0, min=1.0, max=6.0)
    with pytest.raises(InvalidParamsError):
        DatasetStats.from_samples(np.empty((0, 4)))


# -- scoring ------------------------------------------------------------------


def _selector_setup():
    # class is decided by the sign of x[3] alone, so a method that points
    # there destroys accuracy while any other index is inert
    model = make_selector_model(8, 3)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, 8))
    y = (X[:, 3] < 0).astype(int)
    vals = np.zeros((10, 8))
    vals[:, 3] = 1.0
    return model, X, y, vals


def test_evaluate_method_guided_flip_beats_random():
    model, X, y, vals = _selector_setup()
    cfg = PerturbationConfig("point", "inverse", TopPercent(12.5), seed=0)
    res = evaluate_method(model, X, y, vals, cfg, DatasetStats.from_samples(X), "probe")
    assert res.acc_before == 1.0
    assert res.acc_after == 0.0
    assert res.drop == 1.0
    assert res.random_drop == 0.0
    assert res.beats_random


def test_evaluate_method_random_baseline_deterministic():
    model, X, y, vals = _selector_setup()
    cfg = PerturbationConfig("point", "inverse", TopPercent(12.5), seed=4)
    a = evaluate_method(model, X, y, vals, cfg, DatasetStats.from_samples(X), "m")
    b = evaluate_method(model, X, y, vals, cfg, DatasetStats.from_samples(X), "m")
    assert a.random_drop == b.random_drop


def test_evaluate_method_can_skip_random():
    model, X, y, vals = _selector_setup()
    cfg = PerturbationConfig("point", "zero", TopPercent(12.5), compare_random=False)
    res = evaluate_method(model, X, y, vals, cfg, DatasetStats.from_samples(X), "m")
    assert res.random_drop is None and not res.beats_random


def test_evaluate_method_shape_guard():
    model, X, y, _ = _selector_setup()
    cfg = PerturbationConfig("point", "zero", TopPercent(10.0))
    with pytest.raises(MissingAttributionsError):
        evaluate_method(model, X, y, np.zeros((10, 4)), cfg, STATS, "m")


def test_default_grid_shape():
    grid = default_config_grid(seed=3)
    assert [c.label() for c in grid] == [
        "point/zero@top10",
        "point/inverse@top10",
        "point/mean@top10",
        "time/zero@top10/L5",
        "time/inverse@top10/L5",
        "time/mean@top10/L5",
        "time/swap@top10/L5",
    ]
    assert all(c.seed == 3 for c in grid)


def test_rank_methods_orders_by_mean_drop():
    cfg = PerturbationConfig("point", "zero", TopPercent(10.0))
    results = [
        EvalResult("weak", cfg, 1.0, 0.9, 0.1, 0.05, True),
        EvalResult("strong", cfg, 1.0, 0.2, 0.8, 0.05, True),
        EvalResult("inert", cfg, 1.0, 1.0, 0.0, 0.05, False),
    ]
    entries = rank_methods(results)
    assert [e.method for e in entries] == ["strong", "weak", "inert"]
    assert entries[0].mean_drop == 0.8
    assert entries[0].beats_random and not entries[2].beats_random


def test_rank_methods_tie_breaks_on_name():
    cfg = PerturbationConfig("point", "zero", TopPercent(10.0))
    results = [
        EvalResult("zeta", cfg, 1.0, 0.5, 0.5),
        EvalResult("alpha", cfg, 1.0, 0.5, 0.5),
    ]
    assert [e.method for e in rank_methods(results)] == ["alpha", "zeta"]
    with pytest.raises(InvalidParamsError):
        rank_methods([])


def test_rank_methods_averages_across_configs():
    c1 = PerturbationConfig("point", "zero", TopPercent(10.0))
    c2 = PerturbationConfig("point", "mean", TopPercent(10.0))
    results = [
        EvalResult("m", c1, 1.0, 0.8, 0.2, 0.1),
        EvalResult("m", c2, 1.0, 0.4, 0.6, 0.3),
    ]
    (entry,) = rank_methods(results)
    assert entry.mean_drop == pytest.approx(0.4)
    assert entry.mean_random_drop == pytest.approx(0.2)
    assert entry.drops == {"point/zero@top10": 0.2, "point/mean@top10": 0.6}


def test_grid_evaluation_and_table_round_trip():
    model, X, y, _ = _selector_setup()
    matrix = build_attribution_matrix(model, X, ["saliency", "random"], seed=0)
    results = evaluate_grid(model, X, y, matrix)
    assert len(results) == 2 * 7
    entries = rank_methods(results)
    table = ranking_table(entries, default_config_grid())
    assert table["methods"][0] == "saliency"  # gradient at the decisive index
    assert len(table["columns"]) == 7
    for method in table["methods"]:
        assert set(table["cells"][method]) == set(table["columns"])
    assert table["beats_random"]["saliency"] is True
