#!/usr/bin/env python3
"""Smoke tests for the python bindings: exercises every exposed operation once."""

import math
import sys

import tauw


def approx(a, b, tol=1e-9):
    assert abs(a - b) < tol, f"{a} != {b} (tol {tol})"


def main():
    # clopper-pearson and gini
    approx(tauw.gini_impurity(2, 10), 0.32)
    approx(tauw.clopper_pearson_upper(0, 200, 0.999), 1 - 0.001 ** (1 / 200), 1e-10)
    assert tauw.clopper_pearson_upper(5, 5, 0.999) == 1.0
    assert 0.9 < tauw.binomial_cdf(2, 10, 0.05) <= 1.0

    # fusion
    vote = tauw.majority_vote([0, 1, 0])
    assert vote["label"] == 0 and not vote["tie_broken"]
    vote = tauw.majority_vote([0, 1])
    assert vote["label"] == 1 and vote["tie_broken"]
    approx(tauw.naive_uf([0.1, 0.2]), 0.02)
    approx(tauw.opportune_uf([0.1, 0.2]), 0.1)
    approx(tauw.worstcase_uf([0.1, 0.2]), 0.2)

    # taqf
    approx(tauw.taqf_ratio([0, 0, 1], 0), 2 / 3)
    assert tauw.taqf_size([0, 1, 0]) == 2
    approx(tauw.taqf_cumulative_certainty([0, 1, 0], [0.1, 0.2, 0.3], 0), 1.6)

    # scoring and the decomposition identity
    cases = [(0.2, False), (0.2, True), (0.8, True)]
    bs = tauw.brier_score(cases)
    approx(bs, 0.24)
    var, res, unr = tauw.decompose(cases)
    approx(bs, var - res + unr)
    over, under = tauw.confidence_split(cases)
    approx(over + under, unr, 1e-12)

    report = tauw.evaluate_cases([(0.1, i % 10 == 0) for i in range(100)])
    assert report["n_cases"] == 100
    approx(report["brier"], report["variance"] - report["resolution"] + report["unreliability"])
    assert len(report["calibration_deciles"]) == 10

    # calibrated tree fit + json round trip
    train_x = [[float(i % 2)] for i in range(400)]
    train_y = [i % 2 == 1 and i % 8 < 6 for i in range(400)]
    cal_x = [[float(i % 2)] for i in range(600)]
    cal_y = [i % 2 == 1 and i % 8 < 6 for i in range(600)]
    tree = tauw.fit_calibrated_tree(train_x, train_y, cal_x, cal_y, ["parity"], min_leaf=100)
    assert tree.feature_names == ["parity"]
    low, high = tree.predict_uncertainty([0.0]), tree.predict_uncertainty([1.0])
    assert low < high
    clone = tauw.CalibratedTree.from_json(tree.to_json())
    assert clone.to_json() == tree.to_json()
    assert len(tree.leaf_bounds()) >= 1

    # error translation
    try:
        tauw.gini_impurity(0, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    # tiny end-to-end benchmark
    config = """{
      "n_series": 220, "series_length": 12, "n_classes": 5, "seed": 3,
      "error_correlation": 0.7, "varying_change_prob": 0.3, "subsample_length": 6,
      "split_fractions": [0.4, 0.3, 0.3],
      "base_curve": {"start": 0.1, "end": 0.03},
      "deficits": [
        {"name": "rain", "multipliers": [1, 1.6, 2.5, 4], "weights": [0.7, 0.12, 0.1, 0.08], "varying": false},
        {"name": "blur", "multipliers": [1, 1.5, 2.2, 3.5], "weights": [0.6, 0.2, 0.12, 0.08], "varying": true}
      ]
    }"""
    report = tauw.run_benchmark(config_json=config, seed=3, fusion="if", uf="tauw")
    assert 0.0 <= report["brier"] <= 1.0
    assert report["n_cases"] > 0
    approx(report["brier"], report["variance"] - report["resolution"] + report["unreliability"], 1e-9)

    assert tauw.paperlike_config_json().startswith("{")
    assert isinstance(tauw.__version__, str)

    print("python smoke tests passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
