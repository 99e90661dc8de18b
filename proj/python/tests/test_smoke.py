import json
import math
import pathlib

import numpy as np
import pytest

import wtlstm

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def test_haar_example():
    c = wtlstm.dwt(np.array([1.0, 2.0, 3.0, 4.0]), "haar", 1)
    np.testing.assert_allclose(c.approx[0], [3 / math.sqrt(2), 7 / math.sqrt(2)], atol=1e-12)
    np.testing.assert_allclose(c.details[0][0], [-1 / math.sqrt(2)] * 2, atol=1e-12)


@pytest.mark.parametrize("wavelet", ["haar", "db2", "db4"])
def test_round_trip_and_energy(wavelet):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 77))
    levels = min(3, wtlstm.max_levels(77, wavelet))
    c = wtlstm.dwt(x, wavelet, levels)
    np.testing.assert_allclose(wtlstm.idwt(c), x, atol=1e-10)
    energy = (c.approx**2).sum() + sum((d**2).sum() for d in c.details)
    assert energy == pytest.approx((x**2).sum(), rel=1e-12)


def test_dct_matches_scipy_convention():
    x = np.random.default_rng(1).normal(size=37)
    n = np.arange(37)
    naive = [np.sum(x * np.cos(np.pi / 37 * (n + 0.5) * k)) for k in range(37)]
    np.testing.assert_allclose(wtlstm.dct(x), naive, atol=1e-10)


def test_metric_spot_values():
    m = wtlstm.regression_metrics([110, 180], [100, 200])
    assert m == pytest.approx({"mse": 250, "mae": 15, "mape": 0.1, "r2": 0.9}, abs=1e-12)
    assert wtlstm.max_drawdown([100, 120, 90, 110]) == pytest.approx(0.25, abs=1e-15)
    assert wtlstm.total_return([0.01, 0.01]) == pytest.approx(0.0201, abs=1e-15)
    assert wtlstm.annualized_return(0.10, 126, 252) == pytest.approx(0.21, abs=1e-12)
    assert wtlstm.sharpe_ratio([0.01, 0.03], 0.0, 1.0) == pytest.approx(math.sqrt(2))
    assert wtlstm.indicator_signal(100, 100, -1) == -1
    assert wtlstm.daily_portfolio_return([1, 1, -1, -1], [0.25] * 4, [0.01, 0.02, -0.03, 0.01]) == pytest.approx(0.0125)


def test_validation_errors_raise_value_error():
    with pytest.raises(ValueError):
        wtlstm.regression_metrics([1, 2], [0, 2])
    with pytest.raises(ValueError):
        wtlstm.dwt(np.ones(4), "db4", 1)
    with pytest.raises(ValueError, match="not-a-number"):
        wtlstm.load_ohlcv(str(FIXTURES / "BBB_corrupt.csv"))


def test_load_and_backtest():
    bars = wtlstm.load_ohlcv(str(FIXTURES / "toy10.csv"))
    assert bars["ticker"] == "toy10"
    assert bars["date"][0] == "2013-10-01"
    assert bars["close"][0] == 18.1
    close = bars["close"]
    series = {
        "TOY": {"date": bars["date"][1:], "true": close[1:], "predicted": close[1:], "prev_true": close[:-1]}
    }
    rep = wtlstm.run_backtest(series)
    realized = close[1:] / close[:-1] - 1
    assert rep["portfolio"]["total_return"] == pytest.approx(np.prod(1 + np.abs(realized)) - 1, abs=1e-12)
    assert rep["buy_and_hold"]["TOY"]["total_return"] == (close[-1] - close[0]) / close[0]


def test_pipeline_run_all(tmp_path):
    cfg = {
        "data": {t: str(FIXTURES / f"{t}.csv") for t in ["AAA", "BBB"]},
        "window": 16,
        "hidden": 4,
        "epochs": 2,
        "out_dir": str(tmp_path / "out"),
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    log = wtlstm.run_all(str(path), {"seed": 3})
    assert "portfolio over" in log
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["metadata"]["seed"] == 3
    assert report["trading"]["tickers"] == ["AAA", "BBB"]
