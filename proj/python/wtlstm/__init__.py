"""Wavelet/attention LSTM forecasting and long-short backtesting."""

from ._core import (
    WaveletCoeffs,
    __version__,
    annualized_return,
    backtest,
    buy_and_hold_return,
    daily_portfolio_return,
    dct,
    dwt,
    idwt,
    indicator_signal,
    ingest_check,
    load_ohlcv,
    max_drawdown,
    max_levels,
    predict,
    regression_metrics,
    report,
    run_all,
    run_backtest,
    sharpe_ratio,
    total_return,
    train,
    wavelets,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
