"""Regenerates the synthetic OHLCV fixtures under tests/fixtures."""
import datetime as dt
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def trading_days(start, count):
    day = start
    while count:
        if day.weekday() < 5:
            yield day
            count -= 1
        day += dt.timedelta(days=1)


def synthetic(seed, bars, start_price, period):
    rng = random.Random(seed)
    rows = []
    close = start_price
    for t, day in enumerate(trading_days(dt.date(2020, 1, 2), bars)):
        drift = 0.004 * math.sin(2 * math.pi * t / period)
        prev = close
        close = round(prev * math.exp(drift + rng.gauss(0, 0.008)), 2)
        open_ = round(prev * math.exp(rng.gauss(0, 0.003)), 2)
        high = round(max(open_, close) * (1 + abs(rng.gauss(0, 0.004))), 2)
        low = round(min(open_, close) * (1 - abs(rng.gauss(0, 0.004))), 2)
        volume = int(1_000_000 * math.exp(rng.gauss(0, 0.3)))
        rows.append(f"{day.isoformat()},{open_:.2f},{high:.2f},{low:.2f},{close:.2f},{volume}")
    return rows


def write(name, rows):
    (OUT / name).write_text("date,open,high,low,close,volume\n" + "\n".join(rows) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    specs = {"AAA": (11, 90.0, 40), "BBB": (12, 45.0, 55), "CCC": (13, 150.0, 30), "DDD": (14, 20.0, 70)}
    for ticker, (seed, price, period) in specs.items():
        write(f"{ticker}.csv", synthetic(seed, 240, price, period))
    corrupt = synthetic(12, 240, 45.0, 55)
    corrupt[120] = corrupt[120].split(",")[0] + ",45.10,45.30,not-a-number,45.20,1000"
    write("BBB_corrupt.csv", corrupt)
    toy = synthetic(3, 10, 18.0, 10)
    toy[0] = "2013-10-01,18.0,18.2,17.9,18.1,1000000"
    write("toy10.csv", [toy[0]] + [
        f"2013-10-{d:02d},{r.split(',', 1)[1]}" for d, r in zip((2, 3, 4, 7, 8, 9, 10, 11, 14), toy[1:])
    ])


if __name__ == "__main__":
    main()
