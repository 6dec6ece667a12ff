"""Generate the shipped sample market from a Gaussian forward-rate model.

Annual forward rates F_0..F_9 get instantaneous normal vols
``0.0095 + 0.003 exp(-k/3)`` and correlations ``r + (1 - r) exp(-beta |k - l|)``.
Swap rates are annuity-weighted baskets of forwards with weights frozen at
today's curve, so every vol and long/short correlation below comes from one
positive semidefinite covariance. That keeps the shipped data internally
consistent: coterminal correlation matrices are PSD and forward variances
are positive.

Run from the repository root::

    python3 scripts/make_sample_data.py [--out src/bermcorr/data/sample]
"""

import argparse
import csv
import json
from pathlib import Path

import numpy as np

from bermcorr.market import DiscountCurve

PILLARS = ((1.0, 0.03), (2.0, 0.032), (5.0, 0.035), (10.0, 0.038))
HORIZON = 10
R_INF, BETA = 0.55, 0.2
# mild symmetric-ish smile as a multiplier on the ATM vol, by strike offset
SMILE = ((-0.02, 1.06), (-0.01, 1.02), (0.0, 1.0), (0.01, 1.01), (0.02, 1.04))


def forward_covariance():
    k = np.arange(HORIZON)
    corr = R_INF + (1.0 - R_INF) * np.exp(-BETA * np.abs(k[:, None] - k[None, :]))
    vol = 0.0095 + 0.003 * np.exp(-k / 3.0)
    return corr * np.outer(vol, vol)


def basket(df, a, b):
    w = np.zeros(HORIZON)
    w[a:b] = df[a + 1:b + 1]
    return w / w.sum()


def build():
    curve = DiscountCurve(PILLARS)
    df = curve(np.arange(HORIZON + 1.0))
    cov = forward_covariance()
    vols = {}
    for a in range(1, HORIZON):
        for b in range(a + 1, HORIZON + 1):
            w = basket(df, a, b)
            vols[(a, b)] = float(np.sqrt(w @ cov @ w))
    long_short = []
    for a in range(1, HORIZON - 1):
        for b in range(a + 1, HORIZON):
            lng, sht = basket(df, a, HORIZON), basket(df, a, b)
            rho = lng @ cov @ sht / np.sqrt((lng @ cov @ lng) * (sht @ cov @ sht))
            long_short.append([a, b, round(float(rho), 6)])
    return vols, long_short


TRADES = [
    {"id": "berm5", "kind": "bermudan", "exercises": [1, 2, 3, 4, 5], "end": 10, "strike": "atm", "omega": 1},
    {"id": "canary", "kind": "canary", "t1": 2, "t2": 3, "end": 10, "strike": "atm", "omega": 1},
    {"id": "euro", "kind": "european", "expiry": 2, "end": 10, "strike": "atm", "omega": -1},
    {"id": "midcurve", "kind": "midcurve", "expiry": 1, "start": 3, "end": 10, "strike": "atm", "omega": 1},
    {"id": "relstrike", "kind": "relative_strike", "fix_time": 1, "start": 3, "end": 10, "spread": 0.0025,
     "omega": 1},
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("src/bermcorr/data/sample"))
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    vols, long_short = build()

    (args.out / "market.json").write_text(json.dumps({"pillars": [list(p) for p in PILLARS]}, indent=1) + "\n")
    with open(args.out / "vols.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["expiry", "start", "end", "strike_offset", "normal_vol"])
        for (a, b), v in sorted(vols.items()):
            for offset, mult in SMILE:
                writer.writerow([a, a, b, offset, round(v * mult, 6)])
    corr = {"long_short": long_short, "convexity_shifts": []}
    (args.out / "corr.json").write_text(json.dumps(corr, indent=1) + "\n")
    (args.out / "trades.json").write_text(json.dumps({"trades": TRADES}, indent=1) + "\n")


if __name__ == "__main__":
    main()
