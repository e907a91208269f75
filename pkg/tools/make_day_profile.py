"""Regenerate the bundled one-day operating profile.

Writes src/gridloss/data/day_profile.csv: 144 rows at 10-minute resolution
covering 2024-06-15, with smooth closed-form PV/wind/load shapes and a
perfect one-step-ahead forecast in the fc_* columns (each row's forecast is
the next row's actual). Run from the repository root:

    python3 tools/make_day_profile.py
"""

import math
import pathlib

STEP_MIN = 10
ROWS = 24 * 60 // STEP_MIN
PV_BUSES = (3, 6, 24, 30)
PV_PEAK = {3: 480.0, 6: 470.0, 24: 375.0, 30: 455.0}
PV_PHASE = {3: 0.0, 6: 1.1, 24: 2.3, 30: 3.6}
SUNRISE_H, SUNSET_H = 4.5, 21.5


def pv_kw(bus: int, hour: float) -> float:
    if hour <= SUNRISE_H or hour >= SUNSET_H:
        return 0.0
    arc = math.sin(math.pi * (hour - SUNRISE_H) / (SUNSET_H - SUNRISE_H))
    texture = 1.0 + 0.06 * math.sin(2.0 * math.pi * hour / 3.3 + PV_PHASE[bus])
    return PV_PEAK[bus] * arc ** 1.6 * texture


def wind_kw(hour: float) -> float:
    # a becalmed day: the wind plant idles well below its rating
    return (32.0
            + 14.0 * math.sin(2.0 * math.pi * hour / 9.5 + 0.7)
            + 7.0 * math.sin(2.0 * math.pi * hour / 3.1 + 2.0))


def load_scale(hour: float) -> float:
    return (0.925
            + 0.185 * math.cos(2.0 * math.pi * (hour - 16.0) / 24.0)
            + 0.02 * math.sin(2.0 * math.pi * hour / 6.0))


def main():
    hours = [i * STEP_MIN / 60.0 for i in range(ROWS)]
    actual = []
    for h in hours:
        row = [pv_kw(b, h) for b in PV_BUSES] + [wind_kw(h)]
        actual.append(row)

    header = (["timestamp"]
              + [f"pv_{b}" for b in PV_BUSES] + ["wind_27", "load_scale"]
              + [f"fc_pv_{b}" for b in PV_BUSES] + ["fc_wind_27"])
    lines = [",".join(header)]
    for i, h in enumerate(hours):
        stamp = f"2024-06-15T{int(h):02d}:{int(round(h * 60)) % 60:02d}:00"
        forecast = actual[min(i + 1, ROWS - 1)]
        cells = ([stamp]
                 + [f"{v:.1f}" for v in actual[i]]
                 + [f"{load_scale(h):.4f}"]
                 + [f"{v:.1f}" for v in forecast])
        lines.append(",".join(cells))

    out = pathlib.Path(__file__).resolve().parents[1] / "src/gridloss/data/day_profile.csv"
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({ROWS} rows)")


if __name__ == "__main__":
    main()
