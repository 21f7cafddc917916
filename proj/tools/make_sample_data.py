#!/usr/bin/env python3
"""Regenerate the bundled sample tables under data/.

The tables follow the MOOT CSV header convention the loader expects:

  * first character uppercase  -> numeric column, otherwise symbolic
  * trailing '+' / '-'         -> objective to maximize / minimize
  * trailing 'X'               -> ignored column
  * '?' or empty cell          -> missing value

Everything is synthesized from a fixed seed so the files are reproducible;
the shapes and flavor mirror classic effort/defect-estimation and car-choice
tables, but every value here is generated, not measured.
"""

import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

rng = random.Random(20240811)


def write_csv(name: str, header: list[str], rows: list[list[str]]) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / name
    with path.open("w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")
    print(f"wrote {path} ({len(rows)} rows x {len(header)} cols)")


def fmt(v: float, digits: int = 2) -> str:
    return f"{v:.{digits}f}".rstrip("0").rstrip(".")


def make_coc1000() -> None:
    """1000-project effort model: 20 ordinal drivers, 5 objectives."""
    drivers = [
        "Prec", "Flex", "Resl", "Team", "Pmat", "Rely", "Data", "Cplx",
        "Ruse", "Docu", "Time", "Stor", "Pvol", "Acap", "Pcap", "Pcon",
        "Apex", "Ltex", "Tool", "Sced",
    ]
    header = drivers + ["Kloc+", "Effort-", "Defects-", "Months-", "Risk-"]
    rows = []
    for _ in range(1001):
        d = {name: rng.randint(1, 6) for name in drivers}
        kloc = round(rng.lognormvariate(3.0, 0.9) * (1 + 0.08 * d["Data"]), 1)
        kloc = max(2.0, min(kloc, 980.0))
        # Cost drivers push effort up, capability/tooling pulls it down.
        up = 0.9 * d["Cplx"] + 0.7 * d["Time"] + 0.6 * d["Stor"] + 0.5 * d["Rely"]
        down = 0.8 * d["Acap"] + 0.7 * d["Pcap"] + 0.5 * d["Tool"] + 0.4 * d["Pmat"]
        scale = 1.0 + 0.04 * (d["Prec"] + d["Flex"] + d["Resl"])
        effort = (2.5 + 0.22 * up - 0.12 * down) * (kloc ** 0.33) * scale
        effort *= rng.uniform(0.85, 1.18)
        months = 2.3 * (effort ** 0.38) * (1 + 0.05 * d["Sced"]) * rng.uniform(0.9, 1.1)
        defects = (
            0.35 * kloc * (1 + 0.18 * d["Cplx"] - 0.10 * d["Rely"] - 0.06 * d["Docu"])
        )
        defects = max(1.0, defects * rng.uniform(0.8, 1.25))
        risk = (
            0.55 * d["Sced"] + 0.5 * d["Cplx"] + 0.3 * d["Pvol"] - 0.25 * d["Pcon"]
        )
        risk = max(0.0, risk + rng.uniform(-0.4, 0.4))
        rows.append(
            [str(d[n]) for n in drivers]
            + [fmt(kloc, 1), fmt(effort), fmt(defects, 1), fmt(months, 1), fmt(risk)]
        )
    write_csv("coc1000.csv", header, rows)


def make_nasa93dem() -> None:
    """93 flight/ground projects: 6 symbolic + 18 numeric features, 3 objectives."""
    centers = ["c1", "c2", "c3", "c4", "c5", "c6"]
    modes = ["organic", "semidetached", "embedded"]
    langs = ["ftn", "cob", "ada", "c", "pl1"]
    apps = ["sci", "bus", "sys", "ops"]
    platforms = ["pc", "mid", "max"]
    phases = ["a", "b", "c"]
    sym_cols = ["center", "mode", "lang", "app", "platform", "phase"]
    num_cols = [
        "Rely", "Data", "Cplx", "Time", "Stor", "Virt", "Turn", "Acap",
        "Aexp", "Pcap", "Vexp", "Lexp", "Modp", "Tool", "Sced", "Team",
        "Pmat", "Kloc",
    ]
    header = sym_cols + num_cols + ["Effort-", "Defects-", "Months-"]
    mode_weight = {"organic": 0.8, "semidetached": 1.0, "embedded": 1.35}
    rows = []
    for _ in range(93):
        sym = {
            "center": rng.choice(centers),
            "mode": rng.choice(modes),
            "lang": rng.choice(langs),
            "app": rng.choice(apps),
            "platform": rng.choice(platforms),
            "phase": rng.choice(phases),
        }
        d = {name: rng.randint(1, 6) for name in num_cols if name != "Kloc"}
        kloc = round(rng.lognormvariate(2.6, 1.0), 1)
        kloc = max(0.9, min(kloc, 450.0))
        w = mode_weight[sym["mode"]]
        up = 0.8 * d["Cplx"] + 0.6 * d["Time"] + 0.5 * d["Rely"] + 0.3 * d["Virt"]
        down = 0.7 * d["Acap"] + 0.6 * d["Pcap"] + 0.4 * d["Tool"] + 0.3 * d["Modp"]
        effort = w * (3.0 + 0.25 * up - 0.14 * down) * (kloc ** 0.35)
        effort = max(2.0, effort * rng.uniform(0.8, 1.25))
        months = 2.5 * (effort ** 0.35) * rng.uniform(0.85, 1.15)
        defects = max(1.0, 0.4 * kloc * (1 + 0.15 * d["Cplx"] - 0.09 * d["Rely"])
                      * rng.uniform(0.8, 1.3))
        rows.append(
            [sym[c] for c in sym_cols]
            + [str(d[c]) for c in num_cols if c != "Kloc"]
            + [fmt(kloc, 1), fmt(effort), fmt(defects, 1), fmt(months, 1)]
        )
    write_csv("nasa93dem.csv", header, rows)


def make_auto93() -> None:
    """205 cars: 4 numeric features, 1 symbolic, 1 ignored, 3 objectives."""
    header = ["Clndrs", "Volume", "HpX", "Model", "origin", "Lbs-", "Acc+", "Mpg+"]
    origins = ["us", "europe", "japan"]
    rows = []
    for i in range(205):
        origin = rng.choices(origins, weights=[5, 2, 3])[0]
        clndrs = rng.choice([3, 4, 4, 4, 5, 6, 6, 8] if origin == "us"
                            else [3, 4, 4, 4, 4, 5, 6])
        volume = round(rng.uniform(18, 50) * clndrs + rng.uniform(-15, 15))
        hp = round(0.45 * volume + rng.uniform(20, 60))
        model = rng.randint(70, 82)
        lbs = round(9.5 * volume / clndrs * clndrs + rng.uniform(300, 900))
        acc = round(max(8.0, 26 - 0.09 * hp + rng.uniform(-2, 2)), 1)
        mpg = 42 - 0.055 * lbs / 10 - 0.06 * volume + 0.6 * (model - 70)
        if origin != "us":
            mpg += 3.5
        mpg = max(9, round(mpg + rng.uniform(-3, 3)))
        row = [str(clndrs), str(volume), str(hp), str(model), origin,
               str(lbs), fmt(acc, 1), str(int(mpg))]
        # A sprinkle of missing cells in the independent columns only, so the
        # row count is not affected by the missing-objective drop rule.
        if i in (11, 73, 140):
            row[1] = "?"
        if i in (29, 188):
            row[0] = "?"
        rows.append(row)
    write_csv("auto93.csv", header, rows)


def make_manifest() -> None:
    write_csv(
        "categories.csv",
        ["dataset", "category"],
        [["coc1000", "process"], ["nasa93dem", "process"], ["auto93", "misc"]],
    )


def make_judgments() -> None:
    """Mock panel of 12 experts rating feature impact for coc1000 (0/1/2)."""
    features = ["Cplx", "Time", "Stor", "Acap", "Pcap", "Sced", "Tool", "Docu"]
    objectives = ["Effort-", "Months-", "Defects-"]
    # Rough consensus: strong drivers score high with small disagreement.
    strong = {"Cplx", "Time", "Acap"}
    mild = {"Stor", "Pcap", "Sced"}
    rows = []
    for e in range(1, 13):
        expert = f"e{e:02d}"
        for feat in features:
            for obj in objectives:
                if feat in strong:
                    level = rng.choices([2, 1], weights=[8, 2])[0]
                elif feat in mild:
                    level = rng.choices([2, 1, 0], weights=[2, 6, 2])[0]
                else:
                    level = rng.choices([1, 0], weights=[3, 7])[0]
                rows.append(["coc1000", expert, feat, obj, str(level)])
    write_csv("judgments.csv",
              ["dataset", "expert_id", "feature", "objective", "level"], rows)


if __name__ == "__main__":
    make_coc1000()
    make_nasa93dem()
    make_auto93()
    make_manifest()
    make_judgments()
