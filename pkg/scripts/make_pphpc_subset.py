"""Generate the small predator-prey style fixture used by the micomp tests.

Four folders of runs, each run a file with 6 whitespace-separated columns
(prey count, predator count, grass count, mean prey energy, mean predator
energy, mean grass countdown) over a fixed number of iterations. ``nl_ok`` and
``j_ex_ok`` share parameters, ``j_ex_noshuff`` shifts them slightly and
``j_ex_diff`` changes them clearly.

    python scripts/make_pphpc_subset.py tests/data/pphpc
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

CONFIGS = {
    "nl_ok": dict(growth=0.060, predation=0.0040, seed=11),
    "j_ex_ok": dict(growth=0.060, predation=0.0040, seed=23),
    "j_ex_noshuff": dict(growth=0.062, predation=0.0041, seed=37),
    "j_ex_diff": dict(growth=0.075, predation=0.0050, seed=41),
}
RUNS = 10
STEPS = 101


def simulate(rng: np.random.Generator, growth: float, predation: float) -> np.ndarray:
    prey, pred, grass = 400.0, 200.0, 2500.0
    rows = []
    for _ in range(STEPS):
        eaten = predation * prey * pred / 100.0
        new_prey = prey + growth * prey * (grass / 2500.0) - eaten + rng.normal(0, 3.0)
        new_pred = pred + 0.25 * eaten - 0.035 * pred + rng.normal(0, 1.5)
        new_grass = grass + 30.0 - 0.05 * prey + rng.normal(0, 5.0)
        prey = max(new_prey, 1.0)
        pred = max(new_pred, 1.0)
        grass = min(max(new_grass, 100.0), 5000.0)
        e_prey = 4.0 + 2.0 * grass / 2500.0 + rng.normal(0, 0.05)
        e_pred = 10.0 + 5.0 * eaten / max(pred, 1.0) + rng.normal(0, 0.1)
        countdown = 5.0 - 2.0 * grass / 5000.0 + rng.normal(0, 0.02)
        rows.append((round(prey), round(pred), round(grass), e_prey, e_pred, countdown))
    return np.array(rows, dtype=float)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    args = ap.parse_args()
    for folder, cfg in CONFIGS.items():
        rng = np.random.default_rng(cfg["seed"])
        d = args.outdir / folder
        d.mkdir(parents=True, exist_ok=True)
        for r in range(1, RUNS + 1):
            data = simulate(rng, cfg["growth"], cfg["predation"])
            lines = ["\t".join([f"{int(v[0])}", f"{int(v[1])}", f"{int(v[2])}", f"{v[3]:.6f}", f"{v[4]:.6f}",
                                f"{v[5]:.6f}"]) for v in data]
            (d / f"stats400v1r{r}.txt").write_text("\n".join(lines) + "\n")
    config = {
        "outputs": ["$P^s$", "$P^w$", "$P^c$", "$\\overline{E}^s$", "$\\overline{E}^w$", "$\\overline{C}$",
                    "$\\widetilde{A}$"],
        "ve": [0.75],
        "concat": True,
        "concat_method": "range",
        "comparisons": [
            {"name": name, "levels": [
                {"label": "NLOK", "folder": "nl_ok", "glob": "stats400v1*.txt"},
                {"label": lvl, "folder": folder, "glob": "stats400v1*.txt"},
            ]}
            for name, lvl, folder in (("I", "JEXOK", "j_ex_ok"), ("II", "JEXNS", "j_ex_noshuff"),
                                      ("III", "JEXDIF", "j_ex_diff"))
        ],
        "report": {
            "data_show": ["npcs-1", "mnvp-1", "parp-1", "scoreplot"],
            "data_labels": ["$\\#$PCs", "MNV", "$t$-test", "PCS"],
            "booktabs": True,
            "col_width": True,
            "pvalf": {"minval": 1e-8, "na_str": "*"},
            "label": "tab:pphpc",
            "caption": "Comparison of predator-prey simulation outputs across three configurations.",
        },
    }
    (args.outdir / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
