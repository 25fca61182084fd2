"""Residue-side comparison over many seeds; reports worst errors per check.

    python scripts/survey_lg.py --specs 2,1 3,1 3,2 --samples 50 --out reports/lg.json
"""

import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from wfrob.lg import CHECK_KEYS, lg_metric_check
from wfrob.orbit import GroupSpec, compute_orbit


@dataclass
class LGSurveyConfig:
    specs: list = field(default_factory=lambda: [(2, 1), (3, 1), (3, 2)])
    samples: int = 50
    seeds: list = field(default_factory=lambda: [42, 7, 2024])
    out: str = "reports/lg.json"


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--specs", nargs="+", default=None, help="pairs like 3,2")
    ap.add_argument("--samples", type=int, default=LGSurveyConfig.samples)
    ap.add_argument("--out", default=LGSurveyConfig.out)
    ns = ap.parse_args()
    cfg = LGSurveyConfig(samples=ns.samples, out=ns.out)
    if ns.specs:
        cfg.specs = [tuple(int(v) for v in s.split(",")) for s in ns.specs]
    rows = []
    for l, k in cfg.specs:
        spec = GroupSpec(l, k)
        orbit = compute_orbit(spec, christoffel=False)
        for seed in cfg.seeds:
            rep = lg_metric_check(spec, seed=seed, samples=cfg.samples, orbit=orbit)
            row = {"l": l, "k": k, "seed": seed, "rejection_rate": rep.rejection_rate,
                   "passed": rep.passed, "worst": {key: rep.worst(key) for key in CHECK_KEYS}}
            rows.append(row)
            print(f"l={l} k={k} seed={seed} rejected={rep.rejection_rate:.0%} passed={rep.passed} "
                  + " ".join(f"{key}={v:.1e}" for key, v in row["worst"].items()))
    path = Path(cfg.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"config": asdict(cfg), "runs": rows}, indent=1) + "\n")


if __name__ == "__main__":
    main()
