"""Build and verify every (l, k) with 2 <= l <= L; write one JSON summary.

    python scripts/survey_specs.py --max-l 5 --out reports/specs.json
"""

import argparse
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from wfrob.cli import run_pipeline
from wfrob.orbit import GroupSpec, invariance_spotcheck
from wfrob.verify import exact_suite, pencil_flatness_numeric


@dataclass
class SurveyConfig:
    max_l: int = 5
    seed: int = 42
    pencil_points: int = 5
    invariance_points: int = 10
    out: str = "reports/specs.json"


def survey_one(spec: GroupSpec, cfg: SurveyConfig) -> dict:
    t0 = time.perf_counter()
    fd = run_pipeline(spec)
    build_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    exact = exact_suite(fd)
    exact_s = time.perf_counter() - t0
    pencil = pencil_flatness_numeric(spec, fd.orbit.g, fd.orbit.eta, seed=cfg.seed, points=cfg.pencil_points)
    inv = invariance_spotcheck(spec, seed=cfg.seed, points=cfg.invariance_points)
    return {
        "l": spec.l,
        "k": spec.k,
        "build_seconds": round(build_s, 3),
        "exact_seconds": round(exact_s, 3),
        "potential_terms": len(fd.potential.poly),
        "potential_kernel": fd.potential.kernel,
        "exact_failures": [c.name for c in exact.checks if not c.passed],
        "pencil_max": max(c.residual for c in pencil.checks),
        "invariance_max": inv.max_deviation,
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-l", type=int, default=SurveyConfig.max_l)
    ap.add_argument("--seed", type=int, default=SurveyConfig.seed)
    ap.add_argument("--out", default=SurveyConfig.out)
    ns = ap.parse_args()
    cfg = SurveyConfig(max_l=ns.max_l, seed=ns.seed, out=ns.out)
    rows = []
    for l in range(2, cfg.max_l + 1):
        for k in range(1, l):
            row = survey_one(GroupSpec(l, k), cfg)
            rows.append(row)
            print(f"l={l} k={k} build={row['build_seconds']:.2f}s exact={row['exact_seconds']:.2f}s "
                  f"terms={row['potential_terms']} pencil={row['pencil_max']:.1e} "
                  f"inv={row['invariance_max']:.1e} failures={row['exact_failures'] or '-'}")
    path = Path(cfg.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"config": asdict(cfg), "specs": rows}, indent=1) + "\n")


if __name__ == "__main__":
    main()
