"""Sweep single-variable equations n*y = a over small cyclic groups.

For each equation: solvability in K, contextuality level, AvN verdict and the
largest deviation between the exact model and the simulated GHZ statistics.

    python3 scripts/family_sweep.py --max-order 3 --max-coeff 3
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from ctxf.abgroup import FiniteAbelianGroup
from ctxf.avn import avn_check
from ctxf.mermin import build_scenario, empirical_model
from ctxf.qrealize import exact_context_distribution, gated_ghz, max_deviation, measure_all_X
from ctxf.sheaf import classify
from ctxf.zsolve import ZModEquation, solve_in_group


@dataclass
class SweepConfig:
    max_order: int = 3
    max_coeff: int = 3
    max_parties: int = 5    # skip scenarios whose contexts would be too large to enumerate


def sweep(cfg: SweepConfig):
    for d in range(2, cfg.max_order + 1):
        group = FiniteAbelianGroup((d,))
        for n in range(1, cfg.max_coeff + 1):
            for a in group.elements():
                eq = ZModEquation({"y": n}, a)
                start = time.perf_counter()
                s = build_scenario(group, eq)
                if s.parties > cfg.max_parties:
                    continue
                m = empirical_model(s)
                worst = 0.0
                for v in range(s.parties + 1):
                    alphas = [s.phase(r) for r in s.context_settings(v)]
                    exact = exact_context_distribution(group, s.parties, s.context_target(v))
                    worst = max(worst, max_deviation(exact, measure_all_X(gated_ghz(group, alphas))))
                yield {
                    "group": str(group),
                    "equation": str(eq),
                    "N": s.parties,
                    "solvable": solve_in_group(s.system()) is not None,
                    "level": classify(m).value,
                    "avn": avn_check(m, group.exponent),
                    "deviation": worst,
                    "seconds": time.perf_counter() - start,
                }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-order", type=int, default=SweepConfig.max_order)
    parser.add_argument("--max-coeff", type=int, default=SweepConfig.max_coeff)
    parser.add_argument("--max-parties", type=int, default=SweepConfig.max_parties)
    args = parser.parse_args()
    cfg = SweepConfig(args.max_order, args.max_coeff, args.max_parties)
    cols = ["group", "equation", "N", "solvable", "level", "avn", "deviation", "seconds"]
    print("\t".join(cols))
    for row in sweep(cfg):
        row["deviation"] = f"{row['deviation']:.1e}"
        row["seconds"] = f"{row['seconds']:.2f}"
        print("\t".join(str(row[c]) for c in cols))


if __name__ == "__main__":
    main()
