"""Witnesses that AvN over Z_p does not transfer to coprime modules.

For each prime p and module K' with exponent coprime to p, the p*y = 1 model
over Z_p is AvN over Z_p, yet the assignment (controls -> 0, phased -> y with
p*y = 1 in K') satisfies the integer lift of its theory.

    python3 scripts/hierarchy_demo.py --primes 3 5 --modules Z2 Z4 Z2xZ2
"""
from __future__ import annotations

import argparse
import math
import time
from dataclasses import dataclass, field

from ctxf.abgroup import FiniteAbelianGroup, parse_group
from ctxf.avn import avn_check, hierarchy_witness, scaled_identity_solution
from ctxf.mermin import build_scenario, empirical_model
from ctxf.zsolve import ZModEquation


@dataclass
class DemoConfig:
    primes: list[int] = field(default_factory=lambda: [3, 5])
    modules: list[str] = field(default_factory=lambda: ["Z2", "Z3", "Z4", "Z2xZ2"])
    full_theory: bool = True
    search_limit: int = 10**5   # max |Z_p|^|X| for the brute-force AvN check over Z_p


def run(cfg: DemoConfig):
    for p in cfg.primes:
        zp = FiniteAbelianGroup((p,))
        s = build_scenario(zp, ZModEquation({"y": p}, (1,)))
        model = empirical_model(s) if cfg.full_theory else None
        small = p ** len(s.measurements) <= cfg.search_limit
        own = avn_check(model, p) if model is not None and small else "not checked"
        for name in cfg.modules:
            k = parse_group(name)
            if math.gcd(p, k.exponent) != 1:
                print(f"p={p}\t{name}\tskipped (not coprime)")
                continue
            start = time.perf_counter()
            hierarchy_witness(p, k, s, model)
            y = k.format_element(scaled_identity_solution(p, k))
            print(f"p={p}\tN={s.parties}\tAvN over Z{p}: {own}\t{name}: witness y={y}, not AvN"
                  f"\t{time.perf_counter() - start:.2f}s")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--primes", type=int, nargs="+", default=DemoConfig().primes)
    parser.add_argument("--modules", nargs="+", default=DemoConfig().modules)
    parser.add_argument("--canonical-only", action="store_true", help="skip building the full model")
    parser.add_argument("--search-limit", type=int, default=DemoConfig.search_limit)
    args = parser.parse_args()
    run(DemoConfig(args.primes, args.modules, not args.canonical_only, args.search_limit))


if __name__ == "__main__":
    main()
