"""Time the stable-model search against brute-force enumeration on random ground programs."""

import argparse
import itertools
import random
import statistics
import time

from crashsem.engine import GroundProgram, GroundRule, is_stable, stable_models
from crashsem.logic import Lit


def random_program(rng: random.Random, n_props: int, n_rules: int) -> GroundProgram:
    lits = [Lit(f"p{i}") for i in range(n_props)]
    lits += [l.complement() for l in lits]
    rules = []
    for _ in range(n_rules):
        body = tuple(rng.sample(lits, rng.randint(0, 2)))
        head = (rng.choice(lits),)
        if rng.random() < 0.5:
            rules.append(GroundRule(body, head, head + tuple(rng.sample(lits, rng.randint(0, 2))), True))
        else:
            rules.append(GroundRule(body, head))
    return GroundProgram(rules)


def brute_force(p: GroundProgram) -> list:
    atoms = p.atoms
    return [
        frozenset(c)
        for k in range(len(atoms) + 1)
        for c in itertools.combinations(atoms, k)
        if is_stable(p, c)
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    print(f"{'props':>6}{'rules':>7}{'search ms':>11}{'brute ms':>10}{'agree':>8}")
    for n_props, n_rules in [(2, 5), (4, 10), (6, 20), (8, 30)]:
        ts, tb, agree = [], [], 0
        for _ in range(args.cases):
            p = random_program(rng, n_props, n_rules)
            t0 = time.perf_counter()
            got = stable_models(p)
            ts.append(time.perf_counter() - t0)
            if n_props <= 6:
                t0 = time.perf_counter()
                agree += set(got) == set(brute_force(p))
                tb.append(time.perf_counter() - t0)
        brute = f"{statistics.mean(tb) * 1000:10.2f}" if tb else f"{'-':>10}"
        share = f"{agree}/{args.cases}" if tb else "-"
        print(f"{n_props:>6}{n_rules:>7}{statistics.mean(ts) * 1000:11.2f}{brute}{share:>8}")


if __name__ == "__main__":
    main()
