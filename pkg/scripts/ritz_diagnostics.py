"""Harmonic versus regular Ritz values near a point, from restarted
GMRES and FOM on the bidiagonal matrix.

    python scripts/ritz_diagnostics.py --shift 0.4 --m 40 --cycles 50
    python scripts/ritz_diagnostics.py --shift 0 --target 1.4 --m 80 --cycles 25
"""

import argparse

from shiftkrylov.experiments import ritz_dump


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--shift", type=float, default=0.4)
    p.add_argument("--target", type=float)
    p.add_argument("--m", type=int, default=40)
    p.add_argument("--cycles", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=0.2)
    args = p.parse_args()
    target = args.shift if args.target is None else args.target

    rows = ritz_dump(args.shift, args.m, args.cycles, seed=args.seed, target=target)
    for kind in ("harmonic", "ritz"):
        vals = [z for _, k, z in rows if k == kind]
        dmin = min(abs(z - target) for z in vals)
        near = sum(abs(z - target) < args.radius for z in vals)
        print(f"{kind:8s}: closest to {target} at distance {dmin:.2e}; "
              f"{near} values within {args.radius} over {args.cycles} cycles")


if __name__ == "__main__":
    main()
