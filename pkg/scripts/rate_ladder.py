"""Gaussian shift ladder: log L2 distance against log Delta_K with the fitted slope.

Example::

    python3 scripts/rate_ladder.py --dim 2 --alpha 2 --ladder 0.8,0.4,0.2,0.1,0.05
"""

import argparse
from dataclasses import dataclass, field

from interpoint import DensitySpec, DistanceSpec
from interpoint.bounds import rate_experiment
from interpoint.io import write_report


@dataclass
class LadderConfig:
    dim: int = 1
    alpha: float = 1.0
    beta: float = 1.0
    ladder: list = field(default_factory=lambda: [0.8, 0.4, 0.2, 0.1, 0.05])
    method: str = "auto"
    seed: int = 0


def run(cfg: LadderConfig):
    base = DensitySpec.gaussian([0.0] * cfg.dim, [1.0] * cfg.dim)
    fit = rate_experiment(DistanceSpec.lp(2, cfg.dim), base, cfg.ladder, cfg.alpha, cfg.beta, cfg.method,
                          seed=cfg.seed)
    return fit.to_dict()


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--alpha", type=float, default=None, help="defaults to the dimension")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--ladder", default="0.8,0.4,0.2,0.1,0.05")
    p.add_argument("--method", choices=("auto", "closed", "mc"), default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    a = p.parse_args()
    cfg = LadderConfig(a.dim, a.alpha if a.alpha is not None else float(a.dim), a.beta,
                       [float(v) for v in a.ladder.split(",")], a.method, a.seed)
    write_report(a.out, {"rate": run(cfg)}, vars(cfg))


if __name__ == "__main__":
    main()
