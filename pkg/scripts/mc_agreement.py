"""Plain MC against the closed-form oracles, several seeds per scheme.

    python scripts/mc_agreement.py --trials 10000000 --seeds 5
"""

import argparse

from fexp.gaussian import ChannelParams
from fexp.schemes import estimate_error
from fexp.schemes.estimate import oracle_error
from fexp.verify.suite import MC_CASES


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    params = ChannelParams(1.0, 1.0, 1.0, 1.0)
    print("scheme,n,seed,oracle,p_hat,ci_low,ci_high,z,within_3se")
    for cfg in MC_CASES:
        p = oracle_error(params, cfg)
        for seed in range(args.seeds):
            e = estimate_error(cfg, params, args.trials, seed)
            z = (e.p_hat - p) / (p * (1 - p) / args.trials) ** 0.5
            print(f"{cfg.scheme_kind.value},{cfg.n},{seed},{p:.6e},{e.p_hat:.6e},"
                  f"{e.ci_low:.6e},{e.ci_high:.6e},{z:+.3f},{e.within(p)}")


if __name__ == "__main__":
    main()
