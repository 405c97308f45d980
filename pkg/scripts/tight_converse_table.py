"""Simple vs optimized expected-power converse over a grid of link SNRs.

    python scripts/tight_converse_table.py
"""

import itertools

from fexp.exponents import achievable_expected, converse_expected_simple
from fexp.gaussian import ChannelParams
from fexp.tight import optimize_tight


def main():
    print("snr_fwd,snr_fb,achievable,tight,simple,tight/simple,p0,pfb0")
    for snr, snr_fb in itertools.product((0.1, 1.0, 10.0), (0.1, 1.0, 10.0)):
        p = ChannelParams(snr, 1.0, snr_fb, 1.0)
        r = optimize_tight(p)
        simple = converse_expected_simple(p).value
        print(f"{snr},{snr_fb},{achievable_expected(p).value:.6f},{r.value:.6f},"
              f"{simple:.6f},{r.value / simple:.6f},{r.split.p0:.4f},{r.split.pfb0:.4f}")


if __name__ == "__main__":
    main()
