"""Oracle-mode exponent sweeps for every feedback scheme.

Writes one CSV per scheme (via the ``fexp sweep`` command) and prints the
fitted slope next to the predicted one.

    python scripts/sweep_exponents.py --out results/
"""

import argparse
import json
import pathlib

from fexp import cli

SWEEPS = {
    "as_scheme": ["--scheme", "AsScheme", "--delta", "0.3", "--n-list", "1000,10000,100000"],
    "building_block": ["--scheme", "BuildingBlock", "--delta", "0.2", "--delta-fb-power", "0.01",
                       "--n-list", "1001,10001,100001"],
    "three_phase_d0.4": ["--scheme", "ThreePhase", "--delta", "0.4", "--delta-fb-power", "0.05",
                         "--n-list", "10001,100001,1000001"],
    "three_phase_d0.2": ["--scheme", "ThreePhase", "--delta", "0.2", "--delta-fb-power", "0.05",
                         "--n-list", "10001,100001,1000001"],
    "three_phase_d0.1": ["--scheme", "ThreePhase", "--delta", "0.1", "--delta-fb-power", "0.05",
                         "--n-list", "10001,100001,1000001"],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, flags in SWEEPS.items():
        path = out / f"sweep_{name}.json"
        code = cli.main(["sweep", "--trials", "0", "--output", str(path), *flags])
        if code:
            raise SystemExit(code)
        s = json.loads(path.read_text())["summary"]
        print(f"{name:18s} slope={s['slope']:.5f} r2={s['r2']:.10f} "
              f"reference={s['paper_reference_exponent']:.5f}")


if __name__ == "__main__":
    main()
