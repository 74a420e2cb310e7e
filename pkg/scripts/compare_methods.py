"""Score all six warning methods on a synthetic suite and print a results table.

    python3 scripts/compare_methods.py --n-per-kind 25 --seed 7 --forecaster constant_velocity
"""

import argparse

from attnfcw.evaluation import evaluate_method
from attnfcw.methods import DISPLAY_NAMES, FORECASTER_NAMES, METHOD_NAMES, make_forecaster, make_method
from attnfcw.synthgen import build_suite
from attnfcw.warning import FcwParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-per-kind", type=int, default=25)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--forecaster", choices=[f for f in FORECASTER_NAMES if f != "external"],
                    default="constant_velocity")
    args = ap.parse_args()

    params = FcwParams()
    suite = build_suite(args.n_per_kind, seed=args.seed, params=params)
    episodes = [s.episode for s in suite]
    n_pos = sum(s.label for s in suite)
    print(f"{len(episodes)} episodes, {n_pos} need a warning, {len(episodes) - n_pos} do not\n")

    forecaster = make_forecaster(args.forecaster, params)
    print(f"{'Model':<24}{'UAR':>7}{'TPR':>7}{'TNR':>7}   FCW buffer (# correct)")
    for name in METHOD_NAMES:
        r = evaluate_method(episodes, make_method(name, forecaster), params, name=name)
        buf = "n/a" if r.buffer_mean is None else f"{r.buffer_mean:.3f}"
        print(f"{DISPLAY_NAMES[name]:<24}{r.uar:>7.3f}{r.tpr:>7.3f}{r.tnr:>7.3f}   {buf} ({r.buffer_n})")


if __name__ == "__main__":
    main()
