"""Small heavy-tailed design (n=400, p=40 Pareto covariates): coverage of
boot-t intervals with known and estimated signal strength.

The published protocol uses --n-reps 10000; the default here finishes in
minutes and reproduces the same coverage levels to Monte Carlo accuracy.
"""

import argparse

from resizedboot import named_design, run_coverage


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-reps", type=int, default=500)
    ap.add_argument("--B", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--levels", type=float, nargs="+", default=[0.95, 0.9, 0.8])
    ap.add_argument("--estimated-gamma", action="store_true",
                    help="estimate gamma per repetition instead of using truth")
    args = ap.parse_args()

    report = run_coverage(
        named_design("pareto-small", seed=args.seed),
        methods=("boot-t",),
        levels=args.levels,
        n_reps=args.n_reps,
        B=args.B,
        seed=args.seed,
        gamma_mode="estimated" if args.estimated_gamma else "known",
    )
    print(report.format_table())


if __name__ == "__main__":
    main()
