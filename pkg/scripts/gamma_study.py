"""MSE of the constant-intensity estimators across the coordinate-power family.

Runs the gamma study for the Poisson, LGCP and DPP models and prints, for every
retention probability, the MSE-optimal gamma of both combiners.

    python3 scripts/gamma_study.py --replicates 100
"""
from collections import defaultdict

from _common import metrics, parser, run


def main() -> None:
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--models", nargs="+", default=["poisson", "lgcp", "dpp"])
    args = p.parse_args()
    for model in args.models:
        rows = run(f"gamma_{model}.json", args)
        mse = defaultdict(dict)
        for r in metrics(rows):
            est, kind = r["name"].split(".")
            if kind == "mse" and est in ("theta_1", "theta_23"):
                gamma = float(r["test_fn"].split("=")[1])
                mse[(r["p"], est)][gamma] = r["value"]
        print(f"\n{model}: MSE-optimal gamma per p")
        print(f"{'p':>5} {'theta_1':>10} {'mse':>10} {'theta_23':>10} {'mse':>10}")
        for pv in sorted({k[0] for k in mse}):
            cells = []
            for est in ("theta_1", "theta_23"):
                curve = mse[(pv, est)]
                g = min(curve, key=curve.get)
                cells += [f"{g:10.1f}", f"{curve[g]:10.2f}"]
            print(f"{pv:5.1f} " + " ".join(cells))


if __name__ == "__main__":
    main()
