"""Kernel bandwidth selection: MISE of the CV selectors and the CvL baseline.

    python3 scripts/bandwidth_study.py --replicates 100
"""
from _common import metrics, parser, run


def main() -> None:
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--models", nargs="+", default=["lgcp", "poisson", "dpp"])
    args = p.parse_args()
    for model in args.models:
        rows = run(f"bandwidth_{model}.json", args)
        print(f"\n{model}")
        print(f"{'selector':<32} {'IAB':>10} {'ISB':>10} {'IV':>10} {'MISE':>10}")
        table = {}
        for r in metrics(rows):
            label = r["selector"]
            if r["cv"]:
                label += f" {r['cv']}(p={r['p']:g},k={r['k']})"
            if r["loss"]:
                label += f" {r['loss']}"
            table.setdefault(label, {})[r["name"]] = r["value"]
        for label, m in table.items():
            print(f"{label:<32} {m['iab']:10.2f} {m['isb']:10.2f} {m['iv']:10.2f} {m['mise']:10.2f}")


if __name__ == "__main__":
    main()
