"""Hard-core fitting: CV innovations against the pseudolikelihood baseline.

    python3 scripts/hardcore_study.py --replicates 100 --threads 1
"""
from _common import metrics, parser, run


def main() -> None:
    args = parser(__doc__.splitlines()[0]).parse_args()
    rows = run("hardcore.json", args)
    print(f"{'method':<18} {'param':<5} {'|bias|':>10} {'variance':>12} {'mse':>12}")
    table = {}
    for r in metrics(rows):
        est, kind = r["name"].split(".")
        label = r["selector"] if r["selector"] != "ppl" else f"ppl-{r['loss']}-{r['test_fn']}"
        table.setdefault((label, est), {})[kind] = r["value"]
    for (label, est), m in sorted(table.items()):
        print(f"{label:<18} {est:<5} {m['abs_bias']:10.5f} {m['variance']:12.5f} {m['mse']:12.5f}")


if __name__ == "__main__":
    main()
