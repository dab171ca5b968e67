"""Analytic and measured cost versus N in {32, 64, 128, 256}, with log-log slopes."""

import csv
from collections import defaultdict

from _common import parser, run
from risbeam.complexity import loglog_slope

if __name__ == "__main__":
    args = parser(__doc__, default_realizations=3).parse_args()
    paths = run("complexity_sweep", args)
    rows = defaultdict(list)
    with open(paths["costs"], newline="") as fh:
        for r in csv.DictReader(fh):
            rows[r["method"]].append((int(r["N"]), float(r["analytic_cost"]), float(r["measured_units"])))
    print()
    print(f"{'method':<15}{'analytic slope':>16}{'measured slope':>16}")
    for method, pts in rows.items():
        ns = [p[0] for p in pts]
        print(
            f"{method:<15}{loglog_slope(ns, [p[1] for p in pts]):>16.3f}"
            f"{loglog_slope(ns, [p[2] for p in pts]):>16.3f}"
        )
