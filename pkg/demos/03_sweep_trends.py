"""Reproduce both experiment sweeps at a small scale and print the trends.

Sweep one grows the topology while the workload stays fixed (nested mode,
so each larger topology literally extends the smaller one): cost can only
fall or stay flat.  Sweep two adds chains on a fixed 8-cloud topology:
cost climbs.  With only a handful of repetitions the delay trend is noisy;
the acceptance suite runs the full protocol.  CSV files land next to this
script.

    python3 demos/03_sweep_trends.py
"""

from pathlib import Path

from sfcplace import Budget, GenConfig, run_sweep, trend_rho, write_rows_csv, write_summary_csv

OUT = Path(__file__).parent
BUDGET = Budget(max_nodes=60_000)


def show(sweep, label):
    print(f"--- {label} ---")
    print("axis  reps  infeas  timeout  mean_cost  ci95  mean_delay_ms")
    for s in sweep.summary:
        print(f"{s.axis_value:>4}  {s.n_repetitions:>4}  {s.infeasible_count:>6}"
              f"  {s.timeout_count:>7}  {s.mean_cost:>9.2f}  {s.ci95_cost:>4.2f}"
              f"  {s.mean_delay_ms:>6.2f}")
    xs = [s.axis_value for s in sweep.summary]
    rho_c = trend_rho(xs, [s.mean_cost for s in sweep.summary])
    rho_d = trend_rho(xs, [s.mean_delay_ms for s in sweep.summary])
    print(f"spearman rho: cost {rho_c:+.2f}, delay {rho_d:+.2f}")
    print()


def main():
    edges = run_sweep("edges", [4, 6, 8], repetitions=5,
                      config=GenConfig(seed=0, n_sfcs=3), budget=BUDGET, nested=True)
    show(edges, "growing the topology (nested)")
    write_rows_csv(edges.rows, OUT / "edges_reps.csv")
    write_summary_csv(edges.summary, OUT / "edges_summary.csv")

    sfcs = run_sweep("sfcs", [1, 2, 3], repetitions=5,
                     config=GenConfig(seed=0, n_clouds=8), budget=BUDGET)
    show(sfcs, "adding service chains")
    write_rows_csv(sfcs.rows, OUT / "sfcs_reps.csv")
    write_summary_csv(sfcs.summary, OUT / "sfcs_summary.csv")
    print(f"per-repetition CSVs written to {OUT}")


if __name__ == "__main__":
    main()
