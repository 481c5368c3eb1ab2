#!/usr/bin/env python3
"""Plot the CSV files written by `synth run`.

Usage: plot.py OUTPUT_DIR [--save FILE]
"""
import argparse
import pathlib

import matplotlib.pyplot as plt
import pandas as pd


def plot_trajectories(df, ax):
    for (controller, _), run in df.groupby(["controller", "run_id"]):
        ax.plot(run["t"], run["y"], color="tab:blue" if controller == "nominal" else "tab:orange", alpha=0.3)
    ax.set_xlabel("t")
    ax.set_ylabel("y")
    ax.set_title("rollouts (blue nominal, orange robust)")


def plot_s_curve(df, ax):
    finite = df[df["feasible"] == 1]
    ax.plot(finite["eps_inf"], finite["S"], "o-")
    for e in df[df["feasible"] == 0]["eps_inf"]:
        ax.axvline(e, color="0.85", zorder=0)
    ax.set_xlabel("eps_inf")
    ax.set_ylabel("S")


def plot_estimators(df, ax):
    for est, rows in df.groupby("estimator"):
        ax.plot(rows["sigma"], rows["eps2_p90"], "o-", label=f"{est} eps2")
        ax.plot(rows["sigma"], rows["eps_inf_p90"], "s--", label=f"{est} eps_inf")
    ax.set_xlabel("noise variance")
    ax.set_ylabel("90th percentile error")
    ax.legend()


def plot_subopt(df, ax):
    for rho, rows in df.groupby("rho"):
        ax.loglog(rows["eps2"], rows["gap"], "o-", label=f"rho={rho:g}")
    ax.set_xlabel("eps2")
    ax.set_ylabel("suboptimality gap")
    ax.legend()


PLOTTERS = {
    "trajectories.csv": plot_trajectories,
    "s_curve.csv": plot_s_curve,
    "estimator_errors.csv": plot_estimators,
    "subopt.csv": plot_subopt,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output_dir", type=pathlib.Path)
    parser.add_argument("--save", type=pathlib.Path)
    args = parser.parse_args()

    found = [(name, fn) for name, fn in PLOTTERS.items() if (args.output_dir / name).exists()]
    if not found:
        raise SystemExit(f"no known CSV files in {args.output_dir}")
    fig, axes = plt.subplots(1, len(found), figsize=(5 * len(found), 4), squeeze=False)
    for ax, (name, fn) in zip(axes[0], found):
        fn(pd.read_csv(args.output_dir / name, na_values=[], keep_default_na=False), ax)
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()
