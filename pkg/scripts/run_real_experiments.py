#!/usr/bin/env python3
"""Run the census/marketing experiments against locally provided UCI files.

Expects under --data-dir:

* ``adult.all`` (the census train and test portions concatenated), or the
  original ``adult.data`` plus ``adult.test``;
* ``bank-additional-full.csv``.

Runs, for each dataset, a fairness-constrained threshold sweep (c = a * c*)
over 5 random 70/30 splits, plus the gamma and fine-grained sweeps, and for
the census data the non-binary (race) and two-attribute (gender+race) sweeps.
Nothing is downloaded; point --data-dir at the files you fetched yourself.
"""

import argparse
from pathlib import Path

from fairclf.data import SplitPlan
from fairclf.sweep import ExperimentConfig, emit_results, run_sweep

A_GRID = (1.0, 0.8, 0.6, 0.4, 0.2, 0.1, 0.0)
GAMMA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)


def adult_path(data_dir: Path) -> Path | None:
    combined = data_dir / "adult.all"
    if combined.exists():
        return combined
    train, test = data_dir / "adult.data", data_dir / "adult.test"
    if train.exists() and test.exists():
        combined.write_text(train.read_text() + test.read_text())
        return combined
    return None


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", default="data")
    parser.add_argument("--out", default="results/real")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    data_dir = Path(args.data_dir)
    out = Path(args.out)
    split = SplitPlan(train_fraction=0.7, repeats=args.repeats, seed=args.seed)

    adult = adult_path(data_dir)
    if adult is None:
        print(f"census files not found under {data_dir}; skipping those experiments")
    else:
        for choice, label in (("gender", "gender"), ("race", "race"), ("gender+race", "gender_race")):
            config = ExperimentConfig(
                dataset={"kind": "adult", "path": str(adult), "sensitive_choice": choice},
                classifier="logreg",
                mode="fairness_constrained",
                split=split,
                a_factors=A_GRID,
            )
            emit_results(run_sweep(config), out / f"adult_{label}_fairness_lr")
            print(f"census fairness sweep ({choice}) done")
        for mode, protect in (("accuracy_constrained", 1), ("fine_grained", 0)):
            config = ExperimentConfig(
                dataset={"kind": "adult", "path": str(adult), "sensitive_choice": "gender"},
                classifier="logreg",
                mode=mode,
                split=split,
                gammas=GAMMA_GRID,
                protect_group=protect,
            )
            emit_results(run_sweep(config), out / f"adult_gender_{mode}")
            print(f"census {mode} sweep done")

    bank = data_dir / "bank-additional-full.csv"
    if not bank.exists():
        print(f"{bank} not found; skipping the marketing experiments")
    else:
        config = ExperimentConfig(
            dataset={"kind": "bank", "path": str(bank)},
            classifier="logreg",
            mode="fairness_constrained",
            split=split,
            a_factors=A_GRID,
        )
        emit_results(run_sweep(config), out / "bank_fairness_lr")
        print("marketing fairness sweep done")
        for mode, protect in (("accuracy_constrained", 1), ("fine_grained", 0)):
            config = ExperimentConfig(
                dataset={"kind": "bank", "path": str(bank)},
                classifier="logreg",
                mode=mode,
                split=split,
                gammas=GAMMA_GRID,
                protect_group=protect,
            )
            emit_results(run_sweep(config), out / f"bank_{mode}")
            print(f"marketing {mode} sweep done")


if __name__ == "__main__":
    main()
