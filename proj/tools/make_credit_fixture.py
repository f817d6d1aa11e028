#!/usr/bin/env python3
# Copyright 2026 The UP-AR Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes tests/data/credit/credit.csv, a german-credit-like loan table.

Marginals are skewed like real loan data (log-normal amounts, durations on a
monthly grid, imbalanced binary flags). Labels come from a noisy logistic
rule so that roughly 30% of applicants are denied.
"""

import argparse
import csv

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data/credit/credit.csv")
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20260101)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    n = args.n

    sex = rng.binomial(1, 0.69, n)
    age = np.clip(np.round(rng.gamma(2.0, 8.0, n) + 19), 19, 75)
    duration = np.clip(np.round(rng.lognormal(2.85, 0.5, n) / 3) * 3, 4, 72)
    amount = np.clip(np.round(np.exp(rng.normal(7.8, 0.75, n) + 0.02 * (duration - 20))), 250, 18424)
    savings = np.clip(np.round(rng.exponential(900.0, n)), 0, 10000)
    residence = rng.integers(1, 5, n)
    critical = rng.binomial(1, 0.29, n)
    guarantor = rng.binomial(1, 0.05, n)
    coapplicant = rng.binomial(1, 0.04, n)

    score = (1.75 - 0.045 * duration - 0.00012 * amount + 0.012 * (age - 35)
             + 0.0004 * savings + 0.7 * critical + 1.1 * guarantor + 0.9 * coapplicant
             + 0.15 * sex - 0.05 * residence)
    p = 1.0 / (1.0 + np.exp(-score))
    label = rng.binomial(1, p)

    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["Sex", "Age", "YearsAtResidence", "Savings", "LoanDuration", "LoanAmount",
                    "CriticalAccountOrLoansElsewhere", "HasGuarantor", "HasCoapplicant",
                    "GoodCustomer"])
        for i in range(n):
            w.writerow([sex[i], int(age[i]), residence[i], int(savings[i]), int(duration[i]),
                        int(amount[i]), critical[i], guarantor[i], coapplicant[i], label[i]])


if __name__ == "__main__":
    main()
