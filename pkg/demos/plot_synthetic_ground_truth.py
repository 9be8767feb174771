"""
Synthetic classifiers with a known calibration function
=======================================================

Two unit-variance Gaussians give a closed-form posterior. A logistic
classifier family on the same feature has a calibration function that
can be written down, so the true calibration error is a plain
Monte Carlo average.
"""

import numpy as np

from calibkit import synthetic

z = np.linspace(0.05, 0.95, 7)
for name, beta in [("calibrated", synthetic.CALIBRATED), ("case 1", synthetic.CASE_1),
                   ("case 2", synthetic.CASE_2)]:
    clf = synthetic.SyntheticClassifier(*beta)
    pi = synthetic.canonical_pi(z, clf)
    g1 = synthetic.ground_truth(clf, 1, 10**5, seed=0)
    print(f"{name:10s} pi(z) = {np.round(pi, 3)}   ECE^1 ≈ {g1.value:.4f}")

# empirical check: bin sampled predictions and compare label frequency with pi
clf = synthetic.SyntheticClassifier(*synthetic.CASE_1)
data = synthetic.sample(200_000, clf, seed=3)
z1 = data.probs[:, 0]
for c in (0.3, 0.5, 0.7):
    near = np.abs(z1 - c) < 0.01
    print(f"z1≈{c}: freq {np.mean(data.labels[near] == 0):.3f}   pi {synthetic.canonical_pi(c, clf):.3f}")
