"""
Command-line workflow
=====================

Export a prediction file, fit a map on it, and evaluate the map. Every
step writes a file, and rerunning a step reproduces it byte for byte.
"""

import json
import tempfile
from pathlib import Path

from calibkit.cli import main

work = Path(tempfile.mkdtemp())
preds = work / "preds.csv"

main(["synth", "--beta0", "0.5", "--beta1", "-1.5", "--n", "4000", "--seeds", "0",
      "--output", str(preds)])
print(preds.read_text().splitlines()[:3])

main(["calibrate", "--input", str(preds), "--method", "ts", "--output", str(work / "ts.json")])
print(json.loads((work / "ts.json").read_text()))

main(["evaluate", "--input", str(preds), "--map", str(work / "ts.json"),
      "--beta0", "0.5", "--beta1", "-1.5", "--output", str(work / "report.json")])
report = json.loads((work / "report.json").read_text())
print("gain", report["map"]["gain"])
print("ground truth ECE^1 of the raw file", round(report["ground_truth_pi"]["ece1"] / 2, 4))
for before, after in zip(report["estimates"], report["map"]["estimates"]):
    if before["d"] == 1:
        print(f'{before["reduction"]:9s} {before["estimator"]:9s} raw {before["value"]:.4f}  after {after["value"]:.4f}')
