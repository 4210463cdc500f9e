"""Score a detection run against ground truth and build the ROC curve.

An alarm counts as a correct detection when it lands within a toleration
distance of its nearest change point, and each change point can be claimed
only once.  The ROC sweeps the score threshold through every achieved value.
"""

import numpy as np

from aecpd.datagen import gen_scaling_variance
from aecpd.evaluation import corpus_auc, match_alarms, roc_auc
from aecpd.pipeline import RunSettings, run_pipeline

delta = 15
aucs = []
for seed in range(3):
    ts = gen_scaling_variance(seed)
    res = run_pipeline(ts, RunSettings(window_size=20, mode="fd", epochs=60,
                                       seed=seed))
    roc = roc_auc(res.scores, ts.change_points, delta)
    aucs.append(roc.auc)

    peaks = res.scores.stamps[res.scores.values > 0]
    report = match_alarms(ts.change_points, peaks, delta)
    print(f"seed {seed}: {report.n_alarms} alarms, "
          f"{report.n_correct}/{report.n_gt} changes found at threshold 0, "
          f"auc={roc.auc:.4f}")

    if seed == 0:
        print("    tau      fpr    tpr")
        for tau, fpr, tpr in roc.points[:: len(roc.points) // 8][:8]:
            print(f"    {tau:7.4f} {fpr:6.3f} {tpr:6.3f}")

mean, se = corpus_auc(aucs)
print(f"\ncorpus: mean auc {mean:.4f} (standard error {se:.4f})")
