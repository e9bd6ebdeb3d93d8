"""Learning on streams with signature features.

Two classes of 2-D streams share every marginal statistic and differ only
in temporal ordering (which coordinate leads).  Depth-4 signature features
expose the planted Levy-area drift; LASSO shrinks the linear functional
onto a few coordinates, and the two-class report mirrors the classic
KS / ROC / accuracy evaluation.  A conditional-law regression then learns
the map from input signatures to expected output signatures.
"""

import numpy as np

from sigstream import Stream, featurize, fit_lasso, score_and_report, two_class_streams
from sigstream.learn import (
    coordinate_r2,
    fit_conditional_law,
    lasso_max_penalty,
    stability_selection,
)

print("=== Synthetic two-class stream task ===")
train_streams, train_labels = two_class_streams(250, n_steps=64, strength=0.7, seed=41)
test_streams, test_labels = two_class_streams(250, n_steps=64, strength=0.7, seed=42)
X_train = featurize(train_streams, 4)
X_test = featurize(test_streams, 4)
print(f"  {len(train_streams)} training streams, {X_train.X.shape[1]} features (depth 4)")

lam = 0.05 * lasso_max_penalty(X_train, train_labels.astype(float))
model = fit_lasso(X_train, train_labels.astype(float), lam)
active = [str(X_train.words[j]) for j in model.active_set]
print(f"  LASSO keeps {len(active)} of {X_train.X.shape[1] - 1} features: {active}")

rep_learn, rep_test = score_and_report(model, X_train, train_labels, X_test, test_labels)
print(f"  learning set: KS = {rep_learn.ks:.3f}, AUC = {rep_learn.auc:.3f}, "
      f"accuracy = {rep_learn.accuracy:.3f}")
print(f"  out of sample: KS = {rep_test.ks:.3f}, AUC = {rep_test.auc:.3f}, "
      f"accuracy = {rep_test.accuracy:.3f}")
print("  The words 1,2 and 2,1 dominate: the classes differ exactly in the")
print("  order of moves, which is what the Levy area measures.\n")

print("=== Stability selection over subsamples ===")
freq = stability_selection(X_train, train_labels.astype(float), lam, n_rounds=40, seed=3)
top = np.argsort(-freq)[:4]
for j in top:
    print(f"  word {str(X_train.words[j + 1]):>8s}: selected in {100 * freq[j]:.0f}% of refits")
print()

print("=== Conditional law: predicting output signatures ===")
rng = np.random.default_rng(9)
inputs = [
    Stream(np.linspace(0, 1, 9), 0.6 * rng.standard_normal((9, 2)).cumsum(axis=0))
    for _ in range(80)
]
# output runs the same trace at double speed: signatures are unchanged
pairs = [(s, Stream(0.5 * s.times, s.points)) for s in inputs]
law = fit_conditional_law(pairs, depth_in=3, depth_out=3, lam=0.0)
fresh = [
    Stream(np.linspace(0, 1, 9), 0.6 * rng.standard_normal((9, 2)).cumsum(axis=0))
    for _ in range(40)
]
pred = law.predict(fresh)
truth = featurize([Stream(0.5 * s.times, s.points) for s in fresh], 3).X
r2 = coordinate_r2(truth, pred)
print(f"  reparameterised coupling: min coordinate R^2 = {np.nanmin(r2):.6f}")
print("  Signatures ignore time changes, so the learned map is the identity")
print("  on signature coordinates and generalises perfectly.")
