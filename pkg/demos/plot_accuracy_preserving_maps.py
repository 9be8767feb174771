"""
Accuracy-preserving maps on the simplex
=======================================

Apply one increasing function to every entry of a prediction, then
renormalize. The class ranking cannot change, so neither can accuracy.
"""

import numpy as np

from calibkit.simplex import apply_accuracy_preserving, argmax_class, top_label_reduce, LabeledDataset

z = np.array([0.5, 0.3, 0.2])

# squaring sharpens, the square root flattens
sharp = apply_accuracy_preserving(np.square, z)
flat = apply_accuracy_preserving(np.sqrt, z)
print("input      ", z)
print("g(a) = a^2 ", sharp.round(4))
print("g(a) = √a  ", flat.round(4))
print("argmax kept:", argmax_class(z) == argmax_class(sharp) == argmax_class(flat))

# a batch of random predictions, 10k rows
rng = np.random.default_rng(0)
Z = rng.dirichlet(np.ones(4), size=10_000)
out = apply_accuracy_preserving(lambda a: np.log1p(50 * a), Z)
print("rows whose argmax moved:", int(np.sum(argmax_class(out) != argmax_class(Z))))

# reductions used by the estimators: top label keeps max(z) and a hit/miss bit
data = LabeledDataset([[0.9, 0.1], [0.3, 0.7], [0.6, 0.4]], [0, 0, 0])
red = top_label_reduce(data)
print("top-label confidences", red.confidences, "outcomes", red.outcomes)
