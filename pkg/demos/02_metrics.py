"""
Full-reference metrics
======================

RMSE and MAE are lower-better; SSIM and NCC are higher-better.
"""

import numpy as np

from srx.metrics import METRICS

rng = np.random.default_rng(0)
reference = rng.random((48, 48, 3))
noisy = np.clip(reference + rng.normal(0, 0.1, reference.shape), 0, 1)
darker = reference * 0.5

for label, candidate in [("identical", reference), ("noisy", noisy), ("darker", darker)]:
    scores = [METRICS[name](candidate, reference) for name in METRICS]
    print(f"{label:>9}: " + "  ".join(f"{m.name} {m.direction.arrow} {m.value:.3f}" for m in scores))

# NCC ignores a global gain, so the darker copy still scores 1
print(METRICS["NCC"](darker, reference).value)
