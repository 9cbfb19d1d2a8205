"""
Frechet distance between feature populations
=============================================

FID fits a Gaussian to each feature set and measures the distance between
the two. Any extractor works; ``builtin_features`` is a small
deterministic one, and Inception features can be loaded from files.
"""

import numpy as np

from srx.fid import FeatureSet, builtin_features, fid_from_features, write_features, read_features

rng = np.random.default_rng(1)
a = FeatureSet(rng.normal(0.0, 1.0, size=(500, 8)))
b = FeatureSet(rng.normal(0.0, 1.0, size=(500, 8)))
c = FeatureSet(rng.normal(0.5, 1.5, size=(500, 8)))

print(f"same distribution:    {fid_from_features(a, b):.3f}")
print(f"shifted and widened:  {fid_from_features(a, c):.3f}")

# builtin 64-d descriptor of an image
img = rng.random((64, 64, 3))
print(builtin_features(img)[:4].round(4))

# interchange format round trip
write_features(c, "/tmp/srx_demo.srxf")
print(read_features("/tmp/srx_demo.srxf").rows.shape)
