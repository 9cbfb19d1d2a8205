"""
Resize kernels
==============

The harness uses two resizes: bilinear for synthesizing the low-resolution
night input, nearest-neighbour for bringing it back to ground-truth size.
Both place pixel centres at half-integer coordinates.
"""

import numpy as np

from srx.imaging import resize_bilinear, resize_nearest

# a 4x4 ramp
img = (np.arange(16).reshape(4, 4) / 15.0)[:, :, None]
print(img[:, :, 0].round(3))

# bilinear 2x2: each output averages a 2x2 block
small = resize_bilinear(img, 2, 2)
print(small[:, :, 0].round(3))

# nearest x2 replicates every pixel into a 2x2 block
print(resize_nearest(small, 4, 4)[:, :, 0].round(3))

# the round trip is lossy; this is the gap a super-resolution stage closes
err = np.abs(resize_nearest(small, 4, 4) - img).mean()
print(f"mean abs error after 2x down/up: {err:.3f}")
