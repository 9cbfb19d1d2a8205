"""Brute-force reference implementations used only by the tests.

Each oracle follows its formula literally with explicit loops and shares
no code with the kernels it checks.
"""

import math

import numpy as np


def bilinear_oracle(img, out_h, out_w):
    h, w, c = img.shape
    out = np.zeros((out_h, out_w, c))
    for y in range(out_h):
        sy = min(max((y + 0.5) * h / out_h - 0.5, 0.0), h - 1)
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, h - 1)
        wy = sy - y0
        for x in range(out_w):
            sx = min(max((x + 0.5) * w / out_w - 0.5, 0.0), w - 1)
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, w - 1)
            wx = sx - x0
            for k in range(c):
                v = ((1 - wy) * (1 - wx) * img[y0, x0, k] + (1 - wy) * wx * img[y0, x1, k]
                     + wy * (1 - wx) * img[y1, x0, k] + wy * wx * img[y1, x1, k])
                out[y, x, k] = min(max(v, 0.0), 1.0)
    return out


def nearest_oracle(img, out_h, out_w):
    h, w, c = img.shape
    out = np.zeros((out_h, out_w, c))
    for y in range(out_h):
        sy = min(int(math.floor((y + 0.5) * h / out_h)), h - 1)
        for x in range(out_w):
            sx = min(int(math.floor((x + 0.5) * w / out_w)), w - 1)
            out[y, x] = img[sy, sx]
    return out


def rmse_oracle(a, b):
    total = 0.0
    count = 0
    for idx in np.ndindex(a.shape):
        total += (a[idx] - b[idx]) ** 2
        count += 1
    return math.sqrt(total / count)


def mae_oracle(a, b):
    total = 0.0
    count = 0
    for idx in np.ndindex(a.shape):
        total += abs(a[idx] - b[idx])
        count += 1
    return total / count


def ncc_oracle(a, b):
    xs = [float(v) for v in a.ravel()]
    ys = [float(v) for v in b.ravel()]
    mx = math.fsum(xs) / len(xs)
    my = math.fsum(ys) / len(ys)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def gaussian_2d(size=11, sigma=1.5):
    w = np.zeros((size, size))
    c = size // 2
    for i in range(size):
        for j in range(size):
            w[i, j] = math.exp(-((i - c) ** 2 + (j - c) ** 2) / (2 * sigma**2))
    return w / w.sum()


def ssim_oracle(a, b, size=11, sigma=1.5, k1=0.01, k2=0.03, data_range=1.0):
    """Naive sliding-window SSIM: every valid window, stats from centred sums."""
    w = gaussian_2d(size, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    h, wd, ch = a.shape
    per_channel = []
    for k in range(ch):
        vals = []
        for y in range(h - size + 1):
            for x in range(wd - size + 1):
                pa = a[y:y + size, x:x + size, k]
                pb = b[y:y + size, x:x + size, k]
                mu_a = np.sum(w * pa)
                mu_b = np.sum(w * pb)
                var_a = np.sum(w * (pa - mu_a) ** 2)
                var_b = np.sum(w * (pb - mu_b) ** 2)
                cov = np.sum(w * (pa - mu_a) * (pb - mu_b))
                vals.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                            / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)))
        per_channel.append(sum(vals) / len(vals))
    return sum(per_channel) / len(per_channel)


def ssim_constant_closed_form(u, v, k1=0.01, k2=0.03, data_range=1.0):
    """SSIM of two constant images: only the luminance term survives."""
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    return ((2 * u * v + c1) * c2) / ((u * u + v * v + c1) * c2)


def covariance_oracle(rows):
    n, d = rows.shape
    mean = [sum(rows[i, j] for i in range(n)) / n for j in range(d)]
    cov = np.zeros((d, d))
    for p in range(d):
        for q in range(d):
            cov[p, q] = sum((rows[i, p] - mean[p]) * (rows[i, q] - mean[q]) for i in range(n)) / (n - 1)
    return np.array(mean), cov


def diagonal_fid_oracle(mu1, var1, mu2, var2):
    return sum((a - b) ** 2 + (math.sqrt(s) - math.sqrt(t)) ** 2 for a, b, s, t in zip(mu1, mu2, var1, var2))


def binning_oracle(values, lo, hi, bins):
    edges = [lo + (hi - lo) * k / bins for k in range(bins + 1)]
    counts = [0] * bins
    for v in values:
        for k in range(bins):
            last = k == bins - 1
            if edges[k] <= v < edges[k + 1] or (last and v == edges[bins]):
                counts[k] += 1
                break
    return counts


def builtin_features_oracle(img):
    """Straight-line evaluation of the builtin 64-d FID descriptor."""
    from scipy.fft import dctn

    h, w, c = img.shape
    gray = np.zeros((h, w, 1))
    for y in range(h):
        for x in range(w):
            if c == 1:
                gray[y, x, 0] = img[y, x, 0]
            else:
                gray[y, x, 0] = min(0.299 * img[y, x, 0] + 0.587 * img[y, x, 1] + 0.114 * img[y, x, 2], 1.0)
    small = bilinear_oracle(gray, 16, 16)[:, :, 0]
    means, stds = [], []
    for cy in range(4):
        for cx in range(4):
            cell = [small[cy * 4 + i, cx * 4 + j] for i in range(4) for j in range(4)]
            m = sum(cell) / 16
            means.append(m)
            stds.append(math.sqrt(sum((v - m) ** 2 for v in cell) / 16))
    spectrum = np.abs(dctn(small, type=2, norm="ortho")).ravel()[:32]
    return np.array(means + stds + list(spectrum))
