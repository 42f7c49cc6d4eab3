"""Independent reference implementations used to validate the package.

Everything here is deliberately written in the most transparent possible
style (exact rational arithmetic, nested loops, scalar recursions) and
shares no code with the implementations under test.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def rodrigues_assoc_legendre(n: int, m: int, x: float) -> float:
    """Associated Legendre P_n^m via term-by-term Rodrigues differentiation.

    Builds the polynomial (x^2 - 1)^n with exact rational coefficients,
    differentiates it n+m times, and evaluates
    ``(-1)^m (1-x^2)^{m/2} / (2^n n!) * d^{n+m}/dx^{n+m} (x^2-1)^n``.
    """
    # coefficients of (x^2 - 1)^n, degree 2n, exact
    coeffs = [Fraction(0)] * (2 * n + 1)
    for k in range(n + 1):
        coeffs[2 * k] = Fraction(math.comb(n, k) * (-1) ** (n - k))
    # differentiate n + m times
    for _ in range(n + m):
        coeffs = [coeffs[i] * i for i in range(1, len(coeffs))] or [Fraction(0)]
    poly = sum(float(c) * x**i for i, c in enumerate(coeffs))
    scale = poly / (2.0**n * math.factorial(n))
    return (-1.0) ** m * (1.0 - x * x) ** (m / 2.0) * scale


def direct_frequency_convolution(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Nested-loop frequency-axis convolution (torch cross-correlation order).

    x: (T, F, Cin); weight: (Cout, Cin, K); bias: (Cout,).  Zero padding of
    (K-1)/2 on the frequency axis; output (T, F, Cout).
    """
    t_len, f_len, cin = x.shape
    cout, cin_w, k = weight.shape
    assert cin == cin_w and k % 2 == 1
    pad = k // 2
    out = np.zeros((t_len, f_len, cout))
    for t in range(t_len):
        for f in range(f_len):
            for co in range(cout):
                acc = bias[co]
                for ci in range(cin):
                    for j in range(k):
                        src = f + j - pad
                        if 0 <= src < f_len:
                            acc += x[t, src, ci] * weight[co, ci, j]
                out[t, f, co] = acc
    return out


def scalar_lstm_cell(x, w_ih, w_hh, b_ih, b_hh, h0=0.0, c0=0.0):
    """One LSTM step on scalars, gate order (input, forget, cell, output)."""

    def sigmoid(v):
        return 1.0 / (1.0 + math.exp(-v))

    gates = [w_ih[j] * x + b_ih[j] + w_hh[j] * h0 + b_hh[j] for j in range(4)]
    i, f, g, o = sigmoid(gates[0]), sigmoid(gates[1]), math.tanh(gates[2]), sigmoid(gates[3])
    c = f * c0 + i * g
    h = o * math.tanh(c)
    return h, c


def direct_time_convolution(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """O(S*K) full linear convolution by explicit summation."""
    out = np.zeros(x.size + h.size - 1)
    for i in range(x.size):
        for j in range(h.size):
            out[i + j] += x[i] * h[j]
    return out


def reference_stoi(clean: np.ndarray, degraded: np.ndarray) -> float:
    """Loop-based second implementation of the intelligibility metric.

    Same definition as ``sphear.metrics.stoi`` (16 kHz input, 512/256
    framing, 15 one-third-octave bands from 150 Hz, 24-frame segments,
    -15 dB clipping, 40 dB silence threshold), structured as per-item
    loops with per-frame DFTs.
    """
    frame, hop, nfft = 512, 256, 512
    n_bands, lowest, seg_len = 15, 150.0, 24
    clip = 1.0 + 10.0 ** (15.0 / 20.0)

    n = min(clean.size, degraded.size)
    clean, degraded = clean[:n], degraded[:n]
    window = np.hanning(frame + 2)[1:-1]

    frames_x, frames_y, energies = [], [], []
    start = 0
    while start + frame <= n:
        fx = clean[start : start + frame] * window
        fy = degraded[start : start + frame] * window
        frames_x.append(fx)
        frames_y.append(fy)
        energies.append(float(np.sum(fx * fx)))
        start += hop
    threshold = max(energies) * 10.0 ** (-40.0 / 10.0)

    # band edges
    centers = [lowest * 2 ** (k / 3.0) for k in range(n_bands)]
    freqs = [i * 16000.0 / nfft for i in range(nfft // 2 + 1)]

    env_x, env_y = [], []
    for fx, fy, e in zip(frames_x, frames_y, energies):
        if e <= threshold:
            continue
        sx = np.fft.rfft(fx, nfft)
        sy = np.fft.rfft(fy, nfft)
        bx, by = [], []
        for c in centers:
            lo, hi = c / 2 ** (1 / 6.0), c * 2 ** (1 / 6.0)
            px = sum(abs(sx[i]) ** 2 for i, f in enumerate(freqs) if lo <= f < hi)
            py = sum(abs(sy[i]) ** 2 for i, f in enumerate(freqs) if lo <= f < hi)
            bx.append(math.sqrt(px))
            by.append(math.sqrt(py))
        env_x.append(bx)
        env_y.append(by)

    env_x, env_y = np.array(env_x), np.array(env_y)
    values = []
    for end in range(seg_len, env_x.shape[0] + 1):
        for band in range(n_bands):
            x_seg = env_x[end - seg_len : end, band]
            y_seg = env_y[end - seg_len : end, band]
            ny = np.linalg.norm(y_seg)
            scale = np.linalg.norm(x_seg) / ny if ny > 0 else 0.0
            y_adj = np.minimum(y_seg * scale, clip * x_seg)
            xc = x_seg - x_seg.mean()
            yc = y_adj - y_adj.mean()
            denom = np.linalg.norm(xc) * np.linalg.norm(yc)
            if denom > 0:
                values.append(float(np.dot(xc, yc) / denom))
    return min(1.0, max(0.0, float(np.mean(values))))
