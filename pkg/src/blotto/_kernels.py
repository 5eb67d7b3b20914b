"""Compiled inner loops for the partition DP and backward sampling.

All arrays are log-domain; ``log_w[j, m] = L(j, m) * ln(beta)``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def log_partition(log_w):
    k, width = log_w.shape
    out = np.empty((k, width))
    for m in range(width):
        out[0, m] = log_w[0, m]
    for j in range(1, k):
        for r in range(width):
            peak = -np.inf
            for y in range(r + 1):
                t = log_w[j, y] + out[j - 1, r - y]
                if t > peak:
                    peak = t
            acc = 0.0
            for y in range(r + 1):
                acc += math.exp(log_w[j, y] + out[j - 1, r - y] - peak)
            out[j, r] = peak + math.log(acc)
    return out


@njit(cache=True)
def sample_one(log_w, log_f, uniforms, out):
    """Draw battles k-1 .. 1 from their conditionals; battle 0 takes the rest.

    ``uniforms`` holds one U[0,1) draw per sampled battle, consumed from the
    last battle backwards.
    """
    k, width = log_w.shape
    r = width - 1
    weights = np.empty(width)
    for j in range(k - 1, 0, -1):
        norm = log_f[j, r]
        total = 0.0
        for y in range(r + 1):
            w = math.exp(log_w[j, y] + log_f[j - 1, r - y] - norm)
            weights[y] = w
            total += w
        target = uniforms[k - 1 - j] * total
        acc = 0.0
        pick = r
        for y in range(r + 1):
            acc += weights[y]
            if target < acc and weights[y] > 0.0:
                pick = y
                break
        out[j] = pick
        r -= pick
    out[0] = r


@njit(cache=True)
def sample_many(log_w, log_f, uniforms):
    draws = uniforms.shape[0]
    k = log_w.shape[0]
    out = np.empty((draws, k), dtype=np.int64)
    row = np.empty(k, dtype=np.int64)
    for i in range(draws):
        sample_one(log_w, log_f, uniforms[i], row)
        for j in range(k):
            out[i, j] = row[j]
    return out


@njit(cache=True)
def min_plus_suffix(loss):
    """``h[j, m]``: cheapest way to place exactly ``m`` soldiers on battles j.. k-1."""
    k, width = loss.shape
    h = np.empty((k, width))
    for m in range(width):
        h[k - 1, m] = loss[k - 1, m]
    for j in range(k - 2, -1, -1):
        for r in range(width):
            best = np.inf
            for y in range(r + 1):
                t = loss[j, y] + h[j + 1, r - y]
                if t < best:
                    best = t
            h[j, r] = best
    return h


@njit(cache=True)
def min_plus_backtrack(loss, h, n):
    """Lexicographically-first minimiser recovered from ``min_plus_suffix``."""
    k = loss.shape[0]
    out = np.zeros(k, dtype=np.int64)
    r = n
    for j in range(k - 1):
        best = np.inf
        pick = 0
        for y in range(r + 1):
            t = loss[j, y] + h[j + 1, r - y]
            if t < best:
                best = t
                pick = y
        out[j] = pick
        r -= pick
    out[k - 1] = r
    return out
