"""Seeded generators for the four synthetic/real benchmark families.

A: uniform H, clipped-normal W (sparse columns).  B: clipped sinusoid
columns in W, sparse uniform H.  C: smooth synthetic spectra in W,
sparse uniform H.  D: reflectance signatures loaded from a CSV file,
synthetic abundance maps in H.  All outputs are noiseless products
Y = W_true H_true.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrices import as_nonneg, load_matrix_csv

_RANK_RETRIES = 10
_ANGLE_RETRIES = 200
_MIN_ANGLE_DEG = 15.0


@dataclass
class BenchmarkSpec:
    kind: str
    n: int
    m: int
    r: int
    alpha_h: float = 0.1
    seed: int = 0
    d_signals_path: Optional[str] = None

    def __post_init__(self):
        self.kind = self.kind.upper()
        if self.kind not in ("A", "B", "C", "D"):
            raise ValueError(f"unknown benchmark kind {self.kind!r}")
        if min(self.n, self.m, self.r) < 1 or self.r > min(self.n, self.m):
            raise ValueError("need n, m, r >= 1 and r <= min(n, m)")
        if not 0.0 <= self.alpha_h <= 1.0:
            raise ValueError("alpha_h must lie in [0, 1]")


@dataclass
class GroundTruth:
    W_true: np.ndarray
    H_true: np.ndarray
    Y: np.ndarray


def _finish(W, H):
    return GroundTruth(W_true=W, H_true=H, Y=W @ H)


def _full_rank(A, r):
    return np.linalg.matrix_rank(A) == r


def _sparse_uniform_h(rng, r, m, alpha_h):
    """Uniform matrix with an alpha_h fraction of entries zeroed, retried
    until full rank."""
    for _ in range(_RANK_RETRIES):
        H = rng.random((r, m))
        if alpha_h > 0:
            mask = rng.random((r, m)) < alpha_h
            H = np.where(mask, 0.0, H)
        if _full_rank(H, r):
            return H
    raise RuntimeError("could not draw a full-rank sparse H")


def pairwise_angles_deg(A):
    """Angles in degrees between all column pairs of A."""
    norms = np.linalg.norm(A, axis=0)
    if (norms == 0).any():
        raise ValueError("zero column encountered in angle check")
    cos = np.clip((A.T @ A) / np.outer(norms, norms), -1.0, 1.0)
    angles = np.degrees(np.arccos(cos))
    return angles


def _check_min_angle(W, min_deg=_MIN_ANGLE_DEG):
    angles = pairwise_angles_deg(W)
    r = W.shape[1]
    for k in range(r):
        for h in range(k + 1, r):
            if angles[k, h] <= min_deg:
                return (k, h, angles[k, h])
    return None


def gen_a(n, m, r, seed=0):
    """Uniform H; W from standard normals with negatives clipped to zero
    (about half the entries), both full rank."""
    rng = np.random.default_rng(seed)
    for _ in range(_RANK_RETRIES):
        H = rng.random((r, m))
        if _full_rank(H, r):
            break
    else:
        raise RuntimeError("could not draw a full-rank H")
    for _ in range(_RANK_RETRIES):
        W = np.maximum(rng.standard_normal((n, r)), 0.0)
        if _full_rank(W, r):
            return _finish(W, H)
    raise RuntimeError("could not draw a full-rank clipped-normal W")


def gen_b(n, m, r, alpha_h=0.1, seed=0):
    """W columns are clipped sinusoids with per-component frequency and
    phase; H is sparse uniform at level alpha_h."""
    rng = np.random.default_rng(seed)
    i = np.arange(n)
    freqs = 1.0 + rng.permutation(r) + rng.random(r)  # distinct by construction
    phases = rng.random(r) * 2.0 * np.pi
    W = np.maximum(
        np.sin(2.0 * np.pi * freqs[None, :] * i[:, None] / n + phases[None, :]),
        0.0,
    )
    H = _sparse_uniform_h(rng, r, m, alpha_h)
    return _finish(W, H)


def _gaussian_bump_spectrum(rng, n):
    grid = np.linspace(0.0, 1.0, n)
    n_bumps = rng.integers(3, 7)
    centers = rng.random(n_bumps)
    widths = 0.01 + 0.09 * rng.random(n_bumps)
    amps = 0.5 + 0.5 * rng.random(n_bumps)
    s = np.zeros(n)
    for c, wd, a in zip(centers, widths, amps):
        s += a * np.exp(-0.5 * ((grid - c) / wd) ** 2)
    return s / s.max()


def gen_c(n, m, r, alpha_h=0.1, seed=0):
    """W columns are smooth nonnegative synthetic spectra (sums of seeded
    Gaussian bumps, max-normalized), mutually separated by more than 15
    degrees; H is sparse uniform at level alpha_h."""
    rng = np.random.default_rng(seed)
    cols = []
    tries = 0
    while len(cols) < r:
        cand = _gaussian_bump_spectrum(rng, n)
        ok = all(
            _check_min_angle(np.column_stack([c, cand])) is None for c in cols
        )
        if ok:
            cols.append(cand)
        tries += 1
        if tries > _ANGLE_RETRIES:
            raise RuntimeError("could not generate angle-separated spectra")
    W = np.column_stack(cols)
    H = _sparse_uniform_h(rng, r, m, alpha_h)
    return _finish(W, H)


def _abundance_maps(rng, r, m, pure_fraction=0.05):
    """Smooth per-component fields on a sqrt(m) x sqrt(m) grid (falling
    back to a 1 x m strip), normalized so every pixel's abundances sum to
    one, with a seeded fraction of pure pixels."""
    g = math.isqrt(m)
    if g * g == m:
        shape = (g, g)
    else:
        shape = (1, m)
    gy, gx = np.mgrid[0 : shape[0], 0 : shape[1]]
    fields = np.zeros((r, m))
    for k in range(r):
        n_blobs = rng.integers(2, 5)
        f = np.full(shape, 1e-3)
        for _ in range(n_blobs):
            cy = rng.random() * shape[0]
            cx = rng.random() * shape[1]
            sy = (0.05 + 0.2 * rng.random()) * max(shape[0], 1)
            sx = (0.05 + 0.2 * rng.random()) * shape[1]
            f += np.exp(-0.5 * (((gy - cy) / sy) ** 2 + ((gx - cx) / sx) ** 2))
        fields[k] = f.ravel()
    H = fields / fields.sum(axis=0, keepdims=True)
    n_pure = int(round(pure_fraction * m))
    if n_pure > 0:
        pixels = rng.choice(m, size=n_pure, replace=False)
        for p in pixels:
            k = int(np.argmax(H[:, p]))
            H[:, p] = 0.0
            H[k, p] = 1.0
    return H


def gen_d(n, m, r, d_signals_path, seed=0):
    """Load reflectance signatures from CSV (n rows, >= r columns, values
    in [0, 1]); pair them with synthetic vectorized abundance maps."""
    if d_signals_path is None:
        raise ValueError("benchmark D requires a signal file path")
    sig = as_nonneg(load_matrix_csv(d_signals_path), "signal file")
    if sig.shape[0] != n or sig.shape[1] < r:
        raise ValueError(
            f"signal file has shape {sig.shape}, need ({n}, >={r})"
        )
    if (sig > 1.0).any():
        raise ValueError("reflectance values must lie in [0, 1]")
    W = sig[:, :r].copy()
    bad = _check_min_angle(W)
    if bad is not None:
        k, h, ang = bad
        raise ValueError(
            f"signal columns {k} and {h} are only {ang:.2f} degrees apart "
            f"(need > {_MIN_ANGLE_DEG})"
        )
    rng = np.random.default_rng(seed)
    H = _abundance_maps(rng, r, m)
    return _finish(W, H)


def generate(spec: BenchmarkSpec) -> GroundTruth:
    """Materialize a benchmark from its spec."""
    if spec.kind == "A":
        return gen_a(spec.n, spec.m, spec.r, spec.seed)
    if spec.kind == "B":
        return gen_b(spec.n, spec.m, spec.r, spec.alpha_h, spec.seed)
    if spec.kind == "C":
        return gen_c(spec.n, spec.m, spec.r, spec.alpha_h, spec.seed)
    return gen_d(spec.n, spec.m, spec.r, spec.d_signals_path, spec.seed)
