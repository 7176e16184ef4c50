"""Hot inner loops: counter-based RNG, Monte-Carlo frame counting, Pareto masking.

Each kernel exists twice, a numba ``@njit`` loop and a vectorised numpy
version.  Both produce bit-identical results.  The numba path is used when
numba imports cleanly and ``GOIOT_DISABLE_NUMBA`` is unset or "0".
"""

from __future__ import annotations

import os

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_THREE = np.uint64(3)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

STREAM_TRUTH = 0
STREAM_DEVICE = 1
STREAM_CLOUD = 2

# result columns of simulate_counts
TP, FP, FN, TN, FORWARDED, POSITIVES = range(6)
N_COUNTS = 6

_MASK64 = (1 << 64) - 1


def _disabled() -> bool:
    return os.environ.get("GOIOT_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")


try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

NUMBA_AVAILABLE = numba is not None


def mix64_int(x: int) -> int:
    """splitmix64 finaliser on Python ints (used for seed derivation)."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    return mix64_int((master_seed & _MASK64) * 0x9E3779B97F4A7C15 + index + 1)


# -- numpy implementations ----------------------------------------------------

def _mix64_np(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _S30)) * _MUL1
    x = (x ^ (x >> _S27)) * _MUL2
    return x ^ (x >> _S31)


def uniforms_np(seed: int, frames: int, stream: int) -> np.ndarray:
    """Uniform [0, 1) draws for frames 0..frames-1 of one stream."""
    idx = np.arange(frames, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = np.uint64(seed) + (idx * _THREE + np.uint64(stream) + _ONE) * _GOLDEN
        z = _mix64_np(x)
    return (z >> _S11).astype(np.float64) * _INV53


def _simulate_counts_np(seeds, frames, q, tpr1, fpr1, tpr2, fpr2, use_device, use_cloud):
    out = np.zeros((len(seeds), N_COUNTS), dtype=np.int64)
    for r, seed in enumerate(seeds):
        seed = int(seed)
        truth = uniforms_np(seed, frames, STREAM_TRUTH) < q
        alive = np.ones(frames, dtype=bool)
        if use_device:
            u = uniforms_np(seed, frames, STREAM_DEVICE)
            alive &= u < np.where(truth, tpr1, fpr1)
        forwarded = int(np.count_nonzero(alive)) if use_cloud else 0
        if use_cloud:
            u = uniforms_np(seed, frames, STREAM_CLOUD)
            alive &= u < np.where(truth, tpr2, fpr2)
        out[r, TP] = np.count_nonzero(alive & truth)
        out[r, FP] = np.count_nonzero(alive & ~truth)
        out[r, FN] = np.count_nonzero(~alive & truth)
        out[r, TN] = np.count_nonzero(~alive & ~truth)
        out[r, FORWARDED] = forwarded
        out[r, POSITIVES] = np.count_nonzero(truth)
    return out


def _pareto_mask_np(points: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        le = np.all(points <= points[i], axis=1)
        lt = np.any(points < points[i], axis=1)
        keep[i] = not np.any(le & lt)
    return keep


# -- numba implementations ----------------------------------------------------

if NUMBA_AVAILABLE:

    @numba.njit(cache=True)
    def _uniform_nb(seed, frame, stream):
        x = seed + (np.uint64(frame) * _THREE + np.uint64(stream) + _ONE) * _GOLDEN
        x = (x ^ (x >> _S30)) * _MUL1
        x = (x ^ (x >> _S27)) * _MUL2
        x = x ^ (x >> _S31)
        return np.float64(x >> _S11) * _INV53

    @numba.njit(cache=True)
    def _simulate_counts_nb(seeds, frames, q, tpr1, fpr1, tpr2, fpr2, use_device, use_cloud):
        out = np.zeros((seeds.shape[0], N_COUNTS), dtype=np.int64)
        for r in range(seeds.shape[0]):
            seed = seeds[r]
            tp = fp = fn = tn = fwd = pos = 0
            for i in range(frames):
                truth = _uniform_nb(seed, i, STREAM_TRUTH) < q
                alive = True
                if use_device:
                    p = tpr1 if truth else fpr1
                    alive = _uniform_nb(seed, i, STREAM_DEVICE) < p
                if use_cloud:
                    if alive:
                        fwd += 1
                    p = tpr2 if truth else fpr2
                    # draw unconditionally so the stream stays aligned with numpy
                    alive = (_uniform_nb(seed, i, STREAM_CLOUD) < p) and alive
                if truth:
                    pos += 1
                    if alive:
                        tp += 1
                    else:
                        fn += 1
                elif alive:
                    fp += 1
                else:
                    tn += 1
            out[r, 0] = tp
            out[r, 1] = fp
            out[r, 2] = fn
            out[r, 3] = tn
            out[r, 4] = fwd
            out[r, 5] = pos
        return out

    @numba.njit(cache=True)
    def _pareto_mask_nb(points):
        n, k = points.shape
        keep = np.ones(n, dtype=np.bool_)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                all_le = True
                any_lt = False
                for d in range(k):
                    if points[j, d] > points[i, d]:
                        all_le = False
                        break
                    if points[j, d] < points[i, d]:
                        any_lt = True
                if all_le and any_lt:
                    keep[i] = False
                    break
        return keep


# -- dispatch -------------------------------------------------------------------

def use_numba() -> bool:
    return NUMBA_AVAILABLE and not _disabled()


def simulate_counts(seeds, frames: int, q: float, tpr1: float, fpr1: float,
                    tpr2: float, fpr2: float, use_device: bool, use_cloud: bool,
                    backend: str | None = None) -> np.ndarray:
    """Confusion/forwarding counts, one row per seed (columns TP..POSITIVES).

    Per frame: ground truth ~ Bernoulli(q) on stream 0, the device stage fires
    with prob TPR/FPR on stream 1, the cloud stage on stream 2.  A frame is
    forwarded when it reaches the cloud stage.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    backend = backend or ("numba" if use_numba() else "numpy")
    args = (seeds, int(frames), float(q), float(tpr1), float(fpr1), float(tpr2), float(fpr2),
            bool(use_device), bool(use_cloud))
    if backend == "numba":
        return _simulate_counts_nb(*args)
    if backend == "numpy":
        return _simulate_counts_np(*args)
    raise ValueError(f"unknown backend {backend!r}")


def pareto_mask(points, backend: str | None = None) -> np.ndarray:
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    if points.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    backend = backend or ("numba" if use_numba() else "numpy")
    if backend == "numba":
        return _pareto_mask_nb(points)
    if backend == "numpy":
        return _pareto_mask_np(points)
    raise ValueError(f"unknown backend {backend!r}")
