"""Hot numeric kernels behind pairwise semantic scoring.

Decoding cost is dominated by the table of pairwise coherence terms: for
every ordered pair of rewrite units (u, v) with u earlier in the document
and every candidate choice (a at u, b at v) the decoder needs

    pair(u, a, v, b) = cos(o_u, o_v) * cos(c_ua, c_vb)
                     + cos(c_ua + o_v - o_u, c_vb)

where o is the original word vector and c the choice vector (choice 0 is
the original word itself). Pairs involving any out-of-vocabulary word are
zero; individual cosines with a zero-norm operand are zero.

Two interchangeable implementations are provided: a numba-compiled kernel
(the default when numba is importable) and a pure-numpy path. Setting the
environment variable ``THEMEWEAVE_NUMBA=0`` forces the numpy path. See
``benchmarks/bench_kernels.py`` for a timing comparison.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_requested() -> bool:
    flag = os.environ.get("THEMEWEAVE_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USING_NUMBA = _HAVE_NUMBA and _numba_requested()


def pair_score_table_numpy(
    choice_vecs: np.ndarray,
    choice_valid: np.ndarray,
    orig_vecs: np.ndarray,
    orig_valid: np.ndarray,
) -> np.ndarray:
    """Pure-numpy pair table.

    choice_vecs: (U, C, d) float64, zero rows where invalid
    choice_valid: (U, C) bool, in-vocabulary flags
    orig_vecs: (U, d) float64; orig_valid: (U,) bool

    Returns (U, C, U, C) float64 with mirrored entries
    P[v, b, u, a] == P[u, a, v, b]; diagonal blocks are zero.
    """
    U, C, d = choice_vecs.shape
    if U == 0:
        return np.zeros((U, C, U, C))
    flat = choice_vecs.reshape(U * C, d)
    norms = np.linalg.norm(flat, axis=1)
    gram = flat @ flat.T  # (UC, UC) raw dot products
    h = flat @ orig_vecs.T  # (UC, U): dot(choice, original)
    og = orig_vecs @ orig_vecs.T
    onorm2 = np.diag(og).copy()
    onorms = np.sqrt(onorm2)

    with np.errstate(divide="ignore", invalid="ignore"):
        cos_orig = og / np.outer(onorms, onorms)
    cos_orig[~np.isfinite(cos_orig)] = 0.0

    with np.errstate(divide="ignore", invalid="ignore"):
        cos_choice = gram / np.outer(norms, norms)
    cos_choice[~np.isfinite(cos_choice)] = 0.0
    cos_choice = cos_choice.reshape(U, C, U, C)

    pairsim = cos_orig[:, None, :, None] * cos_choice

    gram4 = gram.reshape(U, C, U, C)
    h3 = h.reshape(U, C, U)  # h3[u, a, x] = dot(choice ua, orig x)
    own = h3[np.arange(U), :, np.arange(U)]  # (U, C): dot(c_ua, o_u)
    # numerator[u, a, v, b] = gram + dot(c_vb, o_v) - dot(c_vb, o_u)
    numer = gram4 + own[None, None, :, :] - h3.transpose(2, 0, 1)[:, None, :, :]
    # shifted vector c_ua + o_v - o_u, norm squared per (u, a, v)
    d_orig2 = onorm2[:, None] + onorm2[None, :] - 2.0 * og  # ||o_v - o_u||^2
    shift2 = (
        (norms**2).reshape(U, C)[:, :, None]
        + d_orig2[:, None, :]
        + 2.0 * (h3 - own[:, :, None])
    )
    shift2 = np.maximum(shift2, 0.0)
    shift_norm = np.sqrt(shift2)  # (U, C, U)
    denom = shift_norm[:, :, :, None] * norms.reshape(U, C)[None, None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        analogy = numer / denom
    analogy[~np.isfinite(analogy)] = 0.0

    table = pairsim + analogy
    valid = (
        choice_valid[:, :, None, None]
        & choice_valid[None, None, :, :]
        & orig_valid[:, None, None, None]
        & orig_valid[None, None, :, None]
    )
    table = np.where(valid, table, 0.0)

    # keep only the document-ordered orientation (u earlier than v) and mirror it
    uu = np.arange(U)
    earlier = uu[:, None, None, None] < uu[None, None, :, None]
    later = uu[:, None, None, None] > uu[None, None, :, None]
    out = np.where(earlier, table, 0.0)
    out = np.where(later, table.transpose(2, 3, 0, 1), out)
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _pair_table_jit(flat, valid_flat, orig_vecs, orig_valid, U, C):  # pragma: no cover
        d = flat.shape[1]
        norms = np.empty(U * C)
        for i in range(U * C):
            s = 0.0
            for k in range(d):
                s += flat[i, k] * flat[i, k]
            norms[i] = np.sqrt(s)
        gram = flat @ flat.T
        h = flat @ orig_vecs.T
        og = orig_vecs @ orig_vecs.T
        out = np.zeros((U, C, U, C))
        for u in range(U):
            if not orig_valid[u]:
                continue
            for v in range(u + 1, U):
                if not orig_valid[v]:
                    continue
                no_u = np.sqrt(og[u, u])
                no_v = np.sqrt(og[v, v])
                if no_u > 0.0 and no_v > 0.0:
                    cos_ov = og[u, v] / (no_u * no_v)
                else:
                    cos_ov = 0.0
                d_orig2 = og[u, u] + og[v, v] - 2.0 * og[u, v]
                for a in range(C):
                    ua = u * C + a
                    if not valid_flat[ua]:
                        continue
                    shift2 = norms[ua] * norms[ua] + d_orig2 + 2.0 * (h[ua, v] - h[ua, u])
                    if shift2 < 0.0:
                        shift2 = 0.0
                    shift_norm = np.sqrt(shift2)
                    for b in range(C):
                        vb = v * C + b
                        if not valid_flat[vb]:
                            continue
                        if norms[ua] > 0.0 and norms[vb] > 0.0:
                            cos_cc = gram[ua, vb] / (norms[ua] * norms[vb])
                        else:
                            cos_cc = 0.0
                        value = cos_ov * cos_cc
                        if shift_norm > 0.0 and norms[vb] > 0.0:
                            numer = gram[ua, vb] + h[vb, v] - h[vb, u]
                            value += numer / (shift_norm * norms[vb])
                        out[u, a, v, b] = value
                        out[v, b, u, a] = value
        return out

    def pair_score_table_numba(
        choice_vecs: np.ndarray,
        choice_valid: np.ndarray,
        orig_vecs: np.ndarray,
        orig_valid: np.ndarray,
    ) -> np.ndarray:
        """Numba pair table; same contract as :func:`pair_score_table_numpy`."""
        U, C, d = choice_vecs.shape
        if U == 0:
            return np.zeros((U, C, U, C))
        flat = np.ascontiguousarray(choice_vecs.reshape(U * C, d))
        return _pair_table_jit(
            flat,
            np.ascontiguousarray(choice_valid.reshape(U * C)),
            np.ascontiguousarray(orig_vecs),
            np.ascontiguousarray(orig_valid),
            U,
            C,
        )

else:  # pragma: no cover
    pair_score_table_numba = None


def pair_score_table(
    choice_vecs: np.ndarray,
    choice_valid: np.ndarray,
    orig_vecs: np.ndarray,
    orig_valid: np.ndarray,
) -> np.ndarray:
    """Dispatch to the active implementation (numba unless disabled)."""
    if USING_NUMBA:
        return pair_score_table_numba(choice_vecs, choice_valid, orig_vecs, orig_valid)
    return pair_score_table_numpy(choice_vecs, choice_valid, orig_vecs, orig_valid)


def warmup() -> None:
    """Trigger JIT compilation on a tiny input so timed runs start hot."""
    vecs = np.zeros((2, 2, 2))
    vecs[0, 0, 0] = 1.0
    vecs[1, 0, 1] = 1.0
    valid = np.ones((2, 2), dtype=np.bool_)
    pair_score_table(vecs, valid, vecs[:, 0, :].copy(), np.ones(2, dtype=np.bool_))
