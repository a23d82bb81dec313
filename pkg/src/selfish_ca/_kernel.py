"""Compiled batch evolution for tournament trials.

Each trial starts from black at tape index 0 and grey at index ``d`` and is
evolved for ``steps`` steps on a buffer covering its light cone
``[-steps, d + steps]``. Only the current live span plus one cell per side is
recomputed each step. Results must agree with ``core.evolve`` followed by
``metrics.summarize``; the test-suite checks this.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Above this many possible words the block histogram is replaced by a sort.
_MAX_HIST_BINS = 6561


@njit(cache=True)
def _entropy(counts, total):
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * np.log2(p)
    return max(h, 0.0)


@njit(cache=True)
def _lz78(seq, lo, hi, trie):
    # trie[node, symbol] -> child id, 0 = absent; rows 0..phrases are in use
    trie[0, :] = 0
    node = 0
    phrases = 0
    for p in range(lo, hi + 1):
        s = seq[p]
        child = trie[node, s]
        if child == 0:
            phrases += 1
            trie[node, s] = phrases
            trie[phrases, :] = 0
            node = 0
        else:
            node = child
    if node != 0:
        phrases += 1
    return phrases


@njit(cache=True)
def run_batch(tables, seps, steps, k, counts, row_h, block_h, lz):
    """Evolve every trial and fill the per-trial output arrays in place.

    tables: (n, 27) uint8 composite tables; seps: (n,) int64 separations.
    counts[i] receives (white, grey, black) over the light cone window.
    """
    n = tables.shape[0]
    max_sep = 0
    for i in range(n):
        if seps[i] > max_sep:
            max_sep = seps[i]
    width = 2 * steps + max_sep + 1
    cur = np.zeros(width + 2, np.uint8)
    nxt = np.zeros(width + 2, np.uint8)
    trie = np.zeros((width + 2, 3), np.int32)
    nbins = 3**k
    use_hist = nbins <= _MAX_HIST_BINS
    hist = np.zeros(nbins if use_hist else 1, np.int64)
    words = np.zeros(width + 1, np.int64)
    top = 3 ** (k - 1)
    base = steps + 1  # buffer position of tape index 0

    for i in range(n):
        d = seps[i]
        tab = tables[i]
        cur[base] = 2
        cur[base + d] = 1
        lo = base
        hi = base + d
        alive = True
        for _ in range(steps):
            new_lo = -1
            new_hi = -1
            for p in range(lo - 1, hi + 2):
                v = tab[9 * cur[p - 1] + 3 * cur[p] + cur[p + 1]]
                nxt[p] = v
                if v != 0:
                    if new_lo < 0:
                        new_lo = p
                    new_hi = p
            for p in range(lo, hi + 1):
                cur[p] = 0
            cur, nxt = nxt, cur
            if new_lo < 0:
                alive = False
                break
            lo = new_lo
            hi = new_hi

        # window [-steps, d + steps] is buffer [1, 2*steps + d + 1]
        w_lo = 1
        w_hi = 2 * steps + d + 1
        length = w_hi - w_lo + 1
        grey = 0
        black = 0
        if alive:
            for p in range(lo, hi + 1):
                if cur[p] == 1:
                    grey += 1
                elif cur[p] == 2:
                    black += 1
        counts[i, 0] = length - grey - black
        counts[i, 1] = grey
        counts[i, 2] = black
        row_h[i] = _entropy(counts[i], length)

        nwords = length - k + 1
        code = 0
        for p in range(w_lo, w_lo + k - 1):
            code = code * 3 + cur[p]
        for j in range(nwords):
            p = w_lo + k - 1 + j
            code = code * 3 + cur[p]
            words[j] = code
            code -= cur[p - k + 1] * top
        if use_hist:
            for j in range(nwords):
                hist[words[j]] += 1
            block_h[i] = _entropy(hist, nwords)
            for j in range(nwords):
                hist[words[j]] = 0
        else:
            srt = np.sort(words[:nwords])
            runs = np.zeros(nwords, np.int64)
            r = 0
            runs[0] = 1
            for j in range(1, nwords):
                if srt[j] != srt[j - 1]:
                    r += 1
                runs[r] += 1
            block_h[i] = _entropy(runs[: r + 1], nwords)

        if alive:
            lz[i] = _lz78(cur, lo, hi, trie)
            for p in range(lo, hi + 1):
                cur[p] = 0
        else:
            lz[i] = 0


def warm_up() -> None:
    """Compile (or load from cache) before forking workers."""
    tables = np.zeros((1, 27), np.uint8)
    seps = np.ones(1, np.int64)
    run_batch(tables, seps, 1, 1, np.zeros((1, 3), np.int64), np.zeros(1), np.zeros(1), np.zeros(1, np.int64))
