"""Brute-force reference implementations used as test oracles.

These work on plain Python lists of (doc_id, score) pairs and materialize
the full candidate x list score table. They share no code with fuselab.
"""

import functools
import itertools
import math
import random
import statistics


def order_key_cmp(a, b):
    """a, b = (doc_id, score); negative when a ranks first."""
    if a[1] != b[1]:
        return -1 if a[1] > b[1] else 1
    if a[0] != b[0]:
        return -1 if a[0] > b[0] else 1
    return 0


def rank_pairs(pairs):
    return sorted(pairs, key=functools.cmp_to_key(order_key_cmp))


def normalize(pairs, how, depth):
    if how == "none" or not pairs:
        return list(pairs)
    scores = [s for _, s in pairs]
    if how == "minmax":
        lo, hi = min(scores), max(scores)
        if lo == hi:
            return [(d, 1.0) for d, _ in pairs]
        return [(d, (s - lo) / (hi - lo)) for d, s in pairs]
    if how == "zscore":
        mu = statistics.fmean(scores)
        sd = statistics.pstdev(scores)
        if sd == 0:
            return [(d, 0.0) for d, _ in pairs]
        return [(d, (s - mu) / sd) for d, s in pairs]
    if how == "rank":
        return [(d, 1 - i / depth) for i, (d, _) in enumerate(pairs)]
    raise ValueError(how)


def _prep(lists, depth):
    return [rank_pairs(l)[:depth] for l in lists]


def _universe(lists):
    return sorted({d for l in lists for d, _ in l})


def oracle_fuse(method, lists, weights=None, depth=1000, normalization=None, rrf_k=60.0, output_depth=None):
    """Returns a list of (doc_id, score) in fused order."""
    output_depth = output_depth or depth
    if normalization is None:
        normalization = "minmax" if method in ("combsum", "combmnz") else "none"
    lists = _prep(lists, depth)
    universe = _universe(lists)
    k = len(lists)

    if method in ("linear", "combsum", "combmnz"):
        normed = [normalize(l, normalization, depth) for l in lists]
        # full table: table[doc][n] = score or None
        table = {d: [dict(l).get(d) for l in normed] for d in universe}
        if method == "linear":
            weights = weights or [1.0] * k
            floors = [l[-1][1] if l else 0.0 for l in normed]
            fused = {}
            for d in universe:
                total = 0.0
                for n in range(k):
                    s = table[d][n]
                    total += weights[n] * (floors[n] if s is None else s)
                fused[d] = total
        else:
            fused = {}
            for d in universe:
                present = [s for s in table[d] if s is not None]
                total = 0.0
                for s in present:
                    total += s
                fused[d] = total * len(present) if method == "combmnz" else total
        return rank_pairs(list(fused.items()))[:output_depth]

    ranks = [{d: i + 1 for i, (d, _) in enumerate(l)} for l in lists]
    n = len(universe)
    if method == "rrf":
        fused = {}
        for d in universe:
            total = 0.0
            for r in ranks:
                if d in r:
                    total += 1.0 / (rrf_k + r[d])
            fused[d] = total
        return rank_pairs(list(fused.items()))[:output_depth]

    if method == "borda":
        fused = dict.fromkeys(universe, 0.0)
        for r in ranks:
            missing = [d for d in universe if d not in r]
            free_points = [n - p + 1 for p in range(len(r) + 1, n + 1)]
            for d in universe:
                if d in r:
                    fused[d] += n - r[d] + 1
                else:
                    fused[d] += sum(free_points) / len(missing)
        return rank_pairs(list(fused.items()))[:output_depth]

    if method == "roundrobin":
        out = []
        for pos in range(max((len(l) for l in lists), default=0)):
            for l in lists:
                if pos < len(l) and l[pos][0] not in out:
                    out.append(l[pos][0])
        return [(d, float(n - i)) for i, d in enumerate(out)][:output_depth]

    if method == "condorcet":
        # pairwise preference matrix
        pref = {}
        for a, b in itertools.permutations(universe, 2):
            pref[a, b] = sum(
                1 for r in ranks if a in r and (b not in r or r[a] < r[b])
            )
        rank_sum = {}
        for d in universe:
            rank_sum[d] = sum(
                r[d] if d in r else (len(r) + 1 + n) / 2 for r in ranks
            )

        def before(a, b):
            if pref[a, b] != pref[b, a]:
                return pref[a, b] > pref[b, a]
            if rank_sum[a] != rank_sum[b]:
                return rank_sum[a] < rank_sum[b]
            return a > b

        def msort(xs):
            if len(xs) < 2:
                return xs
            h = len(xs) // 2
            left, right = msort(xs[:h]), msort(xs[h:])
            merged = []
            while left and right:
                merged.append(right.pop(0) if before(right[0], left[0]) else left.pop(0))
            return merged + left + right

        start = sorted(universe, key=functools.cmp_to_key(
            lambda a, b: -1 if (rank_sum[a], b) < (rank_sum[b], a) else 1))
        out = msort(start)
        return [(d, float(n - i)) for i, d in enumerate(out)][:output_depth]

    raise ValueError(method)


# -- metrics ---------------------------------------------------------------------


def o_ndcg(docs, judged, k, exponential=False):
    def g(x):
        if x is None or x <= 0:
            return 0
        return 2**x - 1 if exponential else x

    dcg = sum(g(judged.get(d)) / math.log2(i + 2) for i, d in enumerate(docs[:k]))
    ideal = sorted((g(x) for x in judged.values()), reverse=True)[:k]
    idcg = sum(x / math.log2(i + 2) for i, x in enumerate(ideal))
    return dcg / idcg if idcg > 0 else 0.0


def o_rr(docs, judged, cutoff=None):
    for i, d in enumerate(docs):
        if cutoff is not None and i >= cutoff:
            break
        if judged.get(d, 0) >= 1:
            return 1 / (i + 1)
    return 0.0


def o_recall(docs, judged, k):
    rel = {d for d, x in judged.items() if x >= 1}
    return len(rel & set(docs[:k])) / len(rel)


def o_ap(docs, judged, k):
    rel = {d for d, x in judged.items() if x >= 1}
    total = 0.0
    for i, d in enumerate(docs[:k]):
        if d in rel:
            prefix = docs[: i + 1]
            total += len(rel & set(prefix)) / len(prefix)
    return total / len(rel)


def o_judged(docs, judged, k):
    top = docs[:k]
    c = len([d for d in top if d in judged])
    return (c / len(top) if top else 0.0), c


# -- random instances --------------------------------------------------------------


def random_lists(rng: random.Random, max_lists=5, max_docs=20, tie_heavy=None):
    """K lists of (doc, score) pairs; ``tie_heavy`` draws scores from a
    small integer set to force ties."""
    k = rng.randint(1, max_lists)
    pool = [f"d{i:02d}" for i in range(rng.randint(1, max_docs))]
    if tie_heavy is None:
        tie_heavy = rng.random() < 0.5
    lists = []
    for _ in range(k):
        docs = rng.sample(pool, rng.randint(0, len(pool)))
        if tie_heavy:
            pairs = [(d, float(rng.randint(0, 4))) for d in docs]
        else:
            pairs = [(d, rng.uniform(-5, 20)) for d in docs]
        lists.append(pairs)
    return lists


def random_judgments(rng: random.Random, docs, max_judged=30):
    extra = [f"x{i}" for i in range(5)]
    candidates = list(docs) + extra
    n = rng.randint(0, min(max_judged, len(candidates)))
    return {d: rng.choice([-1, 0, 0, 1, 1, 2, 3]) for d in rng.sample(candidates, n)}
