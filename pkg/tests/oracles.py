"""Independent naive re-implementations used as oracles by the tests.

These deliberately share no code with deferkit: direct transcriptions of
the metric definitions, written for clarity over speed.
"""

import itertools
import math


def naive_equal_width_bins(pairs, m_bins):
    """bins[m] = list of (p, y) with p in ((m)/M, (m+1)/M], 0 -> bin 0."""
    bins = [[] for _ in range(m_bins)]
    for p, y in pairs:
        if p == 0.0:
            bins[0].append((p, y))
            continue
        for m in range(m_bins):
            if m / m_bins < p <= (m + 1) / m_bins:
                bins[m].append((p, y))
                break
    return bins


def naive_ece(pairs, m_bins):
    n = len(pairs)
    total = 0.0
    for group in naive_equal_width_bins(pairs, m_bins):
        if not group:
            continue
        conf = sum(p for p, _ in group) / len(group)
        acc = sum(y for _, y in group) / len(group)
        total += (len(group) / n) * abs(conf - acc)
    return total


def naive_ece_imb(pairs, m_bins, gamma):
    n = len(pairs)
    groups = naive_equal_width_bins(pairs, m_bins)
    total = 0.0
    for group in groups:
        weight = (1 - gamma) * len(group) / n + gamma / m_bins
        if not group:
            continue
        conf = sum(p for p, _ in group) / len(group)
        acc = sum(y for _, y in group) / len(group)
        total += weight * abs(conf - acc)
    return total


def naive_ace(pairs, m_bins):
    """Sort by confidence (stable), chop into M consecutive runs with the
    first n mod M runs one element longer."""
    indexed = sorted(range(len(pairs)), key=lambda i: (pairs[i][0], i))
    n = len(pairs)
    base, extra = divmod(n, m_bins)
    total = 0.0
    pos = 0
    for m in range(m_bins):
        size = base + (1 if m < extra else 0)
        group = [pairs[indexed[i]] for i in range(pos, pos + size)]
        pos += size
        if not group:
            continue
        conf = sum(p for p, _ in group) / len(group)
        acc = sum(y for _, y in group) / len(group)
        total += abs(conf - acc) / m_bins
    return total


def midranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def brute_mann_whitney(a, b, alternative):
    """Exact one-sided p by enumerating every assignment of the pooled
    values to the two groups."""
    n1 = len(a)
    pooled = list(a) + list(b)
    ranks = midranks(pooled)
    u_obs = sum(ranks[:n1]) - n1 * (n1 + 1) / 2

    total = 0
    hits = 0
    for combo in itertools.combinations(range(len(pooled)), n1):
        u = sum(ranks[i] for i in combo) - n1 * (n1 + 1) / 2
        total += 1
        if alternative == "greater":
            hits += u >= u_obs - 1e-9
        else:
            hits += u <= u_obs + 1e-9
    return u_obs, hits / total


def brute_wilcoxon(x, y, alternative):
    """Exact one-sided p by enumerating every sign pattern."""
    diffs = [xi - yi for xi, yi in zip(x, y) if xi != yi]
    n = len(diffs)
    ranks = midranks([abs(d) for d in diffs])
    w_obs = sum(r for r, d in zip(ranks, diffs) if d > 0)

    hits = 0
    for signs in itertools.product([0, 1], repeat=n):
        w = sum(r for r, s in zip(ranks, signs) if s)
        if alternative == "greater":
            hits += w >= w_obs - 1e-9
        else:
            hits += w <= w_obs + 1e-9
    return w_obs, hits / 2 ** n


def naive_chi2(table):
    row = [sum(table[0]), sum(table[1])]
    col = [table[0][0] + table[1][0], table[0][1] + table[1][1]]
    n = row[0] + row[1]
    chi2 = 0.0
    for i in range(2):
        for j in range(2):
            e = row[i] * col[j] / n
            chi2 += (table[i][j] - e) ** 2 / e
    return chi2


def naive_pearson(a, b):
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    num = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    den = math.sqrt(sum((x - ma) ** 2 for x in a) * sum((y - mb) ** 2 for y in b))
    return num / den


def naive_trapezoid(points):
    total = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        total += (x1 - x0) * (y0 + y1) / 2
    return total
