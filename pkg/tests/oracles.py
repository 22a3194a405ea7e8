"""Independent brute-force reference implementations for the test suite.

These deliberately avoid the library's internals (no Counter sharing, no
profile reuse): plain list scans and textbook formulas only, so they can
arbitrate the production code.
"""

import math


def ngram_list(seq, n):
    return [tuple(seq[i : i + n]) for i in range(len(seq) - n + 1)]


def brute_bleu(refs, cand, max_n=4, add1=True, case_fold=True):
    if case_fold:
        refs = [[t.lower() for t in r] for r in refs]
        cand = [t.lower() for t in cand]
    c = len(cand)
    if c == 0:
        return 0.0
    lens = sorted(
        (len(r) for r in refs if len(r) > 0), key=lambda n: (abs(n - c), n)
    )
    r = lens[0]
    log_terms = []
    for n in range(1, max_n + 1):
        cand_grams = ngram_list(cand, n)
        den = len(cand_grams)
        num = 0
        for gram in set(cand_grams):
            in_cand = cand_grams.count(gram)
            best_ref = 0
            for ref in refs:
                got = ngram_list(ref, n).count(gram)
                if got > best_ref:
                    best_ref = got
            num += min(in_cand, best_ref)
        if num == 0:
            if not add1:
                return 0.0
            log_terms.append(math.log(1.0 / (den + 1)))
        else:
            log_terms.append(math.log(num / den))
    bp = math.exp(min(0.0, 1.0 - r / c))
    return bp * math.exp(sum(log_terms) / max_n)


def brute_rouge_n(ref, cand, n, case_fold=True):
    if case_fold:
        ref = [t.lower() for t in ref]
        cand = [t.lower() for t in cand]
    ref_grams = ngram_list(ref, n)
    cand_grams = ngram_list(cand, n)
    if not ref_grams or not cand_grams:
        return 0.0
    overlap = 0
    for gram in set(cand_grams):
        overlap += min(cand_grams.count(gram), ref_grams.count(gram))
    precision = overlap / len(cand_grams)
    recall = overlap / len(ref_grams)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def brute_lcs(a, b):
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[len(a)][len(b)]


def brute_rouge_l(ref, cand, case_fold=True):
    if case_fold:
        ref = [t.lower() for t in ref]
        cand = [t.lower() for t in cand]
    if not ref or not cand:
        return 0.0
    lcs = brute_lcs(ref, cand)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def brute_pearson(xs, ys):
    """Textbook two-pass sample correlation."""
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    return cov / math.sqrt(var_x * var_y)


def brute_sim_f1(values, ref_flags, cand_flags, mode):
    """Greedy-matching F1 over a list-of-lists matrix, with mask surgery."""
    rows = len(values)
    cols = len(values[0])
    grid = [list(row) for row in values]
    if mode == "ORACLE":
        for i in range(rows):
            for j in range(cols):
                if ref_flags[i] and cand_flags[j]:
                    grid[i][j] = 1.0
    elif mode == "ANTI_ORACLE":
        for i in range(rows):
            for j in range(cols):
                if ref_flags[i] or cand_flags[j]:
                    grid[i][j] = 0.0
    recall = sum(max(row) for row in grid) / rows
    precision = sum(max(grid[i][j] for i in range(rows)) for j in range(cols)) / cols
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
