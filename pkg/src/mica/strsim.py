"""Exact dynamic-programming string metrics and their normalized forms.

`damerau_levenshtein` is the optimal-string-alignment variant: unit-cost
insertions, deletions, substitutions and adjacent transpositions, no
substring edited twice. Note that OSA violates the triangle inequality;
nothing here relies on it. All metrics compare Unicode scalar values and
leave case folding to the caller.
"""

from __future__ import annotations


def damerau_levenshtein(a: str, b: str) -> int:
    """OSA edit distance between two strings."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)

    # Rolling three-row DP; prev2 is needed for the transposition case.
    prev2: list[int] = []
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a):
        cur = [i + 1] + [0] * len(b)
        for j, cb in enumerate(b):
            cost = 0 if ca == cb else 1
            cur[j + 1] = min(prev[j + 1] + 1, cur[j] + 1, prev[j] + cost)
            if i > 0 and j > 0 and ca == b[j - 1] and a[i - 1] == cb:
                cur[j + 1] = min(cur[j + 1], prev2[j - 1] + 1)
        prev2, prev = prev, cur
    return prev[-1]


def longest_common_substring(a: str, b: str) -> int:
    """Length of the longest contiguous substring occurring in both strings."""
    if not a or not b:
        return 0
    best = 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b):
            if ca == cb:
                cur[j + 1] = prev[j] + 1
                if cur[j + 1] > best:
                    best = cur[j + 1]
        prev = cur
    return best


def lev_similarity(a: str, b: str) -> float:
    """Edit similarity 1 - dl(a,b)/max(|a|,|b|), in [0, 1]; 1 if both empty."""
    if not a and not b:
        return 1.0
    return 1.0 - damerau_levenshtein(a, b) / max(len(a), len(b))


def lcs_similarity(a: str, b: str) -> float:
    """Substring similarity lcs(a,b)/max(|a|,|b|), in [0, 1]; 1 if both empty."""
    if not a and not b:
        return 1.0
    return longest_common_substring(a, b) / max(len(a), len(b))
