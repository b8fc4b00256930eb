"""Exact diameter and runtime bounds of the recursion, and the derived exponent constants."""

from __future__ import annotations

import math
from typing import Sequence

# Step parameters of the tree-group filtration, one period of six steps.
FG_PERIOD_A = (9, 18, 4, 6, 6, 3)
FG_K = 3
SL2_A, SL2_K = 3, 2


def _check(A: Sequence[int], k: Sequence[int]) -> None:
    if len(A) != len(k):
        raise ValueError("A and k must have equal length")
    if any(a < 1 for a in A) or any(x < 1 for x in k):
        raise ValueError("A_i and k_i must be positive")


def bound_l(index_N1: int, A: Sequence[int], k: Sequence[int]) -> int:
    """|Gamma:N_1| * prod (1 + A_i k_i); A and k list the steps 1..n-1."""
    _check(A, k)
    out = index_N1
    for a, x in zip(A, k):
        out *= 1 + a * x
    return out


def bound_L_terms(index_N1: int, A: Sequence[int], k: Sequence[int], n0: int) -> list[int]:
    """L_0 = |Gamma:N_1|, L_i = A_i k_i (L_{i-n0} + ... + L_{i-1}), negative indices contributing 0."""
    _check(A, k)
    if n0 < 1:
        raise ValueError("n0 must be positive")
    L = [index_N1]
    for i, (a, x) in enumerate(zip(A, k), start=1):
        L.append(a * x * sum(L[max(0, i - n0):i]))
    return L


def bound_L(index_N1: int, A: Sequence[int], k: Sequence[int], n0: int) -> int:
    """Improved diameter bound L_0 + ... + L_{n-1}, valid when M_{m+n0} <= N_m for all m."""
    return sum(bound_L_terms(index_N1, A, k, n0))


def _log10_int(x: int) -> float:
    return math.log10(x) if x > 0 else float("-inf")


def bound_runtime(f: int, A: Sequence[int], k: Sequence[int], S_size: int, index_N1: int,
                  C: int = 1, exact_limit: int = 10**5) -> dict:
    """Runtime bound f (C |S|^{I+1} prod_{i=1}^{n-1} (A_i+1) + sum_{i=1}^{n-1} (A_i k_i + 3) prod_{j=i}^{n-2} (A_j+1)).

    Also returns the value obtained by unrolling the recurrence
    t_{i+1} = (A_i + 1) t_i + (A_i k_i + 3) f, whose inner products run over
    j = i+1..n-1; the two agree when A is constant.  ``|S|^{I+1}`` is kept exact
    only while I <= exact_limit, otherwise just its logarithm is reported.
    """
    _check(A, k)
    n = len(A) + 1
    prodA = math.prod(a + 1 for a in A)
    tail_closed = sum((A[i - 1] * k[i - 1] + 3) * math.prod(A[j - 1] + 1 for j in range(i, n - 1))
                      for i in range(1, n))
    tail_rec = sum((A[i - 1] * k[i - 1] + 3) * math.prod(A[j - 1] + 1 for j in range(i + 1, n))
                   for i in range(1, n))
    log_head = math.log10(C) + (index_N1 + 1) * math.log10(S_size) + _log10_int(prodA) + math.log10(f)
    out = {"log10_base_term": log_head, "closed_form_tail": f * tail_closed, "recurrence_tail": f * tail_rec}
    if index_N1 <= exact_limit:
        head = f * C * S_size ** (index_N1 + 1) * prodA
        out["closed_form"] = head + f * tail_closed
        out["recurrence"] = head + f * tail_rec
        out["log10_closed_form"] = _log10_int(out["closed_form"])
    else:
        out["closed_form"] = out["recurrence"] = None
        out["log10_closed_form"] = log_head
    return out


def runtime_recurrence(t1: int, f: int, A: Sequence[int], k: Sequence[int]) -> list[int]:
    """t_1, ..., t_n from t_{i+1} = (A_i + 1) t_i + (A_i k_i + 3) f."""
    _check(A, k)
    t = [t1]
    for a, x in zip(A, k):
        t.append((a + 1) * t[-1] + (a * x + 3) * f)
    return t


def padic_bound(p: int, index_H2: int, n: int) -> int:
    """|Gamma:H_2| (p^{n-1} - 1)/(p - 1) for the uniform pro-p filtration."""
    if p < 2 or n < 1:
        raise ValueError("need p >= 2 and n >= 1")
    return index_H2 * (p ** (n - 1) - 1) // (p - 1)


def fg_params(n_steps: int) -> tuple[list[int], list[int]]:
    """A_1..A_{n_steps} and k for the tree-group filtration."""
    A = [FG_PERIOD_A[(i - 1) % 6] for i in range(1, n_steps + 1)]
    return A, [FG_K] * n_steps


def sl2_params(n_steps: int) -> tuple[list[int], list[int]]:
    return [SL2_A] * n_steps, [SL2_K] * n_steps


def fg_period_products() -> dict:
    """prod (3 A_i + 1) and prod (A_i + 1) over one period."""
    return {
        "length_factor": math.prod(3 * a + 1 for a in FG_PERIOD_A),
        "branching_factor": math.prod(a + 1 for a in FG_PERIOD_A),
    }


def exponent_constants() -> dict:
    """Diameter, runtime and spectral-gap exponents derived from the per-step growth factors."""
    fg = fg_period_products()
    return {
        "sl2_diameter_exponent": math.log(7) / math.log(4 / 3),
        "sl2_runtime_exponent": 2 + math.log(4) / math.log(4 / 3),
        "fg_diameter_exponent": math.log(fg["length_factor"]) / math.log(3),
        "fg_runtime_exponent": 1 + math.log(fg["branching_factor"]) / math.log(3),
        "sl2_gap_exponent": 2 * math.log(7) / math.log(4 / 3),
        "fg_gap_exponent": 2 * math.log(fg["length_factor"]) / math.log(3),
    }
