"""Boolean problems over fixed-width bit vectors.

A problem is a total function from n-bit inputs to integers.  The built-in
families:

* ``or``          -- 1 unless every bit is 0.
* ``ue``          -- unary evaluation, the number of 1 bits.
* ``be``          -- binary evaluation, sum of b_j * 2**j.
* ``tribes``      -- n bits split into contiguous equal tribes; 1 iff some
                     tribe is all ones.
* ``comparison``  -- two k-bit operands x (bits 0..k-1) and y (bits k..2k-1);
                     returns sign(x - y) in {-1, 0, 1}.
* ``sorting``     -- `count` numbers of `width` bits each; returns the sorted
                     sequence packed into one integer, least element in the
                     lowest width-bit field.  The value tuple is recoverable
                     via :func:`sorting_values` / :func:`unpack_sorting_output`.
* ``custom``      -- explicit output column of length 2**n.

Truth tables index rows by the packed input (bit 0 least significant); the
CSV form writes columns b_{n-1},...,b_0,output and round-trips bit exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .bits import (
    ResourceLimitError,
    as_bit_array,
    bits_to_index,
    format_bits,
    index_to_bits,
    popcount_table,
)

TABLE_BITS_LIMIT = 20    # full truth table enumeration guard
CUSTOM_BITS_LIMIT = 14   # explicit output arrays

PROBLEM_KINDS = ("or", "ue", "be", "tribes", "comparison", "sorting", "custom")


@dataclass(frozen=True)
class BooleanProblem:
    """A named total function from n-bit vectors to integers."""

    name: str
    kind: str
    n: int
    params: dict
    evaluator: Callable[[np.ndarray], int]
    output_bound: int

    def __repr__(self) -> str:  # params carry arrays for custom tables
        return f"BooleanProblem(name={self.name!r}, kind={self.kind!r}, n={self.n})"


@dataclass(frozen=True)
class TruthTable:
    """Output column over all 2**n rows, row i = packed input i."""

    n: int
    outputs: np.ndarray

    def __post_init__(self):
        outputs = np.asarray(self.outputs, dtype=np.int64)
        if outputs.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} outputs, got {outputs.shape}")
        object.__setattr__(self, "outputs", outputs)

    def input_bits(self, i: int) -> np.ndarray:
        return index_to_bits(i, self.n)

    def output(self, i: int) -> int:
        return int(self.outputs[i])


def _check_n(n, minimum=1) -> int:
    if not isinstance(n, (int, np.integer)) or n < minimum:
        raise ValueError(f"n must be an integer >= {minimum}, got {n!r}")
    return int(n)


def or_problem(n: int) -> BooleanProblem:
    n = _check_n(n)
    return BooleanProblem("or", "or", n, {}, lambda b: int(b.any()), 1)


def unary_evaluation(n: int) -> BooleanProblem:
    n = _check_n(n)
    return BooleanProblem("ue", "ue", n, {}, lambda b: int(b.sum()), n)


def binary_evaluation(n: int) -> BooleanProblem:
    n = _check_n(n)
    return BooleanProblem("be", "be", n, {}, lambda b: bits_to_index(b), (1 << n) - 1)


def tribes_problem(n: int, tribe_count: int = 2) -> BooleanProblem:
    n = _check_n(n)
    if not isinstance(tribe_count, (int, np.integer)) or tribe_count < 1:
        raise ValueError(f"tribe_count must be a positive integer, got {tribe_count!r}")
    if n % tribe_count != 0:
        raise ValueError(f"n={n} is not divisible by tribe_count={tribe_count}")
    size = n // tribe_count

    def evaluate_tribes(b: np.ndarray) -> int:
        return int(b.reshape(tribe_count, size).all(axis=1).any())

    return BooleanProblem(
        f"tribes{tribe_count}", "tribes", n, {"tribe_count": int(tribe_count)},
        evaluate_tribes, 1,
    )


def comparison_problem(k: int) -> BooleanProblem:
    k = _check_n(k)
    def evaluate_cmp(b: np.ndarray) -> int:
        x = bits_to_index(b[:k])
        y = bits_to_index(b[k:])
        return (x > y) - (x < y)

    return BooleanProblem(f"comparison{k}", "comparison", 2 * k, {"k": int(k)},
                          evaluate_cmp, 1)


def sorting_problem(count: int, width: int) -> BooleanProblem:
    count = _check_n(count)
    width = _check_n(width)
    n = count * width
    if n > 62:
        raise ResourceLimitError(f"sorting over {n} bits cannot pack its output into int64")

    def evaluate_sort(b: np.ndarray) -> int:
        values = sorted(bits_to_index(b[m * width:(m + 1) * width]) for m in range(count))
        packed = 0
        for m, v in enumerate(values):
            packed |= v << (width * m)
        return packed

    return BooleanProblem(
        f"sorting{count}x{width}", "sorting", n,
        {"count": int(count), "width": int(width)},
        evaluate_sort, (1 << n) - 1,
    )


def custom_problem(outputs: Sequence[int], name: str = "custom") -> BooleanProblem:
    outputs = np.asarray(outputs, dtype=np.int64)
    if outputs.ndim != 1 or outputs.size < 2 or (outputs.size & (outputs.size - 1)) != 0:
        raise ValueError("custom outputs must have length 2**n with n >= 1")
    n = int(outputs.size).bit_length() - 1
    if n > CUSTOM_BITS_LIMIT:
        raise ResourceLimitError(f"custom tables support n <= {CUSTOM_BITS_LIMIT}, got n={n}")
    column = outputs.copy()
    column.setflags(write=False)
    return BooleanProblem(
        name, "custom", n, {"outputs": column},
        lambda b: int(column[bits_to_index(b)]),
        int(np.abs(column).max()),
    )


def build_problem(kind: str, n: int | None = None, **params) -> BooleanProblem:
    """Construct a problem from its kind string and parameters."""
    if kind == "or":
        return or_problem(n)
    if kind == "ue":
        return unary_evaluation(n)
    if kind == "be":
        return binary_evaluation(n)
    if kind == "tribes":
        return tribes_problem(n, params.get("tribe_count", 2))
    if kind == "comparison":
        k = params.get("k")
        if k is None:
            if n is None or n % 2 != 0:
                raise ValueError("comparison needs k, or an even n")
            k = n // 2
        return comparison_problem(k)
    if kind == "sorting":
        count, width = params.get("count"), params.get("width")
        if count is None or width is None:
            raise ValueError("sorting needs count and width")
        return sorting_problem(count, width)
    if kind == "custom":
        outputs = params.get("outputs")
        if outputs is None:
            raise ValueError("custom needs an outputs column")
        return custom_problem(outputs, params.get("name", "custom"))
    raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")


def evaluate(problem: BooleanProblem, bits: Sequence[int]) -> int:
    """Apply the problem to one input vector."""
    return int(problem.evaluator(as_bit_array(bits, problem.n)))


def comparison_values(problem: BooleanProblem, bits: Sequence[int]) -> tuple[int, int]:
    """The (x, y) operand pair encoded by a comparison input row."""
    if problem.kind != "comparison":
        raise ValueError("comparison_values expects a comparison problem")
    k = problem.params["k"]
    arr = as_bit_array(bits, problem.n)
    return bits_to_index(arr[:k]), bits_to_index(arr[k:])


def sorting_values(problem: BooleanProblem, bits: Sequence[int]) -> tuple[int, ...]:
    """The input value sequence encoded by a sorting input row (unsorted)."""
    if problem.kind != "sorting":
        raise ValueError("sorting_values expects a sorting problem")
    count, width = problem.params["count"], problem.params["width"]
    arr = as_bit_array(bits, problem.n)
    return tuple(bits_to_index(arr[m * width:(m + 1) * width]) for m in range(count))


def unpack_sorting_output(problem: BooleanProblem, packed: int) -> tuple[int, ...]:
    """Recover the sorted value sequence from a packed sorting output."""
    if problem.kind != "sorting":
        raise ValueError("unpack_sorting_output expects a sorting problem")
    count, width = problem.params["count"], problem.params["width"]
    mask = (1 << width) - 1
    return tuple((packed >> (width * m)) & mask for m in range(count))


def truth_table(problem: BooleanProblem) -> TruthTable:
    """Enumerate the full output column (guarded at n <= TABLE_BITS_LIMIT)."""
    n = problem.n
    if n > TABLE_BITS_LIMIT:
        raise ResourceLimitError(f"truth tables support n <= {TABLE_BITS_LIMIT}, got n={n}")
    idx = np.arange(1 << n, dtype=np.int64)
    kind = problem.kind
    if kind == "or":
        outputs = (idx != 0).astype(np.int64)
    elif kind == "ue":
        outputs = popcount_table(n)
    elif kind == "be":
        outputs = idx.copy()
    elif kind == "tribes":
        t = problem.params["tribe_count"]
        size = n // t
        mask = (1 << size) - 1
        hit = np.zeros(1 << n, dtype=bool)
        for c in range(t):
            hit |= ((idx >> (c * size)) & mask) == mask
        outputs = hit.astype(np.int64)
    elif kind == "comparison":
        k = problem.params["k"]
        x = idx & ((1 << k) - 1)
        y = idx >> k
        outputs = np.sign(x - y).astype(np.int64)
    elif kind == "sorting":
        count, width = problem.params["count"], problem.params["width"]
        mask = (1 << width) - 1
        fields = np.stack([(idx >> (width * m)) & mask for m in range(count)], axis=1)
        fields.sort(axis=1)
        shifts = np.left_shift(np.int64(1), width * np.arange(count, dtype=np.int64))
        outputs = fields @ shifts
    elif kind == "custom":
        outputs = np.asarray(problem.params["outputs"], dtype=np.int64).copy()
    else:
        outputs = np.array([problem.evaluator(index_to_bits(i, n)) for i in idx],
                           dtype=np.int64)
    return TruthTable(n, outputs)


def table_to_csv(table: TruthTable, path) -> None:
    """Write the table as CSV with header b_{n-1},...,b_0,output."""
    path = Path(path)
    header = [f"b_{j}" for j in range(table.n - 1, -1, -1)] + ["output"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(1 << table.n):
            bits = index_to_bits(i, table.n)
            writer.writerow([int(b) for b in bits[::-1]] + [int(table.outputs[i])])


def table_from_csv(path) -> TruthTable:
    """Read a truth table written by :func:`table_to_csv` (bit-exact)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path} is empty")
    header = rows[0]
    n = len(header) - 1
    expected = [f"b_{j}" for j in range(n - 1, -1, -1)] + ["output"]
    if header != expected or n < 1:
        raise ValueError(f"bad truth table header {header!r}")
    body = rows[1:]
    if len(body) != (1 << n):
        raise ValueError(f"expected {1 << n} rows, got {len(body)}")
    outputs = np.empty(1 << n, dtype=np.int64)
    for i, row in enumerate(body):
        bits = np.array([int(c) for c in row[:-1]], dtype=np.uint8)[::-1]
        if bits_to_index(bits) != i:
            raise ValueError(f"row {i} bit pattern {row[:-1]} out of order")
        outputs[i] = int(row[-1])
    return TruthTable(n, outputs)


def format_input(problem: BooleanProblem, i: int) -> str:
    return format_bits(index_to_bits(i, problem.n))
