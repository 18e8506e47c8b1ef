"""Assignment-block evaluation of compiled ground formulas.

This is the hot loop of brute-force counting: evaluate one fixed formula,
given as a postfix (RPN) instruction program, over a contiguous block of
truth assignments. Assignment ``a`` assigns atom ``i`` the bit ``(a >> i) & 1``.

Evaluation is 64-way bit-parallel: every uint64 word holds one formula value
for 64 consecutive assignments (lane ``l`` of word ``w`` is assignment
``64*w + l``). Atom bits 0..5 vary within a word and load as fixed lane
patterns; higher atom bits are constant per word.

Two interchangeable backends produce identical words:

  * a numba ``@njit`` scalar loop over words (default when numba imports), and
  * a vectorized pure-numpy evaluator.

Set ``WFOMC_PURE_NUMPY=1`` to force the numpy backend; the benchmark under
``benchmarks/`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

OP_LOAD = 0
OP_NOT = 1
OP_AND = 2
OP_OR = 3
OP_IMP = 4
OP_IFF = 5
OP_TRUE = 6
OP_FALSE = 7

# Lane patterns for atom bits 0..5: bit i of lane l is (l >> i) & 1.
_LANE = np.array(
    [
        0xAAAAAAAAAAAAAAAA,
        0xCCCCCCCCCCCCCCCC,
        0xF0F0F0F0F0F0F0F0,
        0xFF00FF00FF00FF00,
        0xFFFF0000FFFF0000,
        0xFFFFFFFF00000000,
    ],
    dtype=np.uint64,
)
_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)

_FORCE_NUMPY = os.environ.get("WFOMC_PURE_NUMPY", "").strip().lower() in {"1", "true", "yes"}

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via WFOMC_PURE_NUMPY instead
    HAVE_NUMBA = False


def _eval_words_scalar(ops, args, lane, start_word, n_words, stack, out):
    ones = np.uint64(0xFFFFFFFFFFFFFFFF)
    zero = np.uint64(0)
    one = np.uint64(1)
    for w in range(n_words):
        widx = np.uint64(start_word + w)
        sp = 0
        for k in range(ops.shape[0]):
            op = ops[k]
            if op == 0:  # OP_LOAD
                bit = args[k]
                if bit < 6:
                    stack[sp] = lane[bit]
                else:
                    stack[sp] = zero - ((widx >> np.uint64(bit - 6)) & one)
                sp += 1
            elif op == 1:  # OP_NOT
                stack[sp - 1] = ~stack[sp - 1]
            elif op == 2:  # OP_AND
                sp -= 1
                stack[sp - 1] = stack[sp - 1] & stack[sp]
            elif op == 3:  # OP_OR
                sp -= 1
                stack[sp - 1] = stack[sp - 1] | stack[sp]
            elif op == 4:  # OP_IMP
                sp -= 1
                stack[sp - 1] = (~stack[sp - 1]) | stack[sp]
            elif op == 5:  # OP_IFF
                sp -= 1
                stack[sp - 1] = ~(stack[sp - 1] ^ stack[sp])
            elif op == 6:  # OP_TRUE
                stack[sp] = ones
                sp += 1
            else:  # OP_FALSE
                stack[sp] = zero
                sp += 1
        out[w] = stack[0]


if HAVE_NUMBA:
    _eval_words_jit = njit(cache=True)(_eval_words_scalar)


def _eval_words_numpy(ops, args, start_word: int, n_words: int) -> np.ndarray:
    widx = np.arange(start_word, start_word + n_words, dtype=np.uint64)
    stack: list[np.ndarray] = []
    for k in range(ops.shape[0]):
        op = ops[k]
        if op == OP_LOAD:
            bit = args[k]
            if bit < 6:
                stack.append(np.full(n_words, _LANE[bit], dtype=np.uint64))
            else:
                hit = (widx >> np.uint64(bit - 6)) & np.uint64(1)
                stack.append(hit * _ONES)
        elif op == OP_NOT:
            stack[-1] = ~stack[-1]
        elif op == OP_AND:
            b = stack.pop()
            stack[-1] = stack[-1] & b
        elif op == OP_OR:
            b = stack.pop()
            stack[-1] = stack[-1] | b
        elif op == OP_IMP:
            b = stack.pop()
            stack[-1] = ~stack[-1] | b
        elif op == OP_IFF:
            b = stack.pop()
            stack[-1] = ~(stack[-1] ^ b)
        elif op == OP_TRUE:
            stack.append(np.full(n_words, _ONES, dtype=np.uint64))
        else:
            stack.append(np.zeros(n_words, dtype=np.uint64))
    return stack[0]


def backend() -> str:
    """Name of the default backend ('numba' or 'numpy')."""
    return "numba" if (HAVE_NUMBA and not _FORCE_NUMPY) else "numpy"


def satisfying_words(ops, args, stack_need: int, start: int, n: int,
                     force_numpy: bool = False) -> np.ndarray:
    """uint64 satisfaction words covering assignments start..start+n-1.

    ``start`` must be 64-aligned (or 0 with n < 64); trailing lanes beyond
    ``n`` are unspecified.
    """
    if start % 64 and n >= 64:
        raise ValueError("block start must be 64-aligned")
    n_words = (n + 63) // 64
    if force_numpy or backend() == "numpy":
        return _eval_words_numpy(ops, args, start // 64, n_words)
    out = np.empty(n_words, dtype=np.uint64)
    stack = np.empty(max(stack_need, 1), dtype=np.uint64)
    _eval_words_jit(ops, args, _LANE, start // 64, n_words, stack, out)
    return out


def satisfying_mask(ops, args, stack_need: int, start: int, n: int,
                    force_numpy: bool = False) -> np.ndarray:
    """uint8 mask of length ``n``: 1 where assignment ``start+i`` satisfies."""
    words = satisfying_words(ops, args, stack_need, start, n, force_numpy)
    bits = np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")
    return bits[:n]


def popcount(words: np.ndarray, n: int) -> int:
    """Number of set bits among the first ``n`` lanes."""
    if n % 64:
        words = words.copy()
        words[-1] &= np.uint64((1 << (n % 64)) - 1)
    bits = np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")
    return int(bits.sum())
