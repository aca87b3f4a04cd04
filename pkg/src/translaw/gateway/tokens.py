"""Token estimation with pluggable schemes.

The default heuristic charges one token per CJK character and one per four
characters of everything else; exact vendor tokenizers can be registered in
its place when a deployment needs billing-grade counts.
"""

import math
from typing import Callable

_CJK_RANGES = (
    (0x3000, 0x303F),  # CJK punctuation
    (0x3040, 0x30FF),  # kana
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0xFF00, 0xFFEF),  # fullwidth forms
)


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def _heuristic(text: str) -> int:
    cjk = sum(1 for ch in text if _is_cjk(ch))
    latin = len(text) - cjk
    return math.ceil(latin / 4) + cjk


_SCHEMES: dict[str, Callable[[str], int]] = {"heuristic": _heuristic}


def register_token_scheme(name: str, fn: Callable[[str], int]) -> None:
    _SCHEMES[name] = fn


def estimate_tokens(text: str, scheme: str = "heuristic") -> int:
    if scheme not in _SCHEMES:
        raise ValueError(f"unknown token scheme {scheme!r}")
    return _SCHEMES[scheme](text)
