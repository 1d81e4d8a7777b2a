"""Ranked word list with frequency-window slices and subsequence queries.

The dictionary is loaded from a plain-text file, one word per line, ordered
by descending frequency; the line number is the word's rank (1 = most
frequent). A CorpusSlice restricts membership to a rank window and is what
the generator draws source words from. Membership checks for solving always
use the full dictionary.
"""

from __future__ import annotations

import importlib.resources
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np

MIN_WORD_LENGTH = 3
EMBED_LENGTH_CAP = 16

DATA_DIR = importlib.resources.files("whittle") / "data"
DEFAULT_WORDS_PATH = str(DATA_DIR / "words.txt")
DEFAULT_PROFANITY_PATH = str(DATA_DIR / "profanity.txt")


class CorpusError(Exception):
    """Raised for unreadable or unusable word-list files."""


def is_subsequence(needle: str, haystack: str) -> bool:
    """True iff needle's letters appear in haystack in order (gaps allowed)."""
    pos = 0
    for ch in needle:
        pos = haystack.find(ch, pos) + 1
        if pos == 0:
            return False
    return True


def _clean_lines(lines: Iterable[str], min_word_length: int) -> tuple[list[str], int]:
    """Uppercase and filter raw lines; returns (words, skipped count)."""
    words: list[str] = []
    seen: set[str] = set()
    skipped = 0
    for raw in lines:
        # optional tab-separated rank column, on either side of the word
        fields = [f.strip() for f in raw.split("\t") if f.strip()]
        if not fields:
            continue
        word = fields[0]
        if word.isdigit() and len(fields) > 1:
            word = fields[1]
        word = word.upper()
        if len(word) < min_word_length or not word.isalpha() or not word.isascii():
            skipped += 1
            continue
        if word in seen:
            skipped += 1
            continue
        seen.add(word)
        words.append(word)
    return words, skipped


class Dictionary:
    """Immutable ranked word list plus a profanity flag set."""

    def __init__(
        self,
        words: Iterable[str],
        profanity: Iterable[str] = (),
        min_word_length: int = MIN_WORD_LENGTH,
        skipped: int = 0,
    ):
        self.words: tuple[str, ...] = tuple(words)
        if not self.words:
            raise CorpusError("empty corpus: no usable words")
        self.min_word_length = min_word_length
        self.skipped = skipped
        self.profanity: frozenset[str] = frozenset(w.upper() for w in profanity)
        self._ranks: dict[str, int] = {w: i + 1 for i, w in enumerate(self.words)}
        if len(self._ranks) != len(self.words):
            raise CorpusError("duplicate words in corpus")
        for w in self.words:
            if len(w) < min_word_length or not (w.isalpha() and w.isascii() and w.isupper()):
                raise CorpusError(f"invalid corpus word: {w!r}")
        # padded letter-code matrix used by the vectorized subsequence scan,
        # plus per-word letter-set bitmasks for cheap candidate prefiltering
        self._max_len = max(len(w) for w in self.words)
        n = len(self.words)
        self._word_lens = np.fromiter((len(w) for w in self.words), dtype=np.int32, count=n)
        self._word_codes = np.zeros((n, self._max_len), dtype=np.uint8)
        self._letter_masks = np.zeros(n, dtype=np.uint32)
        for i, w in enumerate(self.words):
            self._word_codes[i, : len(w)] = np.frombuffer(w.encode("ascii"), dtype=np.uint8)
            mask = 0
            for ch in w:
                mask |= 1 << (ord(ch) - 65)
            self._letter_masks[i] = mask

    @classmethod
    def load(
        cls,
        path: str | Path,
        profanity_path: str | Path | None = None,
        min_word_length: int = MIN_WORD_LENGTH,
    ) -> "Dictionary":
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise CorpusError(f"cannot read word list {path}: {exc}") from exc
        words, skipped = _clean_lines(lines, min_word_length)
        profanity: list[str] = []
        if profanity_path is not None:
            try:
                raw = Path(profanity_path).read_text(encoding="utf-8").splitlines()
            except OSError as exc:
                raise CorpusError(f"cannot read profanity list {profanity_path}: {exc}") from exc
            profanity, _ = _clean_lines(raw, min_word_length)
        return cls(words, profanity, min_word_length=min_word_length, skipped=skipped)

    @classmethod
    def bundled(cls, min_word_length: int = MIN_WORD_LENGTH) -> "Dictionary":
        return cls.load(DEFAULT_WORDS_PATH, DEFAULT_PROFANITY_PATH, min_word_length)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self._ranks

    def rank(self, word: str) -> int:
        return self._ranks[word]

    def is_profane(self, word: str) -> bool:
        return word.upper() in self.profanity

    def letter_counts(self) -> dict[str, int]:
        """Occurrences of each letter A-Z across all entries."""
        counts = dict.fromkeys((chr(c) for c in range(ord("A"), ord("Z") + 1)), 0)
        for w in self.words:
            for ch in w:
                counts[ch] += 1
        return counts

    def embedded_words(self, challenge_word: str, cap: int = EMBED_LENGTH_CAP) -> tuple[str, ...]:
        """All dictionary words that are subsequences of challenge_word.

        Returned sorted lexicographically. Words longer than the cap are
        refused outright to bound the scan.
        """
        word = challenge_word.upper()
        if len(word) > cap:
            raise ValueError(f"challenge word longer than cap {cap}: {word!r}")
        if not (word.isalpha() and word.isascii()):
            raise ValueError(f"challenge word must be A-Z letters: {challenge_word!r}")
        return self._embedded_cached(word)

    @lru_cache(maxsize=300_000)
    def _embedded_cached(self, word: str) -> tuple[str, ...]:
        # candidates must use only the challenge's letters and fit inside it
        query_mask = np.uint32(0)
        for ch in set(word):
            query_mask |= np.uint32(1 << (ord(ch) - 65))
        rows = np.flatnonzero(
            ((self._letter_masks & ~query_mask) == 0) & (self._word_lens <= len(word))
        )
        if rows.size == 0:
            return ()
        # greedy leftmost matching, advanced for every candidate at once;
        # greedy consumption is exact for plain subsequence tests
        codes = self._word_codes[rows]
        lens = self._word_lens[rows]
        progress = np.zeros(rows.size, dtype=np.int32)
        indices = np.arange(rows.size)
        clip = self._max_len - 1
        for ch in word.encode("ascii"):
            cur = codes[indices, np.minimum(progress, clip)]
            progress += (progress < lens) & (cur == ch)
        hits = rows[np.flatnonzero(progress == lens)]
        return tuple(sorted(self.words[i] for i in hits))


class CorpusSlice:
    """A rank window over a dictionary; source words are drawn from here."""

    def __init__(self, source: Dictionary, min_rank: int, max_rank: int):
        if not (1 <= min_rank <= max_rank <= len(source)):
            raise ValueError(
                f"invalid rank window [{min_rank}, {max_rank}] for corpus of {len(source)}"
            )
        self.source = source
        self.min_rank = min_rank
        self.max_rank = max_rank
        self._by_length: dict[int, tuple[str, ...]] = {}

    def __contains__(self, word: object) -> bool:
        if not isinstance(word, str) or word not in self.source:
            return False
        return self.min_rank <= self.source.rank(word) <= self.max_rank

    def __len__(self) -> int:
        return self.max_rank - self.min_rank + 1

    def words_of_length(self, length: int) -> tuple[str, ...]:
        """Window words of the exact length, in rank order."""
        cached = self._by_length.get(length)
        if cached is None:
            cached = tuple(
                w
                for w in self.source.words[self.min_rank - 1 : self.max_rank]
                if len(w) == length
            )
            self._by_length[length] = cached
        return cached
