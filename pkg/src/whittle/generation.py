"""Constrained evolutionary generator for elimination challenges.

A challenge word is bred by mixing 2-3 source words into one string whose
letters keep each source word extractable as a subsequence. Two populations
evolve side by side: individuals that satisfy the length constraint compete
on fitness, the rest compete on how close they are to satisfying it, and
offspring land in whichever population matches their own feasibility.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import CorpusSlice, Dictionary, is_subsequence
from .seeds import derive_seed

GENE_MAX = 2**31


class GenerationError(Exception):
    """Raised when no feasible challenge emerges within the budget."""

    def __init__(self, message: str, best_infeasible: "EvalResult | None" = None):
        super().__init__(message)
        self.best_infeasible = best_infeasible


@dataclass(frozen=True)
class GenerationParams:
    """The five per-level difficulty controls."""

    corpus_freq: tuple[int, int]
    source_words: tuple[int, ...]
    target_length: int
    max_seq: int
    num_2x: int

    def validate(self, min_word_length: int = 3) -> None:
        lo, hi = self.corpus_freq
        if not (1 <= lo <= hi):
            raise ValueError(f"bad corpus window {self.corpus_freq}")
        if not (2 <= len(self.source_words) <= 3):
            raise ValueError("source_words must list 2 or 3 lengths")
        if any(n < min_word_length for n in self.source_words):
            raise ValueError(f"source word lengths must be >= {min_word_length}")
        if self.target_length < max(self.source_words):
            raise ValueError("target_length shorter than the longest source word")
        if not (0 <= self.num_2x <= 10):
            raise ValueError("num_2x must be in 0..10")
        if self.max_seq < 1:
            raise ValueError("max_seq must be positive")

    def to_dict(self) -> dict:
        return {
            "corpusFreq": list(self.corpus_freq),
            "sourceWords": list(self.source_words),
            "targetLength": self.target_length,
            "maxSeq": self.max_seq,
            "num2X": self.num_2x,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationParams":
        return cls(
            corpus_freq=(int(d["corpusFreq"][0]), int(d["corpusFreq"][1])),
            source_words=tuple(int(n) for n in d["sourceWords"]),
            target_length=int(d["targetLength"]),
            max_seq=int(d["maxSeq"]),
            num_2x=int(d["num2X"]),
        )


@dataclass(frozen=True)
class Chromosome:
    """Integer genome: one selector per source word, one mixer per letter."""

    source_genes: tuple[int, ...]
    mix_genes: tuple[int, ...]

    def __post_init__(self):
        if any(g < 0 for g in self.source_genes + self.mix_genes):
            raise ValueError("genes must be non-negative")


@dataclass(frozen=True)
class FitnessBreakdown:
    words: tuple[str, ...]
    long_count: int
    short_count: int
    v: int
    e: int


@dataclass(frozen=True)
class EvalResult:
    challenge_word: str
    source_words: tuple[str, ...]
    constraint: float
    fitness: float
    feasible: bool
    breakdown: FitnessBreakdown | None


@dataclass(frozen=True)
class SourceWord:
    """A resolved source word with its letter positions in the challenge."""

    word: str
    positions: tuple[int, ...]


@dataclass(frozen=True)
class GeneratedChallenge:
    challenge_word: str
    source_words: tuple[SourceWord, ...]
    bonus_position: int | None
    fitness: float
    constraint: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "challengeWord": self.challenge_word,
            "sourceWords": [
                {"word": s.word, "positions": list(s.positions)} for s in self.source_words
            ],
            "bonusPosition": self.bonus_position,
            "fitness": self.fitness,
            "constraint": self.constraint,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratedChallenge":
        return cls(
            challenge_word=d["challengeWord"],
            source_words=tuple(
                SourceWord(s["word"], tuple(s["positions"])) for s in d["sourceWords"]
            ),
            bonus_position=d["bonusPosition"],
            fitness=float(d["fitness"]),
            constraint=float(d["constraint"]),
            seed=int(d["seed"]),
        )


@dataclass(frozen=True)
class GeneratedLevel:
    index: int
    params: GenerationParams
    seed: int
    challenges: tuple[GeneratedChallenge, ...]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "seed": self.seed,
            "params": self.params.to_dict(),
            "challenges": [c.to_dict() for c in self.challenges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratedLevel":
        return cls(
            index=int(d["index"]),
            params=GenerationParams.from_dict(d["params"]),
            seed=int(d["seed"]),
            challenges=tuple(GeneratedChallenge.from_dict(c) for c in d["challenges"]),
        )


def level_to_json(level: GeneratedLevel) -> str:
    return json.dumps(level.to_dict(), indent=2) + "\n"


def level_from_json(text: str) -> GeneratedLevel:
    return GeneratedLevel.from_dict(json.loads(text))


def load_level(path: str | Path) -> GeneratedLevel:
    return level_from_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# genome decoding and phenotype construction


def decode_sources(
    chromosome: Chromosome, params: GenerationParams, corpus_slice: CorpusSlice
) -> list[str]:
    """Resolve selector genes to distinct source words from the slice.

    Gene i indexes the slice's words of length source_words[i], modulo the
    candidate count. A duplicate pick advances cyclically to the next
    distinct candidate.
    """
    chosen: list[str] = []
    for i, length in enumerate(params.source_words):
        candidates = corpus_slice.words_of_length(length)
        if not candidates:
            raise GenerationError(
                f"no candidate words of length {length} in ranks "
                f"[{corpus_slice.min_rank}, {corpus_slice.max_rank}]"
            )
        idx = chromosome.source_genes[i] % len(candidates)
        steps = 0
        while candidates[idx] in chosen:
            idx = (idx + 1) % len(candidates)
            steps += 1
            if steps >= len(candidates):
                raise GenerationError(
                    f"fewer than {i + 1} distinct words of length {length} in the slice"
                )
        chosen.append(candidates[idx])
    return chosen


def mix_sources(mix_genes: tuple[int, ...], words: list[str]) -> str:
    """Interleave the source words letter by letter, steered by the genes.

    At each step the gene selects, modulo the count of words with letters
    remaining (in stable order), which word contributes its next letter.
    """
    total = sum(len(w) for w in words)
    if len(mix_genes) != total:
        raise ValueError(f"need {total} mix genes, got {len(mix_genes)}")
    pointers = [0] * len(words)
    out: list[str] = []
    for gene in mix_genes:
        active = [i for i, w in enumerate(words) if pointers[i] < len(w)]
        pick = active[gene % len(active)]
        out.append(words[pick][pointers[pick]])
        pointers[pick] += 1
    return "".join(out)


def greedy_reduce(word: str, sources: list[str], target_length: int) -> str:
    """Shorten a mixed word while keeping every source a subsequence.

    Scans left to right, removes the first removable letter, and restarts;
    stops once the word is within the target length or no letter can go.
    """
    w = word
    while len(w) > target_length:
        for i in range(len(w)):
            candidate = w[:i] + w[i + 1 :]
            if all(is_subsequence(s, candidate) for s in sources):
                w = candidate
                break
        else:
            break
    return w


def constraint_score(word: str, target_length: int) -> float:
    """1.0 within the length budget, logarithmically below 1.0 past it."""
    over = len(word) - target_length
    if over <= 0:
        return 1.0
    return 1.0 - math.log(over + 1)


def fitness_from_embedded(
    word: str, max_seq: int, embedded: tuple[str, ...]
) -> tuple[float, FitnessBreakdown]:
    """Score how well the embedded words hide, given the enumeration."""
    long_words = [x for x in embedded if len(x) > max_seq]
    short_words = [x for x in embedded if len(x) <= max_seq]
    v = sum(1 for x in long_words if x in word)
    e = sum(1 for x in short_words if x in word)
    v_ratio = v / len(long_words) if long_words else 0.0
    e_ratio = e / len(short_words) if short_words else 0.0
    f = (1.1 - e_ratio) * (1.1 - v_ratio) / 1.21
    breakdown = FitnessBreakdown(
        words=tuple(embedded),
        long_count=len(long_words),
        short_count=len(short_words),
        v=v,
        e=e,
    )
    return f, breakdown


def fitness_score(
    word: str, max_seq: int, dictionary: Dictionary
) -> tuple[float, FitnessBreakdown]:
    """Enumerate embedded words, then score their visibility split."""
    return fitness_from_embedded(word, max_seq, dictionary.embedded_words(word))


def source_positions(challenge_word: str, source: str) -> tuple[int, ...]:
    """Leftmost embedding positions of a source word in the challenge word."""
    positions: list[int] = []
    pos = 0
    for ch in source:
        pos = challenge_word.find(ch, pos)
        if pos < 0:
            raise ValueError(f"{source!r} is not a subsequence of {challenge_word!r}")
        positions.append(pos)
        pos += 1
    return tuple(positions)


# ---------------------------------------------------------------------------
# the two-population evolutionary loop


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 100
    max_generations: int = 300
    tournament_size: int = 3
    crossover_rate: float = 0.7
    mutation_rate: float = 0.1
    elite_count: int = 1
    gene_max: int = GENE_MAX
    # stop once the best feasible fitness has not improved for this many
    # generations (fitness 1.0 stops immediately); keeps batch runs bounded
    stall_generations: int = 25


@dataclass
class _Individual:
    genome: tuple[int, ...]
    result: EvalResult


class _Evaluator:
    """Genome -> EvalResult, memoized; fitness only computed when feasible-length."""

    def __init__(self, params: GenerationParams, dictionary: Dictionary, corpus_slice: CorpusSlice):
        self.params = params
        self.dictionary = dictionary
        self.corpus_slice = corpus_slice
        self.n_sources = len(params.source_words)
        self._cache: dict[tuple[int, ...], EvalResult] = {}

    def evaluate(self, genome: tuple[int, ...]) -> EvalResult:
        cached = self._cache.get(genome)
        if cached is not None:
            return cached
        chromosome = Chromosome(genome[: self.n_sources], genome[self.n_sources :])
        sources = decode_sources(chromosome, self.params, self.corpus_slice)
        mixed = mix_sources(chromosome.mix_genes, sources)
        word = greedy_reduce(mixed, sources, self.params.target_length)
        constraint = constraint_score(word, self.params.target_length)
        fitness = 0.0
        feasible = False
        breakdown = None
        if constraint == 1.0:
            fitness, breakdown = fitness_score(word, self.params.max_seq, self.dictionary)
            feasible = word not in self.dictionary and len(breakdown.words) >= 2
        result = EvalResult(
            challenge_word=word,
            source_words=tuple(sources),
            constraint=constraint,
            fitness=fitness,
            feasible=feasible,
            breakdown=breakdown,
        )
        self._cache[genome] = result
        return result


def _tournament(pool: list[_Individual], key, rng: random.Random, size: int) -> _Individual:
    best = None
    best_key = None
    for _ in range(size):
        pick = pool[rng.randrange(len(pool))]
        k = key(pick)
        if best is None or k > best_key:
            best, best_key = pick, k
    return best


def _breed(
    pool: list[_Individual],
    key,
    count: int,
    rng: random.Random,
    cfg: EvolutionConfig,
    genome_len: int,
) -> list[tuple[int, ...]]:
    children: list[tuple[int, ...]] = []
    while len(children) < count:
        a = _tournament(pool, key, rng, cfg.tournament_size).genome
        b = _tournament(pool, key, rng, cfg.tournament_size).genome
        if rng.random() < cfg.crossover_rate:
            cut = rng.randrange(1, genome_len)
            a, b = a[:cut] + b[cut:], b[:cut] + a[cut:]
        for child in (a, b):
            mutated = tuple(
                rng.randrange(cfg.gene_max) if rng.random() < cfg.mutation_rate else g
                for g in child
            )
            children.append(mutated)
    return children[:count]


def evolve_challenge(
    params: GenerationParams,
    dictionary: Dictionary,
    seed: int,
    config: EvolutionConfig = EvolutionConfig(),
) -> GeneratedChallenge:
    """Run the two-population search until a feasible challenge stabilizes.

    Deterministic for a fixed seed. Feasibility means the reduced word is
    within the target length, is not itself a dictionary word, and embeds at
    least two dictionary words. Raises GenerationError when the generation
    budget ends with no feasible individual.
    """
    params.validate(dictionary.min_word_length)
    lo, hi = params.corpus_freq
    corpus_slice = CorpusSlice(dictionary, lo, hi)
    evaluator = _Evaluator(params, dictionary, corpus_slice)
    rng = random.Random(seed)
    genome_len = len(params.source_words) + sum(params.source_words)

    def fitness_key(ind: _Individual):
        return ind.result.fitness

    def constraint_key(ind: _Individual):
        return ind.result.constraint

    population = [
        tuple(rng.randrange(config.gene_max) for _ in range(genome_len))
        for _ in range(config.population_size)
    ]
    best: _Individual | None = None
    best_generation = 0
    generation = 0
    feasible: list[_Individual] = []
    infeasible: list[_Individual] = []
    while True:
        individuals = [_Individual(g, evaluator.evaluate(g)) for g in population]
        feasible = [i for i in individuals if i.result.feasible]
        infeasible = [i for i in individuals if not i.result.feasible]
        if feasible:
            gen_best = max(feasible, key=fitness_key)
            if best is None or gen_best.result.fitness > best.result.fitness:
                best = gen_best
                best_generation = generation
        # the float product (1.1 * 1.1) / 1.21 lands a hair above 1.0, so a
        # perfect score is "at least 1", not "exactly 1"
        if best is not None and best.result.fitness >= 1.0:
            break
        if best is not None and generation - best_generation >= config.stall_generations:
            break
        if generation >= config.max_generations:
            break
        generation += 1
        # each population breeds as many offspring as it currently holds, so
        # the total stays fixed while the split follows feasibility
        next_population: list[tuple[int, ...]] = []
        if feasible:
            elites = sorted(feasible, key=fitness_key, reverse=True)[: config.elite_count]
            next_population.extend(i.genome for i in elites)
            quota = len(feasible) - len(elites)
            next_population.extend(
                _breed(feasible, fitness_key, quota, rng, config, genome_len)
            )
        if infeasible:
            next_population.extend(
                _breed(infeasible, constraint_key, len(infeasible), rng, config, genome_len)
            )
        population = next_population

    if best is None:
        best_infeasible = max(
            infeasible, key=lambda i: i.result.constraint, default=None
        )
        raise GenerationError(
            f"no feasible challenge after {generation} generations "
            f"(target length {params.target_length}, window {params.corpus_freq})",
            best_infeasible.result if best_infeasible else None,
        )
    result = best.result
    return GeneratedChallenge(
        challenge_word=result.challenge_word,
        source_words=tuple(
            SourceWord(s, source_positions(result.challenge_word, s))
            for s in result.source_words
        ),
        bonus_position=None,
        fitness=result.fitness,
        constraint=result.constraint,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# bonus letters and level assembly


def assign_bonus(
    challenges: list[GeneratedChallenge],
    num_2x: int,
    dictionary: Dictionary,
    seed: int,
) -> list[GeneratedChallenge]:
    """Mark num_2x of the challenges with a doubled-score letter position.

    For each marked challenge, every source word nominates its least common
    letter (by corpus letter counts, ties alphabetical); one nominee is drawn
    at random and its first embedded position becomes the bonus.
    """
    if not (0 <= num_2x <= len(challenges)):
        raise ValueError(f"num_2x {num_2x} out of range for {len(challenges)} challenges")
    rng = random.Random(seed)
    counts = dictionary.letter_counts()
    marked = sorted(rng.sample(range(len(challenges)), num_2x))
    out = list(challenges)
    for idx in marked:
        challenge = out[idx]
        nominees: list[tuple[int, str]] = []
        for s_idx, sw in enumerate(challenge.source_words):
            rare = min(set(sw.word), key=lambda ch: (counts[ch], ch))
            nominees.append((s_idx, rare))
        s_idx, letter = nominees[rng.randrange(len(nominees))]
        sw = challenge.source_words[s_idx]
        position = sw.positions[sw.word.index(letter)]
        out[idx] = replace(challenge, bonus_position=position)
    return out


def generate_level(
    index: int,
    schedule: list[GenerationParams],
    dictionary: Dictionary,
    seed: int,
    config: EvolutionConfig = EvolutionConfig(),
    challenges_per_level: int = 10,
) -> GeneratedLevel:
    """Generate one level: independent challenge runs plus bonus assignment."""
    if not (1 <= index <= len(schedule)):
        raise ValueError(f"level index {index} outside schedule of {len(schedule)}")
    params = schedule[index - 1]
    level_seed = derive_seed(seed, "level", index)
    challenges: list[GeneratedChallenge] = []
    for number in range(1, challenges_per_level + 1):
        challenge_seed = derive_seed(level_seed, "challenge", number)
        try:
            challenges.append(evolve_challenge(params, dictionary, challenge_seed, config))
        except GenerationError as exc:
            raise GenerationError(
                f"level {index} challenge {number}: {exc}", exc.best_infeasible
            ) from exc
    challenges = assign_bonus(
        challenges, params.num_2x, dictionary, derive_seed(level_seed, "bonus")
    )
    return GeneratedLevel(
        index=index, params=params, seed=level_seed, challenges=tuple(challenges)
    )
