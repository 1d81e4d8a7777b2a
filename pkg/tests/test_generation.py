import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_dictionary
from oracles import fitness_by_enumeration
from whittle.corpus import CorpusSlice, Dictionary, is_subsequence
from whittle.generation import (
    Chromosome,
    EvolutionConfig,
    GeneratedLevel,
    GenerationError,
    GenerationParams,
    assign_bonus,
    constraint_score,
    decode_sources,
    evolve_challenge,
    fitness_score,
    generate_level,
    greedy_reduce,
    level_from_json,
    level_to_json,
    mix_sources,
    source_positions,
)


class TestParams:
    def test_valid(self):
        GenerationParams((1, 100), (3, 4), 7, 3, 2).validate()

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(corpus_freq=(0, 10)),
            dict(corpus_freq=(10, 5)),
            dict(source_words=(3,)),
            dict(source_words=(3, 3, 3, 3)),
            dict(source_words=(2, 3)),
            dict(target_length=2),
            dict(num_2x=11),
            dict(max_seq=0),
        ],
    )
    def test_invalid(self, kwargs):
        base = dict(
            corpus_freq=(1, 100), source_words=(3, 4), target_length=7, max_seq=3, num_2x=2
        )
        base.update(kwargs)
        with pytest.raises(ValueError):
            GenerationParams(**base).validate()

    def test_dict_round_trip(self):
        p = GenerationParams((5, 50), (4, 5), 8, 2, 1)
        assert GenerationParams.from_dict(p.to_dict()) == p


class TestDecodeSources:
    def setup_method(self):
        self.d = make_dictionary(["CAT", "DOG", "OWL", "BIRD", "MOUSE", "HEN"])
        self.slice = CorpusSlice(self.d, 1, 6)

    def params(self, lengths):
        return GenerationParams((1, 6), lengths, 10, 3, 0)

    def test_modulo_indexing(self):
        c = Chromosome((0, 1), ())
        assert decode_sources(c, self.params((3, 3)), self.slice) == ["CAT", "DOG"]
        c = Chromosome((4, 9), ())
        # four length-3 words: CAT DOG OWL HEN; 4 % 4 = 0, 9 % 4 = 1
        assert decode_sources(c, self.params((3, 3)), self.slice) == ["CAT", "DOG"]

    def test_duplicate_advances_to_next_distinct(self):
        c = Chromosome((2, 2), ())
        assert decode_sources(c, self.params((3, 3)), self.slice) == ["OWL", "HEN"]
        c = Chromosome((3, 7), ())
        assert decode_sources(c, self.params((3, 3)), self.slice) == ["HEN", "CAT"]

    def test_no_candidates_of_length(self):
        with pytest.raises(GenerationError):
            decode_sources(Chromosome((0, 0), ()), self.params((3, 7)), self.slice)

    def test_not_enough_distinct_candidates(self):
        narrow = CorpusSlice(self.d, 4, 5)
        with pytest.raises(GenerationError):
            decode_sources(Chromosome((0, 0), ()), self.params((4, 4)), narrow)


class TestMixSources:
    def test_explicit_interleaving(self):
        assert mix_sources((0, 1, 0, 0, 1, 1), ["CAT", "DOG"]) == "CDATOG"

    def test_strict_alternation_exhausts_first_word(self):
        assert mix_sources((0, 1, 0, 1, 0, 1), ["CAT", "DOG"]) == "CDAOTG"

    def test_all_zero_genes_concatenate(self):
        assert mix_sources((0,) * 7, ["CAR", "COOL"]) == "CARCOOL"

    def test_single_word_any_genes(self):
        assert mix_sources((9, 4, 7), ["CAT"]) == "CAT"

    def test_wrong_gene_count(self):
        with pytest.raises(ValueError):
            mix_sources((0, 0), ["CAT"])

    @given(
        st.lists(
            st.text(alphabet="ABCDEF", min_size=1, max_size=5), min_size=1, max_size=3
        ),
        st.data(),
    )
    def test_length_and_subsequence_properties(self, words, data):
        total = sum(len(w) for w in words)
        genes = tuple(
            data.draw(st.integers(min_value=0, max_value=1000)) for _ in range(total)
        )
        mixed = mix_sources(genes, words)
        assert len(mixed) == total
        assert sorted(mixed) == sorted("".join(words))
        for w in words:
            assert is_subsequence(w, mixed)


class TestGreedyReduce:
    def test_carcool_fixture(self):
        assert greedy_reduce("CARCOOL", ["CAR", "COOL"], 6) == "CAROOL"

    def test_within_budget_untouched(self):
        assert greedy_reduce("CAROOL", ["CAR", "COOL"], 6) == "CAROOL"
        assert greedy_reduce("CAT", ["CAT"], 10) == "CAT"

    def test_stuck_when_nothing_removable(self):
        assert greedy_reduce("CATDOG", ["CAT", "DOG"], 3) == "CATDOG"

    @given(
        st.lists(
            st.text(alphabet="ABCD", min_size=1, max_size=4), min_size=1, max_size=3
        ),
        st.data(),
    )
    def test_reduction_properties(self, words, data):
        total = sum(len(w) for w in words)
        genes = tuple(
            data.draw(st.integers(min_value=0, max_value=30)) for _ in range(total)
        )
        mixed = mix_sources(genes, words)
        target = data.draw(st.integers(min_value=1, max_value=total))
        reduced = greedy_reduce(mixed, words, target)
        assert len(reduced) <= len(mixed)
        for w in words:
            assert is_subsequence(w, reduced)
        if len(reduced) > target:
            # stuck: removing any single letter must break some source word
            for i in range(len(reduced)):
                shorter = reduced[:i] + reduced[i + 1 :]
                assert not all(is_subsequence(w, shorter) for w in words)


class TestConstraintScore:
    def test_within_budget(self):
        for n in range(1, 7):
            assert constraint_score("A" * n, 6) == 1.0

    def test_one_over(self):
        assert abs(constraint_score("A" * 7, 6) - (1 - math.log(2))) < 1e-12

    def test_strictly_decreasing_past_budget(self):
        values = [constraint_score("A" * n, 6) for n in range(7, 20)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestFitnessScore:
    def test_matches_enumeration_oracle(self, bundled):
        rng = random.Random(777)
        pool = [w for w in bundled.words if len(w) <= 6]
        for _ in range(10):
            mini = Dictionary(sorted(rng.sample(pool, 200)))
            word = "".join(
                rng.choice("AEIOUSTRNLCH") for _ in range(rng.randint(4, 9))
            )
            max_seq = rng.choice([2, 3, 4])
            got, _ = fitness_score(word, max_seq, mini)
            assert abs(got - fitness_by_enumeration(word, max_seq, mini.words)) < 1e-12

    def test_breakdown_counts(self):
        d = make_dictionary(["HATE", "ATE", "HAD", "HAT", "TEL"])
        value, breakdown = fitness_score("HATDEL", 3, d)
        assert breakdown.words == ("ATE", "HAD", "HAT", "HATE", "TEL")
        assert breakdown.long_count == 1  # HATE
        assert breakdown.short_count == 4
        assert breakdown.v == 0  # HATE is split by the D
        assert breakdown.e == 1  # HAT sits contiguously
        expected = (1.1 - 1 / 4) * (1.1 - 0) / 1.21
        assert abs(value - expected) < 1e-12

    def test_no_embedded_words_scores_best(self):
        d = make_dictionary(["ZZZ"])
        value, breakdown = fitness_score("ABC", 3, d)
        assert value == pytest.approx(1.1 * 1.1 / 1.21)
        assert breakdown.words == ()


class TestSourcePositions:
    def test_leftmost(self):
        assert source_positions("HATDEL", "HATE") == (0, 1, 2, 4)
        assert source_positions("CARCOOL", "COOL") == (0, 4, 5, 6)
        assert source_positions("CARCOOL", "CAR") == (0, 1, 2)

    def test_not_embedded(self):
        with pytest.raises(ValueError):
            source_positions("HATDEL", "TEA")


@pytest.fixture(scope="module")
def evolution_dictionary(bundled):
    return bundled


FAST = EvolutionConfig(population_size=60, max_generations=60, stall_generations=10)


class TestEvolveChallenge:
    def test_deterministic(self, evolution_dictionary):
        params = GenerationParams((1, 2000), (3, 3), 6, 3, 0)
        a = evolve_challenge(params, evolution_dictionary, 321, FAST)
        b = evolve_challenge(params, evolution_dictionary, 321, FAST)
        assert a == b

    def test_result_is_feasible(self, evolution_dictionary):
        params = GenerationParams((1, 2000), (3, 4), 7, 3, 0)
        result = evolve_challenge(params, evolution_dictionary, 99, FAST)
        word = result.challenge_word
        assert len(word) <= params.target_length
        assert word not in evolution_dictionary
        assert len(evolution_dictionary.embedded_words(word)) >= 2
        assert result.constraint == 1.0
        # perfect-score float is (1.1 * 1.1) / 1.21, a hair above 1.0
        assert 0.0 < result.fitness <= 1.1 * 1.1 / 1.21
        for sw in result.source_words:
            assert is_subsequence(sw.word, word)
            assert sw.positions == source_positions(word, sw.word)
            assert len(sw.word) in params.source_words
        assert result.bonus_position is None

    def test_different_seeds_explore_differently(self, evolution_dictionary):
        params = GenerationParams((1, 2000), (3, 3), 6, 3, 0)
        results = {
            evolve_challenge(params, evolution_dictionary, s, FAST).challenge_word
            for s in range(5)
        }
        assert len(results) > 1

    def test_failure_carries_best_infeasible(self):
        # two source words but only two candidates that cannot both fit in 3
        d = make_dictionary(["CAT", "DOG", "HORSE", "MOUSE"])
        params = GenerationParams((1, 4), (3, 3), 3, 3, 0)
        tiny = EvolutionConfig(population_size=10, max_generations=3, stall_generations=2)
        with pytest.raises(GenerationError) as info:
            evolve_challenge(params, d, 5, tiny)
        best = info.value.best_infeasible
        assert best is not None
        assert best.constraint < 1.0 or not best.feasible


class TestAssignBonus:
    def make_challenges(self):
        from helpers import make_challenge

        return [
            make_challenge("HATDEL", sources=("HATE", "TEL"), seed=n)
            for n in range(10)
        ]

    def test_marks_exactly_requested_count(self):
        d = make_dictionary(["HATE", "TEL"])
        marked = assign_bonus(self.make_challenges(), 3, d, seed=11)
        assert sum(1 for c in marked if c.bonus_position is not None) == 3
        assert len(marked) == 10

    def test_deterministic(self):
        d = make_dictionary(["HATE", "TEL"])
        a = assign_bonus(self.make_challenges(), 4, d, seed=2)
        b = assign_bonus(self.make_challenges(), 4, d, seed=2)
        assert a == b

    def test_bonus_is_rare_letter_first_embedded_position(self):
        # letter counts: E appears in both words -> common; H,A,T,L once-ish
        d = make_dictionary(["HATE", "TEL"])
        counts = d.letter_counts()
        marked = assign_bonus(self.make_challenges(), 10, d, seed=7)
        for c in marked:
            assert c.bonus_position is not None
            letter = c.challenge_word[c.bonus_position]
            nominees = set()
            for sw in c.source_words:
                rare = min(set(sw.word), key=lambda ch: (counts[ch], ch))
                nominees.add(rare)
            assert letter in nominees
            # position must be that letter's spot inside one source embedding
            spots = {
                sw.positions[sw.word.index(letter)]
                for sw in c.source_words
                if letter in sw.word
            }
            assert c.bonus_position in spots

    def test_count_out_of_range(self):
        d = make_dictionary(["HATE", "TEL"])
        with pytest.raises(ValueError):
            assign_bonus(self.make_challenges(), 11, d, seed=1)


class TestGenerateLevel:
    def test_level_structure_and_round_trip(self, bundled):
        schedule = [GenerationParams((1, 2000), (3, 3), 6, 3, 2)]
        level = generate_level(1, schedule, bundled, 1234, FAST, challenges_per_level=4)
        assert level.index == 1
        assert len(level.challenges) == 4
        assert sum(1 for c in level.challenges if c.bonus_position is not None) == 2
        text = level_to_json(level)
        again = level_from_json(text)
        assert again == level
        assert level_to_json(again) == text
        payload = json.loads(text)
        assert set(payload) == {"index", "seed", "params", "challenges"}
        assert set(payload["challenges"][0]) == {
            "challengeWord",
            "sourceWords",
            "bonusPosition",
            "fitness",
            "constraint",
            "seed",
        }

    def test_bad_index(self, bundled):
        schedule = [GenerationParams((1, 2000), (3, 3), 6, 3, 0)]
        with pytest.raises(ValueError):
            generate_level(2, schedule, bundled, 1, FAST)

    def test_failure_names_level_and_challenge(self):
        d = make_dictionary(["CAT", "DOG", "HORSE", "MOUSE"])
        schedule = [GenerationParams((1, 4), (3, 3), 3, 3, 0)]
        tiny = EvolutionConfig(population_size=8, max_generations=2, stall_generations=1)
        with pytest.raises(GenerationError) as info:
            generate_level(1, schedule, d, 1, tiny)
        assert "level 1 challenge 1" in str(info.value)
