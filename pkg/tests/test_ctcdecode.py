import math

import numpy as np
import pytest

from ctcfusion import ngram
from ctcfusion.ctcdecode import (
    DecodeParams,
    beam_search_decode,
    collapse,
    exhaustive_decode,
    exhaustive_label_masses,
    greedy_decode,
)
from ctcfusion.emissions import EmissionMatrix, SynthParams, synthesize_emissions
from ctcfusion.textnorm import BLANK, Alphabet, build_alphabet

NO_PRUNE = DecodeParams(beam_width=1024, alpha=0.0, beta=0.0, prune_log_floor=-math.inf)


def ab_alphabet():
    return Alphabet(("a", BLANK))


def matrix(alphabet, rows):
    return EmissionMatrix(values=np.log(np.array(rows)), alphabet=alphabet)


def one_hot(alphabet, path, floor=1e-12):
    v = alphabet.size
    rows = []
    for s in path:
        row = np.full(v, floor / v)
        row[s] = 1.0 - floor
        rows.append(row)
    return EmissionMatrix(values=np.log(np.array(rows)), alphabet=alphabet)


class TestCollapse:
    @pytest.mark.parametrize(
        "path,expected",
        [
            ([0, 0, 9, 1], [0, 1]),
            ([0, 9, 0], [0, 0]),
            ([9, 9], []),
            ([], []),
        ],
    )
    def test_examples(self, path, expected):
        assert collapse(path, blank_id=9) == expected


class TestGreedy:
    def test_one_hot_path(self):
        alph = build_alphabet(["ab"])
        em = one_hot(alph, [0, 0, alph.blank_id, 1])
        assert greedy_decode(em, alph) == "ab"

    def test_all_blank(self):
        alph = ab_alphabet()
        em = one_hot(alph, [1, 1, 1])
        assert greedy_decode(em, alph) == ""

    def test_recovers_synthesized(self):
        alph = build_alphabet(["halo dunia"])
        em = synthesize_emissions("halo dunia", alph, SynthParams(seed=5))
        assert greedy_decode(em, alph) == "halo dunia"


class TestExhaustive:
    def test_two_frame_example(self):
        em = matrix(ab_alphabet(), [[0.4, 0.6], [0.4, 0.6]])
        label, p = exhaustive_decode(em, ab_alphabet())
        assert label == "a"
        assert abs(p - 0.64) <= 1e-12

    def test_one_hot_certain(self):
        alph = build_alphabet(["ab"])
        em = one_hot(alph, [0, alph.blank_id, 1], floor=1e-15)
        label, p = exhaustive_decode(em, alph)
        assert label == "ab"
        assert abs(p - 1.0) <= 1e-9

    def test_tie_prefers_lexicographic(self):
        em = matrix(ab_alphabet(), [[0.5, 0.5]])
        assert exhaustive_decode(em, ab_alphabet()) == ("", 0.5)

    def test_mass_conservation(self):
        rng = np.random.default_rng(3)
        alph = build_alphabet(["abc"])
        logits = rng.normal(size=(4, alph.size))
        vals = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        em = EmissionMatrix(values=vals, alphabet=alph)
        masses = exhaustive_label_masses(em, alph)
        assert abs(sum(masses.values()) - 1.0) <= 1e-9

    def test_size_limit(self):
        alph = build_alphabet(["abcdefghij"])
        vals = np.full((10, alph.size), -np.log(alph.size))
        em = EmissionMatrix(values=vals, alphabet=alph)
        with pytest.raises(ValueError, match="infeasible"):
            exhaustive_decode(em, alph)


class TestBeamSearch:
    def test_two_frame_example_beats_empty(self):
        em = matrix(ab_alphabet(), [[0.4, 0.6], [0.4, 0.6]])
        ranked = beam_search_decode(em, ab_alphabet(), NO_PRUNE)
        assert ranked[0][0] == "a"
        assert abs(math.exp(ranked[0][1]) - 0.64) <= 1e-12
        assert ranked[1][0] == ""
        assert abs(math.exp(ranked[1][1]) - 0.36) <= 1e-12

    @pytest.mark.parametrize("width", [1, 2, 8, 64])
    def test_one_hot_any_width(self, width):
        alph = build_alphabet(["ab"])
        em = one_hot(alph, [0, alph.blank_id, 1])
        params = DecodeParams(beam_width=width)
        assert beam_search_decode(em, alph, params)[0][0] == "ab"
        assert greedy_decode(em, alph) == beam_search_decode(em, alph, params)[0][0]

    def test_oracle_agreement_random(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            v = int(rng.integers(2, 5))
            t = int(rng.integers(1, 7))
            alph = Alphabet(tuple(["a", "b", "c"][: v - 1]) + (BLANK,))
            logits = rng.normal(size=(t, v))
            vals = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
            em = EmissionMatrix(values=vals, alphabet=alph)
            label, p = exhaustive_decode(em, alph)
            top, score = beam_search_decode(em, alph, NO_PRUNE)[0]
            assert top == label
            assert abs(math.exp(score) - p) <= 1e-9


def tied_word_emissions():
    """Emissions where "b a" and "b c" are acoustically indistinguishable."""
    alph = build_alphabet(["b a", "b c"])
    d = alph.delimiter_id
    ib = alph.encode("b")[0]
    ia = alph.encode("a")[0]
    ic = alph.encode("c")[0]
    v = alph.size

    def frame(peaks):
        p = np.full(v, 1e-9)
        for s, pr in peaks.items():
            p[s] = pr
        return p / p.sum()

    rows = [frame({ib: 1.0}), frame({d: 1.0}), frame({ia: 0.5, ic: 0.5})]
    return alph, EmissionMatrix(values=np.log(np.array(rows)), alphabet=alph)


class TestLmFusion:
    def lm(self):
        return ngram.train([["b", "a"]] * 9 + [["b", "c"]], 2)

    def test_lm_breaks_acoustic_tie(self):
        alph, em = tied_word_emissions()
        params = DecodeParams(beam_width=16, alpha=0.5, beta=1.0, lm=self.lm())
        assert beam_search_decode(em, alph, params)[0][0] == "b a"

    def test_large_alpha_converges_to_lm_choice(self):
        alph, em = tied_word_emissions()
        for alpha in (0.5, 2.0, 8.0):
            params = DecodeParams(beam_width=16, alpha=alpha, beta=1.0, lm=self.lm())
            assert beam_search_decode(em, alph, params)[0][0] == "b a"

    def test_fusion_off_equivalence(self):
        alph, em = tied_word_emissions()
        with_lm = beam_search_decode(
            em, alph, DecodeParams(beam_width=16, alpha=0.0, beta=0.0, lm=self.lm())
        )
        without = beam_search_decode(
            em, alph, DecodeParams(beam_width=16, alpha=0.0, beta=0.0, lm=None)
        )
        assert [t for t, _ in with_lm] == [t for t, _ in without]
        assert all(
            abs(s1 - s2) <= 1e-12 for (_, s1), (_, s2) in zip(with_lm, without)
        )

    def test_empty_word_contributes_no_lm_term(self):
        # Hypotheses that emit adjacent delimiters must not be charged for
        # an empty "word"; compare against the same path without an LM.
        alph = build_alphabet(["a b"])
        d = alph.delimiter_id
        ia = alph.encode("a")[0]
        em = one_hot(alph, [ia, d, alph.blank_id, d, ia])
        params = DecodeParams(beam_width=8, alpha=0.5, beta=1.0, lm=self.lm())
        top, score = beam_search_decode(em, alph, params)[0]
        assert top == "a  a"
        # exactly two word completions scored: "a" at first delimiter, "a" at end
        bare = beam_search_decode(
            em, alph, DecodeParams(beam_width=8, alpha=0.0, beta=0.0)
        )[0]
        lm = self.lm()
        t1 = 0.5 * math.log(10) * lm.score_word((), "a") + 1.0
        t2 = 0.5 * math.log(10) * lm.score_word(("a",), "a") + 1.0
        assert abs(score - (bare[1] + t1 + t2)) <= 1e-9


class TestParams:
    def test_bad_beam_width(self):
        with pytest.raises(ValueError):
            DecodeParams(beam_width=0)

    def test_pruning_off_matches_default_on_peaky_input(self):
        alph = build_alphabet(["halo dunia"])
        em = synthesize_emissions(
            "halo dunia", alph, SynthParams(noise_epsilon=0.2, seed=9)
        )
        a = beam_search_decode(em, alph, DecodeParams(beam_width=16))[0][0]
        b = beam_search_decode(
            em, alph, DecodeParams(beam_width=16, prune_log_floor=-math.inf)
        )[0][0]
        assert a == b
