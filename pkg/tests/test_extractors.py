import math

import numpy as np
import pytest

from helpers import make_document, random_document
from strass.errors import NoUsableSentences
from strass.extractors import (
    Selection,
    extract_baseline,
    extract_lead3,
    extract_oracle,
    extract_oracle_sent,
    extract_strass,
    render_summary,
    score_sentences,
)
from strass.model import AffineTransform
from strass.similarity import cos_sim


def unit(deg):
    return [math.cos(math.radians(deg)), math.sin(math.radians(deg))]


# five sentences on the unit circle at 0, 30, 60, 90 and 180 degrees; against
# [1, 0] the chain gives ncos+ = 1, 0.8770, 0.5409, 0.0819, -0.8362
FIVE = [unit(a) for a in (0, 30, 60, 90, 180)]
FIVE_NCOS = [1.0, 0.8769976080398815, 0.5409488237523354, 0.08189764750467081, -0.8362047049906584]


@pytest.fixture
def five():
    return make_document(FIVE, d=[1.0, 0.0])


class TestStrass:
    def test_single_sentence_always_selected(self):
        doc = make_document([[0.3, -2.0]], d=[1.0, 1.0])
        for t in (0.01, 0.5, 1.0):
            assert extract_strass(AffineTransform.identity(2), doc, t).indices == (0,)

    def test_exact_match_at_threshold_one(self, rng):
        vectors = rng.normal(size=(4, 3))
        doc = make_document(vectors, d=vectors[2])
        sel = extract_strass(AffineTransform.identity(3), doc, 1.0)
        assert sel.indices == (2,)
        assert sel.scores == (1.0,)

    def test_hand_evaluated_chain(self, five):
        sel = extract_strass(AffineTransform.identity(2), five, 0.8)
        assert sel.indices == (0, 1)
        np.testing.assert_allclose(sel.scores, FIVE_NCOS[:2], rtol=0, atol=1e-12)

    def test_transform_moves_target(self, five):
        # rotate the document embedding onto the 90 degree sentence
        rot = AffineTransform(np.array([[0.0, -1.0], [1.0, 0.0]]), np.zeros(2))
        assert extract_strass(rot, five, 1.0).indices == (3,)

    def test_no_usable_sentences(self):
        doc = make_document([[0.0, 0.0]], d=[1.0, 0.0])
        with pytest.raises(NoUsableSentences):
            extract_strass(AffineTransform.identity(2), doc, 0.8)

    def test_skips_degenerate_sentences(self):
        doc = make_document([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]], d=[1.0, 0.2])
        sel = extract_strass(AffineTransform.identity(2), doc, 0.01)
        assert 1 not in sel.indices
        assert np.isnan(score_sentences(doc, doc.embedding)[1])


class TestBaseline:
    def test_single_sentence(self):
        assert extract_baseline(make_document([[1.0, 2.0]]), 0.9).indices == (0,)

    def test_hand_evaluated_chain(self, five):
        assert extract_baseline(five, 0.8).indices == (0, 1)

    def test_equals_identity_strass(self, rng):
        for _ in range(50):
            doc = random_document(rng)
            t = float(rng.uniform(0.05, 1.0))
            assert extract_baseline(doc, t) == extract_strass(AffineTransform.identity(8), doc, t)


class TestOracle:
    def test_exact_sentence(self, rng):
        vectors = rng.normal(size=(5, 4))
        doc = make_document(vectors)
        assert extract_oracle(doc, vectors[3], 1.0).indices == (3,)

    def test_equidistant_selects_all(self):
        # the reference is orthogonal to every sentence, so all cosines tie at 0
        doc = make_document([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], d=[1, 0, 0])
        assert extract_oracle(doc, [0.0, 0.0, 1.0], 1.0).indices == (0, 1, 2, 3)

    def test_mean_of_two_sentences(self):
        doc = make_document(FIVE, d=[1.0, 0.0])
        ref = (np.array(FIVE[1]) + np.array(FIVE[4])) / 2
        # ncos+ against the ref: -0.5499, 0.1052, 0.6725, 1.0, 0.1052
        assert extract_oracle(doc, ref, 0.6).indices == (2, 3)
        assert extract_oracle(doc, ref, 0.8).indices == (3,)
        assert extract_oracle(doc, ref, 0.1).indices == (1, 2, 3, 4)


class TestOracleSent:
    def test_exact_matches(self, rng):
        vectors = rng.normal(size=(6, 5))
        doc = make_document(vectors)
        sel = extract_oracle_sent(doc, [vectors[5], vectors[3]])
        assert sel.indices == (3, 5)
        np.testing.assert_allclose(sel.scores, [1.0, 1.0])

    def test_deduplicates(self):
        doc = make_document([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.2]])
        sel = extract_oracle_sent(doc, [[0.1, 1.0], [-0.1, 1.0]])
        assert sel.indices == (1,)

    def test_tie_goes_to_lowest_index(self):
        doc = make_document([[1.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        assert extract_oracle_sent(doc, [[0.0, 1.0]]).indices == (1,)

    def test_matches_brute_force(self, rng):
        for _ in range(30):
            doc = random_document(rng, dim=4)
            refs = rng.normal(size=(int(rng.integers(1, 5)), 4))
            winners = set()
            for ref in refs:
                best, best_i = -2.0, None
                for i, s in enumerate(doc.vectors):
                    c = cos_sim(s, ref)
                    if c > best:
                        best, best_i = c, i
                winners.add(best_i)
            sel = extract_oracle_sent(doc, refs)
            assert sel.indices == tuple(sorted(winners))
            assert len(sel) <= len(refs)

    def test_requires_references(self):
        with pytest.raises(ValueError):
            extract_oracle_sent(make_document([[1.0, 0.0]]), [])


class TestLead3:
    def test_long(self, rng):
        assert extract_lead3(make_document(rng.normal(size=(10, 2)))).indices == (0, 1, 2)

    def test_short(self):
        assert extract_lead3(make_document([[1.0, 0.0], [0.0, 1.0]])).indices == (0, 1)

    def test_empty(self):
        doc = make_document(np.zeros((0, 2)), d=[0.0, 0.0], word_counts=[])
        assert extract_lead3(doc).indices == ()


class TestInvariants:
    def test_sorted_valid_and_monotone(self, rng):
        params = AffineTransform(np.eye(8) + rng.normal(0, 0.5, (8, 8)), rng.normal(0, 0.5, 8))
        for _ in range(40):
            doc = random_document(rng)
            ref = rng.normal(size=8)
            t1, t2 = sorted(rng.uniform(0.01, 1.0, size=2))
            for extract in (lambda t: extract_strass(params, doc, t),
                            lambda t: extract_baseline(doc, t),
                            lambda t: extract_oracle(doc, ref, t)):
                loose, tight = extract(t1), extract(t2)
                for sel in (loose, tight):
                    assert list(sel.indices) == sorted(set(sel.indices))
                    assert all(0 <= i < len(doc) for i in sel.indices)
                    assert len(sel) >= 1
                assert tight.as_set() <= loose.as_set()


def test_render_summary():
    doc = make_document([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], word_counts=[1, 2, 1])
    assert render_summary(doc, Selection((0, 2))) == "s0w0. s2w0."
    assert render_summary(doc, Selection(())) == ""
