import itertools

import pytest

from vcrsci.classify import Bucket, combine, outcome_for, verdict
from vcrsci.trend import Significance, fit_linear_values

A, I, B = Significance.ABOVE, Significance.INCONCLUSIVE, Significance.BELOW

# summary-figure placements: (documents outcome, citations outcome) -> bucket
WORKED_EXAMPLES = {
    "Veterinaria": (A, A, Bucket.BOTH_ADVANTAGE),
    "Economía, econometría y finanzas": (A, I, Bucket.ADVANTAGE_LEANING),
    "Otras ciencias sociales": (A, B, Bucket.CONTRADICTORY),
    "Matemática": (I, B, Bucket.DISADVANTAGE_LEANING),
    "Ciencias materiales": (B, B, Bucket.BOTH_DISADVANTAGE),
}


@pytest.mark.parametrize("name", sorted(WORKED_EXAMPLES))
def test_worked_examples(name):
    docs, cites, bucket = WORKED_EXAMPLES[name]
    assert combine(docs, cites) is bucket


def test_medicine_citations_only():
    assert combine(I, A) is Bucket.ADVANTAGE_LEANING


def test_totality_and_symmetry():
    seen = set()
    for d, c in itertools.product(Significance, repeat=2):
        bucket = combine(d, c)
        assert isinstance(bucket, Bucket)
        assert combine(c, d) is bucket
        seen.add(bucket)
    assert seen == set(Bucket)


def test_monotone_upgrades():
    up = {B: I, I: A}
    for d, c in itertools.product(Significance, repeat=2):
        base = combine(d, c).rank
        if d in up:
            assert combine(up[d], c).rank >= base
        if c in up:
            assert combine(d, up[c]).rank >= base


def test_rank_order():
    order = [Bucket.BOTH_DISADVANTAGE, Bucket.DISADVANTAGE_LEANING, Bucket.INCONCLUSIVE,
             Bucket.ADVANTAGE_LEANING, Bucket.BOTH_ADVANTAGE]
    assert [b.rank for b in order] == sorted(b.rank for b in order)
    assert Bucket.CONTRADICTORY.rank == Bucket.INCONCLUSIVE.rank


def _fit(n, level):
    t = list(range(n))
    y = [level + (0.01 if k % 2 else -0.01) for k in range(n)]
    return fit_linear_values(t, y, n - 1)


def test_verdict_keeps_measure_identity():
    v = verdict("area:X", _fit(10, 2.0), _fit(10, 0.3))
    assert (v.docs_outcome, v.cites_outcome) == (A, B)
    assert v.bucket is Bucket.CONTRADICTORY
    assert not v.insufficient_data
    w = verdict("area:X", _fit(10, 0.3), _fit(10, 2.0))
    assert (w.docs_outcome, w.cites_outcome) == (B, A)
    assert w.bucket is v.bucket


def test_insufficient_data_flag():
    v = verdict("area:X", _fit(4, 2.0), None)
    assert v.bucket is Bucket.INCONCLUSIVE
    assert v.flags == ("insufficient_data:documents", "insufficient_data:citations")
    assert v.insufficient_data
    assert outcome_for(_fit(4, 2.0)) is None
    assert outcome_for(_fit(5, 2.0)) is A


def test_one_measure_short():
    v = verdict("area:X", _fit(12, 2.0), _fit(3, 2.0))
    assert (v.docs_outcome, v.cites_outcome) == (A, I)
    assert v.bucket is Bucket.ADVANTAGE_LEANING
    assert v.flags == ("insufficient_data:citations",)
