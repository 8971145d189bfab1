import random

import pytest

import rules as R
from generators import eta_expansion, generate_corpus, random_cut, random_derivation, random_formula
from normalizer import normalize_finite
from semantics import DIFFERENT, invariance_check
from proofgraph import to_graph, validate
from syntax import negate


@pytest.mark.parametrize("seed", range(5))
def test_eta_expansion_is_cut_free(seed):
    a = random_formula(random.Random(seed), depth=3)
    proof = eta_expansion(a)
    assert proof.conclusion == (negate(a), a)
    assert R.is_cut_free(proof)


def test_random_derivations_respect_the_size_cap():
    proof = random_derivation(random.Random(1), steps=20, max_size=30)
    assert proof.size <= 30
    assert validate(to_graph(proof, cycles=False)).valid


def test_corpus_is_deterministic():
    first = generate_corpus(3, 6)
    assert first == generate_corpus(3, 6)
    assert R.count_rules(first[2], {"cut"}) >= 1
    assert R.count_rules(first[5], {"cut"}) >= 1


@pytest.mark.parametrize("seed", range(5))
def test_random_cuts_normalize(seed):
    proof = random_cut(random.Random(seed))
    tree, _ = normalize_finite(proof)
    assert R.is_cut_free(tree)
    assert tree.conclusion == proof.conclusion


def test_corpus_proofs_are_valid_trees(corpus):
    assert len(corpus) == 9
    for proof in corpus:
        assert validate(to_graph(proof, cycles=False)).valid


def test_thousand_derivations_stay_within_the_cubic_bound():
    corpus = generate_corpus(seed=5, count=1000, steps=6, max_size=200)
    for proof in corpus:
        tree, trace = normalize_finite(proof)
        assert tree.conclusion == proof.conclusion
        assert len(trace.steps) <= trace.cubic_bound
        if trace.principal_only:
            assert len(trace.steps) <= trace.linear_bound
        if R.count_rules(proof, {"hyp"}) == 0:
            assert R.is_cut_free(tree)


def test_two_random_strategies_agree():
    rng = random.Random(17)
    verdicts = []
    for _ in range(200):
        proof = random_cut(rng, formula_depth=1)
        first, _ = normalize_finite(proof, policy="random", seed=1)
        second, _ = normalize_finite(proof, policy="random", seed=2)
        assert R.is_cut_free(first) and R.is_cut_free(second)
        assert first.conclusion == second.conclusion == proof.conclusion
        if first != second:
            verdicts.append(invariance_check(first, second).verdict)
    assert DIFFERENT not in verdicts
