import pytest

from app.analysis.extract import extract_scdts
from app.analysis.frontend import load_program
from app.analysis.miner import Corpus, brute_force_frequent, frequent_subtrees, is_frequent, support
from app.analysis.trees import enumerate_subtrees, parse_tree, render
from app.exceptions import AnalysisError, PatternLimitError
from app.models.extraction import ExtractionConfig
from app.utils.testkit import SeededGenerator

EXPECTED_PATTERNS = [
    "GetModuleFileName(1(0))",
    "GetModuleFileName(1(0),2>1(CopyFile))",
    "GetModuleFileName(2>1(CopyFile))",
]


def _corpus(*texts):
    return Corpus.from_entries((f"t{i}", [parse_tree(text)]) for i, text in enumerate(texts))


def _training_corpus(paths):
    return Corpus.from_entries((path, extract_scdts(load_program(path), ExtractionConfig())) for path in paths)


def test_support_counts_trees_containing_the_pattern():
    corpus = _corpus("A(1(B))", "A(1(C))", "C(1>1(A(1(B))))", "D")
    assert support(parse_tree("A(1(B))"), corpus) == 0.5
    assert support(parse_tree("A"), corpus) == 0.75
    assert support(parse_tree("A"), Corpus(())) == 0.0


def test_corpus_flattens_files_in_order():
    corpus = Corpus.from_entries([("a", [parse_tree("B"), parse_tree("A")]), ("b", [parse_tree("A")])])
    assert [render(t) for t in corpus.trees] == ["A", "B", "A"]
    assert len(corpus) == 3


def test_frequency_threshold_is_inclusive():
    assert is_frequent(3, 5, 0.6)
    assert not is_frequent(2, 5, 0.6)
    assert not is_frequent(0, 0, 0.5)


@pytest.mark.parametrize("k", [0, -0.1, 1.5])
def test_threshold_out_of_range(k):
    with pytest.raises(AnalysisError):
        frequent_subtrees(_corpus("A"), k)


def test_single_tree_at_full_support_yields_all_its_subtrees():
    tree = parse_tree("A(1(x),2>1(B(1(y))))")
    mined = frequent_subtrees(Corpus.from_entries([("only", [tree])]), 1.0)
    assert set(mined.patterns) == enumerate_subtrees(tree)


@pytest.mark.parametrize("seed", range(100))
def test_miner_matches_brute_force(seed):
    generator = SeededGenerator(seed)
    corpus = generator.gen_corpus(max_trees=8, max_nodes=6)
    for k in (0.25, 0.5, 1.0):
        mined = frequent_subtrees(corpus, k)
        assert mined.patterns == brute_force_frequent(corpus, k).patterns, f"k={k}"


def test_pattern_cap():
    corpus = _corpus("A(1(a),1(b),1(c),1(d),1(e))")
    with pytest.raises(PatternLimitError) as info:
        frequent_subtrees(corpus, 1.0, max_patterns=10)
    assert info.value.exit_code == 2


def test_min_nodes_filter_and_benign_exclusion():
    mined = frequent_subtrees(_corpus("A(1(B),2(C))", "A(1(B))"), 1.0)
    assert [render(p) for p in mined.filter_min_nodes(2)] == ["A(1(B))"]
    assert [render(p) for p in mined.excluding([parse_tree("X(1>1(A(1(B))))")])] == []
    assert [render(p) for p in mined.excluding([parse_tree("A")])] == ["A(1(B))", "B"]


def test_golden_training_corpus(training_files):
    corpus = _training_corpus(training_files)
    assert len(corpus) == 18
    mined = frequent_subtrees(corpus, 0.6)
    assert mined.patterns == brute_force_frequent(corpus, 0.6).patterns
    assert [render(p) for p in mined.filter_min_nodes(2)] == EXPECTED_PATTERNS


@pytest.mark.parametrize("seed", range(60))
def test_subtrees_of_frequent_patterns_are_frequent(seed):
    corpus = SeededGenerator(seed).gen_corpus(max_trees=8, max_nodes=6)
    for k in (0.25, 0.5, 1.0):
        mined = set(frequent_subtrees(corpus, k).patterns)
        for pattern in mined:
            for part in enumerate_subtrees(pattern):
                assert part in mined, f"k={k}: {render(part)} de {render(pattern)}"
                assert support(part, corpus) >= support(pattern, corpus)


@pytest.mark.parametrize("seed", range(60))
def test_raising_the_threshold_never_adds_patterns(seed):
    corpus = SeededGenerator(seed).gen_corpus(max_trees=8, max_nodes=6)
    thresholds = (0.1, 0.25, 0.5, 0.75, 1.0)
    mined = [set(frequent_subtrees(corpus, k).patterns) for k in thresholds]
    for lower, higher in zip(mined, mined[1:]):
        assert higher <= lower
