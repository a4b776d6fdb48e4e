"""Smoke test for the pysilverbench extension module.

Build and run from the workspace root:

    cargo build --release -p silverbench-python --features extension-module
    cp target/release/libpysilverbench.so python/pysilverbench.so
    python3 python/smoke_test.py
"""

import json
import math

import pysilverbench as sb


def main():
    links = sb.parse_pharaoh("1-1 0-0 2?1")
    assert links == [(0, 0, True), (1, 1, True), (2, 1, False)], links
    assert sb.format_pharaoh(links) == "0-0 1-1 2?1"

    r = sb.score([(0, 0)], [(0, 0), (1, 1)])
    assert r["precision"] == 1.0 and r["recall"] == 0.5
    assert math.isclose(r["f1"], 2 / 3, abs_tol=1e-12)
    r = sb.score([(0, 0), (1, 1)], [(0, 0, True), (1, 1, False)])
    assert r["aer"] == 0.0
    assert sb.partial_filter([(0, 0), (0, 1), (1, 1)], [(0, 0)]) == [(0, 0), (0, 1)]
    assert math.isclose(sb.pearson_r([1, 2, 3], [2, 2, 4]), math.sqrt(3) / 2, abs_tol=1e-9)
    try:
        sb.pearson_r([1, 2, 3], [5, 5, 5])
    except ValueError:
        pass
    else:
        raise AssertionError("constant input accepted")

    assert sb.symmetrize([(0, 1)], [(1, 0)], "gdfa") == [(0, 1), (1, 0)]
    assert sb.symmetrize([(0, 0), (1, 1)], [(0, 0)], "int") == [(0, 0)]

    bpe = sb.Vocab.train("bpe", ["aaab"], 3)
    assert bpe.merges == [("a", "a")]
    assert bpe.tokenize("aaab") == (["aa", "a", "b"], [(0, 3)])
    again = sb.Vocab.from_json(bpe.to_json())
    assert again.tokenize("baaa") == bpe.tokenize("baaa")

    lang, sources, targets, truth = sb.SyntheticLanguage.generate(sentences=100, reverse=True, seed=7)
    assert len(sources) == len(targets) == len(truth) == 100
    assert lang.translate(sources[0]) == targets[0]
    records, stats = lang.create_silver(sources)
    assert stats["sentences"] == 100
    for rec, gold in zip(records, truth):
        assert set(map(tuple, rec["links"])) <= set(gold), rec["id"]
    spec = json.loads(lang.to_json())
    assert spec["reorder"] == "reverse"

    pairs = [("he buys", "er kauft"), ("he", "er"), ("buys", "kauft")] * 50
    aligned = sb.align(pairs)
    assert aligned[0] == [(0, 0), (1, 1)], aligned[0]
    chars = sb.Vocab.train("bpe", [w for p in pairs for s in p for w in s.split()], 11)
    assert sb.align(pairs, chars) == aligned

    print("pysilverbench", sb.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
