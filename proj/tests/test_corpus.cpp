#include "senti/corpus.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

using namespace senti;

namespace {

std::vector<Example> balanced(int n) {
    std::vector<Example> out;
    for (int i = 0; i < n; ++i) {
        out.push_back({"sentence number " + std::to_string(i),
                       i % 2 == 0 ? Label::Positive : Label::Negative});
    }
    return out;
}

}  // namespace

TEST_CASE("corpus: jsonl round trip") {
    const char* path = "corpus_test.jsonl";
    auto data = balanced(7);
    save_split_jsonl(data, path);
    auto back = load_split(path, DataFormat::Jsonl);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].text == data[i].text);
        CHECK(back[i].label == data[i].label);
    }
    {
        std::ofstream f(path);
        f << R"({"text": "ok", "label": "positive"})" << "\n";
        f << "not json\n";
    }
    CHECK_THROWS(load_split(path, DataFormat::Jsonl));
    {
        std::ofstream f(path);
        f << R"({"text": "ok", "label": "sideways"})" << "\n";
    }
    CHECK_THROWS(load_split(path, DataFormat::Jsonl));
    std::remove(path);
}

TEST_CASE("corpus: tsv loading") {
    const char* path = "corpus_test.tsv";
    {
        std::ofstream f(path);
        f << "a fine film\tpositive\n";
        f << "a dull film\tnegative\n";
    }
    auto back = load_split(path, DataFormat::Tsv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].label == Label::Positive);
    CHECK(back[1].label == Label::Negative);
    {
        std::ofstream f(path);
        f << "no tab here\n";
    }
    CHECK_THROWS(load_split(path, DataFormat::Tsv));
    std::remove(path);
}

TEST_CASE("corpus: validation split is deterministic and partitions") {
    auto data = balanced(100);
    auto [train1, valid1] = make_validation_split(data, 0.1, 5);
    auto [train2, valid2] = make_validation_split(data, 0.1, 5);
    CHECK(valid1.size() == 10);
    CHECK(train1.size() == 90);
    REQUIRE(valid1.size() == valid2.size());
    for (std::size_t i = 0; i < valid1.size(); ++i) CHECK(valid1[i].text == valid2[i].text);

    std::set<std::string> all;
    for (const auto& e : train1) all.insert(e.text);
    for (const auto& e : valid1) all.insert(e.text);
    CHECK(all.size() == 100);  // disjoint halves cover everything
}

TEST_CASE("corpus: quadruples satisfy invariants, one per positive") {
    auto data = balanced(40);  // 20 positive, 20 negative
    auto quads = sample_quadruples(data, 11);
    CHECK(quads.size() == 20);
    for (const auto& q : quads) {
        CHECK(q.p.label == Label::Positive);
        CHECK(q.p_plus.label == Label::Positive);
        CHECK(q.n.label == Label::Negative);
        CHECK(q.n_plus.label == Label::Negative);
        CHECK(q.p.text != q.p_plus.text);
        CHECK(q.n.text != q.n_plus.text);
    }
    auto again = sample_quadruples(data, 11);
    for (std::size_t i = 0; i < quads.size(); ++i) {
        CHECK(quads[i].p_plus.text == again[i].p_plus.text);
        CHECK(quads[i].n.text == again[i].n.text);
    }
    CHECK_THROWS(sample_quadruples({{"p", Label::Positive}, {"n", Label::Negative}}, 1));
}

TEST_CASE("corpus: benchmark pairing drops odd leftover, labels same-polarity") {
    auto data = balanced(9);
    auto pairs = build_sgts_benchmark(data, 3);
    CHECK(pairs.size() == 4);
    for (const auto& p : pairs) {
        CHECK(p.label == (p.a.label == p.b.label ? 1 : 0));
    }
    const char* path = "sgts_test.jsonl";
    save_sgts_jsonl(pairs, path);
    auto back = load_sgts_jsonl(path);
    REQUIRE(back.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(back[i].a.text == pairs[i].a.text);
        CHECK(back[i].label == pairs[i].label);
    }
    std::remove(path);
}

TEST_CASE("corpus: fewshot sample is balanced and disjoint from validation") {
    auto data = balanced(200);
    auto [shots, val] = sample_fewshot(data, 5, 50, 17);
    CHECK(shots.size() == 10);
    CHECK(val.size() == 50);
    int pos = 0;
    for (const auto& e : shots) pos += e.label == Label::Positive;
    CHECK(pos == 5);
    std::set<std::string> shot_texts;
    for (const auto& e : shots) shot_texts.insert(e.text);
    for (const auto& e : val) CHECK(shot_texts.count(e.text) == 0);
}

TEST_CASE("corpus: toy corpus is balanced and lexicon-bearing") {
    auto toy = make_toy_corpus(100, 20, 9);
    CHECK(toy.train.size() == 100);
    CHECK(toy.valid.size() == 20);
    int pos = 0;
    for (const auto& e : toy.train) pos += e.label == Label::Positive;
    CHECK(pos == 50);
    CHECK(!toy.lexicon_records.empty());
    auto lex = Lexicon::from_records(toy.lexicon_records);
    int with_candidate = 0;
    for (const auto& e : toy.train) {
        std::istringstream ss(e.text);
        std::string w;
        bool found = false;
        while (ss >> w) found = found || lex.is_candidate(fold_case(w));
        with_candidate += found;
    }
    CHECK(with_candidate == 100);  // every sentence carries a sentiment word
}
