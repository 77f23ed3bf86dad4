#pragma once

#include "senti/lexicon.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace senti {

enum class Label { Positive, Negative };

struct Example {
    std::string text;
    Label label = Label::Positive;
};

// Contrastive training unit: two distinct positives and two distinct negatives.
struct Quadruple {
    Example p;
    Example p_plus;
    Example n;
    Example n_plus;
};

struct SgTSPair {
    Example a;
    Example b;
    int label = 0;  // 1 iff same polarity
};

struct DatasetSplits {
    std::string name;
    std::vector<Example> train;
    std::vector<Example> valid;
    std::vector<Example> test;
};

enum class DataFormat { Jsonl, Tsv };

// Reads a single split file. JSONL records are {"text": ..., "label":
// "positive"|"negative"}; TSV rows are text<TAB>label.
std::vector<Example> load_split(const std::string& path, DataFormat format);

// Loads a dataset directory holding train.<ext> and optionally valid.<ext>,
// test.<ext> (ext = jsonl or tsv).
DatasetSplits load_dataset(const std::string& dir, DataFormat format);

void save_split_jsonl(const std::vector<Example>& examples, const std::string& path);

// Deterministic 10%-style holdout: |valid| = round(fraction * |train|),
// remaining order preserved in both halves.
std::pair<std::vector<Example>, std::vector<Example>>
make_validation_split(const std::vector<Example>& train, double fraction, std::uint64_t seed);

// One quadruple per positive training sentence (anchored on positives).
std::vector<Quadruple> sample_quadruples(const std::vector<Example>& train, std::uint64_t seed);

// Shuffles, pairs consecutively, drops an odd leftover; label 1 iff same polarity.
std::vector<SgTSPair> build_sgts_benchmark(const std::vector<Example>& examples,
                                           std::uint64_t seed);

std::vector<SgTSPair> load_sgts_jsonl(const std::string& path);
void save_sgts_jsonl(const std::vector<SgTSPair>& pairs, const std::string& path);

// K examples per class plus a disjoint validation sample from the remainder.
std::pair<std::vector<Example>, std::vector<Example>>
sample_fewshot(const std::vector<Example>& train, int k, int val_size, std::uint64_t seed);

// Synthetic templated corpus whose sentiment is carried by lexicon words;
// used for desk-scale runs and smoke experiments.
struct ToyCorpus {
    std::vector<Example> train;
    std::vector<Example> valid;
    std::vector<LexiconEntry> lexicon_records;
};

ToyCorpus make_toy_corpus(int n_train, int n_valid, std::uint64_t seed);

}  // namespace senti
