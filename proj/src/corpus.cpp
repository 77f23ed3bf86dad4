#include "senti/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace senti {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Label parse_label(const std::string& s, const std::string& where) {
    if (s == "positive") return Label::Positive;
    if (s == "negative") return Label::Negative;
    throw std::runtime_error("unknown label '" + s + "' at " + where);
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void check_text(const std::string& text, const std::string& where) {
    if (trim(text).empty()) {
        throw std::runtime_error("empty text at " + where);
    }
}

// Partial Fisher-Yates: first k slots of a random permutation of [0, n).
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, n - 1);
        std::swap(idx[i], idx[d(rng)]);
    }
    idx.resize(std::min(k, n));
    return idx;
}

}  // namespace

std::vector<Example> load_split(const std::string& path, DataFormat format) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset file " + path);
    }
    std::vector<Example> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::string where = path + ":" + std::to_string(lineno);
        if (format == DataFormat::Jsonl) {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw std::runtime_error("malformed record at " + where + ": " + e.what());
            }
            if (!j.contains("text") || !j.contains("label")) {
                throw std::runtime_error("malformed record at " + where +
                                         ": missing text/label");
            }
            std::string text = j["text"].get<std::string>();
            check_text(text, where);
            out.push_back(Example{text, parse_label(j["label"].get<std::string>(), where)});
        } else {
            auto tab = line.rfind('\t');
            if (tab == std::string::npos) {
                throw std::runtime_error("malformed record at " + where + ": no tab");
            }
            std::string text = line.substr(0, tab);
            check_text(text, where);
            out.push_back(Example{text, parse_label(trim(line.substr(tab + 1)), where)});
        }
    }
    return out;
}

DatasetSplits load_dataset(const std::string& dir, DataFormat format) {
    const char* ext = format == DataFormat::Jsonl ? ".jsonl" : ".tsv";
    DatasetSplits splits;
    splits.name = fs::path(dir).filename().string();
    fs::path train = fs::path(dir) / (std::string("train") + ext);
    if (!fs::exists(train)) {
        throw std::runtime_error("dataset: missing " + train.string());
    }
    splits.train = load_split(train.string(), format);
    fs::path valid = fs::path(dir) / (std::string("valid") + ext);
    if (fs::exists(valid)) splits.valid = load_split(valid.string(), format);
    fs::path test = fs::path(dir) / (std::string("test") + ext);
    if (fs::exists(test)) splits.test = load_split(test.string(), format);
    return splits;
}

void save_split_jsonl(const std::vector<Example>& examples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& e : examples) {
        json j;
        j["text"] = e.text;
        j["label"] = e.label == Label::Positive ? "positive" : "negative";
        out << j.dump() << "\n";
    }
}

std::pair<std::vector<Example>, std::vector<Example>>
make_validation_split(const std::vector<Example>& train, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("validation fraction must be in (0,1)");
    }
    if (train.empty()) {
        throw std::invalid_argument("empty training set");
    }
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
    std::mt19937_64 rng(seed);
    auto picked = sample_indices(train.size(), k, rng);
    std::vector<bool> in_valid(train.size(), false);
    for (auto i : picked) in_valid[i] = true;
    std::vector<Example> rest, valid;
    for (std::size_t i = 0; i < train.size(); ++i) {
        (in_valid[i] ? valid : rest).push_back(train[i]);
    }
    return {std::move(rest), std::move(valid)};
}

std::vector<Quadruple> sample_quadruples(const std::vector<Example>& train, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < train.size(); ++i) {
        (train[i].label == Label::Positive ? pos : neg).push_back(i);
    }
    if (pos.size() < 2 || neg.size() < 2) {
        throw std::invalid_argument("need at least 2 positives and 2 negatives");
    }
    std::mt19937_64 rng(seed);
    std::vector<Quadruple> out;
    out.reserve(pos.size());
    std::uniform_int_distribution<std::size_t> dp(0, pos.size() - 1);
    std::uniform_int_distribution<std::size_t> dn(0, neg.size() - 1);
    for (std::size_t anchor : pos) {
        std::size_t partner;
        do {
            partner = pos[dp(rng)];
        } while (partner == anchor);
        std::size_t n1 = neg[dn(rng)];
        std::size_t n2;
        do {
            n2 = neg[dn(rng)];
        } while (n2 == n1);
        out.push_back(Quadruple{train[anchor], train[partner], train[n1], train[n2]});
    }
    return out;
}

std::vector<SgTSPair> build_sgts_benchmark(const std::vector<Example>& examples,
                                           std::uint64_t seed) {
    if (examples.size() < 2) {
        throw std::invalid_argument("need at least 2 examples for a benchmark");
    }
    std::vector<std::size_t> idx(examples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<SgTSPair> pairs;
    pairs.reserve(examples.size() / 2);
    for (std::size_t i = 0; i + 1 < idx.size(); i += 2) {
        const Example& a = examples[idx[i]];
        const Example& b = examples[idx[i + 1]];
        pairs.push_back(SgTSPair{a, b, a.label == b.label ? 1 : 0});
    }
    return pairs;
}

std::vector<SgTSPair> load_sgts_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<SgTSPair> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        SgTSPair p;
        p.a.text = j.at("a").get<std::string>();
        p.b.text = j.at("b").get<std::string>();
        p.label = j.at("label").get<int>();
        if (p.label != 0 && p.label != 1) {
            throw std::runtime_error("pair label must be 0/1 at " + path + ":" +
                                     std::to_string(lineno));
        }
        out.push_back(std::move(p));
    }
    return out;
}

void save_sgts_jsonl(const std::vector<SgTSPair>& pairs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& p : pairs) {
        json j;
        j["a"] = p.a.text;
        j["b"] = p.b.text;
        j["label"] = p.label;
        out << j.dump() << "\n";
    }
}

std::pair<std::vector<Example>, std::vector<Example>>
sample_fewshot(const std::vector<Example>& train, int k, int val_size, std::uint64_t seed) {
    if (k <= 0 || val_size < 0) {
        throw std::invalid_argument("bad few-shot sizes");
    }
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < train.size(); ++i) {
        (train[i].label == Label::Positive ? pos : neg).push_back(i);
    }
    auto uk = static_cast<std::size_t>(k);
    if (pos.size() < uk || neg.size() < uk ||
        train.size() < 2 * uk + static_cast<std::size_t>(val_size)) {
        throw std::invalid_argument("insufficient examples for few-shot sampling");
    }
    std::mt19937_64 rng(seed);
    auto pos_pick = sample_indices(pos.size(), uk, rng);
    auto neg_pick = sample_indices(neg.size(), uk, rng);
    std::vector<bool> used(train.size(), false);
    std::vector<Example> shots;
    for (auto i : pos_pick) { shots.push_back(train[pos[i]]); used[pos[i]] = true; }
    for (auto i : neg_pick) { shots.push_back(train[neg[i]]); used[neg[i]] = true; }
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (!used[i]) rest.push_back(i);
    }
    auto val_pick = sample_indices(rest.size(), static_cast<std::size_t>(val_size), rng);
    std::vector<Example> valset;
    for (auto i : val_pick) valset.push_back(train[rest[i]]);
    return {std::move(shots), std::move(valset)};
}

ToyCorpus make_toy_corpus(int n_train, int n_valid, std::uint64_t seed) {
    // Wide sentiment vocabularies: a handful of labeled examples can only
    // cover a fraction, so lexical memorization alone does not solve the task.
    static const std::vector<std::string> kPositiveWords = {
        "good", "great", "delicious", "wonderful", "excellent", "lovely",
        "charming", "brilliant", "superb", "delightful", "amazing", "fantastic",
        "terrific", "marvelous", "splendid", "stellar", "graceful", "inspired",
        "masterful", "radiant", "spirited", "vibrant", "gorgeous", "enchanting",
        "captivating", "refreshing", "polished", "elegant", "heartwarming",
        "joyful", "pleasant", "satisfying", "stunning", "glorious", "winning",
        "clever", "crisp", "dazzling", "engaging", "exquisite", "flawless",
        "gripping", "hilarious", "imaginative", "impressive", "luminous",
        "memorable", "nimble", "outstanding", "poetic", "riveting", "sharp",
        "sincere", "soulful", "sparkling", "sublime", "tender", "thrilling",
        "uplifting", "witty"};
    static const std::vector<std::string> kNegativeWords = {
        "bad", "awful", "terrible", "horrible", "bland", "dreadful",
        "tedious", "disappointing", "mediocre", "sloppy", "boring", "clumsy",
        "dull", "grating", "lifeless", "messy", "painful", "pointless",
        "shallow", "stale", "tiresome", "weak", "wooden", "abysmal",
        "aimless", "annoying", "atrocious", "cheap", "chaotic", "clunky",
        "contrived", "crude", "dismal", "dreary", "flat", "forgettable",
        "frustrating", "grim", "hollow", "incoherent", "insipid", "irritating",
        "lazy", "limp", "lousy", "muddled", "overwrought", "plodding",
        "predictable", "preachy", "repetitive", "shoddy", "soggy", "stilted",
        "strained", "tacky", "tone-deaf", "unconvincing", "vapid", "wretched"};
    static const std::vector<std::string> kNouns = {
        "food", "movie", "plot", "service", "acting", "soundtrack",
        "coffee", "ending", "script", "staff"};
    // Each template carries several same-polarity sentiment slots so that
    // masking one candidate still leaves sentiment visible to the encoder.
    static const std::vector<std::string> kTemplates = {
        "the {noun} is {adj} and {adj2} .",
        "i found the {adj} {noun} rather {adj2} .",
        "overall the {noun} was {adj} , even {adj2} .",
        "what a {adj} , {adj2} {noun} !",
        "honestly , the {adj} {noun} seemed {adj2} to me .",
        "critics called the {adj} {noun} {adj2} and {adj3} .",
    };

    auto render = [](std::string tmpl, const std::string& noun,
                     const std::vector<std::string>& adjs) {
        auto sub = [&](const std::string& key, const std::string& val) {
            auto at = tmpl.find(key);
            while (at != std::string::npos) {
                tmpl.replace(at, key.size(), val);
                at = tmpl.find(key, at + val.size());
            }
        };
        sub("{noun}", noun);
        sub("{adj2}", adjs[1]);
        sub("{adj3}", adjs[2]);
        sub("{adj}", adjs[0]);
        return tmpl;
    };

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> dt(0, kTemplates.size() - 1);
    std::uniform_int_distribution<std::size_t> dn(0, kNouns.size() - 1);
    std::uniform_int_distribution<std::size_t> dw(0, kPositiveWords.size() - 1);

    auto gen = [&](int n) {
        std::vector<Example> out;
        out.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            bool positive = (i % 2 == 0);
            const auto& words = positive ? kPositiveWords : kNegativeWords;
            std::vector<std::string> adjs = {words[dw(rng)], words[dw(rng)], words[dw(rng)]};
            out.push_back(Example{
                render(kTemplates[dt(rng)], kNouns[dn(rng)], adjs),
                positive ? Label::Positive : Label::Negative});
        }
        return out;
    };

    ToyCorpus toy;
    toy.train = gen(n_train);
    toy.valid = gen(n_valid);
    for (const auto& w : kPositiveWords) {
        toy.lexicon_records.push_back(LexiconEntry{w, 0.75, 0.0});
    }
    for (const auto& w : kNegativeWords) {
        toy.lexicon_records.push_back(LexiconEntry{w, 0.0, 0.75});
    }
    // one multi-polarity word so the never-mask path gets exercised
    toy.lexicon_records.push_back(LexiconEntry{"mixed", 0.5, 0.5});
    return toy;
}

}  // namespace senti
