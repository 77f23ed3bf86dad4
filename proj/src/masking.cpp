#include "senti/masking.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace senti {

namespace {
const std::vector<std::string> kReservedTokens = {"<pad>", "<cls>", "<mask>", "<unk>"};
}

Vocabulary::Vocabulary() {
    for (const auto& t : kReservedTokens) {
        index_[t] = static_cast<int>(tokens_.size());
        tokens_.push_back(t);
    }
}

int Vocabulary::add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    index_[token] = id;
    tokens_.push_back(token);
    return id;
}

int Vocabulary::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? Reserved::kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) {
        throw std::out_of_range("vocabulary id out of range");
    }
    return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& t : tokens_) {
        out << t << "\n";
    }
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Vocabulary v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        if (lineno < Reserved::kCount) {
            if (line != kReservedTokens[static_cast<std::size_t>(lineno)]) {
                throw std::runtime_error("vocabulary file missing reserved header: " + path);
            }
        } else if (!line.empty()) {
            v.add(line);
        }
        ++lineno;
    }
    if (lineno < Reserved::kCount) {
        throw std::runtime_error("vocabulary file truncated: " + path);
    }
    return v;
}

std::vector<std::string> Tokenizer::split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            words.push_back(fold_case(cur));
            cur.clear();
        }
    };
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'' || c == '-') {
            cur += c;
        } else if (std::isspace(u)) {
            flush();
        } else {
            flush();
            words.push_back(std::string(1, c));
        }
    }
    flush();
    return words;
}

Tokenizer::Tokenizer(Vocabulary vocab, int max_len)
    : vocab_(std::move(vocab)), max_len_(max_len) {
    if (max_len_ < 2) {
        throw std::invalid_argument("max_len must be at least 2");
    }
}

Tokenizer Tokenizer::build(const std::vector<std::string>& texts, int max_len) {
    Vocabulary v;
    for (const auto& t : texts) {
        for (const auto& w : split_words(t)) {
            v.add(w);
        }
    }
    return Tokenizer(std::move(v), max_len);
}

TokenSequence Tokenizer::tokenize(const std::string& text) const {
    TokenSequence seq;
    seq.text = text;
    seq.tokens.push_back(kReservedTokens[Reserved::kCls]);
    seq.ids.push_back(Reserved::kCls);
    for (const auto& w : split_words(text)) {
        if (static_cast<int>(seq.tokens.size()) >= max_len_) break;
        seq.tokens.push_back(w);
        seq.ids.push_back(vocab_.id(w));
    }
    return seq;
}

std::vector<int> find_candidate_positions(const TokenSequence& seq, const Lexicon& lexicon) {
    std::vector<int> out;
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        if (seq.ids[i] < Reserved::kCount) continue;
        if (lexicon.is_candidate(seq.tokens[i])) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

MaskedSequence mask_sequence(const TokenSequence& seq, const Lexicon& lexicon,
                             double ratio, std::mt19937_64& rng) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw std::invalid_argument("mask ratio must be in (0,1]");
    }
    MaskedSequence out;
    out.input_ids = seq.ids;
    std::vector<int> candidates = find_candidate_positions(seq, lexicon);
    if (candidates.empty()) {
        out.had_candidates = false;
        return out;
    }
    // round half up, floor of one
    auto k = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(ratio * static_cast<double>(candidates.size()))));
    k = std::min(k, candidates.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[d(rng)]);
    }
    candidates.resize(k);
    std::sort(candidates.begin(), candidates.end());
    for (int pos : candidates) {
        out.mask_positions.push_back(pos);
        out.original_ids.push_back(seq.ids[static_cast<std::size_t>(pos)]);
        out.input_ids[static_cast<std::size_t>(pos)] = Reserved::kMask;
    }
    return out;
}

double corpus_sentiword_fraction(const Lexicon& lexicon, const Tokenizer& tokenizer,
                                 const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw std::invalid_argument("candidate fraction undefined for an empty corpus");
    }
    long long total = 0;
    long long candidates = 0;
    for (const auto& t : texts) {
        TokenSequence seq = tokenizer.tokenize(t);
        total += static_cast<long long>(seq.tokens.size()) - 1;  // skip cls
        candidates += static_cast<long long>(find_candidate_positions(seq, lexicon).size());
    }
    if (total == 0) {
        throw std::invalid_argument("candidate fraction undefined: no tokens");
    }
    return static_cast<double>(candidates) / static_cast<double>(total);
}

}  // namespace senti
