#pragma once

#include "senti/lexicon.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace senti {

// Reserved ids occupy the head of every vocabulary.
struct Reserved {
    static constexpr int kPad = 0;
    static constexpr int kCls = 1;
    static constexpr int kMask = 2;
    static constexpr int kUnk = 3;
    static constexpr int kCount = 4;
};

class Vocabulary {
public:
    Vocabulary();

    // Adds a token if absent; returns its id.
    int add(const std::string& token);
    int id(const std::string& token) const;  // kUnk when absent
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(tokens_.size()); }

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

struct TokenSequence {
    std::vector<std::string> tokens;  // includes the classification slot
    std::vector<int> ids;
    std::string text;
};

struct MaskedSequence {
    std::vector<int> input_ids;      // mask id at masked positions
    std::vector<int> mask_positions; // ascending
    std::vector<int> original_ids;   // parallel to mask_positions
    bool had_candidates = true;      // false -> word loss skips this sentence
};

// Case-folded word-level tokenizer: runs of alphanumerics (plus ' and -)
// are tokens, any other non-space character is a single-character token.
// A classification-slot token is prepended and output is right-truncated
// to max_len.
class Tokenizer {
public:
    Tokenizer(Vocabulary vocab, int max_len = 128);

    // Builds a vocabulary over a corpus, then constructs the tokenizer.
    static Tokenizer build(const std::vector<std::string>& texts, int max_len = 128);

    TokenSequence tokenize(const std::string& text) const;
    const Vocabulary& vocab() const { return vocab_; }
    int max_len() const { return max_len_; }

    static std::vector<std::string> split_words(const std::string& text);

private:
    Vocabulary vocab_;
    int max_len_;
};

// Ascending positions of Positive/Negative-polarity tokens; reserved
// positions are never candidates.
std::vector<int> find_candidate_positions(const TokenSequence& seq, const Lexicon& lexicon);

// Masks max(1, round(ratio * |candidates|)) candidate positions uniformly
// without replacement. With no candidates, returns the sequence unmasked
// and flags had_candidates = false.
MaskedSequence mask_sequence(const TokenSequence& seq, const Lexicon& lexicon,
                             double ratio, std::mt19937_64& rng);

// Fraction of candidate tokens over all tokens in a corpus (classification
// slot excluded from both counts).
double corpus_sentiword_fraction(const Lexicon& lexicon, const Tokenizer& tokenizer,
                                 const std::vector<std::string>& texts);

}  // namespace senti
