#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace senti {

enum class Polarity { Positive, Negative, Multi, None };

const char* to_string(Polarity p);

struct LexiconEntry {
    std::string lemma;      // case-folded surface form
    double pos_score = 0.0; // in [0,1]
    double neg_score = 0.0; // in [0,1]
};

// Immutable after load; safe for concurrent reads.
class Lexicon {
public:
    Lexicon() = default;

    // TSV format: lemma<TAB>pos<TAB>neg, '#' comment lines and blank lines
    // skipped. Multiple records per lemma are averaged.
    static Lexicon load(const std::string& path);

    // Builds directly from records (same aggregation as load).
    static Lexicon from_records(const std::vector<LexiconEntry>& records,
                                std::string source = "<memory>");

    Polarity polarity(const std::string& word) const;
    bool is_candidate(const std::string& word) const;
    std::optional<LexiconEntry> entry(const std::string& word) const;

    std::size_t size() const { return entries_.size(); }
    const std::string& source_path() const { return source_path_; }

private:
    std::unordered_map<std::string, LexiconEntry> entries_;
    std::string source_path_;
};

// Case-folds ASCII; non-ASCII bytes pass through unchanged.
std::string fold_case(const std::string& s);

}  // namespace senti
