#include "senti/lexicon.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace senti {

const char* to_string(Polarity p) {
    switch (p) {
        case Polarity::Positive: return "positive";
        case Polarity::Negative: return "negative";
        case Polarity::Multi: return "multi";
        case Polarity::None: return "none";
    }
    return "none";
}

std::string fold_case(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

namespace {

struct Accum {
    double pos_sum = 0.0;
    double neg_sum = 0.0;
    int count = 0;
};

void check_score(double v, const std::string& where) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::runtime_error("lexicon: score outside [0,1] at " + where);
    }
}

}  // namespace

Lexicon Lexicon::from_records(const std::vector<LexiconEntry>& records, std::string source) {
    std::unordered_map<std::string, Accum> acc;
    for (const auto& r : records) {
        std::string lemma = fold_case(r.lemma);
        if (lemma.empty()) {
            throw std::runtime_error("lexicon: empty lemma");
        }
        check_score(r.pos_score, "lemma '" + lemma + "'");
        check_score(r.neg_score, "lemma '" + lemma + "'");
        auto& a = acc[lemma];
        a.pos_sum += r.pos_score;
        a.neg_sum += r.neg_score;
        a.count += 1;
    }
    Lexicon lex;
    lex.source_path_ = std::move(source);
    for (const auto& [lemma, a] : acc) {
        lex.entries_[lemma] =
            LexiconEntry{lemma, a.pos_sum / a.count, a.neg_sum / a.count};
    }
    return lex;
}

Lexicon Lexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("lexicon: cannot open " + path);
    }
    std::vector<LexiconEntry> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) {
            fields.push_back(field);
        }
        if (fields.size() < 3 || fields[0].empty()) {
            throw std::runtime_error("lexicon: malformed record at " + path + ":" +
                                     std::to_string(lineno));
        }
        const std::string& lemma = fields[0];
        double pos, neg;
        try {
            pos = std::stod(fields[1]);
            neg = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw std::runtime_error("lexicon: malformed record at " + path + ":" +
                                     std::to_string(lineno));
        }
        if (!(pos >= 0.0 && pos <= 1.0) || !(neg >= 0.0 && neg <= 1.0)) {
            throw std::runtime_error("lexicon: score outside [0,1] at " + path +
                                     ":" + std::to_string(lineno));
        }
        records.push_back(LexiconEntry{lemma, pos, neg});
    }
    Lexicon lex = from_records(records, path);
    return lex;
}

std::optional<LexiconEntry> Lexicon::entry(const std::string& word) const {
    auto it = entries_.find(fold_case(word));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

Polarity Lexicon::polarity(const std::string& word) const {
    auto it = entries_.find(fold_case(word));
    if (it == entries_.end()) return Polarity::None;
    const auto& e = it->second;
    if (e.pos_score > 0.0 && e.neg_score == 0.0) return Polarity::Positive;
    if (e.pos_score == 0.0 && e.neg_score > 0.0) return Polarity::Negative;
    if (e.pos_score > 0.0 && e.neg_score > 0.0) return Polarity::Multi;
    return Polarity::None;
}

bool Lexicon::is_candidate(const std::string& word) const {
    Polarity p = polarity(word);
    return p == Polarity::Positive || p == Polarity::Negative;
}

}  // namespace senti
