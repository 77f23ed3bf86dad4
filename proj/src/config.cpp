#include "senti/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace senti {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + v + "'");
}

template <class T>
T parse_num(const std::string& v, const std::string& key) {
    std::istringstream ss(v);
    T out;
    if (!(ss >> out)) {
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
    }
    std::string rest;
    if (ss >> rest) {
        throw std::invalid_argument("config: '" + key + "' has trailing junk: '" + v + "'");
    }
    return out;
}

}  // namespace

RunConfig RunConfig::defaults(const std::string& profile) {
    RunConfig cfg;
    cfg.profile = profile;
    if (profile == "backbone") {
        // full-scale defaults
    } else if (profile == "desk") {
        cfg.num_layers = 4;
        cfg.hidden_dim = 128;
        cfg.num_heads = 4;
        cfg.train.batch_size = 16;
        cfg.train.max_steps = 1000;
        cfg.train.eval_interval = 50;
        cfg.train.learning_rate = 3e-4;
    } else {
        throw std::invalid_argument("config: unknown profile '" + profile + "'");
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "profile") {
        *this = defaults(value);
    } else if (key == "dataset_dir") {
        dataset_dir = value;
    } else if (key == "data_format") {
        if (value != "jsonl" && value != "tsv") {
            throw std::invalid_argument("config: data_format must be jsonl or tsv");
        }
        data_format = value;
    } else if (key == "lexicon_path") {
        lexicon_path = value;
    } else if (key == "output_dir") {
        output_dir = value;
    } else if (key == "tokenizer_mode") {
        if (value != "word") {
            throw std::invalid_argument(
                "config: tokenizer_mode '" + value + "' is not available (supported: word)");
        }
        tokenizer_mode = value;
    } else if (key == "num_layers") {
        num_layers = parse_num<int>(value, key);
    } else if (key == "hidden_dim") {
        hidden_dim = parse_num<int>(value, key);
    } else if (key == "num_heads") {
        num_heads = parse_num<int>(value, key);
    } else if (key == "max_len") {
        max_len = parse_num<int>(value, key);
    } else if (key == "tau") {
        hp.tau = parse_num<double>(value, key);
    } else if (key == "alpha") {
        hp.alpha = parse_num<double>(value, key);
    } else if (key == "lambda_w") {
        hp.lambda_w = parse_num<double>(value, key);
    } else if (key == "use_word_loss") {
        hp.use_word_loss = parse_bool(value, key);
    } else if (key == "use_pos_loss") {
        hp.use_pos_loss = parse_bool(value, key);
    } else if (key == "use_neg_loss") {
        hp.use_neg_loss = parse_bool(value, key);
    } else if (key == "learning_rate") {
        train.learning_rate = parse_num<double>(value, key);
    } else if (key == "batch_size") {
        train.batch_size = parse_num<int>(value, key);
    } else if (key == "max_steps") {
        train.max_steps = parse_num<int>(value, key);
    } else if (key == "eval_interval") {
        train.eval_interval = parse_num<int>(value, key);
    } else if (key == "mask_ratio") {
        train.mask_ratio = parse_num<double>(value, key);
    } else if (key == "weight_decay") {
        train.weight_decay = parse_num<double>(value, key);
    } else if (key == "seed") {
        seed = parse_num<std::uint64_t>(value, key);
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

namespace {

std::pair<std::string, std::string> split_kv(const std::string& line) {
    auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    }
    return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

}  // namespace

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    // profile line applies first so later file keys survive it
    std::vector<std::pair<std::string, std::string>> kvs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            kvs.push_back(split_kv(t));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(e.what()) + " at " + path + ":" +
                                        std::to_string(lineno));
        }
    }
    RunConfig cfg;
    for (const auto& [k, v] : kvs) {
        if (k == "profile") cfg = defaults(v);
    }
    for (const auto& [k, v] : kvs) {
        if (k != "profile") cfg.set(k, v);
    }
    for (const auto& o : overrides) {
        auto [k, v] = split_kv(o);
        cfg.set(k, v);
    }
    return cfg;
}

RunConfig RunConfig::from_overrides(const std::vector<std::string>& overrides) {
    RunConfig cfg;
    for (const auto& o : overrides) {
        auto [k, v] = split_kv(o);
        if (k == "profile") cfg = defaults(v);
    }
    for (const auto& o : overrides) {
        auto [k, v] = split_kv(o);
        if (k != "profile") cfg.set(k, v);
    }
    return cfg;
}

std::string RunConfig::resolved() const {
    std::ostringstream out;
    out << "profile = " << profile << "\n";
    out << "dataset_dir = " << dataset_dir << "\n";
    out << "data_format = " << data_format << "\n";
    out << "lexicon_path = " << lexicon_path << "\n";
    out << "output_dir = " << output_dir << "\n";
    out << "tokenizer_mode = " << tokenizer_mode << "\n";
    out << "num_layers = " << num_layers << "\n";
    out << "hidden_dim = " << hidden_dim << "\n";
    out << "num_heads = " << num_heads << "\n";
    out << "max_len = " << max_len << "\n";
    out << "tau = " << hp.tau << "\n";
    out << "alpha = " << hp.alpha << "\n";
    out << "lambda_w = " << hp.lambda_w << "\n";
    out << "use_word_loss = " << (hp.use_word_loss ? "true" : "false") << "\n";
    out << "use_pos_loss = " << (hp.use_pos_loss ? "true" : "false") << "\n";
    out << "use_neg_loss = " << (hp.use_neg_loss ? "true" : "false") << "\n";
    out << "learning_rate = " << train.learning_rate << "\n";
    out << "batch_size = " << train.batch_size << "\n";
    out << "max_steps = " << train.max_steps << "\n";
    out << "eval_interval = " << train.eval_interval << "\n";
    out << "mask_ratio = " << train.mask_ratio << "\n";
    out << "weight_decay = " << train.weight_decay << "\n";
    out << "seed = " << seed << "\n";
    return out.str();
}

void RunConfig::save_resolved(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << resolved();
}

EncoderConfig RunConfig::encoder_config(int vocab_size) const {
    EncoderConfig cfg;
    cfg.num_layers = num_layers;
    cfg.hidden_dim = hidden_dim;
    cfg.num_heads = num_heads;
    cfg.max_len = max_len;
    cfg.vocab_size = vocab_size;
    cfg.seed = seed;
    return cfg;
}

void RunConfig::validate_paths() const {
    namespace fs = std::filesystem;
    if (dataset_dir.empty() || !fs::exists(dataset_dir)) {
        throw std::invalid_argument("config: dataset_dir does not exist: '" + dataset_dir + "'");
    }
    if (lexicon_path.empty() || !fs::exists(lexicon_path)) {
        throw std::invalid_argument("config: lexicon_path does not exist: '" + lexicon_path +
                                    "'");
    }
}

}  // namespace senti
