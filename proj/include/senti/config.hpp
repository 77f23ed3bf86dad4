#pragma once

#include "senti/encoder.hpp"
#include "senti/objectives.hpp"
#include "senti/trainer.hpp"

#include <map>
#include <string>
#include <vector>

namespace senti {

// Flat key/value run configuration. Precedence: CLI --set > file > profile
// defaults. Two bundled profiles: "backbone" (full-scale) and "desk"
// (minutes on a CPU).
struct RunConfig {
    std::string profile = "backbone";

    std::string dataset_dir;
    std::string data_format = "jsonl";
    std::string lexicon_path;
    std::string output_dir = "run";
    std::string tokenizer_mode = "word";

    int num_layers = 12;
    int hidden_dim = 768;
    int num_heads = 12;
    int max_len = 128;

    HyperParams hp;      // tau 0.05, alpha 1, lambda_w 0.15
    TrainConfig train;   // lr 1e-5, batch 64, 20k steps, eval 500

    std::uint64_t seed = 42;

    static RunConfig defaults(const std::string& profile);

    // Reads `key = value` lines ('#' comments allowed), then applies
    // overrides in order.
    static RunConfig load(const std::string& path,
                          const std::vector<std::string>& overrides = {});
    static RunConfig from_overrides(const std::vector<std::string>& overrides);

    void set(const std::string& key, const std::string& value);

    // Fully resolved key=value dump, stable key order.
    std::string resolved() const;
    void save_resolved(const std::string& path) const;

    EncoderConfig encoder_config(int vocab_size) const;
    void validate_paths() const;
};

}  // namespace senti
