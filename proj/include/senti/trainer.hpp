#pragma once

#include "senti/corpus.hpp"
#include "senti/evaluation.hpp"
#include "senti/objectives.hpp"
#include "senti/optim.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace senti {

struct TrainConfig {
    double learning_rate = 1e-5;
    int batch_size = 64;     // quadruples per step
    int max_steps = 20000;
    int eval_interval = 500;
    double mask_ratio = 0.1;
    double weight_decay = 0.01;
    double clip_norm = 1.0;
    std::uint64_t seed = 0;
    std::string output_dir;  // empty -> no checkpoint files

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
        if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
        if (eval_interval < 1) throw std::invalid_argument("eval_interval must be positive");
        if (!(mask_ratio > 0.0 && mask_ratio <= 1.0)) {
            throw std::invalid_argument("mask_ratio must be in (0,1]");
        }
    }
};

struct TrainingLogEntry {
    int step = 0;
    double l_w = 0.0, l_s = 0.0, total = 0.0;
    std::optional<double> sgts;
};

struct TrainingLog {
    std::vector<TrainingLogEntry> entries;
    int best_step = 0;
    double best_sgts = 0.0;

    void save_jsonl(const std::string& path) const;
};

template <class Scalar>
struct PretrainResult {
    Encoder<Scalar> best;
    TrainingLog log;
};

namespace detail {

template <class Scalar>
PreparedQuadruple prepare_quadruple(const Quadruple& q, const Tokenizer& tokenizer,
                                    const Lexicon& lexicon, double ratio,
                                    std::mt19937_64& rng) {
    auto prep = [&](const Example& ex) {
        return PreparedSentence{mask_sequence(tokenizer.tokenize(ex.text), lexicon, ratio, rng)};
    };
    return PreparedQuadruple{prep(q.p), prep(q.p_plus), prep(q.n), prep(q.n_plus)};
}

}  // namespace detail

// One gradient step; returns the breakdown evaluated before the update.
template <class Scalar>
LossBreakdown training_step(Encoder<Scalar>& encoder, AdamW<Scalar>& opt,
                            const std::vector<PreparedQuadruple>& batch,
                            const Lexicon& lexicon, const Vocabulary& vocab,
                            const HyperParams& hp) {
    ad::Tape<Scalar> tape;
    auto pv = encoder.make_leaves(tape);
    auto loss = build_batch_loss(tape, encoder, pv, batch, lexicon, vocab, hp);
    if (!std::isfinite(loss.breakdown.total)) {
        throw std::runtime_error("training diverged: non-finite loss");
    }
    tape.backward(loss.total);
    std::vector<ad::Mat<Scalar>> grads;
    grads.reserve(pv.size());
    for (ad::Var leaf : pv) grads.push_back(tape.grad(leaf));
    opt.step(grads);
    return loss.breakdown;
}

// Pre-training loop with periodic SgTS validation; returns the checkpoint
// with the highest benchmark score (ties resolved to the earliest step).
template <class Scalar>
PretrainResult<Scalar> pretrain(const std::vector<Quadruple>& quadruples,
                                const std::vector<SgTSPair>& benchmark,
                                Encoder<Scalar> encoder, const Tokenizer& tokenizer,
                                const Lexicon& lexicon, const HyperParams& hp,
                                const TrainConfig& cfg) {
    cfg.validate();
    hp.validate();
    if (quadruples.empty()) throw std::invalid_argument("pretrain: no quadruples");
    if (benchmark.empty()) throw std::invalid_argument("pretrain: empty benchmark");

    namespace fs = std::filesystem;
    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
    }

    AdamW<Scalar> opt(encoder.parameters(), static_cast<Scalar>(cfg.learning_rate),
                      static_cast<Scalar>(cfg.weight_decay),
                      static_cast<Scalar>(cfg.clip_norm));
    std::mt19937_64 rng(cfg.seed);

    TrainingLog log;
    Encoder<Scalar> best = encoder;
    bool have_best = false;

    auto evaluate = [&](int step, const LossBreakdown* bd) {
        double rho = sgts_score(encoder, tokenizer, benchmark).spearman_rho;
        TrainingLogEntry e;
        e.step = step;
        if (bd) {
            e.l_w = bd->l_w;
            e.l_s = bd->l_s;
            e.total = bd->total;
        }
        e.sgts = rho;
        log.entries.push_back(e);
        if (!cfg.output_dir.empty()) {
            encoder.save((fs::path(cfg.output_dir) /
                          ("step_" + std::to_string(step) + ".ckpt")).string());
        }
        if (!have_best || rho > log.best_sgts) {
            have_best = true;
            log.best_sgts = rho;
            log.best_step = step;
            best = encoder;
        }
    };

    evaluate(0, nullptr);

    std::vector<std::size_t> order(quadruples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t cursor = order.size();  // forces an initial shuffle

    for (int step = 1; step <= cfg.max_steps; ++step) {
        std::vector<PreparedQuadruple> batch;
        batch.reserve(static_cast<std::size_t>(cfg.batch_size));
        for (int b = 0; b < cfg.batch_size; ++b) {
            if (cursor >= order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            batch.push_back(detail::prepare_quadruple<Scalar>(
                quadruples[order[cursor++]], tokenizer, lexicon, cfg.mask_ratio, rng));
        }
        LossBreakdown bd;
        try {
            bd = training_step(encoder, opt, batch, lexicon, tokenizer.vocab(), hp);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(std::string(e.what()) + " at step " +
                                     std::to_string(step));
        }
        if (step % cfg.eval_interval == 0) {
            evaluate(step, &bd);
        } else {
            TrainingLogEntry e;
            e.step = step;
            e.l_w = bd.l_w;
            e.l_s = bd.l_s;
            e.total = bd.total;
            log.entries.push_back(e);
        }
    }
    return PretrainResult<Scalar>{std::move(best), std::move(log)};
}

}  // namespace senti
