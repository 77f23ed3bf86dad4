#pragma once

// Implementation detail of evaluation.hpp (fewshot_eval and helpers).

#include <algorithm>
#include <cmath>
#include <random>

namespace senti {

template <class Scalar>
double classify_accuracy(const Encoder<Scalar>& encoder, const ad::Mat<Scalar>& head_w,
                         const ad::Mat<Scalar>& head_b, const Tokenizer& tokenizer,
                         const std::vector<Example>& data) {
    if (data.empty()) return 0.0;
    long correct = 0;
    for (const auto& ex : data) {
        Eigen::RowVectorX<Scalar> e = encoder.embed(tokenizer.tokenize(ex.text).ids);
        Eigen::RowVectorX<Scalar> logits = e * head_w + head_b.row(0);
        int pred = logits(0) >= logits(1) ? 0 : 1;
        int want = ex.label == Label::Positive ? 0 : 1;
        if (pred == want) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace detail {

template <class Scalar>
struct FineTuneState {
    Encoder<Scalar> encoder;
    ad::Mat<Scalar> head_w, head_b;
};

// One supervised fine-tuning run; returns the best-on-validation state.
template <class Scalar>
FineTuneState<Scalar> finetune(const Encoder<Scalar>& base, const Tokenizer& tokenizer,
                               const std::vector<Example>& shots,
                               const std::vector<Example>& valset, const FewShotConfig& cfg,
                               std::uint64_t seed) {
    FineTuneState<Scalar> st{base,
                             ad::Mat<Scalar>::Zero(base.config().hidden_dim, 2),
                             ad::Mat<Scalar>::Zero(1, 2)};
    auto params = st.encoder.parameters();
    params.push_back(&st.head_w);
    params.push_back(&st.head_b);
    AdamW<Scalar> opt(params, static_cast<Scalar>(cfg.learning_rate),
                      static_cast<Scalar>(cfg.weight_decay));

    std::vector<std::vector<int>> ids;
    std::vector<int> labels;
    for (const auto& ex : shots) {
        ids.push_back(tokenizer.tokenize(ex.text).ids);
        labels.push_back(ex.label == Label::Positive ? 0 : 1);
    }

    double best_acc = classify_accuracy(st.encoder, st.head_w, st.head_b, tokenizer, valset);
    FineTuneState<Scalar> best = st;
    int bad_evals = 0;
    int step = 0;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.max_epochs && bad_evals < cfg.patience; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t at = 0; at < order.size() && bad_evals < cfg.patience;
             at += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
            ad::Tape<Scalar> tape;
            auto pv = st.encoder.make_leaves(tape);
            ad::Var wv = tape.leaf(st.head_w);
            ad::Var bv = tape.leaf(st.head_b);
            std::vector<ad::Var> pooled;
            std::vector<int> targets, gates;
            for (std::size_t i = at; i < end; ++i) {
                ad::Var h = st.encoder.encode_on_tape(tape, pv, ids[order[i]]);
                pooled.push_back(st.encoder.pool_on_tape(tape, h));
                targets.push_back(labels[order[i]]);
                gates.push_back(1);
            }
            ad::Var stacked = pooled.size() == 1 ? pooled[0] : tape.concat_rows(pooled);
            ad::Var logits = tape.add_rowvec(tape.matmul(stacked, wv), bv);
            ad::Var loss = tape.scale(tape.cross_entropy_rows(logits, targets, gates),
                                      Scalar(1) / static_cast<Scalar>(end - at));
            tape.backward(loss);
            std::vector<ad::Mat<Scalar>> grads;
            for (ad::Var leaf : pv) grads.push_back(tape.grad(leaf));
            grads.push_back(tape.grad(wv));
            grads.push_back(tape.grad(bv));
            opt.step(grads);
            ++step;
            if (step % cfg.eval_every == 0) {
                double acc =
                    classify_accuracy(st.encoder, st.head_w, st.head_b, tokenizer, valset);
                if (acc > best_acc) {
                    best_acc = acc;
                    best = st;
                    bad_evals = 0;
                } else {
                    ++bad_evals;
                }
            }
        }
    }
    // final state counts too if never evaluated at a step boundary
    double acc = classify_accuracy(st.encoder, st.head_w, st.head_b, tokenizer, valset);
    if (acc > best_acc) best = st;
    return best;
}

}  // namespace detail

template <class Scalar>
FewShotResult fewshot_eval(const Encoder<Scalar>& base, const Tokenizer& tokenizer,
                           const std::vector<Example>& train, const std::vector<Example>& test,
                           const std::vector<std::uint64_t>& seeds, const FewShotConfig& cfg) {
    if (seeds.empty()) throw std::invalid_argument("fewshot_eval: no seeds");
    FewShotResult result;
    for (std::uint64_t seed : seeds) {
        auto [shots, valset] = sample_fewshot(train, cfg.k, cfg.val_size, seed);
        auto best = detail::finetune(base, tokenizer, shots, valset, cfg, seed);
        result.per_seed.push_back(
            classify_accuracy(best.encoder, best.head_w, best.head_b, tokenizer, test));
    }
    double sum = 0.0;
    for (double a : result.per_seed) sum += a;
    result.mean = sum / static_cast<double>(result.per_seed.size());
    double var = 0.0;
    for (double a : result.per_seed) var += (a - result.mean) * (a - result.mean);
    result.stddev = std::sqrt(var / static_cast<double>(result.per_seed.size()));
    return result;
}

}  // namespace senti
