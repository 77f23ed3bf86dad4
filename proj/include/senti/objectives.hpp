#pragma once

#include "senti/encoder.hpp"
#include "senti/lexicon.hpp"
#include "senti/masking.hpp"

#include <stdexcept>
#include <vector>

namespace senti {

struct HyperParams {
    double tau = 0.05;       // temperature
    double alpha = 1.0;      // weight on repelled (opposite-polarity) terms
    double lambda_w = 0.15;  // word-level loss weight
    bool use_word_loss = true;
    bool use_pos_loss = true;
    bool use_neg_loss = true;

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
        if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
        if (lambda_w < 0.0) throw std::invalid_argument("lambda_w must be non-negative");
    }
};

struct LossBreakdown {
    double l_w = 0.0;
    double l_pos = 0.0;  // batch mean
    double l_neg = 0.0;  // batch mean
    double l_s = 0.0;
    double total = 0.0;
};

// 0 iff the predicted word's polarity matches the original's (both being
// strict positive/negative); 1 otherwise, including predictions outside
// the lexicon. The original word must be a candidate.
inline int delta(const std::string& original_word, const std::string& predicted_word,
                 const Lexicon& lexicon) {
    Polarity orig = lexicon.polarity(original_word);
    if (orig != Polarity::Positive && orig != Polarity::Negative) {
        throw std::invalid_argument("delta: original word is not a masking candidate");
    }
    return lexicon.polarity(predicted_word) == orig ? 0 : 1;
}

inline double sentence_loss(const std::vector<double>& l_pos, const std::vector<double>& l_neg) {
    if (l_pos.size() != l_neg.size()) {
        throw std::invalid_argument("sentence_loss: length mismatch");
    }
    if (l_pos.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < l_pos.size(); ++i) s += l_pos[i] + l_neg[i];
    return s / static_cast<double>(l_pos.size());
}

inline double total_loss(double l_w, double l_s, const HyperParams& hp) {
    if (!std::isfinite(l_w) || !std::isfinite(l_s)) {
        throw std::invalid_argument("total_loss: non-finite input");
    }
    return hp.lambda_w * l_w + l_s;
}

// ---- tape-level objective construction ------------------------------------

// Word-level loss for one sentence: gated cross-entropy summed over masked
// positions. The delta gate is recomputed from the current argmax and is a
// constant w.r.t. gradients.
template <class Scalar>
ad::Var word_loss_sentence(ad::Tape<Scalar>& tape, const Encoder<Scalar>& encoder,
                           const std::vector<ad::Var>& pv, ad::Var hidden,
                           const MaskedSequence& masked, const Lexicon& lexicon,
                           const Vocabulary& vocab) {
    if (masked.mask_positions.empty()) {
        return tape.zero_scalar();
    }
    ad::Var logits = encoder.mlm_logits_on_tape(tape, pv, hidden, masked.mask_positions);
    std::vector<int> predicted = argmax_rows(tape.value(logits));
    std::vector<int> gates(predicted.size());
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        const std::string& original = vocab.token(masked.original_ids[k]);
        gates[k] = delta(original, vocab.token(predicted[k]), lexicon);
    }
    return tape.cross_entropy_rows(logits, masked.original_ids, gates);
}

// l_pos_i per quadruple: anchor p_i attracted to p_i+, repelled from every
// n_j in the batch, weighted by alpha. With alpha == 0 the loss is exactly 0.
template <class Scalar>
std::vector<ad::Var> contrastive_pos(ad::Tape<Scalar>& tape,
                                     const std::vector<ad::Var>& p,
                                     const std::vector<ad::Var>& p_plus,
                                     const std::vector<ad::Var>& n,
                                     const HyperParams& hp) {
    hp.validate();
    const std::size_t batch = p.size();
    if (p_plus.size() != batch || n.size() != batch) {
        throw std::invalid_argument("contrastive_pos: batch size mismatch");
    }
    const auto inv_tau = static_cast<Scalar>(1.0 / hp.tau);
    std::vector<ad::Var> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        ad::Var pair_sim = tape.scale(tape.cosine(p[i], p_plus[i]), inv_tau);
        std::vector<ad::Var> terms = {pair_sim};
        std::vector<Scalar> weights = {Scalar(1)};
        for (std::size_t j = 0; j < batch; ++j) {
            terms.push_back(tape.scale(tape.cosine(p[i], n[j]), inv_tau));
            weights.push_back(static_cast<Scalar>(hp.alpha));
        }
        out.push_back(tape.sub(tape.logsumexp_weighted(terms, weights), pair_sim));
    }
    return out;
}

// Mirror of contrastive_pos: anchor n_i, partner n_i+, repelled set {p_j+}.
template <class Scalar>
std::vector<ad::Var> contrastive_neg(ad::Tape<Scalar>& tape,
                                     const std::vector<ad::Var>& n,
                                     const std::vector<ad::Var>& n_plus,
                                     const std::vector<ad::Var>& p_plus,
                                     const HyperParams& hp) {
    return contrastive_pos(tape, n, n_plus, p_plus, hp);
}

template <class Scalar>
ad::Var mean_scalars(ad::Tape<Scalar>& tape, const std::vector<ad::Var>& xs) {
    return tape.scale(tape.sum_scalars(xs), Scalar(1) / static_cast<Scalar>(xs.size()));
}

// ---- whole-batch objective --------------------------------------------------

struct PreparedSentence {
    MaskedSequence masked;
};

struct PreparedQuadruple {
    PreparedSentence p, p_plus, n, n_plus;
};

template <class Scalar>
struct BatchLoss {
    ad::Var total;
    LossBreakdown breakdown;
};

// Builds the combined objective for a batch of prepared quadruples on the
// given tape. All four sentences of each quadruple are encoded from their
// corrupted token ids; pooling and the word loss share the forward pass.
template <class Scalar>
BatchLoss<Scalar> build_batch_loss(ad::Tape<Scalar>& tape, const Encoder<Scalar>& encoder,
                                   const std::vector<ad::Var>& pv,
                                   const std::vector<PreparedQuadruple>& batch,
                                   const Lexicon& lexicon, const Vocabulary& vocab,
                                   const HyperParams& hp) {
    hp.validate();
    if (batch.empty()) {
        throw std::invalid_argument("build_batch_loss: empty batch");
    }
    std::vector<ad::Var> pooled_p, pooled_pp, pooled_n, pooled_np;
    std::vector<ad::Var> word_terms;
    auto run = [&](const PreparedSentence& s, std::vector<ad::Var>& pooled) {
        ad::Var hidden = encoder.encode_on_tape(tape, pv, s.masked.input_ids);
        pooled.push_back(encoder.pool_on_tape(tape, hidden));
        if (hp.use_word_loss) {
            word_terms.push_back(
                word_loss_sentence(tape, encoder, pv, hidden, s.masked, lexicon, vocab));
        }
    };
    for (const auto& q : batch) {
        run(q.p, pooled_p);
        run(q.p_plus, pooled_pp);
        run(q.n, pooled_n);
        run(q.n_plus, pooled_np);
    }

    BatchLoss<Scalar> out;
    ad::Var l_w = hp.use_word_loss ? tape.sum_scalars(word_terms) : tape.zero_scalar();

    const std::size_t batch_n = batch.size();
    std::vector<ad::Var> per_example;
    double lpos_sum = 0.0, lneg_sum = 0.0;
    if (hp.use_pos_loss) {
        auto lp = contrastive_pos(tape, pooled_p, pooled_pp, pooled_n, hp);
        for (ad::Var v : lp) lpos_sum += static_cast<double>(tape.value(v)(0, 0));
        per_example.insert(per_example.end(), lp.begin(), lp.end());
    }
    if (hp.use_neg_loss) {
        auto ln = contrastive_neg(tape, pooled_n, pooled_np, pooled_pp, hp);
        for (ad::Var v : ln) lneg_sum += static_cast<double>(tape.value(v)(0, 0));
        per_example.insert(per_example.end(), ln.begin(), ln.end());
    }
    ad::Var l_s = per_example.empty()
                      ? tape.zero_scalar()
                      : tape.scale(tape.sum_scalars(per_example),
                                   Scalar(1) / static_cast<Scalar>(batch_n));

    out.total = tape.add(tape.scale(l_w, static_cast<Scalar>(hp.lambda_w)), l_s);
    out.breakdown.l_w = static_cast<double>(tape.value(l_w)(0, 0));
    out.breakdown.l_pos = lpos_sum / static_cast<double>(batch_n);
    out.breakdown.l_neg = lneg_sum / static_cast<double>(batch_n);
    out.breakdown.l_s = static_cast<double>(tape.value(l_s)(0, 0));
    out.breakdown.total = static_cast<double>(tape.value(out.total)(0, 0));
    return out;
}

}  // namespace senti
