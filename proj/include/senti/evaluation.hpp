#pragma once

#include "senti/corpus.hpp"
#include "senti/encoder.hpp"
#include "senti/masking.hpp"
#include "senti/objectives.hpp"
#include "senti/optim.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace senti {

// ---- statistics (scalar-typed, implemented in evaluation.cpp) -------------

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Tie-averaged fractional ranks.
std::vector<double> fractional_ranks(const std::vector<double>& xs);

// Pearson correlation of tie-averaged ranks.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Pearson rho with a two-sided p-value from the t-distribution transform.
std::pair<double, double> metric_correlation(const std::vector<double>& scores,
                                             const std::vector<double>& accuracies);

// Mean squared distance between same-class embedding pairs (unit-normalized
// inputs expected).
double alignment(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs);

// log mean over distinct pairs of exp(-2 ||x - y||^2).
double uniformity(const std::vector<Eigen::VectorXd>& embeddings);

struct PcaResult {
    Eigen::MatrixXd coordinates;      // n x k
    Eigen::VectorXd explained_variance;  // k
    bool rank_deficient = false;      // degenerate axes zero-filled
};

PcaResult pca_project(const Eigen::MatrixXd& embeddings, int k = 2);

// ---- linear probe -----------------------------------------------------------

struct ProbeResult {
    double accuracy = 0.0;
    double chosen_regularization = 0.0;
    long train_size = 0, valid_size = 0, test_size = 0;
};

// L2-regularized logistic classifier fit per grid value on train, selected
// by validation accuracy, scored once on test.
ProbeResult linear_probe(const Eigen::MatrixXd& train_x, const std::vector<int>& train_y,
                         const Eigen::MatrixXd& valid_x, const std::vector<int>& valid_y,
                         const Eigen::MatrixXd& test_x, const std::vector<int>& test_y,
                         const std::vector<double>& grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0});

// ---- embedding-level harnesses ----------------------------------------------

struct SgTSReport {
    double spearman_rho = 0.0;
    long n_pairs = 0;
    std::vector<double> predicted;  // per-pair cosine
};

template <class Scalar>
Eigen::MatrixXd embed_texts(const Encoder<Scalar>& encoder, const Tokenizer& tokenizer,
                            const std::vector<std::string>& texts) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), encoder.config().hidden_dim);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto e = encoder.embed(tokenizer.tokenize(texts[i]).ids);
        out.row(static_cast<Eigen::Index>(i)) = e.template cast<double>();
    }
    return out;
}

template <class Scalar>
SgTSReport sgts_score(const Encoder<Scalar>& encoder, const Tokenizer& tokenizer,
                      const std::vector<SgTSPair>& benchmark) {
    if (benchmark.empty()) {
        throw std::invalid_argument("sgts_score: empty benchmark");
    }
    SgTSReport report;
    std::vector<double> labels;
    for (const auto& pair : benchmark) {
        Eigen::VectorXd a =
            encoder.embed(tokenizer.tokenize(pair.a.text).ids).template cast<double>();
        Eigen::VectorXd b =
            encoder.embed(tokenizer.tokenize(pair.b.text).ids).template cast<double>();
        report.predicted.push_back(cosine(a, b));
        labels.push_back(static_cast<double>(pair.label));
    }
    report.n_pairs = static_cast<long>(benchmark.size());
    report.spearman_rho = spearman(report.predicted, labels);
    return report;
}

struct Neighbor {
    std::size_t index = 0;
    double score = 0.0;
};

// Top-k candidates by cosine to the query embedding; ties keep input order.
template <class Scalar>
std::vector<Neighbor> nn_query(const Encoder<Scalar>& encoder, const Tokenizer& tokenizer,
                               const std::string& query, const std::vector<Example>& candidates,
                               int k) {
    if (k <= 0) throw std::invalid_argument("nn_query: k must be positive");
    if (candidates.empty()) throw std::invalid_argument("nn_query: no candidates");
    Eigen::VectorXd q = encoder.embed(tokenizer.tokenize(query).ids).template cast<double>();
    std::vector<Neighbor> all(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Eigen::VectorXd c =
            encoder.embed(tokenizer.tokenize(candidates[i].text).ids).template cast<double>();
        all[i] = Neighbor{i, cosine(q, c)};
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Neighbor& a, const Neighbor& b) { return a.score > b.score; });
    all.resize(std::min<std::size_t>(static_cast<std::size_t>(k), all.size()));
    return all;
}

// ---- few-shot fine-tuning -----------------------------------------------------

struct FewShotConfig {
    int k = 5;
    int val_size = 500;
    int batch_size = 16;      // Table-11-style defaults
    double learning_rate = 1e-5;
    int max_epochs = 100;
    int eval_every = 20;      // steps
    double weight_decay = 0.01;
    int patience = 5;         // evaluations without improvement
};

struct FewShotResult {
    std::vector<double> per_seed;
    double mean = 0.0;
    double stddev = 0.0;
};

// Fine-tunes a copy of the encoder plus a zero-initialized linear head on K
// shots per class, early-stopping on a held-out validation sample, and
// reports test accuracy. Repeated per seed.
template <class Scalar>
FewShotResult fewshot_eval(const Encoder<Scalar>& base, const Tokenizer& tokenizer,
                           const std::vector<Example>& train, const std::vector<Example>& test,
                           const std::vector<std::uint64_t>& seeds, const FewShotConfig& cfg);

template <class Scalar>
double classify_accuracy(const Encoder<Scalar>& encoder, const ad::Mat<Scalar>& head_w,
                         const ad::Mat<Scalar>& head_b, const Tokenizer& tokenizer,
                         const std::vector<Example>& data);

}  // namespace senti

#include "senti/fewshot_impl.hpp"
