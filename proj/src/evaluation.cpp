#include "senti/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace senti {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("cosine: dimension mismatch");
    }
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw std::domain_error("cosine: zero-norm input");
    }
    return a.dot(b) / (na * nb);
}

std::vector<double> fractional_ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("pearson: length mismatch");
    }
    if (xs.size() < 2) {
        throw std::invalid_argument("pearson: need at least 2 points");
    }
    const auto n = static_cast<double>(xs.size());
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::domain_error("pearson: constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    return pearson(fractional_ranks(xs), fractional_ranks(ys));
}

namespace {

// Regularized incomplete beta via the continued-fraction expansion.
double betacf(double a, double b, double x) {
    const int kMaxIter = 200;
    const double kEps = 3e-14, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log(1.0 - x) + a * std::log(x)) *
                     betacf(b, a, 1.0 - x) / b;
}

}  // namespace

std::pair<double, double> metric_correlation(const std::vector<double>& scores,
                                             const std::vector<double>& accuracies) {
    if (scores.size() < 3) {
        throw std::invalid_argument("metric_correlation: need at least 3 points");
    }
    double rho = pearson(scores, accuracies);
    const double n = static_cast<double>(scores.size());
    const double df = n - 2.0;
    double p;
    if (std::fabs(rho) >= 1.0) {
        p = 0.0;
    } else {
        double t = rho * std::sqrt(df / (1.0 - rho * rho));
        // two-sided p from the t CDF via the incomplete beta
        p = incbeta(df / 2.0, 0.5, df / (df + t * t));
    }
    return {rho, p};
}

double alignment(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs) {
    if (pairs.empty()) {
        throw std::invalid_argument("alignment: empty pair set");
    }
    double s = 0.0;
    for (const auto& [x, y] : pairs) {
        s += (x - y).squaredNorm();
    }
    return s / static_cast<double>(pairs.size());
}

double uniformity(const std::vector<Eigen::VectorXd>& embeddings) {
    if (embeddings.size() < 2) {
        throw std::invalid_argument("uniformity: need at least 2 embeddings");
    }
    double s = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
            s += std::exp(-2.0 * (embeddings[i] - embeddings[j]).squaredNorm());
            ++count;
        }
    }
    return std::log(s / static_cast<double>(count));
}

PcaResult pca_project(const Eigen::MatrixXd& embeddings, int k) {
    if (embeddings.rows() < k + 1) {
        throw std::invalid_argument("pca_project: need at least k+1 embeddings");
    }
    Eigen::MatrixXd centered = embeddings.rowwise() - embeddings.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered /
                          static_cast<double>(embeddings.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    PcaResult out;
    out.coordinates.resize(embeddings.rows(), k);
    out.explained_variance.resize(k);
    // eigenvalues ascend; take the top k in descending order
    const Eigen::Index d = cov.cols();
    for (int c = 0; c < k; ++c) {
        Eigen::Index src = d - 1 - c;
        double ev = solver.eigenvalues()(src);
        if (ev <= 1e-12) {
            out.rank_deficient = true;
            out.coordinates.col(c).setZero();
            out.explained_variance(c) = 0.0;
        } else {
            out.coordinates.col(c) = centered * solver.eigenvectors().col(src);
            out.explained_variance(c) = ev;
        }
    }
    return out;
}

namespace {

// IRLS fit of a binary logistic model with L2 regularization (intercept
// unpenalized).
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& y, double reg) {
    const Eigen::Index n = x.rows(), d = x.cols();
    Eigen::MatrixXd xa(n, d + 1);
    xa << x, Eigen::VectorXd::Ones(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    for (int iter = 0; iter < 50; ++iter) {
        Eigen::VectorXd z = xa * w;
        Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
        Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            g += (p(i) - static_cast<double>(y[static_cast<std::size_t>(i)])) * xa.row(i).transpose();
        }
        g.head(d) += reg * w.head(d);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d + 1, d + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            double wi = std::max(p(i) * (1.0 - p(i)), 1e-9);
            h += wi * xa.row(i).transpose() * xa.row(i);
        }
        h.topLeftCorner(d, d) += reg * Eigen::MatrixXd::Identity(d, d);
        Eigen::VectorXd delta = h.ldlt().solve(g);
        w -= delta;
        if (delta.norm() < 1e-9) break;
    }
    return w;
}

double logistic_accuracy(const Eigen::VectorXd& w, const Eigen::MatrixXd& x,
                         const std::vector<int>& y) {
    if (x.rows() == 0) return 0.0;
    long correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double z = x.row(i).dot(w.head(x.cols())) + w(x.cols());
        int pred = z >= 0.0 ? 1 : 0;
        if (pred == y[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

}  // namespace

ProbeResult linear_probe(const Eigen::MatrixXd& train_x, const std::vector<int>& train_y,
                         const Eigen::MatrixXd& valid_x, const std::vector<int>& valid_y,
                         const Eigen::MatrixXd& test_x, const std::vector<int>& test_y,
                         const std::vector<double>& grid) {
    bool has0 = false, has1 = false;
    for (int label : train_y) (label ? has1 : has0) = true;
    if (!has0 || !has1) {
        throw std::invalid_argument("linear_probe: single-class training set");
    }
    if (grid.empty()) {
        throw std::invalid_argument("linear_probe: empty regularization grid");
    }
    double best_val = -1.0;
    double best_reg = grid.front();
    Eigen::VectorXd best_w;
    for (double reg : grid) {
        Eigen::VectorXd w = fit_logistic(train_x, train_y, reg);
        double val_acc = logistic_accuracy(w, valid_x, valid_y);
        if (val_acc > best_val) {
            best_val = val_acc;
            best_reg = reg;
            best_w = w;
        }
    }
    ProbeResult out;
    out.accuracy = logistic_accuracy(best_w, test_x, test_y);
    out.chosen_regularization = best_reg;
    out.train_size = train_x.rows();
    out.valid_size = valid_x.rows();
    out.test_size = test_x.rows();
    return out;
}

}  // namespace senti
