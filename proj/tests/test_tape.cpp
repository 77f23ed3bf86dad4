#include "senti/tape.hpp"

#include <doctest.h>

#include <functional>
#include <random>

namespace {

using Tape = senti::ad::Tape<double>;
using Mat = senti::ad::Mat<double>;
using senti::ad::Var;

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    }
    return m;
}

// Central finite differences of a scalar-valued function of leaf inputs.
double check_gradients(const std::vector<Mat>& inputs,
                       const std::function<Var(Tape&, const std::vector<Var>&)>& f) {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& in : inputs) leaves.push_back(tape.leaf(in));
    Var out = f(tape, leaves);
    REQUIRE(tape.value(out).size() == 1);
    tape.backward(out);

    const double eps = 1e-6;
    double worst = 0.0;
    for (std::size_t p = 0; p < inputs.size(); ++p) {
        for (Eigen::Index i = 0; i < inputs[p].size(); ++i) {
            auto eval = [&](double delta) {
                std::vector<Mat> shifted = inputs;
                shifted[p](i) += delta;
                Tape t2(false);
                std::vector<Var> l2;
                for (const auto& in : shifted) l2.push_back(t2.leaf(in));
                return t2.value(f(t2, l2))(0, 0);
            };
            double numeric = (eval(eps) - eval(-eps)) / (2 * eps);
            double analytic = tape.grad(leaves[p])(i);
            double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            worst = std::max(worst, std::abs(numeric - analytic) / denom);
        }
    }
    return worst;
}

Var sum_all(Tape& t, Var v) {
    // reduce a matrix to a scalar through ops already under test elsewhere
    const Mat& x = t.value(v);
    Mat left = Mat::Ones(1, x.rows());
    Mat right = Mat::Ones(x.cols(), 1);
    return t.matmul(t.matmul(t.leaf(left), v), t.leaf(right));
}

}  // namespace

TEST_CASE("tape: matmul/add/scale gradients") {
    std::mt19937_64 rng(1);
    std::vector<Mat> ins = {random_mat(3, 4, rng), random_mat(4, 2, rng), random_mat(3, 2, rng)};
    double err = check_gradients(ins, [](Tape& t, const std::vector<Var>& l) {
        return sum_all(t, t.add(t.scale(t.matmul(l[0], l[1]), 0.7), l[2]));
    });
    CHECK(err < 1e-7);
}

TEST_CASE("tape: matmul_nt matches explicit transpose") {
    std::mt19937_64 rng(2);
    Mat a = random_mat(3, 5, rng), b = random_mat(4, 5, rng);
    Tape t(false);
    CHECK((t.value(t.matmul_nt(t.leaf(a), t.leaf(b))) - a * b.transpose()).norm() ==
          doctest::Approx(0.0));
    double err = check_gradients({a, b}, [](Tape& tt, const std::vector<Var>& l) {
        return sum_all(tt, tt.matmul_nt(l[0], l[1]));
    });
    CHECK(err < 1e-7);
}

TEST_CASE("tape: gelu value and gradient") {
    Tape t(false);
    Mat x(1, 3);
    x << -1.0, 0.0, 2.0;
    Mat y = t.value(t.gelu(t.leaf(x)));
    CHECK(y(0, 1) == doctest::Approx(0.0));
    CHECK(y(0, 2) == doctest::Approx(2.0 * 0.5 * (1.0 + std::erf(2.0 / std::sqrt(2.0)))));
    std::mt19937_64 rng(3);
    double err = check_gradients({random_mat(2, 4, rng)},
                                 [](Tape& tt, const std::vector<Var>& l) {
                                     return sum_all(tt, tt.gelu(l[0]));
                                 });
    CHECK(err < 1e-6);
}

TEST_CASE("tape: layernorm rows have zero mean / unit variance, gradient ok") {
    std::mt19937_64 rng(4);
    Mat x = random_mat(3, 6, rng);
    Mat g = Mat::Ones(1, 6), b = Mat::Zero(1, 6);
    Tape t(false);
    Mat y = t.value(t.layernorm(t.leaf(x), t.leaf(g), t.leaf(b)));
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
        CHECK(y.row(r).mean() == doctest::Approx(0.0).epsilon(1e-9));
        double var = (y.row(r).array() - y.row(r).mean()).square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
    double err = check_gradients({x, random_mat(1, 6, rng), random_mat(1, 6, rng)},
                                 [](Tape& tt, const std::vector<Var>& l) {
                                     return sum_all(tt, tt.layernorm(l[0], l[1], l[2]));
                                 });
    CHECK(err < 1e-5);
}

TEST_CASE("tape: softmax rows sum to one, gradient ok") {
    std::mt19937_64 rng(5);
    Mat x = random_mat(3, 5, rng);
    Tape t(false);
    Mat y = t.value(t.softmax_rows(t.leaf(x)));
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
        CHECK(y.row(r).sum() == doctest::Approx(1.0));
        CHECK(y.row(r).minCoeff() > 0.0);
    }
    Mat w = random_mat(5, 1, rng);  // weighted sum so the gradient is nontrivial
    double err = check_gradients({x}, [&](Tape& tt, const std::vector<Var>& l) {
        return sum_all(tt, tt.matmul(tt.softmax_rows(l[0]), tt.leaf(w)));
    });
    CHECK(err < 1e-6);
}

TEST_CASE("tape: slice/concat/gather gradients") {
    std::mt19937_64 rng(6);
    Mat x = random_mat(4, 6, rng);
    double err = check_gradients({x}, [](Tape& t, const std::vector<Var>& l) {
        Var a = t.slice_cols(l[0], 0, 3);
        Var b = t.slice_cols(l[0], 3, 3);
        Var cat = t.concat_cols({b, a});
        Var g = t.gather_rows(cat, {0, 2, 2});  // repeated row exercises scatter-add
        return sum_all(t, g);
    });
    CHECK(err < 1e-8);

    err = check_gradients({x, x}, [](Tape& t, const std::vector<Var>& l) {
        return sum_all(t, t.concat_rows({l[0], l[1]}));
    });
    CHECK(err < 1e-8);
}

TEST_CASE("tape: cosine value and gradient") {
    Tape t(false);
    Mat a(1, 3), b(1, 3);
    a << 1, 0, 0;
    b << 0, 1, 0;
    CHECK(t.value(t.cosine(t.leaf(a), t.leaf(b)))(0, 0) == doctest::Approx(0.0));
    b << 2, 0, 0;
    CHECK(t.value(t.cosine(t.leaf(a), t.leaf(b)))(0, 0) == doctest::Approx(1.0));
    CHECK_THROWS(t.cosine(t.leaf(a), t.leaf(Mat::Zero(1, 3))));

    std::mt19937_64 rng(7);
    double err = check_gradients({random_mat(1, 5, rng), random_mat(1, 5, rng)},
                                 [](Tape& tt, const std::vector<Var>& l) {
                                     return tt.cosine(l[0], l[1]);
                                 });
    CHECK(err < 1e-6);
}

TEST_CASE("tape: weighted logsumexp drops zero-weight terms") {
    Tape t(false);
    Var a = t.leaf(Mat::Constant(1, 1, 3.0));
    Var b = t.leaf(Mat::Constant(1, 1, 100.0));  // would dominate if counted
    Var lse = t.logsumexp_weighted({a, b}, {1.0, 0.0});
    CHECK(t.value(lse)(0, 0) == doctest::Approx(3.0));

    std::mt19937_64 rng(8);
    double err = check_gradients(
        {random_mat(1, 1, rng), random_mat(1, 1, rng), random_mat(1, 1, rng)},
        [](Tape& tt, const std::vector<Var>& l) {
            return tt.logsumexp_weighted({l[0], l[1], l[2]}, {1.0, 0.5, 2.0});
        });
    CHECK(err < 1e-8);
}

TEST_CASE("tape: gated cross entropy skips zero-gate rows") {
    Mat logits(2, 4);
    logits << 1, 2, 3, 4, 10, -5, 0, 2;
    Tape t;
    Var l = t.leaf(logits);
    Var loss_gated = t.cross_entropy_rows(l, {2, 0}, {1, 0});
    t.backward(loss_gated);
    CHECK(t.grad(l).row(1).cwiseAbs().maxCoeff() == 0.0);  // gated-off row: no gradient

    Tape t2(false);
    Var both = t2.cross_entropy_rows(t2.leaf(logits), {2, 0}, {1, 1});
    Var first = t2.cross_entropy_rows(t2.leaf(logits.row(0)), {2}, {1});
    Var second = t2.cross_entropy_rows(t2.leaf(logits.row(1)), {0}, {1});
    CHECK(t2.value(both)(0, 0) ==
          doctest::Approx(t2.value(first)(0, 0) + t2.value(second)(0, 0)));

    std::mt19937_64 rng(9);
    double err = check_gradients({random_mat(3, 5, rng)},
                                 [](Tape& tt, const std::vector<Var>& l2) {
                                     return tt.cross_entropy_rows(l2[0], {1, 4, 0}, {1, 0, 1});
                                 });
    CHECK(err < 1e-7);
}
