#pragma once

// Reverse-mode autodiff over dense Eigen matrices. Values are computed
// eagerly at op-construction time; node creation order is a topological
// order, so backward() is a single reverse sweep.

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace senti::ad {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

template <class Scalar>
class Tape {
public:
    using M = Mat<Scalar>;

    explicit Tape(bool track_gradients = true) : track_(track_gradients) {}

    bool tracking() const { return track_; }

    Var leaf(const M& value) {
        return push(value);
    }

    const M& value(Var v) const { return nodes_[check(v)].value; }
    const M& grad(Var v) const { return nodes_[check(v)].grad; }

    std::size_t size() const { return nodes_.size(); }

    // Seeds d(root)/d(root) = 1 and sweeps the tape in reverse.
    // root must be a 1x1 scalar node.
    void backward(Var root) {
        if (!track_) {
            throw std::logic_error("backward() on a non-tracking tape");
        }
        auto& r = nodes_[check(root)];
        if (r.value.rows() != 1 || r.value.cols() != 1) {
            throw std::logic_error("backward() root must be scalar");
        }
        r.grad(0, 0) = Scalar(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            if (it->backward) {
                it->backward();
            }
        }
    }

    // ---- primitive ops ------------------------------------------------

    Var matmul(Var a, Var b) {
        M out = value(a) * value(b);
        Var r = push(std::move(out));
        record(r, [this, a, b, r] {
            nodes_[a.id].grad.noalias() += nodes_[r.id].grad * nodes_[b.id].value.transpose();
            nodes_[b.id].grad.noalias() += nodes_[a.id].value.transpose() * nodes_[r.id].grad;
        });
        return r;
    }

    // a * b^T
    Var matmul_nt(Var a, Var b) {
        M out = value(a) * value(b).transpose();
        Var r = push(std::move(out));
        record(r, [this, a, b, r] {
            nodes_[a.id].grad.noalias() += nodes_[r.id].grad * nodes_[b.id].value;
            nodes_[b.id].grad.noalias() += nodes_[r.id].grad.transpose() * nodes_[a.id].value;
        });
        return r;
    }

    Var add(Var a, Var b) {
        Var r = push(value(a) + value(b));
        record(r, [this, a, b, r] {
            nodes_[a.id].grad += nodes_[r.id].grad;
            nodes_[b.id].grad += nodes_[r.id].grad;
        });
        return r;
    }

    Var scale(Var a, Scalar c) {
        Var r = push(value(a) * c);
        record(r, [this, a, c, r] {
            nodes_[a.id].grad += nodes_[r.id].grad * c;
        });
        return r;
    }

    // c + row-vector bias broadcast over each row of a.
    Var add_rowvec(Var a, Var bias) {
        M out = value(a);
        out.rowwise() += Eigen::RowVectorX<Scalar>(value(bias).row(0));
        Var r = push(std::move(out));
        record(r, [this, a, bias, r] {
            nodes_[a.id].grad += nodes_[r.id].grad;
            nodes_[bias.id].grad.row(0) += nodes_[r.id].grad.colwise().sum();
        });
        return r;
    }

    Var gelu(Var a) {
        const M& x = value(a);
        M out = x.unaryExpr([](Scalar v) {
            return Scalar(0.5) * v * (Scalar(1) + std::erf(v / Scalar(std::sqrt(2.0))));
        });
        Var r = push(std::move(out));
        record(r, [this, a, r] {
            const M& x2 = nodes_[a.id].value;
            const Scalar inv_sqrt2 = Scalar(1) / Scalar(std::sqrt(2.0));
            const Scalar inv_sqrt2pi = Scalar(1) / Scalar(std::sqrt(2.0 * M_PI));
            M d = x2.unaryExpr([&](Scalar v) {
                Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(v * inv_sqrt2));
                Scalar pdf = inv_sqrt2pi * std::exp(Scalar(-0.5) * v * v);
                return cdf + v * pdf;
            });
            nodes_[a.id].grad.array() += nodes_[r.id].grad.array() * d.array();
        });
        return r;
    }

    // Row-wise layer normalization with gain/bias (1 x d each).
    Var layernorm(Var a, Var gain, Var bias, Scalar eps = Scalar(1e-5)) {
        const M& x = value(a);
        const auto n = x.cols();
        M xhat(x.rows(), n);
        Eigen::VectorX<Scalar> inv_std(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            Scalar mu = x.row(i).mean();
            Scalar var = (x.row(i).array() - mu).square().sum() / Scalar(n);
            Scalar is = Scalar(1) / std::sqrt(var + eps);
            inv_std(i) = is;
            xhat.row(i) = (x.row(i).array() - mu) * is;
        }
        M out = xhat;
        out.array().rowwise() *= value(gain).row(0).array();
        out.rowwise() += Eigen::RowVectorX<Scalar>(value(bias).row(0));
        Var r = push(std::move(out));
        record(r, [this, a, gain, bias, r, xhat, inv_std] {
            const M& g = nodes_[r.id].grad;
            const auto& gamma = nodes_[gain.id].value.row(0);
            const auto n = Scalar(xhat.cols());
            nodes_[gain.id].grad.row(0) += (g.array() * xhat.array()).colwise().sum().matrix();
            nodes_[bias.id].grad.row(0) += g.colwise().sum();
            for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
                Eigen::RowVectorX<Scalar> dxhat = g.row(i).cwiseProduct(gamma);
                Scalar s1 = dxhat.sum();
                Scalar s2 = dxhat.cwiseProduct(xhat.row(i)).sum();
                nodes_[a.id].grad.row(i).array() +=
                    inv_std(i) / n * (n * dxhat.array() - s1 - xhat.row(i).array() * s2);
            }
        });
        return r;
    }

    // Row-wise softmax (used for attention probabilities).
    Var softmax_rows(Var a) {
        const M& x = value(a);
        M out(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            Scalar mx = x.row(i).maxCoeff();
            Eigen::RowVectorX<Scalar> e = (x.row(i).array() - mx).exp();
            out.row(i) = e / e.sum();
        }
        Var r = push(std::move(out));
        record(r, [this, a, r] {
            const M& p = nodes_[r.id].value;
            const M& g = nodes_[r.id].grad;
            for (Eigen::Index i = 0; i < p.rows(); ++i) {
                Scalar dot = g.row(i).cwiseProduct(p.row(i)).sum();
                nodes_[a.id].grad.row(i).array() +=
                    p.row(i).array() * (g.row(i).array() - dot);
            }
        });
        return r;
    }

    Var slice_cols(Var a, Eigen::Index start, Eigen::Index n) {
        Var r = push(value(a).middleCols(start, n));
        record(r, [this, a, r, start, n] {
            nodes_[a.id].grad.middleCols(start, n) += nodes_[r.id].grad;
        });
        return r;
    }

    Var concat_cols(const std::vector<Var>& parts) {
        assert(!parts.empty());
        Eigen::Index rows = value(parts[0]).rows();
        Eigen::Index cols = 0;
        for (Var p : parts) cols += value(p).cols();
        M out(rows, cols);
        Eigen::Index at = 0;
        for (Var p : parts) {
            out.middleCols(at, value(p).cols()) = value(p);
            at += value(p).cols();
        }
        Var r = push(std::move(out));
        record(r, [this, parts, r] {
            Eigen::Index at2 = 0;
            for (Var p : parts) {
                Eigen::Index w = nodes_[p.id].value.cols();
                nodes_[p.id].grad += nodes_[r.id].grad.middleCols(at2, w);
                at2 += w;
            }
        });
        return r;
    }

    Var concat_rows(const std::vector<Var>& parts) {
        assert(!parts.empty());
        Eigen::Index cols = value(parts[0]).cols();
        Eigen::Index rows = 0;
        for (Var p : parts) rows += value(p).rows();
        M out(rows, cols);
        Eigen::Index at = 0;
        for (Var p : parts) {
            out.middleRows(at, value(p).rows()) = value(p);
            at += value(p).rows();
        }
        Var r = push(std::move(out));
        record(r, [this, parts, r] {
            Eigen::Index at2 = 0;
            for (Var p : parts) {
                Eigen::Index h = nodes_[p.id].value.rows();
                nodes_[p.id].grad += nodes_[r.id].grad.middleRows(at2, h);
                at2 += h;
            }
        });
        return r;
    }

    // Gathers rows of a table (embedding lookup); backward scatter-adds.
    Var gather_rows(Var table, const std::vector<int>& rows) {
        const M& t = value(table);
        M out(static_cast<Eigen::Index>(rows.size()), t.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.row(static_cast<Eigen::Index>(i)) = t.row(rows[i]);
        }
        Var r = push(std::move(out));
        record(r, [this, table, rows, r] {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                nodes_[table.id].grad.row(rows[i]) +=
                    nodes_[r.id].grad.row(static_cast<Eigen::Index>(i));
            }
        });
        return r;
    }

    // Cosine similarity of two row vectors -> 1x1.
    Var cosine(Var a, Var b) {
        const M& u = value(a);
        const M& v = value(b);
        assert(u.rows() == 1 && v.rows() == 1 && u.cols() == v.cols());
        Scalar nu = u.row(0).norm();
        Scalar nv = v.row(0).norm();
        if (nu == Scalar(0) || nv == Scalar(0)) {
            throw std::domain_error("cosine of zero-norm vector");
        }
        Scalar dot = u.row(0).dot(v.row(0));
        Scalar c = dot / (nu * nv);
        M out(1, 1);
        out(0, 0) = c;
        Var r = push(std::move(out));
        record(r, [this, a, b, r, nu, nv, c] {
            Scalar g = nodes_[r.id].grad(0, 0);
            const auto& u2 = nodes_[a.id].value.row(0);
            const auto& v2 = nodes_[b.id].value.row(0);
            nodes_[a.id].grad.row(0) += g * (v2 / (nu * nv) - u2 * (c / (nu * nu)));
            nodes_[b.id].grad.row(0) += g * (u2 / (nu * nv) - v2 * (c / (nv * nv)));
        });
        return r;
    }

    // log sum_k w_k * exp(x_k) over 1x1 inputs, with constant non-negative
    // weights; terms with w_k == 0 drop out of value and gradient.
    Var logsumexp_weighted(const std::vector<Var>& xs, const std::vector<Scalar>& weights) {
        assert(xs.size() == weights.size() && !xs.empty());
        Scalar mx = -std::numeric_limits<Scalar>::infinity();
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (weights[k] > Scalar(0)) {
                mx = std::max(mx, value(xs[k])(0, 0));
            }
        }
        if (!std::isfinite(mx)) {
            throw std::domain_error("logsumexp with all-zero weights");
        }
        Scalar s = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (weights[k] > Scalar(0)) {
                s += weights[k] * std::exp(value(xs[k])(0, 0) - mx);
            }
        }
        M out(1, 1);
        out(0, 0) = mx + std::log(s);
        Var r = push(std::move(out));
        record(r, [this, xs, weights, r, mx, s] {
            Scalar g = nodes_[r.id].grad(0, 0);
            for (std::size_t k = 0; k < xs.size(); ++k) {
                if (weights[k] > Scalar(0)) {
                    Scalar p = weights[k] * std::exp(nodes_[xs[k].id].value(0, 0) - mx) / s;
                    nodes_[xs[k].id].grad(0, 0) += g * p;
                }
            }
        });
        return r;
    }

    Var sub(Var a, Var b) { return add(a, scale(b, Scalar(-1))); }

    Var sum_scalars(const std::vector<Var>& xs) {
        assert(!xs.empty());
        Scalar s = 0;
        for (Var x : xs) s += value(x)(0, 0);
        M out(1, 1);
        out(0, 0) = s;
        Var r = push(std::move(out));
        record(r, [this, xs, r] {
            for (Var x : xs) {
                nodes_[x.id].grad(0, 0) += nodes_[r.id].grad(0, 0);
            }
        });
        return r;
    }

    Var zero_scalar() {
        M out(1, 1);
        out(0, 0) = Scalar(0);
        return push(std::move(out));
    }

    // Gated softmax cross-entropy over rows of a logits matrix:
    //   sum_k gate_k * (logsumexp(row_k) - row_k[target_k]).
    // Rows with gate_k == 0 contribute nothing to value or gradient.
    Var cross_entropy_rows(Var logits, const std::vector<int>& targets,
                           const std::vector<int>& gates) {
        const M& z = value(logits);
        assert(static_cast<std::size_t>(z.rows()) == targets.size());
        assert(targets.size() == gates.size());
        Scalar total = 0;
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            if (!gates[static_cast<std::size_t>(i)]) continue;
            Scalar mx = z.row(i).maxCoeff();
            Scalar lse = mx + std::log((z.row(i).array() - mx).exp().sum());
            total += lse - z(i, targets[static_cast<std::size_t>(i)]);
        }
        M out(1, 1);
        out(0, 0) = total;
        Var r = push(std::move(out));
        record(r, [this, logits, targets, gates, r] {
            Scalar g = nodes_[r.id].grad(0, 0);
            const M& z2 = nodes_[logits.id].value;
            for (Eigen::Index i = 0; i < z2.rows(); ++i) {
                if (!gates[static_cast<std::size_t>(i)]) continue;
                Scalar mx = z2.row(i).maxCoeff();
                Eigen::RowVectorX<Scalar> e = (z2.row(i).array() - mx).exp();
                Eigen::RowVectorX<Scalar> p = e / e.sum();
                nodes_[logits.id].grad.row(i) += g * p;
                nodes_[logits.id].grad(i, targets[static_cast<std::size_t>(i)]) -= g;
            }
        });
        return r;
    }

private:
    struct Node {
        M value;
        M grad;
        std::function<void()> backward;
    };

    int check(Var v) const {
        assert(v.valid() && v.id < static_cast<int>(nodes_.size()));
        return v.id;
    }

    Var push(M value) {
        Node n;
        if (track_) {
            n.grad = M::Zero(value.rows(), value.cols());
        }
        n.value = std::move(value);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    template <class F>
    void record(Var r, F&& f) {
        if (track_) {
            nodes_[r.id].backward = std::forward<F>(f);
        }
    }

    bool track_;
    std::vector<Node> nodes_;
};

}  // namespace senti::ad
