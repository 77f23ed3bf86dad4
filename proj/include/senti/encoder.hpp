#pragma once

#include "senti/tape.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace senti {

struct EncoderConfig {
    int num_layers = 4;
    int hidden_dim = 128;
    int num_heads = 4;
    int max_len = 128;
    int vocab_size = 0;
    std::uint64_t seed = 0;

    int head_dim() const { return hidden_dim / num_heads; }
    int ff_dim() const { return 4 * hidden_dim; }

    void validate() const {
        if (num_layers < 1 || hidden_dim < 1 || num_heads < 1 || vocab_size < 1) {
            throw std::invalid_argument("encoder config: sizes must be positive");
        }
        if (hidden_dim % num_heads != 0) {
            throw std::invalid_argument("encoder config: hidden_dim must divide by num_heads");
        }
        if (max_len < 2) {
            throw std::invalid_argument("encoder config: max_len must be at least 2");
        }
    }
};

namespace detail {

inline std::uint32_t crc32(const unsigned char* data, std::size_t n,
                           std::uint32_t crc = 0xFFFFFFFFu) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) {
                c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            }
            t[i] = c;
        }
        return t;
    }();
    for (std::size_t i = 0; i < n; ++i) {
        crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    }
    return crc;
}

}  // namespace detail

// Pre-layer-norm bidirectional transformer encoder with learned positional
// embeddings, GELU feed-forward, classification-slot pooling and a
// masked-token prediction head.
template <class Scalar>
class Encoder {
public:
    using M = ad::Mat<Scalar>;
    using Tape = ad::Tape<Scalar>;

    explicit Encoder(EncoderConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        init_params();
    }

    const EncoderConfig& config() const { return cfg_; }

    // Stable parameter registry (checkpoints, optimizer state, grad checks).
    std::vector<M*> parameters() {
        std::vector<M*> out;
        out.reserve(values_.size());
        for (auto& v : values_) out.push_back(&v);
        return out;
    }
    const std::vector<std::string>& parameter_names() const { return names_; }

    // ---- tape forward ---------------------------------------------------

    // Per-tape parameter leaves, parallel to parameters().
    std::vector<ad::Var> make_leaves(Tape& tape) const {
        std::vector<ad::Var> leaves;
        leaves.reserve(values_.size());
        for (const auto& v : values_) leaves.push_back(tape.leaf(v));
        return leaves;
    }

    // Hidden states (n x d) for one sentence of token ids.
    ad::Var encode_on_tape(Tape& tape, const std::vector<ad::Var>& pv,
                           const std::vector<int>& ids) const {
        check_ids(ids);
        const int dh = cfg_.head_dim();
        std::vector<int> positions(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);

        ad::Var x = tape.add(tape.gather_rows(pv[idx_.tok_embed], ids),
                             tape.gather_rows(pv[idx_.pos_embed], positions));
        for (int l = 0; l < cfg_.num_layers; ++l) {
            const LayerIdx& li = idx_.layers[static_cast<std::size_t>(l)];
            ad::Var h = tape.layernorm(x, pv[li.ln1_g], pv[li.ln1_b]);
            ad::Var q = tape.matmul(h, pv[li.wq]);
            ad::Var k = tape.matmul(h, pv[li.wk]);
            ad::Var v = tape.matmul(h, pv[li.wv]);
            std::vector<ad::Var> heads;
            heads.reserve(static_cast<std::size_t>(cfg_.num_heads));
            const Scalar inv_sqrt_dh = Scalar(1) / std::sqrt(Scalar(dh));
            for (int head = 0; head < cfg_.num_heads; ++head) {
                ad::Var qh = tape.slice_cols(q, head * dh, dh);
                ad::Var kh = tape.slice_cols(k, head * dh, dh);
                ad::Var vh = tape.slice_cols(v, head * dh, dh);
                ad::Var scores = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt_dh);
                ad::Var probs = tape.softmax_rows(scores);
                heads.push_back(tape.matmul(probs, vh));
            }
            ad::Var attn = tape.matmul(tape.concat_cols(heads), pv[li.wo]);
            x = tape.add(x, attn);
            ad::Var h2 = tape.layernorm(x, pv[li.ln2_g], pv[li.ln2_b]);
            ad::Var ff = tape.add_rowvec(tape.matmul(h2, pv[li.w1]), pv[li.b1]);
            ff = tape.gelu(ff);
            ff = tape.add_rowvec(tape.matmul(ff, pv[li.w2]), pv[li.b2]);
            x = tape.add(x, ff);
        }
        return tape.layernorm(x, pv[idx_.final_g], pv[idx_.final_b]);
    }

    // Classification-slot embedding (1 x d).
    ad::Var pool_on_tape(Tape& tape, ad::Var hidden) const {
        return tape.gather_rows(hidden, {0});
    }

    // Logits at the given positions (|positions| x vocab).
    ad::Var mlm_logits_on_tape(Tape& tape, const std::vector<ad::Var>& pv, ad::Var hidden,
                               const std::vector<int>& positions) const {
        for (int p : positions) {
            if (p < 0 || p >= tape.value(hidden).rows()) {
                throw std::out_of_range("mlm position out of sequence range");
            }
        }
        ad::Var rows = tape.gather_rows(hidden, positions);
        return tape.add_rowvec(tape.matmul(rows, pv[idx_.mlm_w]), pv[idx_.mlm_b]);
    }

    // ---- inference ------------------------------------------------------

    // Hidden states per sentence; inference-only (no gradient tracking).
    std::vector<M> encode(const std::vector<std::vector<int>>& batch) const {
        if (batch.empty()) {
            throw std::invalid_argument("encode: empty batch");
        }
        std::vector<M> out;
        out.reserve(batch.size());
        for (const auto& ids : batch) {
            Tape tape(false);
            auto pv = make_leaves(tape);
            out.push_back(tape.value(encode_on_tape(tape, pv, ids)));
        }
        return out;
    }

    Eigen::RowVectorX<Scalar> pool(const M& hidden) const {
        return hidden.row(0);
    }

    Eigen::RowVectorX<Scalar> embed(const std::vector<int>& ids) const {
        Tape tape(false);
        auto pv = make_leaves(tape);
        return tape.value(encode_on_tape(tape, pv, ids)).row(0);
    }

    M mlm_logits(const M& hidden, const std::vector<int>& positions) const {
        M rows(static_cast<Eigen::Index>(positions.size()), cfg_.hidden_dim);
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (positions[i] < 0 || positions[i] >= hidden.rows()) {
                throw std::out_of_range("mlm position out of sequence range");
            }
            rows.row(static_cast<Eigen::Index>(i)) = hidden.row(positions[i]);
        }
        M logits = rows * values_[static_cast<std::size_t>(idx_.mlm_w_slot)];
        logits.rowwise() += Eigen::RowVectorX<Scalar>(
            values_[static_cast<std::size_t>(idx_.mlm_b_slot)].row(0));
        return logits;
    }

    // ---- checkpointing ----------------------------------------------------

    static constexpr std::uint32_t kCheckpointVersion = 1;

    void save(const std::string& path) const {
        std::string buf;
        auto put = [&buf](const void* p, std::size_t n) {
            buf.append(static_cast<const char*>(p), n);
        };
        auto put_u32 = [&](std::uint32_t v) { put(&v, sizeof v); };
        auto put_u64 = [&](std::uint64_t v) { put(&v, sizeof v); };
        buf.append("SENTIVEC");
        put_u32(kCheckpointVersion);
        put_u32(static_cast<std::uint32_t>(sizeof(Scalar)));
        put_u32(static_cast<std::uint32_t>(cfg_.num_layers));
        put_u32(static_cast<std::uint32_t>(cfg_.hidden_dim));
        put_u32(static_cast<std::uint32_t>(cfg_.num_heads));
        put_u32(static_cast<std::uint32_t>(cfg_.max_len));
        put_u32(static_cast<std::uint32_t>(cfg_.vocab_size));
        put_u64(cfg_.seed);
        put_u64(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) {
            put_u32(static_cast<std::uint32_t>(names_[i].size()));
            put(names_[i].data(), names_[i].size());
            put_u64(static_cast<std::uint64_t>(values_[i].rows()));
            put_u64(static_cast<std::uint64_t>(values_[i].cols()));
            put(values_[i].data(),
                sizeof(Scalar) * static_cast<std::size_t>(values_[i].size()));
        }
        std::uint32_t crc =
            detail::crc32(reinterpret_cast<const unsigned char*>(buf.data()), buf.size());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write checkpoint " + path);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        out.write(reinterpret_cast<const char*>(&crc), sizeof crc);
        if (!out) throw std::runtime_error("checkpoint write failed: " + path);
    }

    static Encoder load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open checkpoint " + path);
        std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (buf.size() < 8 + sizeof(std::uint32_t)) {
            throw std::runtime_error("checkpoint truncated: " + path);
        }
        std::uint32_t stored;
        std::memcpy(&stored, buf.data() + buf.size() - sizeof stored, sizeof stored);
        std::uint32_t actual = detail::crc32(
            reinterpret_cast<const unsigned char*>(buf.data()), buf.size() - sizeof stored);
        if (stored != actual) {
            throw std::runtime_error("checkpoint checksum mismatch: " + path);
        }
        std::size_t at = 0;
        auto get = [&](void* p, std::size_t n) {
            if (at + n > buf.size() - sizeof(std::uint32_t)) {
                throw std::runtime_error("checkpoint truncated: " + path);
            }
            std::memcpy(p, buf.data() + at, n);
            at += n;
        };
        char magic[8];
        get(magic, 8);
        if (std::string(magic, 8) != "SENTIVEC") {
            throw std::runtime_error("not a checkpoint file: " + path);
        }
        auto get_u32 = [&] { std::uint32_t v; get(&v, sizeof v); return v; };
        auto get_u64 = [&] { std::uint64_t v; get(&v, sizeof v); return v; };
        if (get_u32() != kCheckpointVersion) {
            throw std::runtime_error("checkpoint version mismatch: " + path);
        }
        if (get_u32() != sizeof(Scalar)) {
            throw std::runtime_error("checkpoint scalar width mismatch: " + path);
        }
        EncoderConfig cfg;
        cfg.num_layers = static_cast<int>(get_u32());
        cfg.hidden_dim = static_cast<int>(get_u32());
        cfg.num_heads = static_cast<int>(get_u32());
        cfg.max_len = static_cast<int>(get_u32());
        cfg.vocab_size = static_cast<int>(get_u32());
        cfg.seed = get_u64();
        Encoder enc(cfg);
        std::uint64_t count = get_u64();
        if (count != enc.values_.size()) {
            throw std::runtime_error("checkpoint parameter count mismatch: " + path);
        }
        for (std::size_t i = 0; i < enc.values_.size(); ++i) {
            std::uint32_t name_len = get_u32();
            std::string name(name_len, '\0');
            get(name.data(), name_len);
            if (name != enc.names_[i]) {
                throw std::runtime_error("checkpoint parameter order mismatch: " + path);
            }
            auto rows = static_cast<Eigen::Index>(get_u64());
            auto cols = static_cast<Eigen::Index>(get_u64());
            if (rows != enc.values_[i].rows() || cols != enc.values_[i].cols()) {
                throw std::runtime_error("checkpoint shape mismatch: " + path);
            }
            get(enc.values_[i].data(),
                sizeof(Scalar) * static_cast<std::size_t>(enc.values_[i].size()));
        }
        return enc;
    }

private:
    struct LayerIdx {
        int ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w1, b1, w2, b2;
    };
    struct Index {
        int tok_embed, pos_embed;
        std::vector<LayerIdx> layers;
        int final_g, final_b, mlm_w, mlm_b;
        int mlm_w_slot, mlm_b_slot;  // same values, kept as plain ints for inference
    };

    void check_ids(const std::vector<int>& ids) const {
        if (ids.empty()) {
            throw std::invalid_argument("encode: empty token sequence");
        }
        if (static_cast<int>(ids.size()) > cfg_.max_len) {
            throw std::invalid_argument("encode: sequence exceeds max_len");
        }
        for (int id : ids) {
            if (id < 0 || id >= cfg_.vocab_size) {
                throw std::out_of_range("encode: token id outside vocabulary");
            }
        }
    }

    int add_param(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                  std::normal_distribution<double>& dist, std::mt19937_64& rng,
                  bool zero = false, Scalar fill = Scalar(0), bool constant = false) {
        M m(rows, cols);
        if (constant) {
            m.setConstant(fill);
        } else if (zero) {
            m.setZero();
        } else {
            for (Eigen::Index i = 0; i < rows; ++i) {
                for (Eigen::Index j = 0; j < cols; ++j) {
                    m(i, j) = static_cast<Scalar>(dist(rng));
                }
            }
        }
        names_.push_back(name);
        values_.push_back(std::move(m));
        return static_cast<int>(values_.size()) - 1;
    }

    void init_params() {
        std::mt19937_64 rng(cfg_.seed);
        std::normal_distribution<double> dist(0.0, 0.02);
        const int d = cfg_.hidden_dim;
        const int ff = cfg_.ff_dim();
        idx_.tok_embed = add_param("tok_embed", cfg_.vocab_size, d, dist, rng);
        idx_.pos_embed = add_param("pos_embed", cfg_.max_len, d, dist, rng);
        for (int l = 0; l < cfg_.num_layers; ++l) {
            std::string p = "layer" + std::to_string(l) + ".";
            LayerIdx li;
            li.ln1_g = add_param(p + "ln1_g", 1, d, dist, rng, false, Scalar(1), true);
            li.ln1_b = add_param(p + "ln1_b", 1, d, dist, rng, true);
            li.wq = add_param(p + "wq", d, d, dist, rng);
            li.wk = add_param(p + "wk", d, d, dist, rng);
            li.wv = add_param(p + "wv", d, d, dist, rng);
            li.wo = add_param(p + "wo", d, d, dist, rng);
            li.ln2_g = add_param(p + "ln2_g", 1, d, dist, rng, false, Scalar(1), true);
            li.ln2_b = add_param(p + "ln2_b", 1, d, dist, rng, true);
            li.w1 = add_param(p + "w1", d, ff, dist, rng);
            li.b1 = add_param(p + "b1", 1, ff, dist, rng, true);
            li.w2 = add_param(p + "w2", ff, d, dist, rng);
            li.b2 = add_param(p + "b2", 1, d, dist, rng, true);
            idx_.layers.push_back(li);
        }
        idx_.final_g = add_param("final_g", 1, d, dist, rng, false, Scalar(1), true);
        idx_.final_b = add_param("final_b", 1, d, dist, rng, true);
        idx_.mlm_w = add_param("mlm_w", d, cfg_.vocab_size, dist, rng);
        idx_.mlm_b = add_param("mlm_b", 1, cfg_.vocab_size, dist, rng, true);
        idx_.mlm_w_slot = idx_.mlm_w;
        idx_.mlm_b_slot = idx_.mlm_b;
    }

    EncoderConfig cfg_;
    std::vector<std::string> names_;
    std::vector<M> values_;
    Index idx_;
};

// Lowest-id argmax per row.
template <class Scalar>
std::vector<int> argmax_rows(const ad::Mat<Scalar>& m) {
    std::vector<int> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Eigen::Index best = 0;
        m.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

}  // namespace senti
