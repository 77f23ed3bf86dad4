#include "senti/encoder.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace senti;

namespace {

EncoderConfig small_config() {
    EncoderConfig cfg;
    cfg.num_layers = 2;
    cfg.hidden_dim = 16;
    cfg.num_heads = 2;
    cfg.max_len = 12;
    cfg.vocab_size = 20;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("encoder config validation") {
    EncoderConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.num_heads = 3;  // 16 % 3 != 0
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.max_len = 1;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("encoder: deterministic init and encoding") {
    Encoder<double> a(small_config());
    Encoder<double> b(small_config());
    std::vector<int> ids = {1, 5, 9, 4};
    CHECK((a.embed(ids) - b.embed(ids)).norm() == 0.0);

    EncoderConfig reseeded = small_config();
    reseeded.seed = 8;
    Encoder<double> c(reseeded);
    CHECK((a.embed(ids) - c.embed(ids)).norm() > 0.0);
}

TEST_CASE("encoder: per-sentence encoding ignores other batch members") {
    Encoder<double> enc(small_config());
    std::vector<int> s1 = {1, 5, 9};
    std::vector<int> s2 = {1, 7, 7, 7, 7, 2};
    auto batched = enc.encode({s1, s2});
    CHECK((batched[0].row(0) - enc.embed(s1)).norm() == 0.0);
    CHECK((batched[1].row(0) - enc.embed(s2)).norm() == 0.0);
}

TEST_CASE("encoder: input validation") {
    Encoder<double> enc(small_config());
    CHECK_THROWS(enc.embed({}));                          // empty
    CHECK_THROWS(enc.embed(std::vector<int>(13, 1)));     // exceeds max_len
    CHECK_THROWS(enc.embed({1, 25}));                     // id out of vocab
    CHECK_THROWS(enc.encode({}));
}

TEST_CASE("encoder: mlm logits shape and position checks") {
    Encoder<double> enc(small_config());
    std::vector<int> ids = {1, 5, 9, 4};
    auto hidden = enc.encode({ids})[0];
    auto logits = enc.mlm_logits(hidden, {1, 3});
    CHECK(logits.rows() == 2);
    CHECK(logits.cols() == 20);
    CHECK_THROWS(enc.mlm_logits(hidden, {4}));
}

TEST_CASE("argmax_rows picks first maximum") {
    ad::Mat<double> m(2, 3);
    m << 1, 3, 3, 5, 2, 5;
    auto idx = argmax_rows(m);
    CHECK(idx == std::vector<int>{1, 0});
}

TEST_CASE("checkpoint: round trip preserves everything") {
    const char* path = "enc_test.ckpt";
    Encoder<float> enc(small_config());
    enc.save(path);
    Encoder<float> back = Encoder<float>::load(path);
    CHECK(back.config().num_layers == 2);
    CHECK(back.config().vocab_size == 20);
    std::vector<int> ids = {1, 5, 9, 4};
    CHECK((enc.embed(ids) - back.embed(ids)).norm() == 0.0f);
    std::remove(path);
}

TEST_CASE("checkpoint: corruption is detected") {
    const char* path = "enc_corrupt.ckpt";
    Encoder<float> enc(small_config());
    enc.save(path);

    // flip one payload byte -> checksum mismatch
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(100);
        char c;
        f.seekg(100);
        f.get(c);
        f.seekp(100);
        f.put(static_cast<char>(c ^ 0x5A));
    }
    CHECK_THROWS(Encoder<float>::load(path));

    // truncation
    enc.save(path);
    {
        std::ifstream in(path, std::ios::binary);
        std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size() / 2));
    }
    CHECK_THROWS(Encoder<float>::load(path));

    // wrong magic
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "NOTACKPTxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx";
    }
    CHECK_THROWS(Encoder<float>::load(path));

    // scalar width mismatch: double file read as float
    Encoder<double> denc(small_config());
    denc.save(path);
    CHECK_THROWS(Encoder<float>::load(path));
    std::remove(path);
}
