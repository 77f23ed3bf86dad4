#include "senti/trainer.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace senti;

namespace {

struct Fixture {
    Lexicon lex;
    Tokenizer tok;
    std::vector<Quadruple> quads;
    std::vector<SgTSPair> bench;
    EncoderConfig cfg;

    Fixture()
        : lex(Lexicon::from_records({{"good", 0.8, 0.0},
                                     {"great", 0.9, 0.0},
                                     {"bad", 0.0, 0.8},
                                     {"awful", 0.0, 0.9}})),
          tok(Tokenizer::build({"a good film", "a great film", "a bad film", "an awful film",
                                "good movie", "bad movie"},
                               16)) {
        std::vector<Example> data = {
            {"a good film", Label::Positive}, {"a great film", Label::Positive},
            {"good movie", Label::Positive},  {"a bad film", Label::Negative},
            {"an awful film", Label::Negative}, {"bad movie", Label::Negative},
        };
        quads = sample_quadruples(data, 1);
        bench = {{data[0], data[1], 1}, {data[2], data[3], 0}, {data[4], data[5], 0}};
        cfg.num_layers = 1;
        cfg.hidden_dim = 8;
        cfg.num_heads = 2;
        cfg.max_len = 16;
        cfg.vocab_size = tok.vocab().size();
        cfg.seed = 3;
    }
};

TrainConfig quick_config(int steps, int interval) {
    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 2;
    tc.max_steps = steps;
    tc.eval_interval = interval;
    tc.seed = 5;
    return tc;
}

}  // namespace

TEST_CASE("trainer: config validation") {
    TrainConfig tc;
    tc.learning_rate = 0.0;
    CHECK_THROWS(tc.validate());
    tc = TrainConfig{};
    tc.mask_ratio = 0.0;
    CHECK_THROWS(tc.validate());
    tc = TrainConfig{};
    CHECK_NOTHROW(tc.validate());
}

TEST_CASE("trainer: max_steps 0 returns the initial model with one eval entry") {
    Fixture f;
    HyperParams hp;
    auto res = pretrain(f.quads, f.bench, Encoder<double>(f.cfg), f.tok, f.lex, hp,
                        quick_config(0, 1));
    REQUIRE(res.log.entries.size() == 1);
    CHECK(res.log.entries[0].step == 0);
    CHECK(res.log.entries[0].sgts.has_value());
    CHECK(res.log.best_step == 0);
    Encoder<double> fresh(f.cfg);
    CHECK((res.best.embed({1, 5}) - fresh.embed({1, 5})).norm() == 0.0);
}

TEST_CASE("trainer: deterministic given the seed") {
    Fixture f;
    HyperParams hp;
    auto r1 = pretrain(f.quads, f.bench, Encoder<double>(f.cfg), f.tok, f.lex, hp,
                       quick_config(4, 2));
    auto r2 = pretrain(f.quads, f.bench, Encoder<double>(f.cfg), f.tok, f.lex, hp,
                       quick_config(4, 2));
    REQUIRE(r1.log.entries.size() == r2.log.entries.size());
    for (std::size_t i = 0; i < r1.log.entries.size(); ++i) {
        CHECK(r1.log.entries[i].total == r2.log.entries[i].total);
    }
    CHECK((r1.best.embed({1, 5}) - r2.best.embed({1, 5})).norm() == 0.0);
}

TEST_CASE("trainer: best checkpoint is the argmax of logged benchmark scores") {
    Fixture f;
    HyperParams hp;
    auto res = pretrain(f.quads, f.bench, Encoder<double>(f.cfg), f.tok, f.lex, hp,
                        quick_config(6, 2));
    double best = -2.0;
    int best_step = -1;
    for (const auto& e : res.log.entries) {
        if (e.sgts && *e.sgts > best) {
            best = *e.sgts;
            best_step = e.step;
        }
    }
    CHECK(res.log.best_step == best_step);
    CHECK(res.log.best_sgts == doctest::Approx(best));
}

TEST_CASE("trainer: checkpoints are written per evaluation") {
    namespace fs = std::filesystem;
    Fixture f;
    HyperParams hp;
    TrainConfig tc = quick_config(2, 1);
    tc.output_dir = "trainer_test_ckpts";
    auto res = pretrain(f.quads, f.bench, Encoder<double>(f.cfg), f.tok, f.lex, hp, tc);
    CHECK(fs::exists("trainer_test_ckpts/step_0.ckpt"));
    CHECK(fs::exists("trainer_test_ckpts/step_1.ckpt"));
    CHECK(fs::exists("trainer_test_ckpts/step_2.ckpt"));
    auto loaded = Encoder<double>::load("trainer_test_ckpts/step_" +
                                        std::to_string(res.log.best_step) + ".ckpt");
    CHECK((loaded.embed({1, 5}) - res.best.embed({1, 5})).norm() == 0.0);
    fs::remove_all("trainer_test_ckpts");
}

TEST_CASE("trainer: loss decreases on a tiny fixed task") {
    Fixture f;
    HyperParams hp;
    auto res = pretrain(f.quads, f.bench, Encoder<double>(f.cfg), f.tok, f.lex, hp,
                        quick_config(30, 30));
    double early = 0.0, late = 0.0;
    for (int i = 1; i <= 5; ++i) early += res.log.entries[static_cast<std::size_t>(i)].total;
    for (int i = 26; i <= 30; ++i) late += res.log.entries[static_cast<std::size_t>(i)].total;
    CHECK(late < early);
}

TEST_CASE("trainer: training log jsonl round trip shape") {
    Fixture f;
    HyperParams hp;
    auto res = pretrain(f.quads, f.bench, Encoder<double>(f.cfg), f.tok, f.lex, hp,
                        quick_config(2, 2));
    const char* path = "trainlog_test.jsonl";
    res.log.save_jsonl(path);
    std::ifstream in(path);
    std::string line;
    int lines = 0, with_sgts = 0;
    while (std::getline(in, line)) {
        ++lines;
        CHECK(line.find("\"step\"") != std::string::npos);
        CHECK(line.find("\"l_w\"") != std::string::npos);
        CHECK(line.find("\"l_s\"") != std::string::npos);
        CHECK(line.find("\"total\"") != std::string::npos);
        with_sgts += line.find("\"sgts\"") != std::string::npos;
    }
    CHECK(lines == 3);      // step 0 eval + 2 training steps
    CHECK(with_sgts == 2);  // step 0 and step 2
    std::remove(path);
}

TEST_CASE("optimizer: zero steps leave parameters untouched, update is deterministic") {
    Fixture f;
    Encoder<double> enc(f.cfg);
    auto params = enc.parameters();
    std::vector<ad::Mat<double>> grads;
    for (auto* p : params) grads.push_back(ad::Mat<double>::Constant(p->rows(), p->cols(), 0.5));
    ad::Mat<double> before = *params[0];
    AdamW<double> opt(params, 1e-2, 0.01, 1.0);
    opt.step(grads);
    CHECK((*params[0] - before).norm() > 0.0);

    grads[0](0, 0) = std::nan("");
    CHECK_THROWS(opt.step(grads));
}
