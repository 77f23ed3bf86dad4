// senti: experiment runner for sentiment-aware sentence representations.

#include "senti/config.hpp"
#include "senti/corpus.hpp"
#include "senti/evaluation.hpp"
#include "senti/lexicon.hpp"
#include "senti/masking.hpp"
#include "senti/objectives.hpp"
#include "senti/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using Model = senti::Encoder<float>;

namespace {

std::string resolve_output(const std::string& dir) {
    fs::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("SENTI_OUTPUT_ROOT")) {
            p = fs::path(root) / p;
        }
    }
    return p.string();
}

senti::DataFormat parse_format(const std::string& f) {
    if (f == "jsonl") return senti::DataFormat::Jsonl;
    if (f == "tsv") return senti::DataFormat::Tsv;
    throw std::invalid_argument("unknown data format '" + f + "'");
}

void print_summary(const json& j) {
    std::cout << j.dump() << "\n";
}

// Vocabulary defaults to vocab.txt next to the checkpoint.
senti::Tokenizer load_tokenizer(const std::string& model_path, std::string vocab_path,
                                int max_len) {
    if (vocab_path.empty()) {
        vocab_path = (fs::path(model_path).parent_path() / "vocab.txt").string();
    }
    return senti::Tokenizer(senti::Vocabulary::load(vocab_path), max_len);
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::vector<std::string> texts_of(const std::vector<senti::Example>& xs) {
    std::vector<std::string> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(x.text);
    return out;
}

std::vector<int> labels_of(const std::vector<senti::Example>& xs) {
    std::vector<int> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(x.label == senti::Label::Positive ? 1 : 0);
    return out;
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_lexicon_stats(const std::string& lexicon_path, const std::string& dataset_dir,
                      const std::string& format, int max_len) {
    auto lex = senti::Lexicon::load(lexicon_path);
    auto splits = senti::load_dataset(dataset_dir, parse_format(format));
    json j;
    j["command"] = "lexicon stats";
    j["lexicon"] = lexicon_path;
    j["entries"] = lex.size();
    auto fraction = [&](const std::vector<senti::Example>& xs) -> json {
        if (xs.empty()) return nullptr;
        auto tok = senti::Tokenizer::build(texts_of(xs), max_len);
        return senti::corpus_sentiword_fraction(lex, tok, texts_of(xs));
    };
    j["candidate_fraction"]["train"] = fraction(splits.train);
    j["candidate_fraction"]["valid"] = fraction(splits.valid);
    j["candidate_fraction"]["test"] = fraction(splits.test);
    print_summary(j);
    return 0;
}

int cmd_build_sgts(const std::string& in, const std::string& format, std::uint64_t seed,
                   const std::string& out) {
    auto examples = senti::load_split(in, parse_format(format));
    auto pairs = senti::build_sgts_benchmark(examples, seed);
    senti::save_sgts_jsonl(pairs, out);
    json j;
    j["command"] = "data build-sgts";
    j["pairs"] = pairs.size();
    j["out"] = out;
    print_summary(j);
    return 0;
}

int cmd_make_toy(const std::string& out_dir, int n_train, int n_valid, std::uint64_t seed) {
    auto toy = senti::make_toy_corpus(n_train, n_valid, seed);
    fs::create_directories(out_dir);
    senti::save_split_jsonl(toy.train, (fs::path(out_dir) / "train.jsonl").string());
    senti::save_split_jsonl(toy.valid, (fs::path(out_dir) / "valid.jsonl").string());
    std::ofstream lex((fs::path(out_dir) / "lexicon.tsv").string());
    lex << "# lemma\tpos_score\tneg_score\n";
    for (const auto& e : toy.lexicon_records) {
        lex << e.lemma << "\t" << e.pos_score << "\t" << e.neg_score << "\n";
    }
    json j;
    j["command"] = "data make-toy";
    j["out"] = out_dir;
    j["train"] = toy.train.size();
    j["valid"] = toy.valid.size();
    print_summary(j);
    return 0;
}

int cmd_pretrain(const std::string& config_path, const std::vector<std::string>& overrides) {
    senti::RunConfig cfg = config_path.empty()
                               ? senti::RunConfig::from_overrides(overrides)
                               : senti::RunConfig::load(config_path, overrides);
    cfg.validate_paths();
    std::string out_dir = resolve_output(cfg.output_dir);
    fs::create_directories(out_dir);

    auto lex = senti::Lexicon::load(cfg.lexicon_path);
    auto splits = senti::load_dataset(cfg.dataset_dir, parse_format(cfg.data_format));
    if (splits.valid.empty()) {
        std::tie(splits.train, splits.valid) =
            senti::make_validation_split(splits.train, 0.1, cfg.seed);
    }

    std::vector<std::string> all_texts = texts_of(splits.train);
    for (const auto& t : texts_of(splits.valid)) all_texts.push_back(t);
    auto tokenizer = senti::Tokenizer::build(all_texts, cfg.max_len);
    tokenizer.vocab().save((fs::path(out_dir) / "vocab.txt").string());

    auto quadruples = senti::sample_quadruples(splits.train, cfg.seed);
    auto benchmark = senti::build_sgts_benchmark(splits.valid, cfg.seed);

    Model encoder(cfg.encoder_config(tokenizer.vocab().size()));
    senti::TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.output_dir = (fs::path(out_dir) / "checkpoints").string();

    cfg.save_resolved((fs::path(out_dir) / "config.resolved").string());
    auto result = senti::pretrain(quadruples, benchmark, std::move(encoder), tokenizer, lex,
                                  cfg.hp, tc);
    result.best.save((fs::path(out_dir) / "best.ckpt").string());
    result.log.save_jsonl((fs::path(out_dir) / "trainlog.jsonl").string());

    json j;
    j["command"] = "pretrain";
    j["output_dir"] = out_dir;
    j["quadruples"] = quadruples.size();
    j["benchmark_pairs"] = benchmark.size();
    j["best_step"] = result.log.best_step;
    j["best_sgts"] = result.log.best_sgts;
    print_summary(j);
    return 0;
}

int cmd_eval_sgts(const std::string& model_path, const std::string& vocab_path,
                  const std::string& pairs_path, const std::string& out) {
    Model model = Model::load(model_path);
    auto tokenizer = load_tokenizer(model_path, vocab_path, model.config().max_len);
    auto pairs = senti::load_sgts_jsonl(pairs_path);
    auto report = senti::sgts_score(model, tokenizer, pairs);
    json j;
    j["command"] = "eval-sgts";
    j["kind"] = "sgts";
    j["model"] = model_path;
    j["pairs"] = report.n_pairs;
    j["spearman_rho"] = report.spearman_rho;
    if (!out.empty()) {
        json full = j;
        full["predicted"] = report.predicted;
        write_json(full, out);
        j["out"] = out;
    }
    print_summary(j);
    return 0;
}

int cmd_probe(const std::string& model_path, const std::string& vocab_path,
              const std::string& dataset_dir, const std::string& format, std::uint64_t seed,
              const std::string& out) {
    Model model = Model::load(model_path);
    auto tokenizer = load_tokenizer(model_path, vocab_path, model.config().max_len);
    auto splits = senti::load_dataset(dataset_dir, parse_format(format));
    if (splits.test.empty()) {
        throw std::runtime_error("probe: dataset has no test split");
    }
    if (splits.valid.empty()) {
        std::tie(splits.train, splits.valid) =
            senti::make_validation_split(splits.train, 0.1, seed);
    }
    auto train_x = senti::embed_texts(model, tokenizer, texts_of(splits.train));
    auto valid_x = senti::embed_texts(model, tokenizer, texts_of(splits.valid));
    auto test_x = senti::embed_texts(model, tokenizer, texts_of(splits.test));
    auto result = senti::linear_probe(train_x, labels_of(splits.train), valid_x,
                                      labels_of(splits.valid), test_x, labels_of(splits.test));
    json j;
    j["command"] = "probe";
    j["kind"] = "probe";
    j["model"] = model_path;
    j["dataset"] = dataset_dir;
    j["accuracy"] = result.accuracy;
    j["regularization"] = result.chosen_regularization;
    j["splits"] = {result.train_size, result.valid_size, result.test_size};
    if (!out.empty()) {
        write_json(j, out);
        j["out"] = out;
    }
    print_summary(j);
    return 0;
}

int cmd_fewshot(const std::string& model_path, const std::string& vocab_path,
                const std::string& dataset_dir, const std::string& format, int k, int val_size,
                double lr, std::uint64_t seed0, const std::string& out) {
    Model model = Model::load(model_path);
    auto tokenizer = load_tokenizer(model_path, vocab_path, model.config().max_len);
    auto splits = senti::load_dataset(dataset_dir, parse_format(format));
    if (splits.test.empty()) {
        throw std::runtime_error("fewshot: dataset has no test split");
    }
    senti::FewShotConfig cfg;
    cfg.k = k;
    cfg.val_size = val_size;
    cfg.learning_rate = lr;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(seed0 + s);
    auto result = senti::fewshot_eval(model, tokenizer, splits.train, splits.test, seeds, cfg);
    json j;
    j["command"] = "fewshot";
    j["kind"] = "fewshot";
    j["model"] = model_path;
    j["dataset"] = dataset_dir;
    j["k"] = k;
    j["mean"] = result.mean;
    j["std"] = result.stddev;
    j["per_seed"] = result.per_seed;
    if (!out.empty()) {
        write_json(j, out);
        j["out"] = out;
    }
    print_summary(j);
    return 0;
}

int cmd_embed(const std::string& model_path, const std::string& vocab_path,
              const std::string& in, const std::string& format, const std::string& out) {
    Model model = Model::load(model_path);
    auto tokenizer = load_tokenizer(model_path, vocab_path, model.config().max_len);
    auto examples = senti::load_split(in, parse_format(format));
    auto x = senti::embed_texts(model, tokenizer, texts_of(examples));
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        f << (c ? "," : "") << "dim_" << c;
    }
    f << "\n";
    f << std::setprecision(9);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            f << (c ? "," : "") << x(r, c);
        }
        f << "\n";
    }
    json j;
    j["command"] = "embed";
    j["rows"] = x.rows();
    j["dims"] = x.cols();
    j["out"] = out;
    print_summary(j);
    return 0;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("dim_", 0) == 0) continue;  // header
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty csv " + path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

std::vector<std::string> read_label_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

void write_svg_scatter(const Eigen::MatrixXd& xy, const std::vector<std::string>& labels,
                       const std::string& path) {
    double min_x = xy.col(0).minCoeff(), max_x = xy.col(0).maxCoeff();
    double min_y = xy.col(1).minCoeff(), max_y = xy.col(1).maxCoeff();
    double span_x = std::max(max_x - min_x, 1e-12);
    double span_y = std::max(max_y - min_y, 1e-12);
    const int w = 640, h = 480, pad = 20;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    for (Eigen::Index i = 0; i < xy.rows(); ++i) {
        double px = pad + (xy(i, 0) - min_x) / span_x * (w - 2 * pad);
        double py = h - pad - (xy(i, 1) - min_y) / span_y * (h - 2 * pad);
        const std::string& lbl = labels.empty() ? "" : labels[static_cast<std::size_t>(i)];
        const char* color = lbl == "positive" ? "#2166ac" : lbl == "negative" ? "#b2182b"
                                                                              : "#888888";
        out << "<circle cx='" << px << "' cy='" << py << "' r='3' fill='" << color
            << "' fill-opacity='0.6'/>\n";
    }
    out << "</svg>\n";
}

int cmd_plot(const std::string& embeddings_csv, const std::string& labels_path,
             const std::string& out) {
    Eigen::MatrixXd x = read_csv_matrix(embeddings_csv);
    auto pca = senti::pca_project(x, 2);
    std::vector<std::string> labels;
    if (!labels_path.empty()) {
        labels = read_label_column(labels_path);
        if (labels.size() != static_cast<std::size_t>(x.rows())) {
            throw std::runtime_error("plot: label count does not match embedding rows");
        }
    }
    json j;
    j["command"] = "plot";
    j["points"] = x.rows();
    j["rank_deficient"] = pca.rank_deficient;
    if (out.size() > 4 && out.substr(out.size() - 4) == ".svg") {
        write_svg_scatter(pca.coordinates, labels, out);
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write " + out);
        f << "pc1,pc2,label\n";
        for (Eigen::Index i = 0; i < pca.coordinates.rows(); ++i) {
            f << pca.coordinates(i, 0) << "," << pca.coordinates(i, 1) << ","
              << (labels.empty() ? "" : labels[static_cast<std::size_t>(i)]) << "\n";
        }
    }
    j["out"] = out;
    print_summary(j);
    return 0;
}

int cmd_query(const std::string& model_path, const std::string& vocab_path,
              const std::string& query, const std::string& candidates_path,
              const std::string& format, int k) {
    Model model = Model::load(model_path);
    auto tokenizer = load_tokenizer(model_path, vocab_path, model.config().max_len);
    auto candidates = senti::load_split(candidates_path, parse_format(format));
    auto hits = senti::nn_query(model, tokenizer, query, candidates, k);
    json j;
    j["command"] = "query";
    j["query"] = query;
    json results = json::array();
    for (const auto& hit : hits) {
        results.push_back({{"text", candidates[hit.index].text},
                           {"label", candidates[hit.index].label == senti::Label::Positive
                                         ? "positive"
                                         : "negative"},
                           {"score", hit.score}});
    }
    j["results"] = results;
    print_summary(j);
    return 0;
}

int cmd_report(const std::string& run_dir) {
    json report;
    report["sgts"] = json::array();
    report["probe"] = json::array();
    report["fewshot"] = json::array();
    bool any = false;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        json j;
        try {
            in >> j;
        } catch (const json::parse_error&) {
            continue;
        }
        if (!j.contains("kind")) continue;
        std::string kind = j["kind"].get<std::string>();
        if (report.contains(kind)) {
            report[kind].push_back(j);
            any = true;
        }
    }
    if (!any) {
        throw std::runtime_error("report: no result files in " + run_dir);
    }
    // rows keyed by (model, dataset): correlate SgTS with accuracy when
    // at least three matched rows exist
    std::vector<double> scores, accs;
    for (const auto& s : report["sgts"]) {
        for (const auto& f : report["fewshot"]) {
            if (s["model"] == f["model"]) {
                scores.push_back(s["spearman_rho"].get<double>());
                accs.push_back(f["mean"].get<double>());
            }
        }
    }
    if (scores.size() >= 3) {
        auto [rho, p] = senti::metric_correlation(scores, accs);
        report["correlation"] = {{"pearson_rho", rho}, {"p_value", p}, {"rows", scores.size()}};
    }
    write_json(report, (fs::path(run_dir) / "report.json").string());

    std::ostringstream table;
    table << "section    model                            value\n";
    for (const auto& s : report["sgts"]) {
        table << "sgts       " << s["model"].get<std::string>() << "  rho="
              << s["spearman_rho"].get<double>() << "\n";
    }
    for (const auto& s : report["probe"]) {
        table << "probe      " << s["model"].get<std::string>() << "  acc="
              << s["accuracy"].get<double>() << "\n";
    }
    for (const auto& s : report["fewshot"]) {
        table << "fewshot    " << s["model"].get<std::string>() << "  mean="
              << s["mean"].get<double>() << " std=" << s["std"].get<double>() << "\n";
    }
    std::ofstream tf((fs::path(run_dir) / "report.txt").string());
    tf << table.str();

    json j;
    j["command"] = "report";
    j["out"] = (fs::path(run_dir) / "report.json").string();
    j["sections"] = {{"sgts", report["sgts"].size()},
                     {"probe", report["probe"].size()},
                     {"fewshot", report["fewshot"].size()},
                     {"correlation", report.contains("correlation")}};
    print_summary(j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sentiment-aware sentence representation toolkit"};
    app.require_subcommand(1);

    std::string lexicon_path, dataset_dir, format = "jsonl", model_path, vocab_path;
    std::string in_path, out_path, config_path, query_text, run_dir, labels_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 42;
    int max_len = 128, n_train = 2000, n_valid = 400, k = 5, val_size = 500;
    double lr = 1e-5;

    auto* lexicon = app.add_subcommand("lexicon", "lexicon utilities");
    auto* stats = lexicon->add_subcommand("stats", "candidate-token fraction per split");
    stats->add_option("--lexicon", lexicon_path)->required();
    stats->add_option("--data", dataset_dir)->required();
    stats->add_option("--format", format);
    stats->add_option("--max-len", max_len);

    auto* data = app.add_subcommand("data", "dataset utilities");
    auto* build_sgts = data->add_subcommand("build-sgts", "pair a labeled split into a benchmark");
    build_sgts->add_option("--in", in_path)->required();
    build_sgts->add_option("--format", format);
    build_sgts->add_option("--seed", seed);
    build_sgts->add_option("--out", out_path)->required();
    auto* make_toy = data->add_subcommand("make-toy", "generate a synthetic labeled corpus");
    make_toy->add_option("--out", out_path)->required();
    make_toy->add_option("--train", n_train);
    make_toy->add_option("--valid", n_valid);
    make_toy->add_option("--seed", seed);

    auto* pretrain = app.add_subcommand("pretrain", "contrastive + masked-word pre-training");
    pretrain->add_option("--config", config_path);
    pretrain->add_option("--set", overrides, "key=value override (repeatable)");

    auto* eval_sgts = app.add_subcommand("eval-sgts", "score a model on a benchmark");
    eval_sgts->add_option("--model", model_path)->required();
    eval_sgts->add_option("--vocab", vocab_path);
    eval_sgts->add_option("--pairs", in_path)->required();
    eval_sgts->add_option("--out", out_path);

    auto* probe = app.add_subcommand("probe", "linear probe on frozen embeddings");
    probe->add_option("--model", model_path)->required();
    probe->add_option("--vocab", vocab_path);
    probe->add_option("--data", dataset_dir)->required();
    probe->add_option("--format", format);
    probe->add_option("--seed", seed);
    probe->add_option("--out", out_path);

    auto* fewshot = app.add_subcommand("fewshot", "K-shot fine-tuning over 10 seeds");
    fewshot->add_option("--model", model_path)->required();
    fewshot->add_option("--vocab", vocab_path);
    fewshot->add_option("--data", dataset_dir)->required();
    fewshot->add_option("--format", format);
    fewshot->add_option("-k,--k", k);
    fewshot->add_option("--val-size", val_size);
    fewshot->add_option("--lr", lr);
    fewshot->add_option("--seed", seed);
    fewshot->add_option("--out", out_path);

    auto* embed = app.add_subcommand("embed", "write sentence embeddings as CSV");
    embed->add_option("--model", model_path)->required();
    embed->add_option("--vocab", vocab_path);
    embed->add_option("--in", in_path)->required();
    embed->add_option("--format", format);
    embed->add_option("--out", out_path)->required();

    auto* plot = app.add_subcommand("plot", "2-D PCA scatter of embeddings");
    plot->add_option("--embeddings", in_path)->required();
    plot->add_option("--labels", labels_path);
    plot->add_option("--out", out_path)->required();

    auto* query = app.add_subcommand("query", "nearest neighbors by cosine");
    query->add_option("--model", model_path)->required();
    query->add_option("--vocab", vocab_path);
    query->add_option("--query", query_text)->required();
    query->add_option("--candidates", in_path)->required();
    query->add_option("--format", format);
    query->add_option("-k", k);

    auto* report = app.add_subcommand("report", "merge run results into one report");
    report->add_option("--run-dir", run_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (stats->parsed()) return cmd_lexicon_stats(lexicon_path, dataset_dir, format, max_len);
        if (build_sgts->parsed()) return cmd_build_sgts(in_path, format, seed, out_path);
        if (make_toy->parsed()) return cmd_make_toy(out_path, n_train, n_valid, seed);
        if (pretrain->parsed()) return cmd_pretrain(config_path, overrides);
        if (eval_sgts->parsed()) return cmd_eval_sgts(model_path, vocab_path, in_path, out_path);
        if (probe->parsed()) {
            return cmd_probe(model_path, vocab_path, dataset_dir, format, seed, out_path);
        }
        if (fewshot->parsed()) {
            return cmd_fewshot(model_path, vocab_path, dataset_dir, format, k, val_size, lr,
                               seed, out_path);
        }
        if (embed->parsed()) return cmd_embed(model_path, vocab_path, in_path, format, out_path);
        if (plot->parsed()) return cmd_plot(in_path, labels_path, out_path);
        if (query->parsed()) {
            return cmd_query(model_path, vocab_path, query_text, in_path, format, k);
        }
        if (report->parsed()) return cmd_report(run_dir);
        std::cerr << R"({"error": "no subcommand"})" << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
