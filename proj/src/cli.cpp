#include "chatbot/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "chatbot/engine.hpp"
#include "chatbot/error.hpp"
#include "chatbot/server.hpp"
#include "chatbot/store.hpp"

namespace chatbot::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void progress_bar(std::ostream& out, const std::string& label, std::size_t done, std::size_t total) {
    constexpr std::size_t kWidth = 20;
    const std::size_t filled = total == 0 ? kWidth : done * kWidth / total;
    const std::size_t pct = total == 0 ? 100 : done * 100 / total;
    out << '\r' << label << ": [" << std::string(filled, '#') << std::string(kWidth - filled, ' ') << "] "
        << pct << '%';
    if (done == total) out << '\n';
    out << std::flush;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    // nearest-rank
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

std::vector<fs::path> corpus_files(const fs::path& dir, bool recursive) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    auto consider = [&](const fs::directory_entry& e) {
        if (!e.is_regular_file()) return;
        const auto ext = e.path().extension();
        if (ext == ".yml" || ext == ".yaml") out.push_back(e.path());
    };
    if (recursive) {
        for (const auto& e : fs::recursive_directory_iterator(dir)) consider(e);
    } else {
        for (const auto& e : fs::directory_iterator(dir)) consider(e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

config::AppConfig resolve_config(const std::string& path) {
    config::AppConfig cfg = path.empty() ? config::AppConfig{} : config::load(path);
    config::apply_env(cfg, config::process_env());
    cfg.engine.validate();
    return cfg;
}

int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(opt.config);
    const auto files = corpus_files(opt.corpus_dir, opt.recursive);
    if (files.empty()) {
        err << "error: no .yml corpus files in " << opt.corpus_dir << '\n';
        return kMissingInput;
    }

    // Validate every file before anything touches the store.
    std::vector<store::CorpusFile> corpora;
    for (const auto& f : files) {
        try {
            corpora.push_back(store::parse_corpus(read_file(f)));
        } catch (const ParseError& e) {
            err << "error: " << f.string() << ": " << e.what() << '\n';
            return kSchemaError;
        }
    }

    store::KnowledgeStore st = fs::exists(opt.store) ? store::KnowledgeStore::load(opt.store, cfg.engine.pipeline)
                                                     : store::KnowledgeStore(cfg.engine.pipeline);
    json report{{"files", json::array()}};
    std::size_t total = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::size_t added = st.ingest(corpora[i]);
        total += added;
        const std::string name = files[i].filename().string();
        if (opt.json) {
            report["files"].push_back({{"file", files[i].string()}, {"exchanges", added}});
        } else {
            progress_bar(out, "Training " + name, 1, 1);
            out << "  " << added << " exchanges\n";
        }
    }
    st.check_integrity();
    st.save(opt.store);

    if (opt.json) {
        report["total_exchanges"] = total;
        report["statements"] = st.statements().size();
        report["store"] = opt.store.string();
        out << report.dump() << '\n';
    } else {
        out << "Trained " << total << " exchanges from " << files.size() << " file(s); store has "
            << st.statements().size() << " statements -> " << opt.store.string() << '\n';
    }
    return kOk;
}

int cmd_chat(const fs::path& store_path, const std::string& config_path, std::istream& in,
             std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(config_path);
    if (!fs::exists(store_path)) {
        err << "error: store " << store_path << " does not exist; run `train` first\n";
        return kMissingInput;
    }
    engine::Engine bot(cfg.engine, store::KnowledgeStore::load(store_path, cfg.engine.pipeline));
    engine::ChatSession session;
    std::string line;
    while (true) {
        out << "You: " << std::flush;
        if (!std::getline(in, line)) {
            out << '\n';
            return kOk;
        }
        if (line == "/quit") return kOk;
        if (line == "/review") {
            for (const auto& q : bot.review_queue()) out << "  " << q << '\n';
            continue;
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out << "Bot: " << bot.respond(session, line).reply << "\n\n";
        } catch (const InputTooLong& e) {
            out << "Bot: (" << e.what() << ")\n\n";
        } catch (const InvalidArgument&) {
            out << "Bot: " << cfg.engine.fallback_text << "\n\n";
        } catch (const NoKnowledge&) {
            out << "Bot: " << cfg.engine.fallback_text << "\n\n";
        }
    }
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(opt.config);
    if (!fs::exists(opt.store)) {
        err << "error: store " << opt.store << " does not exist\n";
        return kMissingInput;
    }
    std::ifstream in(opt.heldout);
    if (!in) {
        err << "error: cannot read held-out file " << opt.heldout << '\n';
        return kMissingInput;
    }
    std::vector<std::pair<std::string, std::string>> cases;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            err << "error: " << opt.heldout.string() << ":" << lineno << ": expected question<TAB>answer\n";
            return kFailure;
        }
        cases.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    if (cases.empty()) {
        err << "error: held-out file " << opt.heldout << " has no cases\n";
        return kMissingInput;
    }

    engine::EngineConfig ecfg = cfg.engine;
    ecfg.learn_inputs = false;
    engine::Engine bot(ecfg, store::KnowledgeStore::load(opt.store, ecfg.pipeline));
    std::size_t correct = 0, fallbacks = 0;
    double confidence = 0.0;
    std::vector<double> latencies;
    for (const auto& [question, expected] : cases) {
        engine::ChatSession session;
        const auto t0 = std::chrono::steady_clock::now();
        engine::MatchResult r;
        try {
            r = bot.respond(session, question);
        } catch (const std::exception&) {
            r.source = engine::Source::fallback;
        }
        latencies.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
        confidence += r.similarity;
        if (r.source == engine::Source::fallback) ++fallbacks;
        if (r.source == engine::Source::matched && r.reply == expected) ++correct;
    }
    const double n = static_cast<double>(cases.size());
    json m{{"cases", cases.size()},
           {"top1_accuracy", static_cast<double>(correct) / n},
           {"mean_confidence", confidence / n},
           {"fallback_rate", static_cast<double>(fallbacks) / n},
           {"latency_p50_ms", percentile(latencies, 0.50)},
           {"latency_p95_ms", percentile(latencies, 0.95)}};
    if (opt.json) {
        out << m.dump() << '\n';
    } else {
        out << std::fixed << std::setprecision(4) << "cases            " << cases.size() << '\n'
            << "top-1 accuracy   " << m["top1_accuracy"].get<double>() << '\n'
            << "mean confidence  " << m["mean_confidence"].get<double>() << '\n'
            << "fallback rate    " << m["fallback_rate"].get<double>() << '\n'
            << std::setprecision(3) << "latency p50      " << m["latency_p50_ms"].get<double>() << " ms\n"
            << "latency p95      " << m["latency_p95_ms"].get<double>() << " ms\n";
    }
    return kOk;
}

int cmd_serve(const fs::path& store_path, int port, const std::string& config_path, std::ostream& out,
              std::ostream& err) {
    auto cfg = resolve_config(config_path);
    if (port > 0) cfg.server.port = port;

    store::KnowledgeStore st = fs::exists(store_path) ? store::KnowledgeStore::load(store_path, cfg.engine.pipeline)
                                                      : store::KnowledgeStore(cfg.engine.pipeline);
    if (st.empty() && !cfg.server.corpus_dir.empty()) {
        for (const auto& f : corpus_files(cfg.server.corpus_dir, false)) {
            try {
                st.ingest_corpus(read_file(f));
            } catch (const ParseError& e) {
                err << "error: " << f.string() << ": " << e.what() << '\n';
                return kSchemaError;
            }
        }
    }

    engine::Engine bot(cfg.engine, std::move(st));
    server::ChatService service(bot, cfg.server);
    service.on_trained([store_path](const store::KnowledgeStore& s) { s.save(store_path); });
    server::HttpServer http(service, out);

    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const int bound = http.start(cfg.server.host, cfg.server.port);
    if (bound < 0) {
        err << "error: cannot listen on " << cfg.server.host << ':' << cfg.server.port << '\n';
        return kFailure;
    }
    err << "listening on " << cfg.server.host << ':' << bound << '\n';
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    http.stop();
    return kOk;
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Retrieval chatbot: train, chat, serve and evaluate"};
    app.require_subcommand(1);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Ingest every corpus file in a directory into the store");
    train_cmd->add_option("--corpus-dir", train.corpus_dir, "Directory of .yml corpus files")->required();
    train_cmd->add_option("--store", train.store, "Store file to create or extend")->required();
    train_cmd->add_option("--config", train.config, "Engine configuration file");
    train_cmd->add_flag("--recursive", train.recursive, "Descend into subdirectories");
    train_cmd->add_flag("--json", train.json, "Machine-readable output");

    fs::path chat_store;
    std::string chat_config;
    auto* chat_cmd = app.add_subcommand("chat", "Interactive terminal chat");
    chat_cmd->add_option("--store", chat_store, "Store file")->required();
    chat_cmd->add_option("--config", chat_config, "Engine configuration file");

    fs::path serve_store;
    std::string serve_config;
    int serve_port = 0;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP chat service");
    serve_cmd->add_option("--store", serve_store, "Store file")->required();
    serve_cmd->add_option("--port", serve_port, "Listen port (overrides config)")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--config", serve_config, "Engine and server configuration file");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a held-out question<TAB>answer file");
    eval_cmd->add_option("--store", eval.store, "Store file")->required();
    eval_cmd->add_option("--heldout", eval.heldout, "Held-out pairs")->required();
    eval_cmd->add_option("--config", eval.config, "Engine configuration file");
    eval_cmd->add_flag("--json", eval.json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return kUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train, out, err);
        if (*chat_cmd) return cmd_chat(chat_store, chat_config, in, out, err);
        if (*serve_cmd) return cmd_serve(serve_store, serve_port, serve_config, out, err);
        if (*eval_cmd) return cmd_eval(eval, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

}  // namespace chatbot::cli
