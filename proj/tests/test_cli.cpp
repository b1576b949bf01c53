#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "chatbot/cli.hpp"
#include "chatbot/store.hpp"

using namespace chatbot;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("chatbot_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "chatbot");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
    return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

std::string repo(const std::string& rel) { return std::string(CHATBOT_REPO_DATA) + "/" + rel; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("train reports per-file counts and totals") {
    TempDir tmp;
    const auto corpus = tmp.path / "corpus";
    fs::create_directories(corpus);
    fs::copy_file(repo("corpus/conversations.yml"), corpus / "conversations.yml");
    fs::copy_file(repo("corpus/greetings.yml"), corpus / "greetings.yaml");
    write(corpus / "notes.txt", "ignored");
    const auto store = (tmp.path / "bot.store").string();

    auto r = run({"train", "--corpus-dir", corpus.string(), "--store", store, "--json"});
    REQUIRE(r.code == cli::kOk);
    auto j = json::parse(r.out);
    REQUIRE(j["files"].size() == 2);
    CHECK(j["files"][0]["exchanges"] == 27);
    CHECK(j["files"][1]["exchanges"] == 8);
    CHECK(j["total_exchanges"] == 35);
    const std::size_t statements = j["statements"];

    r = run({"train", "--corpus-dir", corpus.string(), "--store", store});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("100%") != std::string::npos);
    CHECK(r.out.find("27 exchanges") != std::string::npos);

    const auto st = store::KnowledgeStore::load(store);
    CHECK(st.statements().size() == statements);
    CHECK(st.responses_to("Good morning, how are you?")[0].occurrence == 2);
}

TEST_CASE("train failure modes") {
    TempDir tmp;
    const auto store = tmp.path / "bot.store";
    fs::create_directories(tmp.path / "empty");
    auto r = run({"train", "--corpus-dir", (tmp.path / "empty").string(), "--store", store.string()});
    CHECK(r.code == cli::kMissingInput);
    CHECK_FALSE(fs::exists(store));

    write(tmp.path / "c" / "a.yml", "conversations:\n- - Hello\n  - Hi\n");
    r = run({"train", "--corpus-dir", (tmp.path / "c").string(), "--store", store.string()});
    REQUIRE(r.code == cli::kOk);
    const std::string before = slurp(store);

    write(tmp.path / "c" / "b.yml", "conversations:\n- - fine\n  - ok\n- - broken\n");
    r = run({"train", "--corpus-dir", (tmp.path / "c").string(), "--store", store.string()});
    CHECK(r.code == cli::kSchemaError);
    CHECK(r.err.find("b.yml") != std::string::npos);
    CHECK(r.err.find("line 4") != std::string::npos);
    CHECK(slurp(store) == before);

    write(tmp.path / "nested" / "deep" / "x.yml", "conversations:\n- - Hello\n  - Hi\n");
    r = run({"train", "--corpus-dir", (tmp.path / "nested").string(), "--store", store.string()});
    CHECK(r.code == cli::kMissingInput);
    r = run({"train", "--corpus-dir", (tmp.path / "nested").string(), "--store", store.string(), "--recursive"});
    CHECK(r.code == cli::kOk);

    CHECK(run({"train", "--store", store.string()}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("chat loop") {
    TempDir tmp;
    const auto store = (tmp.path / "bot.store").string();
    REQUIRE(run({"train", "--corpus-dir", repo("corpus"), "--store", store}).code == cli::kOk);

    auto r = run({"chat", "--store", store}, "hi\nquantum flux capacitor\n/review\n/quit\nhi\n");
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("You: Bot: hello\n") != std::string::npos);
    CHECK(r.out.find("Bot: I'm sorry, I don't understand.") != std::string::npos);
    CHECK(r.out.find("  quantum flux capacitor\n") != std::string::npos);
    // Nothing after /quit is answered.
    CHECK(r.out.find("hello") == r.out.rfind("hello"));

    r = run({"chat", "--store", store, "--config", std::string(CHATBOT_REPO_ROOT) + "/config/chatbot.conf"},
            "when am I eligible to get a pension\n01/02/1961\n");
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("Could you tell me your date of birth?") != std::string::npos);
    CHECK(r.out.find("01/02/1961") != std::string::npos);

    CHECK(run({"chat", "--store", (tmp.path / "missing.store").string()}).code == cli::kMissingInput);
}

TEST_CASE("eval metrics") {
    TempDir tmp;
    const auto store = (tmp.path / "bot.store").string();
    REQUIRE(run({"train", "--corpus-dir", repo("corpus"), "--store", store}).code == cli::kOk);

    write(tmp.path / "self.tsv", "# prompts and their answers\nhi\thello\nGreetings!\tHello\nGood morning, how are you?\tI am doing well, how about you?\n");
    auto r = run({"eval", "--store", store, "--heldout", (tmp.path / "self.tsv").string(), "--json"});
    REQUIRE(r.code == cli::kOk);
    auto j = json::parse(r.out);
    CHECK(j["cases"] == 3);
    CHECK(j["top1_accuracy"] == 1.0);
    CHECK(j["fallback_rate"] == 0.0);
    CHECK(j["mean_confidence"].get<double>() == doctest::Approx(1.0));
    CHECK(j["latency_p95_ms"].get<double>() >= j["latency_p50_ms"].get<double>());

    write(tmp.path / "oov.tsv", "zxqv wplk\tnothing\nqqqq\tnothing\n");
    r = run({"eval", "--store", store, "--heldout", (tmp.path / "oov.tsv").string(), "--json"});
    j = json::parse(r.out);
    CHECK(j["fallback_rate"] == 1.0);
    CHECK(j["top1_accuracy"] == 0.0);

    r = run({"eval", "--store", store, "--heldout", (tmp.path / "oov.tsv").string()});
    CHECK(r.out.find("fallback rate") != std::string::npos);

    write(tmp.path / "empty.tsv", "# nothing\n");
    CHECK(run({"eval", "--store", store, "--heldout", (tmp.path / "empty.tsv").string()}).code ==
          cli::kMissingInput);
    write(tmp.path / "bad.tsv", "no tab here\n");
    CHECK(run({"eval", "--store", store, "--heldout", (tmp.path / "bad.tsv").string()}).code == cli::kFailure);
    CHECK(run({"eval", "--store", (tmp.path / "nope").string(), "--heldout", (tmp.path / "self.tsv").string()})
              .code == cli::kMissingInput);
}

TEST_CASE("corpus file discovery order") {
    TempDir tmp;
    write(tmp.path / "b.yml", "");
    write(tmp.path / "a.yaml", "");
    write(tmp.path / "c.txt", "");
    write(tmp.path / "sub" / "d.yml", "");
    const auto flat = cli::corpus_files(tmp.path, false);
    REQUIRE(flat.size() == 2);
    CHECK(flat[0].filename() == "a.yaml");
    CHECK(flat[1].filename() == "b.yml");
    CHECK(cli::corpus_files(tmp.path, true).size() == 3);
    CHECK(cli::corpus_files(tmp.path / "missing", false).empty());
}

TEST_CASE("serve answers over HTTP and persists uploads") {
    TempDir tmp;
    const auto store = (tmp.path / "bot.store").string();
    int port = 0;
    {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        socklen_t len = sizeof addr;
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), len) == 0 &&
            ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0)
            port = ntohs(addr.sin_port);
        ::close(fd);
    }
    REQUIRE(port > 0);
    write(tmp.path / "serve.conf", "host = 127.0.0.1\ncorpus_dir = " + repo("corpus") + "\n");

    int code = -1;
    std::ostringstream out, err;
    std::thread server([&] {
        code = cli::cmd_serve(store, port, (tmp.path / "serve.conf").string(), out, err);
    });

    httplib::Client cli("127.0.0.1", port);
    httplib::Result health;
    for (int i = 0; i < 100 && !health; ++i) {
        health = cli.Get("/v1/health");
        if (!health) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    auto chat = cli.Post("/v1/chat", R"({"message":"hi"})", "application/json");
    auto up = cli.Post("/v1/train/corpus", "conversations:\n- - Ping\n  - Pong\n", "application/x-yaml");
    std::raise(SIGINT);
    server.join();

    REQUIRE(health);
    CHECK(json::parse(health->body)["status"] == "ok");
    REQUIRE(chat);
    CHECK(json::parse(chat->body)["reply"] == "hello");
    REQUIRE(up);
    CHECK(up->status == 200);
    CHECK(code == cli::kOk);
    const auto st = store::KnowledgeStore::load(store);
    CHECK(st.responses_to("Ping").size() == 1);
    CHECK(st.responses_to("hi").size() == 1);
}
