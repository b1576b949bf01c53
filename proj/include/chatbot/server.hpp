#pragma once

// HTTP/JSON chat service.
//
//   POST /v1/chat           {"session_id"?: string, "message": string}
//                        -> {"session_id", "reply", "confidence", "source"}
//   POST /v1/train/corpus   corpus YAML (raw body or multipart field "file")
//                        -> {"exchanges_added"}
//   GET  /v1/health      -> {"status", "statements", "model_terms"}
//
// Errors carry {"error": code, "message": text}. Message length is counted
// in Unicode scalar values.

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <thread>

#include "chatbot/config.hpp"
#include "chatbot/engine.hpp"

namespace httplib {
class Server;
}

namespace chatbot::server {

struct HttpResult {
    int status = 200;
    std::string body;
};

class SessionManager {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    struct Slot {
        std::mutex mutex;  // serializes requests within one session
        engine::ChatSession session;
        std::chrono::steady_clock::time_point last_used;
    };

    struct Lease {
        std::string id;
        std::shared_ptr<Slot> slot;
        bool created = false;
    };

    explicit SessionManager(std::chrono::minutes idle = std::chrono::minutes(30),
                            Clock clock = std::chrono::steady_clock::now);

    /// Returns the live session for `id`, or a fresh one when the id is
    /// missing, unknown or expired. Idle sessions are evicted on the way.
    Lease acquire(const std::optional<std::string>& id);

    std::size_t size() const;
    /// Copy of a session's history, if the session is live.
    std::optional<std::vector<engine::Turn>> history(const std::string& id) const;

private:
    std::string new_id();
    void evict_idle(std::chrono::steady_clock::time_point now);

    std::chrono::minutes idle_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::mt19937_64 rng_;
};

class ChatService {
public:
    using TrainedHook = std::function<void(const store::KnowledgeStore&)>;

    explicit ChatService(engine::Engine& engine, config::ServerSettings settings = {});

    HttpResult handle_chat(std::string_view body);
    HttpResult handle_train(std::string_view yaml);
    HttpResult handle_health() const;

    /// Called after every successful corpus upload, e.g. to persist the store.
    void on_trained(TrainedHook hook) { on_trained_ = std::move(hook); }

    SessionManager& sessions() { return sessions_; }
    const config::ServerSettings& settings() const { return settings_; }

private:
    engine::Engine& engine_;
    config::ServerSettings settings_;
    SessionManager sessions_;
    TrainedHook on_trained_;
    std::mutex hook_mutex_;
};

/// Binds a ChatService to HTTP. One JSON log line per request goes to `log`.
class HttpServer {
public:
    HttpServer(ChatService& service, std::ostream& log);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port, or -1 on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    /// bind + run on a background thread.
    int start(const std::string& host, int port);
    void stop();

private:
    void install_routes();

    ChatService& service_;
    std::ostream& log_;
    std::mutex log_mutex_;
    std::unique_ptr<httplib::Server> http_;
    std::thread thread_;
};

}  // namespace chatbot::server
