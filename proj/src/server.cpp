#include "chatbot/server.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "chatbot/error.hpp"
#include "chatbot/utf8.hpp"

namespace chatbot::server {
namespace {

using nlohmann::json;

HttpResult error(int status, std::string_view code, std::string_view message, json extra = json::object()) {
    extra["error"] = code;
    extra["message"] = message;
    return HttpResult{status, extra.dump()};
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const auto secs = std::chrono::system_clock::to_time_t(t);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

thread_local std::chrono::steady_clock::time_point request_start;

}  // namespace

SessionManager::SessionManager(std::chrono::minutes idle, Clock clock)
    : idle_(idle), clock_(std::move(clock)), rng_(std::random_device{}()) {}

std::string SessionManager::new_id() {
    std::ostringstream ss;
    ss << std::hex << std::setfill('0') << std::setw(16) << rng_() << std::setw(16) << rng_();
    return ss.str();
}

void SessionManager::evict_idle(std::chrono::steady_clock::time_point now) {
    std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_used > idle_; });
}

SessionManager::Lease SessionManager::acquire(const std::optional<std::string>& id) {
    const auto now = clock_();
    std::lock_guard lock(mutex_);
    evict_idle(now);
    if (id) {
        if (auto it = sessions_.find(*id); it != sessions_.end()) {
            it->second->last_used = now;
            return Lease{it->first, it->second, false};
        }
    }
    std::string fresh;
    do {
        fresh = new_id();
    } while (sessions_.contains(fresh));
    auto slot = std::make_shared<Slot>();
    slot->last_used = now;
    sessions_.emplace(fresh, slot);
    return Lease{fresh, slot, true};
}

std::size_t SessionManager::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::optional<std::vector<engine::Turn>> SessionManager::history(const std::string& id) const {
    std::shared_ptr<Slot> slot;
    {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return std::nullopt;
        slot = it->second;
    }
    std::lock_guard lock(slot->mutex);
    return slot->session.history;
}

ChatService::ChatService(engine::Engine& engine, config::ServerSettings settings)
    : engine_(engine), settings_(std::move(settings)), sessions_(settings_.session_idle) {}

HttpResult ChatService::handle_chat(std::string_view body) {
    json req;
    try {
        req = json::parse(body);
    } catch (const json::parse_error& e) {
        return error(400, "malformed_json", e.what());
    }
    if (!req.is_object()) return error(400, "bad_request", "request body must be a JSON object");
    const auto msg = req.find("message");
    if (msg == req.end() || !msg->is_string()) return error(400, "bad_request", "'message' must be a string");
    std::optional<std::string> session_id;
    if (auto sid = req.find("session_id"); sid != req.end() && !sid->is_null()) {
        if (!sid->is_string()) return error(400, "bad_request", "'session_id' must be a string");
        session_id = sid->get<std::string>();
    }
    const auto& message = msg->get_ref<const std::string&>();

    // Reject before touching the session table.
    const std::size_t length = utf8::length(message);
    if (length > engine_.config().max_input_chars)
        return error(413, "input_too_long",
                     "message has " + std::to_string(length) + " characters; the limit is " +
                         std::to_string(engine_.config().max_input_chars));

    auto lease = sessions_.acquire(session_id);
    std::lock_guard lock(lease.slot->mutex);
    try {
        const auto result = engine_.respond(lease.slot->session, message);
        json reply{{"session_id", lease.id},
                   {"reply", result.reply},
                   {"confidence", result.similarity},
                   {"source", engine::to_string(result.source)}};
        return HttpResult{200, reply.dump()};
    } catch (const InputTooLong& e) {
        return error(413, "input_too_long", e.what());
    } catch (const InvalidArgument& e) {
        return error(400, "empty_message", e.what());
    } catch (const NoKnowledge& e) {
        return error(503, "no_knowledge", e.what());
    }
}

HttpResult ChatService::handle_train(std::string_view yaml) {
    try {
        const std::size_t added = engine_.ingest_corpus(yaml, engine::LockPolicy::fail_if_busy);
        if (on_trained_) {
            std::lock_guard lock(hook_mutex_);
            on_trained_(engine_.snapshot()->store);
        }
        return HttpResult{200, json{{"exchanges_added", added}}.dump()};
    } catch (const ParseError& e) {
        json extra = json::object();
        extra["line"] = e.line ? json(*e.line) : json(nullptr);
        extra["conversation"] = e.conversation ? json(*e.conversation) : json(nullptr);
        return error(422, "invalid_corpus", e.what(), extra);
    } catch (const TrainingInProgress& e) {
        return error(409, "training_in_progress", e.what());
    }
}

HttpResult ChatService::handle_health() const {
    const auto snap = engine_.snapshot();
    const std::size_t statements = snap->store.statements().size();
    json body{{"status", snap->model ? "ok" : "degraded"},
              {"statements", statements},
              {"model_terms", snap->model ? snap->model->term_count() : 0}};
    return HttpResult{200, body.dump()};
}

HttpServer::HttpServer(ChatService& service, std::ostream& log)
    : service_(service), log_(log), http_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
    auto& http = *http_;
    const auto& settings = service_.settings();
    http.set_payload_max_length(settings.max_body_bytes);

    auto send = [](httplib::Response& res, const HttpResult& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json; charset=utf-8");
    };

    http.set_pre_routing_handler([](const httplib::Request&, httplib::Response&) {
        request_start = std::chrono::steady_clock::now();
        return httplib::Server::HandlerResponse::Unhandled;
    });

    if (!settings.cors_origin.empty()) {
        const std::string origin = settings.cors_origin;
        http.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
        });
        http.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
    }

    http.Post("/v1/chat", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.handle_chat(req.body));
    });

    http.Post("/v1/train/corpus", [this, send](const httplib::Request& req, httplib::Response& res) {
        if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) {
                send(res, HttpResult{400, R"({"error":"bad_request","message":"multipart upload needs a 'file' field"})"});
                return;
            }
            send(res, service_.handle_train(req.get_file_value("file").content));
            return;
        }
        send(res, service_.handle_train(req.body));
    });

    http.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
        send(res, service_.handle_health());
    });

    http.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
        const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                       request_start);
        nlohmann::json line{{"ts", utc_timestamp(std::chrono::system_clock::now())},
                            {"method", req.method},
                            {"path", req.path},
                            {"status", res.status},
                            {"bytes", res.body.size()},
                            {"latency_ms", std::round(elapsed.count() * 1000.0) / 1000.0}};
        std::lock_guard lock(log_mutex_);
        log_ << line.dump() << '\n' << std::flush;
    });
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return http_->bind_to_any_port(host);
    return http_->bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() { http_->listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
    const int bound = bind(host, port);
    if (bound < 0) return bound;
    thread_ = std::thread([this] { run(); });
    http_->wait_until_ready();
    return bound;
}

void HttpServer::stop() {
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace chatbot::server
