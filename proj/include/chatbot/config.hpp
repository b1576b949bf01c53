#pragma once

// Plain-text configuration:
//
//   # comment
//   threshold = 0.40
//   fallback_text = Sorry, I did not catch that.
//   stop_words = stop_words_en.txt      (relative to the config file)
//   port = 8080
//
//   [template pension]
//   triggers = pension
//   slot = date_of_birth date
//   follow_up = Could you tell me your date of birth?
//   answer = Born {date_of_birth}: see our pension page.
//
//   [adapter fares]
//   label = fare
//   categories = fares
//   example = how much is a cab to heathrow
//
// Environment overrides: CHATBOT_PORT, CHATBOT_HOST, CHATBOT_THRESHOLD,
// CHATBOT_CORPUS_DIR, CHATBOT_CORS_ORIGIN.

#include <chrono>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <string>

#include "chatbot/engine.hpp"

namespace chatbot::config {

struct ServerSettings {
    std::string host = "0.0.0.0";
    int port = 8080;
    std::string cors_origin;  // empty disables CORS headers
    std::filesystem::path corpus_dir;
    std::chrono::minutes session_idle{30};
    std::size_t max_body_bytes = 8u << 20;
};

struct AppConfig {
    engine::EngineConfig engine;
    ServerSettings server;
};

/// Relative resource paths resolve against `base_dir`. Throws ParseError.
AppConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
AppConfig load(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();
void apply_env(AppConfig& cfg, const EnvLookup& env);

}  // namespace chatbot::config
