#pragma once

// Operator commands:
//
//   train --corpus-dir D --store S [--recursive] [--config C] [--json]
//   chat  --store S [--config C]
//   serve --store S [--port P] [--config C]
//   eval  --store S --heldout F [--config C] [--json]
//
// Exit codes: 0 success, 1 runtime failure, 2 missing input (no corpus
// files, missing store, empty held-out set), 3 corpus schema error,
// 64 usage error.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "chatbot/config.hpp"

namespace chatbot::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kMissingInput = 2;
inline constexpr int kSchemaError = 3;
inline constexpr int kUsage = 64;

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

/// `.yml`/`.yaml` files under `dir`, in lexicographic path order.
std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir, bool recursive);

/// Config file (when given) with environment overrides applied.
config::AppConfig resolve_config(const std::string& path);

struct TrainOptions {
    std::filesystem::path corpus_dir;
    std::filesystem::path store;
    std::string config;
    bool recursive = false;
    bool json = false;
};

struct EvalOptions {
    std::filesystem::path store;
    std::filesystem::path heldout;
    std::string config;
    bool json = false;
};

int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err);
int cmd_chat(const std::filesystem::path& store, const std::string& config_path, std::istream& in,
             std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_serve(const std::filesystem::path& store, int port, const std::string& config_path,
              std::ostream& out, std::ostream& err);

}  // namespace chatbot::cli
