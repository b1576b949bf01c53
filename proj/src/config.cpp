#include "chatbot/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "chatbot/error.hpp"

namespace chatbot::config {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_bool(const std::string& v, std::optional<std::size_t> line) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ParseError("expected a boolean, got '" + v + "'", line);
}

double parse_double(const std::string& v, std::optional<std::size_t> line) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError("expected a number, got '" + v + "'", line);
    return out;
}

long parse_int(const std::string& v, std::optional<std::size_t> line) {
    long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError("expected an integer, got '" + v + "'", line);
    return out;
}

int parse_port(const std::string& v, std::optional<std::size_t> line) {
    const long p = parse_int(v, line);
    if (p < 1 || p > 65535) throw ParseError("port must be within 1-65535", line);
    return static_cast<int>(p);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base.empty() ? p : base / p;
}

void set_global(AppConfig& cfg, const std::string& key, const std::string& v, std::size_t line,
                const std::filesystem::path& base) {
    auto& e = cfg.engine;
    auto& pipe = e.pipeline;
    if (key == "threshold") {
        e.threshold = parse_double(v, line);
    } else if (key == "fallback_text") {
        e.fallback_text = v;
    } else if (key == "learn_inputs") {
        e.learn_inputs = parse_bool(v, line);
    } else if (key == "response_selection") {
        if (v == "most-frequent") e.response_selection = engine::ResponseSelection::most_frequent;
        else if (v == "first") e.response_selection = engine::ResponseSelection::first;
        else throw ParseError("response_selection is most-frequent or first", line);
    } else if (key == "max_input_chars") {
        const long n = parse_int(v, line);
        if (n < 1) throw ParseError("max_input_chars must be positive", line);
        e.max_input_chars = static_cast<std::size_t>(n);
    } else if (key == "stemming") {
        pipe.stemming_enabled = parse_bool(v, line);
    } else if (key == "punctuation") {
        if (v == "strip") pipe.punctuation = text::PunctuationPolicy::strip;
        else if (v == "keep-intra-word") pipe.punctuation = text::PunctuationPolicy::keep_intra_word;
        else throw ParseError("punctuation is strip or keep-intra-word", line);
    } else if (key == "stop_words") {
        pipe.stop_list = text::load_stop_list(resolve(base, v));
    } else if (key == "synonyms") {
        pipe.expansion.synonyms = text::load_synonyms(resolve(base, v));
    } else if (key == "expansion") {
        pipe.expansion.enabled = parse_bool(v, line);
    } else if (key == "spell_correct") {
        pipe.expansion.spell_correct = parse_bool(v, line);
    } else if (key == "max_edit_distance") {
        const long n = parse_int(v, line);
        if (n < 0 || n > 3) throw ParseError("max_edit_distance must be within 0-3", line);
        pipe.expansion.max_edit_distance = static_cast<int>(n);
    } else if (key == "host") {
        cfg.server.host = v;
    } else if (key == "port") {
        cfg.server.port = parse_port(v, line);
    } else if (key == "cors_origin") {
        cfg.server.cors_origin = v;
    } else if (key == "corpus_dir") {
        cfg.server.corpus_dir = resolve(base, v);
    } else if (key == "session_idle_minutes") {
        const long n = parse_int(v, line);
        if (n < 1) throw ParseError("session_idle_minutes must be positive", line);
        cfg.server.session_idle = std::chrono::minutes(n);
    } else {
        throw ParseError("unknown key '" + key + "'", line);
    }
}

void set_template(engine::ClarifyTemplate& t, const std::string& key, const std::string& v,
                  std::size_t line) {
    if (key == "triggers") {
        std::istringstream ss(v);
        for (std::string w; ss >> w;) t.trigger_words.push_back(w);
    } else if (key == "slot") {
        std::istringstream ss(v);
        std::string name, kind;
        ss >> name >> kind;
        if (name.empty()) throw ParseError("slot needs a name", line);
        t.slot_name = name;
        if (kind.empty() || kind == "date") t.slot_kind = engine::SlotKind::date;
        else if (kind == "year") t.slot_kind = engine::SlotKind::year;
        else throw ParseError("slot kind is date or year", line);
    } else if (key == "follow_up") {
        t.follow_up = v;
    } else if (key == "answer") {
        t.answer = v;
    } else {
        throw ParseError("unknown template key '" + key + "'", line);
    }
}

void set_adapter(engine::AdapterRoute& a, const std::string& key, const std::string& v,
                 std::size_t line) {
    if (key == "label") a.label = v;
    else if (key == "categories") a.categories = split_list(v);
    else if (key == "example") a.examples.push_back(v);
    else throw ParseError("unknown adapter key '" + key + "'", line);
}

}  // namespace

AppConfig parse(std::istream& in, const std::filesystem::path& base_dir) {
    AppConfig cfg;
    enum class Section { global, tmpl, adapter } section = Section::global;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError("unterminated section header", line);
            std::istringstream hs(s.substr(1, s.size() - 2));
            std::string kind, name, extra;
            hs >> kind >> name >> extra;
            if (name.empty() || !extra.empty()) throw ParseError("section header is [kind name]", line);
            if (kind == "template") {
                section = Section::tmpl;
                cfg.engine.templates.push_back({});
                cfg.engine.templates.back().name = name;
            } else if (kind == "adapter") {
                section = Section::adapter;
                cfg.engine.adapters.push_back({});
                cfg.engine.adapters.back().id = name;
            } else {
                throw ParseError("unknown section kind '" + kind + "'", line);
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line);
        switch (section) {
            case Section::global: set_global(cfg, key, value, line, base_dir); break;
            case Section::tmpl: set_template(cfg.engine.templates.back(), key, value, line); break;
            case Section::adapter: set_adapter(cfg.engine.adapters.back(), key, value, line); break;
        }
    }
    try {
        cfg.engine.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    return cfg;
}

AppConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config " + path.string());
    return parse(in, path.parent_path());
}

EnvLookup process_env() {
    return [](const char* name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name)) return std::string(v);
        return std::nullopt;
    };
}

void apply_env(AppConfig& cfg, const EnvLookup& env) {
    if (auto v = env("CHATBOT_PORT")) cfg.server.port = parse_port(*v, std::nullopt);
    if (auto v = env("CHATBOT_HOST")) cfg.server.host = *v;
    if (auto v = env("CHATBOT_THRESHOLD")) {
        cfg.engine.threshold = parse_double(*v, std::nullopt);
        if (!(cfg.engine.threshold >= 0.0 && cfg.engine.threshold <= 1.0))
            throw ParseError("CHATBOT_THRESHOLD must be within [0, 1]");
    }
    if (auto v = env("CHATBOT_CORPUS_DIR")) cfg.server.corpus_dir = *v;
    if (auto v = env("CHATBOT_CORS_ORIGIN")) cfg.server.cors_origin = *v;
}

}  // namespace chatbot::config
