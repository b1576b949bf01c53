#include <string>

#include <yaml-cpp/yaml.h>

#include "chatbot/error.hpp"
#include "chatbot/store.hpp"

namespace chatbot::store {
namespace {

std::size_t line_of(const YAML::Node& n) { return static_cast<std::size_t>(n.Mark().line) + 1; }

std::string scalar(const YAML::Node& n, const char* what, std::optional<std::size_t> conversation) {
    if (!n.IsScalar() || n.IsNull())
        throw ParseError(std::string(what) + " must be a non-empty scalar", line_of(n), conversation);
    std::string s = n.Scalar();
    if (s.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ParseError(std::string(what) + " must not be blank", line_of(n), conversation);
    return s;
}

}  // namespace

CorpusFile parse_corpus(std::string_view yaml) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::Exception& e) {
        throw ParseError("malformed YAML: " + e.msg,
                         e.mark.is_null() ? std::nullopt
                                          : std::optional<std::size_t>(e.mark.line + 1));
    }
    if (!root.IsMap()) throw ParseError("corpus root must be a mapping", 1);

    CorpusFile out;
    if (const auto cats = root["categories"]; cats && !cats.IsNull()) {
        if (!cats.IsSequence()) throw ParseError("'categories' must be a sequence", line_of(cats));
        for (const auto& c : cats) out.categories.push_back(scalar(c, "category", std::nullopt));
    }

    const auto convs = root["conversations"];
    if (!convs) throw ParseError("missing 'conversations' key", 1);
    if (!convs.IsSequence()) throw ParseError("'conversations' must be a sequence", line_of(convs));
    for (std::size_t i = 0; i < convs.size(); ++i) {
        const auto conv = convs[i];
        if (!conv.IsSequence())
            throw ParseError("conversation must be a sequence of utterances", line_of(conv), i);
        if (conv.size() < 2)
            throw ParseError("a conversation needs at least two utterances", line_of(conv), i);
        std::vector<std::string> utterances;
        utterances.reserve(conv.size());
        for (const auto& u : conv) utterances.push_back(scalar(u, "utterance", i));
        out.conversations.push_back(std::move(utterances));
    }
    return out;
}

}  // namespace chatbot::store
