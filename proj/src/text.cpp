#include "chatbot/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include "chatbot/error.hpp"
#include "chatbot/utf8.hpp"

namespace chatbot::text {
namespace {

bool is_space(char32_t c) {
    if (c <= 0x20 || (c >= 0x7F && c <= 0xA0)) return true;  // controls count as separators
    switch (c) {
        case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F:
        case 0x3000: case 0xFEFF:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200B;
    }
}

bool is_punct(char32_t c) {
    if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
                         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
    if (c >= 0xA1 && c <= 0xBF) return true;
    if (c == 0xD7 || c == 0xF7) return true;
    if (c >= 0x2010 && c <= 0x2027) return true;
    if (c >= 0x2030 && c <= 0x205E) return true;
    if (c >= 0x3001 && c <= 0x303F) return true;
    return (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
           (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

bool is_word_char(char32_t c) { return !is_space(c) && !is_punct(c); }

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }
bool is_hyphen(char32_t c) { return c == U'-' || c == 0x2010 || c == 0x2011; }

// Simple lowercase mapping for ASCII, Latin-1 and Latin Extended-A.
char32_t to_lower(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 0x20;
    if (c < 0xC0) return c;
    if (c <= 0xDE) return c == 0xD7 ? c : c + 0x20;
    if (c == 0x130) return U'i';
    if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
    if (c == 0x178) return 0xFF;
    if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
    return c;
}

TokenList reindexed(TokenList tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i].position = i;
    return tokens;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <class F>
void for_each_entry_line(std::istream& in, F&& f) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        f(t, lineno);
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    return in;
}

}  // namespace

void ExpansionConfig::validate() const {
    if (max_edit_distance < 0 || max_edit_distance > 3)
        throw InvalidArgument("max_edit_distance must be within [0, 3]");
    auto check = [](const std::string& w) {
        if (w.empty() || normalize(w, PunctuationPolicy::keep_intra_word) != w ||
            w.find(' ') != std::string::npos)
            throw InvalidArgument("synonym entry '" + w + "' must be a lowercase single word");
    };
    for (const auto& [word, syns] : synonyms) {
        check(word);
        for (const auto& s : syns) check(s);
    }
}

void PipelineConfig::validate() const {
    for (const auto& w : stop_list) {
        if (w.empty() || normalize(w, PunctuationPolicy::keep_intra_word) != w ||
            w.find(' ') != std::string::npos)
            throw InvalidArgument("stop word '" + w + "' must be a lowercase single word");
    }
    expansion.validate();
}

std::string NGram::joined() const {
    std::string out;
    for (const auto& t : terms) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

std::string normalize(std::string_view text, PunctuationPolicy policy) {
    const std::u32string cps = utf8::decode(text);
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t c = to_lower(cps[i]);
        if (is_punct(c)) {
            const bool joiner = policy == PunctuationPolicy::keep_intra_word &&
                                (is_apostrophe(c) || is_hyphen(c)) && i > 0 &&
                                i + 1 < cps.size() && is_word_char(cps[i - 1]) &&
                                is_word_char(cps[i + 1]);
            if (!joiner) {
                pending_space = true;
                continue;
            }
            c = is_apostrophe(c) ? U'\'' : U'-';
        } else if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out += ' ';
        pending_space = false;
        utf8::append(out, c);
    }
    return out;
}

TokenList tokenize(std::string_view normalized) {
    TokenList tokens;
    std::size_t i = 0;
    while (i < normalized.size()) {
        while (i < normalized.size() && std::isspace(static_cast<unsigned char>(normalized[i]))) ++i;
        const std::size_t start = i;
        while (i < normalized.size() && !std::isspace(static_cast<unsigned char>(normalized[i]))) ++i;
        if (i > start)
            tokens.push_back(Token{std::string(normalized.substr(start, i - start)), tokens.size()});
    }
    return tokens;
}

TokenList remove_stop_words(const TokenList& tokens, const StopList& stop_list) {
    TokenList out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (!stop_list.contains(t.text)) out.push_back(t);
    return reindexed(std::move(out));
}

TokenList stem_tokens(const TokenList& tokens) {
    TokenList out = tokens;
    for (auto& t : out) t.text = stem(t.text);
    return out;
}

std::vector<NGram> ngrams(const TokenList& tokens, std::size_t n) {
    if (n == 0) throw InvalidArgument("n-gram length must be at least 1");
    std::vector<NGram> out;
    if (tokens.size() < n) return out;
    out.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        NGram g;
        g.terms.reserve(n);
        for (std::size_t j = i; j < i + n; ++j) g.terms.push_back(tokens[j].text);
        out.push_back(std::move(g));
    }
    return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    const std::u32string x = utf8::decode(a);
    const std::u32string y = utf8::decode(b);
    std::vector<std::size_t> row(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (x[i - 1] == y[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[y.size()];
}

TokenList expand_query(const TokenList& tokens, const ExpansionConfig& cfg,
                       const Vocabulary& vocabulary) {
    if (!cfg.enabled) return tokens;
    const auto limit = static_cast<std::size_t>(std::max(cfg.max_edit_distance, 0));
    TokenList out;
    out.reserve(tokens.size());
    for (const auto& tok : tokens) {
        std::string term = tok.text;
        if (cfg.spell_correct && !vocabulary.empty() && !vocabulary.contains(term)) {
            std::size_t best = std::numeric_limits<std::size_t>::max();
            const std::string* candidate = nullptr;
            bool unique = false;
            for (const auto& v : vocabulary) {
                const std::size_t d = edit_distance(term, v);
                if (d < best) {
                    best = d, candidate = &v, unique = true;
                } else if (d == best) {
                    unique = false;
                }
            }
            // Ties at the minimum leave the token as typed.
            if (candidate && unique && best <= limit) term = *candidate;
        }
        out.push_back(Token{term, 0});
        if (auto it = cfg.synonyms.find(term); it != cfg.synonyms.end())
            for (const auto& syn : it->second) out.push_back(Token{syn, 0});
    }
    return reindexed(std::move(out));
}

Terms texts(const TokenList& tokens) {
    Terms out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
}

Terms preprocess(std::string_view text, const PipelineConfig& cfg, const Vocabulary& vocabulary) {
    TokenList tokens = remove_stop_words(tokenize(normalize(text, cfg.punctuation)), cfg.stop_list);
    if (cfg.stemming_enabled) tokens = stem_tokens(tokens);
    return texts(expand_query(tokens, cfg.expansion, vocabulary));
}

Terms preprocess_stored(std::string_view text, const PipelineConfig& cfg) {
    PipelineConfig plain = cfg;
    plain.expansion.spell_correct = false;
    return preprocess(text, plain);
}

StopList parse_stop_list(std::istream& in) {
    StopList out;
    for_each_entry_line(in, [&](const std::string& line, std::size_t lineno) {
        const std::string word = normalize(line, PunctuationPolicy::keep_intra_word);
        if (word.empty() || word.find(' ') != std::string::npos)
            throw ParseError("stop-list entry must be a single word", lineno);
        out.insert(word);
    });
    return out;
}

StopList load_stop_list(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_stop_list(in);
}

SynonymTable parse_synonyms(std::istream& in) {
    SynonymTable out;
    for_each_entry_line(in, [&](const std::string& line, std::size_t lineno) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("expected word<TAB>synonyms", lineno);
        const std::string word = normalize(line.substr(0, tab), PunctuationPolicy::keep_intra_word);
        if (word.empty() || word.find(' ') != std::string::npos)
            throw ParseError("synonym key must be a single word", lineno);
        std::stringstream list(line.substr(tab + 1));
        std::string item;
        auto& syns = out[word];
        while (std::getline(list, item, ',')) {
            const std::string syn = normalize(item, PunctuationPolicy::keep_intra_word);
            if (syn.empty()) continue;
            if (syn.find(' ') != std::string::npos)
                throw ParseError("synonym '" + syn + "' must be a single word", lineno);
            if (syn != word) syns.insert(syn);
        }
    });
    return out;
}

SynonymTable load_synonyms(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_synonyms(in);
}

}  // namespace chatbot::text
