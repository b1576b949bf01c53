// Porter (1980) suffix-stripping stemmer over lowercase ASCII words.

#include <array>
#include <string>
#include <string_view>

#include "chatbot/text.hpp"

namespace chatbot::text {
namespace {

class Word {
public:
    explicit Word(std::string_view w) : b_(w) {}

    const std::string& str() const { return b_; }

    bool consonant(std::size_t i) const {
        switch (b_[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 || !consonant(i - 1);
            default:
                return true;
        }
    }

    // m in [C](VC)^m[V], over the first `len` letters.
    int measure(std::size_t len) const {
        int m = 0;
        std::size_t i = 0;
        while (i < len && consonant(i)) ++i;
        while (i < len) {
            while (i < len && !consonant(i)) ++i;
            if (i >= len) break;
            while (i < len && consonant(i)) ++i;
            ++m;
        }
        return m;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i)
            if (!consonant(i)) return true;
        return false;
    }

    bool double_consonant(std::size_t len) const {
        return len >= 2 && b_[len - 1] == b_[len - 2] && consonant(len - 1);
    }

    // *o: stem ends consonant-vowel-consonant and the last is not w, x or y.
    bool cvc(std::size_t len) const {
        if (len < 3) return false;
        if (!consonant(len - 3) || consonant(len - 2) || !consonant(len - 1)) return false;
        const char c = b_[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends_with(std::string_view s) const { return b_.ends_with(s); }
    std::size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

    void replace_suffix(std::string_view suffix, std::string_view with) {
        b_.resize(stem_len(suffix));
        b_ += with;
    }

    std::size_t size() const { return b_.size(); }
    char back() const { return b_.back(); }
    void pop_back() { b_.pop_back(); }
    void append(std::string_view s) { b_ += s; }

private:
    std::string b_;
};

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// The longest matching suffix is selected first; its condition decides alone.
template <std::size_t N>
void apply_measure_rules(Word& w, const std::array<Rule, N>& rules, int min_measure) {
    const Rule* best = nullptr;
    for (const auto& r : rules)
        if (w.ends_with(r.suffix) && (!best || r.suffix.size() > best->suffix.size())) best = &r;
    if (best && w.measure(w.stem_len(best->suffix)) > min_measure)
        w.replace_suffix(best->suffix, best->replacement);
}

void step1a(Word& w) {
    if (w.ends_with("sses")) w.replace_suffix("sses", "ss");
    else if (w.ends_with("ies")) w.replace_suffix("ies", "i");
    else if (w.ends_with("ss")) return;
    else if (w.ends_with("s")) w.pop_back();
}

void step1b(Word& w) {
    if (w.ends_with("eed")) {
        if (w.measure(w.stem_len("eed")) > 0) w.pop_back();
        return;
    }
    std::string_view removed;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
        if (w.ends_with(suffix) && w.has_vowel(w.stem_len(suffix))) {
            removed = suffix;
            break;
        }
    }
    if (removed.empty()) return;
    w.replace_suffix(removed, "");

    if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
        w.append("e");
    } else if (w.double_consonant(w.size())) {
        const char c = w.back();
        if (c != 'l' && c != 's' && c != 'z') w.pop_back();
    } else if (w.measure(w.size()) == 1 && w.cvc(w.size())) {
        w.append("e");
    }
}

void step1c(Word& w) {
    if (w.ends_with("y") && w.has_vowel(w.size() - 1)) w.replace_suffix("y", "i");
}

void step2(Word& w) {
    static constexpr std::array<Rule, 20> rules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},  {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},    {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
    }};
    apply_measure_rules(w, rules, 0);
}

void step3(Word& w) {
    static constexpr std::array<Rule, 7> rules{{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    apply_measure_rules(w, rules, 0);
}

void step4(Word& w) {
    static constexpr std::array<std::string_view, 19> suffixes{
        "al",   "ance", "ence", "er",  "ic", "able", "ible", "ant", "ement", "ment",
        "ent",  "ion",  "ou",   "ism", "ate", "iti", "ous",  "ive", "ize",
    };
    std::string_view best;
    for (auto s : suffixes)
        if (w.ends_with(s) && s.size() > best.size()) best = s;
    if (best.empty()) return;
    const std::size_t len = w.stem_len(best);
    if (w.measure(len) <= 1) return;
    if (best == "ion") {
        const char c = len > 0 ? w.str()[len - 1] : '\0';
        if (c != 's' && c != 't') return;
    }
    w.replace_suffix(best, "");
}

void step5(Word& w) {
    if (w.ends_with("e")) {
        const std::size_t len = w.size() - 1;
        const int m = w.measure(len);
        if (m > 1 || (m == 1 && !w.cvc(len))) w.pop_back();
    }
    if (w.ends_with("ll") && w.measure(w.size() - 1) > 1) w.pop_back();
}

}  // namespace

std::string stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    for (char c : word)
        if (c < 'a' || c > 'z') return std::string(word);

    Word w(word);
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5(w);
    return w.str();
}

}  // namespace chatbot::text
