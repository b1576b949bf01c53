#pragma once

// Morphological text pipeline: normalization, tokenization, stop-word
// removal, Porter stemming, n-grams and query expansion.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace chatbot::text {

struct Token {
    std::string text;
    std::size_t position = 0;

    bool operator==(const Token&) const = default;
};

using TokenList = std::vector<Token>;
using Terms = std::vector<std::string>;
using StopList = std::set<std::string, std::less<>>;
using SynonymTable = std::map<std::string, std::set<std::string>, std::less<>>;
using Vocabulary = std::set<std::string, std::less<>>;

enum class PunctuationPolicy {
    strip,            // every punctuation mark becomes a word separator
    keep_intra_word,  // apostrophes and hyphens between two word characters survive
};

struct ExpansionConfig {
    bool enabled = false;
    SynonymTable synonyms;
    bool spell_correct = false;
    int max_edit_distance = 2;

    /// Throws InvalidArgument if an invariant is broken.
    void validate() const;
};

struct PipelineConfig {
    StopList stop_list;
    bool stemming_enabled = true;
    ExpansionConfig expansion;
    PunctuationPolicy punctuation = PunctuationPolicy::strip;

    void validate() const;
};

struct NGram {
    std::vector<std::string> terms;

    std::size_t n() const { return terms.size(); }
    std::string joined() const;
    bool operator==(const NGram&) const = default;
};

/// Lowercases (ASCII and Latin letters), turns punctuation into separators
/// per `policy`, and collapses whitespace. Total and idempotent.
std::string normalize(std::string_view text,
                      PunctuationPolicy policy = PunctuationPolicy::strip);

TokenList tokenize(std::string_view normalized);

TokenList remove_stop_words(const TokenList& tokens, const StopList& stop_list);

/// Porter suffix-stripping stemmer. Words of length <= 2 and words holding
/// anything other than `a`-`z` are returned unchanged.
std::string stem(std::string_view word);

TokenList stem_tokens(const TokenList& tokens);

/// Contiguous windows of `n` tokens. Throws InvalidArgument when n == 0.
std::vector<NGram> ngrams(const TokenList& tokens, std::size_t n);

/// Levenshtein distance over Unicode scalar values.
std::size_t edit_distance(std::string_view a, std::string_view b);

TokenList expand_query(const TokenList& tokens, const ExpansionConfig& cfg,
                       const Vocabulary& vocabulary);

/// normalize -> tokenize -> remove_stop_words -> stem -> expand_query.
Terms preprocess(std::string_view text, const PipelineConfig& cfg,
                 const Vocabulary& vocabulary = {});

/// Pipeline for stored text: synonyms still expand, spelling is never corrected.
Terms preprocess_stored(std::string_view text, const PipelineConfig& cfg);

Terms texts(const TokenList& tokens);

// Plain-text resource files: UTF-8, `#` starts a comment line.
StopList parse_stop_list(std::istream& in);
StopList load_stop_list(const std::filesystem::path& path);
/// Lines of the form `word<TAB>syn1,syn2`.
SynonymTable parse_synonyms(std::istream& in);
SynonymTable load_synonyms(const std::filesystem::path& path);

}  // namespace chatbot::text
