#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include "chatbot/error.hpp"
#include "chatbot/text.hpp"
#include "chatbot/utf8.hpp"

using namespace chatbot;
using namespace chatbot::text;

namespace {

Terms words(const TokenList& t) { return texts(t); }

TokenList toks(std::initializer_list<const char*> ws) {
    TokenList out;
    std::size_t i = 0;
    for (const char* w : ws) out.push_back(Token{w, i++});
    return out;
}

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> pieces = {
        "a", "B", "z", "Q", "e", " ", "  ", "\t", "\n", ",", ".", "!", "?", "'", "-", "_", "0", "7",
        "\xc3\x89",          // É
        "\xc3\xa9",          // é
        "\xc3\x9f",          // ß
        "\xc5\x81",          // Ł
        "\xce\xa9",          // Ω
        "\xe4\xb8\xad",      // 中
        "\xf0\x9f\x98\x80",  // emoji
        "\xff",              // malformed
        "\xc3",              // truncated
        "\xe2\x80\x94",      // dash punctuation
        "\xc2\xa0",          // no-break space
    };
    std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, pieces.size() - 1);
    std::string out;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) out += pieces[pick(rng)];
    return out;
}

}  // namespace

TEST_CASE("normalize lowercases and strips punctuation") {
    CHECK(normalize("Hello,   WORLD!") == "hello world");
    CHECK(normalize("") == "");
    CHECK(normalize("Where do you want to go?") == "where do you want to go");
    CHECK(normalize("  \t padded \n ") == "padded");
    CHECK(normalize("I'm fine") == "i m fine");
    CHECK(normalize("\xc3\x89T\xc3\x89") == "\xc3\xa9t\xc3\xa9");
    CHECK(normalize("\xce\xa9mega") == "\xce\xa9mega");  // outside the mapped range, untouched
}

TEST_CASE("keep-intra-word keeps apostrophes and hyphens inside words") {
    const auto p = PunctuationPolicy::keep_intra_word;
    CHECK(normalize("I'm a well-known cab", p) == "i'm a well-known cab");
    CHECK(normalize("'quoted' -dash-", p) == "quoted dash");
    CHECK(normalize("rock--roll", p) == "rock roll");
}

TEST_CASE("normalize is idempotent") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const std::string s = random_text(rng, 40);
        for (auto policy : {PunctuationPolicy::strip, PunctuationPolicy::keep_intra_word}) {
            const std::string once = normalize(s, policy);
            CHECK(normalize(once, policy) == once);
            CHECK(once.find("  ") == std::string::npos);
        }
    }
}

TEST_CASE("tokenize splits normalized text") {
    CHECK(words(tokenize("where do you want to go")) == Terms{"where", "do", "you", "want", "to", "go"});
    CHECK(tokenize("").empty());
    const auto t = tokenize("cab to heathrow");
    REQUIRE(t.size() == 3);
    CHECK(t[2] == Token{"heathrow", 2});
}

TEST_CASE("remove_stop_words") {
    const StopList stop{"the", "on", "a", "of"};
    CHECK(words(remove_stop_words(toks({"the", "cat", "sat", "on", "the", "mat"}), stop)) ==
          Terms{"cat", "sat", "mat"});
    CHECK(remove_stop_words({}, stop).empty());
    CHECK(remove_stop_words(toks({"the", "of"}), stop).empty());
}

TEST_CASE("remove_stop_words is idempotent and order-preserving") {
    std::mt19937_64 rng(5);
    const StopList stop{"a", "z", "e"};
    for (int i = 0; i < 500; ++i) {
        const auto tokens = tokenize(normalize(random_text(rng, 30)));
        const auto once = remove_stop_words(tokens, stop);
        CHECK(once.size() <= tokens.size());
        CHECK(remove_stop_words(once, stop) == once);
        std::size_t j = 0;
        for (const auto& t : tokens)
            if (j < once.size() && once[j].text == t.text) ++j;
        CHECK(j == once.size());
    }
}

TEST_CASE("Porter stemmer examples") {
    CHECK(stem("caresses") == "caress");
    CHECK(stem("running") == "run");
    CHECK(stem("cat") == "cat");
    CHECK(stem("ponies") == "poni");
    CHECK(stem("relational") == "relat");
    CHECK(stem("is") == "is");
    CHECK(stem("") == "");
    CHECK(stem("spoken") == "spoken");
    CHECK(stem("spoke") == "spoke");
}

TEST_CASE("Porter stemmer matches the reference vocabulary") {
    std::ifstream in(std::string(CHATBOT_TEST_DATA) + "/porter_vocabulary.tsv");
    REQUIRE(in);
    std::string line;
    std::size_t checked = 0, wrong = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        const std::string word = line.substr(0, tab), expected = line.substr(tab + 1);
        ++checked;
        if (stem(word) != expected) {
            ++wrong;
            MESSAGE(word << " -> " << stem(word) << ", expected " << expected);
        }
    }
    CHECK(checked > 2000);
    CHECK(wrong == 0);
}

TEST_CASE("stem is pure and non-empty") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> letter('a', 'z'), len(1, 14);
    for (int i = 0; i < 3000; ++i) {
        std::string w;
        for (int j = 0, n = len(rng); j < n; ++j) w += static_cast<char>(letter(rng));
        const std::string s = stem(w);
        CHECK(!s.empty());
        CHECK(stem(w) == s);
        CHECK(s.size() <= w.size());
    }
}

TEST_CASE("ngrams") {
    const auto t = toks({"where", "do", "you", "want", "to", "go"});
    const auto bi = ngrams(t, 2);
    REQUIRE(bi.size() == 5);
    CHECK(bi[0].joined() == "where do");
    CHECK(bi[1].joined() == "do you");
    CHECK(bi[2].joined() == "you want");
    CHECK(bi[3].joined() == "want to");
    CHECK(bi[4].joined() == "to go");
    CHECK(ngrams(t, 1).size() == 6);
    CHECK(ngrams(t, 7).empty());
    CHECK_THROWS_AS(ngrams(t, 0), InvalidArgument);
}

TEST_CASE("ngram count law") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto t = tokenize(normalize(random_text(rng, 30)));
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto g = ngrams(t, n);
            const std::size_t expected = t.size() >= n ? t.size() - n + 1 : 0;
            CHECK(g.size() == expected);
            for (const auto& x : g) CHECK(x.n() == n);
        }
    }
}

TEST_CASE("edit distance") {
    CHECK(edit_distance("heathro", "heathrow") == 1);
    CHECK(edit_distance("heathro", "hello") == 4);
    CHECK(edit_distance("heathro", "price") == 7);
    CHECK(edit_distance("", "abc") == 3);
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("\xc3\xa9t\xc3\xa9", "ete") == 2);
}

TEST_CASE("expand_query") {
    const Vocabulary vocab{"heathrow", "hello", "price"};
    ExpansionConfig cfg;
    cfg.enabled = true;
    cfg.spell_correct = true;
    CHECK(words(expand_query(toks({"heathro"}), cfg, vocab)) == Terms{"heathrow"});

    ExpansionConfig syn;
    syn.enabled = true;
    syn.synonyms = {{"cab", {"taxi"}}};
    CHECK(words(expand_query(toks({"cab"}), syn, {})) == Terms{"cab", "taxi"});

    ExpansionConfig off;
    off.synonyms = {{"cab", {"taxi"}}};
    off.spell_correct = true;
    const auto in = toks({"cab", "heathro"});
    CHECK(expand_query(in, off, vocab) == in);
}

TEST_CASE("spell correction leaves ties and distant words alone") {
    ExpansionConfig cfg;
    cfg.enabled = true;
    cfg.spell_correct = true;
    CHECK(words(expand_query(toks({"cat"}), cfg, Vocabulary{"bat", "hat"})) == Terms{"cat"});
    CHECK(words(expand_query(toks({"zzzzzz"}), cfg, Vocabulary{"price"})) == Terms{"zzzzzz"});
    cfg.max_edit_distance = 0;
    CHECK(words(expand_query(toks({"heathro"}), cfg, Vocabulary{"heathrow"})) == Terms{"heathro"});
}

TEST_CASE("expansion disabled is the identity") {
    std::mt19937_64 rng(21);
    ExpansionConfig cfg;
    cfg.synonyms = {{"a", {"b"}}};
    cfg.spell_correct = true;
    for (int i = 0; i < 300; ++i) {
        const auto t = tokenize(normalize(random_text(rng, 20)));
        CHECK(expand_query(t, cfg, Vocabulary{"q", "zz"}) == t);
    }
}

TEST_CASE("config validation") {
    ExpansionConfig e;
    e.max_edit_distance = 4;
    CHECK_THROWS_AS(e.validate(), InvalidArgument);
    e.max_edit_distance = 2;
    e.synonyms = {{"Cab", {"taxi"}}};
    CHECK_THROWS_AS(e.validate(), InvalidArgument);

    PipelineConfig p;
    p.stop_list = {"The"};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.stop_list = {"two words"};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.stop_list = {"the"};
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("preprocess examples") {
    PipelineConfig cfg;
    cfg.stop_list = {"the", "are"};
    CHECK(preprocess("The cats are running!", cfg) == Terms{"cat", "run"});
    CHECK(preprocess("", cfg).empty());

    PipelineConfig plain;
    plain.stemming_enabled = false;
    CHECK(preprocess("Good morning, how are you?", plain) == Terms{"good", "morning", "how", "are", "you"});
}

TEST_CASE("preprocess equals the composition of its stages") {
    std::mt19937_64 rng(77);
    PipelineConfig cfg;
    cfg.stop_list = {"a", "e", "the"};
    cfg.expansion.enabled = true;
    cfg.expansion.spell_correct = true;
    cfg.expansion.synonyms = {{"b", {"bee"}}, {"z", {"zed", "zee"}}};
    const Vocabulary vocab{"ab", "bz", "qqq", "zed"};
    for (int i = 0; i < 1000; ++i) {
        const std::string s = random_text(rng, 30);
        for (bool stemming : {true, false}) {
            cfg.stemming_enabled = stemming;
            auto t = remove_stop_words(tokenize(normalize(s, cfg.punctuation)), cfg.stop_list);
            if (stemming) t = stem_tokens(t);
            const Terms composed = texts(expand_query(t, cfg.expansion, vocab));
            CHECK(preprocess(s, cfg, vocab) == composed);
            CHECK(preprocess(s, cfg, vocab) == preprocess(s, cfg, vocab));
        }
    }
}

TEST_CASE("stop list and synonym files") {
    std::istringstream stop("# comment\nthe\n  Of \n\n");
    CHECK(parse_stop_list(stop) == StopList{"of", "the"});

    std::istringstream bad("two words\n");
    CHECK_THROWS_AS(parse_stop_list(bad), ParseError);

    std::istringstream syn("# x\ncab\ttaxi, minicab\nprice\tfare\n");
    const auto table = parse_synonyms(syn);
    REQUIRE(table.size() == 2);
    CHECK(table.at("cab") == std::set<std::string>{"minicab", "taxi"});

    std::istringstream notab("cab taxi\n");
    CHECK_THROWS_AS(parse_synonyms(notab), ParseError);

    const auto shipped = load_stop_list(std::string(CHATBOT_REPO_DATA) + "/stop_words_en.txt");
    CHECK(shipped.size() >= 100);
    CHECK(shipped.contains("the"));
    CHECK(shipped.contains("of"));
    CHECK(shipped.contains("a"));
    CHECK_THROWS(load_stop_list("/nonexistent/stop.txt"));
}

TEST_CASE("utf8 helpers") {
    CHECK(utf8::length("") == 0);
    CHECK(utf8::length("abc") == 3);
    CHECK(utf8::length("\xc3\xa9\xe4\xb8\xad\xf0\x9f\x98\x80") == 3);
    CHECK(utf8::length("\xff\xfe") == 2);
    CHECK(utf8::encode(utf8::decode("h\xc3\xa9llo")) == "h\xc3\xa9llo");
    CHECK(utf8::decode("\xff")[0] == utf8::kReplacement);
}

TEST_CASE("stored text expands synonyms but is never spell-corrected") {
    PipelineConfig cfg;
    cfg.expansion.enabled = true;
    cfg.expansion.spell_correct = true;
    cfg.expansion.synonyms = {{"cab", {"taxi"}}};
    CHECK(preprocess_stored("cab to heathro", cfg) == Terms{"cab", "taxi", "to", "heathro"});
    CHECK(preprocess("cab to heathro", cfg, Vocabulary{"heathrow", "to", "cab", "taxi"}) ==
          Terms{"cab", "taxi", "to", "heathrow"});
}
