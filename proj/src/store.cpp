#include "chatbot/store.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <zlib.h>

#include "chatbot/error.hpp"

namespace chatbot::store {
namespace {

std::uint32_t checksum(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    constexpr std::size_t kChunk = 1u << 30;
    for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
        const std::size_t n = std::min(kChunk, bytes.size() - off);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
    }
    return static_cast<std::uint32_t>(crc);
}

void put_field(std::string& out, std::string_view s) {
    out += std::to_string(s.size());
    out += ':';
    out += s;
}

// Sequential reader over the record body.
class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    bool done() const { return pos_ >= s_.size(); }

    char tag() {
        need(1);
        return s_[pos_++];
    }

    void expect(char c) {
        need(1);
        if (s_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::uint64_t number() {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc{} || p == s_.data() + pos_) fail("expected a number");
        pos_ = static_cast<std::size_t>(p - s_.data());
        return v;
    }

    std::optional<std::uint64_t> optional_number() {
        need(1);
        if (s_[pos_] == '-') {
            ++pos_;
            return std::nullopt;
        }
        return number();
    }

    std::string field() {
        const std::uint64_t len = number();
        expect(':');
        if (len > s_.size() - pos_) fail("field runs past end of body");
        std::string out(s_.substr(pos_, len));
        pos_ += len;
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw LoadError("store body offset " + std::to_string(pos_) + ": " + what);
    }

private:
    void need(std::size_t n) const {
        if (s_.size() - pos_ < n) fail("unexpected end of body");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

KnowledgeStore::KnowledgeStore(text::PipelineConfig pipeline) : pipeline_(std::move(pipeline)) {}

std::optional<StatementId> KnowledgeStore::find(std::string_view text) const {
    auto it = by_text_.find(std::string(text));
    if (it == by_text_.end()) return std::nullopt;
    return it->second;
}

StatementId KnowledgeStore::intern(const std::string& text, std::span<const std::string> tags) {
    if (auto it = by_text_.find(text); it != by_text_.end()) {
        auto& s = statements_[it->second];
        ++s.occurrence;
        s.tags.insert(tags.begin(), tags.end());
        return s.id;
    }
    Statement s;
    s.id = statements_.size();
    s.text = text;
    s.terms = text::preprocess_stored(text, pipeline_);
    s.tags.insert(tags.begin(), tags.end());
    by_text_.emplace(text, s.id);
    statements_.push_back(std::move(s));
    return statements_.back().id;
}

void KnowledgeStore::add_exchange(StatementId prompt, StatementId response, std::uint64_t occurrence) {
    auto& r = statements_[response];
    if (!r.in_response_to) r.in_response_to = prompt;
    if (auto it = by_pair_.find({prompt, response}); it != by_pair_.end()) {
        exchanges_[it->second].occurrence += occurrence;
        return;
    }
    by_pair_.emplace(std::make_pair(prompt, response), exchanges_.size());
    by_prompt_[prompt].push_back(exchanges_.size());
    exchanges_.push_back(Exchange{prompt, response, occurrence});
}

std::size_t KnowledgeStore::train_list(std::span<const std::string> utterances,
                                       std::span<const std::string> tags) {
    if (utterances.size() < 2)
        throw InvalidArgument("list training needs at least two statements to form an exchange");
    StatementId previous = intern(utterances[0], tags);
    for (std::size_t i = 1; i < utterances.size(); ++i) {
        const StatementId current = intern(utterances[i], tags);
        add_exchange(previous, current, 1);
        previous = current;
    }
    return utterances.size() - 1;
}

std::size_t KnowledgeStore::ingest(const CorpusFile& corpus) {
    for (std::size_t i = 0; i < corpus.conversations.size(); ++i)
        if (corpus.conversations[i].size() < 2)
            throw ParseError("a conversation needs at least two utterances", std::nullopt, i);
    std::size_t added = 0;
    for (const auto& conversation : corpus.conversations)
        added += train_list(conversation, corpus.categories);
    return added;
}

std::size_t KnowledgeStore::ingest_corpus(std::string_view contents) {
    return ingest(parse_corpus(contents));
}

std::vector<Response> KnowledgeStore::responses_to(std::string_view text) const {
    std::vector<Response> out;
    const auto id = find(text);
    if (!id) return out;
    for (const Exchange* e : exchanges_from(*id))
        out.push_back(Response{statements_[e->response_id], e->occurrence});
    return out;
}

std::vector<StatementId> KnowledgeStore::prompts() const {
    std::vector<StatementId> out;
    out.reserve(by_prompt_.size());
    for (const auto& s : statements_)
        if (by_prompt_.contains(s.id)) out.push_back(s.id);
    return out;
}

std::vector<const Exchange*> KnowledgeStore::exchanges_from(StatementId prompt) const {
    std::vector<const Exchange*> out;
    if (auto it = by_prompt_.find(prompt); it != by_prompt_.end())
        for (std::size_t idx : it->second) out.push_back(&exchanges_[idx]);
    return out;
}

void KnowledgeStore::reindex(text::PipelineConfig pipeline) {
    pipeline_ = std::move(pipeline);
    for (auto& s : statements_) s.terms = text::preprocess_stored(s.text, pipeline_);
}

void KnowledgeStore::check_integrity() const {
    for (std::size_t i = 0; i < statements_.size(); ++i) {
        const auto& s = statements_[i];
        if (s.id != i) throw std::logic_error("statement ids are not dense");
        if (s.occurrence < 1) throw std::logic_error("statement with zero occurrence");
        if (s.in_response_to && *s.in_response_to >= statements_.size())
            throw std::logic_error("statement responds to a missing prompt");
        auto it = by_text_.find(s.text);
        if (it == by_text_.end() || it->second != s.id)
            throw std::logic_error("text index out of sync");
    }
    if (by_text_.size() != statements_.size()) throw std::logic_error("duplicate statement text");
    std::set<std::pair<StatementId, StatementId>> seen;
    for (const auto& e : exchanges_) {
        if (e.prompt_id >= statements_.size() || e.response_id >= statements_.size())
            throw std::logic_error("exchange references a missing statement");
        if (e.occurrence < 1) throw std::logic_error("exchange with zero occurrence");
        if (!seen.insert({e.prompt_id, e.response_id}).second)
            throw std::logic_error("duplicate exchange");
    }
}

bool KnowledgeStore::operator==(const KnowledgeStore& other) const {
    return statements_ == other.statements_ && exchanges_ == other.exchanges_;
}

void KnowledgeStore::rebuild_indexes() {
    by_text_.clear();
    by_pair_.clear();
    by_prompt_.clear();
    for (const auto& s : statements_) by_text_.emplace(s.text, s.id);
    for (std::size_t i = 0; i < exchanges_.size(); ++i) {
        const auto& e = exchanges_[i];
        by_pair_.emplace(std::make_pair(e.prompt_id, e.response_id), i);
        by_prompt_[e.prompt_id].push_back(i);
    }
}

// Layout:
//   CHATBOT-STORE <version> <crc32 hex> <body length>\n
//   S <id> <occurrence> <in_response_to|-> <len>:<text> <ntags>[ <len>:<tag>]...\n
//   E <prompt> <response> <occurrence>\n
std::string KnowledgeStore::serialize() const {
    std::string body;
    for (const auto& s : statements_) {
        body += "S ";
        body += std::to_string(s.id) + ' ' + std::to_string(s.occurrence) + ' ';
        body += s.in_response_to ? std::to_string(*s.in_response_to) : std::string("-");
        body += ' ';
        put_field(body, s.text);
        body += ' ' + std::to_string(s.tags.size());
        for (const auto& t : s.tags) {
            body += ' ';
            put_field(body, t);
        }
        body += '\n';
    }
    for (const auto& e : exchanges_) {
        body += "E " + std::to_string(e.prompt_id) + ' ' + std::to_string(e.response_id) + ' ' +
                std::to_string(e.occurrence) + '\n';
    }
    char crc[9];
    std::snprintf(crc, sizeof crc, "%08x", checksum(body));
    std::string out(kMagic);
    out += ' ' + std::to_string(kFormatVersion) + ' ' + crc + ' ' + std::to_string(body.size()) + '\n';
    return out + body;
}

KnowledgeStore KnowledgeStore::deserialize(std::string_view bytes, text::PipelineConfig pipeline) {
    const auto eol = bytes.find('\n');
    if (eol == std::string_view::npos) throw LoadError("missing store header");
    std::istringstream header{std::string(bytes.substr(0, eol))};
    std::string magic, crc_hex;
    int version = 0;
    std::size_t length = 0;
    if (!(header >> magic >> version >> crc_hex >> length) || magic != kMagic)
        throw LoadError("not a knowledge store file");
    if (version != kFormatVersion)
        throw LoadError("unsupported store format version " + std::to_string(version));
    const std::string_view body = bytes.substr(eol + 1);
    if (body.size() != length)
        throw LoadError("store body is " + std::to_string(body.size()) + " bytes, header says " +
                        std::to_string(length));
    std::uint32_t expected = 0;
    auto [p, ec] = std::from_chars(crc_hex.data(), crc_hex.data() + crc_hex.size(), expected, 16);
    if (ec != std::errc{} || p != crc_hex.data() + crc_hex.size() || crc_hex.size() != 8)
        throw LoadError("malformed store checksum");
    if (checksum(body) != expected) throw LoadError("store checksum mismatch");

    KnowledgeStore out(std::move(pipeline));
    Reader r(body);
    while (!r.done()) {
        const char tag = r.tag();
        r.expect(' ');
        if (tag == 'S') {
            if (!out.exchanges_.empty()) r.fail("statement record after exchanges");
            Statement s;
            s.id = r.number();
            if (s.id != out.statements_.size()) r.fail("statement ids must be dense and ordered");
            r.expect(' ');
            s.occurrence = r.number();
            r.expect(' ');
            s.in_response_to = r.optional_number();
            r.expect(' ');
            s.text = r.field();
            r.expect(' ');
            const std::uint64_t ntags = r.number();
            for (std::uint64_t i = 0; i < ntags; ++i) {
                r.expect(' ');
                s.tags.insert(r.field());
            }
            r.expect('\n');
            s.terms = text::preprocess_stored(s.text, out.pipeline_);
            out.statements_.push_back(std::move(s));
        } else if (tag == 'E') {
            Exchange e;
            e.prompt_id = r.number();
            r.expect(' ');
            e.response_id = r.number();
            r.expect(' ');
            e.occurrence = r.number();
            r.expect('\n');
            out.exchanges_.push_back(e);
        } else {
            r.fail(std::string("unknown record type '") + tag + "'");
        }
    }
    out.rebuild_indexes();
    try {
        out.check_integrity();
    } catch (const std::logic_error& e) {
        throw LoadError(std::string("inconsistent store: ") + e.what());
    }
    return out;
}

void KnowledgeStore::save(const std::filesystem::path& path) const {
    const std::string bytes = serialize();
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

KnowledgeStore KnowledgeStore::load(const std::filesystem::path& path, text::PipelineConfig pipeline) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open store " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw LoadError("cannot read store " + path.string());
    return deserialize(ss.str(), std::move(pipeline));
}

}  // namespace chatbot::store
