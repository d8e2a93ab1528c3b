#pragma once

#include "finkario/date.hpp"
#include "finkario/errors.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace finkario {

// Stable 64-bit FNV-1a, used wherever a hash must survive across processes.
std::uint64_t stable_hash(std::string_view s);

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    int max_reply_chars = 4096;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string chat_complete(const ChatRequest& req) = 0;
};

// Fixture-backed provider: replies keyed by stable_hash(user_text).
class ScriptedChatProvider : public ChatProvider {
public:
    explicit ScriptedChatProvider(std::map<std::uint64_t, std::string> fixtures)
        : fixtures_(std::move(fixtures)) {}

    void add_fixture(const std::string& user_text, std::string reply) {
        fixtures_[stable_hash(user_text)] = std::move(reply);
    }
    static ScriptedChatProvider empty() { return ScriptedChatProvider({}); }

    std::string chat_complete(const ChatRequest& req) override;

private:
    std::map<std::uint64_t, std::string> fixtures_;
};

// Scripted provider with a single default reply for any prompt.
class ConstantChatProvider : public ChatProvider {
public:
    explicit ConstantChatProvider(std::string reply) : reply_(std::move(reply)) {}
    std::string chat_complete(const ChatRequest&) override { return reply_; }

private:
    std::string reply_;
};

// HTTP chat provider configured from FINKARIO_CHAT_URL / FINKARIO_CHAT_KEY.
// 3 attempts, exponential backoff starting at 1s.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(std::string url, std::string api_key)
        : url_(std::move(url)), api_key_(std::move(api_key)) {}
    static std::unique_ptr<HttpChatProvider> from_env();

    std::string chat_complete(const ChatRequest& req) override;

private:
    std::string url_;
    std::string api_key_;
};

struct EmbeddingRequest {
    std::vector<std::string> texts;
    int dimension = 256;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<std::vector<float>> embed(const EmbeddingRequest& req) = 0;
    virtual int dimension() const = 0;
};

// Deterministic offline embedder: feature-hashed token counts, signed by a
// second hash, projected into `dimension` buckets and L2-normalized.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(int dimension = 256);

    std::vector<std::vector<float>> embed(const EmbeddingRequest& req) override;
    int dimension() const override { return dimension_; }

    std::vector<float> embed_one(const std::string& text) const;

private:
    int dimension_;
};

struct ReferenceLookup {
    std::string ticker;
    std::string field_name;
    Date as_of;
};

struct ReferenceValue {
    double value = 0.0;
    std::string unit;
    Date as_of;
};

class ReferenceData {
public:
    virtual ~ReferenceData() = default;
    // Throws NotFoundError when no row matches (ticker, field, date <= as_of).
    virtual ReferenceValue lookup_reference(const ReferenceLookup& q) = 0;
};

// CSV-backed fixture table: header `ticker,field,value,unit,as_of`.
// Resolution picks the latest row with date <= as_of.
class CsvReferenceData : public ReferenceData {
public:
    static CsvReferenceData from_file(const std::string& path);
    static CsvReferenceData from_text(const std::string& csv_text);

    ReferenceValue lookup_reference(const ReferenceLookup& q) override;

private:
    struct Row {
        double value;
        std::string unit;
        Date as_of;
    };
    // (ticker, field) -> rows sorted by date ascending
    std::map<std::pair<std::string, std::string>, std::vector<Row>> rows_;
};

} // namespace finkario
