#include "finkario/providers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace finkario {

std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string ScriptedChatProvider::chat_complete(const ChatRequest& req) {
    if (req.user_text.empty()) throw std::invalid_argument("chat: user_text empty");
    auto it = fixtures_.find(stable_hash(req.user_text));
    if (it == fixtures_.end())
        throw ProviderError("scripted chat: no fixture for prompt", 1);
    std::string reply = it->second;
    if (req.max_reply_chars > 0 && reply.size() > static_cast<size_t>(req.max_reply_chars))
        reply.resize(req.max_reply_chars);
    return reply;
}

std::unique_ptr<HttpChatProvider> HttpChatProvider::from_env() {
    const char* url = std::getenv("FINKARIO_CHAT_URL");
    const char* key = std::getenv("FINKARIO_CHAT_KEY");
    if (!url || !*url) return nullptr;
    return std::make_unique<HttpChatProvider>(url, key ? key : "");
}

std::string HttpChatProvider::chat_complete(const ChatRequest& req) {
    if (req.user_text.empty()) throw std::invalid_argument("chat: user_text empty");
    nlohmann::json payload = {
        {"system", req.system_text},
        {"user", req.user_text},
        {"max_chars", req.max_reply_chars},
    };
    std::string host, path;
    {
        // split "http(s)://host[:port]" + path
        auto pos = url_.find("://");
        auto slash = url_.find('/', pos == std::string::npos ? 0 : pos + 3);
        host = slash == std::string::npos ? url_ : url_.substr(0, slash);
        path = slash == std::string::npos ? "/" : url_.substr(slash);
    }
    std::string last_err;
    for (int attempt = 1; attempt <= 3; ++attempt) {
        httplib::Client cli(host);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        auto res = cli.Post(path, headers, payload.dump(), "application/json");
        if (res && res->status == 200) {
            auto body = nlohmann::json::parse(res->body, nullptr, false);
            std::string reply;
            if (body.is_object() && body.contains("reply"))
                reply = body["reply"].get<std::string>();
            else
                reply = res->body;
            if (reply.empty()) throw ProviderError("chat: empty reply", attempt);
            return reply;
        }
        last_err = res ? "status " + std::to_string(res->status) : "transport failure";
        if (attempt < 3)
            std::this_thread::sleep_for(std::chrono::seconds(1 << (attempt - 1)));
    }
    throw ProviderError("chat: " + last_err, 3);
}

HashingEmbedder::HashingEmbedder(int dimension) : dimension_(dimension) {
    if (dimension <= 0) throw std::invalid_argument("embedder dimension must be positive");
}

std::vector<float> HashingEmbedder::embed_one(const std::string& text) const {
    std::vector<double> acc(dimension_, 0.0);
    auto add_token = [&](std::string_view tok) {
        std::uint64_t h = stable_hash(tok);
        // independent sign hash: re-hash with a salt
        std::uint64_t s = stable_hash(std::string(tok) + "\x01sign");
        int bucket = static_cast<int>(h % static_cast<std::uint64_t>(dimension_));
        acc[bucket] += (s & 1) ? 1.0 : -1.0;
    };
    size_t start = std::string::npos;
    size_t count = 0;
    auto is_sep = [](unsigned char c) {
        return std::isspace(c) || std::ispunct(c);
    };
    for (size_t i = 0; i <= text.size(); ++i) {
        bool sep = i == text.size() || is_sep(static_cast<unsigned char>(text[i]));
        if (!sep && start == std::string::npos) start = i;
        if (sep && start != std::string::npos) {
            add_token(std::string_view(text).substr(start, i - start));
            ++count;
            start = std::string::npos;
        }
    }
    if (count == 0) add_token(text); // punctuation-only input still embeds
    double norm2 = 0.0;
    for (double v : acc) norm2 += v * v;
    double norm = std::sqrt(norm2);
    if (norm == 0.0) {
        // all-zero after sign cancellation: fall back to the whole-string bucket
        std::fill(acc.begin(), acc.end(), 0.0);
        acc[stable_hash(text) % static_cast<std::uint64_t>(dimension_)] = 1.0;
        norm = 1.0;
    }
    std::vector<float> out(dimension_);
    for (int i = 0; i < dimension_; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

std::vector<std::vector<float>> HashingEmbedder::embed(const EmbeddingRequest& req) {
    if (req.texts.empty()) throw std::invalid_argument("embed: empty text list");
    if (req.dimension != dimension_)
        throw std::invalid_argument("embed: dimension mismatch");
    std::vector<std::vector<float>> out;
    out.reserve(req.texts.size());
    for (const auto& t : req.texts) {
        if (t.empty()) throw std::invalid_argument("embed: empty text");
        out.push_back(embed_one(t));
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

CsvReferenceData CsvReferenceData::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open reference data file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

CsvReferenceData CsvReferenceData::from_text(const std::string& csv_text) {
    CsvReferenceData out;
    std::istringstream in(csv_text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) { // header
            first = false;
            continue;
        }
        auto cols = split_csv_line(line);
        if (cols.size() != 5) throw ParseError("reference csv: bad row", line);
        auto date = Date::parse(cols[4]);
        if (!date) throw ParseError("reference csv: bad date", line);
        if (cols[3].empty()) throw ParseError("reference csv: empty unit", line);
        Row row{std::stod(cols[2]), cols[3], *date};
        out.rows_[{cols[0], cols[1]}].push_back(row);
    }
    for (auto& [key, rows] : out.rows_)
        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.as_of < b.as_of; });
    return out;
}

ReferenceValue CsvReferenceData::lookup_reference(const ReferenceLookup& q) {
    auto it = rows_.find({q.ticker, q.field_name});
    if (it == rows_.end())
        throw NotFoundError("no reference data for " + q.ticker + "/" + q.field_name);
    const Row* best = nullptr;
    for (const auto& row : it->second)
        if (row.as_of <= q.as_of) best = &row;
    if (!best)
        throw NotFoundError("no reference row at or before " + q.as_of.to_string());
    return ReferenceValue{best->value, best->unit, best->as_of};
}

} // namespace finkario
