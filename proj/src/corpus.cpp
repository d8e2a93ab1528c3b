#include "finkario/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace finkario {

namespace {

std::string normalize_ws(const std::string& s) {
    std::string out;
    bool in_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out += ' ';
            in_space = false;
            out += static_cast<char>(c);
        }
    }
    return out;
}

std::string lower_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 32;
    return out;
}

bool starts_with_ci(const std::string& text, const std::string& prefix) {
    if (text.size() < prefix.size()) return false;
    return lower_ascii(text.substr(0, prefix.size())) == lower_ascii(prefix);
}

const std::regex kImageRe(R"(!\[[^\]]*\]\([^)]*\))");

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<Date> parse_any_date(const std::string& s) {
    std::string t = trim(s);
    if (auto d = Date::parse(t)) return d;
    if (auto d = Date::parse_compact(t)) return d;
    return std::nullopt;
}

// "Label: value" scan against a set of accepted labels.
std::optional<std::string> labeled_value(const std::string& line,
                                         std::initializer_list<const char*> labels) {
    auto colon = line.find(':');
    if (colon == std::string::npos) colon = line.find("：");
    if (colon == std::string::npos) return std::nullopt;
    std::string label = normalize_ws(trim(line.substr(0, colon)));
    for (const char* want : labels)
        if (lower_ascii(label) == lower_ascii(want)) {
            size_t vstart = colon + (line.compare(colon, 3, "：") == 0 ? 3 : 1);
            std::string v = trim(line.substr(vstart));
            if (!v.empty()) return v;
        }
    return std::nullopt;
}

} // namespace

IngestResult ingest_directory(const std::string& path) {
    std::error_code ec;
    if (!fs::is_directory(path, ec))
        throw IoError("not a readable directory: " + path);
    IngestResult result;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path, ec)) {
        if (!entry.is_regular_file()) continue;
        files.push_back(entry.path());
    }
    if (ec) throw IoError("cannot enumerate directory: " + path);
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.filename().string() < b.filename().string();
              });
    for (const auto& f : files) {
        std::string ext = f.extension().string();
        if (ext != ".md" && ext != ".txt") {
            ++result.skipped;
            continue;
        }
        std::ifstream in(f, std::ios::binary);
        if (!in) throw IoError("cannot read file: " + f.string());
        std::stringstream ss;
        ss << in.rdbuf();
        result.reports.push_back(RawReport{f.stem().string(), f.string(), ss.str()});
    }
    return result;
}

RefinedDoc refine(const RawReport& raw, const RefineOptions& opts) {
    if (raw.body.empty()) throw EmptyDocumentError("empty body: " + raw.doc_id);

    RefinedDoc doc;
    doc.doc_id = raw.doc_id;

    std::vector<std::string> lines;
    {
        std::istringstream in(raw.body);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
    }

    // Front-matter block: --- ... --- at the very top.
    size_t body_start = 0;
    if (!lines.empty() && trim(lines[0]) == "---") {
        for (size_t i = 1; i < lines.size(); ++i) {
            if (trim(lines[i]) == "---") {
                body_start = i + 1;
                break;
            }
            if (auto v = labeled_value(lines[i], {"ticker", "stock ticker"}))
                doc.ticker = *v;
            if (auto v = labeled_value(lines[i], {"institution", "research institution"}))
                doc.institution = *v;
            if (auto v = labeled_value(lines[i], {"date", "publish_date", "publish date"}))
                doc.publish_date = parse_any_date(*v);
        }
        if (body_start == 0) body_start = lines.size(); // unterminated front matter
    }

    // Labeled-field scan over the first 40 lines as fallback.
    for (size_t i = body_start; i < lines.size() && i < body_start + 40; ++i) {
        if (!doc.ticker)
            if (auto v = labeled_value(lines[i], {"ticker", "stock ticker"})) doc.ticker = *v;
        if (!doc.institution)
            if (auto v = labeled_value(lines[i], {"institution", "research institution"}))
                doc.institution = *v;
        if (!doc.publish_date)
            if (auto v = labeled_value(lines[i], {"date", "publish_date", "publish date"}))
                doc.publish_date = parse_any_date(*v);
    }
    if (!doc.publish_date) {
        // filename pattern YYYYMMDD
        std::smatch m;
        static const std::regex digits8(R"((\d{8}))");
        if (std::regex_search(raw.doc_id, m, digits8))
            doc.publish_date = Date::parse_compact(m[1].str());
    }

    // Sectioning: '#'-headings delimit sections, blank lines delimit paragraphs.
    struct Sect {
        std::string heading;
        std::vector<std::string> paragraphs;
    };
    std::vector<Sect> sects;
    sects.push_back({});
    std::string para;
    auto flush_para = [&] {
        std::string p = trim(para);
        para.clear();
        if (!p.empty()) sects.back().paragraphs.push_back(p);
    };
    for (size_t i = body_start; i < lines.size(); ++i) {
        std::string line = std::regex_replace(lines[i], kImageRe, "");
        std::string t = trim(line);
        if (!t.empty() && t[0] == '#') {
            flush_para();
            size_t h = t.find_first_not_of('#');
            sects.push_back({h == std::string::npos ? "" : trim(t.substr(h)), {}});
            continue;
        }
        if (t.empty()) {
            flush_para();
            continue;
        }
        if (!para.empty()) para += '\n';
        para += t;
    }
    flush_para();

    // Disclaimer and duplicate-paragraph filtering across the whole document.
    std::set<std::string> seen;
    for (auto& s : sects) {
        std::vector<std::string> kept;
        for (auto& p : s.paragraphs) {
            std::string norm = normalize_ws(p);
            bool drop = false;
            for (const auto& prefix : opts.disclaimer_prefixes)
                if (starts_with_ci(norm, prefix)) {
                    drop = true;
                    break;
                }
            if (!drop && !seen.insert(norm).second) drop = true; // duplicate
            if (!drop) kept.push_back(p);
        }
        s.paragraphs = std::move(kept);
    }

    for (const auto& s : sects) {
        if (s.paragraphs.empty() && s.heading.empty()) continue;
        if (s.paragraphs.empty()) continue;
        std::string text;
        for (size_t i = 0; i < s.paragraphs.size(); ++i) {
            if (i) text += "\n\n";
            text += s.paragraphs[i];
        }
        doc.sections.emplace_back(s.heading, text);
    }
    if (doc.sections.empty())
        throw EmptyDocumentError("nothing informative left: " + raw.doc_id);

    for (size_t i = 0; i < doc.sections.size(); ++i) {
        if (i) doc.body_text += "\n\n";
        if (!doc.sections[i].first.empty())
            doc.body_text += "## " + doc.sections[i].first + "\n\n";
        doc.body_text += doc.sections[i].second;
    }
    return doc;
}

std::string RefinedDoc::to_json_line() const {
    nlohmann::json j;
    j["doc_id"] = doc_id;
    j["ticker"] = ticker ? nlohmann::json(*ticker) : nlohmann::json(nullptr);
    j["institution"] = institution ? nlohmann::json(*institution) : nlohmann::json(nullptr);
    j["publish_date"] =
        publish_date ? nlohmann::json(publish_date->to_string()) : nlohmann::json(nullptr);
    nlohmann::json secs = nlohmann::json::array();
    for (const auto& [h, t] : sections) secs.push_back({{"heading", h}, {"text", t}});
    j["sections"] = secs;
    j["body_text"] = body_text;
    return j.dump();
}

RefinedDoc RefinedDoc::from_json_line(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    RefinedDoc doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    if (!j.at("ticker").is_null()) doc.ticker = j["ticker"].get<std::string>();
    if (!j.at("institution").is_null()) doc.institution = j["institution"].get<std::string>();
    if (!j.at("publish_date").is_null())
        doc.publish_date = Date::parse(j["publish_date"].get<std::string>());
    for (const auto& s : j.at("sections"))
        doc.sections.emplace_back(s.at("heading").get<std::string>(),
                                  s.at("text").get<std::string>());
    doc.body_text = j.at("body_text").get<std::string>();
    return doc;
}

} // namespace finkario
