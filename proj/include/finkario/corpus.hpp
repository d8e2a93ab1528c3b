#pragma once

#include "finkario/date.hpp"
#include "finkario/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finkario {

struct RawReport {
    std::string doc_id;
    std::string source_path;
    std::string body;
};

struct RefinedDoc {
    std::string doc_id;
    std::optional<std::string> ticker;
    std::optional<std::string> institution;
    std::optional<Date> publish_date;
    std::vector<std::pair<std::string, std::string>> sections; // (heading, text)
    std::string body_text;

    std::string to_json_line() const;
    static RefinedDoc from_json_line(const std::string& line);
};

struct IngestResult {
    std::vector<RawReport> reports;
    int skipped = 0; // non-text files
};

struct RefineOptions {
    // Paragraphs starting with any of these (case-insensitive for Latin
    // script) are dropped.
    std::vector<std::string> disclaimer_prefixes = {
        "免责声明", "Disclaimer", "法律声明", "分析师声明"};
};

// One RawReport per .md/.txt file, sorted by filename; doc_id = stem.
IngestResult ingest_directory(const std::string& path);

// Strip images, disclaimer paragraphs and duplicated paragraphs; parse
// (ticker, institution, publish_date) metadata. Throws EmptyDocumentError
// when nothing informative remains.
RefinedDoc refine(const RawReport& raw, const RefineOptions& opts = {});

} // namespace finkario
