#pragma once

#include "finkario/corpus.hpp"
#include "finkario/graph.hpp"
#include "finkario/providers.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace finkario {

struct AliasTable {
    // canonical label -> aliases
    std::map<std::string, std::set<std::string>> canonical;
    // suffixes stripped before a second table lookup
    std::vector<std::string> suffix_rules;

    static AliasTable from_json(const std::string& text);
    std::string to_json() const;

    // Throws ConfigError on ambiguous aliases or canonicals that are aliases.
    void validate() const;

    // Canonical form of a label, or the label itself when nothing applies.
    std::string resolve(const std::string& label) const;
};

struct RefinementReport {
    int normalized_count = 0;
    int completed_count = 0;
    int corrected_count = 0;
    std::vector<std::pair<std::string, std::string>> unresolved; // (triple text, reason)

    void merge(const RefinementReport& other);
    std::string to_json() const;
};

struct RefinementOptions {
    std::set<std::string> numeric_relations = {"Current Stock Price",
                                               "Market Capitalization", "Target Price"};
    std::set<std::string> unit_lexicon = {"CNY", "USD",      "HKD",      "%",
                                          "billions", "millions", "亿", "万"};
    std::vector<std::string> placeholders = {"No relevant information was found",
                                             "Extraction error"};
    size_t refeed_max_chars = 4000;
};

bool tail_has_unit(const std::string& tail, const RefinementOptions& opts);

// Step 1: entity normalization.
StockGraph normalize_entities(const StockGraph& g, const AliasTable& aliases,
                              RefinementReport* report = nullptr);

// Step 2: numeric attribute completion via reference data.
std::pair<StockGraph, RefinementReport> complete_attributes(
    const StockGraph& g, ReferenceData& refdata, const RefinementOptions& opts = {});

// Step 3: placeholder correction via the chat provider; the corpus supplies
// the source passage to re-feed.
std::pair<StockGraph, RefinementReport> correct_errors(
    const StockGraph& g, ChatProvider& chat, const std::vector<RefinedDoc>& corpus,
    const RefinementOptions& opts = {});

// All three steps in order, reports merged.
std::pair<StockGraph, RefinementReport> refine_graph(
    const StockGraph& g, const AliasTable& aliases, ReferenceData& refdata,
    ChatProvider& chat, const std::vector<RefinedDoc>& corpus,
    const RefinementOptions& opts = {});

// Prompt used for the step-3 re-feed (exposed for scripted fixtures).
std::string correction_prompt(const AttributeTriple& t, const std::string& passage);
std::string correction_prompt(const EventRecord& e, const std::string& passage);

} // namespace finkario
