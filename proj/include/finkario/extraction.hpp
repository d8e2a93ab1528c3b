#pragma once

#include "finkario/corpus.hpp"
#include "finkario/graph.hpp"
#include "finkario/providers.hpp"
#include "finkario/schema.hpp"

#include <string>
#include <vector>

namespace finkario {

struct ExtractionBatch {
    std::string doc_id;
    std::vector<AttributeTriple> attribute_triples;
    std::vector<EventRecord> event_records;
    std::string extractor_id;
    int warnings = 0; // items dropped for being outside the schemas

    std::vector<std::string> to_json_lines() const;
};

struct ExtractionParseError : ParseError {
    using ParseError::ParseError;
};

struct MixedStockError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Extractor {
public:
    virtual ~Extractor() = default;
    virtual ExtractionBatch extract(const RefinedDoc& doc, const AttributeSchema& s_a,
                                    const EventSchema& s_e) = 0;
    virtual std::string id() const = 0;
};

// Deterministic line-pattern extractor:
//   "<RelationName>: <value>"                                  -> attribute triple
//   "EVENT[<category>] <subj> -> <trigger> -> <obj> :: <why>"  -> event record
class RuleExtractor : public Extractor {
public:
    ExtractionBatch extract(const RefinedDoc& doc, const AttributeSchema& s_a,
                            const EventSchema& s_e) override;
    std::string id() const override { return "rule"; }
};

// Chat-backed extractor; reply contract is one JSON object per document with
// keys "attributes" and "events". Malformed events are skipped individually.
class ChatExtractor : public Extractor {
public:
    explicit ChatExtractor(ChatProvider& chat) : chat_(chat) {}
    ExtractionBatch extract(const RefinedDoc& doc, const AttributeSchema& s_a,
                            const EventSchema& s_e) override;
    std::string id() const override { return "chat"; }

    static std::string extraction_prompt(const RefinedDoc& doc, const AttributeSchema& s_a,
                                         const EventSchema& s_e);

private:
    ChatProvider& chat_;
};

ExtractionBatch extract_document(const RefinedDoc& doc, const AttributeSchema& s_a,
                                 const EventSchema& s_e, Extractor& extractor);

// Union over batches for one stock; dedup applied; order-insensitive.
StockGraph build_stock_graph(const std::vector<ExtractionBatch>& batches,
                             const std::string& stock_label, const std::string& ticker);

} // namespace finkario
