#include "finkario/refinement.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace finkario {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string describe(const AttributeTriple& t) {
    return "(" + t.head + ", " + t.relation + ", " + t.tail + ", " +
           t.timestamp.to_string() + ")";
}

std::string describe(const EventRecord& e) {
    return "(" + e.subject + ", " + e.trigger + ", " + e.object + ", " +
           e.timestamp.to_string() + ")";
}

std::string format_value(double v) {
    char buf[64];
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    else
        std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

bool is_placeholder(const std::string& tail, const RefinementOptions& opts) {
    std::string t = trim(tail);
    return std::find(opts.placeholders.begin(), opts.placeholders.end(), t) !=
           opts.placeholders.end();
}

const RefinedDoc* find_doc(const std::vector<RefinedDoc>& corpus, const std::string& id) {
    for (const auto& d : corpus)
        if (d.doc_id == id) return &d;
    return nullptr;
}

std::string relevant_passage(const RefinedDoc& doc, const std::string& head,
                             const std::string& relation, size_t max_chars) {
    for (const auto& [heading, text] : doc.sections)
        if (text.find(head) != std::string::npos ||
            text.find(relation) != std::string::npos)
            return text;
    std::string body = doc.body_text;
    if (body.size() > max_chars) body.resize(max_chars);
    return body;
}

} // namespace

void AliasTable::validate() const {
    std::map<std::string, std::string> owner; // alias -> canonical
    for (const auto& [canon, aliases] : canonical) {
        for (const auto& a : aliases) {
            auto [it, inserted] = owner.emplace(a, canon);
            if (!inserted && it->second != canon)
                throw ConfigError("alias '" + a + "' maps to two canonicals");
            if (canonical.count(a) && a != canon)
                throw ConfigError("canonical '" + a + "' is also an alias");
        }
    }
}

std::string AliasTable::resolve(const std::string& label) const {
    if (canonical.count(label)) return label; // already canonical
    for (const auto& [canon, aliases] : canonical)
        if (aliases.count(label)) return canon;
    for (const auto& suffix : suffix_rules) {
        if (label.size() <= suffix.size()) continue;
        if (label.compare(label.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        std::string stripped = trim(label.substr(0, label.size() - suffix.size()));
        while (!stripped.empty() && (stripped.back() == ',' || stripped.back() == '-'))
            stripped = trim(stripped.substr(0, stripped.size() - 1));
        if (stripped.empty()) continue;
        if (canonical.count(stripped)) return stripped;
        for (const auto& [canon, aliases] : canonical)
            if (aliases.count(stripped)) return canon;
    }
    return label;
}

AliasTable AliasTable::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    AliasTable table;
    for (const auto& [canon, aliases] : j.at("canonical").items())
        for (const auto& a : aliases)
            table.canonical[canon].insert(a.get<std::string>());
    if (j.contains("suffixes"))
        table.suffix_rules = j["suffixes"].get<std::vector<std::string>>();
    table.validate();
    return table;
}

std::string AliasTable::to_json() const {
    nlohmann::json j;
    j["canonical"] = nlohmann::json::object();
    for (const auto& [canon, aliases] : canonical)
        j["canonical"][canon] = std::vector<std::string>(aliases.begin(), aliases.end());
    j["suffixes"] = suffix_rules;
    return j.dump(2);
}

void RefinementReport::merge(const RefinementReport& other) {
    normalized_count += other.normalized_count;
    completed_count += other.completed_count;
    corrected_count += other.corrected_count;
    unresolved.insert(unresolved.end(), other.unresolved.begin(), other.unresolved.end());
}

std::string RefinementReport::to_json() const {
    nlohmann::json j;
    j["normalized_count"] = normalized_count;
    j["completed_count"] = completed_count;
    j["corrected_count"] = corrected_count;
    j["unresolved"] = nlohmann::json::array();
    for (const auto& [triple, reason] : unresolved)
        j["unresolved"].push_back({{"triple", triple}, {"reason", reason}});
    return j.dump(2);
}

bool tail_has_unit(const std::string& tail, const RefinementOptions& opts) {
    std::istringstream in(tail);
    std::string token;
    while (in >> token) {
        for (const auto& unit : opts.unit_lexicon) {
            if (token == unit) return true;
            // CJK units attach to the number ("800亿")
            if (token.size() > unit.size() &&
                token.compare(token.size() - unit.size(), unit.size(), unit) == 0)
                return true;
        }
    }
    return false;
}

StockGraph normalize_entities(const StockGraph& g, const AliasTable& aliases,
                              RefinementReport* report) {
    aliases.validate();
    StockGraph out = g;
    int changed = 0;
    auto fix = [&](std::string& label) {
        if (label.empty()) return;
        std::string canon = aliases.resolve(label);
        if (canon != label) {
            label = canon;
            ++changed;
        }
    };
    fix(out.stock.label);
    for (auto& t : out.attribute_triples) {
        fix(t.head);
        fix(t.tail);
    }
    for (auto& e : out.event_records) {
        fix(e.subject);
        fix(e.object);
    }
    out.normalize();
    if (report) report->normalized_count += changed;
    return out;
}

std::pair<StockGraph, RefinementReport> complete_attributes(const StockGraph& g,
                                                            ReferenceData& refdata,
                                                            const RefinementOptions& opts) {
    StockGraph out = g;
    RefinementReport report;
    for (auto& t : out.attribute_triples) {
        if (!opts.numeric_relations.count(t.relation)) continue;
        std::string tail = trim(t.tail);
        if (!tail.empty() && tail_has_unit(tail, opts)) continue;
        try {
            ReferenceValue v =
                refdata.lookup_reference({out.ticker, t.relation, t.timestamp});
            t.tail = format_value(v.value) + " " + v.unit;
            ++report.completed_count;
        } catch (const NotFoundError&) {
            report.unresolved.emplace_back(describe(t), "not-found");
        }
    }
    out.normalize();
    return {out, report};
}

std::string correction_prompt(const AttributeTriple& t, const std::string& passage) {
    return "The extracted value for relation \"" + t.relation + "\" of \"" + t.head +
           "\" is missing or wrong. Read the passage below and reply with only the "
           "corrected value.\n\nPassage:\n" +
           passage + "\n";
}

std::string correction_prompt(const EventRecord& e, const std::string& passage) {
    return "The object of the event (" + e.subject + ", " + e.trigger +
           ") is missing or wrong. Read the passage below and reply with only the "
           "corrected object.\n\nPassage:\n" +
           passage + "\n";
}

std::pair<StockGraph, RefinementReport> correct_errors(const StockGraph& g,
                                                       ChatProvider& chat,
                                                       const std::vector<RefinedDoc>& corpus,
                                                       const RefinementOptions& opts) {
    StockGraph out = g;
    RefinementReport report;

    std::vector<AttributeTriple> kept_attrs;
    for (auto& t : out.attribute_triples) {
        if (!is_placeholder(t.tail, opts)) {
            kept_attrs.push_back(t);
            continue;
        }
        const RefinedDoc* doc = find_doc(corpus, t.doc_id);
        if (!doc) {
            report.unresolved.emplace_back(describe(t), "no-provenance");
            kept_attrs.push_back(t);
            continue;
        }
        std::string passage =
            relevant_passage(*doc, t.head, t.relation, opts.refeed_max_chars);
        std::string reply;
        try {
            reply = trim(chat.chat_complete(
                {"You correct extracted financial facts.", correction_prompt(t, passage),
                 1024}));
        } catch (const ProviderError&) {
            reply.clear();
        }
        if (reply.empty() || is_placeholder(reply, opts)) {
            report.unresolved.emplace_back(describe(t), "incorrigible");
            continue; // triple dropped
        }
        AttributeTriple fixed = t;
        fixed.tail = reply;
        ++report.corrected_count;
        if (opts.numeric_relations.count(fixed.relation) &&
            !tail_has_unit(fixed.tail, opts))
            report.unresolved.emplace_back(describe(fixed), "missing-unit");
        kept_attrs.push_back(std::move(fixed));
    }
    out.attribute_triples = std::move(kept_attrs);

    std::vector<EventRecord> kept_events;
    for (auto& e : out.event_records) {
        if (!is_placeholder(e.object, opts)) {
            kept_events.push_back(e);
            continue;
        }
        const RefinedDoc* doc = find_doc(corpus, e.doc_id);
        if (!doc) {
            report.unresolved.emplace_back(describe(e), "no-provenance");
            kept_events.push_back(e);
            continue;
        }
        std::string passage =
            relevant_passage(*doc, e.subject, e.trigger, opts.refeed_max_chars);
        std::string reply;
        try {
            reply = trim(chat.chat_complete(
                {"You correct extracted financial facts.", correction_prompt(e, passage),
                 1024}));
        } catch (const ProviderError&) {
            reply.clear();
        }
        if (reply.empty() || is_placeholder(reply, opts)) {
            report.unresolved.emplace_back(describe(e), "incorrigible");
            continue;
        }
        EventRecord fixed = e;
        fixed.object = reply;
        ++report.corrected_count;
        kept_events.push_back(std::move(fixed));
    }
    out.event_records = std::move(kept_events);

    out.normalize();
    return {out, report};
}

std::pair<StockGraph, RefinementReport> refine_graph(const StockGraph& g,
                                                     const AliasTable& aliases,
                                                     ReferenceData& refdata,
                                                     ChatProvider& chat,
                                                     const std::vector<RefinedDoc>& corpus,
                                                     const RefinementOptions& opts) {
    RefinementReport report;
    StockGraph step1 = normalize_entities(g, aliases, &report);
    auto [step2, r2] = complete_attributes(step1, refdata, opts);
    report.merge(r2);
    auto [step3, r3] = correct_errors(step2, chat, corpus, opts);
    report.merge(r3);
    return {std::move(step3), report};
}

} // namespace finkario
