#include "finkario/schema.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace finkario {

bool AttributeSchema::contains(const std::string& name) const {
    return std::find(relation_names.begin(), relation_names.end(), name) !=
           relation_names.end();
}

bool EventSchema::contains_category(const std::string& name) const {
    return std::any_of(categories.begin(), categories.end(),
                       [&](const EventCategory& c) { return c.name == name; });
}

void validate(const AttributeSchema& s) {
    if (s.relation_names.empty())
        throw SchemaParseError("attribute schema is empty");
    std::set<std::string> seen;
    for (const auto& n : s.relation_names) {
        if (n.empty()) throw SchemaParseError("attribute schema has empty name");
        if (!seen.insert(n).second)
            throw SchemaParseError("attribute schema has duplicate: " + n);
    }
}

void validate(const EventSchema& s) {
    if (s.categories.empty()) throw SchemaParseError("event schema is empty");
    std::set<std::string> seen;
    for (const auto& c : s.categories) {
        if (c.name.empty()) throw SchemaParseError("event category has empty name");
        if (!seen.insert(c.name).second)
            throw SchemaParseError("event schema has duplicate category: " + c.name);
        if (c.subtypes.empty())
            throw SchemaParseError("event category has no subtypes: " + c.name);
        std::set<std::string> sub;
        for (const auto& o : c.subtypes)
            if (o.empty() || !sub.insert(o).second)
                throw SchemaParseError("bad subtype list in category: " + c.name);
    }
}

const AttributeSchema& builtin_attribute_schema() {
    static const AttributeSchema schema{{
        "Stock Ticker",
        "Primary Exchange",
        "Primary Industry",
        "Investment Rating",
        "Current Stock Price",
        "Market Capitalization",
        "Target Price",
        "Major Shareholders",
        "Risk Assessment",
        "Key Products",
        "Research Institution",
    }};
    return schema;
}

const EventSchema& builtin_event_schema() {
    static const EventSchema schema{{
        {"Supply", {"is provided by", "Capacity Adjustment", "Market Action", "Holds"}},
        {"Demand", {"Sales", "Consumption", "Performance", "Is needed by"}},
        {"Revenue",
         {"Earning", "Profit", "Income-oriented classifier", "Is issued by",
          "Has increased / decreased"}},
        {"Efficiency Cost", {"Lower the cost", "Automation"}},
        {"Strategic Action", {"Merger / Acquisition", "Overseas expansion", "Spin-off"}},
        {"Technology Innovation",
         {"Is applicable in", "New product", "Has innovated", "Iteration"}},
        {"Policy Regulation", {"Regulatory action", "Governs", "License"}},
        {"Macro", {"Interest rate", "GDP", "Disaster"}},
    }};
    return schema;
}

SchemaTemplate builtin_template(SchemaTemplate::Id id) {
    switch (id) {
        case SchemaTemplate::Id::CFA:
            return {id,
                    "Equity research report essentials: business description, industry "
                    "overview and competitive positioning, investment summary, valuation, "
                    "financial analysis, investment risks, ratings, price targets, "
                    "ownership structure."};
        case SchemaTemplate::Id::JPM:
            return {id,
                    "Sell-side equity report layout: company ticker and exchange, rating "
                    "and price target, market data (price, market cap), key products and "
                    "segments, shareholder structure, risk factors, analyst and "
                    "institution attribution."};
        case SchemaTemplate::Id::WIS:
            return {id,
                    "Causal analysis framework for financial storytelling: explain metric "
                    "movements through drivers such as supply conditions, demand shifts, "
                    "revenue composition, cost efficiency, strategic corporate actions, "
                    "technological change, policy and regulation, and macroeconomic "
                    "forces."};
        case SchemaTemplate::Id::FIBO:
            return {id,
                    "Financial Industry Business Ontology: formal classes and relations "
                    "covering corporate actions, securities issuance, market transactions, "
                    "regulatory instruments, economic indicators, and party roles."};
    }
    throw ConfigError("unknown schema template id");
}

namespace {

std::vector<std::string> parse_string_array(const std::string& reply) {
    // Accept a JSON array of strings, or one item per non-empty line.
    auto j = nlohmann::json::parse(reply, nullptr, false);
    std::vector<std::string> items;
    if (j.is_array()) {
        for (const auto& el : j) {
            if (!el.is_string()) throw SchemaParseError("non-string array item", reply);
            items.push_back(el.get<std::string>());
        }
        return items;
    }
    std::istringstream in(reply);
    std::string line;
    while (std::getline(in, line)) {
        size_t b = line.find_first_not_of(" \t\r-*");
        size_t e = line.find_last_not_of(" \t\r");
        if (b == std::string::npos) continue;
        items.push_back(line.substr(b, e - b + 1));
    }
    return items;
}

} // namespace

std::string attribute_schema_prompt(const std::vector<SchemaTemplate>& templates) {
    std::string prompt =
        "From the following equity research report templates, identify the core "
        "attribute relation types that describe a covered company. Reply with a "
        "JSON array of relation-type names.\n";
    for (const auto& t : templates) prompt += "\nTemplate:\n" + t.body + "\n";
    return prompt;
}

std::string event_category_prompt(const SchemaTemplate& wis) {
    return "From the following causal-analysis template, list the high-level "
           "categories of events that drive financial metric movements. Reply with "
           "a JSON array of category names.\n\nTemplate:\n" +
           wis.body + "\n";
}

std::string event_subtype_prompt(const std::string& category, const SchemaTemplate& fibo) {
    return "For the event category \"" + category +
           "\", list its low-level event ontology relations, grounded in the "
           "following ontology. Reply with a JSON array of relation names.\n\n"
           "Ontology:\n" +
           fibo.body + "\n";
}

AttributeSchema generate_attribute_schema(ChatProvider& chat,
                                          const std::vector<SchemaTemplate>& templates) {
    bool has_cfa = false, has_jpm = false;
    for (const auto& t : templates) {
        has_cfa |= t.template_id == SchemaTemplate::Id::CFA;
        has_jpm |= t.template_id == SchemaTemplate::Id::JPM;
    }
    if (!has_cfa || !has_jpm)
        throw ConfigError("attribute schema generation needs CFA and JPM templates");
    std::string reply =
        chat.chat_complete({"You design knowledge graph schemas for equity research.",
                            attribute_schema_prompt(templates), 8192});
    AttributeSchema schema{parse_string_array(reply)};
    try {
        validate(schema);
    } catch (const SchemaParseError& e) {
        throw SchemaParseError(std::string("generated attribute schema invalid: ") +
                                   e.what(),
                               reply);
    }
    return schema;
}

EventSchema generate_event_schema(ChatProvider& chat, const SchemaTemplate& wis,
                                  const SchemaTemplate& fibo) {
    std::string cat_reply =
        chat.chat_complete({"You design knowledge graph schemas for equity research.",
                            event_category_prompt(wis), 8192});
    auto cat_names = parse_string_array(cat_reply);
    if (cat_names.empty())
        throw SchemaParseError("event schema: empty reply at stage categories", cat_reply);
    EventSchema schema;
    for (const auto& name : cat_names) {
        std::string sub_reply = chat.chat_complete(
            {"You design knowledge graph schemas for equity research.",
             event_subtype_prompt(name, fibo), 8192});
        auto subtypes = parse_string_array(sub_reply);
        if (subtypes.empty())
            throw SchemaParseError("event schema: empty subtype reply for category " + name,
                                   sub_reply);
        schema.categories.push_back({name, std::move(subtypes)});
    }
    validate(schema);
    return schema;
}

std::string schemas_to_json(const AttributeSchema& a, const EventSchema& e) {
    nlohmann::json j;
    j["attribute"] = a.relation_names;
    j["event"] = nlohmann::json::array();
    for (const auto& c : e.categories)
        j["event"].push_back({{"name", c.name}, {"subtypes", c.subtypes}});
    return j.dump(2);
}

std::pair<AttributeSchema, EventSchema> schemas_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (!j.is_object()) throw SchemaParseError("schema file is not a JSON object", text);
    AttributeSchema a;
    EventSchema e;
    try {
        a.relation_names = j.at("attribute").get<std::vector<std::string>>();
        for (const auto& c : j.at("event"))
            e.categories.push_back({c.at("name").get<std::string>(),
                                    c.at("subtypes").get<std::vector<std::string>>()});
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaParseError(std::string("schema file: ") + ex.what(), text);
    }
    validate(a);
    validate(e);
    return {a, e};
}

} // namespace finkario
