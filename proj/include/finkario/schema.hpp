#pragma once

#include "finkario/errors.hpp"
#include "finkario/providers.hpp"

#include <string>
#include <vector>

namespace finkario {

struct AttributeSchema {
    std::vector<std::string> relation_names;

    bool contains(const std::string& name) const;
};

struct EventCategory {
    std::string name;
    std::vector<std::string> subtypes;
};

struct EventSchema {
    std::vector<EventCategory> categories;

    bool contains_category(const std::string& name) const;
};

struct SchemaTemplate {
    enum class Id { CFA, JPM, WIS, FIBO };
    Id template_id;
    std::string body;
};

struct SchemaParseError : ParseError {
    using ParseError::ParseError;
};

// Canonical published schemas; the rest of the pipeline defaults to these.
const AttributeSchema& builtin_attribute_schema();
const EventSchema& builtin_event_schema();

// Bundled template bodies for the four closed-world template ids.
SchemaTemplate builtin_template(SchemaTemplate::Id id);

// Regenerate schemas through a chat provider. Replies are JSON arrays of
// strings; validation (non-empty, distinct) is shared with the builtins.
AttributeSchema generate_attribute_schema(ChatProvider& chat,
                                          const std::vector<SchemaTemplate>& templates);
EventSchema generate_event_schema(ChatProvider& chat, const SchemaTemplate& wis,
                                  const SchemaTemplate& fibo);

// Prompt builders, exposed so scripted tests can key fixtures on them.
std::string attribute_schema_prompt(const std::vector<SchemaTemplate>& templates);
std::string event_category_prompt(const SchemaTemplate& wis);
std::string event_subtype_prompt(const std::string& category, const SchemaTemplate& fibo);

// JSON serialization: {"attribute":[...],"event":[{"name":...,"subtypes":[...]}]}
std::string schemas_to_json(const AttributeSchema& a, const EventSchema& e);
std::pair<AttributeSchema, EventSchema> schemas_from_json(const std::string& text);

void validate(const AttributeSchema& s);
void validate(const EventSchema& s);

} // namespace finkario
