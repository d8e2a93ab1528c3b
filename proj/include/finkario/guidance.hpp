#pragma once

#include "finkario/providers.hpp"
#include "finkario/retrieval.hpp"

#include <set>
#include <string>

namespace finkario {

struct Signal {
    std::string stock;
    Date signal_date;
    std::string label; // "Rise" | "Fall"
    double confidence = 0.0;
    std::string rationale;
    std::string source;

    std::string to_json_line() const;
    static Signal from_json_line(const std::string& line);
};

struct SignalParseError : ParseError {
    using ParseError::ParseError;
};

// Deterministic linearization: one line per triple, sorted by
// (timestamp, relation, head); event reasoning as an indented note.
std::string serialize_subgraph(const Subgraph& g_sub);

std::string analyst_prompt(const std::string& q, const Subgraph& g_sub);

// Structured analyst call; one re-ask on parse failure, then SignalParseError.
Signal generate_signal(const std::string& q, const Subgraph& g_sub, ChatProvider& chat,
                       const std::string& stock, const Date& date);

struct MockAnalystOptions {
    std::set<std::string> positive_categories = {"Demand", "Revenue",
                                                 "Technology Innovation"};
};

// Offline analyst: Rise iff the subgraph holds an event in a positive
// category; confidence = min(1, 0.5 + 0.1 * positive-event count).
Signal mock_analyst(const Subgraph& g_sub, const std::string& stock, const Date& date,
                    const MockAnalystOptions& opts = {});

} // namespace finkario
