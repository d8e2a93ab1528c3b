#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "finkario/guidance.hpp"

#include <algorithm>

using namespace finkario;

namespace {

Subgraph three_triples() {
    Subgraph sub;
    sub.attribute_triples = {
        {"BYD", "Target Price", "350 CNY", {2024, 9, 9}, "d2"},
        {"BYD", "Primary Industry", "Automobiles", {2024, 9, 2}, "d1"},
    };
    sub.event_records = {{"BYD", "EU market", "Overseas expansion", "Strategic Action",
                          "", "why so", {2024, 9, 2}, "d1"}};
    return sub;
}

} // namespace

TEST_CASE("serialize_subgraph: empty, determinism, sort order") {
    CHECK(serialize_subgraph({}) == "");

    auto sub = three_triples();
    auto text = serialize_subgraph(sub);
    CHECK(text == serialize_subgraph(sub));

    // sorted by (timestamp, relation, head): 9/2 Overseas expansion before
    // 9/2 Primary Industry? 'O' < 'P', yes; then 9/9 Target Price last.
    auto pos = [&](const std::string& needle) { return text.find(needle); };
    CHECK(pos("Overseas expansion") < pos("Primary Industry"));
    CHECK(pos("Primary Industry") < pos("Target Price"));
    CHECK(pos("note: why so") != std::string::npos);
}

TEST_CASE("serialize_subgraph: invariant under triple permutation") {
    auto sub = three_triples();
    auto a = serialize_subgraph(sub);
    std::swap(sub.attribute_triples[0], sub.attribute_triples[1]);
    CHECK(serialize_subgraph(sub) == a);
}

TEST_CASE("generate_signal: scripted round trip") {
    auto sub = three_triples();
    ScriptedChatProvider chat({});
    chat.add_fixture(analyst_prompt("outlook?", sub),
                     R"({"label":"Rise","confidence":0.8,"rationale":"capacity expansion"})");
    auto s = generate_signal("outlook?", sub, chat, "002594.SZ", {2024, 9, 9});
    CHECK(s.label == "Rise");
    CHECK(s.confidence == 0.8);
    CHECK(s.rationale == "capacity expansion");
    CHECK(s.stock == "002594.SZ");
    CHECK(s.signal_date == Date{2024, 9, 9});
}

TEST_CASE("generate_signal: label outside the closed set fails after re-ask") {
    auto sub = three_triples();
    ConstantChatProvider chat(R"({"label":"Up","confidence":0.8,"rationale":"x"})");
    CHECK_THROWS_AS(generate_signal("q", sub, chat, "S", {2024, 9, 9}),
                    SignalParseError);
}

TEST_CASE("generate_signal: out-of-range confidence clamped") {
    auto sub = three_triples();
    ConstantChatProvider chat(R"({"label":"Rise","confidence":1.7,"rationale":"x"})");
    auto s = generate_signal("q", sub, chat, "S", {2024, 9, 9});
    CHECK(s.confidence == 1.0);
}

TEST_CASE("generate_signal: one re-ask can rescue a parse failure") {
    auto sub = three_triples();
    ScriptedChatProvider chat({});
    std::string prompt = analyst_prompt("q", sub);
    chat.add_fixture(prompt, "not json");
    chat.add_fixture("Your previous reply could not be parsed. " + prompt,
                     R"({"label":"Fall","confidence":0.4,"rationale":"after re-ask"})");
    auto s = generate_signal("q", sub, chat, "S", {2024, 9, 9});
    CHECK(s.label == "Fall");
    CHECK(s.rationale == "after re-ask");
}

TEST_CASE("mock_analyst: positive-category arithmetic") {
    Subgraph sub;
    sub.event_records = {{"BYD", "x", "Earning", "Revenue", "", "", {2024, 9, 2}, "d"}};
    auto s = mock_analyst(sub, "002594.SZ", {2024, 9, 2});
    CHECK(s.label == "Rise");
    CHECK(s.confidence == doctest::Approx(0.6));
    CHECK(s.rationale.find("Earning") != std::string::npos);
    CHECK(s.source == "mock");

    Subgraph attrs_only;
    attrs_only.attribute_triples = {{"BYD", "Target Price", "350 CNY", {2024, 9, 2}, "d"}};
    auto fall = mock_analyst(attrs_only, "002594.SZ", {2024, 9, 2});
    CHECK(fall.label == "Fall");
    CHECK(fall.confidence == doctest::Approx(0.5));

    auto empty = mock_analyst({}, "002594.SZ", {2024, 9, 2});
    CHECK(empty.label == "Fall");
    CHECK(empty.confidence == doctest::Approx(0.5));

    // confidence saturates at 1.0
    Subgraph many;
    for (int i = 0; i < 9; ++i)
        many.event_records.push_back(
            {"BYD", "o" + std::to_string(i), "Sales", "Demand", "", "", {2024, 9, 2}, "d"});
    CHECK(mock_analyst(many, "002594.SZ", {2024, 9, 2}).confidence == 1.0);
}

TEST_CASE("signal json line round trip and validation") {
    Signal s{"002594.SZ", {2024, 9, 9}, "Rise", 0.8, "because", "mock"};
    auto back = Signal::from_json_line(s.to_json_line());
    CHECK(back.stock == s.stock);
    CHECK(back.signal_date == s.signal_date);
    CHECK(back.label == s.label);
    CHECK(back.confidence == s.confidence);
    CHECK(back.rationale == s.rationale);
    CHECK(back.source == s.source);

    CHECK_THROWS_AS(Signal::from_json_line(
                        R"({"stock":"S","signal_date":"2024-09-09","label":"Hold","confidence":0.5})"),
                    SignalParseError);
    CHECK_THROWS_AS(Signal::from_json_line(
                        R"({"stock":"S","signal_date":"2024-09-09","label":"Rise","confidence":1.5})"),
                    SignalParseError);
}
