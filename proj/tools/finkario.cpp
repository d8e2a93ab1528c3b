#include "finkario/backtest.hpp"
#include "finkario/corpus.hpp"
#include "finkario/extraction.hpp"
#include "finkario/graphstore.hpp"
#include "finkario/guidance.hpp"
#include "finkario/refinement.hpp"
#include "finkario/retrieval.hpp"
#include "finkario/schema.hpp"
#include "finkario/vectorstore.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace finkario;

namespace {

// exit-code contract
constexpr int kOk = 0;
constexpr int kEmptyInput = 1;
constexpr int kIo = 2;
constexpr int kConfig = 3;
constexpr int kStale = 4;
constexpr int kProvider = 5;

std::string file_content_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(stable_hash(ss.str())));
    return buf;
}

std::vector<RefinedDoc> read_refined(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open refined corpus: " + path);
    std::vector<RefinedDoc> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        docs.push_back(RefinedDoc::from_json_line(line));
    }
    return docs;
}

int cmd_ingest(const std::string& corpus_dir, const std::string& out_path) {
    IngestResult ingested;
    try {
        ingested = ingest_directory(corpus_dir);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    if (ingested.reports.empty()) {
        std::cerr << "no documents in " << corpus_dir << "\n";
        return kEmptyInput;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kIo;
    }
    int refined = 0, dropped = 0;
    for (const auto& raw : ingested.reports) {
        try {
            out << refine(raw).to_json_line() << "\n";
            ++refined;
        } catch (const EmptyDocumentError&) {
            ++dropped;
        }
    }
    std::cout << "refined " << refined << " documents (" << ingested.skipped
              << " files skipped, " << dropped << " empty after refinement)\n";
    return refined > 0 ? kOk : kEmptyInput;
}

int cmd_build(const std::string& refined_path, const std::string& store_root,
              const std::string& schema_mode, const std::string& schema_file,
              const std::string& aliases_path, const std::string& refdata_path) {
    AttributeSchema s_a;
    EventSchema s_e;
    if (schema_mode == "builtin") {
        s_a = builtin_attribute_schema();
        s_e = builtin_event_schema();
    } else if (schema_mode == "file") {
        std::ifstream in(schema_file);
        if (!in) {
            std::cerr << "error: cannot open schema file " << schema_file << "\n";
            return kIo;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            std::tie(s_a, s_e) = schemas_from_json(ss.str());
        } catch (const SchemaParseError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kConfig;
        }
    } else if (schema_mode == "generate") {
        auto chat = HttpChatProvider::from_env();
        if (!chat) {
            std::cerr << "error: generate mode needs FINKARIO_CHAT_URL\n";
            return kConfig;
        }
        try {
            s_a = generate_attribute_schema(
                *chat, {builtin_template(SchemaTemplate::Id::CFA),
                        builtin_template(SchemaTemplate::Id::JPM)});
            s_e = generate_event_schema(*chat, builtin_template(SchemaTemplate::Id::WIS),
                                        builtin_template(SchemaTemplate::Id::FIBO));
        } catch (const std::exception& e) {
            std::cerr << "error: schema generation failed: " << e.what() << "\n";
            return kProvider;
        }
    } else {
        std::cerr << "error: unknown schema mode '" << schema_mode << "'\n";
        return kConfig;
    }

    std::vector<RefinedDoc> docs;
    try {
        docs = read_refined(refined_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    if (docs.empty()) {
        std::cerr << "refined corpus is empty\n";
        return kEmptyInput;
    }

    AliasTable aliases;
    if (!aliases_path.empty()) {
        std::ifstream in(aliases_path);
        if (!in) {
            std::cerr << "error: cannot open alias table " << aliases_path << "\n";
            return kIo;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        aliases = AliasTable::from_json(ss.str());
    }
    CsvReferenceData refdata = refdata_path.empty()
                                   ? CsvReferenceData::from_text("ticker,field,value,unit,as_of\n")
                                   : CsvReferenceData::from_file(refdata_path);
    auto chat = ScriptedChatProvider::empty(); // offline: incorrigible tails drop

    RuleExtractor extractor;
    // group extraction batches by stock
    std::map<std::string, std::vector<ExtractionBatch>> batches_by_ticker;
    std::map<std::string, std::string> label_by_ticker;
    for (const auto& doc : docs) {
        ExtractionBatch batch = extract_document(doc, s_a, s_e, extractor);
        std::string label = !batch.attribute_triples.empty()
                                ? batch.attribute_triples.front().head
                                : (doc.ticker ? *doc.ticker : doc.doc_id);
        std::string ticker = doc.ticker ? *doc.ticker : label;
        batches_by_ticker[ticker].push_back(std::move(batch));
        label_by_ticker.emplace(ticker, label);
    }

    GraphStore store;
    for (const auto& [ticker, batches] : batches_by_ticker) {
        StockGraph g = build_stock_graph(batches, label_by_ticker.at(ticker), ticker);
        auto [refined, report] = refine_graph(g, aliases, refdata, chat, docs);
        store.upsert(refined);
    }
    store.set_build_id(file_content_hash(refined_path));
    try {
        store.save(store_root);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    GraphStats stats = store.stats();
    std::cout << "entities: " << stats.entity_count
              << "\nrelation_types: " << stats.relation_type_count
              << "\ntriples: " << stats.triple_count << "\n";
    return kOk;
}

int cmd_index(const std::string& store_root, const std::string& index_path, int dim) {
    GraphStore store;
    try {
        store = GraphStore::load(store_root);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    auto tickers = store.tickers();
    if (tickers.empty()) {
        std::cerr << "store is empty\n";
        return kEmptyInput;
    }
    HashingEmbedder embedder(dim);
    VectorIndex index(dim);
    index.set_build_id(store.build_id());
    for (const auto& tk : tickers)
        index.ingest(encode_graph(store.full_graph(tk), embedder));
    try {
        index.save(index_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    std::cout << "indexed " << index.size() << " records\n";
    return kOk;
}

int cmd_query(const std::string& store_root, const std::string& index_path,
              const std::string& query, size_t k_c, size_t k_f, bool explain, int dim) {
    if (query.empty()) {
        std::cerr << "error: empty query\n";
        return kConfig;
    }
    GraphStore store;
    VectorIndex index(dim);
    try {
        store = GraphStore::load(store_root);
        index = VectorIndex::load(index_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    HashingEmbedder embedder(index.dimension());
    RetrievalOptions opts;
    opts.k_c = k_c;
    opts.k_f = k_f;
    Subgraph sub;
    std::vector<Anchor> anchors;
    try {
        std::tie(sub, anchors) = retrieve(query, index, store, embedder, opts);
    } catch (const StalenessError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStale;
    }
    if (anchors.empty()) {
        std::cerr << "no anchors retrieved\n";
        return kEmptyInput;
    }
    for (const auto& a : anchors)
        std::cout << "anchor: " << a.stock << " "
                  << (a.date ? a.date->to_string() : "-") << " score=" << a.score << "\n";
    if (explain) std::cout << sub.to_json(anchors) << "\n";

    Date signal_date{1970, 1, 1};
    for (const auto& t : sub.attribute_triples)
        if (signal_date < t.timestamp) signal_date = t.timestamp;
    for (const auto& e : sub.event_records)
        if (signal_date < e.timestamp) signal_date = e.timestamp;
    if (anchors[0].date && signal_date == Date{1970, 1, 1}) signal_date = *anchors[0].date;

    Signal signal = mock_analyst(sub, anchors[0].stock, signal_date);
    std::cout << signal.to_json_line() << "\n";
    return kOk;
}

int cmd_backtest(const std::string& prices_path, const std::string& signals_path,
                 const std::string& calendar_path, const std::string& out_dir,
                 const std::string& store_root) {
    PriceTable prices;
    std::vector<Signal> signals;
    try {
        prices = PriceTable::from_file(prices_path);
        signals = read_signals_file(signals_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
    TradingCalendar cal = calendar_path.empty() ? TradingCalendar::from_prices(prices)
                                                : TradingCalendar::from_file(calendar_path);
    auto sim = simulate(signals, prices, cal);
    auto metrics = compute_metrics(sim);

    std::map<std::string, std::string> industry_by_ticker;
    if (!store_root.empty()) {
        try {
            GraphStore store = GraphStore::load(store_root);
            for (const auto& tk : store.tickers())
                for (const auto& t : store.full_graph(tk).attribute_triples)
                    if (t.relation == "Primary Industry")
                        industry_by_ticker[tk] = t.tail;
        } catch (const IoError&) {
            // industry counts are optional
        }
    }
    try {
        emit_report(metrics, sim, out_dir, industry_by_ticker);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    std::cout << metrics.to_json() << "\n";
    return kOk;
}

int cmd_stats(const std::string& store_root) {
    GraphStore store;
    try {
        store = GraphStore::load(store_root);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    GraphStats stats = store.stats();
    std::cout << "entities: " << stats.entity_count
              << "\nrelation_types: " << stats.relation_type_count
              << "\ntriples: " << stats.triple_count << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FinKario pipeline: knowledge graph construction, retrieval, backtesting"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file");

    std::string corpus_dir, refined_path = "refined.jsonl";
    auto* ingest = app.add_subcommand("ingest", "refine a corpus directory");
    ingest->add_option("--corpus", corpus_dir, "directory of .md/.txt reports")->required();
    ingest->add_option("--out", refined_path, "refined JSONL output");

    std::string store_root = "store", schema_mode = "builtin", schema_file, aliases_path,
                refdata_path;
    auto* build = app.add_subcommand("build", "extract, refine and store stock graphs");
    build->add_option("--refined", refined_path, "refined JSONL input")->required();
    build->add_option("--store", store_root, "graph store root");
    build->add_option("--schema-mode", schema_mode, "builtin | generate | file");
    build->add_option("--schema-file", schema_file, "schema JSON (mode=file)");
    build->add_option("--aliases", aliases_path, "alias table JSON");
    build->add_option("--refdata", refdata_path, "reference data CSV");

    std::string index_path = "index.vec";
    int dim = 256;
    auto* index = app.add_subcommand("index", "encode stock graphs into the vector index");
    index->add_option("--store", store_root, "graph store root");
    index->add_option("--index", index_path, "index output path");
    index->add_option("--dim", dim, "embedding dimension");

    std::string query_text;
    size_t k_c = 3, k_f = 20;
    bool explain = false;
    auto* query = app.add_subcommand("query", "two-stage retrieval + signal");
    query->add_option("--store", store_root, "graph store root");
    query->add_option("--index", index_path, "index path");
    query->add_option("--query", query_text, "question text");
    query->add_option("--k-c", k_c, "coarse anchors");
    query->add_option("--k-f", k_f, "fine records");
    query->add_flag("--explain", explain, "print the retrieved subgraph");

    std::string prices_path, signals_path, calendar_path, out_dir = "out",
                backtest_store;
    auto* backtest = app.add_subcommand("backtest", "simulate signals and report metrics");
    backtest->add_option("--prices", prices_path, "price CSV (ticker,date,close)")
        ->required();
    backtest->add_option("--signals", signals_path, "signals JSONL")->required();
    backtest->add_option("--calendar", calendar_path, "explicit calendar file");
    backtest->add_option("--out", out_dir, "output directory");
    backtest->add_option("--store", backtest_store, "graph store for industry counts");

    auto* stats = app.add_subcommand("stats", "graph store statistics");
    stats->add_option("--store", store_root, "graph store root");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(corpus_dir, refined_path);
        if (app.got_subcommand(build))
            return cmd_build(refined_path, store_root, schema_mode, schema_file,
                             aliases_path, refdata_path);
        if (app.got_subcommand(index)) return cmd_index(store_root, index_path, dim);
        if (app.got_subcommand(query))
            return cmd_query(store_root, index_path, query_text, k_c, k_f, explain, dim);
        if (app.got_subcommand(backtest))
            return cmd_backtest(prices_path, signals_path, calendar_path, out_dir,
                                backtest_store);
        if (app.got_subcommand(stats)) return cmd_stats(store_root);
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProvider;
    } catch (const StalenessError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStale;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
    return kConfig;
}
