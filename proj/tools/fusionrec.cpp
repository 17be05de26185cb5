// fusionrec command-line interface: graph/embedding builds, sketching,
// training, catalog filtering, evaluation, analytics reports and serve mode.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "fusionrec/analytics.hpp"
#include "fusionrec/embedding.hpp"
#include "fusionrec/engine.hpp"
#include "fusionrec/graph.hpp"
#include "fusionrec/metrics.hpp"
#include "fusionrec/scorer.hpp"
#include "fusionrec/server.hpp"
#include "fusionrec/sessions.hpp"
#include "fusionrec/sketch.hpp"

using namespace fusionrec;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in = open_input(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// "D=8,b=7,seed=0" with optional whitespace.
void parse_layout_spec(const std::string& spec, std::uint32_t& depth, std::uint32_t& bits,
                       std::uint64_t& seed) {
    std::istringstream in(spec);
    std::string part;
    while (std::getline(in, part, ',')) {
        const std::size_t eq = part.find('=');
        if (eq == std::string::npos) throw ContractError("bad layout spec: " + spec);
        const std::string key = part.substr(0, eq);
        const std::string value = part.substr(eq + 1);
        if (key == "D")
            depth = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "b")
            bits = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "seed")
            seed = std::stoull(value);
        else
            throw ContractError("unknown layout key: " + key);
    }
}

EmbeddingMatrix load_embeddings_any(const std::string& path) {
    std::ifstream in = open_input(path);
    char magic[4] = {0};
    in.read(magic, 4);
    in.seekg(0);
    if (std::string(magic, 4) == "FRE1") return import_embeddings_binary(in);
    return import_embeddings_text(in);
}

int cmd_graph_build(const std::string& input, const std::string& mode, const std::string& out,
                    bool weights, const std::string& delimiter) {
    ParseOptions options;
    options.weight_column = weights;
    if (delimiter.size() != 1) throw ContractError("delimiter must be a single character");
    options.delimiter = delimiter[0];

    std::ifstream in = open_input(input);
    ParseResult parsed = parse_interactions(in, options);
    const ExpansionMode expansion =
        mode == "star" ? ExpansionMode::star : ExpansionMode::clique;
    const TransitionMatrix m = build_transition(parsed.edges, parsed.index, expansion);

    std::ofstream sink = open_output(out);
    save_graph(m, parsed.index, sink);
    std::cerr << "graph: " << parsed.edges.size() << " hyperedges, " << parsed.index.size()
              << " nodes, " << m.triplets.size() << " triplets";
    if (parsed.malformed_lines) std::cerr << ", " << parsed.malformed_lines << " malformed lines";
    std::cerr << "\n";
    return 0;
}

int cmd_embed(const std::string& graph_path, std::uint32_t dim, int iterations,
              std::uint64_t seed, int workers, const std::string& out) {
    std::ifstream in = open_input(graph_path);
    auto [m, index] = load_graph(in);
    EmbedConfig config;
    config.dim = dim;
    config.iterations = iterations;
    config.seed = seed;
    if (config.iterations < 1 || config.iterations > 16)
        throw ContractError("iterations must be within 1..16");
    const EmbeddingMatrix q = propagate(m, init_matrix(index, config), config.iterations, workers);

    std::ofstream sink = open_output(out);
    if (ends_with(out, ".bin"))
        export_embeddings_binary(q, sink);
    else
        export_embeddings_text(q, sink);
    std::cerr << "embedded " << q.n_rows << " nodes at dim " << q.dim << "\n";
    return 0;
}

int cmd_embed_inductive(const std::string& links_path, const std::string& base_path,
                        const std::string& out) {
    const EmbeddingMatrix base = load_embeddings_any(base_path);

    std::ifstream in = open_input(links_path);
    std::vector<std::tuple<std::string, std::string, double>> raw;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string new_label, base_label, weight_text;
        if (!std::getline(ls, new_label, '\t') || !std::getline(ls, base_label, '\t'))
            throw ContractError("links file expects: new_node TAB base_node [TAB weight]");
        double weight = 1.0;
        if (std::getline(ls, weight_text, '\t')) weight = std::stod(weight_text);
        raw.emplace_back(new_label, base_label, weight);
    }
    const EmbeddingMatrix result = embed_inductive(make_inductive_links(raw, base), base);
    if (out == "-") {
        export_embeddings_text(result, std::cout);
    } else {
        std::ofstream sink = open_output(out);
        if (ends_with(out, ".bin"))
            export_embeddings_binary(result, sink);
        else
            export_embeddings_text(result, sink);
    }
    return 0;
}

int cmd_sketch_build(const std::string& embeddings_path, const std::string& layout_spec,
                     const std::string& out) {
    const EmbeddingMatrix q = load_embeddings_any(embeddings_path);
    std::uint32_t depth = 8, bits = 7;
    std::uint64_t seed = 0;
    parse_layout_spec(layout_spec, depth, bits, seed);

    ItemCodes codes;
    codes.layout = make_layout(depth, bits, static_cast<std::uint32_t>(q.dim), seed);
    for (std::uint64_t r = 0; r < q.n_rows; ++r) {
        codes.labels.push_back(q.labels[r]);
        codes.codes.push_back(encode(std::span<const double>(q.row(r), q.dim), codes.layout));
    }
    std::ofstream sink = open_output(out);
    save_item_codes(codes, sink);
    std::cerr << "encoded " << codes.labels.size() << " items into D=" << depth
              << " W=" << (1u << bits) << " codes\n";
    return 0;
}

int cmd_sketch_user(const std::string& history_path, const std::string& codes_path,
                    const std::string& out) {
    std::ifstream codes_in = open_input(codes_path);
    const ItemCodes codes = load_item_codes(codes_in);
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < codes.labels.size(); ++i) row_of.emplace(codes.labels[i], i);

    std::ifstream sessions_in = open_input(history_path);
    const SessionLog log = load_sessions(sessions_in);

    SketchCollection users;
    users.depth = codes.layout.depth;
    users.width = codes.layout.width;
    std::uint64_t skipped_items = 0;
    for (const auto& session : log.sessions) {
        std::vector<CodeSet> resolved;
        for (const auto& item : session.items) {
            auto it = row_of.find(item);
            if (it == row_of.end()) {
                ++skipped_items;
                continue;
            }
            resolved.push_back(codes.codes[it->second]);
        }
        if (resolved.empty()) continue;
        users.keys.push_back(session.id);
        users.sketches.push_back(sketch_of_items(
            resolved, std::vector<double>(resolved.size(), 1.0), codes.layout));
    }
    std::ofstream sink = open_output(out);
    save_sketch_collection(users, sink);
    std::cerr << "built " << users.keys.size() << " user sketches";
    if (skipped_items) std::cerr << " (" << skipped_items << " unknown items skipped)";
    std::cerr << "\n";
    return 0;
}

int cmd_examples_build(const std::string& sessions_path, const std::string& codes_path,
                       const std::string& out) {
    std::ifstream codes_in = open_input(codes_path);
    const ItemCodes codes = load_item_codes(codes_in);
    std::ifstream sessions_in = open_input(sessions_path);
    const SessionLog log = load_sessions(sessions_in);
    const std::vector<TrainingExample> examples = examples_from_sessions(log, codes);
    if (examples.empty()) throw EmptyInputError("no usable sessions (need >= 2 known items)");
    std::ofstream sink = open_output(out);
    save_examples(examples, sink);
    std::cerr << "wrote " << examples.size() << " training examples\n";
    return 0;
}

int cmd_train(const std::string& examples_path, int layers, int hidden, int epochs,
              double learning_rate, int batch, std::uint64_t seed, int workers,
              const std::string& out) {
    std::ifstream in = open_input(examples_path);
    const std::vector<TrainingExample> examples = load_examples(in);
    if (examples.empty()) throw EmptyInputError("examples file is empty");

    MlpConfig config;
    config.n_layers = layers;
    config.hidden_size = hidden;
    config.input_size = static_cast<int>(examples[0].input.size());
    config.out_depth = examples[0].target.depth;
    config.out_width = examples[0].target.width;
    config.learning_rate = learning_rate;
    config.batch_size = batch;
    config.epochs = epochs;
    config.seed = seed;

    const TrainResult result = train(examples, config, workers);
    std::ofstream sink = open_output(out);
    save_model(result.params, sink);
    std::cerr << "trained on " << examples.size() << " examples: loss " << result.initial_loss
              << " -> " << result.final_loss << "\n";
    return 0;
}

int cmd_filter(const std::string& catalog_path, const std::string& schema_path,
               const std::string& query) {
    const iql::CatalogSchema schema = iql::parse_schema_json(slurp(schema_path));
    std::ifstream catalog_in = open_input(catalog_path);
    const CompressedCatalog catalog = load_catalog(catalog_in, schema);
    auto ast = iql::parse(query);
    iql::typecheck(*ast, schema);
    const CandidateSet result = filter(catalog, *ast);
    for (std::uint64_t row : result.to_ids()) std::cout << catalog.ids[row] << "\n";
    std::cerr << result.count() << " of " << catalog.n_items << " items match\n";
    return 0;
}

int cmd_eval(const std::string& sessions_path, const std::string& model_path,
             const std::string& codes_path, int k) {
    std::ifstream model_in = open_input(model_path);
    const MlpParams model = load_model(model_in);
    std::ifstream codes_in = open_input(codes_path);
    const ItemCodes codes = load_item_codes(codes_in);
    std::ifstream sessions_in = open_input(sessions_path);
    const SessionLog log = load_sessions(sessions_in);

    std::map<std::string, std::uint32_t> row_of;
    for (std::uint32_t i = 0; i < codes.labels.size(); ++i) row_of.emplace(codes.labels[i], i);
    std::vector<std::pair<std::uint32_t, CodeSet>> candidates;
    for (std::uint32_t i = 0; i < codes.labels.size(); ++i)
        candidates.emplace_back(i, codes.codes[i]);

    // Session split: first half (rounded up) is history, the rest is held out.
    std::vector<EvalSession> sessions;
    for (const auto& session : log.sessions) {
        std::vector<std::uint32_t> rows;
        for (const auto& item : session.items) {
            auto it = row_of.find(item);
            if (it != row_of.end()) rows.push_back(it->second);
        }
        if (rows.size() < 2) continue;
        const std::size_t split = (rows.size() + 1) / 2;
        EvalSession es;
        es.history.assign(rows.begin(), rows.begin() + split);
        es.heldout.assign(rows.begin() + split, rows.end());
        sessions.push_back(std::move(es));
    }
    if (sessions.empty()) throw EmptyInputError("no evaluable sessions");

    const RankFn ranker = [&](const std::vector<std::uint32_t>& history, int top_k) {
        std::vector<CodeSet> history_codes;
        for (auto row : history) history_codes.push_back(codes.codes[row]);
        const auto ranked =
            score_candidates(model, history_input(history_codes, codes.layout), candidates);
        std::vector<std::uint32_t> out;
        for (const auto& [row, score] : ranked) {
            if (out.size() == static_cast<std::size_t>(top_k)) break;
            out.push_back(row);
        }
        return out;
    };
    const EvalReport report = evaluate(sessions, ranker, k);
    std::cout << "sessions\t" << report.sessions << "\n"
              << "MAP@" << k << "\t" << report.map_at_k << "\n"
              << "P@" << k << "\t" << report.p_at_k << "\n"
              << "R@" << k << "\t" << report.r_at_k << "\n"
              << "HR@" << k << "\t" << report.hr_at_k << "\n"
              << "MRR@" << k << "\t" << report.mrr_at_k << "\n";
    return 0;
}

int cmd_report(const std::string& events_path, const std::string& out) {
    std::ifstream in = open_input(events_path);
    const AnalyticsAggregate agg = aggregate_events(in);
    if (out == "-") {
        write_report_csv(agg, std::cout);
    } else {
        std::ofstream sink = open_output(out);
        write_report_csv(agg, sink);
    }
    if (agg.malformed_rows) std::cerr << agg.malformed_rows << " malformed rows skipped\n";
    return 0;
}

int cmd_serve(int port, const std::string& campaigns_path, const std::string& catalog_path,
              const std::string& schema_path, const std::string& codes_path,
              const std::string& model_path, const std::string& embeddings_path,
              const std::string& history_path, std::uint64_t seed) {
    const iql::CatalogSchema schema = iql::parse_schema_json(slurp(schema_path));
    EngineArtifacts artifacts;
    {
        std::ifstream catalog_in = open_input(catalog_path);
        artifacts.catalog = load_catalog(catalog_in, schema);
    }
    artifacts.campaigns = load_campaigns(slurp(campaigns_path), schema);
    if (!codes_path.empty()) {
        std::ifstream in = open_input(codes_path);
        artifacts.item_codes = load_item_codes(in);
    }
    if (!model_path.empty()) {
        std::ifstream in = open_input(model_path);
        artifacts.models.emplace("", load_model(in));
    }
    if (!embeddings_path.empty()) artifacts.embeddings = load_embeddings_any(embeddings_path);
    if (!history_path.empty()) {
        std::ifstream in = open_input(history_path);
        artifacts.history_log = load_sessions(in);
    }
    artifacts.bandit_seed = seed;

    Facade facade(std::make_shared<Engine>(std::move(artifacts)));
    facade.set_ready(true);
    std::cerr << "serving on port " << port << "\n";
    if (!facade.listen("0.0.0.0", port))
        throw Error("failed to listen on port " + std::to_string(port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-modal embedding fusion recommender"};
    app.require_subcommand(1);

    // graph build
    auto* graph = app.add_subcommand("graph", "interaction graph tools");
    graph->require_subcommand(1);
    auto* graph_build = graph->add_subcommand("build", "build a transition matrix");
    std::string gb_input, gb_out, gb_mode = "clique", gb_delimiter = "\t";
    bool gb_weights = false;
    graph_build->add_option("--input", gb_input, "hyperedge TSV")->required();
    graph_build->add_option("--mode", gb_mode, "clique|star")
        ->check(CLI::IsMember({"clique", "star"}));
    graph_build->add_option("--out", gb_out, "output graph.bin")->required();
    graph_build->add_flag("--weights", gb_weights, "last column is a positive weight");
    graph_build->add_option("--delimiter", gb_delimiter, "field delimiter (default TAB)");

    // embed [inductive]
    auto* embed = app.add_subcommand("embed", "compute node embeddings");
    std::string e_graph, e_out;
    std::uint32_t e_dim = 1024;
    int e_iterations = 4, e_workers = 1;
    std::uint64_t e_seed = 0;
    embed->add_option("--graph", e_graph, "graph.bin from graph build");
    embed->add_option("--dim", e_dim, "embedding dimensionality");
    embed->add_option("--iterations", e_iterations, "propagation steps (1..16)");
    embed->add_option("--seed", e_seed, "hash seed");
    embed->add_option("--workers", e_workers, "parallel workers over dimensions");
    embed->add_option("--out", e_out, "output (.bin for binary, else text)");

    auto* inductive = embed->add_subcommand("inductive", "embed new nodes from links");
    std::string i_links, i_base, i_out = "-";
    inductive->add_option("--links", i_links, "TSV: new_node TAB base_node [TAB weight]")
        ->required();
    inductive->add_option("--base", i_base, "existing embeddings (emb.bin or emb.tsv)")
        ->required();
    inductive->add_option("--out", i_out, "output path or - for stdout");

    // sketch build | sketch user
    auto* sketch = app.add_subcommand("sketch", "LSH sketching tools");
    sketch->require_subcommand(1);
    auto* sketch_build = sketch->add_subcommand("build", "encode items into bucket codes");
    std::string sb_embeddings, sb_layout = "D=8,b=7,seed=0", sb_out;
    sketch_build->add_option("--embeddings", sb_embeddings, "emb.bin or emb.tsv")->required();
    sketch_build->add_option("--layout", sb_layout, "layout: D=8,b=7,seed=0");
    sketch_build->add_option("--out", sb_out, "output codes.bin")->required();

    auto* sketch_user = sketch->add_subcommand("user", "aggregate history into user sketches");
    std::string su_history, su_codes, su_out;
    sketch_user->add_option("--history", su_history, "session TSV")->required();
    sketch_user->add_option("--codes", su_codes, "codes.bin")->required();
    sketch_user->add_option("--out", su_out, "output usersketch.bin")->required();

    // examples build
    auto* examples = app.add_subcommand("examples", "training example tools");
    examples->require_subcommand(1);
    auto* examples_build = examples->add_subcommand("build", "sessions -> training examples");
    std::string x_sessions, x_codes, x_out;
    examples_build->add_option("--sessions", x_sessions, "session TSV")->required();
    examples_build->add_option("--codes", x_codes, "codes.bin")->required();
    examples_build->add_option("--out", x_out, "output train.bin")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train the sketch scorer");
    std::string t_examples, t_out;
    int t_layers = 3, t_hidden = 256, t_epochs = 50, t_batch = 32, t_workers = 1;
    double t_lr = 1e-3;
    std::uint64_t t_seed = 0;
    train_cmd->add_option("--examples", t_examples, "train.bin")->required();
    train_cmd->add_option("--layers", t_layers, "affine layers (1..5)");
    train_cmd->add_option("--hidden", t_hidden, "hidden width");
    train_cmd->add_option("--epochs", t_epochs, "training epochs");
    train_cmd->add_option("--lr", t_lr, "learning rate");
    train_cmd->add_option("--batch", t_batch, "batch size");
    train_cmd->add_option("--seed", t_seed, "init/shuffle seed");
    train_cmd->add_option("--workers", t_workers, "parallel gradient workers");
    train_cmd->add_option("--out", t_out, "output model.bin")->required();

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "run an IQL query over a catalog");
    std::string f_catalog, f_schema, f_query;
    filter_cmd->add_option("--catalog", f_catalog, "items.jsonl")->required();
    filter_cmd->add_option("--schema", f_schema, "schema.json")->required();
    filter_cmd->add_option("--query", f_query, "IQL expression")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "session-based ranking metrics");
    std::string v_sessions, v_model, v_codes;
    int v_k = 20;
    eval_cmd->add_option("--sessions", v_sessions, "session TSV")->required();
    eval_cmd->add_option("--model", v_model, "model.bin")->required();
    eval_cmd->add_option("--codes", v_codes, "codes.bin")->required();
    eval_cmd->add_option("--k", v_k, "ranking cutoff");

    // report
    auto* report_cmd = app.add_subcommand("report", "aggregate an event CSV");
    std::string r_events, r_out = "-";
    report_cmd->add_option("--events", r_events, "events.csv")->required();
    report_cmd->add_option("--out", r_out, "output CSV path or - for stdout");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "HTTP recommendation facade");
    std::string s_campaigns, s_catalog, s_schema, s_codes, s_model, s_embeddings, s_history;
    int s_port = 8080;
    std::uint64_t s_seed = 0;
    serve_cmd->add_option("--port", s_port, "listen port");
    serve_cmd->add_option("--campaigns", s_campaigns, "campaigns.json")->required();
    serve_cmd->add_option("--catalog", s_catalog, "items.jsonl")->required();
    serve_cmd->add_option("--schema", s_schema, "schema.json")->required();
    serve_cmd->add_option("--codes", s_codes, "codes.bin (personalized campaigns)");
    serve_cmd->add_option("--model", s_model, "model.bin (personalized campaigns)");
    serve_cmd->add_option("--embeddings", s_embeddings, "emb.bin (similar_items campaigns)");
    serve_cmd->add_option("--history", s_history, "session TSV for user lookups/popularity");
    serve_cmd->add_option("--seed", s_seed, "bandit seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (graph_build->parsed())
            return cmd_graph_build(gb_input, gb_mode, gb_out, gb_weights, gb_delimiter);
        if (inductive->parsed()) return cmd_embed_inductive(i_links, i_base, i_out);
        if (embed->parsed()) {
            if (e_graph.empty() || e_out.empty())
                throw ContractError("embed requires --graph and --out");
            return cmd_embed(e_graph, e_dim, e_iterations, e_seed, e_workers, e_out);
        }
        if (sketch_build->parsed()) return cmd_sketch_build(sb_embeddings, sb_layout, sb_out);
        if (sketch_user->parsed()) return cmd_sketch_user(su_history, su_codes, su_out);
        if (examples_build->parsed()) return cmd_examples_build(x_sessions, x_codes, x_out);
        if (train_cmd->parsed())
            return cmd_train(t_examples, t_layers, t_hidden, t_epochs, t_lr, t_batch, t_seed,
                             t_workers, t_out);
        if (filter_cmd->parsed()) return cmd_filter(f_catalog, f_schema, f_query);
        if (eval_cmd->parsed()) return cmd_eval(v_sessions, v_model, v_codes, v_k);
        if (report_cmd->parsed()) return cmd_report(r_events, r_out);
        if (serve_cmd->parsed())
            return cmd_serve(s_port, s_campaigns, s_catalog, s_schema, s_codes, s_model,
                             s_embeddings, s_history, s_seed);
    } catch (const iql::SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const iql::TypeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
