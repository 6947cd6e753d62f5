// Command line front end: corpus generation, feature extraction, training,
// inference, the fan-in similarity baseline, and leave-one-design-out
// cross validation.

#include <CLI11.hpp>
#include <deque>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "regclass/evalkit.hpp"
#include "regclass/features.hpp"
#include "regclass/gnn.hpp"
#include "regclass/graph.hpp"
#include "regclass/netlist_json.hpp"
#include "regclass/normalize.hpp"
#include "regclass/postprocess.hpp"
#include "regclass/relic.hpp"
#include "regclass/synthgen.hpp"
#include "regclass/util.hpp"
#include "regclass/verilog.hpp"

namespace {

using namespace regclass;
using nlohmann::ordered_json;

std::string hash_of(const ordered_json& j) {
    return to_hex64(fnv1a64(j.dump()));
}

LibraryPtr load_library_opt(const std::string& path) {
    if (path.empty()) return default_library();
    return parse_library_manifest(read_file(path));
}

Netlist load_any_netlist(const std::string& path, LibraryPtr lib) {
    std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".v" || ext == ".sv") return parse_verilog_subset(read_file(path), lib);
    return load_netlist_file(path, lib);
}

struct LoadedGraph {
    Netlist netlist;
    CircuitGraph graph;
    FeatureMatrix features;
};

LoadedGraph load_for_model(const std::string& path, LibraryPtr lib, uint64_t seed, int pivots) {
    LoadedGraph lg;
    lg.netlist = load_any_netlist(path, lib);
    lg.graph = build_graph(lg.netlist);
    std::vector<double> bw = betweenness_auto(lg.graph, seed, pivots);
    std::vector<double> hc = harmonic_centrality(lg.graph);
    lg.features =
        extract_features(lg.graph, bw, hc, make_schema(*lib), lg.netlist.labels);
    return lg;
}

ordered_json counts_json(const ConfusionCounts& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

ordered_json metrics_json(const Metrics& m) {
    ordered_json j;
    j["sensitivity"] = m.sensitivity ? ordered_json(*m.sensitivity) : ordered_json(nullptr);
    j["specificity"] = m.specificity ? ordered_json(*m.specificity) : ordered_json(nullptr);
    j["balanced_accuracy"] =
        m.balanced_accuracy ? ordered_json(*m.balanced_accuracy) : ordered_json(nullptr);
    return j;
}

ordered_json stage_eval_json(const ConfusionCounts& c) {
    return {{"counts", counts_json(c)}, {"metrics", metrics_json(metrics(c))}};
}

// ---- gen ----

struct GenArgs {
    std::string out_dir;
    uint64_t seed = 1;
    std::vector<std::string> archetypes;
    int variants = 4;
    std::vector<std::string> encodings = {"onehot", "binary"};
};

int run_gen(const GenArgs& a) {
    GenConfig cfg;
    cfg.seed = a.seed;
    cfg.out_dir = a.out_dir;
    cfg.archetypes = a.archetypes;
    cfg.variants = a.variants;
    cfg.encodings.clear();
    for (const std::string& e : a.encodings) cfg.encodings.push_back(state_encoding_from_string(e));
    DatasetManifest m = build_corpus(cfg);
    std::cout << "wrote " << m.entries.size() << " netlists and manifest.json to " << a.out_dir
              << " (config " << m.config_hash << ")\n";
    return 0;
}

// ---- featurize ----

struct FeaturizeArgs {
    std::string netlist, out, library;
    uint64_t seed = 1;
    int pivots = 0;
};

int run_featurize(const FeaturizeArgs& a) {
    LibraryPtr lib = load_library_opt(a.library);
    LoadedGraph lg = load_for_model(a.netlist, lib, a.seed, a.pivots);
    save_feature_file(a.out, lg.features, *lib);
    std::cout << "wrote " << lg.features.rows << " x " << lg.features.schema.feature_length()
              << " feature matrix to " << a.out << "\n";
    return 0;
}

// ---- shared training options ----

struct TrainOpts {
    uint64_t seed = 1;
    int epochs = 300;
    double lr = 0.001;
    double dropout = 0.25;
    std::string direction = "in_neighbors";
    bool no_layer_norm = false;
    std::vector<int> sage_dims = {100, 100, 100};
    int head_hidden = 50;
    std::vector<double> class_weights;  // empty or {state, data}
    double val_fraction = 0.1;
    int pivots = 0;
};

void add_train_opts(CLI::App* cmd, TrainOpts& t) {
    cmd->add_option("--seed", t.seed, "rng seed for splits, init and dropout");
    cmd->add_option("--epochs", t.epochs, "training epochs");
    cmd->add_option("--lr", t.lr, "adam learning rate");
    cmd->add_option("--dropout", t.dropout, "dropout probability");
    cmd->add_option("--direction", t.direction, "message direction: in_neighbors or undirected");
    cmd->add_flag("--no-layer-norm", t.no_layer_norm, "disable layer normalization");
    cmd->add_option("--sage-dims", t.sage_dims, "aggregation layer widths")->delimiter(',');
    cmd->add_option("--head-hidden", t.head_hidden, "classifier hidden width");
    cmd->add_option("--class-weights", t.class_weights,
                    "state,data loss weights (default: inverse frequency)")
        ->delimiter(',')
        ->expected(0, 2);
    cmd->add_option("--val-fraction", t.val_fraction, "fraction of training graphs held for validation");
    cmd->add_option("--pivots", t.pivots, "betweenness pivot count (0 = auto)");
}

TrainConfig to_train_config(const TrainOpts& t, uint64_t seed) {
    TrainConfig cfg;
    cfg.learning_rate = t.lr;
    cfg.dropout = t.dropout;
    cfg.epochs = t.epochs;
    cfg.seed = seed;
    cfg.direction = message_direction_from_string(t.direction);
    cfg.layer_norm = !t.no_layer_norm;
    cfg.sage_dims = t.sage_dims;
    cfg.head_hidden = t.head_hidden;
    if (!t.class_weights.empty()) {
        if (t.class_weights.size() != 2)
            throw_usage("--class-weights takes exactly two values");
        cfg.class_weights = {t.class_weights[0], t.class_weights[1]};
    }
    validate_config(cfg);
    return cfg;
}

ordered_json train_opts_json(const TrainOpts& t) {
    ordered_json j;
    j["seed"] = t.seed;
    j["epochs"] = t.epochs;
    j["learning_rate"] = t.lr;
    j["dropout"] = t.dropout;
    j["direction"] = t.direction;
    j["layer_norm"] = !t.no_layer_norm;
    j["sage_dims"] = t.sage_dims;
    j["head_hidden"] = t.head_hidden;
    if (t.class_weights.size() == 2)
        j["class_weights"] = t.class_weights;
    else
        j["class_weights"] = nullptr;
    j["val_fraction"] = t.val_fraction;
    j["pivots"] = t.pivots;
    return j;
}

struct CorpusData {
    DatasetManifest manifest;
    std::deque<LoadedGraph> graphs;  // same order as manifest entries
};

CorpusData load_corpus(const std::string& manifest_path, uint64_t seed, int pivots) {
    CorpusData data;
    data.manifest = load_manifest(manifest_path);
    std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();
    for (const ManifestEntry& e : data.manifest.entries) {
        std::string path = (dir / e.path).string();
        data.graphs.push_back(load_for_model(path, default_library(), seed, pivots));
        if (!data.graphs.back().netlist.labels)
            throw_validation("netlist '" + e.path + "' carries no register labels");
    }
    return data;
}

std::vector<GraphSample> samples_for(const CorpusData& data, const std::vector<size_t>& idx) {
    std::vector<GraphSample> s;
    for (size_t i : idx) s.push_back({&data.graphs[i].graph, &data.graphs[i].features});
    return s;
}

// ---- train ----

struct TrainArgs {
    std::string manifest, out, exclude_design;
    TrainOpts opts;
};

int run_train(const TrainArgs& a) {
    CorpusData data = load_corpus(a.manifest, a.opts.seed, a.opts.pivots);

    std::vector<size_t> usable;
    for (size_t i = 0; i < data.manifest.entries.size(); ++i)
        if (data.manifest.entries[i].design != a.exclude_design) usable.push_back(i);
    if (usable.empty()) throw_validation("no training graphs left after exclusion");

    Rng rng(a.opts.seed);
    rng.shuffle(usable);
    size_t val_count =
        static_cast<size_t>(a.opts.val_fraction * static_cast<double>(usable.size()));
    std::vector<size_t> val_idx(usable.begin(), usable.begin() + static_cast<long>(val_count));
    std::vector<size_t> train_idx(usable.begin() + static_cast<long>(val_count), usable.end());

    TrainConfig cfg = to_train_config(a.opts, a.opts.seed);
    Checkpoint ckpt = train(samples_for(data, train_idx), samples_for(data, val_idx), cfg);
    save_checkpoint(a.out, ckpt);

    const EpochStats& best = ckpt.trace[static_cast<size_t>(ckpt.best_epoch)];
    std::cout << "trained on " << train_idx.size() << " graphs (" << val_idx.size()
              << " validation); best epoch " << ckpt.best_epoch + 1 << "/" << cfg.epochs;
    if (!val_idx.empty())
        std::cout << ", val balanced accuracy " << best.val_balanced_accuracy;
    std::cout << "\n";
    std::cout << "checkpoint written to " << a.out << "\n";
    return 0;
}

// ---- infer ----

struct InferArgs {
    std::string netlist, checkpoint, out, library;
    bool complete = false;
    uint64_t seed = 1;
    int pivots = 0;
};

int run_infer(const InferArgs& a) {
    LibraryPtr lib = load_library_opt(a.library);
    Checkpoint ckpt = load_checkpoint(a.checkpoint);
    LoadedGraph lg = load_for_model(a.netlist, lib, a.seed, a.pivots);

    std::vector<RegisterPrediction> preds = predict(lg.graph, lg.features, ckpt);
    RegisterLabels raw;
    for (const RegisterPrediction& p : preds) raw[p.id] = p.predicted;

    SccPartition scc = tarjan_scc(lg.graph);
    PostprocessResult rect = rectify(lg.graph, scc, raw);
    std::optional<PostprocessResult> completed;
    if (a.complete) completed = expand_completeness(lg.graph, scc, rect.labels);

    ordered_json config;
    config["netlist"] = a.netlist;
    config["checkpoint"] = a.checkpoint;
    config["complete"] = a.complete;
    config["seed"] = a.seed;
    config["pivots"] = a.pivots;

    ordered_json j;
    j["tool_version"] = kToolVersion;
    j["seed"] = a.seed;
    j["config_hash"] = hash_of(config);
    j["config"] = config;
    j["netlist"] = lg.netlist.name;
    j["n_registers"] = preds.size();

    const RegisterLabels& final_labels = completed ? completed->labels : rect.labels;
    j["predictions"] = ordered_json::array();
    for (const RegisterPrediction& p : preds) {
        ordered_json pj;
        pj["register"] = p.id;
        pj["p_state"] = p.p_state;
        pj["p_data"] = p.p_data;
        pj["raw"] = to_string(p.predicted);
        pj["final"] = to_string(final_labels.at(p.id));
        j["predictions"].push_back(std::move(pj));
    }
    j["flips"] = ordered_json::object();
    j["flips"]["rectify"] = ordered_json::parse(flip_report_json(rect.flips));
    if (completed)
        j["flips"]["completeness"] = ordered_json::parse(flip_report_json(completed->flips));

    if (lg.netlist.labels) {
        const RegisterLabels& truth = *lg.netlist.labels;
        j["evaluation"] = ordered_json::object();
        j["evaluation"]["raw"] = stage_eval_json(confusion(truth, raw));
        j["evaluation"]["rectified"] = stage_eval_json(confusion(truth, rect.labels));
        if (completed)
            j["evaluation"]["completed"] = stage_eval_json(confusion(truth, completed->labels));
    }
    write_file(a.out, j.dump(2) + "\n");

    int n_state = 0;
    for (const auto& [id, cls] : final_labels) {
        (void)id;
        if (cls == RegClass::State) ++n_state;
    }
    std::cout << preds.size() << " registers, " << n_state << " classified as state; report in "
              << a.out << "\n";
    return 0;
}

// ---- relic ----

struct RelicArgs {
    std::string netlist, out, library, preset, sim_csv;
    double t1 = 0.5, t2 = 0.8;
    int t3 = 1, depth = 5;
    bool strict = false;
};

int run_relic(const RelicArgs& a) {
    LibraryPtr lib = load_library_opt(a.library);
    Netlist n = load_any_netlist(a.netlist, lib);

    RelicConfig cfg;
    if (!a.preset.empty()) {
        cfg = relic_preset(a.preset);
    } else {
        cfg.t1 = a.t1;
        cfg.t2 = a.t2;
        cfg.t3 = a.t3;
        cfg.depth = a.depth;
    }
    cfg.strict_pseudocode = a.strict;
    validate_relic_config(cfg);

    Netlist normalized = normalize_to_aoi(n);
    RelicResult res = classify_registers(normalized, cfg);

    ordered_json config;
    config["netlist"] = a.netlist;
    config["preset"] = a.preset.empty() ? ordered_json(nullptr) : ordered_json(a.preset);
    config["t1"] = cfg.t1;
    config["t2"] = cfg.t2;
    config["t3"] = cfg.t3;
    config["depth"] = cfg.depth;
    config["strict_pseudocode"] = cfg.strict_pseudocode;

    ordered_json j;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = hash_of(config);
    j["config"] = config;
    j["netlist"] = n.name;
    j["registers"] = ordered_json::array();
    for (size_t i = 0; i < res.register_ids.size(); ++i) {
        j["registers"].push_back({{"register", res.register_ids[i]},
                                  {"pair_count", res.pair_counts[i]},
                                  {"label", to_string(res.labels.at(res.register_ids[i]))}});
    }
    if (n.labels) j["evaluation"] = stage_eval_json(confusion(*n.labels, res.labels));
    write_file(a.out, j.dump(2) + "\n");
    if (!a.sim_csv.empty()) write_file(a.sim_csv, similarity_csv(res));

    int n_state = 0;
    for (const auto& [id, cls] : res.labels) {
        (void)id;
        if (cls == RegClass::State) ++n_state;
    }
    std::cout << res.register_ids.size() << " registers, " << n_state
              << " classified as state; report in " << a.out << "\n";
    return 0;
}

// ---- xval ----

struct XvalArgs {
    std::string manifest, out;
    bool complete = false;
    TrainOpts opts;
};

int run_xval(const XvalArgs& a) {
    CorpusData data = load_corpus(a.manifest, a.opts.seed, a.opts.pivots);
    std::vector<std::string> designs = data.manifest.design_names();

    std::vector<EvaluatedGraph> evaluated;
    ordered_json folds = ordered_json::array();
    for (size_t f = 0; f < designs.size(); ++f) {
        const std::string& design = designs[f];
        uint64_t fold_seed = a.opts.seed ^ fnv1a64(design);
        FoldPlan plan = make_folds(data.manifest, design, a.opts.val_fraction, fold_seed);

        TrainConfig cfg = to_train_config(a.opts, fold_seed);
        Checkpoint ckpt =
            train(samples_for(data, plan.train), samples_for(data, plan.val), cfg);

        for (size_t idx : plan.test) {
            const LoadedGraph& lg = data.graphs[idx];
            std::vector<RegisterPrediction> preds = predict(lg.graph, lg.features, ckpt);
            RegisterLabels raw;
            for (const RegisterPrediction& p : preds) raw[p.id] = p.predicted;
            SccPartition scc = tarjan_scc(lg.graph);
            PostprocessResult rect = rectify(lg.graph, scc, raw);

            EvaluatedGraph eg;
            eg.entry = data.manifest.entries[idx];
            eg.raw = confusion(*lg.netlist.labels, raw);
            eg.rectified = confusion(*lg.netlist.labels, rect.labels);
            if (a.complete) {
                PostprocessResult comp = expand_completeness(lg.graph, scc, rect.labels);
                eg.completed = confusion(*lg.netlist.labels, comp.labels);
            }
            evaluated.push_back(std::move(eg));
        }

        const EpochStats& best = ckpt.trace[static_cast<size_t>(ckpt.best_epoch)];
        ordered_json fold = {{"design", design},
                             {"train_graphs", plan.train.size()},
                             {"val_graphs", plan.val.size()},
                             {"test_graphs", plan.test.size()},
                             {"best_epoch", ckpt.best_epoch + 1}};
        fold["val_balanced_accuracy"] =
            plan.val.empty() ? ordered_json() : ordered_json(best.val_balanced_accuracy);
        folds.push_back(std::move(fold));
        std::cerr << "fold " << f + 1 << "/" << designs.size() << " (" << design
                  << "): best epoch " << ckpt.best_epoch + 1;
        if (!plan.val.empty()) std::cerr << ", val ba " << best.val_balanced_accuracy;
        std::cerr << "\n";
    }

    ordered_json config = train_opts_json(a.opts);
    config["manifest"] = a.manifest;
    config["complete"] = a.complete;
    std::string report =
        metrics_report_json(evaluated, config.dump(), a.opts.seed, "folds", folds.dump());
    write_file(a.out, report);

    StageAggregate rect = aggregate_stage(evaluated, &EvaluatedGraph::rectified);
    std::cout << "cross validation over " << designs.size() << " designs, "
              << evaluated.size() << " held-out graphs\n";
    auto show = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("n/a");
    };
    std::cout << "rectified corpus means: sensitivity " << show(rect.corpus.sensitivity)
              << ", specificity " << show(rect.corpus.specificity) << ", balanced accuracy "
              << show(rect.corpus.balanced_accuracy) << "\n";
    std::cout << "report written to " << a.out << "\n";
    return 0;
}

// ---- ckpt-inspect ----

struct InspectArgs {
    std::string checkpoint;
};

int run_inspect(const InspectArgs& a) {
    std::cout << checkpoint_header_json(read_file(a.checkpoint));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"register classification toolkit for gate-level netlists"};
    app.set_version_flag("--version", kToolVersion);
    app.set_config("--config", "", "read options from a TOML/INI file");
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate the synthetic labeled benchmark corpus");
    gen->add_option("--out", gen_args.out_dir, "output directory")->required();
    gen->add_option("--seed", gen_args.seed, "corpus seed");
    gen->add_option("--archetypes", gen_args.archetypes, "subset of design archetypes")
        ->delimiter(',');
    gen->add_option("--variants", gen_args.variants, "structural variants per design (1-4)");
    gen->add_option("--encodings", gen_args.encodings, "state encodings: onehot, binary")
        ->delimiter(',');

    FeaturizeArgs feat_args;
    CLI::App* feat = app.add_subcommand("featurize", "extract node features from a netlist");
    feat->add_option("--netlist", feat_args.netlist, "input netlist (.json or .v)")->required();
    feat->add_option("--out", feat_args.out, "output feature file")->required();
    feat->add_option("--library", feat_args.library, "cell library manifest");
    feat->add_option("--seed", feat_args.seed, "pivot sampling seed");
    feat->add_option("--pivots", feat_args.pivots, "betweenness pivot count (0 = auto)");

    TrainArgs train_args;
    CLI::App* tr = app.add_subcommand("train", "train the register classifier on a corpus");
    tr->add_option("--manifest", train_args.manifest, "corpus manifest.json")->required();
    tr->add_option("--out", train_args.out, "output checkpoint path")->required();
    tr->add_option("--exclude-design", train_args.exclude_design,
                   "drop one design from training entirely");
    add_train_opts(tr, train_args.opts);

    InferArgs infer_args;
    CLI::App* inf = app.add_subcommand("infer", "classify the registers of one netlist");
    inf->add_option("--netlist", infer_args.netlist, "input netlist (.json or .v)")->required();
    inf->add_option("--checkpoint", infer_args.checkpoint, "trained checkpoint")->required();
    inf->add_option("--out", infer_args.out, "output report path")->required();
    inf->add_option("--library", infer_args.library, "cell library manifest");
    inf->add_flag("--complete", infer_args.complete,
                  "also spread state labels across shared cycle components");
    inf->add_option("--seed", infer_args.seed, "pivot sampling seed");
    inf->add_option("--pivots", infer_args.pivots, "betweenness pivot count (0 = auto)");

    RelicArgs relic_args;
    CLI::App* rl = app.add_subcommand("relic", "structural fan-in similarity baseline");
    rl->add_option("--netlist", relic_args.netlist, "input netlist (.json or .v)")->required();
    rl->add_option("--out", relic_args.out, "output report path")->required();
    rl->add_option("--library", relic_args.library, "cell library manifest");
    rl->add_option("--preset", relic_args.preset, "parameter preset: P1, P2 or P3");
    rl->add_option("--t1", relic_args.t1, "child-pair similarity threshold");
    rl->add_option("--t2", relic_args.t2, "register-pair similarity threshold");
    rl->add_option("--t3", relic_args.t3, "max qualifying pairs for a state register");
    rl->add_option("--depth", relic_args.depth, "recursion depth");
    rl->add_flag("--strict", relic_args.strict, "count ordered pairs including self-pairs");
    rl->add_option("--sim-csv", relic_args.sim_csv, "also write the similarity matrix as CSV");

    XvalArgs xval_args;
    CLI::App* xv = app.add_subcommand("xval", "leave-one-design-out cross validation");
    xv->add_option("--manifest", xval_args.manifest, "corpus manifest.json")->required();
    xv->add_option("--out", xval_args.out, "output report path")->required();
    xv->add_flag("--complete", xval_args.complete,
                 "also evaluate the cycle-completion stage");
    add_train_opts(xv, xval_args.opts);

    InspectArgs inspect_args;
    CLI::App* ins = app.add_subcommand("ckpt-inspect", "print a checkpoint's JSON header");
    ins->add_option("--checkpoint", inspect_args.checkpoint, "checkpoint path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return run_gen(gen_args);
        if (feat->parsed()) return run_featurize(feat_args);
        if (tr->parsed()) return run_train(train_args);
        if (inf->parsed()) return run_infer(infer_args);
        if (rl->parsed()) return run_relic(relic_args);
        if (xv->parsed()) return run_xval(xval_args);
        if (ins->parsed()) return run_inspect(inspect_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Usage: return 1;
            case ErrorKind::Validation: return 2;
            case ErrorKind::Numeric: return 3;
        }
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
