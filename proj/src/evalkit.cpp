#include "regclass/evalkit.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>

#include "regclass/util.hpp"

namespace regclass {

ConfusionCounts confusion(const RegisterLabels& truth, const RegisterLabels& predicted) {
    ConfusionCounts c;
    for (const auto& [id, actual] : truth) {
        auto it = predicted.find(id);
        if (it == predicted.end())
            throw_validation("prediction missing for register '" + id + "'");
        bool pred_state = it->second == RegClass::State;
        if (actual == RegClass::State)
            (pred_state ? c.tp : c.fn) += 1;
        else
            (pred_state ? c.fp : c.tn) += 1;
    }
    for (const auto& [id, cls] : predicted) {
        (void)cls;
        if (!truth.count(id))
            throw_validation("prediction for unknown register '" + id + "'");
    }
    return c;
}

Metrics metrics(const ConfusionCounts& c) {
    Metrics m;
    if (c.tp + c.fn > 0)
        m.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tn + c.fp > 0)
        m.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    if (m.sensitivity && m.specificity)
        m.balanced_accuracy = (*m.sensitivity + *m.specificity) / 2.0;
    return m;
}

std::vector<std::string> DatasetManifest::design_names() const {
    std::vector<std::string> names;
    for (const ManifestEntry& e : entries)
        if (std::find(names.begin(), names.end(), e.design) == names.end())
            names.push_back(e.design);
    return names;
}

std::string emit_manifest(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["tool_version"] = m.tool_version;
    j["seed"] = m.seed;
    j["config_hash"] = m.config_hash;
    j["entries"] = nlohmann::ordered_json::array();
    for (const ManifestEntry& e : m.entries) {
        j["entries"].push_back({{"design", e.design},
                                {"variant", e.variant},
                                {"encoding", e.encoding},
                                {"path", e.path},
                                {"n_registers", e.n_registers},
                                {"n_state_registers", e.n_state_registers}});
    }
    return j.dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("manifest is not valid JSON: ") + e.what());
    }
    DatasetManifest m;
    try {
        m.tool_version = j.at("tool_version").get<std::string>();
        m.seed = j.at("seed").get<uint64_t>();
        m.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& je : j.at("entries")) {
            ManifestEntry e;
            e.design = je.at("design").get<std::string>();
            e.variant = je.at("variant").get<int>();
            e.encoding = je.at("encoding").get<std::string>();
            e.path = je.at("path").get<std::string>();
            e.n_registers = je.at("n_registers").get<int>();
            e.n_state_registers = je.at("n_state_registers").get<int>();
            m.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("manifest schema violation: ") + e.what());
    }
    return m;
}

void save_manifest(const std::string& path, const DatasetManifest& m) {
    write_file(path, emit_manifest(m));
}

DatasetManifest load_manifest(const std::string& path) {
    return parse_manifest(read_file(path));
}

FoldPlan make_folds(const DatasetManifest& manifest, const std::string& holdout_design,
                    double val_fraction, uint64_t seed) {
    if (val_fraction < 0 || val_fraction >= 1)
        throw_validation("validation fraction must be in [0, 1)");
    FoldPlan plan;
    plan.holdout_design = holdout_design;
    plan.seed = seed;

    std::vector<size_t> rest;
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        if (manifest.entries[i].design == holdout_design)
            plan.test.push_back(i);
        else
            rest.push_back(i);
    }
    if (plan.test.empty())
        throw_validation("manifest has no design named '" + holdout_design + "'");

    Rng rng(seed);
    rng.shuffle(rest);
    size_t val_count = static_cast<size_t>(val_fraction * static_cast<double>(rest.size()));
    plan.val.assign(rest.begin(), rest.begin() + static_cast<long>(val_count));
    plan.train.assign(rest.begin() + static_cast<long>(val_count), rest.end());
    std::sort(plan.val.begin(), plan.val.end());
    std::sort(plan.train.begin(), plan.train.end());
    return plan;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    int n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

StageAggregate aggregate_stage(const std::vector<EvaluatedGraph>& graphs,
                               ConfusionCounts EvaluatedGraph::*stage) {
    StageAggregate agg;
    std::vector<std::string> designs;
    for (const EvaluatedGraph& g : graphs)
        if (std::find(designs.begin(), designs.end(), g.entry.design) == designs.end())
            designs.push_back(g.entry.design);

    std::vector<std::optional<double>> corpus_sens, corpus_spec, corpus_ba;
    for (const std::string& design : designs) {
        std::vector<std::optional<double>> sens, spec, ba;
        for (const EvaluatedGraph& g : graphs) {
            if (g.entry.design != design) continue;
            Metrics m = metrics(g.*stage);
            sens.push_back(m.sensitivity);
            spec.push_back(m.specificity);
            ba.push_back(m.balanced_accuracy);
            if (!m.sensitivity)
                agg.warnings.push_back("sensitivity undefined for " + g.entry.path +
                                       " (no true state registers)");
            if (!m.specificity)
                agg.warnings.push_back("specificity undefined for " + g.entry.path +
                                       " (no true data registers)");
        }
        Metrics dm;
        dm.sensitivity = mean_defined(sens);
        dm.specificity = mean_defined(spec);
        dm.balanced_accuracy = mean_defined(ba);
        agg.per_design.emplace_back(design, dm);
        corpus_sens.push_back(dm.sensitivity);
        corpus_spec.push_back(dm.specificity);
        corpus_ba.push_back(dm.balanced_accuracy);
    }
    agg.corpus.sensitivity = mean_defined(corpus_sens);
    agg.corpus.specificity = mean_defined(corpus_spec);
    agg.corpus.balanced_accuracy = mean_defined(corpus_ba);
    return agg;
}

namespace {

nlohmann::ordered_json metrics_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["sensitivity"] = m.sensitivity ? nlohmann::ordered_json(*m.sensitivity)
                                     : nlohmann::ordered_json(nullptr);
    j["specificity"] = m.specificity ? nlohmann::ordered_json(*m.specificity)
                                     : nlohmann::ordered_json(nullptr);
    j["balanced_accuracy"] = m.balanced_accuracy ? nlohmann::ordered_json(*m.balanced_accuracy)
                                                 : nlohmann::ordered_json(nullptr);
    return j;
}

nlohmann::ordered_json counts_json(const ConfusionCounts& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

nlohmann::ordered_json stage_json(const std::vector<EvaluatedGraph>& graphs,
                                  ConfusionCounts EvaluatedGraph::*stage) {
    StageAggregate agg = aggregate_stage(graphs, stage);
    nlohmann::ordered_json j;
    j["per_design"] = nlohmann::ordered_json::object();
    for (const auto& [design, m] : agg.per_design) j["per_design"][design] = metrics_json(m);
    j["corpus"] = metrics_json(agg.corpus);
    j["warnings"] = agg.warnings;
    return j;
}

}  // namespace

std::string metrics_report_json(const std::vector<EvaluatedGraph>& graphs,
                                const std::string& config_echo_json, uint64_t seed,
                                const std::string& extra_section_name,
                                const std::string& extra_section_json) {
    nlohmann::ordered_json config;
    try {
        config = nlohmann::ordered_json::parse(config_echo_json);
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("config echo is not valid JSON: ") + e.what());
    }

    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["seed"] = seed;
    j["config_hash"] = to_hex64(fnv1a64(config.dump()));
    j["config"] = config;

    bool any_completed = false;
    j["graphs"] = nlohmann::ordered_json::array();
    for (const EvaluatedGraph& g : graphs) {
        nlohmann::ordered_json je;
        je["design"] = g.entry.design;
        je["variant"] = g.entry.variant;
        je["encoding"] = g.entry.encoding;
        je["path"] = g.entry.path;
        je["raw"] = {{"counts", counts_json(g.raw)}, {"metrics", metrics_json(metrics(g.raw))}};
        je["rectified"] = {{"counts", counts_json(g.rectified)},
                           {"metrics", metrics_json(metrics(g.rectified))}};
        if (g.completed) {
            je["completed"] = {{"counts", counts_json(*g.completed)},
                               {"metrics", metrics_json(metrics(*g.completed))}};
            any_completed = true;
        }
        j["graphs"].push_back(std::move(je));
    }

    j["stages"] = nlohmann::ordered_json::object();
    j["stages"]["raw"] = stage_json(graphs, &EvaluatedGraph::raw);
    j["stages"]["rectified"] = stage_json(graphs, &EvaluatedGraph::rectified);
    if (any_completed) {
        std::vector<EvaluatedGraph> completed = graphs;
        for (EvaluatedGraph& g : completed) {
            if (!g.completed)
                throw_validation("completion stage present for only part of the graphs");
            g.raw = *g.completed;
        }
        j["stages"]["completed"] = stage_json(completed, &EvaluatedGraph::raw);
    }

    if (!extra_section_name.empty()) {
        try {
            j[extra_section_name] = nlohmann::ordered_json::parse(extra_section_json);
        } catch (const nlohmann::json::exception& e) {
            throw_validation(std::string("extra report section is not valid JSON: ") + e.what());
        }
    }
    return j.dump(2) + "\n";
}

}  // namespace regclass
