#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regclass/netlist.hpp"

namespace regclass {

// State registers are the positive class.
struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
};

ConfusionCounts confusion(const RegisterLabels& truth, const RegisterLabels& predicted);

// A metric with a zero denominator is reported as absent and excluded from
// aggregates; balanced accuracy needs both constituents.
struct Metrics {
    std::optional<double> sensitivity, specificity, balanced_accuracy;
};

Metrics metrics(const ConfusionCounts& c);

struct ManifestEntry {
    std::string design;
    int variant = 0;
    std::string encoding;  // "onehot" | "binary"
    std::string path;      // relative to the manifest file
    int n_registers = 0;
    int n_state_registers = 0;
};

struct DatasetManifest {
    std::string tool_version;
    uint64_t seed = 0;
    std::string config_hash;
    std::vector<ManifestEntry> entries;

    std::vector<std::string> design_names() const;  // unique, in first-seen order
};

std::string emit_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(const std::string& json_text);
void save_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::string& path);

// One leave-one-design-out fold: all variants and encodings of the holdout
// design form the test set; the rest splits into train and validation by a
// seeded shuffle, |val| = floor(val_fraction * remaining).
struct FoldPlan {
    std::string holdout_design;
    uint64_t seed = 0;
    std::vector<size_t> test, train, val;  // indices into manifest entries
};

FoldPlan make_folds(const DatasetManifest& manifest, const std::string& holdout_design,
                    double val_fraction, uint64_t seed);

// Evaluation of one graph at the pipeline stages the CLI reports.
struct EvaluatedGraph {
    ManifestEntry entry;
    ConfusionCounts raw, rectified;
    std::optional<ConfusionCounts> completed;
};

// Mean over the defined values; absent when none are defined.
std::optional<double> mean_defined(const std::vector<std::optional<double>>& values);

struct StageAggregate {
    Metrics corpus;  // macro-average over designs
    std::vector<std::pair<std::string, Metrics>> per_design;
    std::vector<std::string> warnings;  // undefined-metric exclusions
};

StageAggregate aggregate_stage(const std::vector<EvaluatedGraph>& graphs,
                               ConfusionCounts EvaluatedGraph::*stage);

// MetricsReport JSON: per-graph counts and metrics for every stage, then
// per-design and corpus macro-averages. config_echo_json must be a JSON
// object (already serialized); it is embedded verbatim.
std::string metrics_report_json(const std::vector<EvaluatedGraph>& graphs,
                                const std::string& config_echo_json, uint64_t seed,
                                const std::string& extra_section_name = "",
                                const std::string& extra_section_json = "");

}  // namespace regclass
