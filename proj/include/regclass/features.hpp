#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regclass/graph.hpp"

namespace regclass {

// Row layout: [one-hot kind (K), in-degree, out-degree, betweenness,
// harmonic, 1-hop neighborhood kind histogram (K)], length 2K + 4.
// Degrees count edges; the histogram counts distinct neighbor nodes over the
// union of in- and out-neighbors, excluding the node itself.
struct FeatureSchema {
    std::string library_fingerprint;
    int kind_count = 0;

    // Standardization statistics for columns [K, 2K+4), fit on training data.
    // Constant columns keep stddev 0 and are passed through unscaled.
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant;
    bool has_statistics = false;

    int feature_length() const { return 2 * kind_count + 4; }
    int continuous_offset() const { return kind_count; }
    int continuous_count() const { return kind_count + 4; }
    std::vector<std::string> feature_names(const CellLibrary& lib) const;
};

FeatureSchema make_schema(const CellLibrary& lib);

struct FeatureMatrix {
    FeatureSchema schema;
    int rows = 0;
    std::vector<double> values;  // row-major, rows x feature_length
    std::vector<bool> is_register;
    // Per row: -1 unlabeled, 0 state, 1 data. Set only on register rows.
    std::vector<int> labels;
    bool standardized = false;

    double* row(int r) { return values.data() + static_cast<size_t>(r) * static_cast<size_t>(schema.feature_length()); }
    const double* row(int r) const { return values.data() + static_cast<size_t>(r) * static_cast<size_t>(schema.feature_length()); }
};

// Builds the matrix; labels are copied from the netlist's labels block when
// given. Throws when the schema fingerprint does not match the graph library.
FeatureMatrix extract_features(const CircuitGraph& g, const std::vector<double>& betweenness,
                               const std::vector<double>& harmonic, const FeatureSchema& schema,
                               const std::optional<RegisterLabels>& labels);

// Population mean/stddev over all nodes of all training graphs for the
// continuous block. Columns with zero spread are flagged constant.
FeatureSchema fit_standardizer(const std::vector<const FeatureMatrix*>& train,
                               const FeatureSchema& schema);

// In-place (x - mean) / stddev on non-constant continuous columns. Throws if
// the matrix was already transformed or the schema carries no statistics.
void apply_standardizer(FeatureMatrix& m, const FeatureSchema& fitted);

// Columnar binary file with an embedded schema header.
std::string encode_feature_file(const FeatureMatrix& m, const CellLibrary& lib);
FeatureMatrix decode_feature_file(const std::string& bytes);
void save_feature_file(const std::string& path, const FeatureMatrix& m, const CellLibrary& lib);
FeatureMatrix load_feature_file(const std::string& path);

}  // namespace regclass
