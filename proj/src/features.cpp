#include "regclass/features.hpp"

#include <algorithm>
#include <cmath>

#include "regclass/util.hpp"

namespace regclass {

std::vector<std::string> FeatureSchema::feature_names(const CellLibrary& lib) const {
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(feature_length()));
    for (int k = 0; k < kind_count; ++k) names.push_back("kind_" + lib.kind(k).name);
    names.push_back("in_degree");
    names.push_back("out_degree");
    names.push_back("betweenness");
    names.push_back("harmonic");
    for (int k = 0; k < kind_count; ++k) names.push_back("nbr_" + lib.kind(k).name);
    return names;
}

FeatureSchema make_schema(const CellLibrary& lib) {
    FeatureSchema s;
    s.library_fingerprint = lib.fingerprint();
    s.kind_count = lib.size();
    return s;
}

FeatureMatrix extract_features(const CircuitGraph& g, const std::vector<double>& betweenness,
                               const std::vector<double>& harmonic, const FeatureSchema& schema,
                               const std::optional<RegisterLabels>& labels) {
    if (schema.library_fingerprint != g.library->fingerprint())
        throw_validation("feature schema was built for a different cell library");
    const int n = g.node_count();
    if (static_cast<int>(betweenness.size()) != n || static_cast<int>(harmonic.size()) != n)
        throw_validation("centrality vector length does not match the graph");

    const int K = schema.kind_count;
    const int len = schema.feature_length();
    FeatureMatrix m;
    m.schema = schema;
    m.rows = n;
    m.values.assign(static_cast<size_t>(n) * static_cast<size_t>(len), 0.0);
    m.is_register = g.is_register;
    m.labels.assign(static_cast<size_t>(n), -1);

    std::vector<int> neighbors;
    for (int v = 0; v < n; ++v) {
        double* row = m.row(v);
        row[g.node_kinds[static_cast<size_t>(v)]] = 1.0;
        row[K + 0] = static_cast<double>(g.in_degree(v));
        row[K + 1] = static_cast<double>(g.out_degree(v));
        row[K + 2] = betweenness[static_cast<size_t>(v)];
        row[K + 3] = harmonic[static_cast<size_t>(v)];

        neighbors.assign(g.in_begin(v), g.in_end(v));
        neighbors.insert(neighbors.end(), g.out_begin(v), g.out_end(v));
        std::sort(neighbors.begin(), neighbors.end());
        neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());
        for (int u : neighbors)
            if (u != v) row[K + 4 + g.node_kinds[static_cast<size_t>(u)]] += 1.0;

        if (labels && g.is_register[static_cast<size_t>(v)]) {
            auto it = labels->find(g.node_names[static_cast<size_t>(v)]);
            if (it != labels->end())
                m.labels[static_cast<size_t>(v)] = it->second == RegClass::State ? 0 : 1;
        }
    }
    return m;
}

FeatureSchema fit_standardizer(const std::vector<const FeatureMatrix*>& train,
                               const FeatureSchema& schema) {
    if (train.empty()) throw_validation("standardizer needs at least one training matrix");
    const int off = schema.continuous_offset();
    const int cc = schema.continuous_count();

    size_t total = 0;
    for (const FeatureMatrix* m : train) {
        if (m->schema.library_fingerprint != schema.library_fingerprint)
            throw_validation("training matrices were built for a different cell library");
        if (m->standardized)
            throw_validation("standardizer input was already transformed");
        total += static_cast<size_t>(m->rows);
    }
    if (total == 0) throw_validation("standardizer needs at least one node row");

    std::vector<double> mean(static_cast<size_t>(cc), 0.0);
    std::vector<double> lo(static_cast<size_t>(cc), 0.0), hi(static_cast<size_t>(cc), 0.0);
    bool first_row = true;
    for (const FeatureMatrix* m : train) {
        for (int r = 0; r < m->rows; ++r) {
            const double* row = m->row(r);
            for (int c = 0; c < cc; ++c) {
                double x = row[off + c];
                mean[static_cast<size_t>(c)] += x;
                if (first_row) {
                    lo[static_cast<size_t>(c)] = hi[static_cast<size_t>(c)] = x;
                } else {
                    lo[static_cast<size_t>(c)] = std::min(lo[static_cast<size_t>(c)], x);
                    hi[static_cast<size_t>(c)] = std::max(hi[static_cast<size_t>(c)], x);
                }
            }
            first_row = false;
        }
    }
    for (double& x : mean) x /= static_cast<double>(total);

    std::vector<double> var(static_cast<size_t>(cc), 0.0);
    for (const FeatureMatrix* m : train) {
        for (int r = 0; r < m->rows; ++r) {
            const double* row = m->row(r);
            for (int c = 0; c < cc; ++c) {
                double d = row[off + c] - mean[static_cast<size_t>(c)];
                var[static_cast<size_t>(c)] += d * d;
            }
        }
    }

    FeatureSchema fitted = schema;
    fitted.mean = mean;
    fitted.stddev.assign(static_cast<size_t>(cc), 0.0);
    fitted.constant.assign(static_cast<size_t>(cc), false);
    for (int c = 0; c < cc; ++c) {
        if (lo[static_cast<size_t>(c)] == hi[static_cast<size_t>(c)]) {
            fitted.constant[static_cast<size_t>(c)] = true;
        } else {
            fitted.stddev[static_cast<size_t>(c)] =
                std::sqrt(var[static_cast<size_t>(c)] / static_cast<double>(total));
        }
    }
    fitted.has_statistics = true;
    return fitted;
}

void apply_standardizer(FeatureMatrix& m, const FeatureSchema& fitted) {
    if (!fitted.has_statistics) throw_validation("feature schema carries no statistics");
    if (m.standardized) throw_validation("feature matrix was already standardized");
    if (m.schema.library_fingerprint != fitted.library_fingerprint)
        throw_validation("feature schema was built for a different cell library");
    const int off = fitted.continuous_offset();
    const int cc = fitted.continuous_count();
    for (int r = 0; r < m.rows; ++r) {
        double* row = m.row(r);
        for (int c = 0; c < cc; ++c) {
            if (fitted.constant[static_cast<size_t>(c)]) continue;
            row[off + c] = (row[off + c] - fitted.mean[static_cast<size_t>(c)]) /
                           fitted.stddev[static_cast<size_t>(c)];
        }
    }
    m.schema = fitted;
    m.standardized = true;
}

namespace {
constexpr uint32_t kFeatureMagic = 0x54464352;  // "RCFT"
constexpr uint32_t kFeatureVersion = 1;
}  // namespace

std::string encode_feature_file(const FeatureMatrix& m, const CellLibrary& lib) {
    if (lib.fingerprint() != m.schema.library_fingerprint)
        throw_validation("feature matrix does not belong to this cell library");
    ByteWriter w;
    w.u32(kFeatureMagic);
    w.u32(kFeatureVersion);
    w.str(m.schema.library_fingerprint);
    w.u32(static_cast<uint32_t>(m.schema.kind_count));
    w.u32(static_cast<uint32_t>(m.rows));
    for (const std::string& name : m.schema.feature_names(lib)) w.str(name);
    w.u8(m.standardized ? 1 : 0);
    w.u8(m.schema.has_statistics ? 1 : 0);
    if (m.schema.has_statistics) {
        w.f64_array(m.schema.mean);
        w.f64_array(m.schema.stddev);
        w.u64(m.schema.constant.size());
        for (bool b : m.schema.constant) w.u8(b ? 1 : 0);
    }
    for (int r = 0; r < m.rows; ++r) w.u8(m.is_register[static_cast<size_t>(r)] ? 1 : 0);
    for (int r = 0; r < m.rows; ++r)
        w.u8(static_cast<uint8_t>(m.labels[static_cast<size_t>(r)] + 1));
    // Columnar payload: all rows of feature 0, then feature 1, ...
    const int len = m.schema.feature_length();
    for (int c = 0; c < len; ++c)
        for (int r = 0; r < m.rows; ++r) w.f64(m.row(r)[c]);
    return w.bytes();
}

FeatureMatrix decode_feature_file(const std::string& bytes) {
    ByteReader r(bytes);
    if (r.u32() != kFeatureMagic) throw_validation("not a feature file (bad magic)");
    if (r.u32() != kFeatureVersion) throw_validation("unsupported feature file version");
    FeatureMatrix m;
    m.schema.library_fingerprint = r.str();
    m.schema.kind_count = static_cast<int>(r.u32());
    if (m.schema.kind_count <= 0 || m.schema.kind_count > 4096)
        throw_validation("feature file kind count out of range");
    m.rows = static_cast<int>(r.u32());
    const int len = m.schema.feature_length();
    for (int i = 0; i < len; ++i) r.str();  // names are informational
    m.standardized = r.u8() != 0;
    m.schema.has_statistics = r.u8() != 0;
    if (m.schema.has_statistics) {
        m.schema.mean = r.f64_array();
        m.schema.stddev = r.f64_array();
        uint64_t cn = r.u64();
        m.schema.constant.resize(static_cast<size_t>(cn));
        for (size_t i = 0; i < cn; ++i) m.schema.constant[i] = r.u8() != 0;
        size_t cc = static_cast<size_t>(m.schema.continuous_count());
        if (m.schema.mean.size() != cc || m.schema.stddev.size() != cc ||
            m.schema.constant.size() != cc)
            throw_validation("feature file statistics have the wrong length");
    }
    m.is_register.resize(static_cast<size_t>(m.rows));
    for (int i = 0; i < m.rows; ++i) m.is_register[static_cast<size_t>(i)] = r.u8() != 0;
    m.labels.resize(static_cast<size_t>(m.rows));
    for (int i = 0; i < m.rows; ++i) {
        int lab = static_cast<int>(r.u8()) - 1;
        if (lab < -1 || lab > 1) throw_validation("feature file label out of range");
        m.labels[static_cast<size_t>(i)] = lab;
    }
    m.values.assign(static_cast<size_t>(m.rows) * static_cast<size_t>(len), 0.0);
    for (int c = 0; c < len; ++c)
        for (int row = 0; row < m.rows; ++row) m.row(row)[c] = r.f64();
    r.expect_end();
    return m;
}

void save_feature_file(const std::string& path, const FeatureMatrix& m, const CellLibrary& lib) {
    write_file(path, encode_feature_file(m, lib));
}

FeatureMatrix load_feature_file(const std::string& path) {
    return decode_feature_file(read_file(path));
}

}  // namespace regclass
