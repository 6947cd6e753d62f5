#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "regclass/features.hpp"
#include "regclass/graph.hpp"
#include "regclass/netlist_json.hpp"
#include "regclass/util.hpp"

using namespace regclass;

namespace {

Netlist small_netlist() {
    LibraryPtr lib = default_library();
    Netlist n;
    n.name = "feat";
    n.library = lib;
    n.primary_inputs = {"a", "b"};
    n.primary_outputs = {"y"};
    n.nets = {"a", "b", "w", "q", "y"};
    Instance g0;
    g0.id = "g0";
    g0.kind = lib->index_of("AND2");
    g0.inputs = {"a", "b"};
    g0.output = "w";
    Instance r0;
    r0.id = "r0";
    r0.kind = lib->index_of("DFF");
    r0.inputs = {"w"};
    r0.output = "q";
    Instance g1;
    g1.id = "g1";
    g1.kind = lib->index_of("INV");
    g1.inputs = {"q"};
    g1.output = "y";
    n.instances = {g0, r0, g1};
    n.labels = RegisterLabels{{"r0", RegClass::State}};
    return n;
}

std::vector<double> iota_like(int n, double base) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = base + i;
    return v;
}

}  // namespace

TEST_CASE("feature rows follow the documented layout") {
    Netlist n = small_netlist();
    CircuitGraph g = build_graph(n);
    FeatureSchema schema = make_schema(*n.library);
    const int K = schema.kind_count;
    CHECK(K == 11);
    CHECK(schema.feature_length() == 26);
    CHECK(schema.continuous_offset() == K);
    CHECK(schema.continuous_count() == K + 4);

    std::vector<std::string> names = schema.feature_names(*n.library);
    REQUIRE(static_cast<int>(names.size()) == schema.feature_length());
    CHECK(names[0] == "kind_INPUT");
    CHECK(names[static_cast<size_t>(K)] == "in_degree");
    CHECK(names[static_cast<size_t>(K) + 1] == "out_degree");
    CHECK(names[static_cast<size_t>(K) + 2] == "betweenness");
    CHECK(names[static_cast<size_t>(K) + 3] == "harmonic");
    CHECK(names[static_cast<size_t>(K) + 4] == "nbr_INPUT");

    std::vector<double> bw = iota_like(g.node_count(), 0.5);
    std::vector<double> hc = iota_like(g.node_count(), 100.0);
    FeatureMatrix m = extract_features(g, bw, hc, schema, n.labels);

    REQUIRE(m.rows == g.node_count());
    CHECK_FALSE(m.standardized);

    // node order: g0, r0, g1, a, b, y
    const int kAnd = n.library->index_of("AND2");
    const int kDff = n.library->index_of("DFF");
    const int kInv = n.library->index_of("INV");
    const int kIn = n.library->input_port_kind();
    const int kOut = n.library->output_port_kind();

    const double* g0row = m.row(0);
    for (int i = 0; i < K; ++i) CHECK(g0row[i] == (i == kAnd ? 1.0 : 0.0));
    CHECK(g0row[K] == 2.0);      // in-degree
    CHECK(g0row[K + 1] == 1.0);  // out-degree
    CHECK(g0row[K + 2] == 0.5);
    CHECK(g0row[K + 3] == 100.0);
    CHECK(g0row[K + 4 + kIn] == 2.0);   // neighbors a, b
    CHECK(g0row[K + 4 + kDff] == 1.0);  // neighbor r0
    CHECK(g0row[K + 4 + kInv] == 0.0);

    const double* r0row = m.row(1);
    CHECK(r0row[kDff] == 1.0);
    CHECK(r0row[K + 4 + kAnd] == 1.0);
    CHECK(r0row[K + 4 + kInv] == 1.0);

    const double* yrow = m.row(5);
    CHECK(yrow[kOut] == 1.0);
    CHECK(yrow[K] == 1.0);
    CHECK(yrow[K + 1] == 0.0);

    CHECK(m.is_register == std::vector<bool>{false, true, false, false, false, false});
    CHECK(m.labels == std::vector<int>{-1, 0, -1, -1, -1, -1});
}

TEST_CASE("duplicated inputs count as edges for degree but once for the histogram") {
    LibraryPtr lib = default_library();
    Netlist n;
    n.name = "dup";
    n.library = lib;
    n.primary_inputs = {"a"};
    n.primary_outputs = {"y"};
    n.nets = {"a", "y"};
    Instance g0;
    g0.id = "g0";
    g0.kind = lib->index_of("AND2");
    g0.inputs = {"a", "a"};
    g0.output = "y";
    n.instances = {g0};

    CircuitGraph g = build_graph(n);
    FeatureSchema schema = make_schema(*lib);
    const int K = schema.kind_count;
    FeatureMatrix m = extract_features(g, std::vector<double>(3, 0.0),
                                       std::vector<double>(3, 0.0), schema, n.labels);
    const double* row = m.row(0);
    CHECK(row[K] == 2.0);                                     // two parallel in-edges
    CHECK(row[K + 4 + lib->input_port_kind()] == 1.0);        // one distinct neighbor
    CHECK(row[K + 4 + lib->output_port_kind()] == 1.0);
}

TEST_CASE("extract_features rejects mismatched inputs") {
    Netlist n = small_netlist();
    CircuitGraph g = build_graph(n);
    FeatureSchema schema = make_schema(*n.library);
    std::vector<double> ok(static_cast<size_t>(g.node_count()), 0.0);

    std::vector<double> wrong(static_cast<size_t>(g.node_count()) + 1, 0.0);
    CHECK_THROWS_AS((void)extract_features(g, wrong, ok, schema, n.labels), Error);

    FeatureSchema other = schema;
    other.library_fingerprint = "deadbeef";
    CHECK_THROWS_AS((void)extract_features(g, ok, ok, other, n.labels), Error);
}

TEST_CASE("standardizer matches a direct two-pass computation") {
    Netlist n = small_netlist();
    CircuitGraph g = build_graph(n);
    FeatureSchema schema = make_schema(*n.library);
    std::vector<double> bw = iota_like(g.node_count(), 0.25);
    std::vector<double> hc = iota_like(g.node_count(), 3.0);
    FeatureMatrix m1 = extract_features(g, bw, hc, schema, n.labels);
    FeatureMatrix m2 = extract_features(g, hc, bw, schema, n.labels);  // swapped, why not

    FeatureSchema fitted = fit_standardizer({&m1, &m2}, schema);
    REQUIRE(fitted.has_statistics);
    const int off = schema.continuous_offset();
    const int cc = schema.continuous_count();
    REQUIRE(static_cast<int>(fitted.mean.size()) == cc);

    for (int c = 0; c < cc; ++c) {
        double sum = 0.0;
        int count = 0;
        for (const FeatureMatrix* m : {&m1, &m2})
            for (int r = 0; r < m->rows; ++r) {
                sum += m->row(r)[off + c];
                ++count;
            }
        double mean = sum / count;
        double var = 0.0;
        double lo = m1.row(0)[off + c], hi = lo;
        for (const FeatureMatrix* m : {&m1, &m2})
            for (int r = 0; r < m->rows; ++r) {
                double x = m->row(r)[off + c];
                var += (x - mean) * (x - mean);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        var /= count;  // population variance
        CHECK(fitted.mean[static_cast<size_t>(c)] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(fitted.constant[static_cast<size_t>(c)] == (lo == hi));
        if (lo == hi)
            CHECK(fitted.stddev[static_cast<size_t>(c)] == 0.0);
        else
            CHECK(fitted.stddev[static_cast<size_t>(c)] ==
                  doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }

    apply_standardizer(m1, fitted);
    CHECK(m1.standardized);
    CHECK_THROWS_AS(apply_standardizer(m1, fitted), Error);  // double transform

    // transformed non-constant columns of the pooled data have mean 0
    apply_standardizer(m2, fitted);
    for (int c = 0; c < cc; ++c) {
        if (fitted.constant[static_cast<size_t>(c)]) continue;
        double sum = 0.0;
        int count = 0;
        for (const FeatureMatrix* m : {&m1, &m2})
            for (int r = 0; r < m->rows; ++r) {
                sum += m->row(r)[off + c];
                ++count;
            }
        CHECK(std::abs(sum / count) < 1e-9);
    }

    FeatureMatrix fresh = extract_features(g, bw, hc, schema, n.labels);
    CHECK_THROWS_AS(apply_standardizer(fresh, schema), Error);  // no statistics fitted
}

TEST_CASE("feature files round trip bit exactly") {
    Netlist n = small_netlist();
    CircuitGraph g = build_graph(n);
    FeatureSchema schema = make_schema(*n.library);
    std::vector<double> bw = iota_like(g.node_count(), 0.125);
    std::vector<double> hc = iota_like(g.node_count(), 2.5);
    FeatureMatrix m = extract_features(g, bw, hc, schema, n.labels);

    std::string bytes = encode_feature_file(m, *n.library);
    CHECK(encode_feature_file(m, *n.library) == bytes);  // deterministic

    FeatureMatrix back = decode_feature_file(bytes);
    CHECK(back.rows == m.rows);
    CHECK(back.values == m.values);
    CHECK(back.is_register == m.is_register);
    CHECK(back.labels == m.labels);
    CHECK(back.standardized == m.standardized);
    CHECK(back.schema.library_fingerprint == m.schema.library_fingerprint);
    CHECK(back.schema.kind_count == m.schema.kind_count);

    // fitted statistics survive too
    FeatureSchema fitted = fit_standardizer({&m}, schema);
    apply_standardizer(m, fitted);
    std::string bytes2 = encode_feature_file(m, *n.library);
    FeatureMatrix back2 = decode_feature_file(bytes2);
    CHECK(back2.standardized);
    CHECK(back2.schema.has_statistics);
    CHECK(back2.schema.mean == fitted.mean);
    CHECK(back2.schema.stddev == fitted.stddev);
    CHECK(back2.values == m.values);

    std::string corrupt = bytes;
    corrupt[0] = 'X';
    CHECK_THROWS_AS((void)decode_feature_file(corrupt), Error);
    CHECK_THROWS_AS((void)decode_feature_file(bytes.substr(0, bytes.size() - 3)), Error);

    std::string path = (std::filesystem::temp_directory_path() / "regclass_feat_test.bin").string();
    save_feature_file(path, back, *n.library);
    FeatureMatrix loaded = load_feature_file(path);
    CHECK(loaded.values == back.values);
    std::filesystem::remove(path);
}
