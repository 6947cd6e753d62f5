#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "regclass/evalkit.hpp"
#include "regclass/util.hpp"

using namespace regclass;

namespace {

DatasetManifest sample_manifest() {
    DatasetManifest m;
    m.tool_version = kToolVersion;
    m.seed = 77;
    m.config_hash = "deadbeef00000000";
    const char* designs[] = {"alpha", "beta", "gamma", "delta"};
    for (const char* d : designs) {
        for (const char* enc : {"onehot", "binary"}) {
            for (int variant = 0; variant < 2; ++variant) {
                ManifestEntry e;
                e.design = d;
                e.variant = variant;
                e.encoding = enc;
                e.path = std::string(d) + "_" + enc + "_v" + std::to_string(variant) + ".json";
                e.n_registers = 10;
                e.n_state_registers = 4;
                m.entries.push_back(e);
            }
        }
    }
    return m;
}

EvaluatedGraph eval_graph(const std::string& design, const std::string& path,
                          ConfusionCounts raw) {
    EvaluatedGraph g;
    g.entry.design = design;
    g.entry.path = path;
    g.entry.encoding = "onehot";
    g.raw = raw;
    g.rectified = raw;
    return g;
}

}  // namespace

TEST_CASE("confusion counts treat state as the positive class") {
    RegisterLabels truth = {{"r0", RegClass::State},
                            {"r1", RegClass::State},
                            {"r2", RegClass::Data},
                            {"r3", RegClass::Data},
                            {"r4", RegClass::Data}};
    RegisterLabels pred = {{"r0", RegClass::State},
                           {"r1", RegClass::Data},
                           {"r2", RegClass::State},
                           {"r3", RegClass::Data},
                           {"r4", RegClass::Data}};
    ConfusionCounts c = confusion(truth, pred);
    CHECK(c.tp == 1);
    CHECK(c.fn == 1);
    CHECK(c.fp == 1);
    CHECK(c.tn == 2);

    RegisterLabels missing = pred;
    missing.erase("r3");
    CHECK_THROWS_WITH_AS(confusion(truth, missing),
                         doctest::Contains("prediction missing for register 'r3'"), Error);
    RegisterLabels extra = pred;
    extra["zz"] = RegClass::Data;
    CHECK_THROWS_WITH_AS(confusion(truth, extra),
                         doctest::Contains("prediction for unknown register 'zz'"), Error);

    ConfusionCounts sum = c;
    sum += ConfusionCounts{10, 20, 30, 40};
    CHECK(sum.tp == 11);
    CHECK(sum.fp == 21);
    CHECK(sum.tn == 32);
    CHECK(sum.fn == 41);
}

TEST_CASE("per-class rates follow the confusion counts") {
    // 15 state registers, one missed.
    Metrics m = metrics(ConfusionCounts{14, 0, 20, 1});
    REQUIRE(m.sensitivity);
    CHECK(*m.sensitivity == doctest::Approx(14.0 / 15.0));
    CHECK(*m.sensitivity == doctest::Approx(0.9333333).epsilon(1e-6));
    REQUIRE(m.specificity);
    CHECK(*m.specificity == 1.0);
    REQUIRE(m.balanced_accuracy);
    CHECK(*m.balanced_accuracy == doctest::Approx((14.0 / 15.0 + 1.0) / 2.0));

    // All 15 recovered.
    Metrics full = metrics(ConfusionCounts{15, 0, 20, 0});
    CHECK(*full.sensitivity == 1.0);
    CHECK(*full.balanced_accuracy == 1.0);

    Metrics skew = metrics(ConfusionCounts{3, 2, 8, 1});
    CHECK(*skew.sensitivity == doctest::Approx(0.75));
    CHECK(*skew.specificity == doctest::Approx(0.8));
    CHECK(*skew.balanced_accuracy == doctest::Approx(0.775));
}

TEST_CASE("zero-denominator metrics are absent, not zero") {
    // No true state registers: sensitivity undefined.
    Metrics no_pos = metrics(ConfusionCounts{0, 1, 5, 0});
    CHECK_FALSE(no_pos.sensitivity);
    CHECK(no_pos.specificity);
    CHECK_FALSE(no_pos.balanced_accuracy);

    // No true data registers: specificity undefined.
    Metrics no_neg = metrics(ConfusionCounts{5, 0, 0, 1});
    CHECK(no_neg.sensitivity);
    CHECK_FALSE(no_neg.specificity);
    CHECK_FALSE(no_neg.balanced_accuracy);

    Metrics empty = metrics(ConfusionCounts{});
    CHECK_FALSE(empty.sensitivity);
    CHECK_FALSE(empty.specificity);
    CHECK_FALSE(empty.balanced_accuracy);
}

TEST_CASE("mean over defined values skips the absent ones") {
    CHECK_FALSE(mean_defined({}));
    CHECK_FALSE(mean_defined({std::nullopt, std::nullopt}));
    CHECK(*mean_defined({0.5}) == doctest::Approx(0.5));
    CHECK(*mean_defined({1.0, std::nullopt, 0.0}) == doctest::Approx(0.5));
    CHECK(*mean_defined({0.2, 0.4, 0.6}) == doctest::Approx(0.4));
}

TEST_CASE("manifest round trips byte for byte") {
    DatasetManifest m = sample_manifest();
    CHECK(m.design_names() == std::vector<std::string>{"alpha", "beta", "gamma", "delta"});

    std::string text = emit_manifest(m);
    CHECK(text.back() == '\n');
    DatasetManifest back = parse_manifest(text);
    CHECK(back.tool_version == m.tool_version);
    CHECK(back.seed == m.seed);
    CHECK(back.config_hash == m.config_hash);
    REQUIRE(back.entries.size() == m.entries.size());
    CHECK(back.entries[3].path == m.entries[3].path);
    CHECK(back.entries[3].n_state_registers == 4);
    CHECK(emit_manifest(back) == text);

    CHECK_THROWS_WITH_AS(parse_manifest("{nope"), doctest::Contains("not valid JSON"), Error);
    CHECK_THROWS_WITH_AS(parse_manifest("{\"tool_version\": \"x\"}"),
                         doctest::Contains("schema violation"), Error);

    std::filesystem::path path =
        std::filesystem::temp_directory_path() / "regclass_manifest_test.json";
    save_manifest(path.string(), m);
    DatasetManifest loaded = load_manifest(path.string());
    CHECK(emit_manifest(loaded) == text);
    std::filesystem::remove(path);
}

TEST_CASE("folds hold out every entry of one design") {
    DatasetManifest m = sample_manifest();  // 4 designs x 4 entries
    FoldPlan plan = make_folds(m, "beta", 0.25, 9);

    CHECK(plan.holdout_design == "beta");
    CHECK(plan.seed == 9);
    REQUIRE(plan.test.size() == 4);
    for (size_t i : plan.test) CHECK(m.entries[i].design == "beta");

    // Both encodings of the holdout sit in the test set.
    std::set<std::string> held_encodings;
    for (size_t i : plan.test) held_encodings.insert(m.entries[i].encoding);
    CHECK(held_encodings == std::set<std::string>{"onehot", "binary"});

    // floor(0.25 * 12) = 3 validation entries, the rest train.
    CHECK(plan.val.size() == 3);
    CHECK(plan.train.size() == 9);

    // The three sets partition the manifest.
    std::vector<size_t> all;
    all.insert(all.end(), plan.test.begin(), plan.test.end());
    all.insert(all.end(), plan.train.begin(), plan.train.end());
    all.insert(all.end(), plan.val.begin(), plan.val.end());
    std::sort(all.begin(), all.end());
    std::vector<size_t> expect(m.entries.size());
    for (size_t i = 0; i < expect.size(); ++i) expect[i] = i;
    CHECK(all == expect);
    CHECK(std::is_sorted(plan.train.begin(), plan.train.end()));
    CHECK(std::is_sorted(plan.val.begin(), plan.val.end()));
    for (size_t i : plan.train) CHECK(m.entries[i].design != "beta");
    for (size_t i : plan.val) CHECK(m.entries[i].design != "beta");

    // Seeded and deterministic.
    FoldPlan same = make_folds(m, "beta", 0.25, 9);
    CHECK(same.train == plan.train);
    CHECK(same.val == plan.val);
    FoldPlan other = make_folds(m, "beta", 0.25, 10);
    CHECK(other.val != plan.val);

    // No validation split at fraction zero.
    FoldPlan no_val = make_folds(m, "beta", 0.0, 9);
    CHECK(no_val.val.empty());
    CHECK(no_val.train.size() == 12);

    CHECK_THROWS_WITH_AS(make_folds(m, "omega", 0.25, 9),
                         doctest::Contains("manifest has no design named 'omega'"), Error);
    CHECK_THROWS_WITH_AS(make_folds(m, "beta", 1.0, 9),
                         doctest::Contains("validation fraction"), Error);
    CHECK_THROWS_WITH_AS(make_folds(m, "beta", -0.1, 9),
                         doctest::Contains("validation fraction"), Error);
}

TEST_CASE("stage aggregation macro-averages per design, then over designs") {
    // alpha: sens 1.0 and 0.5 -> 0.75; beta: sens 0.0. A pooled average
    // would weight alpha's 30 registers over beta's 2; the macro average
    // must not.
    std::vector<EvaluatedGraph> graphs = {
        eval_graph("alpha", "alpha_a.json", ConfusionCounts{10, 0, 10, 0}),
        eval_graph("alpha", "alpha_b.json", ConfusionCounts{5, 0, 0, 5}),
        eval_graph("beta", "beta_a.json", ConfusionCounts{0, 0, 1, 1}),
    };
    StageAggregate agg = aggregate_stage(graphs, &EvaluatedGraph::raw);

    REQUIRE(agg.per_design.size() == 2);
    CHECK(agg.per_design[0].first == "alpha");
    CHECK(*agg.per_design[0].second.sensitivity == doctest::Approx(0.75));
    CHECK(agg.per_design[1].first == "beta");
    CHECK(*agg.per_design[1].second.sensitivity == doctest::Approx(0.0));
    CHECK(*agg.corpus.sensitivity == doctest::Approx(0.375));

    // alpha_b has no true data registers; its specificity drops out of the
    // design mean and a warning records the exclusion.
    CHECK(*agg.per_design[0].second.specificity == doctest::Approx(1.0));
    bool warned = false;
    for (const std::string& w : agg.warnings)
        if (w.find("specificity undefined for alpha_b.json") != std::string::npos) warned = true;
    CHECK(warned);

    // Balanced accuracy for alpha averages only the graph where both rates
    // exist: graph a gives 1.0, graph b has none.
    CHECK(*agg.per_design[0].second.balanced_accuracy == doctest::Approx(1.0));
}

TEST_CASE("aggregation drops designs with no defined metric") {
    std::vector<EvaluatedGraph> graphs = {
        eval_graph("alpha", "a.json", ConfusionCounts{1, 0, 1, 0}),
        eval_graph("beta", "b.json", ConfusionCounts{0, 0, 2, 0}),  // no state regs
    };
    StageAggregate agg = aggregate_stage(graphs, &EvaluatedGraph::raw);
    REQUIRE(agg.per_design.size() == 2);
    CHECK_FALSE(agg.per_design[1].second.sensitivity);
    // beta contributes nothing to the corpus sensitivity.
    CHECK(*agg.corpus.sensitivity == doctest::Approx(1.0));
    // but its (defined) specificity still counts.
    CHECK(*agg.corpus.specificity == doctest::Approx(1.0));
}

TEST_CASE("metrics report embeds config, stages and optional sections") {
    std::vector<EvaluatedGraph> graphs = {
        eval_graph("alpha", "a.json", ConfusionCounts{4, 1, 4, 1}),
        eval_graph("beta", "b.json", ConfusionCounts{2, 0, 3, 0}),
    };
    graphs[0].rectified = ConfusionCounts{4, 0, 5, 1};
    graphs[1].rectified = ConfusionCounts{2, 0, 3, 0};

    std::string config = "{\"mode\": \"test\", \"epochs\": 3}";
    std::string report = metrics_report_json(graphs, config, 42);
    nlohmann::json j = nlohmann::json::parse(report);

    CHECK(j.at("tool_version") == kToolVersion);
    CHECK(j.at("seed") == 42);
    CHECK(j.at("config").at("mode") == "test");
    // The hash covers the parsed echo, so reformatting the input is neutral.
    std::string hash = j.at("config_hash").get<std::string>();
    CHECK(hash == to_hex64(fnv1a64(nlohmann::ordered_json::parse(config).dump())));
    std::string report2 =
        metrics_report_json(graphs, "{ \"mode\" : \"test\", \"epochs\" : 3}", 42);
    CHECK(nlohmann::json::parse(report2).at("config_hash") == hash);

    REQUIRE(j.at("graphs").size() == 2);
    CHECK(j.at("graphs")[0].at("raw").at("counts").at("tp") == 4);
    CHECK(j.at("graphs")[0].at("rectified").at("counts").at("fp") == 0);
    CHECK_FALSE(j.at("graphs")[0].contains("completed"));
    CHECK(j.at("stages").contains("raw"));
    CHECK(j.at("stages").contains("rectified"));
    CHECK_FALSE(j.at("stages").contains("completed"));
    double sens = j.at("stages").at("rectified").at("corpus").at("sensitivity").get<double>();
    CHECK(sens == doctest::Approx((4.0 / 5.0 + 1.0) / 2.0));

    // The completion stage appears once every graph carries it.
    for (EvaluatedGraph& g : graphs) g.completed = g.rectified;
    nlohmann::json with_completed =
        nlohmann::json::parse(metrics_report_json(graphs, config, 42));
    CHECK(with_completed.at("stages").contains("completed"));
    CHECK(with_completed.at("graphs")[0].contains("completed"));

    // A partial completion stage is a hard error.
    graphs[1].completed.reset();
    CHECK_THROWS_WITH_AS(metrics_report_json(graphs, config, 42),
                         doctest::Contains("completion stage present for only part"), Error);
    graphs[1].completed = graphs[1].rectified;

    // Extra named section embeds parsed JSON.
    std::string with_extra =
        metrics_report_json(graphs, config, 42, "folds", "{\"count\": 7}");
    nlohmann::json je = nlohmann::json::parse(with_extra);
    CHECK(je.at("folds").at("count") == 7);
    CHECK_THROWS_WITH_AS(metrics_report_json(graphs, config, 42, "folds", "{oops"),
                         doctest::Contains("extra report section is not valid JSON"), Error);
    CHECK_THROWS_WITH_AS(metrics_report_json(graphs, "not json", 42),
                         doctest::Contains("config echo is not valid JSON"), Error);

    // Reports end with a newline so shell redirection composes cleanly.
    CHECK(report.back() == '\n');
}
