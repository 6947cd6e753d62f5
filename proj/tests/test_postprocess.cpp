#include <doctest.h>

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "regclass/cell_library.hpp"
#include "regclass/graph.hpp"
#include "regclass/netlist.hpp"
#include "regclass/postprocess.hpp"
#include "regclass/util.hpp"

using namespace regclass;

namespace {

Instance inst(const std::string& id, int kind, std::vector<std::string> in, std::string out) {
    Instance i;
    i.id = id;
    i.kind = kind;
    i.inputs = std::move(in);
    i.output = std::move(out);
    return i;
}

// ring0 and ring1 share a two-register cycle, solo sits on its own inverter
// loop, pipe feeds forward only.
struct Fixture {
    Netlist netlist;
    CircuitGraph graph;
    SccPartition scc;
};

Fixture make_fixture() {
    Fixture f;
    Netlist& n = f.netlist;
    n.name = "postprocess_fixture";
    n.library = default_library();
    const int DFF = n.library->index_of("DFF");
    const int INV = n.library->index_of("INV");
    const int AND2 = n.library->index_of("AND2");
    n.primary_inputs = {"in"};
    n.primary_outputs = {"out"};
    n.nets = {"in", "out", "q0", "q1", "w01", "sq", "sloop", "pq"};
    n.instances = {
        inst("ring0", DFF, {"q1"}, "q0"),
        inst("g01", INV, {"q0"}, "w01"),
        inst("ring1", DFF, {"w01"}, "q1"),
        inst("solo", DFF, {"sloop"}, "sq"),
        inst("gs", INV, {"sq"}, "sloop"),
        inst("pipe", DFF, {"in"}, "pq"),
        inst("gy", AND2, {"pq", "sq"}, "out"),
    };
    validate_netlist(n);
    f.graph = build_graph(n);
    f.scc = tarjan_scc(f.graph);
    return f;
}

int node_of(const CircuitGraph& g, const std::string& name) {
    for (int v = 0; v < g.node_count(); ++v)
        if (g.node_names[static_cast<size_t>(v)] == name) return v;
    REQUIRE(false);
    return -1;
}

}  // namespace

TEST_CASE("fixture geometry: two shared-cycle registers, one loop, one pipeline") {
    Fixture f = make_fixture();
    CHECK(f.scc.on_cycle[static_cast<size_t>(node_of(f.graph, "ring0"))]);
    CHECK(f.scc.on_cycle[static_cast<size_t>(node_of(f.graph, "ring1"))]);
    CHECK(f.scc.on_cycle[static_cast<size_t>(node_of(f.graph, "solo"))]);
    CHECK_FALSE(f.scc.on_cycle[static_cast<size_t>(node_of(f.graph, "pipe"))]);
    CHECK(f.scc.component[static_cast<size_t>(node_of(f.graph, "ring0"))] ==
          f.scc.component[static_cast<size_t>(node_of(f.graph, "ring1"))]);
    CHECK(f.scc.component[static_cast<size_t>(node_of(f.graph, "solo"))] !=
          f.scc.component[static_cast<size_t>(node_of(f.graph, "ring0"))]);
}

TEST_CASE("rectify flips exactly the off-cycle state predictions") {
    Fixture f = make_fixture();
    RegisterLabels preds = {{"ring0", RegClass::State},
                            {"ring1", RegClass::Data},
                            {"solo", RegClass::State},
                            {"pipe", RegClass::State}};
    PostprocessResult res = rectify(f.graph, f.scc, preds);

    CHECK(res.labels.at("ring0") == RegClass::State);
    CHECK(res.labels.at("ring1") == RegClass::Data);
    CHECK(res.labels.at("solo") == RegClass::State);
    CHECK(res.labels.at("pipe") == RegClass::Data);
    REQUIRE(res.flips.size() == 1);
    CHECK(res.flips[0].id == "pipe");
    CHECK(res.flips[0].from == RegClass::State);
    CHECK(res.flips[0].to == RegClass::Data);
    CHECK(res.flips[0].reason == "no_cycle");

    // Idempotent: a second pass changes nothing.
    PostprocessResult again = rectify(f.graph, f.scc, res.labels);
    CHECK(again.labels == res.labels);
    CHECK(again.flips.empty());

    // Data predictions are never promoted, wherever they sit.
    RegisterLabels all_data = {{"ring0", RegClass::Data},
                               {"ring1", RegClass::Data},
                               {"solo", RegClass::Data},
                               {"pipe", RegClass::Data}};
    PostprocessResult none = rectify(f.graph, f.scc, all_data);
    CHECK(none.flips.empty());
    CHECK(none.labels == all_data);
}

TEST_CASE("completeness expansion spreads state across a shared component") {
    Fixture f = make_fixture();
    RegisterLabels preds = {{"ring0", RegClass::State},
                            {"ring1", RegClass::Data},
                            {"solo", RegClass::Data},
                            {"pipe", RegClass::Data}};
    PostprocessResult res = expand_completeness(f.graph, f.scc, preds);

    CHECK(res.labels.at("ring0") == RegClass::State);
    CHECK(res.labels.at("ring1") == RegClass::State);  // pulled in by ring0
    CHECK(res.labels.at("solo") == RegClass::Data);    // its own component
    CHECK(res.labels.at("pipe") == RegClass::Data);    // not on any cycle
    REQUIRE(res.flips.size() == 1);
    CHECK(res.flips[0].id == "ring1");
    CHECK(res.flips[0].from == RegClass::Data);
    CHECK(res.flips[0].to == RegClass::State);
    CHECK(res.flips[0].reason == "shared_scc");

    PostprocessResult again = expand_completeness(f.graph, f.scc, res.labels);
    CHECK(again.labels == res.labels);
    CHECK(again.flips.empty());

    // Expansion only ever adds state labels.
    for (const auto& [id, cls] : preds)
        if (cls == RegClass::State) CHECK(res.labels.at(id) == RegClass::State);
}

TEST_CASE("off-cycle state predictions do not seed expansion") {
    // Un-rectified input: pipe is predicted state but lies on no cycle, so it
    // must neither seed a component nor be expanded itself.
    Fixture f = make_fixture();
    RegisterLabels preds = {{"ring0", RegClass::Data},
                            {"ring1", RegClass::Data},
                            {"solo", RegClass::Data},
                            {"pipe", RegClass::State}};
    PostprocessResult res = expand_completeness(f.graph, f.scc, preds);
    CHECK(res.flips.empty());
    CHECK(res.labels == preds);
}

TEST_CASE("both passes demand a prediction for every register") {
    Fixture f = make_fixture();
    RegisterLabels partial = {{"ring0", RegClass::State}};
    CHECK_THROWS_WITH_AS(rectify(f.graph, f.scc, partial),
                         doctest::Contains("prediction missing for register"), Error);
    CHECK_THROWS_WITH_AS(expand_completeness(f.graph, f.scc, partial),
                         doctest::Contains("prediction missing for register"), Error);
}

TEST_CASE("rectify then expand stabilizes in one round") {
    Fixture f = make_fixture();
    RegisterLabels preds = {{"ring0", RegClass::State},
                            {"ring1", RegClass::Data},
                            {"solo", RegClass::Data},
                            {"pipe", RegClass::State}};
    PostprocessResult r = rectify(f.graph, f.scc, preds);
    PostprocessResult c = expand_completeness(f.graph, f.scc, r.labels);
    CHECK(c.labels.at("ring0") == RegClass::State);
    CHECK(c.labels.at("ring1") == RegClass::State);
    CHECK(c.labels.at("pipe") == RegClass::Data);

    // The fixed point: rerunning either pass is a no-op.
    CHECK(rectify(f.graph, f.scc, c.labels).flips.empty());
    CHECK(expand_completeness(f.graph, f.scc, c.labels).flips.empty());
}

TEST_CASE("flip report serializes reason and direction") {
    std::vector<FlipRecord> flips = {{"pipe", RegClass::State, RegClass::Data, "no_cycle"},
                                     {"ring1", RegClass::Data, RegClass::State, "shared_scc"}};
    nlohmann::json arr = nlohmann::json::parse(flip_report_json(flips));
    REQUIRE(arr.is_array());
    REQUIRE(arr.size() == 2);
    CHECK(arr[0].at("register") == "pipe");
    CHECK(arr[0].at("from") == "state");
    CHECK(arr[0].at("to") == "data");
    CHECK(arr[0].at("reason") == "no_cycle");
    CHECK(arr[1].at("register") == "ring1");
    CHECK(arr[1].at("reason") == "shared_scc");
    CHECK(flip_report_json({}) == "[]\n");
}
