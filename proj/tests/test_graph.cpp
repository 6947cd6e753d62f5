#include <doctest.h>

#include "oracles.hpp"
#include "regclass/graph.hpp"
#include "regclass/netlist_json.hpp"
#include "regclass/util.hpp"

using namespace regclass;
using testutil::graph_from_edges;
using testutil::multiplicity;
using testutil::random_edges;

TEST_CASE("build_graph lays out instances, input ports, output ports") {
    LibraryPtr lib = default_library();
    Netlist n;
    n.name = "layout";
    n.library = lib;
    n.primary_inputs = {"a"};
    n.primary_outputs = {"y", "w"};
    n.nets = {"a", "w", "y"};
    Instance g0;
    g0.id = "g0";
    g0.kind = lib->index_of("AND2");
    g0.inputs = {"a", "a"};  // duplicated input: two parallel edges
    g0.output = "w";
    Instance g1;
    g1.id = "g1";
    g1.kind = lib->index_of("INV");
    g1.inputs = {"w"};
    g1.output = "y";
    n.instances = {g0, g1};

    CircuitGraph g = build_graph(n);
    CHECK(g.node_count() == 5);
    CHECK(g.first_input_node == 2);
    CHECK(g.first_output_node == 3);
    CHECK(g.node_names == std::vector<std::string>{"g0", "g1", "a", "y", "w"});
    CHECK(g.node_kinds[2] == lib->input_port_kind());
    CHECK(g.node_kinds[3] == lib->output_port_kind());
    CHECK(g.node_kinds[4] == lib->output_port_kind());
    CHECK_FALSE(g.is_register[0]);
    CHECK(g.instance_index[0] == 0);
    CHECK(g.instance_index[2] == -1);

    // edges: a->g0 twice, g0->g1, g0->w(po), g1->y(po)
    CHECK(g.edge_count() == 5);
    CHECK(g.in_degree(0) == 2);
    CHECK(g.out_degree(2) == 2);
    CHECK(g.out_degree(0) == 2);
    auto m = multiplicity(g);
    CHECK(m[2][0] == 2);
    CHECK(m[0][1] == 1);
    CHECK(m[0][4] == 1);
    CHECK(m[1][3] == 1);

    std::string edges = emit_edge_list(g);
    CHECK(edges == "0 1\n0 4\n1 3\n2 0\n2 0\n");
}

TEST_CASE("registers are flagged and self-feedback forms a self loop") {
    LibraryPtr lib = default_library();
    Netlist n;
    n.name = "selfloop";
    n.library = lib;
    n.primary_inputs = {};
    n.primary_outputs = {"q"};
    n.nets = {"q"};
    Instance r;
    r.id = "r0";
    r.kind = lib->index_of("DFF");
    r.inputs = {"q"};
    r.output = "q";
    n.instances = {r};

    CircuitGraph g = build_graph(n);
    CHECK(g.is_register[0]);
    SccPartition scc = tarjan_scc(g);
    CHECK(scc.on_cycle[0]);
    CHECK(scc.component_size[static_cast<size_t>(scc.component[0])] == 1);
}

TEST_CASE("tarjan components match the reachability oracle") {
    Rng rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rng.below(39));
        int m = static_cast<int>(rng.below(static_cast<uint64_t>(3 * n)));
        CircuitGraph g = graph_from_edges(n, random_edges(rng, n, m, true));
        SccPartition scc = tarjan_scc(g);
        auto mult = multiplicity(g);
        auto reach = testutil::reach_closure(mult);

        REQUIRE(static_cast<int>(scc.component.size()) == n);
        std::vector<int> sizes(scc.component_size.size(), 0);
        for (int v = 0; v < n; ++v)
            sizes[static_cast<size_t>(scc.component[static_cast<size_t>(v)])]++;
        for (size_t c = 0; c < sizes.size(); ++c) CHECK(sizes[c] == scc.component_size[c]);

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                bool same =
                    scc.component[static_cast<size_t>(i)] == scc.component[static_cast<size_t>(j)];
                bool mutual = reach[static_cast<size_t>(i)][static_cast<size_t>(j)] &&
                              reach[static_cast<size_t>(j)][static_cast<size_t>(i)];
                CHECK(same == mutual);
            }

        for (int v = 0; v < n; ++v) {
            // on a cycle iff some out-edge leads back
            bool cyc = false;
            for (int w = 0; w < n && !cyc; ++w)
                if (mult[static_cast<size_t>(v)][static_cast<size_t>(w)] > 0 &&
                    reach[static_cast<size_t>(w)][static_cast<size_t>(v)])
                    cyc = true;
            CHECK(scc.on_cycle[static_cast<size_t>(v)] == cyc);
        }
    }
}

TEST_CASE("exact betweenness matches the pair dependency oracle") {
    Rng rng(202);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng.below(25));
        int m = static_cast<int>(rng.below(static_cast<uint64_t>(4 * n)));
        // parallel edges are likely at this density; add guaranteed ones
        auto edges = random_edges(rng, n, m, true);
        if (!edges.empty()) edges.push_back(edges[0]);
        CircuitGraph g = graph_from_edges(n, edges);

        std::vector<double> got = betweenness_exact(g);
        std::vector<double> want = testutil::oracle_betweenness(multiplicity(g));
        REQUIRE(got.size() == want.size());
        for (size_t v = 0; v < got.size(); ++v)
            CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-12));
    }
}

TEST_CASE("harmonic centrality matches the floyd-warshall oracle") {
    Rng rng(303);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng.below(25));
        int m = static_cast<int>(rng.below(static_cast<uint64_t>(4 * n)));
        CircuitGraph g = graph_from_edges(n, random_edges(rng, n, m, true));
        std::vector<double> got = harmonic_centrality(g);
        std::vector<double> want = testutil::oracle_harmonic(multiplicity(g));
        for (size_t v = 0; v < got.size(); ++v)
            CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-12));
    }
}

TEST_CASE("approximate betweenness with a full pivot set is bit identical") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 5 + static_cast<int>(rng.below(40));
        CircuitGraph g = graph_from_edges(n, random_edges(rng, n, 3 * n, false));
        std::vector<double> exact = betweenness_exact(g);

        std::vector<double> full = betweenness_approximate(g, n, 99 + static_cast<uint64_t>(trial));
        REQUIRE(full.size() == exact.size());
        for (size_t v = 0; v < full.size(); ++v) CHECK(full[v] == exact[v]);

        // oversampling clamps to the node count
        std::vector<double> over = betweenness_approximate(g, n + 7, 5);
        for (size_t v = 0; v < over.size(); ++v) CHECK(over[v] == exact[v]);

        std::vector<double> sub_a = betweenness_approximate(g, n / 2, 7);
        std::vector<double> sub_b = betweenness_approximate(g, n / 2, 7);
        CHECK(sub_a == sub_b);
    }
}

TEST_CASE("auto betweenness is exact for small graphs") {
    Rng rng(505);
    CircuitGraph g = graph_from_edges(30, random_edges(rng, 30, 90, false));
    CHECK(betweenness_auto(g, 1) == betweenness_exact(g));
    // explicit override forces sampling
    std::vector<double> forced = betweenness_auto(g, 1, 10);
    CHECK(forced == betweenness_approximate(g, 10, 1));
}

TEST_CASE("betweenness rejects invalid sample counts") {
    CircuitGraph g = graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK_THROWS_AS((void)betweenness_approximate(g, 0, 1), Error);
}
