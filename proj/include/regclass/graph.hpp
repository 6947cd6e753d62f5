#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regclass/netlist.hpp"

namespace regclass {

// Directed multigraph over a netlist. Node layout: instances first, in
// instance order (node i == instance i), then one node per primary input,
// then one per primary output. A net with k sinks contributes k edges from
// its driver, one per sink reference, so duplicated input connections yield
// parallel edges. Immutable after build_graph.
struct CircuitGraph {
    LibraryPtr library;
    std::vector<std::string> node_names;  // instance id or port net name
    std::vector<int> node_kinds;          // library kind index; ports use the port kinds
    std::vector<int> instance_index;      // index into the source netlist, -1 for ports
    std::vector<bool> is_register;
    int first_input_node = 0;   // == number of instances
    int first_output_node = 0;  // == instances + primary inputs

    std::vector<int> out_offsets, out_edges;
    std::vector<int> in_offsets, in_edges;

    int node_count() const { return static_cast<int>(node_names.size()); }
    int edge_count() const { return static_cast<int>(out_edges.size()); }

    const int* out_begin(int v) const { return out_edges.data() + out_offsets[static_cast<size_t>(v)]; }
    const int* out_end(int v) const { return out_edges.data() + out_offsets[static_cast<size_t>(v) + 1]; }
    const int* in_begin(int v) const { return in_edges.data() + in_offsets[static_cast<size_t>(v)]; }
    const int* in_end(int v) const { return in_edges.data() + in_offsets[static_cast<size_t>(v) + 1]; }
    int out_degree(int v) const { return static_cast<int>(out_end(v) - out_begin(v)); }
    int in_degree(int v) const { return static_cast<int>(in_end(v) - in_begin(v)); }
};

CircuitGraph build_graph(const Netlist& n);

struct SccPartition {
    std::vector<int> component;       // per node
    std::vector<int> component_size;  // per component id
    std::vector<bool> on_cycle;       // self-loop or component size >= 2

    int component_count() const { return static_cast<int>(component_size.size()); }
};

SccPartition tarjan_scc(const CircuitGraph& g);

// Raw betweenness: sum over ordered pairs x != v != y of the fraction of
// shortest x->y paths through v. Hop-count distances; parallel edges multiply
// path counts. Not normalized by pair count.
std::vector<double> betweenness_exact(const CircuitGraph& g);

// Same accumulation restricted to sample_count source pivots drawn without
// replacement, scaled by |V|/sample_count. With sample_count >= |V| the pivot
// set is exhaustive and the result is bit-identical to betweenness_exact.
std::vector<double> betweenness_approximate(const CircuitGraph& g, int sample_count, uint64_t seed);

// Exact up to kExactBetweennessLimit nodes, then approximate with
// kDefaultPivotCount pivots (or sample_override when positive).
inline constexpr int kExactBetweennessLimit = 50000;
inline constexpr int kDefaultPivotCount = 2048;
std::vector<double> betweenness_auto(const CircuitGraph& g, uint64_t seed, int sample_override = 0);

// Per node v: sum over u != v of 1/d(u,v), unreachable u contributing 0.
std::vector<double> harmonic_centrality(const CircuitGraph& g);

// One "src dst" node-id pair per line, in out-adjacency order.
std::string emit_edge_list(const CircuitGraph& g);

}  // namespace regclass
