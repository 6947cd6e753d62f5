#include "regclass/graph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "regclass/util.hpp"

namespace regclass {

CircuitGraph build_graph(const Netlist& n) {
    validate_netlist(n);
    CircuitGraph g;
    g.library = n.library;

    const int instance_count = static_cast<int>(n.instances.size());
    g.first_input_node = instance_count;
    g.first_output_node = instance_count + static_cast<int>(n.primary_inputs.size());
    const int node_count = g.first_output_node + static_cast<int>(n.primary_outputs.size());

    g.node_names.reserve(static_cast<size_t>(node_count));
    g.node_kinds.reserve(static_cast<size_t>(node_count));
    g.instance_index.assign(static_cast<size_t>(node_count), -1);
    g.is_register.assign(static_cast<size_t>(node_count), false);

    std::unordered_map<std::string, int> driver;  // net -> node
    for (int i = 0; i < instance_count; ++i) {
        const Instance& inst = n.instances[static_cast<size_t>(i)];
        g.node_names.push_back(inst.id);
        g.node_kinds.push_back(inst.kind);
        g.instance_index[static_cast<size_t>(i)] = i;
        g.is_register[static_cast<size_t>(i)] =
            n.library->kind(inst.kind).category == CellCategory::Register;
        driver[inst.output] = i;
    }
    for (size_t p = 0; p < n.primary_inputs.size(); ++p) {
        int node = g.first_input_node + static_cast<int>(p);
        g.node_names.push_back(n.primary_inputs[p]);
        g.node_kinds.push_back(n.library->input_port_kind());
        driver[n.primary_inputs[p]] = node;
    }
    for (size_t p = 0; p < n.primary_outputs.size(); ++p) {
        g.node_names.push_back(n.primary_outputs[p]);
        g.node_kinds.push_back(n.library->output_port_kind());
    }

    // Sink references in a fixed order: instance inputs, then output ports.
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < instance_count; ++i)
        for (const std::string& net : n.instances[static_cast<size_t>(i)].inputs)
            edges.emplace_back(driver.at(net), i);
    for (size_t p = 0; p < n.primary_outputs.size(); ++p)
        edges.emplace_back(driver.at(n.primary_outputs[p]),
                           g.first_output_node + static_cast<int>(p));

    auto build_csr = [&](bool by_source, std::vector<int>& offsets, std::vector<int>& adj) {
        offsets.assign(static_cast<size_t>(node_count) + 1, 0);
        for (const auto& [u, v] : edges) ++offsets[static_cast<size_t>(by_source ? u : v) + 1];
        std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
        adj.resize(edges.size());
        std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
        for (const auto& [u, v] : edges) {
            size_t key = static_cast<size_t>(by_source ? u : v);
            adj[static_cast<size_t>(cursor[key]++)] = by_source ? v : u;
        }
    };
    build_csr(true, g.out_offsets, g.out_edges);
    build_csr(false, g.in_offsets, g.in_edges);
    return g;
}

SccPartition tarjan_scc(const CircuitGraph& g) {
    const int n = g.node_count();
    SccPartition part;
    part.component.assign(static_cast<size_t>(n), -1);
    part.on_cycle.assign(static_cast<size_t>(n), false);

    std::vector<int> index(static_cast<size_t>(n), -1);
    std::vector<int> lowlink(static_cast<size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<size_t>(n), false);
    std::vector<int> stack;
    int next_index = 0;

    struct Frame {
        int v;
        const int* it;
    };
    std::vector<Frame> call;

    for (int root = 0; root < n; ++root) {
        if (index[static_cast<size_t>(root)] >= 0) continue;
        call.push_back({root, g.out_begin(root)});
        index[static_cast<size_t>(root)] = lowlink[static_cast<size_t>(root)] = next_index++;
        stack.push_back(root);
        on_stack[static_cast<size_t>(root)] = true;

        while (!call.empty()) {
            Frame& f = call.back();
            if (f.it != g.out_end(f.v)) {
                int w = *f.it++;
                if (index[static_cast<size_t>(w)] < 0) {
                    index[static_cast<size_t>(w)] = lowlink[static_cast<size_t>(w)] = next_index++;
                    stack.push_back(w);
                    on_stack[static_cast<size_t>(w)] = true;
                    call.push_back({w, g.out_begin(w)});
                } else if (on_stack[static_cast<size_t>(w)]) {
                    lowlink[static_cast<size_t>(f.v)] =
                        std::min(lowlink[static_cast<size_t>(f.v)], index[static_cast<size_t>(w)]);
                }
                continue;
            }
            int v = f.v;
            call.pop_back();
            if (!call.empty()) {
                int parent = call.back().v;
                lowlink[static_cast<size_t>(parent)] =
                    std::min(lowlink[static_cast<size_t>(parent)], lowlink[static_cast<size_t>(v)]);
            }
            if (lowlink[static_cast<size_t>(v)] == index[static_cast<size_t>(v)]) {
                int comp = part.component_count();
                int size = 0;
                for (;;) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<size_t>(w)] = false;
                    part.component[static_cast<size_t>(w)] = comp;
                    ++size;
                    if (w == v) break;
                }
                part.component_size.push_back(size);
            }
        }
    }

    for (int v = 0; v < n; ++v) {
        if (part.component_size[static_cast<size_t>(part.component[static_cast<size_t>(v)])] >= 2) {
            part.on_cycle[static_cast<size_t>(v)] = true;
            continue;
        }
        for (const int* it = g.out_begin(v); it != g.out_end(v); ++it)
            if (*it == v) part.on_cycle[static_cast<size_t>(v)] = true;
    }
    return part;
}

namespace {

// Brandes dependency accumulation from a single source.
void accumulate_from_source(const CircuitGraph& g, int s, std::vector<double>& score,
                            std::vector<int>& dist, std::vector<double>& sigma,
                            std::vector<double>& delta, std::vector<int>& order) {
    const int n = g.node_count();
    dist.assign(static_cast<size_t>(n), -1);
    sigma.assign(static_cast<size_t>(n), 0.0);
    delta.assign(static_cast<size_t>(n), 0.0);
    order.clear();

    dist[static_cast<size_t>(s)] = 0;
    sigma[static_cast<size_t>(s)] = 1.0;
    order.push_back(s);
    for (size_t head = 0; head < order.size(); ++head) {
        int v = order[static_cast<size_t>(head)];
        for (const int* it = g.out_begin(v); it != g.out_end(v); ++it) {
            int w = *it;
            if (dist[static_cast<size_t>(w)] < 0) {
                dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(v)] + 1;
                order.push_back(w);
            }
            if (dist[static_cast<size_t>(w)] == dist[static_cast<size_t>(v)] + 1)
                sigma[static_cast<size_t>(w)] += sigma[static_cast<size_t>(v)];
        }
    }
    for (size_t i = order.size(); i-- > 0;) {
        int w = order[i];
        for (const int* it = g.out_begin(w); it != g.out_end(w); ++it) {
            int x = *it;
            if (dist[static_cast<size_t>(x)] == dist[static_cast<size_t>(w)] + 1)
                delta[static_cast<size_t>(w)] += sigma[static_cast<size_t>(w)] /
                                                 sigma[static_cast<size_t>(x)] *
                                                 (1.0 + delta[static_cast<size_t>(x)]);
        }
        if (w != s) score[static_cast<size_t>(w)] += delta[static_cast<size_t>(w)];
    }
}

std::vector<double> betweenness_over_sources(const CircuitGraph& g,
                                             const std::vector<int>& sources, double scale) {
    const int n = g.node_count();
    std::vector<double> score(static_cast<size_t>(n), 0.0);
    std::vector<int> dist, order;
    std::vector<double> sigma, delta;
    for (int s : sources) accumulate_from_source(g, s, score, dist, sigma, delta, order);
    for (double& x : score) x *= scale;
    return score;
}

}  // namespace

std::vector<double> betweenness_exact(const CircuitGraph& g) {
    std::vector<int> sources(static_cast<size_t>(g.node_count()));
    std::iota(sources.begin(), sources.end(), 0);
    return betweenness_over_sources(g, sources, 1.0);
}

std::vector<double> betweenness_approximate(const CircuitGraph& g, int sample_count,
                                            uint64_t seed) {
    if (sample_count < 1) throw_validation("betweenness sample_count must be >= 1");
    const int n = g.node_count();
    if (n == 0) return {};
    if (sample_count > n) sample_count = n;

    // Partial Fisher-Yates draw without replacement, then ascending order so
    // the accumulation sequence matches the exact path when the set is full.
    std::vector<int> pool(static_cast<size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(seed);
    for (int i = 0; i < sample_count; ++i) {
        size_t j = static_cast<size_t>(i) +
                   static_cast<size_t>(rng.below(static_cast<uint64_t>(n - i)));
        std::swap(pool[static_cast<size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<size_t>(sample_count));
    std::sort(pool.begin(), pool.end());
    return betweenness_over_sources(g, pool, static_cast<double>(n) / sample_count);
}

std::vector<double> betweenness_auto(const CircuitGraph& g, uint64_t seed, int sample_override) {
    if (sample_override > 0) return betweenness_approximate(g, sample_override, seed);
    if (g.node_count() <= kExactBetweennessLimit) return betweenness_exact(g);
    return betweenness_approximate(g, kDefaultPivotCount, seed);
}

std::vector<double> harmonic_centrality(const CircuitGraph& g) {
    const int n = g.node_count();
    std::vector<double> score(static_cast<size_t>(n), 0.0);
    std::vector<int> dist(static_cast<size_t>(n));
    std::vector<int> queue;
    queue.reserve(static_cast<size_t>(n));
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[static_cast<size_t>(s)] = 0;
        queue.assign(1, s);
        for (size_t head = 0; head < queue.size(); ++head) {
            int v = queue[head];
            for (const int* it = g.out_begin(v); it != g.out_end(v); ++it) {
                int w = *it;
                if (dist[static_cast<size_t>(w)] < 0) {
                    dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(v)] + 1;
                    queue.push_back(w);
                }
            }
        }
        for (int v = 0; v < n; ++v)
            if (v != s && dist[static_cast<size_t>(v)] > 0)
                score[static_cast<size_t>(v)] += 1.0 / dist[static_cast<size_t>(v)];
    }
    return score;
}

std::string emit_edge_list(const CircuitGraph& g) {
    std::ostringstream out;
    for (int v = 0; v < g.node_count(); ++v)
        for (const int* it = g.out_begin(v); it != g.out_end(v); ++it)
            out << v << ' ' << *it << '\n';
    return out.str();
}

}  // namespace regclass
