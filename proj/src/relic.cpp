#include "regclass/relic.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <queue>
#include <sstream>

#include "regclass/util.hpp"

namespace regclass {

void validate_relic_config(const RelicConfig& cfg) {
    if (cfg.t1 < 0 || cfg.t1 > 1) throw_validation("t1 must be in [0, 1]");
    if (cfg.t2 < 0 || cfg.t2 > 1) throw_validation("t2 must be in [0, 1]");
    if (cfg.t3 < 0) throw_validation("t3 must be >= 0");
    if (cfg.depth < 0) throw_validation("depth must be >= 0");
}

RelicConfig relic_preset(std::string_view name) {
    RelicConfig cfg;
    if (name == "P1") {
        cfg.t1 = 0.5;
        cfg.t2 = 0.8;
        cfg.t3 = 1;
        cfg.depth = 5;
    } else if (name == "P2") {
        cfg.t1 = 0.7;
        cfg.t2 = 0.5;
        cfg.t3 = 5;
        cfg.depth = 5;
    } else if (name == "P3") {
        cfg.t1 = 0.4;
        cfg.t2 = 0.5;
        cfg.t3 = 4;
        cfg.depth = 7;
    } else {
        throw_validation("unknown preset '" + std::string(name) + "' (expected P1, P2 or P3)");
    }
    return cfg;
}

namespace {

constexpr int kTagRegister = -2;
constexpr int kTagInput = -3;
constexpr int kTagOutput = -4;

}  // namespace

FaninView make_fanin_view(const CircuitGraph& g) {
    FaninView view;
    view.graph = &g;
    view.type_tag.resize(static_cast<size_t>(g.node_count()));
    for (int v = 0; v < g.node_count(); ++v) {
        const CellKind& kind = g.library->kind(g.node_kinds[static_cast<size_t>(v)]);
        switch (kind.category) {
            case CellCategory::Register: view.type_tag[static_cast<size_t>(v)] = kTagRegister; break;
            case CellCategory::InputPort: view.type_tag[static_cast<size_t>(v)] = kTagInput; break;
            case CellCategory::OutputPort: view.type_tag[static_cast<size_t>(v)] = kTagOutput; break;
            case CellCategory::Combinational:
                view.type_tag[static_cast<size_t>(v)] = g.node_kinds[static_cast<size_t>(v)];
                break;
        }
    }
    return view;
}

int max_bipartite_matching(int left_count, int right_count,
                           const std::vector<std::pair<int, int>>& edges) {
    if (left_count < 0 || right_count < 0) throw_validation("negative bipartite side size");
    std::vector<std::vector<int>> adj(static_cast<size_t>(left_count));
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= left_count || b < 0 || b >= right_count)
            throw_validation("bipartite edge endpoint out of range");
        adj[static_cast<size_t>(a)].push_back(b);
    }

    constexpr int kInf = 1 << 30;
    std::vector<int> match_left(static_cast<size_t>(left_count), -1);
    std::vector<int> match_right(static_cast<size_t>(right_count), -1);
    std::vector<int> dist(static_cast<size_t>(left_count), 0);

    auto bfs = [&]() {
        std::queue<int> q;
        bool found = false;
        for (int a = 0; a < left_count; ++a) {
            if (match_left[static_cast<size_t>(a)] < 0) {
                dist[static_cast<size_t>(a)] = 0;
                q.push(a);
            } else {
                dist[static_cast<size_t>(a)] = kInf;
            }
        }
        while (!q.empty()) {
            int a = q.front();
            q.pop();
            for (int b : adj[static_cast<size_t>(a)]) {
                int a2 = match_right[static_cast<size_t>(b)];
                if (a2 < 0) {
                    found = true;
                } else if (dist[static_cast<size_t>(a2)] == kInf) {
                    dist[static_cast<size_t>(a2)] = dist[static_cast<size_t>(a)] + 1;
                    q.push(a2);
                }
            }
        }
        return found;
    };
    std::function<bool(int)> dfs = [&](int a) {
        for (int b : adj[static_cast<size_t>(a)]) {
            int a2 = match_right[static_cast<size_t>(b)];
            if (a2 < 0 ||
                (dist[static_cast<size_t>(a2)] == dist[static_cast<size_t>(a)] + 1 && dfs(a2))) {
                match_left[static_cast<size_t>(a)] = b;
                match_right[static_cast<size_t>(b)] = a;
                return true;
            }
        }
        dist[static_cast<size_t>(a)] = kInf;
        return false;
    };

    int matching = 0;
    while (bfs()) {
        for (int a = 0; a < left_count; ++a)
            if (match_left[static_cast<size_t>(a)] < 0 && dfs(a)) ++matching;
    }
    return matching;
}

SimilarityScorer::SimilarityScorer(const FaninView& view, double t1) : view_(view), t1_(t1) {
    if (t1 < 0 || t1 > 1) throw_validation("t1 must be in [0, 1]");
}

double SimilarityScorer::score(int i, int j, int d) {
    if (view_.type_tag[static_cast<size_t>(i)] != view_.type_tag[static_cast<size_t>(j)])
        return 0.0;
    int lo = std::min(i, j), hi = std::max(i, j);
    uint64_t key = (static_cast<uint64_t>(lo) << 40) | (static_cast<uint64_t>(hi) << 16) |
                   static_cast<uint64_t>(d);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    int ni = view_.num_children(i);
    int nj = view_.num_children(j);
    int max_children = std::max(ni, nj);
    int min_children = std::min(ni, nj);

    double result;
    if (max_children == 0) {
        // Identical (empty) fan-in and equal types.
        result = 1.0;
    } else if (d == 0) {
        result = static_cast<double>(min_children) / max_children;
    } else {
        std::vector<std::pair<int, int>> edges;
        const int* ib = view_.children_begin(i);
        const int* jb = view_.children_begin(j);
        for (int a = 0; a < ni; ++a)
            for (int b = 0; b < nj; ++b)
                if (score(ib[a], jb[b], d - 1) > t1_) edges.emplace_back(a, b);
        int matching = max_bipartite_matching(ni, nj, edges);
        result = static_cast<double>(matching) / max_children;
    }
    memo_.emplace(key, result);
    return result;
}

RelicResult classify_registers(const Netlist& normalized, const RelicConfig& cfg) {
    validate_relic_config(cfg);
    if (normalized.library->fingerprint() != aoi_library(*normalized.library)->fingerprint())
        throw_validation("netlist must be normalized before similarity scoring");

    CircuitGraph g = build_graph(normalized);
    FaninView view = make_fanin_view(g);
    SimilarityScorer scorer(view, cfg.t1);

    std::vector<int> reg_nodes;
    for (int v = 0; v < g.node_count(); ++v)
        if (g.is_register[static_cast<size_t>(v)]) reg_nodes.push_back(v);

    RelicResult result;
    const size_t n = reg_nodes.size();
    for (int v : reg_nodes) result.register_ids.push_back(g.node_names[static_cast<size_t>(v)]);
    result.similarity.assign(n * n, 0.0);
    result.pair_counts.assign(n, 0);

    for (size_t i = 0; i < n; ++i) {
        result.similarity[i * n + i] = 1.0;
        for (size_t j = i + 1; j < n; ++j) {
            double s = scorer.score(reg_nodes[i], reg_nodes[j], cfg.depth);
            result.similarity[i * n + j] = s;
            result.similarity[j * n + i] = s;
        }
    }

    if (cfg.strict_pseudocode) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (result.similarity[i * n + j] > cfg.t2) {
                    result.pair_counts[i] += 1;
                    result.pair_counts[j] += 1;
                }
    } else {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (result.similarity[i * n + j] > cfg.t2) {
                    result.pair_counts[i] += 1;
                    result.pair_counts[j] += 1;
                }
    }

    for (size_t i = 0; i < n; ++i)
        result.labels[result.register_ids[i]] =
            result.pair_counts[i] <= cfg.t3 ? RegClass::State : RegClass::Data;
    return result;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

std::string similarity_csv(const RelicResult& result) {
    std::ostringstream out;
    out << "register";
    for (const std::string& id : result.register_ids) out << ',' << id;
    out << '\n';
    const size_t n = result.register_ids.size();
    for (size_t i = 0; i < n; ++i) {
        out << result.register_ids[i];
        for (size_t j = 0; j < n; ++j) out << ',' << format_double(result.sim(i, j));
        out << '\n';
    }
    return out.str();
}

}  // namespace regclass
