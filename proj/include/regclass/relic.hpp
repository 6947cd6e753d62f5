#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "regclass/graph.hpp"
#include "regclass/netlist.hpp"

namespace regclass {

struct RelicConfig {
    double t1 = 0.5;  // child-pair edge threshold, in [0, 1]
    double t2 = 0.8;  // register-pair count threshold, in [0, 1]
    int t3 = 1;       // max qualifying pairs for a state register
    int depth = 5;
    // Reproduces the published pseudocode literally: ordered pair loop with
    // unit self-similarity, so every qualifying unordered pair counts twice
    // and every register's self-pair counts as well. Off by default; see the
    // pair-iteration note in classify_registers.
    bool strict_pseudocode = false;
};

void validate_relic_config(const RelicConfig& cfg);
// Presets P1, P2, P3.
RelicConfig relic_preset(std::string_view name);

// Typed fan-in structure over a normalized netlist graph. children(v) are
// the in-neighbor occurrences (one per edge); the type tag collapses all
// register kinds to one tag and both port kinds to their own tags.
struct FaninView {
    const CircuitGraph* graph = nullptr;
    std::vector<int> type_tag;

    int num_children(int v) const { return graph->in_degree(v); }
    const int* children_begin(int v) const { return graph->in_begin(v); }
    const int* children_end(int v) const { return graph->in_end(v); }
};

FaninView make_fanin_view(const CircuitGraph& g);

// Maximum bipartite matching size (Hopcroft-Karp). Edges are (left, right)
// index pairs; duplicates are tolerated.
int max_bipartite_matching(int left_count, int right_count,
                           const std::vector<std::pair<int, int>>& edges);

// Memoized pairwise fan-in similarity:
//   type mismatch -> 0;
//   no children on either side -> 1 (types already agree);
//   d == 0 -> min_children / max_children;
//   else maxmatching(child pairs scoring > t1 at d-1) / max_children.
// Scores are symmetric and lie in [0, 1]; the memo is keyed on
// (min(i,j), max(i,j), d).
class SimilarityScorer {
public:
    SimilarityScorer(const FaninView& view, double t1);
    double score(int i, int j, int d);

private:
    const FaninView& view_;
    double t1_;
    std::unordered_map<uint64_t, double> memo_;
};

struct RelicResult {
    std::vector<std::string> register_ids;  // row order of the matrix
    std::vector<double> similarity;         // row-major n x n, unit diagonal
    std::vector<int> pair_counts;
    RegisterLabels labels;  // state iff pair count <= t3

    double sim(size_t i, size_t j) const { return similarity[i * register_ids.size() + j]; }
};

// Pairwise scores over unordered register pairs i < j; each pair scoring
// above t2 increments both counts once. The published pseudocode's ordered
// loop with self-pairs is available via strict_pseudocode.
// The netlist must already be normalized (library closed under the
// AND/OR/INV gate set).
RelicResult classify_registers(const Netlist& normalized, const RelicConfig& cfg);

std::string similarity_csv(const RelicResult& result);

}  // namespace regclass
