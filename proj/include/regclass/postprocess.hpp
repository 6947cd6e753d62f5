#pragma once

#include <string>
#include <vector>

#include "regclass/graph.hpp"
#include "regclass/netlist.hpp"

namespace regclass {

struct FlipRecord {
    std::string id;
    RegClass from = RegClass::State;
    RegClass to = RegClass::Data;
    std::string reason;
};

struct PostprocessResult {
    RegisterLabels labels;
    std::vector<FlipRecord> flips;
};

// Predicted-state registers that do not lie on a directed cycle (no self-loop
// and singleton component) become data, reason "no_cycle". Predictions for
// data registers are never touched. Idempotent.
PostprocessResult rectify(const CircuitGraph& g, const SccPartition& scc,
                          const RegisterLabels& preds);

// Every register sharing a cycle-bearing component with a predicted-state
// register becomes state, reason "shared_scc". Expects rectified input; only
// adds state labels, never removes them. Idempotent.
PostprocessResult expand_completeness(const CircuitGraph& g, const SccPartition& scc,
                                      const RegisterLabels& preds);

// JSON array of the flips, for the CLI report.
std::string flip_report_json(const std::vector<FlipRecord>& flips);

}  // namespace regclass
