#include "regclass/postprocess.hpp"

#include <json.hpp>
#include <unordered_set>

#include "regclass/util.hpp"

namespace regclass {

namespace {

RegClass prediction_for(const RegisterLabels& preds, const std::string& id) {
    auto it = preds.find(id);
    if (it == preds.end()) throw_validation("prediction missing for register '" + id + "'");
    return it->second;
}

}  // namespace

PostprocessResult rectify(const CircuitGraph& g, const SccPartition& scc,
                          const RegisterLabels& preds) {
    PostprocessResult result;
    result.labels = preds;
    for (int v = 0; v < g.node_count(); ++v) {
        if (!g.is_register[static_cast<size_t>(v)]) continue;
        const std::string& id = g.node_names[static_cast<size_t>(v)];
        RegClass pred = prediction_for(preds, id);
        if (pred == RegClass::State && !scc.on_cycle[static_cast<size_t>(v)]) {
            result.labels[id] = RegClass::Data;
            result.flips.push_back({id, RegClass::State, RegClass::Data, "no_cycle"});
        }
    }
    return result;
}

PostprocessResult expand_completeness(const CircuitGraph& g, const SccPartition& scc,
                                      const RegisterLabels& preds) {
    std::unordered_set<int> state_components;
    for (int v = 0; v < g.node_count(); ++v) {
        if (!g.is_register[static_cast<size_t>(v)]) continue;
        if (!scc.on_cycle[static_cast<size_t>(v)]) continue;
        if (prediction_for(preds, g.node_names[static_cast<size_t>(v)]) == RegClass::State)
            state_components.insert(scc.component[static_cast<size_t>(v)]);
    }

    PostprocessResult result;
    result.labels = preds;
    for (int v = 0; v < g.node_count(); ++v) {
        if (!g.is_register[static_cast<size_t>(v)]) continue;
        if (!scc.on_cycle[static_cast<size_t>(v)]) continue;
        if (!state_components.count(scc.component[static_cast<size_t>(v)])) continue;
        const std::string& id = g.node_names[static_cast<size_t>(v)];
        if (result.labels.at(id) == RegClass::Data) {
            result.labels[id] = RegClass::State;
            result.flips.push_back({id, RegClass::Data, RegClass::State, "shared_scc"});
        }
    }
    return result;
}

std::string flip_report_json(const std::vector<FlipRecord>& flips) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const FlipRecord& f : flips) {
        arr.push_back({{"register", f.id},
                       {"from", std::string(to_string(f.from))},
                       {"to", std::string(to_string(f.to))},
                       {"reason", f.reason}});
    }
    return arr.dump(2) + "\n";
}

}  // namespace regclass
