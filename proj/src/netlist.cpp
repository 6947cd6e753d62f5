#include "regclass/netlist.hpp"

#include <unordered_map>
#include <unordered_set>

#include "regclass/util.hpp"

namespace regclass {

std::string_view to_string(RegClass c) {
    return c == RegClass::State ? "state" : "data";
}

RegClass reg_class_from_string(std::string_view s) {
    if (s == "state") return RegClass::State;
    if (s == "data") return RegClass::Data;
    throw_validation("unknown register class '" + std::string(s) + "'");
}

bool operator==(const Netlist& a, const Netlist& b) {
    if (a.name != b.name) return false;
    if (!a.library || !b.library) return a.library == b.library;
    if (a.library->fingerprint() != b.library->fingerprint()) return false;
    return a.primary_inputs == b.primary_inputs && a.primary_outputs == b.primary_outputs &&
           a.nets == b.nets && a.instances == b.instances && a.labels == b.labels;
}

void validate_netlist(const Netlist& n) {
    if (!n.library) throw_validation("netlist '" + n.name + "' has no cell library");
    const CellLibrary& lib = *n.library;

    std::unordered_set<std::string_view> net_set;
    net_set.reserve(n.nets.size());
    for (const std::string& net : n.nets) {
        if (net.empty()) throw_validation("empty net id");
        if (!net_set.insert(net).second)
            throw_validation("net '" + net + "' declared more than once");
    }
    auto require_net = [&net_set](const std::string& id, const std::string& where) {
        if (!net_set.count(id))
            throw_validation("undeclared net '" + id + "' referenced by " + where);
    };

    // driver counting: primary inputs and instance outputs each drive one net
    std::unordered_map<std::string_view, int> drivers;
    for (const std::string& pi : n.primary_inputs) {
        require_net(pi, "primary input list");
        drivers[pi] += 1;
    }
    for (const std::string& po : n.primary_outputs) require_net(po, "primary output list");

    std::unordered_set<std::string_view> instance_ids;
    for (const Instance& inst : n.instances) {
        if (inst.id.empty()) throw_validation("instance with empty id");
        if (!instance_ids.insert(inst.id).second)
            throw_validation("instance '" + inst.id + "' declared more than once");
        if (inst.kind < 0 || inst.kind >= lib.size())
            throw_validation("instance '" + inst.id + "' references an unknown cell kind");
        const CellKind& kind = lib.kind(inst.kind);
        if (kind.category == CellCategory::InputPort || kind.category == CellCategory::OutputPort)
            throw_validation("instance '" + inst.id + "' instantiates port kind '" + kind.name + "'");
        if (static_cast<int>(inst.inputs.size()) != kind.input_count)
            throw_validation("instance '" + inst.id + "' of kind '" + kind.name + "' expects " +
                             std::to_string(kind.input_count) + " inputs, got " +
                             std::to_string(inst.inputs.size()));
        for (const std::string& in : inst.inputs) {
            if (in.empty())
                throw_validation("instance '" + inst.id + "' has an unconnected input");
            require_net(in, "instance '" + inst.id + "'");
        }
        require_net(inst.output, "instance '" + inst.id + "' output");
        drivers[inst.output] += 1;
    }

    for (const std::string& net : n.nets) {
        auto it = drivers.find(net);
        int count = it == drivers.end() ? 0 : it->second;
        if (count == 0) throw_validation("net '" + net + "' has no driver");
        if (count > 1)
            throw_validation("net '" + net + "' is driven " + std::to_string(count) + " times");
    }

    if (n.labels) {
        std::unordered_set<std::string_view> regs;
        for (size_t idx : register_instances(n)) regs.insert(n.instances[idx].id);
        for (const auto& [id, cls] : *n.labels) {
            (void)cls;
            if (!regs.count(id))
                throw_validation("label for '" + id + "' which is not a register instance");
        }
        if (n.labels->size() != regs.size())
            throw_validation("labels must cover every register instance (" +
                             std::to_string(n.labels->size()) + " of " +
                             std::to_string(regs.size()) + " present)");
    }
}

std::vector<size_t> register_instances(const Netlist& n) {
    std::vector<size_t> out;
    for (size_t i = 0; i < n.instances.size(); ++i) {
        const Instance& inst = n.instances[i];
        if (inst.kind >= 0 && inst.kind < n.library->size() &&
            n.library->kind(inst.kind).category == CellCategory::Register)
            out.push_back(i);
    }
    return out;
}

}  // namespace regclass
