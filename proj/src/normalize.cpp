#include "regclass/normalize.hpp"

#include <unordered_set>

#include "regclass/util.hpp"

namespace regclass {

namespace {

std::string fresh_name(std::unordered_set<std::string>& used, const std::string& base) {
    if (used.insert(base).second) return base;
    for (int i = 2;; ++i) {
        std::string cand = base + "_" + std::to_string(i);
        if (used.insert(cand).second) return cand;
    }
}

bool table_is(const TruthTable& tt, int arity, std::string_view hex) {
    return tt.arity == arity && tt == TruthTable::from_hex(arity, hex);
}

}  // namespace

Netlist normalize_to_aoi(const Netlist& n) {
    LibraryPtr aoi = aoi_library(*n.library);
    const int kAnd = aoi->index_of("AND2");
    const int kOr = aoi->index_of("OR2");
    const int kInv = aoi->index_of("INV");

    Netlist out;
    out.name = n.name;
    out.library = aoi;
    out.primary_inputs = n.primary_inputs;
    out.primary_outputs = n.primary_outputs;
    out.nets = n.nets;
    out.labels = n.labels;

    std::unordered_set<std::string> used_nets(n.nets.begin(), n.nets.end());
    std::unordered_set<std::string> used_ids;
    for (const Instance& inst : n.instances) used_ids.insert(inst.id);

    auto add_gate = [&](int kind, std::vector<std::string> inputs,
                        const std::string& base) -> std::string {
        Instance g;
        g.kind = kind;
        g.id = fresh_name(used_ids, base);
        g.inputs = std::move(inputs);
        g.output = fresh_name(used_nets, base);
        out.nets.push_back(g.output);
        std::string net = g.output;
        out.instances.push_back(std::move(g));
        return net;
    };
    auto add_final_gate = [&](int kind, std::vector<std::string> inputs, const Instance& orig) {
        Instance g;
        g.kind = kind;
        g.id = orig.id;
        g.inputs = std::move(inputs);
        g.output = orig.output;
        out.instances.push_back(std::move(g));
    };

    for (const Instance& inst : n.instances) {
        const CellKind& kind = n.library->kind(inst.kind);
        if (kind.category == CellCategory::Register || kind.input_count == 0) {
            Instance copy = inst;
            copy.kind = aoi->index_of(kind.name);
            out.instances.push_back(std::move(copy));
            continue;
        }
        const TruthTable& tt = *kind.truth_table;
        const int k = kind.input_count;
        if (table_is(tt, 2, "8")) {
            add_final_gate(kAnd, inst.inputs, inst);
            continue;
        }
        if (table_is(tt, 2, "e")) {
            add_final_gate(kOr, inst.inputs, inst);
            continue;
        }
        if (table_is(tt, 1, "1")) {
            add_final_gate(kInv, inst.inputs, inst);
            continue;
        }
        if (table_is(tt, 1, "2")) {
            std::string mid = add_gate(kInv, {inst.inputs[0]}, inst.id + "$inv0");
            add_final_gate(kInv, {mid}, inst);
            continue;
        }

        std::vector<unsigned> minterms;
        for (unsigned r = 0; r < tt.row_count(); ++r)
            if (tt.value(r)) minterms.push_back(r);

        // Shared per-instance inverters for the complemented literals.
        std::vector<std::string> inverted(static_cast<size_t>(k));
        auto literal = [&](int i, bool positive) -> const std::string& {
            if (positive) return inst.inputs[static_cast<size_t>(i)];
            std::string& net = inverted[static_cast<size_t>(i)];
            if (net.empty())
                net = add_gate(kInv, {inst.inputs[static_cast<size_t>(i)]},
                               inst.id + "$inv" + std::to_string(i));
            return net;
        };

        if (minterms.empty()) {
            // Constant 0: x0 AND NOT x0.
            std::string neg = literal(0, false);
            add_final_gate(kAnd, {inst.inputs[0], neg}, inst);
            continue;
        }

        std::vector<std::string> term_nets;
        for (size_t m = 0; m < minterms.size(); ++m) {
            unsigned row = minterms[m];
            bool term_is_final = minterms.size() == 1;
            std::string cur = literal(0, (row >> 0) & 1);
            for (int i = 1; i < k; ++i) {
                const std::string& lit = literal(i, (row >> i) & 1);
                if (term_is_final && i == k - 1) {
                    add_final_gate(kAnd, {cur, lit}, inst);
                    cur.clear();
                } else {
                    cur = add_gate(kAnd, {cur, lit},
                                   inst.id + "$m" + std::to_string(m) + "_" + std::to_string(i));
                }
            }
            if (!cur.empty()) term_nets.push_back(cur);
        }
        if (minterms.size() == 1) continue;

        std::string acc = term_nets[0];
        for (size_t t = 1; t < term_nets.size(); ++t) {
            if (t == term_nets.size() - 1) {
                add_final_gate(kOr, {acc, term_nets[t]}, inst);
            } else {
                acc = add_gate(kOr, {acc, term_nets[t]}, inst.id + "$or" + std::to_string(t));
            }
        }
    }

    validate_netlist(out);
    return out;
}

}  // namespace regclass
