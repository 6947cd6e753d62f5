#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regclass/cell_library.hpp"

namespace regclass {

enum class RegClass { State, Data };

std::string_view to_string(RegClass c);
RegClass reg_class_from_string(std::string_view s);

// Ground-truth or predicted class per register instance id.
using RegisterLabels = std::map<std::string, RegClass>;

struct Instance {
    std::string id;
    int kind = -1;                    // index into the library
    std::vector<std::string> inputs;  // net ids in port order
    std::string output;               // net id

    bool operator==(const Instance&) const = default;
};

// Immutable after construction; all analyses treat it read-only.
struct Netlist {
    std::string name;
    LibraryPtr library;
    std::vector<std::string> primary_inputs;
    std::vector<std::string> primary_outputs;
    std::vector<std::string> nets;
    std::vector<Instance> instances;
    std::optional<RegisterLabels> labels;
};

bool operator==(const Netlist& a, const Netlist& b);

// Checks the structural invariants: known nets only, every net exactly one
// driver, every instance input connected, ports declared, labels keyed by
// exactly the register instances. Throws a Validation error naming the
// offending net/instance.
void validate_netlist(const Netlist& n);

// Indices of register instances, in instance order.
std::vector<size_t> register_instances(const Netlist& n);

}  // namespace regclass
