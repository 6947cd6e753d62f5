#pragma once

#include <string>

#include "regclass/netlist.hpp"

namespace regclass {

// Flat structural Verilog subset: one module, scalar input/output/wire
// declarations, named-port cell instantiations. Behavioral constructs are
// rejected. Errors carry line:column positions.
Netlist parse_verilog_subset(const std::string& text, LibraryPtr lib);

// Emits the same subset; parse_verilog_subset(emit_verilog(n)) reproduces n
// minus register labels, which the Verilog form does not carry.
std::string emit_verilog(const Netlist& n);

}  // namespace regclass
