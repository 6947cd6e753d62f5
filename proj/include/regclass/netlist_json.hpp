#pragma once

#include <string>

#include "regclass/netlist.hpp"

namespace regclass {

// Parses the JSON netlist format (see docs/formats.md) and validates it.
// Kind names resolve against `lib`; pass the library the netlist was written
// for (defaults to the built-in one).
Netlist parse_json_netlist(const std::string& json_text, LibraryPtr lib = default_library());

// Canonical emission: stable field order, two-space indent, trailing newline.
// emit(parse(emit(n))) is byte-identical to emit(n).
std::string emit_json_netlist(const Netlist& n);

Netlist load_netlist_file(const std::string& path, LibraryPtr lib = default_library());
void save_netlist_file(const std::string& path, const Netlist& n);

}  // namespace regclass
