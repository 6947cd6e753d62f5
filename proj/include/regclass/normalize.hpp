#pragma once

#include "regclass/netlist.hpp"

namespace regclass {

// Rewrites every combinational cell into 2-input AND, 2-input OR and INV
// gates via a fixed sum-of-products expansion of its truth table. The
// construction is deterministic and unoptimized so downstream structural
// comparisons see the same shape for the same function. Registers and
// 0-input constant kinds pass through unchanged; register ids, port lists
// and labels are preserved. Idempotent on already-normalized netlists.
Netlist normalize_to_aoi(const Netlist& n);

}  // namespace regclass
