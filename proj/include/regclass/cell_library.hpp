#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace regclass {

enum class CellCategory { Combinational, Register, InputPort, OutputPort };

std::string_view to_string(CellCategory c);
CellCategory cell_category_from_string(std::string_view s);

// Single-output boolean function. Row r assigns input i the bit (r >> i) & 1,
// i.e. the first input is the least significant selector bit. The hex form is
// the output column read as one integer (row 0 = LSB), zero-padded to
// ceil(2^arity / 4) digits.
struct TruthTable {
    int arity = 0;
    std::vector<bool> bits;  // size 1 << arity

    bool value(unsigned row) const { return bits[row]; }
    size_t row_count() const { return bits.size(); }
    std::string to_hex() const;
    static TruthTable from_hex(int arity, std::string_view hex);
    bool operator==(const TruthTable&) const = default;
};

struct CellKind {
    std::string name;
    CellCategory category = CellCategory::Combinational;
    int input_count = 0;
    std::optional<TruthTable> truth_table;  // required for Combinational kinds

    bool operator==(const CellKind&) const = default;
};

// Ordered cell alphabet. The order is stable and fixes the one-hot positions
// used by feature extraction; the fingerprint commits to the full contents.
class CellLibrary {
public:
    CellLibrary(std::string version, std::vector<CellKind> kinds);

    const std::string& version() const { return version_; }
    const std::vector<CellKind>& kinds() const { return kinds_; }
    const CellKind& kind(int index) const { return kinds_[static_cast<size_t>(index)]; }
    int size() const { return static_cast<int>(kinds_.size()); }

    // Returns -1 when the name is unknown.
    int index_of(std::string_view name) const;
    int input_port_kind() const { return input_kind_; }
    int output_port_kind() const { return output_kind_; }

    const std::string& fingerprint() const { return fingerprint_; }

private:
    std::string version_;
    std::vector<CellKind> kinds_;
    std::unordered_map<std::string, int> by_name_;
    int input_kind_ = -1;
    int output_kind_ = -1;
    std::string fingerprint_;
};

using LibraryPtr = std::shared_ptr<const CellLibrary>;

// Built-in 11-kind library (2 port kinds, DFF, 8 combinational kinds).
const LibraryPtr& default_library();

// Library for normalized netlists: ports, the register kinds and 0-input
// constant kinds of `lib`, plus AND2/OR2/INV. Idempotent.
LibraryPtr aoi_library(const CellLibrary& lib);

// JSON manifest: {"version": ..., "kinds": [{name, category, inputs, truth_table?}]}.
LibraryPtr parse_library_manifest(const std::string& json_text);
std::string emit_library_manifest(const CellLibrary& lib);

// Verilog instantiation port names: registers use D/Q, everything else
// A,B,C,.../Y by position.
std::string cell_input_port_name(const CellKind& kind, int position);
std::string cell_output_port_name(const CellKind& kind);

}  // namespace regclass
