#include "regclass/cell_library.hpp"

#include <algorithm>
#include <json.hpp>

#include "regclass/util.hpp"

namespace regclass {

std::string_view to_string(CellCategory c) {
    switch (c) {
        case CellCategory::Combinational: return "combinational";
        case CellCategory::Register: return "register";
        case CellCategory::InputPort: return "input_port";
        case CellCategory::OutputPort: return "output_port";
    }
    return "?";
}

CellCategory cell_category_from_string(std::string_view s) {
    if (s == "combinational") return CellCategory::Combinational;
    if (s == "register") return CellCategory::Register;
    if (s == "input_port") return CellCategory::InputPort;
    if (s == "output_port") return CellCategory::OutputPort;
    throw_validation("unknown cell category '" + std::string(s) + "'");
}

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string TruthTable::to_hex() const {
    size_t digits = (row_count() + 3) / 4;
    std::string out(digits, '0');
    static const char* kHex = "0123456789abcdef";
    for (size_t d = 0; d < digits; ++d) {
        int nibble = 0;
        for (int b = 0; b < 4; ++b) {
            size_t row = d * 4 + static_cast<size_t>(b);
            if (row < bits.size() && bits[row]) nibble |= 1 << b;
        }
        out[digits - 1 - d] = kHex[nibble];
    }
    return out;
}

TruthTable TruthTable::from_hex(int arity, std::string_view hex) {
    if (arity < 0 || arity > 16) throw_validation("truth table arity out of range");
    size_t rows = size_t(1) << arity;
    size_t digits = (rows + 3) / 4;
    if (hex.size() != digits)
        throw_validation("truth table hex '" + std::string(hex) + "' must have " +
                         std::to_string(digits) + " digits for arity " + std::to_string(arity));
    TruthTable tt;
    tt.arity = arity;
    tt.bits.assign(rows, false);
    for (size_t d = 0; d < digits; ++d) {
        int nibble = hex_digit(hex[digits - 1 - d]);
        if (nibble < 0) throw_validation("invalid hex digit in truth table");
        for (int b = 0; b < 4; ++b) {
            size_t row = d * 4 + static_cast<size_t>(b);
            bool bit = (nibble >> b) & 1;
            if (row < rows) {
                tt.bits[row] = bit;
            } else if (bit) {
                throw_validation("truth table hex has bits beyond 2^arity rows");
            }
        }
    }
    return tt;
}

CellLibrary::CellLibrary(std::string version, std::vector<CellKind> kinds)
    : version_(std::move(version)), kinds_(std::move(kinds)) {
    for (int i = 0; i < static_cast<int>(kinds_.size()); ++i) {
        const CellKind& k = kinds_[static_cast<size_t>(i)];
        if (k.name.empty()) throw_validation("cell kind with empty name");
        if (!by_name_.emplace(k.name, i).second)
            throw_validation("duplicate cell kind name '" + k.name + "'");
        switch (k.category) {
            case CellCategory::Combinational:
                if (!k.truth_table)
                    throw_validation("combinational kind '" + k.name + "' lacks a truth table");
                if (k.truth_table->arity != k.input_count)
                    throw_validation("truth table arity mismatch for kind '" + k.name + "'");
                break;
            case CellCategory::Register:
                if (k.input_count != 1)
                    throw_validation("register kind '" + k.name +
                                     "' must have exactly one data input");
                break;
            case CellCategory::InputPort:
                if (input_kind_ >= 0) throw_validation("more than one input_port kind");
                if (k.input_count != 0) throw_validation("input_port kind takes no inputs");
                input_kind_ = i;
                break;
            case CellCategory::OutputPort:
                if (output_kind_ >= 0) throw_validation("more than one output_port kind");
                if (k.input_count != 1) throw_validation("output_port kind takes one input");
                output_kind_ = i;
                break;
        }
        if (k.input_count < 0 || k.input_count > 26)
            throw_validation("kind '" + k.name + "' input count out of supported range");
    }
    if (input_kind_ < 0 || output_kind_ < 0)
        throw_validation("library must declare input_port and output_port kinds");

    std::string canon = version_;
    for (const CellKind& k : kinds_) {
        canon += '|';
        canon += k.name;
        canon += ':';
        canon += to_string(k.category);
        canon += ':';
        canon += std::to_string(k.input_count);
        canon += ':';
        if (k.truth_table) canon += k.truth_table->to_hex();
    }
    fingerprint_ = to_hex64(fnv1a64(canon));
}

int CellLibrary::index_of(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? -1 : it->second;
}

namespace {

CellKind comb(std::string name, int inputs, std::string_view hex) {
    CellKind k;
    k.name = std::move(name);
    k.category = CellCategory::Combinational;
    k.input_count = inputs;
    k.truth_table = TruthTable::from_hex(inputs, hex);
    return k;
}

CellKind port(std::string name, CellCategory cat) {
    CellKind k;
    k.name = std::move(name);
    k.category = cat;
    k.input_count = cat == CellCategory::OutputPort ? 1 : 0;
    return k;
}

CellKind dff(std::string name) {
    CellKind k;
    k.name = std::move(name);
    k.category = CellCategory::Register;
    k.input_count = 1;
    return k;
}

}  // namespace

const LibraryPtr& default_library() {
    static const LibraryPtr lib = std::make_shared<CellLibrary>(
        "default-1",
        std::vector<CellKind>{
            port("INPUT", CellCategory::InputPort),
            port("OUTPUT", CellCategory::OutputPort),
            dff("DFF"),
            comb("INV", 1, "1"),
            comb("BUF", 1, "2"),
            comb("AND2", 2, "8"),
            comb("OR2", 2, "e"),
            comb("NAND2", 2, "7"),
            comb("NOR2", 2, "1"),
            comb("XOR2", 2, "6"),
            // MUX2(S, A, B) = S ? B : A, with S as input 0.
            comb("MUX2", 3, "e4"),
        });
    return lib;
}

LibraryPtr aoi_library(const CellLibrary& lib) {
    std::vector<CellKind> kinds;
    kinds.push_back(port("INPUT", CellCategory::InputPort));
    kinds.push_back(port("OUTPUT", CellCategory::OutputPort));
    for (const CellKind& k : lib.kinds()) {
        if (k.category == CellCategory::Register) kinds.push_back(k);
    }
    for (const CellKind& k : lib.kinds()) {
        if (k.category == CellCategory::Combinational && k.input_count == 0)
            kinds.push_back(k);
    }
    auto add_gate = [&kinds](const CellKind& gate) {
        for (const CellKind& k : kinds)
            if (k.name == gate.name) {
                if (k == gate) return;
                throw_validation("library kind '" + gate.name +
                                 "' conflicts with the normalization gate set");
            }
        kinds.push_back(gate);
    };
    add_gate(comb("AND2", 2, "8"));
    add_gate(comb("OR2", 2, "e"));
    add_gate(comb("INV", 1, "1"));

    std::string version = lib.version();
    constexpr std::string_view kSuffix = "+aoi";
    if (version.size() < kSuffix.size() ||
        version.compare(version.size() - kSuffix.size(), kSuffix.size(), kSuffix) != 0)
        version += kSuffix;
    return std::make_shared<CellLibrary>(std::move(version), std::move(kinds));
}

LibraryPtr parse_library_manifest(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("library manifest is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("version") || !j.contains("kinds"))
        throw_validation("library manifest must be an object with 'version' and 'kinds'");
    std::vector<CellKind> kinds;
    for (const auto& jk : j.at("kinds")) {
        CellKind k;
        k.name = jk.at("name").get<std::string>();
        k.category = cell_category_from_string(jk.at("category").get<std::string>());
        k.input_count = jk.at("inputs").get<int>();
        if (jk.contains("truth_table"))
            k.truth_table = TruthTable::from_hex(k.input_count, jk.at("truth_table").get<std::string>());
        kinds.push_back(std::move(k));
    }
    return std::make_shared<CellLibrary>(j.at("version").get<std::string>(), std::move(kinds));
}

std::string emit_library_manifest(const CellLibrary& lib) {
    nlohmann::json j;
    j["version"] = lib.version();
    j["kinds"] = nlohmann::json::array();
    for (const CellKind& k : lib.kinds()) {
        nlohmann::json jk;
        jk["name"] = k.name;
        jk["category"] = std::string(to_string(k.category));
        jk["inputs"] = k.input_count;
        if (k.truth_table) jk["truth_table"] = k.truth_table->to_hex();
        j["kinds"].push_back(std::move(jk));
    }
    return j.dump(2) + "\n";
}

std::string cell_input_port_name(const CellKind& kind, int position) {
    if (kind.category == CellCategory::Register) return "D";
    return std::string(1, static_cast<char>('A' + position));
}

std::string cell_output_port_name(const CellKind& kind) {
    if (kind.category == CellCategory::Register) return "Q";
    return "Y";
}

}  // namespace regclass
