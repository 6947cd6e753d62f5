#include "regclass/netlist_json.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "regclass/util.hpp"

namespace regclass {

using ordered_json = nlohmann::ordered_json;

Netlist parse_json_netlist(const std::string& json_text, LibraryPtr lib) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("netlist is not valid JSON: ") + e.what());
    }

    Netlist n;
    n.library = std::move(lib);
    try {
        if (!j.is_object()) throw_validation("netlist JSON must be an object");
        n.name = j.at("name").get<std::string>();
        std::string version = j.at("library_version").get<std::string>();
        if (version != n.library->version())
            throw_validation("netlist '" + n.name + "' targets library '" + version +
                             "' but was loaded with '" + n.library->version() + "'");
        const auto& ports = j.at("ports");
        n.primary_inputs = ports.at("inputs").get<std::vector<std::string>>();
        n.primary_outputs = ports.at("outputs").get<std::vector<std::string>>();
        n.nets = j.at("nets").get<std::vector<std::string>>();
        for (const auto& ji : j.at("instances")) {
            Instance inst;
            inst.id = ji.at("id").get<std::string>();
            std::string kind_name = ji.at("kind").get<std::string>();
            inst.kind = n.library->index_of(kind_name);
            if (inst.kind < 0)
                throw_validation("instance '" + inst.id + "' uses unknown cell kind '" +
                                 kind_name + "'");
            inst.inputs = ji.at("inputs").get<std::vector<std::string>>();
            inst.output = ji.at("output").get<std::string>();
            n.instances.push_back(std::move(inst));
        }
        if (j.contains("labels")) {
            RegisterLabels labels;
            for (const auto& [id, value] : j.at("labels").items())
                labels.emplace(id, reg_class_from_string(value.get<std::string>()));
            n.labels = std::move(labels);
        }
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("netlist JSON schema violation: ") + e.what());
    }

    validate_netlist(n);
    return n;
}

std::string emit_json_netlist(const Netlist& n) {
    ordered_json j;
    j["name"] = n.name;
    j["library_version"] = n.library->version();
    j["ports"]["inputs"] = n.primary_inputs;
    j["ports"]["outputs"] = n.primary_outputs;
    j["nets"] = n.nets;
    j["instances"] = ordered_json::array();
    for (const Instance& inst : n.instances) {
        ordered_json ji;
        ji["id"] = inst.id;
        ji["kind"] = n.library->kind(inst.kind).name;
        ji["inputs"] = inst.inputs;
        ji["output"] = inst.output;
        j["instances"].push_back(std::move(ji));
    }
    if (n.labels) {
        ordered_json jl = ordered_json::object();
        for (const auto& [id, cls] : *n.labels) jl[id] = std::string(to_string(cls));
        j["labels"] = std::move(jl);
    }
    return j.dump(2) + "\n";
}

Netlist load_netlist_file(const std::string& path, LibraryPtr lib) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_validation("cannot open netlist file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_json_netlist(buf.str(), std::move(lib));
    } catch (Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

void save_netlist_file(const std::string& path, const Netlist& n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_validation("cannot write netlist file '" + path + "'");
    out << emit_json_netlist(n);
}

}  // namespace regclass
