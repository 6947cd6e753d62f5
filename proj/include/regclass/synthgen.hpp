#pragma once

#include <string>
#include <vector>

#include "regclass/evalkit.hpp"
#include "regclass/netlist.hpp"
#include "regclass/util.hpp"

namespace regclass {

// Control-dominated Moore/Mealy machine over a small input alphabet. The
// transition rows for input class 0 form a Hamiltonian cycle, so the state
// graph is always strongly connected and every state register sits on a cycle.
struct FsmSpec {
    int state_count = 0;
    int input_class_count = 0;  // power of two, >= 2
    bool moore = true;
    int output_count = 0;
    std::vector<std::vector<int>> transition;       // [state][class] -> next state
    std::vector<std::vector<uint32_t>> output_bits;  // [state][moore ? 1 : class] -> mask

    static FsmSpec random(Rng& rng, int state_count, int input_class_count, bool moore,
                          int output_count);
};

enum class StateEncoding { OneHot, Binary };
std::string_view to_string(StateEncoding e);
StateEncoding state_encoding_from_string(std::string_view s);

// Structural styles emulating different synthesis runs of the same design.
// Register ids and labels are identical across variants.
struct VariantStyle {
    bool chain_trees = false;      // reduce trees by left fold instead of pairing
    bool nand_style = false;       // realize AND/OR with NAND2 and INV
    double buffer_rate = 0.0;      // chance of rewiring a cell input through a buffer
    bool buffer_as_inv_pair = false;
};
VariantStyle variant_style(int variant);  // 0..3

// Incremental netlist assembly over the default library. Registers are
// declared first (their outputs feed combinational logic) and get their data
// inputs connected once the logic exists; finish() checks nothing was left
// open, applies the buffer sprinkle, and validates.
class NetlistBuilder {
public:
    NetlistBuilder(std::string name, VariantStyle style, Rng sprinkle_rng);

    std::string pi(const std::string& name);
    void po(const std::string& name, const std::string& net);

    std::string declare_reg(const std::string& id, RegClass label);
    void connect_reg(const std::string& id, const std::string& d_net);

    // Raw cell; output net is freshly allocated.
    std::string cell(const std::string& kind, std::vector<std::string> inputs);

    std::string inv(const std::string& a);  // shared per source net
    std::string buf(const std::string& a);
    std::string and2(const std::string& a, const std::string& b);
    std::string or2(const std::string& a, const std::string& b);
    std::string xor2(const std::string& a, const std::string& b);
    std::string mux2(const std::string& sel, const std::string& a0, const std::string& a1);
    std::string and_tree(std::vector<std::string> nets);
    std::string or_tree(std::vector<std::string> nets);
    std::string xor_tree(std::vector<std::string> nets);

    Netlist finish();

private:
    std::string fresh_net();
    std::string reduce(std::vector<std::string> nets, const std::string& op);

    Netlist n_;
    VariantStyle style_;
    Rng sprinkle_rng_;
    RegisterLabels labels_;
    std::map<std::string, size_t> pending_regs_;  // id -> instance index awaiting D
    std::map<std::string, std::string> inv_cache_;
    int net_counter_ = 0;
    int gate_counter_ = 0;
    bool finished_ = false;
};

struct FsmNets {
    std::vector<std::string> state_regs;  // register ids in bit/state order
    std::vector<std::string> outputs;     // output nets, one per spec output
};

FsmNets build_fsm(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc,
                  const std::vector<std::string>& control_nets);

struct CounterNets {
    std::vector<std::string> regs;  // register ids, LSB first
    std::vector<std::string> q;     // output nets
    std::string terminal;           // high for one cycle per wrap
};

// Free-running modulo-2^bits counter that clears itself on the all-ones
// count. The terminal-count feedback puts every bit in one SCC, mirroring
// how synthesized counters look: data registers on cycles.
CounterNets build_counter(NetlistBuilder& b, const std::string& name, int bits);

// Recirculating load bank: q_i holds unless `enable`, classic datapath latch.
std::vector<std::string> build_enable_bank(NetlistBuilder& b, const std::string& name,
                                           const std::string& enable,
                                           const std::vector<std::string>& data);

// Feed-forward register stages; returns the last stage's output nets.
std::vector<std::string> build_pipeline(NetlistBuilder& b, const std::string& name, int stages,
                                        const std::vector<std::string>& inputs);

// Serial shift chain; returns every tap, oldest last.
std::vector<std::string> build_shift(NetlistBuilder& b, const std::string& name, int length,
                                     const std::string& serial_in);

struct AdderNets {
    std::vector<std::string> sum;
    std::string carry_out;
};

AdderNets build_adder(NetlistBuilder& b, const std::vector<std::string>& a,
                      const std::vector<std::string>& bnets);

std::vector<std::string> builtin_archetypes();

// One graph of the benchmark: a fixed control/datapath template whose FSM is
// drawn from `seed`, rendered with the requested encoding and variant style.
// The labels cover every register; state registers are guaranteed on-cycle.
Netlist generate_design(const std::string& archetype, StateEncoding enc, int variant,
                        uint64_t seed);

struct GenConfig {
    uint64_t seed = 1;
    std::string out_dir;
    std::vector<std::string> archetypes;  // empty = builtin_archetypes()
    int variants = 4;
    std::vector<StateEncoding> encodings = {StateEncoding::OneHot, StateEncoding::Binary};
};

std::string gen_config_json(const GenConfig& cfg);

// Writes one JSON netlist per (archetype, encoding, variant) plus
// manifest.json into cfg.out_dir. Manifest paths are relative to the
// directory.
DatasetManifest build_corpus(const GenConfig& cfg);

}  // namespace regclass
