#include "regclass/synthgen.hpp"

#include <algorithm>
#include <filesystem>
#include <json.hpp>
#include <set>

#include "regclass/graph.hpp"
#include "regclass/netlist_json.hpp"

namespace regclass {

FsmSpec FsmSpec::random(Rng& rng, int state_count, int input_class_count, bool moore,
                        int output_count) {
    if (state_count < 2 || state_count > 32)
        throw_validation("fsm state count must be in [2, 32]");
    if (input_class_count < 2 || (input_class_count & (input_class_count - 1)) != 0 ||
        input_class_count > 16)
        throw_validation("fsm input class count must be a power of two in [2, 16]");
    if (output_count < 1 || output_count > 32)
        throw_validation("fsm output count must be in [1, 32]");

    FsmSpec spec;
    spec.state_count = state_count;
    spec.input_class_count = input_class_count;
    spec.moore = moore;
    spec.output_count = output_count;

    spec.transition.assign(static_cast<size_t>(state_count),
                           std::vector<int>(static_cast<size_t>(input_class_count), 0));
    for (int s = 0; s < state_count; ++s) {
        // class 0 walks a Hamiltonian cycle so the machine is strongly connected
        spec.transition[s][0] = (s + 1) % state_count;
        for (int c = 1; c < input_class_count; ++c)
            spec.transition[s][c] = static_cast<int>(rng.below(state_count));
    }

    int cols = moore ? 1 : input_class_count;
    double density = moore ? 0.5 : 0.35;
    spec.output_bits.assign(static_cast<size_t>(state_count),
                            std::vector<uint32_t>(static_cast<size_t>(cols), 0));
    for (int s = 0; s < state_count; ++s)
        for (int c = 0; c < cols; ++c)
            for (int o = 0; o < output_count; ++o)
                if (rng.bernoulli(density)) spec.output_bits[s][c] |= 1u << o;
    for (int o = 0; o < output_count; ++o) {
        bool any = false;
        for (int s = 0; s < state_count && !any; ++s)
            for (int c = 0; c < cols && !any; ++c)
                any = (spec.output_bits[s][c] >> o) & 1;
        if (!any)
            spec.output_bits[rng.below(state_count)][rng.below(cols)] |= 1u << o;
    }
    return spec;
}

std::string_view to_string(StateEncoding e) {
    return e == StateEncoding::OneHot ? "onehot" : "binary";
}

StateEncoding state_encoding_from_string(std::string_view s) {
    if (s == "onehot") return StateEncoding::OneHot;
    if (s == "binary") return StateEncoding::Binary;
    throw_validation("unknown state encoding '" + std::string(s) + "'");
}

VariantStyle variant_style(int variant) {
    switch (variant) {
        case 0: return {false, false, 0.0, false};
        case 1: return {true, false, 0.06, false};
        case 2: return {false, true, 0.06, true};
        case 3: return {true, true, 0.0, false};
    }
    throw_validation("variant must be in [0, 3]");
}

NetlistBuilder::NetlistBuilder(std::string name, VariantStyle style, Rng sprinkle_rng)
    : style_(style), sprinkle_rng_(sprinkle_rng) {
    n_.name = std::move(name);
    n_.library = default_library();
}

std::string NetlistBuilder::fresh_net() {
    std::string id = "n" + std::to_string(net_counter_++);
    n_.nets.push_back(id);
    return id;
}

std::string NetlistBuilder::pi(const std::string& name) {
    n_.nets.push_back(name);
    n_.primary_inputs.push_back(name);
    return name;
}

void NetlistBuilder::po(const std::string& name, const std::string& net) {
    // dedicated output buffer, so the port name is a net of its own
    Instance inst;
    inst.id = "po_" + name;
    inst.kind = n_.library->index_of("BUF");
    inst.inputs = {net};
    inst.output = name;
    n_.nets.push_back(name);
    n_.instances.push_back(std::move(inst));
    n_.primary_outputs.push_back(name);
}

std::string NetlistBuilder::declare_reg(const std::string& id, RegClass label) {
    Instance inst;
    inst.id = id;
    inst.kind = n_.library->index_of("DFF");
    inst.inputs = {""};  // patched by connect_reg
    inst.output = id + "_q";
    n_.nets.push_back(inst.output);
    pending_regs_[id] = n_.instances.size();
    n_.instances.push_back(std::move(inst));
    labels_[id] = label;
    return id + "_q";
}

void NetlistBuilder::connect_reg(const std::string& id, const std::string& d_net) {
    auto it = pending_regs_.find(id);
    if (it == pending_regs_.end())
        throw_validation("register '" + id + "' is unknown or already connected");
    n_.instances[it->second].inputs[0] = d_net;
    pending_regs_.erase(it);
}

std::string NetlistBuilder::cell(const std::string& kind, std::vector<std::string> inputs) {
    int k = n_.library->index_of(kind);
    if (k < 0) throw_validation("cell kind '" + kind + "' is not in the library");
    Instance inst;
    inst.id = "g" + std::to_string(gate_counter_++);
    inst.kind = k;
    inst.inputs = std::move(inputs);
    inst.output = fresh_net();
    n_.instances.push_back(inst);
    return inst.output;
}

std::string NetlistBuilder::inv(const std::string& a) {
    auto it = inv_cache_.find(a);
    if (it != inv_cache_.end()) return it->second;
    std::string out = cell("INV", {a});
    inv_cache_[a] = out;
    return out;
}

std::string NetlistBuilder::buf(const std::string& a) {
    return cell("BUF", {a});
}

std::string NetlistBuilder::and2(const std::string& a, const std::string& b) {
    if (style_.nand_style) return inv(cell("NAND2", {a, b}));
    return cell("AND2", {a, b});
}

std::string NetlistBuilder::or2(const std::string& a, const std::string& b) {
    if (style_.nand_style) return cell("NAND2", {inv(a), inv(b)});
    return cell("OR2", {a, b});
}

std::string NetlistBuilder::xor2(const std::string& a, const std::string& b) {
    return cell("XOR2", {a, b});
}

std::string NetlistBuilder::mux2(const std::string& sel, const std::string& a0,
                                 const std::string& a1) {
    return cell("MUX2", {sel, a0, a1});
}

std::string NetlistBuilder::reduce(std::vector<std::string> nets, const std::string& op) {
    if (nets.empty()) throw_validation("cannot reduce an empty net list");
    auto apply = [this, &op](const std::string& a, const std::string& b) {
        if (op == "and") return and2(a, b);
        if (op == "or") return or2(a, b);
        return xor2(a, b);
    };
    if (style_.chain_trees) {
        std::string acc = nets[0];
        for (size_t i = 1; i < nets.size(); ++i) acc = apply(acc, nets[i]);
        return acc;
    }
    while (nets.size() > 1) {
        std::vector<std::string> next;
        for (size_t i = 0; i + 1 < nets.size(); i += 2) next.push_back(apply(nets[i], nets[i + 1]));
        if (nets.size() % 2) next.push_back(nets.back());
        nets = std::move(next);
    }
    return nets[0];
}

std::string NetlistBuilder::and_tree(std::vector<std::string> nets) {
    return reduce(std::move(nets), "and");
}

std::string NetlistBuilder::or_tree(std::vector<std::string> nets) {
    return reduce(std::move(nets), "or");
}

std::string NetlistBuilder::xor_tree(std::vector<std::string> nets) {
    return reduce(std::move(nets), "xor");
}

Netlist NetlistBuilder::finish() {
    if (finished_) throw_validation("netlist builder already finished");
    finished_ = true;
    if (!pending_regs_.empty())
        throw_validation("register '" + pending_regs_.begin()->first + "' was never connected");

    if (style_.buffer_rate > 0) {
        int inv_kind = n_.library->index_of("INV");
        int buf_kind = n_.library->index_of("BUF");
        int sprinkled = 0;
        size_t original = n_.instances.size();
        for (size_t i = 0; i < original; ++i) {
            for (size_t pin = 0; pin < n_.instances[i].inputs.size(); ++pin) {
                if (!sprinkle_rng_.bernoulli(style_.buffer_rate)) continue;
                std::string src = n_.instances[i].inputs[pin];
                std::string out;
                if (style_.buffer_as_inv_pair) {
                    Instance first{"sp" + std::to_string(sprinkled++), inv_kind, {src}, fresh_net()};
                    Instance second{"sp" + std::to_string(sprinkled++), inv_kind, {first.output},
                                    fresh_net()};
                    out = second.output;
                    n_.instances.push_back(std::move(first));
                    n_.instances.push_back(std::move(second));
                } else {
                    Instance b{"sp" + std::to_string(sprinkled++), buf_kind, {src}, fresh_net()};
                    out = b.output;
                    n_.instances.push_back(std::move(b));
                }
                n_.instances[i].inputs[pin] = out;
            }
        }
    }

    n_.labels = std::move(labels_);
    validate_netlist(n_);
    return std::move(n_);
}

FsmNets build_fsm(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc,
                  const std::vector<std::string>& control_nets) {
    int classes = spec.input_class_count;
    int cbits = 0;
    while ((1 << cbits) < classes) ++cbits;
    if (static_cast<int>(control_nets.size()) != cbits)
        throw_validation("fsm expects " + std::to_string(cbits) + " control nets");

    std::vector<std::string> cls(static_cast<size_t>(classes));
    for (int c = 0; c < classes; ++c) {
        std::vector<std::string> lits;
        for (int bit = 0; bit < cbits; ++bit)
            lits.push_back((c >> bit) & 1 ? control_nets[static_cast<size_t>(bit)]
                                          : b.inv(control_nets[static_cast<size_t>(bit)]));
        cls[static_cast<size_t>(c)] = b.and_tree(lits);
    }

    int states = spec.state_count;
    FsmNets out;
    std::vector<std::string> q;
    std::vector<std::string> ind(static_cast<size_t>(states));
    int reg_bits;
    if (enc == StateEncoding::OneHot) {
        reg_bits = states;
        for (int s = 0; s < states; ++s) {
            std::string id = "fsm_s" + std::to_string(s);
            q.push_back(b.declare_reg(id, RegClass::State));
            out.state_regs.push_back(id);
            ind[static_cast<size_t>(s)] = q.back();
        }
    } else {
        reg_bits = 1;
        while ((1 << reg_bits) < states) ++reg_bits;
        for (int bit = 0; bit < reg_bits; ++bit) {
            std::string id = "fsm_b" + std::to_string(bit);
            q.push_back(b.declare_reg(id, RegClass::State));
            out.state_regs.push_back(id);
        }
        for (int s = 0; s < states; ++s) {
            std::vector<std::string> lits;
            for (int bit = 0; bit < reg_bits; ++bit)
                lits.push_back((s >> bit) & 1 ? q[static_cast<size_t>(bit)]
                                              : b.inv(q[static_cast<size_t>(bit)]));
            ind[static_cast<size_t>(s)] = b.and_tree(lits);
        }
    }

    std::vector<std::vector<std::string>> term(static_cast<size_t>(states));
    for (int s = 0; s < states; ++s)
        for (int c = 0; c < classes; ++c)
            term[static_cast<size_t>(s)].push_back(
                b.and2(ind[static_cast<size_t>(s)], cls[static_cast<size_t>(c)]));

    if (enc == StateEncoding::OneHot) {
        for (int s2 = 0; s2 < states; ++s2) {
            std::vector<std::string> hits;
            for (int s = 0; s < states; ++s)
                for (int c = 0; c < classes; ++c)
                    if (spec.transition[static_cast<size_t>(s)][static_cast<size_t>(c)] == s2)
                        hits.push_back(term[static_cast<size_t>(s)][static_cast<size_t>(c)]);
            // input class 0 cycles through every state, so hits is never empty
            b.connect_reg("fsm_s" + std::to_string(s2), b.or_tree(hits));
        }
    } else {
        for (int bit = 0; bit < reg_bits; ++bit) {
            std::vector<std::string> hits;
            for (int s = 0; s < states; ++s)
                for (int c = 0; c < classes; ++c)
                    if ((spec.transition[static_cast<size_t>(s)][static_cast<size_t>(c)] >> bit) & 1)
                        hits.push_back(term[static_cast<size_t>(s)][static_cast<size_t>(c)]);
            b.connect_reg("fsm_b" + std::to_string(bit), b.or_tree(hits));
        }
    }

    for (int o = 0; o < spec.output_count; ++o) {
        std::vector<std::string> terms;
        for (int s = 0; s < states; ++s) {
            if (spec.moore) {
                if ((spec.output_bits[static_cast<size_t>(s)][0] >> o) & 1)
                    terms.push_back(ind[static_cast<size_t>(s)]);
            } else {
                for (int c = 0; c < classes; ++c)
                    if ((spec.output_bits[static_cast<size_t>(s)][static_cast<size_t>(c)] >> o) & 1)
                        terms.push_back(term[static_cast<size_t>(s)][static_cast<size_t>(c)]);
            }
        }
        out.outputs.push_back(b.or_tree(terms));
    }
    return out;
}

CounterNets build_counter(NetlistBuilder& b, const std::string& name, int bits) {
    if (bits < 2 || bits > 24) throw_validation("counter width must be in [2, 24]");
    CounterNets cnt;
    for (int i = 0; i < bits; ++i) {
        std::string id = name + "_c" + std::to_string(i);
        cnt.regs.push_back(id);
        cnt.q.push_back(b.declare_reg(id, RegClass::Data));
    }
    std::vector<std::string> inc(static_cast<size_t>(bits));
    inc[0] = b.inv(cnt.q[0]);
    std::string carry = cnt.q[0];
    for (int i = 1; i < bits; ++i) {
        inc[static_cast<size_t>(i)] = b.xor2(cnt.q[static_cast<size_t>(i)], carry);
        carry = b.and2(carry, cnt.q[static_cast<size_t>(i)]);
    }
    cnt.terminal = carry;  // AND of all bits
    std::string clear = b.inv(cnt.terminal);
    for (int i = 0; i < bits; ++i)
        b.connect_reg(cnt.regs[static_cast<size_t>(i)], b.and2(inc[static_cast<size_t>(i)], clear));
    return cnt;
}

std::vector<std::string> build_enable_bank(NetlistBuilder& b, const std::string& name,
                                           const std::string& enable,
                                           const std::vector<std::string>& data) {
    std::vector<std::string> q;
    for (size_t i = 0; i < data.size(); ++i) {
        std::string id = name + "_r" + std::to_string(i);
        q.push_back(b.declare_reg(id, RegClass::Data));
        b.connect_reg(id, b.mux2(enable, q.back(), data[i]));
    }
    return q;
}

std::vector<std::string> build_pipeline(NetlistBuilder& b, const std::string& name, int stages,
                                        const std::vector<std::string>& inputs) {
    std::vector<std::string> cur = inputs;
    for (int s = 0; s < stages; ++s) {
        std::vector<std::string> next;
        for (size_t i = 0; i < cur.size(); ++i) {
            std::string id = name + "_s" + std::to_string(s) + "_" + std::to_string(i);
            next.push_back(b.declare_reg(id, RegClass::Data));
            b.connect_reg(id, cur[i]);
        }
        cur = std::move(next);
    }
    return cur;
}

std::vector<std::string> build_shift(NetlistBuilder& b, const std::string& name, int length,
                                     const std::string& serial_in) {
    std::vector<std::string> taps;
    std::string prev = serial_in;
    for (int i = 0; i < length; ++i) {
        std::string id = name + "_" + std::to_string(i);
        taps.push_back(b.declare_reg(id, RegClass::Data));
        b.connect_reg(id, prev);
        prev = taps.back();
    }
    return taps;
}

AdderNets build_adder(NetlistBuilder& b, const std::vector<std::string>& a,
                      const std::vector<std::string>& bnets) {
    if (a.size() != bnets.size() || a.empty()) throw_validation("adder operand width mismatch");
    AdderNets out;
    out.sum.push_back(b.xor2(a[0], bnets[0]));
    std::string carry = b.and2(a[0], bnets[0]);
    for (size_t i = 1; i < a.size(); ++i) {
        std::string axb = b.xor2(a[i], bnets[i]);
        out.sum.push_back(b.xor2(axb, carry));
        carry = b.or2(b.and2(a[i], bnets[i]), b.and2(carry, axb));
    }
    out.carry_out = carry;
    return out;
}

namespace {

std::vector<std::string> control_inputs(NetlistBuilder& b, int classes) {
    int bits = 0;
    while ((1 << bits) < classes) ++bits;
    std::vector<std::string> ctl;
    for (int i = 0; i < bits; ++i) ctl.push_back(b.pi("ctl" + std::to_string(i)));
    return ctl;
}

std::vector<std::string> data_inputs(NetlistBuilder& b, const std::string& prefix, int count) {
    std::vector<std::string> nets;
    for (int i = 0; i < count; ++i) nets.push_back(b.pi(prefix + std::to_string(i)));
    return nets;
}

std::vector<std::string> slice(const std::vector<std::string>& v, size_t from, size_t count) {
    return {v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(from + count)};
}

void asm_traffic_ctrl(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 6);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    auto lat = build_enable_bank(b, "lat", fsm.outputs[0], din);
    auto walk = build_shift(b, "walkreg", 10, fsm.outputs[1]);
    auto stage = build_pipeline(b, "stage", 2, slice(lat, 0, 5));
    auto mix = stage;
    mix.push_back(walk.back());
    b.po("parity", b.xor_tree(mix));
    b.po("blink", fsm.outputs[2]);
    b.po("walk_out", walk.back());
}

void asm_handshake_fsm(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 8);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    auto buf = build_enable_bank(b, "reqbuf", fsm.outputs[0], din);
    auto txp = build_pipeline(b, "txp", 1, buf);
    b.po("req", fsm.outputs[0]);
    b.po("ack", fsm.outputs[1]);
    b.po("tx", b.xor_tree(txp));
}

void asm_seq_detector(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 1);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    auto taps = build_shift(b, "taps", 14, din[0]);
    std::string match =
        b.and_tree({taps[1], b.inv(taps[4]), taps[7], b.inv(taps[10]), taps[13]});
    auto cap = build_enable_bank(b, "cap", fsm.outputs[1], slice(taps, 0, 8));
    auto dly = build_pipeline(b, "dly", 2, slice(cap, 0, 4));
    b.po("hit", b.and2(match, fsm.outputs[0]));
    b.po("sig", b.xor_tree(dly));
}

void asm_uart_like(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 1);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    CounterNets cnt = build_counter(b, "cnt", 6);
    auto rx = build_shift(b, "rx", 8, din[0]);
    std::string load = b.and2(fsm.outputs[0], cnt.terminal);
    auto hold = build_enable_bank(b, "hold", load, rx);
    b.po("rdy", fsm.outputs[1]);
    b.po("baud_tc", cnt.terminal);
    b.po("d_msb", hold.back());
}

void asm_packet_parser(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 6);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    auto hdr = build_enable_bank(b, "hdr", fsm.outputs[0], din);
    auto len = build_enable_bank(b, "len", fsm.outputs[1], slice(din, 2, 4));
    auto pay = build_pipeline(b, "pay", 2, slice(hdr, 0, 4));
    auto crc = pay;
    crc.insert(crc.end(), len.begin(), len.end());
    b.po("ok", fsm.outputs[2]);
    b.po("crc", b.xor_tree(crc));
}

void asm_alu_ctrl(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto a = data_inputs(b, "a", 4);
    auto bb = data_inputs(b, "b", 4);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    AdderNets add = build_adder(b, a, bb);
    auto word = add.sum;
    word.push_back(add.carry_out);
    auto res = build_enable_bank(b, "res", fsm.outputs[0], word);
    auto flag = build_pipeline(b, "flag", 2, {add.carry_out, fsm.outputs[1]});
    b.po("zero", b.inv(b.or_tree(res)));
    b.po("op_ok", fsm.outputs[2]);
    b.po("cflag", b.xor2(flag[0], flag[1]));
}

void asm_memctrl_like(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 8);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    auto addr = build_enable_bank(b, "addr", fsm.outputs[0], din);
    auto wdat = build_enable_bank(b, "wdat", fsm.outputs[1], slice(din, 0, 6));
    auto ref = build_shift(b, "ref", 6, fsm.outputs[2]);
    b.po("row", b.xor_tree(addr));
    b.po("wpar", b.xor_tree(wdat));
    b.po("ref_due", ref.back());
}

void asm_crypto_round(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 8);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    auto key = build_enable_bank(b, "key", fsm.outputs[0], din);
    std::vector<std::string> mix1, mix2;
    for (size_t i = 0; i < 8; ++i) mix1.push_back(b.xor2(din[i], key[i]));
    auto rnd1 = build_pipeline(b, "rnd1", 1, mix1);
    for (size_t i = 0; i < 8; ++i) mix2.push_back(b.xor2(rnd1[i], key[(i + 3) % 8]));
    auto rnd2 = build_pipeline(b, "rnd2", 1, mix2);
    b.po("ct", b.xor_tree(rnd2));
    b.po("busy", fsm.outputs[1]);
}

void asm_dma_engine(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 6);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    CounterNets cnt = build_counter(b, "cnt", 5);
    auto src = build_enable_bank(b, "src", fsm.outputs[0], din);
    auto dst = build_enable_bank(b, "dst", fsm.outputs[1], src);
    b.po("done", b.and2(fsm.outputs[2], cnt.terminal));
    b.po("dpar", b.xor_tree(dst));
}

void asm_timer_unit(NetlistBuilder& b, const FsmSpec& spec, StateEncoding enc) {
    auto ctl = control_inputs(b, spec.input_class_count);
    auto din = data_inputs(b, "din", 8);
    FsmNets fsm = build_fsm(b, spec, enc, ctl);
    CounterNets cnt = build_counter(b, "cnt", 8);
    auto thr = build_enable_bank(b, "thr", fsm.outputs[0], din);
    std::vector<std::string> eq;
    for (size_t i = 0; i < 8; ++i) eq.push_back(b.inv(b.xor2(cnt.q[i], thr[i])));
    b.po("fire", b.and2(b.and_tree(eq), fsm.outputs[1]));
    b.po("wrap", cnt.terminal);
}

struct ArchetypeDef {
    const char* name;
    int states;
    int classes;
    int outputs;
    bool moore;
    void (*assemble)(NetlistBuilder&, const FsmSpec&, StateEncoding);
};

const ArchetypeDef kArchetypes[] = {
    {"traffic_ctrl", 6, 2, 3, true, asm_traffic_ctrl},
    {"handshake_fsm", 4, 4, 2, false, asm_handshake_fsm},
    {"seq_detector", 5, 2, 2, true, asm_seq_detector},
    {"uart_like", 4, 2, 2, true, asm_uart_like},
    {"packet_parser", 6, 4, 3, false, asm_packet_parser},
    {"alu_ctrl", 4, 4, 3, true, asm_alu_ctrl},
    {"memctrl_like", 7, 2, 3, true, asm_memctrl_like},
    {"crypto_round", 4, 2, 2, true, asm_crypto_round},
    {"dma_engine", 5, 4, 3, false, asm_dma_engine},
    {"timer_unit", 4, 2, 2, true, asm_timer_unit},
};

const ArchetypeDef* find_archetype(const std::string& name) {
    for (const ArchetypeDef& def : kArchetypes)
        if (name == def.name) return &def;
    return nullptr;
}

}  // namespace

std::vector<std::string> builtin_archetypes() {
    std::vector<std::string> names;
    for (const ArchetypeDef& def : kArchetypes) names.push_back(def.name);
    return names;
}

Netlist generate_design(const std::string& archetype, StateEncoding enc, int variant,
                        uint64_t seed) {
    const ArchetypeDef* def = find_archetype(archetype);
    if (!def) throw_validation("unknown archetype '" + archetype + "'");
    if (variant < 0 || variant > 3) throw_validation("variant must be in [0, 3]");

    uint64_t atag = fnv1a64(archetype);
    Rng spec_rng = Rng(seed).fork(atag).fork(0);
    FsmSpec spec = FsmSpec::random(spec_rng, def->states, def->classes, def->moore, def->outputs);

    int enc_idx = enc == StateEncoding::Binary ? 1 : 0;
    Rng sprinkle = Rng(seed).fork(atag).fork(2 + static_cast<uint64_t>(variant) * 2 +
                                             static_cast<uint64_t>(enc_idx));
    std::string name = archetype + "_" + std::string(to_string(enc)) + "_v" +
                       std::to_string(variant);
    NetlistBuilder b(name, variant_style(variant), sprinkle);
    def->assemble(b, spec, enc);
    Netlist n = b.finish();

    // invariant the classifiers rely on: labeled state registers sit on cycles
    CircuitGraph g = build_graph(n);
    SccPartition scc = tarjan_scc(g);
    for (size_t idx : register_instances(n)) {
        const std::string& id = n.instances[idx].id;
        if (n.labels->at(id) == RegClass::State && !scc.on_cycle[idx])
            throw_validation("generated state register '" + id + "' is not on a cycle");
    }
    return n;
}

std::string gen_config_json(const GenConfig& cfg) {
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["archetypes"] = cfg.archetypes.empty() ? builtin_archetypes() : cfg.archetypes;
    j["variants"] = cfg.variants;
    j["encodings"] = nlohmann::ordered_json::array();
    for (StateEncoding e : cfg.encodings) j["encodings"].push_back(std::string(to_string(e)));
    return j.dump(2) + "\n";
}

DatasetManifest build_corpus(const GenConfig& cfg) {
    if (cfg.out_dir.empty()) throw_validation("corpus output directory is required");
    if (cfg.variants < 1 || cfg.variants > 4)
        throw_validation("variant count must be in [1, 4]");
    if (cfg.encodings.empty()) throw_validation("at least one state encoding is required");

    std::vector<std::string> archetypes =
        cfg.archetypes.empty() ? builtin_archetypes() : cfg.archetypes;

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec)
        throw_validation("cannot create directory '" + cfg.out_dir + "': " + ec.message());

    DatasetManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.seed = cfg.seed;
    manifest.config_hash = to_hex64(fnv1a64(gen_config_json(cfg)));

    std::set<std::string> written;
    for (const std::string& arch : archetypes) {
        for (StateEncoding enc : cfg.encodings) {
            for (int v = 0; v < cfg.variants; ++v) {
                Netlist n = generate_design(arch, enc, v, cfg.seed);
                std::string file = n.name + ".json";
                if (!written.insert(file).second)
                    throw_validation("corpus would write '" + file + "' twice");
                save_netlist_file(cfg.out_dir + "/" + file, n);

                ManifestEntry e;
                e.design = arch;
                e.variant = v;
                e.encoding = std::string(to_string(enc));
                e.path = file;
                e.n_registers = static_cast<int>(register_instances(n).size());
                int n_state = 0;
                for (const auto& [id, cls] : *n.labels) {
                    (void)id;
                    if (cls == RegClass::State) ++n_state;
                }
                e.n_state_registers = n_state;
                manifest.entries.push_back(std::move(e));
            }
        }
    }
    save_manifest(cfg.out_dir + "/manifest.json", manifest);
    return manifest;
}

}  // namespace regclass
