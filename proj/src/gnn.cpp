#include "regclass/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <json.hpp>

namespace regclass {

std::string_view to_string(MessageDirection d) {
    return d == MessageDirection::InNeighbors ? "in_neighbors" : "undirected";
}

MessageDirection message_direction_from_string(std::string_view s) {
    if (s == "in_neighbors") return MessageDirection::InNeighbors;
    if (s == "undirected") return MessageDirection::Undirected;
    throw_validation("unknown message direction '" + std::string(s) + "'");
}

AggregationView make_aggregation_view(const CircuitGraph& g, MessageDirection dir) {
    const int n = g.node_count();
    AggregationView view;
    view.offsets.assign(static_cast<size_t>(n) + 1, 0);
    std::vector<int> scratch;
    std::vector<std::vector<int>> rows(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        scratch.assign(g.in_begin(v), g.in_end(v));
        if (dir == MessageDirection::Undirected)
            scratch.insert(scratch.end(), g.out_begin(v), g.out_end(v));
        scratch.push_back(v);
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        rows[static_cast<size_t>(v)] = scratch;
        view.offsets[static_cast<size_t>(v) + 1] =
            view.offsets[static_cast<size_t>(v)] + static_cast<int>(scratch.size());
    }
    view.members.reserve(static_cast<size_t>(view.offsets.back()));
    for (auto& r : rows) view.members.insert(view.members.end(), r.begin(), r.end());
    return view;
}

void validate_config(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0)) throw_validation("learning rate must be > 0");
    if (cfg.dropout < 0 || cfg.dropout >= 1) throw_validation("dropout must be in [0, 1)");
    if (cfg.epochs < 1) throw_validation("epochs must be >= 1");
    if (cfg.class_weights &&
        (!(cfg.class_weights->first > 0) || !(cfg.class_weights->second > 0)))
        throw_validation("class weights must be > 0");
    if (!(cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1))
        throw_validation("Adam moment coefficients must be in [0, 1)");
    if (!(cfg.adam_epsilon > 0)) throw_validation("Adam epsilon must be > 0");
    if (cfg.sage_dims.empty()) throw_validation("at least one aggregation layer is required");
    for (int d : cfg.sage_dims)
        if (d < 1) throw_validation("layer widths must be >= 1");
    if (cfg.head_hidden < 1) throw_validation("head width must be >= 1");
}

namespace {

void xavier_fill(Matrix& w, Rng& rng) {
    double bound = std::sqrt(6.0 / (w.rows + w.cols));
    for (double& x : w.data) x = rng.uniform(-bound, bound);
}

}  // namespace

ModelParams init_params(int input_dim, const TrainConfig& cfg, Rng& rng) {
    validate_config(cfg);
    if (input_dim < 1) throw_validation("input width must be >= 1");
    ModelParams p;
    p.input_dim = input_dim;
    p.layer_norm = cfg.layer_norm;
    int in = input_dim;
    for (int dim : cfg.sage_dims) {
        SageLayer layer;
        layer.w = Matrix(in, dim);
        xavier_fill(layer.w, rng);
        layer.b.assign(static_cast<size_t>(dim), 0.0);
        layer.gamma.assign(static_cast<size_t>(dim), 1.0);
        layer.beta.assign(static_cast<size_t>(dim), 0.0);
        p.sage.push_back(std::move(layer));
        in = dim;
    }
    p.head_w1 = Matrix(in, cfg.head_hidden);
    xavier_fill(p.head_w1, rng);
    p.head_b1.assign(static_cast<size_t>(cfg.head_hidden), 0.0);
    p.head_w2 = Matrix(cfg.head_hidden, kClassCount);
    xavier_fill(p.head_w2, rng);
    p.head_b2.assign(static_cast<size_t>(kClassCount), 0.0);
    return p;
}

std::vector<TensorRef> tensor_refs(ModelParams& p) {
    std::vector<TensorRef> refs;
    auto mat = [&refs](const std::string& name, Matrix& m) {
        refs.push_back({name, m.data.data(), m.data.size(), m.rows, m.cols});
    };
    auto vec = [&refs](const std::string& name, std::vector<double>& v) {
        refs.push_back({name, v.data(), v.size(), static_cast<int>(v.size()), 0});
    };
    for (size_t i = 0; i < p.sage.size(); ++i) {
        std::string base = "sage" + std::to_string(i);
        mat(base + ".w", p.sage[i].w);
        vec(base + ".b", p.sage[i].b);
        vec(base + ".gamma", p.sage[i].gamma);
        vec(base + ".beta", p.sage[i].beta);
    }
    mat("head.w1", p.head_w1);
    vec("head.b1", p.head_b1);
    mat("head.w2", p.head_w2);
    vec("head.b2", p.head_b2);
    return refs;
}

ModelParams zeros_like(const ModelParams& p) {
    ModelParams z = p;
    auto refs = tensor_refs(z);
    for (auto& r : refs) std::fill(r.data, r.data + r.size, 0.0);
    return z;
}

namespace {

constexpr double kLayerNormEpsilon = 1e-5;

void check_finite(const Matrix& m, const std::string& where) {
    for (double x : m.data)
        if (!std::isfinite(x)) throw_numeric("non-finite activation in " + where);
}

void aggregate_mean(const AggregationView& view, const Matrix& h, Matrix& out) {
    const int n = view.node_count();
    const int d = h.cols;
    out.rows = n;
    out.cols = d;
    out.data.assign(static_cast<size_t>(n) * static_cast<size_t>(d), 0.0);
    for (int v = 0; v < n; ++v) {
        double* orow = out.row(v);
        int begin = view.offsets[static_cast<size_t>(v)];
        int end = view.offsets[static_cast<size_t>(v) + 1];
        for (int e = begin; e < end; ++e) {
            const double* hrow = h.row(view.members[static_cast<size_t>(e)]);
            for (int j = 0; j < d; ++j) orow[j] += hrow[j];
        }
        double inv = 1.0 / (end - begin);
        for (int j = 0; j < d; ++j) orow[j] *= inv;
    }
}

void aggregate_mean_transpose(const AggregationView& view, const Matrix& dout, Matrix& dh) {
    const int n = view.node_count();
    const int d = dout.cols;
    dh.rows = n;
    dh.cols = d;
    dh.data.assign(static_cast<size_t>(n) * static_cast<size_t>(d), 0.0);
    for (int v = 0; v < n; ++v) {
        const double* drow = dout.row(v);
        int begin = view.offsets[static_cast<size_t>(v)];
        int end = view.offsets[static_cast<size_t>(v) + 1];
        double inv = 1.0 / (end - begin);
        for (int e = begin; e < end; ++e) {
            double* hrow = dh.row(view.members[static_cast<size_t>(e)]);
            for (int j = 0; j < d; ++j) hrow[j] += drow[j] * inv;
        }
    }
}

void relu_inplace(Matrix& m) {
    for (double& x : m.data)
        if (x < 0) x = 0;
}

void layer_norm_forward(const Matrix& a, const std::vector<double>& gamma,
                        const std::vector<double>& beta, Matrix& xhat,
                        std::vector<double>& inv_sigma, Matrix& out) {
    const int d = a.cols;
    xhat.rows = out.rows = a.rows;
    xhat.cols = out.cols = d;
    xhat.data.assign(a.data.size(), 0.0);
    out.data.assign(a.data.size(), 0.0);
    inv_sigma.assign(static_cast<size_t>(a.rows), 0.0);
    for (int r = 0; r < a.rows; ++r) {
        const double* arow = a.row(r);
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += arow[j];
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            double diff = arow[j] - mu;
            var += diff * diff;
        }
        var /= d;
        double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        inv_sigma[static_cast<size_t>(r)] = inv;
        double* xr = xhat.row(r);
        double* orow = out.row(r);
        for (int j = 0; j < d; ++j) {
            xr[j] = (arow[j] - mu) * inv;
            orow[j] = gamma[static_cast<size_t>(j)] * xr[j] + beta[static_cast<size_t>(j)];
        }
    }
}

void log_softmax_rows(const Matrix& logits, Matrix& out) {
    out.rows = logits.rows;
    out.cols = logits.cols;
    out.data.assign(logits.data.size(), 0.0);
    for (int r = 0; r < logits.rows; ++r) {
        const double* z = logits.row(r);
        double m = z[0];
        for (int c = 1; c < logits.cols; ++c) m = std::max(m, z[c]);
        double sum = 0.0;
        for (int c = 0; c < logits.cols; ++c) sum += std::exp(z[c] - m);
        double lse = m + std::log(sum);
        double* o = out.row(r);
        for (int c = 0; c < logits.cols; ++c) o[c] = z[c] - lse;
    }
}

}  // namespace

Matrix forward(const Matrix& x, const AggregationView& view, const ModelParams& p,
               const ForwardOptions& opt, ForwardTrace* trace) {
    if (x.cols != p.input_dim) throw_validation("feature width does not match the model input");
    if (x.rows != view.node_count())
        throw_validation("feature rows do not match the graph node count");
    if (opt.start_layer < 0 || opt.start_layer > static_cast<int>(p.sage.size()))
        throw_validation("forward start layer out of range");
    if (opt.start_layer > 0 && !trace)
        throw_validation("resuming forward mid-network requires a stored trace");
    bool use_dropout = opt.training && opt.dropout > 0;
    if (use_dropout && !opt.rng) throw_validation("training with dropout requires a generator");

    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    t.sage.resize(p.sage.size());

    const Matrix* h = opt.start_layer > 0 ? &t.sage[static_cast<size_t>(opt.start_layer) - 1].out
                                          : &x;
    for (size_t i = static_cast<size_t>(opt.start_layer); i < p.sage.size(); ++i) {
        const SageLayer& layer = p.sage[i];
        SageTrace& st = t.sage[i];
        aggregate_mean(view, *h, st.aggregated);
        matmul_into(st.pre_act, st.aggregated, layer.w);
        add_row_vector(st.pre_act, layer.b);
        st.post_act = st.pre_act;
        relu_inplace(st.post_act);
        if (p.layer_norm) {
            layer_norm_forward(st.post_act, layer.gamma, layer.beta, st.xhat, st.inv_sigma,
                               st.out);
        } else {
            st.out = st.post_act;
            st.xhat = Matrix();
            st.inv_sigma.clear();
        }
        if (use_dropout) {
            st.dropout_scale = Matrix(st.out.rows, st.out.cols);
            double keep_scale = 1.0 / (1.0 - opt.dropout);
            for (size_t k = 0; k < st.out.data.size(); ++k) {
                double scale = opt.rng->real01() < opt.dropout ? 0.0 : keep_scale;
                st.dropout_scale.data[k] = scale;
                st.out.data[k] *= scale;
            }
        } else {
            st.dropout_scale = Matrix();
        }
        check_finite(st.out, "aggregation layer " + std::to_string(i));
        h = &st.out;
    }

    matmul_into(t.head_pre_act, *h, p.head_w1);
    add_row_vector(t.head_pre_act, p.head_b1);
    t.head_post_act = t.head_pre_act;
    relu_inplace(t.head_post_act);
    Matrix logits = matmul(t.head_post_act, p.head_w2);
    add_row_vector(logits, p.head_b2);
    check_finite(logits, "the classifier head");
    log_softmax_rows(logits, t.log_probs);
    return t.log_probs;
}

double weighted_nll_sum(const Matrix& log_probs, const std::vector<int>& labels,
                        const std::vector<bool>& is_register, double w_state, double w_data,
                        double* weight_sum) {
    if (static_cast<int>(labels.size()) != log_probs.rows ||
        static_cast<int>(is_register.size()) != log_probs.rows)
        throw_validation("label vector length does not match the prediction rows");
    double nll = 0.0, wsum = 0.0;
    for (int r = 0; r < log_probs.rows; ++r) {
        if (!is_register[static_cast<size_t>(r)]) continue;
        int y = labels[static_cast<size_t>(r)];
        if (y < 0) throw_validation("register row without a label");
        double w = y == kClassState ? w_state : w_data;
        nll += w * -log_probs.at(r, y);
        wsum += w;
    }
    if (weight_sum) *weight_sum = wsum;
    return nll;
}

double loss(const Matrix& log_probs, const std::vector<int>& labels,
            const std::vector<bool>& is_register, double w_state, double w_data) {
    double wsum = 0.0;
    double nll = weighted_nll_sum(log_probs, labels, is_register, w_state, w_data, &wsum);
    if (wsum == 0.0) throw_validation("no labeled register rows");
    return nll / wsum;
}

void backward(const Matrix& x, const AggregationView& view, const ModelParams& p,
              const ForwardTrace& trace, const Matrix& dlog_probs, ModelParams& grads) {
    if (trace.sage.size() != p.sage.size() || trace.log_probs.rows != dlog_probs.rows)
        throw_validation("forward trace does not match the model");

    // Through log-softmax: dz_c = dlogp_c - p_c * sum_c' dlogp_c'.
    Matrix dlogits(dlog_probs.rows, dlog_probs.cols);
    for (int r = 0; r < dlog_probs.rows; ++r) {
        const double* dl = dlog_probs.row(r);
        const double* lp = trace.log_probs.row(r);
        double total = 0.0;
        for (int c = 0; c < dlog_probs.cols; ++c) total += dl[c];
        double* dz = dlogits.row(r);
        for (int c = 0; c < dlog_probs.cols; ++c) dz[c] = dl[c] - std::exp(lp[c]) * total;
    }

    const Matrix& head_in = trace.sage.empty() ? x : trace.sage.back().out;

    Matrix gw2 = matmul_at_b(trace.head_post_act, dlogits);
    for (size_t k = 0; k < gw2.data.size(); ++k) grads.head_w2.data[k] += gw2.data[k];
    for (int r = 0; r < dlogits.rows; ++r)
        for (int c = 0; c < dlogits.cols; ++c)
            grads.head_b2[static_cast<size_t>(c)] += dlogits.at(r, c);

    Matrix da1 = matmul_a_bt(dlogits, p.head_w2);
    for (size_t k = 0; k < da1.data.size(); ++k)
        if (trace.head_pre_act.data[k] <= 0) da1.data[k] = 0.0;

    Matrix gw1 = matmul_at_b(head_in, da1);
    for (size_t k = 0; k < gw1.data.size(); ++k) grads.head_w1.data[k] += gw1.data[k];
    for (int r = 0; r < da1.rows; ++r)
        for (int c = 0; c < da1.cols; ++c)
            grads.head_b1[static_cast<size_t>(c)] += da1.at(r, c);

    Matrix dh = matmul_a_bt(da1, p.head_w1);

    for (size_t li = p.sage.size(); li-- > 0;) {
        const SageLayer& layer = p.sage[li];
        const SageTrace& st = trace.sage[li];
        SageLayer& g = grads.sage[li];
        const int d = st.pre_act.cols;

        if (st.dropout_scale.rows > 0)
            for (size_t k = 0; k < dh.data.size(); ++k) dh.data[k] *= st.dropout_scale.data[k];

        Matrix da;
        if (p.layer_norm) {
            da = Matrix(dh.rows, d);
            for (int r = 0; r < dh.rows; ++r) {
                const double* dout = dh.row(r);
                const double* xr = st.xhat.row(r);
                double* dar = da.row(r);
                double mean_dx = 0.0, mean_dx_x = 0.0;
                for (int j = 0; j < d; ++j) {
                    double dxhat = dout[j] * layer.gamma[static_cast<size_t>(j)];
                    g.gamma[static_cast<size_t>(j)] += dout[j] * xr[j];
                    g.beta[static_cast<size_t>(j)] += dout[j];
                    dar[j] = dxhat;
                    mean_dx += dxhat;
                    mean_dx_x += dxhat * xr[j];
                }
                mean_dx /= d;
                mean_dx_x /= d;
                double inv = st.inv_sigma[static_cast<size_t>(r)];
                for (int j = 0; j < d; ++j)
                    dar[j] = inv * (dar[j] - mean_dx - xr[j] * mean_dx_x);
            }
        } else {
            da = std::move(dh);
        }

        for (size_t k = 0; k < da.data.size(); ++k)
            if (st.pre_act.data[k] <= 0) da.data[k] = 0.0;

        Matrix gw = matmul_at_b(st.aggregated, da);
        for (size_t k = 0; k < gw.data.size(); ++k) g.w.data[k] += gw.data[k];
        for (int r = 0; r < da.rows; ++r)
            for (int c = 0; c < da.cols; ++c) g.b[static_cast<size_t>(c)] += da.at(r, c);

        if (li == 0) break;  // no gradient needed for the input features
        Matrix dm = matmul_a_bt(da, layer.w);
        aggregate_mean_transpose(view, dm, dh);
    }
}

void adam_step(ModelParams& p, const ModelParams& grads, AdamState& state,
               const TrainConfig& cfg) {
    ++state.step;
    auto pr = tensor_refs(p);
    auto gr = tensor_refs(const_cast<ModelParams&>(grads));
    auto mr = tensor_refs(state.m);
    auto vr = tensor_refs(state.v);
    double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
    double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
    for (size_t t = 0; t < pr.size(); ++t) {
        for (size_t k = 0; k < pr[t].size; ++k) {
            double g = gr[t].data[k];
            double& m = mr[t].data[k];
            double& v = vr[t].data[k];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            double mhat = m / bc1;
            double vhat = v / bc2;
            pr[t].data[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
        }
    }
}

std::pair<double, double> class_weights_from_labels(const std::vector<GraphSample>& train_set) {
    long n_state = 0, n_data = 0;
    for (const GraphSample& s : train_set) {
        for (int r = 0; r < s.features->rows; ++r) {
            if (!s.features->is_register[static_cast<size_t>(r)]) continue;
            int y = s.features->labels[static_cast<size_t>(r)];
            if (y < 0) throw_validation("register row without a label");
            (y == kClassState ? n_state : n_data) += 1;
        }
    }
    if (n_state == 0 || n_data == 0)
        throw_validation("training split must contain both register classes");
    double total = static_cast<double>(n_state + n_data);
    return {static_cast<double>(n_data) / total, static_cast<double>(n_state) / total};
}

namespace {

Matrix features_as_matrix(const FeatureMatrix& f) {
    Matrix x(f.rows, f.schema.feature_length());
    x.data = f.values;
    return x;
}

struct PreparedSample {
    const GraphSample* source = nullptr;
    AggregationView view;
    Matrix x;
    std::vector<int> labels;
    std::vector<bool> is_register;
};

double pooled_balanced_accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
    long tp = 0, fn = 0, tn = 0, fp = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == kClassState)
            (pred[i] == kClassState ? tp : fn) += 1;
        else
            (pred[i] == kClassData ? tn : fp) += 1;
    }
    double sum = 0.0;
    int defined = 0;
    if (tp + fn > 0) {
        sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
        ++defined;
    }
    if (tn + fp > 0) {
        sum += static_cast<double>(tn) / static_cast<double>(tn + fp);
        ++defined;
    }
    return defined == 0 ? 0.0 : sum / defined;
}

int argmax_class(const double* log_probs) {
    // Exact ties resolve to the data class.
    return log_probs[kClassState] > log_probs[kClassData] ? kClassState : kClassData;
}

}  // namespace

Checkpoint train(const std::vector<GraphSample>& train_set,
                 const std::vector<GraphSample>& val_set, const TrainConfig& cfg) {
    validate_config(cfg);
    if (train_set.empty()) throw_validation("training set is empty");
    for (const GraphSample& s : train_set)
        if (!s.graph || !s.features) throw_validation("training sample missing graph or features");
    for (const GraphSample& s : val_set)
        if (!s.graph || !s.features) throw_validation("validation sample missing graph or features");

    const FeatureSchema& base_schema = train_set.front().features->schema;
    std::vector<const FeatureMatrix*> train_features;
    for (const GraphSample& s : train_set) train_features.push_back(s.features);
    FeatureSchema fitted = fit_standardizer(train_features, base_schema);

    auto prepare = [&](const std::vector<GraphSample>& set) {
        std::vector<PreparedSample> out;
        out.reserve(set.size());
        for (const GraphSample& s : set) {
            FeatureMatrix std_copy = *s.features;
            apply_standardizer(std_copy, fitted);
            PreparedSample ps;
            ps.source = &s;
            ps.view = make_aggregation_view(*s.graph, cfg.direction);
            ps.x = features_as_matrix(std_copy);
            ps.labels = std_copy.labels;
            ps.is_register = std_copy.is_register;
            if (ps.x.rows != s.graph->node_count())
                throw_validation("feature rows do not match the graph node count");
            out.push_back(std::move(ps));
        }
        return out;
    };
    std::vector<PreparedSample> train_samples = prepare(train_set);
    std::vector<PreparedSample> val_samples = prepare(val_set);

    auto [w_state, w_data] =
        cfg.class_weights ? *cfg.class_weights : class_weights_from_labels(train_set);

    double train_weight_total = 0.0;
    for (const PreparedSample& ps : train_samples) {
        for (size_t r = 0; r < ps.labels.size(); ++r) {
            if (!ps.is_register[r]) continue;
            if (ps.labels[r] < 0) throw_validation("register row without a label");
            train_weight_total += ps.labels[r] == kClassState ? w_state : w_data;
        }
    }
    if (train_weight_total == 0.0)
        throw_validation("training set has no labeled register rows");

    Rng init_rng = Rng(cfg.seed).fork(0);
    ModelParams params = init_params(base_schema.feature_length(), cfg, init_rng);
    AdamState adam{zeros_like(params), zeros_like(params), 0};
    Rng dropout_rng = Rng(cfg.seed).fork(1);

    Checkpoint best;
    best.schema = fitted;
    best.config = cfg;
    double best_ba = -1.0;

    std::vector<ForwardTrace> traces(train_samples.size());
    ModelParams grads = zeros_like(params);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto gref = tensor_refs(grads);
        for (auto& r : gref) std::fill(r.data, r.data + r.size, 0.0);

        double nll_total = 0.0;
        for (size_t gi = 0; gi < train_samples.size(); ++gi) {
            PreparedSample& ps = train_samples[gi];
            ForwardOptions opt;
            opt.training = true;
            opt.dropout = cfg.dropout;
            opt.rng = &dropout_rng;
            Matrix log_probs = forward(ps.x, ps.view, params, opt, &traces[gi]);
            nll_total +=
                weighted_nll_sum(log_probs, ps.labels, ps.is_register, w_state, w_data, nullptr);

            Matrix dlogp(log_probs.rows, log_probs.cols);
            for (int r = 0; r < log_probs.rows; ++r) {
                if (!ps.is_register[static_cast<size_t>(r)]) continue;
                int y = ps.labels[static_cast<size_t>(r)];
                double w = y == kClassState ? w_state : w_data;
                dlogp.at(r, y) = -w / train_weight_total;
            }
            backward(ps.x, ps.view, params, traces[gi], dlogp, grads);
        }
        double train_loss = nll_total / train_weight_total;
        if (!std::isfinite(train_loss))
            throw_numeric("training diverged at epoch " + std::to_string(epoch));

        adam_step(params, grads, adam, cfg);

        EpochStats stats;
        stats.train_loss = train_loss;
        if (!val_samples.empty()) {
            double val_nll = 0.0, val_weights = 0.0;
            std::vector<int> truth, pred;
            ForwardTrace val_trace;
            for (PreparedSample& ps : val_samples) {
                Matrix log_probs = forward(ps.x, ps.view, params, ForwardOptions{}, &val_trace);
                double wsum = 0.0;
                val_nll += weighted_nll_sum(log_probs, ps.labels, ps.is_register, w_state,
                                            w_data, &wsum);
                val_weights += wsum;
                for (int r = 0; r < log_probs.rows; ++r) {
                    if (!ps.is_register[static_cast<size_t>(r)]) continue;
                    truth.push_back(ps.labels[static_cast<size_t>(r)]);
                    pred.push_back(argmax_class(log_probs.row(r)));
                }
            }
            stats.val_loss = val_weights > 0 ? val_nll / val_weights : 0.0;
            stats.val_balanced_accuracy = pooled_balanced_accuracy(truth, pred);
            if (stats.val_balanced_accuracy > best_ba) {
                best_ba = stats.val_balanced_accuracy;
                best.params = params;
                best.best_epoch = epoch;
            }
        }
        best.trace.push_back(stats);
    }

    if (val_samples.empty() || best.best_epoch < 0) {
        best.params = params;
        best.best_epoch = cfg.epochs - 1;
    }
    return best;
}

std::vector<RegisterPrediction> predict(const CircuitGraph& g, const FeatureMatrix& raw,
                                        const Checkpoint& ckpt) {
    if (raw.schema.library_fingerprint != ckpt.schema.library_fingerprint)
        throw_validation("feature schema was built for a different cell library");
    if (raw.rows != g.node_count())
        throw_validation("feature rows do not match the graph node count");
    FeatureMatrix std_copy = raw;
    apply_standardizer(std_copy, ckpt.schema);

    AggregationView view = make_aggregation_view(g, ckpt.config.direction);
    Matrix x = features_as_matrix(std_copy);
    Matrix log_probs = forward(x, view, ckpt.params, ForwardOptions{}, nullptr);

    std::vector<RegisterPrediction> preds;
    for (int v = 0; v < g.node_count(); ++v) {
        if (!g.is_register[static_cast<size_t>(v)]) continue;
        RegisterPrediction p;
        p.id = g.node_names[static_cast<size_t>(v)];
        p.node = v;
        p.p_state = std::exp(log_probs.at(v, kClassState));
        p.p_data = std::exp(log_probs.at(v, kClassData));
        p.predicted = argmax_class(log_probs.row(v)) == kClassState ? RegClass::State
                                                                    : RegClass::Data;
        preds.push_back(std::move(p));
    }
    return preds;
}

namespace {

constexpr uint32_t kCheckpointMagic = 0x504b4352;  // "RCKP"
constexpr uint32_t kCheckpointVersion = 1;

nlohmann::ordered_json config_to_json(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["learning_rate"] = cfg.learning_rate;
    j["dropout"] = cfg.dropout;
    j["epochs"] = cfg.epochs;
    if (cfg.class_weights) {
        j["class_weights"] = {cfg.class_weights->first, cfg.class_weights->second};
    } else {
        j["class_weights"] = nullptr;
    }
    j["seed"] = cfg.seed;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["adam_epsilon"] = cfg.adam_epsilon;
    j["direction"] = std::string(to_string(cfg.direction));
    j["layer_norm"] = cfg.layer_norm;
    j["sage_dims"] = cfg.sage_dims;
    j["head_hidden"] = cfg.head_hidden;
    return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    if (!j.at("class_weights").is_null()) {
        auto arr = j.at("class_weights");
        cfg.class_weights = {arr.at(0).get<double>(), arr.at(1).get<double>()};
    }
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.beta1 = j.at("beta1").get<double>();
    cfg.beta2 = j.at("beta2").get<double>();
    cfg.adam_epsilon = j.at("adam_epsilon").get<double>();
    cfg.direction = message_direction_from_string(j.at("direction").get<std::string>());
    cfg.layer_norm = j.at("layer_norm").get<bool>();
    cfg.sage_dims = j.at("sage_dims").get<std::vector<int>>();
    cfg.head_hidden = j.at("head_hidden").get<int>();
    return cfg;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
    auto refs = tensor_refs(const_cast<ModelParams&>(ckpt.params));

    std::vector<double> constant_as_f64(ckpt.schema.constant.size());
    for (size_t i = 0; i < ckpt.schema.constant.size(); ++i)
        constant_as_f64[i] = ckpt.schema.constant[i] ? 1.0 : 0.0;

    nlohmann::ordered_json header;
    header["format_version"] = kCheckpointVersion;
    header["tool_version"] = kToolVersion;
    header["config"] = config_to_json(ckpt.config);
    header["schema"] = {{"library_fingerprint", ckpt.schema.library_fingerprint},
                        {"kind_count", ckpt.schema.kind_count},
                        {"has_statistics", ckpt.schema.has_statistics}};
    header["dims"] = {{"input", ckpt.params.input_dim},
                      {"classes", kClassCount},
                      {"layer_norm", ckpt.params.layer_norm}};
    header["best_epoch"] = ckpt.best_epoch;
    nlohmann::ordered_json trace;
    std::vector<double> tl, vl, vba;
    for (const EpochStats& e : ckpt.trace) {
        tl.push_back(e.train_loss);
        vl.push_back(e.val_loss);
        vba.push_back(e.val_balanced_accuracy);
    }
    trace["train_loss"] = tl;
    trace["val_loss"] = vl;
    trace["val_balanced_accuracy"] = vba;
    header["trace"] = trace;
    nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
    for (const TensorRef& r : refs)
        tensors.push_back({{"name", r.name}, {"rows", r.rows}, {"cols", r.cols}});
    if (ckpt.schema.has_statistics) {
        tensors.push_back({{"name", "schema.mean"},
                           {"rows", static_cast<int>(ckpt.schema.mean.size())},
                           {"cols", 0}});
        tensors.push_back({{"name", "schema.stddev"},
                           {"rows", static_cast<int>(ckpt.schema.stddev.size())},
                           {"cols", 0}});
        tensors.push_back({{"name", "schema.constant"},
                           {"rows", static_cast<int>(constant_as_f64.size())},
                           {"cols", 0}});
    }
    header["tensors"] = tensors;

    std::string header_text = header.dump();
    ByteWriter w;
    w.u32(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    w.str(header_text);
    for (const TensorRef& r : refs)
        for (size_t k = 0; k < r.size; ++k) w.f64(r.data[k]);
    if (ckpt.schema.has_statistics) {
        for (double x : ckpt.schema.mean) w.f64(x);
        for (double x : ckpt.schema.stddev) w.f64(x);
        for (double x : constant_as_f64) w.f64(x);
    }
    return w.bytes();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    ByteReader r(bytes);
    if (r.u32() != kCheckpointMagic) throw_validation("not a checkpoint file (bad magic)");
    if (r.u32() != kCheckpointVersion) throw_validation("unsupported checkpoint version");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.str());
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("checkpoint header is not valid JSON: ") + e.what());
    }

    Checkpoint ckpt;
    ckpt.config = config_from_json(header.at("config"));
    ckpt.schema.library_fingerprint =
        header.at("schema").at("library_fingerprint").get<std::string>();
    ckpt.schema.kind_count = header.at("schema").at("kind_count").get<int>();
    ckpt.schema.has_statistics = header.at("schema").at("has_statistics").get<bool>();
    ckpt.best_epoch = header.at("best_epoch").get<int>();

    const auto& trace = header.at("trace");
    auto tl = trace.at("train_loss").get<std::vector<double>>();
    auto vl = trace.at("val_loss").get<std::vector<double>>();
    auto vba = trace.at("val_balanced_accuracy").get<std::vector<double>>();
    if (tl.size() != vl.size() || tl.size() != vba.size())
        throw_validation("checkpoint trace arrays disagree in length");
    for (size_t i = 0; i < tl.size(); ++i) ckpt.trace.push_back({tl[i], vl[i], vba[i]});

    int input_dim = header.at("dims").at("input").get<int>();
    if (input_dim != ckpt.schema.feature_length())
        throw_validation("checkpoint input width does not match its feature schema");
    TrainConfig shape_cfg = ckpt.config;
    Rng dummy(0);
    ckpt.params = init_params(input_dim, shape_cfg, dummy);
    ckpt.params.layer_norm = header.at("dims").at("layer_norm").get<bool>();

    auto refs = tensor_refs(ckpt.params);
    const auto& tensors = header.at("tensors");
    size_t expected = refs.size() + (ckpt.schema.has_statistics ? 3 : 0);
    if (tensors.size() != expected) throw_validation("checkpoint tensor manifest mismatch");
    for (size_t i = 0; i < refs.size(); ++i) {
        const auto& tj = tensors.at(i);
        if (tj.at("name").get<std::string>() != refs[i].name ||
            tj.at("rows").get<int>() != refs[i].rows || tj.at("cols").get<int>() != refs[i].cols)
            throw_validation("checkpoint tensor manifest mismatch for " + refs[i].name);
        for (size_t k = 0; k < refs[i].size; ++k) refs[i].data[k] = r.f64();
    }
    if (ckpt.schema.has_statistics) {
        size_t cc = static_cast<size_t>(ckpt.schema.continuous_count());
        auto read_vec = [&r](size_t n) {
            std::vector<double> v(n);
            for (double& x : v) x = r.f64();
            return v;
        };
        size_t n_mean = tensors.at(refs.size()).at("rows").get<size_t>();
        size_t n_std = tensors.at(refs.size() + 1).at("rows").get<size_t>();
        size_t n_const = tensors.at(refs.size() + 2).at("rows").get<size_t>();
        if (n_mean != cc || n_std != cc || n_const != cc)
            throw_validation("checkpoint statistics have the wrong length");
        ckpt.schema.mean = read_vec(cc);
        ckpt.schema.stddev = read_vec(cc);
        std::vector<double> cst = read_vec(cc);
        ckpt.schema.constant.resize(cc);
        for (size_t i = 0; i < cc; ++i) ckpt.schema.constant[i] = cst[i] != 0.0;
    }
    r.expect_end();
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
    return decode_checkpoint(read_file(path));
}

std::string checkpoint_header_json(const std::string& bytes) {
    ByteReader r(bytes);
    if (r.u32() != kCheckpointMagic) throw_validation("not a checkpoint file (bad magic)");
    if (r.u32() != kCheckpointVersion) throw_validation("unsupported checkpoint version");
    nlohmann::ordered_json header;
    try {
        header = nlohmann::ordered_json::parse(r.str());
    } catch (const nlohmann::json::exception& e) {
        throw_validation(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    return header.dump(2) + "\n";
}

}  // namespace regclass
