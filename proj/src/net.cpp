#include "sfd/net.hpp"

#include <cmath>
#include <cstring>

#include "sfd/errors.hpp"
#include "sfd/rng.hpp"

namespace sfd {

namespace {

constexpr double kGateSlope = 1.702;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// x * sigmoid(1.702 x)
double gate(double x) { return x * logistic(kGateSlope * x); }

double gate_derivative(double x) {
    double s = logistic(kGateSlope * x);
    return s + kGateSlope * x * s * (1.0 - s);
}

std::vector<int> layer_dims(const EpsilonNet& net) {
    std::vector<int> dims;
    dims.push_back(net.input_dim + net.time_embed_dim);
    for (int w : net.hidden_widths) dims.push_back(w);
    dims.push_back(net.input_dim);
    return dims;
}

}  // namespace

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::SmoothGated: return "smooth_gated";
    }
    throw InvalidParameter("unknown activation tag");
}

Activation activation_from_name(const std::string& name) {
    if (name == "smooth_gated") return Activation::SmoothGated;
    throw SchemaViolation("unknown activation: " + name);
}

std::string loss_norm_name(LossNorm n) { return n == LossNorm::L1 ? "l1" : "l2"; }

LossNorm loss_norm_from_name(const std::string& name) {
    if (name == "l1") return LossNorm::L1;
    if (name == "l2") return LossNorm::L2;
    throw InvalidParameter("unknown loss norm: " + name);
}

Vec time_embedding(double t_norm, int embed_dim) {
    const int half = embed_dim / 2;
    Vec emb(embed_dim);
    for (int i = 0; i < half; ++i) {
        double freq = half > 1 ? std::pow(1e4, static_cast<double>(i) / (half - 1)) : 1.0;
        emb[2 * i] = std::sin(freq * t_norm);
        emb[2 * i + 1] = std::cos(freq * t_norm);
    }
    return emb;
}

void EpsilonNet::validate() const {
    if (input_dim < 1) throw InvalidParameter("input_dim must be positive");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
        throw InvalidParameter("time_embed_dim must be positive and even");
    auto dims = layer_dims(*this);
    if (layers.size() != dims.size() - 1) throw InvalidParameter("layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        if (layer.w.rows != static_cast<std::size_t>(dims[l + 1]) ||
            layer.w.cols != static_cast<std::size_t>(dims[l]))
            throw InvalidParameter("layer " + std::to_string(l) + " shape mismatch");
        if (layer.b.size() != layer.w.rows) throw InvalidParameter("bias shape mismatch");
        if (!all_finite(layer.w) || !all_finite(layer.b))
            throw InvalidParameter("non-finite parameter in layer " + std::to_string(l));
    }
}

std::size_t EpsilonNet::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += l.w.data.size() + l.b.size();
    return n;
}

EpsilonNet make_net(int input_dim, const std::vector<int>& hidden_widths, std::uint64_t seed,
                    int time_embed_dim) {
    EpsilonNet net;
    net.input_dim = input_dim;
    net.time_embed_dim = time_embed_dim;
    net.hidden_widths = hidden_widths;
    auto dims = layer_dims(net);
    Rng rng(mix_seed(seed, 0x6e65));
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        layer.b = Vec(dims[l + 1], 0.0);
        double bound = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
        for (double& v : layer.w.data) v = (2.0 * rng.uniform() - 1.0) * bound;
        net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
}

namespace {

// Forward pass keeping pre-activations for backprop.
struct ForwardTrace {
    std::vector<Vec> inputs;  // per layer input
    std::vector<Vec> pre;     // per layer pre-activation
    Vec output;
};

void matvec(const Matrix& w, const Vec& x, const Vec& b, Vec& out) {
    out.resize(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* row = w.row(i);
        double s = b[i];
        for (std::size_t j = 0; j < w.cols; ++j) s += row[j] * x[j];
        out[i] = s;
    }
}

ForwardTrace forward_trace(const EpsilonNet& net, const Vec& x, double t_norm) {
    ForwardTrace tr;
    Vec h = x;
    Vec emb = time_embedding(t_norm, net.time_embed_dim);
    h.insert(h.end(), emb.begin(), emb.end());
    const std::size_t L = net.layers.size();
    tr.inputs.resize(L);
    tr.pre.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        tr.inputs[l] = h;
        matvec(net.layers[l].w, h, net.layers[l].b, tr.pre[l]);
        if (l + 1 < L) {
            h.resize(tr.pre[l].size());
            for (std::size_t i = 0; i < h.size(); ++i) h[i] = gate(tr.pre[l][i]);
        } else {
            h = tr.pre[l];
        }
    }
    tr.output = std::move(h);
    return tr;
}

// Backprop one sample's output gradient into the accumulator.
void backprop(const EpsilonNet& net, const ForwardTrace& tr, Vec delta, Gradients& acc) {
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        if (l + 1 < net.layers.size()) {
            for (std::size_t i = 0; i < delta.size(); ++i)
                delta[i] *= gate_derivative(tr.pre[l][i]);
        }
        const Matrix& w = net.layers[l].w;
        const Vec& in = tr.inputs[l];
        Layer& g = acc[l];
        for (std::size_t i = 0; i < w.rows; ++i) {
            double di = delta[i];
            g.b[i] += di;
            double* grow = g.w.row(i);
            for (std::size_t j = 0; j < w.cols; ++j) grow[j] += di * in[j];
        }
        if (l > 0) {
            Vec prev(w.cols, 0.0);
            for (std::size_t i = 0; i < w.rows; ++i) {
                const double* row = w.row(i);
                double di = delta[i];
                for (std::size_t j = 0; j < w.cols; ++j) prev[j] += di * row[j];
            }
            delta = std::move(prev);
        }
    }
}

// One sample's loss contribution and gradient, accumulated into acc.
double sample_loss_grad(const EpsilonNet& net, const double* x, double t_norm,
                        const double* target, LossNorm norm, double weight, double inv_n,
                        Gradients& acc) {
    const std::size_t d = static_cast<std::size_t>(net.input_dim);
    ForwardTrace tr = forward_trace(net, Vec(x, x + d), t_norm);
    Vec delta(d);
    double loss = 0.0;
    const double scale = weight * inv_n;
    for (std::size_t i = 0; i < d; ++i) {
        double r = tr.output[i] - target[i];
        if (norm == LossNorm::L2) {
            loss += r * r;
            delta[i] = 2.0 * r * scale;
        } else {
            loss += std::abs(r);
            delta[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) * scale;
        }
    }
    backprop(net, tr, std::move(delta), acc);
    return weight * loss;
}

void add_gradients(Gradients& into, const Gradients& from) {
    for (std::size_t l = 0; l < into.size(); ++l) {
        for (std::size_t i = 0; i < into[l].w.data.size(); ++i)
            into[l].w.data[i] += from[l].w.data[i];
        for (std::size_t i = 0; i < into[l].b.size(); ++i) into[l].b[i] += from[l].b[i];
    }
}

void check_batch_shapes(const EpsilonNet& net, const Matrix& batch_x, const Vec& batch_t_norm,
                        const Matrix& targets) {
    const std::size_t d = static_cast<std::size_t>(net.input_dim);
    if (batch_x.rows < 1) throw DimensionMismatch("empty batch");
    if (batch_x.cols != d || targets.cols != d || targets.rows != batch_x.rows ||
        batch_t_norm.size() != batch_x.rows)
        throw DimensionMismatch("batch shape mismatch");
}

}  // namespace

Gradients zero_gradients(const EpsilonNet& net) {
    Gradients g;
    g.reserve(net.layers.size());
    for (const Layer& l : net.layers) {
        Layer z;
        z.w = Matrix(l.w.rows, l.w.cols);
        z.b = Vec(l.b.size(), 0.0);
        g.push_back(std::move(z));
    }
    return g;
}

Vec EpsilonNet::predict(const Vec& x, double t_norm) const {
    if (x.size() != static_cast<std::size_t>(input_dim))
        throw DimensionMismatch("predict: expected dimension " + std::to_string(input_dim) +
                                ", got " + std::to_string(x.size()));
    return forward_trace(*this, x, t_norm).output;
}

LossResult loss_and_grads(const EpsilonNet& net, const Matrix& batch_x, const Vec& batch_t_norm,
                          const Matrix& targets, LossNorm norm, const Vec* weights) {
    check_batch_shapes(net, batch_x, batch_t_norm, targets);
    const std::size_t n = batch_x.rows;
    const double inv_n = 1.0 / static_cast<double>(n);

    // Fixed block size keeps the reduction order independent of thread count.
    constexpr std::size_t kBlock = 32;
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<Gradients> block_grads(n_blocks);
    std::vector<double> block_loss(n_blocks, 0.0);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t b = 0; b < n_blocks; ++b) {
        Gradients acc = zero_gradients(net);
        double loss = 0.0;
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            double w = weights ? (*weights)[i] : 1.0;
            loss += sample_loss_grad(net, batch_x.row(i), batch_t_norm[i], targets.row(i), norm,
                                     w, inv_n, acc);
        }
        block_grads[b] = std::move(acc);
        block_loss[b] = loss;
    }

    LossResult res;
    res.grads = std::move(block_grads[0]);
    res.loss = block_loss[0];
    for (std::size_t b = 1; b < n_blocks; ++b) {
        add_gradients(res.grads, block_grads[b]);
        res.loss += block_loss[b];
    }
    res.loss *= inv_n;
    if (!std::isfinite(res.loss)) throw NonFiniteLoss("non-finite loss in batch evaluation");
    return res;
}

LossResult loss_and_grads_serial(const EpsilonNet& net, const Matrix& batch_x,
                                 const Vec& batch_t_norm, const Matrix& targets, LossNorm norm,
                                 const Vec* weights) {
    check_batch_shapes(net, batch_x, batch_t_norm, targets);
    const std::size_t n = batch_x.rows;
    const double inv_n = 1.0 / static_cast<double>(n);
    LossResult res;
    res.grads = zero_gradients(net);
    for (std::size_t i = 0; i < n; ++i) {
        double w = weights ? (*weights)[i] : 1.0;
        res.loss += sample_loss_grad(net, batch_x.row(i), batch_t_norm[i], targets.row(i), norm,
                                     w, inv_n, res.grads);
    }
    res.loss *= inv_n;
    if (!std::isfinite(res.loss)) throw NonFiniteLoss("non-finite loss in batch evaluation");
    return res;
}

AdamState make_adam_state(const EpsilonNet& net, double lr) {
    AdamState st;
    st.lr = lr;
    st.first_moment = zero_gradients(net);
    st.second_moment = zero_gradients(net);
    return st;
}

namespace {

void adam_update(double& param, double& m, double& v, double g, const AdamState& st,
                 double bias1, double bias2) {
    m = st.beta1 * m + (1.0 - st.beta1) * g;
    v = st.beta2 * v + (1.0 - st.beta2) * g * g;
    double m_hat = m / bias1;
    double v_hat = v / bias2;
    param -= st.lr * m_hat / (std::sqrt(v_hat) + st.eps);
}

}  // namespace

void adam_step(EpsilonNet& net, AdamState& state, const Gradients& grads) {
    if (grads.size() != net.layers.size()) throw DimensionMismatch("gradient shape mismatch");
    state.step_count += 1;
    const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Layer& layer = net.layers[l];
        const Layer& g = grads[l];
        if (g.w.rows != layer.w.rows || g.w.cols != layer.w.cols || g.b.size() != layer.b.size())
            throw DimensionMismatch("gradient shape mismatch at layer " + std::to_string(l));
        for (std::size_t i = 0; i < layer.w.data.size(); ++i)
            adam_update(layer.w.data[i], state.first_moment[l].w.data[i],
                        state.second_moment[l].w.data[i], g.w.data[i], state, bias1, bias2);
        for (std::size_t i = 0; i < layer.b.size(); ++i)
            adam_update(layer.b[i], state.first_moment[l].b[i], state.second_moment[l].b[i],
                        g.b[i], state, bias1, bias2);
    }
}

}  // namespace sfd
