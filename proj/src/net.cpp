#include "adgkt/net.hpp"

#include <algorithm>
#include <cmath>

#include "adgkt/error.hpp"
#include "adgkt/kernels.hpp"

namespace adgkt {

Layer::Layer(std::string layer_name, std::size_t in, std::size_t out)
    : name(std::move(layer_name)),
      weight(in, out),
      bias(1, out),
      grad_weight(in, out),
      grad_bias(1, out),
      m_weight(in, out),
      v_weight(in, out),
      m_bias(1, out),
      v_bias(1, out) {}

Layer& ParamSet::add_layer(std::string name, std::size_t in, std::size_t out) {
    return layers_.emplace_back(std::move(name), in, out);
}

std::size_t ParamSet::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.parameter_count();
    return n;
}

namespace {

template <typename Visit>
void for_each_buffer(const std::vector<Layer>& layers, Visit&& visit, bool grads) {
    for (const auto& l : layers) {
        visit(grads ? l.grad_weight.values() : l.weight.values());
        visit(grads ? l.grad_bias.values() : l.bias.values());
    }
}

template <typename Visit>
void for_each_buffer(std::vector<Layer>& layers, Visit&& visit, bool grads) {
    for (auto& l : layers) {
        visit(grads ? l.grad_weight.values() : l.weight.values());
        visit(grads ? l.grad_bias.values() : l.bias.values());
    }
}

std::vector<double> gather(const std::vector<Layer>& layers, std::size_t total, bool grads) {
    std::vector<double> out;
    out.reserve(total);
    for_each_buffer(layers, [&](std::span<const double> buf) { out.insert(out.end(), buf.begin(), buf.end()); },
                    grads);
    return out;
}

void scatter(std::vector<Layer>& layers, std::span<const double> values, std::size_t total, bool grads) {
    if (values.size() != total) {
        throw DimensionError("ParamSet: flat vector length " + std::to_string(values.size()) + " != " +
                             std::to_string(total));
    }
    std::size_t offset = 0;
    for_each_buffer(layers,
                    [&](std::span<double> buf) {
                        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), buf.size(), buf.begin());
                        offset += buf.size();
                    },
                    grads);
}

}  // namespace

std::vector<double> ParamSet::flatten() const { return gather(layers_, parameter_count(), false); }

void ParamSet::unflatten(std::span<const double> values) { scatter(layers_, values, parameter_count(), false); }

std::vector<double> ParamSet::flatten_grad() const { return gather(layers_, parameter_count(), true); }

void ParamSet::set_grad(std::span<const double> values) { scatter(layers_, values, parameter_count(), true); }

void ParamSet::zero_grad() {
    for (auto& l : layers_) {
        l.grad_weight.fill(0.0);
        l.grad_bias.fill(0.0);
    }
}

void ParamSet::init_glorot(Rng& rng) {
    for (auto& l : layers_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
        for (double& w : l.weight.values()) w = rng.uniform(-limit, limit);
        l.bias.fill(0.0);
    }
}

Matrix linear_forward(const Matrix& input, const Layer& layer) {
    if (input.cols() != layer.in_dim()) {
        throw DimensionError("linear_forward(" + layer.name + "): input has " + std::to_string(input.cols()) +
                             " columns, layer expects " + std::to_string(layer.in_dim()));
    }
    Matrix out = kernels::matmul(input, layer.weight);
    auto b = layer.bias.row(0);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
    }
    return out;
}

Matrix linear_backward(const Matrix& input, Layer& layer, const Matrix& upstream) {
    if (upstream.rows() != input.rows() || upstream.cols() != layer.out_dim()) {
        throw DimensionError("linear_backward(" + layer.name + "): upstream shape mismatch");
    }
    layer.grad_weight += kernels::matmul_tn(input, upstream);
    auto gb = layer.grad_bias.row(0);
    for (std::size_t i = 0; i < upstream.rows(); ++i) {
        auto r = upstream.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) gb[j] += r[j];
    }
    return kernels::matmul_nt(upstream, layer.weight);
}

Matrix relu_forward(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return out;
}

Matrix relu_backward(const Matrix& x, const Matrix& upstream) {
    require_same_shape(x, upstream, "relu_backward");
    Matrix out = upstream;
    auto xv = x.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i)
        if (!(xv[i] > 0.0)) ov[i] = 0.0;
    return out;
}

void adam_step(ParamSet& params, const AdamConfig& cfg, std::size_t t) {
    if (t == 0) throw ConfigError("adam_step: step counter must be >= 1");
    const double td = static_cast<double>(t);
    const double bc1 = 1.0 - std::pow(cfg.beta1, td);
    const double bc2 = 1.0 - std::pow(cfg.beta2, td);

    auto update = [&](std::span<double> w, std::span<const double> g, std::span<double> m, std::span<double> v) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] -= cfg.lr * cfg.weight_decay * w[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    };
    for (auto& l : params.layers()) {
        update(l.weight.values(), l.grad_weight.values(), l.m_weight.values(), l.v_weight.values());
        update(l.bias.values(), l.grad_bias.values(), l.m_bias.values(), l.v_bias.values());
    }
}

Mlp::Mlp(const std::string& name, std::span<const std::size_t> widths) {
    if (widths.size() < 2) throw ConfigError("Mlp(" + name + "): need at least input and output widths");
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        if (widths[i] == 0 || widths[i + 1] == 0) throw ConfigError("Mlp(" + name + "): zero width");
        params_.add_layer(name + "." + std::to_string(i), widths[i], widths[i + 1]);
    }
}

std::size_t Mlp::in_dim() const { return params_.layers().front().in_dim(); }
std::size_t Mlp::out_dim() const { return params_.layers().back().out_dim(); }

Matrix Mlp::forward(const Matrix& x) const {
    Matrix h = x;
    const auto layers = params_.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = linear_forward(h, layers[i]);
        if (i + 1 < layers.size()) h = relu_forward(h);
    }
    return h;
}

Matrix Mlp::forward(const Matrix& x, Cache& cache) const {
    const auto layers = params_.layers();
    cache.inputs.clear();
    cache.preacts.clear();
    Matrix h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        cache.inputs.push_back(h);
        Matrix z = linear_forward(h, layers[i]);
        h = (i + 1 < layers.size()) ? relu_forward(z) : z;
        cache.preacts.push_back(std::move(z));
    }
    return h;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& upstream) {
    auto layers = params_.layers();
    if (cache.inputs.size() != layers.size()) throw DimensionError("Mlp::backward: cache does not match network");
    Matrix grad = upstream;
    for (std::size_t i = layers.size(); i-- > 0;) {
        if (i + 1 < layers.size()) grad = relu_backward(cache.preacts[i], grad);
        grad = linear_backward(cache.inputs[i], layers[i], grad);
    }
    return grad;
}

void Mlp::step(const AdamConfig& cfg) { adam_step(params_, cfg, ++steps_); }

}  // namespace adgkt
