#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "adgkt/matrix.hpp"
#include "adgkt/rng.hpp"

namespace adgkt {

/// One affine layer: weight [in x out], bias [1 x out], with gradient and
/// Adam moment buffers of identical shape.
struct Layer {
    Layer(std::string name, std::size_t in, std::size_t out);

    std::string name;
    Matrix weight;
    Matrix bias;
    Matrix grad_weight;
    Matrix grad_bias;
    Matrix m_weight, v_weight;
    Matrix m_bias, v_bias;

    std::size_t in_dim() const noexcept { return weight.rows(); }
    std::size_t out_dim() const noexcept { return weight.cols(); }
    std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
};

/// Ordered collection of layers. Flattening order is layer order, then
/// weight (row-major) before bias.
class ParamSet {
public:
    Layer& add_layer(std::string name, std::size_t in, std::size_t out);

    std::span<Layer> layers() noexcept { return layers_; }
    std::span<const Layer> layers() const noexcept { return layers_; }
    std::size_t parameter_count() const noexcept;

    std::vector<double> flatten() const;
    void unflatten(std::span<const double> values);
    std::vector<double> flatten_grad() const;
    void set_grad(std::span<const double> values);
    void zero_grad();

    /// Glorot-uniform weights, zero biases.
    void init_glorot(Rng& rng);

private:
    std::vector<Layer> layers_;
};

Matrix linear_forward(const Matrix& input, const Layer& layer);

/// Accumulates dL/dW and dL/db into `layer` and returns dL/dinput.
Matrix linear_backward(const Matrix& input, Layer& layer, const Matrix& upstream);

Matrix relu_forward(const Matrix& x);
/// Passes upstream where x > 0; the subgradient at 0 is 0.
Matrix relu_backward(const Matrix& x, const Matrix& upstream);

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 5e-3;
    double eps = 1e-8;
};

/// One Adam update at step t >= 1 with decoupled weight decay
/// (w <- w - lr*wd*w, then the bias-corrected Adam delta).
void adam_step(ParamSet& params, const AdamConfig& cfg, std::size_t t);

/// Affine layers with ReLU between them (none after the last).
class Mlp {
public:
    struct Cache {
        std::vector<Matrix> inputs;   // input to each layer
        std::vector<Matrix> preacts;  // pre-activation output of each layer
    };

    Mlp() = default;
    Mlp(const std::string& name, std::span<const std::size_t> widths);
    Mlp(const std::string& name, std::initializer_list<std::size_t> widths)
        : Mlp(name, std::span<const std::size_t>(widths.begin(), widths.size())) {}

    std::size_t in_dim() const;
    std::size_t out_dim() const;

    Matrix forward(const Matrix& x) const;
    Matrix forward(const Matrix& x, Cache& cache) const;
    /// Accumulates parameter gradients; returns gradient w.r.t. the input.
    Matrix backward(const Cache& cache, const Matrix& upstream);

    ParamSet& params() noexcept { return params_; }
    const ParamSet& params() const noexcept { return params_; }

    /// Adam step counter, advanced by `step`.
    std::size_t steps_taken() const noexcept { return steps_; }
    void step(const AdamConfig& cfg);

private:
    ParamSet params_;
    std::size_t steps_ = 0;
};

}  // namespace adgkt
