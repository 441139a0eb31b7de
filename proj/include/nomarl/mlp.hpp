#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nomarl/rng.hpp"

namespace nomarl {

enum class Activation { ReLU, Sigmoid, TanH };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

double apply_activation(Activation a, double x);

/// Dense multilayer perceptron with the chosen activation on hidden layers
/// and a linear output layer. All parameters live in one flat vector
/// (layer weights row-major out x in, then the layer bias), which keeps
/// optimizer state, checkpoints and target-network syncs trivial.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<int> widths, Activation activation);  // zero-initialized
    static Mlp glorot(std::vector<int> widths, Activation activation, Rng& rng);

    const std::vector<int>& widths() const { return widths_; }
    Activation activation() const { return act_; }
    int input_width() const { return widths_.front(); }
    int output_width() const { return widths_.back(); }
    int affine_layers() const { return static_cast<int>(widths_.size()) - 1; }

    std::span<double> weight(int layer);
    std::span<const double> weight(int layer) const;
    std::span<double> bias(int layer);
    std::span<const double> bias(int layer) const;
    std::size_t weight_offset(int layer) const { return w_off_[static_cast<std::size_t>(layer)]; }
    std::size_t bias_offset(int layer) const { return b_off_[static_cast<std::size_t>(layer)]; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    std::vector<double> forward(std::span<const double> x) const;

    // Forward pass keeping pre-activations and activations per layer;
    // post[0] is the input.
    struct Trace {
        std::vector<std::vector<double>> pre;
        std::vector<std::vector<double>> post;
    };
    Trace forward_trace(std::span<const double> x) const;

    void save(std::ostream& out) const;
    static Mlp load(std::istream& in);
    void save_file(const std::string& path) const;
    static Mlp load_file(const std::string& path);

private:
    std::vector<int> widths_;
    Activation act_ = Activation::ReLU;
    std::vector<double> params_;
    std::vector<std::size_t> w_off_;
    std::vector<std::size_t> b_off_;
};

using Batch = std::vector<std::vector<double>>;

/// Mean over the batch of the summed squared component error.
double mse_loss(const Batch& pred, const Batch& target);

/// Exact reverse-mode gradients of mse_loss wrt every parameter, flat and
/// aligned with Mlp::params(). ReLU subgradient at 0 is 0.
std::vector<double> backward(const Mlp& net, const Batch& inputs, const Batch& targets,
                             double* loss_out = nullptr);

/// Adam with per-step learning rate alpha/sqrt(t) and first-moment decay
/// beta1_t = beta1 * lambda^(t-1); bias correction tracks the running
/// product of the decayed beta1.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double base_lr = 1e-3;
    double lambda_decay = 1.0;
    double epsilon = 1e-8;
    long long step_count = 0;
    double beta1_product = 1.0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;

    AdamState() = default;
    AdamState(std::size_t n_params, double lr, double b1 = 0.9, double b2 = 0.999,
              double lambda = 1.0, double eps = 1e-8);
    void validate() const;
};

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state);

struct SparsityReport {
    std::size_t nonzero_count = 0;  // parameters with |w| > 1e-12
    double max_weight_norm = 0.0;
    double output_bound = 0.0;  // largest |output| over the probe set
    std::size_t zero_hidden_activations = 0;
};

SparsityReport sparsity_report(const Mlp& net, const Batch& probes);

}  // namespace nomarl
