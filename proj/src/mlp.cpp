#include "nomarl/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nomarl {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::TanH: return "tanh";
    }
    return "?";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu" || name == "ReLU") return Activation::ReLU;
    if (name == "sigmoid" || name == "Sigmoid") return Activation::Sigmoid;
    if (name == "tanh" || name == "TanH" || name == "tanH") return Activation::TanH;
    throw std::invalid_argument("unknown activation: " + name);
}

double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::ReLU: return x > 0.0 ? x : 0.0;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::TanH: return std::tanh(x);
    }
    return x;
}

namespace {

// Derivative from pre-activation z and activation value a.
double activation_grad(Activation act, double z, double a) {
    switch (act) {
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return a * (1.0 - a);
        case Activation::TanH: return 1.0 - a * a;
    }
    return 1.0;
}

}  // namespace

Mlp::Mlp(std::vector<int> widths, Activation activation)
    : widths_(std::move(widths)), act_(activation) {
    if (widths_.size() < 2) throw std::invalid_argument("need at least input and output widths");
    for (int w : widths_)
        if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
    std::size_t total = 0;
    for (std::size_t l = 1; l < widths_.size(); ++l) {
        w_off_.push_back(total);
        total += static_cast<std::size_t>(widths_[l]) * static_cast<std::size_t>(widths_[l - 1]);
        b_off_.push_back(total);
        total += static_cast<std::size_t>(widths_[l]);
    }
    params_.assign(total, 0.0);
}

Mlp Mlp::glorot(std::vector<int> widths, Activation activation, Rng& rng) {
    Mlp net(std::move(widths), activation);
    for (int l = 0; l < net.affine_layers(); ++l) {
        const int fan_in = net.widths_[static_cast<std::size_t>(l)];
        const int fan_out = net.widths_[static_cast<std::size_t>(l) + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : net.weight(l)) w = (2.0 * uniform01(rng) - 1.0) * limit;
        // biases stay zero
    }
    return net;
}

std::span<double> Mlp::weight(int layer) {
    const std::size_t n =
        static_cast<std::size_t>(widths_[static_cast<std::size_t>(layer) + 1]) *
        static_cast<std::size_t>(widths_[static_cast<std::size_t>(layer)]);
    return {params_.data() + w_off_[static_cast<std::size_t>(layer)], n};
}

std::span<const double> Mlp::weight(int layer) const {
    const std::size_t n =
        static_cast<std::size_t>(widths_[static_cast<std::size_t>(layer) + 1]) *
        static_cast<std::size_t>(widths_[static_cast<std::size_t>(layer)]);
    return {params_.data() + w_off_[static_cast<std::size_t>(layer)], n};
}

std::span<double> Mlp::bias(int layer) {
    return {params_.data() + b_off_[static_cast<std::size_t>(layer)],
            static_cast<std::size_t>(widths_[static_cast<std::size_t>(layer) + 1])};
}

std::span<const double> Mlp::bias(int layer) const {
    return {params_.data() + b_off_[static_cast<std::size_t>(layer)],
            static_cast<std::size_t>(widths_[static_cast<std::size_t>(layer) + 1])};
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_width())
        throw std::invalid_argument("input width mismatch");
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (int l = 0; l < affine_layers(); ++l) {
        const int out_w = widths_[static_cast<std::size_t>(l) + 1];
        const int in_w = widths_[static_cast<std::size_t>(l)];
        auto w = weight(l);
        auto b = bias(l);
        next.assign(static_cast<std::size_t>(out_w), 0.0);
        for (int o = 0; o < out_w; ++o) {
            double z = b[static_cast<std::size_t>(o)];
            const double* row = w.data() + static_cast<std::size_t>(o) * in_w;
            for (int i = 0; i < in_w; ++i) z += row[i] * cur[static_cast<std::size_t>(i)];
            next[static_cast<std::size_t>(o)] =
                l + 1 < affine_layers() ? apply_activation(act_, z) : z;
        }
        cur.swap(next);
    }
    return cur;
}

Mlp::Trace Mlp::forward_trace(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_width())
        throw std::invalid_argument("input width mismatch");
    Trace tr;
    tr.post.emplace_back(x.begin(), x.end());
    for (int l = 0; l < affine_layers(); ++l) {
        const int out_w = widths_[static_cast<std::size_t>(l) + 1];
        const int in_w = widths_[static_cast<std::size_t>(l)];
        auto w = weight(l);
        auto b = bias(l);
        std::vector<double> pre(static_cast<std::size_t>(out_w));
        std::vector<double> post(static_cast<std::size_t>(out_w));
        const auto& input = tr.post.back();
        for (int o = 0; o < out_w; ++o) {
            double z = b[static_cast<std::size_t>(o)];
            const double* row = w.data() + static_cast<std::size_t>(o) * in_w;
            for (int i = 0; i < in_w; ++i) z += row[i] * input[static_cast<std::size_t>(i)];
            pre[static_cast<std::size_t>(o)] = z;
            post[static_cast<std::size_t>(o)] =
                l + 1 < affine_layers() ? apply_activation(act_, z) : z;
        }
        tr.pre.push_back(std::move(pre));
        tr.post.push_back(std::move(post));
    }
    return tr;
}

double mse_loss(const Batch& pred, const Batch& target) {
    if (pred.size() != target.size()) throw std::invalid_argument("batch size mismatch");
    if (pred.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t n = 0; n < pred.size(); ++n) {
        if (pred[n].size() != target[n].size())
            throw std::invalid_argument("vector width mismatch");
        for (std::size_t d = 0; d < pred[n].size(); ++d) {
            const double e = pred[n][d] - target[n][d];
            total += e * e;
        }
    }
    return total / static_cast<double>(pred.size());
}

std::vector<double> backward(const Mlp& net, const Batch& inputs, const Batch& targets,
                             double* loss_out) {
    if (inputs.size() != targets.size()) throw std::invalid_argument("batch size mismatch");
    std::vector<double> grads(net.param_count(), 0.0);
    if (inputs.empty()) {
        if (loss_out) *loss_out = 0.0;
        return grads;
    }
    const double inv_n = 1.0 / static_cast<double>(inputs.size());
    const int layers = net.affine_layers();
    double loss = 0.0;

    auto gweight = [&](int l) {
        return std::span<double>(grads.data() + net.weight_offset(l), net.weight(l).size());
    };
    auto gbias = [&](int l) {
        return std::span<double>(grads.data() + net.bias_offset(l), net.bias(l).size());
    };

    for (std::size_t n = 0; n < inputs.size(); ++n) {
        Mlp::Trace tr = net.forward_trace(inputs[n]);
        const std::vector<double>& out = tr.post.back();
        if (out.size() != targets[n].size())
            throw std::invalid_argument("target width mismatch");

        std::vector<double> delta(out.size());
        for (std::size_t d = 0; d < out.size(); ++d) {
            const double e = out[d] - targets[n][d];
            loss += e * e * inv_n;
            delta[d] = 2.0 * e * inv_n;
        }

        for (int l = layers - 1; l >= 0; --l) {
            const int out_w = net.widths()[static_cast<std::size_t>(l) + 1];
            const int in_w = net.widths()[static_cast<std::size_t>(l)];
            const std::vector<double>& layer_in = tr.post[static_cast<std::size_t>(l)];
            auto gw = gweight(l);
            auto gb = gbias(l);
            for (int o = 0; o < out_w; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                if (d != 0.0) {
                    double* grow = gw.data() + static_cast<std::size_t>(o) * in_w;
                    for (int i = 0; i < in_w; ++i)
                        grow[i] += d * layer_in[static_cast<std::size_t>(i)];
                }
                gb[static_cast<std::size_t>(o)] += d;
            }
            if (l == 0) break;
            auto w = net.weight(l);
            std::vector<double> prev(static_cast<std::size_t>(in_w), 0.0);
            for (int o = 0; o < out_w; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                if (d == 0.0) continue;
                const double* row = w.data() + static_cast<std::size_t>(o) * in_w;
                for (int i = 0; i < in_w; ++i) prev[static_cast<std::size_t>(i)] += d * row[i];
            }
            const std::vector<double>& pre = tr.pre[static_cast<std::size_t>(l) - 1];
            const std::vector<double>& post = tr.post[static_cast<std::size_t>(l)];
            for (int i = 0; i < in_w; ++i)
                prev[static_cast<std::size_t>(i)] *=
                    activation_grad(net.activation(), pre[static_cast<std::size_t>(i)],
                                    post[static_cast<std::size_t>(i)]);
            delta.swap(prev);
        }
    }
    if (loss_out) *loss_out = loss;
    return grads;
}

AdamState::AdamState(std::size_t n_params, double lr, double b1, double b2, double lambda,
                     double eps)
    : beta1(b1), beta2(b2), base_lr(lr), lambda_decay(lambda), epsilon(eps),
      first_moment(n_params, 0.0), second_moment(n_params, 0.0) {
    validate();
}

void AdamState::validate() const {
    if (beta1 < 0.0 || beta1 >= 1.0) throw std::invalid_argument("beta1 must be in [0,1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw std::invalid_argument("beta2 must be in [0,1)");
    if (beta2 > 0.0) {
        if (!(beta1 * beta1 / std::sqrt(beta2) < 1.0))
            throw std::invalid_argument("beta1^2/sqrt(beta2) must be < 1");
    } else if (beta1 != 0.0) {
        throw std::invalid_argument("beta2 == 0 requires beta1 == 0");
    }
    if (lambda_decay < 0.0 || lambda_decay > 1.0)
        throw std::invalid_argument("lambda_decay must be in [0,1]");
    if (!(base_lr > 0.0)) throw std::invalid_argument("base_lr must be > 0");
}

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& st) {
    if (params.size() != grads.size() || params.size() != st.first_moment.size())
        throw std::invalid_argument("adam_step shape mismatch");
    st.step_count += 1;
    const double t = static_cast<double>(st.step_count);
    const double beta1_t = st.beta1 * std::pow(st.lambda_decay, t - 1.0);
    st.beta1_product *= beta1_t;
    const double lr_t = st.base_lr / std::sqrt(t);
    const double m_corr = 1.0 - st.beta1_product;
    const double v_corr = 1.0 - std::pow(st.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        double& m = st.first_moment[i];
        double& v = st.second_moment[i];
        m = beta1_t * m + (1.0 - beta1_t) * g;
        v = st.beta2 * v + (1.0 - st.beta2) * g * g;
        const double m_hat = m / m_corr;
        const double v_hat = v / v_corr;
        params[i] -= lr_t * m_hat / (std::sqrt(v_hat) + st.epsilon);
    }
}

SparsityReport sparsity_report(const Mlp& net, const Batch& probes) {
    SparsityReport report;
    for (double w : net.params()) {
        if (std::abs(w) > 1e-12) ++report.nonzero_count;
        report.max_weight_norm = std::max(report.max_weight_norm, std::abs(w));
    }
    for (const auto& x : probes) {
        Mlp::Trace tr = net.forward_trace(x);
        for (double o : tr.post.back())
            report.output_bound = std::max(report.output_bound, std::abs(o));
        // hidden layers only: post[1..layers-1]
        for (std::size_t l = 1; l + 1 < tr.post.size(); ++l)
            for (double a : tr.post[l])
                if (std::abs(a) <= 1e-12) ++report.zero_hidden_activations;
    }
    return report;
}

namespace {

constexpr std::uint32_t kMlpMagic = 0x4e4d4c50;  // "NMLP"

template <class T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated network checkpoint");
    return value;
}

}  // namespace

void Mlp::save(std::ostream& out) const {
    write_pod(out, kMlpMagic);
    write_pod(out, static_cast<std::uint32_t>(1));  // version
    write_pod(out, static_cast<std::uint32_t>(act_));
    write_pod(out, static_cast<std::uint32_t>(widths_.size()));
    for (int w : widths_) write_pod(out, static_cast<std::uint32_t>(w));
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(params_.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed to write network checkpoint");
}

Mlp Mlp::load(std::istream& in) {
    if (read_pod<std::uint32_t>(in) != kMlpMagic)
        throw std::runtime_error("not a network checkpoint");
    if (read_pod<std::uint32_t>(in) != 1)
        throw std::runtime_error("unsupported network checkpoint version");
    const auto act = static_cast<Activation>(read_pod<std::uint32_t>(in));
    const auto n = read_pod<std::uint32_t>(in);
    std::vector<int> widths(n);
    for (auto& w : widths) w = static_cast<int>(read_pod<std::uint32_t>(in));
    Mlp net(widths, act);
    in.read(reinterpret_cast<char*>(net.params_.data()),
            static_cast<std::streamsize>(net.params_.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated network checkpoint");
    return net;
}

void Mlp::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    save(out);
}

Mlp Mlp::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load(in);
}

}  // namespace nomarl
