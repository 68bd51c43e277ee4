#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "manetid/errors.hpp"
#include "manetid/rng.hpp"

// Feedforward network with two configurable hidden layers, trained full
// batch either by Levenberg-Marquardt (damped Gauss-Newton on the error
// Jacobian) or by gradient descent with momentum. Everything is written
// against the sum of squared errors SSE = sum_i (target_i - output_i)^2.
//
// Conventions used throughout:
//   e_i = target_i - output_i           (per-sample error)
//   J_ij = d e_i / d theta_j            (error Jacobian)
//   grad SSE = 2 J^T e                  (so the LM step is theta -= delta
//                                        with (J^T J + mu I) delta = J^T e)
namespace manetid::nn {

enum class Transfer { LogSig, TanSig, PureLin };

inline const char* transfer_name(Transfer t) {
    switch (t) {
        case Transfer::LogSig: return "logsig";
        case Transfer::TanSig: return "tansig";
        default: return "purelin";
    }
}

inline std::optional<Transfer> transfer_from_name(const std::string& s) {
    if (s == "logsig") return Transfer::LogSig;
    if (s == "tansig") return Transfer::TanSig;
    if (s == "purelin") return Transfer::PureLin;
    return std::nullopt;
}

inline double apply_transfer(Transfer t, double x) {
    switch (t) {
        case Transfer::LogSig: return 1.0 / (1.0 + std::exp(-x));
        case Transfer::TanSig: return std::tanh(x);
        default: return x;
    }
}

// Derivative with respect to the net input, evaluated at net input x.
inline double transfer_derivative(Transfer t, double x) {
    switch (t) {
        case Transfer::LogSig: {
            const double y = 1.0 / (1.0 + std::exp(-x));
            return y * (1.0 - y);
        }
        case Transfer::TanSig: {
            const double y = std::tanh(x);
            return 1.0 - y * y;
        }
        default: return 1.0;
    }
}

struct LayerSpec {
    int size = 1;
    Transfer transfer = Transfer::TanSig;
};

struct Architecture {
    int input_dim = 4;
    std::vector<LayerSpec> hidden;
    LayerSpec output{1, Transfer::LogSig};

    // Layer sizes including the input: e.g. {4, 15, 10, 1}.
    std::vector<int> sizes() const {
        std::vector<int> s{input_dim};
        for (const auto& h : hidden) s.push_back(h.size);
        s.push_back(output.size);
        return s;
    }

    int layer_count() const { return static_cast<int>(hidden.size()) + 1; }

    Transfer transfer_of(int layer) const {
        return layer < static_cast<int>(hidden.size()) ? hidden[static_cast<std::size_t>(layer)].transfer
                                                       : output.transfer;
    }

    int parameter_count() const {
        const auto s = sizes();
        int p = 0;
        for (std::size_t l = 1; l < s.size(); ++l) p += s[l] * s[l - 1] + s[l];
        return p;
    }

    std::string layout_string() const {
        std::string out = std::to_string(input_dim);
        for (const auto& h : hidden) out += "-" + std::to_string(h.size);
        out += "-" + std::to_string(output.size);
        return out;
    }
};

// Builds e.g. "4-15-10-1" into an architecture with the given hidden
// transfer on both hidden layers and logsig on the output.
inline Architecture make_architecture(const std::string& layout, Transfer hidden_transfer,
                                      Transfer output_transfer = Transfer::LogSig) {
    Architecture arch;
    arch.hidden.clear();
    std::vector<int> sizes;
    std::stringstream ss(layout);
    std::string part;
    while (std::getline(ss, part, '-')) {
        try {
            sizes.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("bad architecture string: " + layout);
        }
    }
    if (sizes.size() < 2) throw ConfigError("architecture needs at least input and output");
    for (int s : sizes)
        if (s < 1) throw ConfigError("layer sizes must be >= 1");
    arch.input_dim = sizes.front();
    for (std::size_t i = 1; i + 1 < sizes.size(); ++i)
        arch.hidden.push_back(LayerSpec{sizes[i], hidden_transfer});
    arch.output = LayerSpec{sizes.back(), output_transfer};
    return arch;
}

struct Network {
    Architecture arch;
    // weights[l] is row-major (out_size x in_size); biases[l] has out_size.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    bool operator==(const Network&) const = default;
};

inline bool operator==(const Architecture& a, const Architecture& b) {
    if (a.input_dim != b.input_dim || a.hidden.size() != b.hidden.size()) return false;
    for (std::size_t i = 0; i < a.hidden.size(); ++i)
        if (a.hidden[i].size != b.hidden[i].size || a.hidden[i].transfer != b.hidden[i].transfer)
            return false;
    return a.output.size == b.output.size && a.output.transfer == b.output.transfer;
}

// Weights and biases drawn uniformly from [-0.5, 0.5], deterministic per seed.
inline Network init(const Architecture& arch, std::uint64_t seed) {
    Network net;
    net.arch = arch;
    const auto sizes = arch.sizes();
    Rng rng(derive_seed(seed, 0x4e37u));
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        const int rows = sizes[l];
        const int cols = sizes[l - 1];
        std::vector<double> w(static_cast<std::size_t>(rows) * cols);
        std::vector<double> b(static_cast<std::size_t>(rows));
        for (auto& v : w) v = rng.uniform(-0.5, 0.5);
        for (auto& v : b) v = rng.uniform(-0.5, 0.5);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

struct ForwardCache {
    std::vector<std::vector<double>> net_input;   // z_l per layer
    std::vector<std::vector<double>> activation;  // a_l per layer (a_{-1} = x)
};

inline double forward_cached(const Network& net, std::span<const double> x, ForwardCache& cache) {
    if (static_cast<int>(x.size()) != net.arch.input_dim)
        throw DimensionMismatch("forward: input size " + std::to_string(x.size()) +
                                ", expected " + std::to_string(net.arch.input_dim));
    const int layers = net.arch.layer_count();
    cache.net_input.assign(static_cast<std::size_t>(layers), {});
    cache.activation.assign(static_cast<std::size_t>(layers), {});
    std::vector<double> in(x.begin(), x.end());
    for (int l = 0; l < layers; ++l) {
        const auto& w = net.weights[static_cast<std::size_t>(l)];
        const auto& b = net.biases[static_cast<std::size_t>(l)];
        const int rows = static_cast<int>(b.size());
        const int cols = static_cast<int>(in.size());
        const Transfer t = net.arch.transfer_of(l);
        std::vector<double> z(static_cast<std::size_t>(rows));
        std::vector<double> a(static_cast<std::size_t>(rows));
        for (int r = 0; r < rows; ++r) {
            double acc = b[static_cast<std::size_t>(r)];
            const double* wr = w.data() + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) acc += wr[c] * in[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = acc;
            a[static_cast<std::size_t>(r)] = apply_transfer(t, acc);
        }
        cache.net_input[static_cast<std::size_t>(l)] = std::move(z);
        cache.activation[static_cast<std::size_t>(l)] = a;
        in = std::move(a);
    }
    return in.front();
}

inline double forward(const Network& net, std::span<const double> x) {
    ForwardCache cache;
    return forward_cached(net, x, cache);
}

struct Sample {
    std::vector<double> x;
    double target = 0.0;
};

inline std::vector<double> errors(const Network& net, const std::vector<Sample>& batch) {
    std::vector<double> e;
    e.reserve(batch.size());
    for (const auto& s : batch) e.push_back(s.target - forward(net, s.x));
    return e;
}

inline double sse_of(const std::vector<double>& e) {
    double acc = 0.0;
    for (double v : e) acc += v * v;
    return acc;
}

namespace detail {

// Backpropagates a seed value dL/d(output net input) through the network,
// writing dL/d(theta) into grad (+=) and returning nothing. Shared by the
// gradient and Jacobian paths, which differ only in their seed.
inline void backprop_into(const Network& net, const ForwardCache& cache,
                          std::span<const double> x, double output_seed, double scale,
                          std::vector<double>& grad) {
    const int layers = net.arch.layer_count();
    // delta for the output layer (size 1 by construction)
    std::vector<double> delta{output_seed};
    // walk backwards accumulating weight/bias slots; compute parameter
    // offsets per layer first
    std::vector<std::size_t> offsets(static_cast<std::size_t>(layers));
    std::size_t off = 0;
    for (int l = 0; l < layers; ++l) {
        offsets[static_cast<std::size_t>(l)] = off;
        off += net.weights[static_cast<std::size_t>(l)].size() +
               net.biases[static_cast<std::size_t>(l)].size();
    }
    for (int l = layers - 1; l >= 0; --l) {
        const auto& w = net.weights[static_cast<std::size_t>(l)];
        const int rows = static_cast<int>(net.biases[static_cast<std::size_t>(l)].size());
        const int cols = static_cast<int>(l == 0 ? x.size()
                                                 : cache.activation[static_cast<std::size_t>(l - 1)].size());
        const double* prev =
            l == 0 ? x.data() : cache.activation[static_cast<std::size_t>(l - 1)].data();
        double* gw = grad.data() + offsets[static_cast<std::size_t>(l)];
        double* gb = gw + static_cast<std::size_t>(rows) * cols;
        for (int r = 0; r < rows; ++r) {
            const double d = delta[static_cast<std::size_t>(r)] * scale;
            double* gwr = gw + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) gwr[c] += d * prev[c];
            gb[r] += d;
        }
        if (l == 0) break;
        // delta for the previous layer
        const Transfer t_prev = net.arch.transfer_of(l - 1);
        const auto& z_prev = cache.net_input[static_cast<std::size_t>(l - 1)];
        std::vector<double> next(static_cast<std::size_t>(cols), 0.0);
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int r = 0; r < rows; ++r)
                acc += w[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)] *
                       delta[static_cast<std::size_t>(r)];
            next[static_cast<std::size_t>(c)] =
                acc * transfer_derivative(t_prev, z_prev[static_cast<std::size_t>(c)]);
        }
        delta = std::move(next);
    }
}

}  // namespace detail

// Exact gradient of SSE over all parameters, accumulated in sample order.
inline std::vector<double> gradient(const Network& net, const std::vector<Sample>& batch) {
    if (batch.empty()) throw EmptyInput("gradient: empty batch");
    std::vector<double> grad(static_cast<std::size_t>(net.arch.parameter_count()), 0.0);
    ForwardCache cache;
    for (const auto& s : batch) {
        const double y = forward_cached(net, s.x, cache);
        const double e = s.target - y;
        const double fprime = transfer_derivative(
            net.arch.output.transfer,
            cache.net_input.back().front());
        // dSSE/dz_out = -2 e f'(z_out)
        detail::backprop_into(net, cache, s.x, fprime, -2.0 * e, grad);
    }
    return grad;
}

struct Jacobian {
    std::size_t rows = 0;  // samples
    std::size_t cols = 0;  // parameters
    std::vector<double> data;

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// J_ij = d e_i / d theta_j with e_i = target_i - output_i.
inline Jacobian error_jacobian(const Network& net, const std::vector<Sample>& batch) {
    if (batch.empty()) throw EmptyInput("jacobian: empty batch");
    Jacobian jac;
    jac.rows = batch.size();
    jac.cols = static_cast<std::size_t>(net.arch.parameter_count());
    jac.data.assign(jac.rows * jac.cols, 0.0);
    ForwardCache cache;
    std::vector<double> row(jac.cols);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& s = batch[i];
        forward_cached(net, s.x, cache);
        std::fill(row.begin(), row.end(), 0.0);
        const double fprime =
            transfer_derivative(net.arch.output.transfer, cache.net_input.back().front());
        // de/dtheta = -dy/dtheta
        detail::backprop_into(net, cache, s.x, fprime, -1.0, row);
        std::copy(row.begin(), row.end(), jac.data.begin() + static_cast<std::ptrdiff_t>(i * jac.cols));
    }
    return jac;
}

inline std::vector<double> pack(const Network& net) {
    std::vector<double> theta;
    theta.reserve(static_cast<std::size_t>(net.arch.parameter_count()));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        theta.insert(theta.end(), net.weights[l].begin(), net.weights[l].end());
        theta.insert(theta.end(), net.biases[l].begin(), net.biases[l].end());
    }
    return theta;
}

inline void unpack(Network& net, const std::vector<double>& theta) {
    std::size_t off = 0;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (auto& v : net.weights[l]) v = theta[off++];
        for (auto& v : net.biases[l]) v = theta[off++];
    }
}

struct TrainConfig {
    enum class Algorithm { LM, GDM };
    Algorithm algorithm = Algorithm::LM;
    int max_epochs = 20;
    double goal_rmse = 0.005;
    // TRAINLM damping schedule
    double mu0 = 1e-3;
    double mu_inc = 10.0;
    double mu_dec = 0.1;
    double mu_max = 1e10;
    // LEARNGDM
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 1;
};

enum class StopReason { Goal, MaxEpochs, MuOverflow };

inline const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::Goal: return "goal";
        case StopReason::MaxEpochs: return "max_epochs";
        default: return "mu_overflow";
    }
}

struct TrainReport {
    std::vector<double> epoch_rmse;  // accepted epochs only
    StopReason stop_reason = StopReason::MaxEpochs;
    int final_epoch = 0;
};

struct SingularSystem : Error {
    SingularSystem() : Error("SingularSystem", "LM normal equations unsolvable at mu_max") {}
};

struct Diverged : Error {
    Diverged() : Error("Diverged", "training RMSE exceeded 10x its initial value") {}
};

namespace detail {

// Cholesky solve of the SPD system A x = b; A is n x n row-major and is
// destroyed. Returns false when A is not numerically positive definite.
inline bool cholesky_solve(std::vector<double>& a, int n, const std::vector<double>& b,
                           std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<std::size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) {
            const double l = a[static_cast<std::size_t>(j) * n + k];
            d -= l * l;
        }
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double lj = std::sqrt(d);
        a[static_cast<std::size_t>(j) * n + j] = lj;
        for (int i = j + 1; i < n; ++i) {
            double v = a[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                v -= a[static_cast<std::size_t>(i) * n + k] * a[static_cast<std::size_t>(j) * n + k];
            a[static_cast<std::size_t>(i) * n + j] = v / lj;
        }
    }
    x = b;
    for (int i = 0; i < n; ++i) {
        double v = x[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) v -= a[static_cast<std::size_t>(i) * n + k] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = v / a[static_cast<std::size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = x[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) v -= a[static_cast<std::size_t>(k) * n + i] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = v / a[static_cast<std::size_t>(i) * n + i];
    }
    return true;
}

}  // namespace detail

// Levenberg-Marquardt: per epoch, solve (J^T J + mu I) delta = J^T e at the
// current point and propose theta - delta. An accepted step (strictly lower
// SSE) divides mu by mu_inc's counterpart mu_dec; a rejected one multiplies
// mu and retries within the epoch until mu exceeds mu_max.
inline TrainReport train_lm(Network& net, const std::vector<Sample>& batch,
                            const TrainConfig& cfg) {
    if (batch.empty()) throw EmptyInput("train_lm: empty training set");
    const int p = net.arch.parameter_count();
    const auto n = static_cast<double>(batch.size());
    TrainReport report;
    double mu = cfg.mu0;
    std::vector<double> e = errors(net, batch);
    double sse = sse_of(e);
    if (std::sqrt(sse / n) <= cfg.goal_rmse) {
        report.stop_reason = StopReason::Goal;
        return report;
    }
    std::vector<double> theta = pack(net);
    std::vector<double> jtj(static_cast<std::size_t>(p) * p);
    std::vector<double> jte(static_cast<std::size_t>(p));
    std::vector<double> system(static_cast<std::size_t>(p) * p);
    std::vector<double> delta(static_cast<std::size_t>(p));
    Network trial = net;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const Jacobian jac = error_jacobian(net, batch);
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(jte.begin(), jte.end(), 0.0);
        for (std::size_t i = 0; i < jac.rows; ++i) {
            const double* row = jac.data.data() + i * jac.cols;
            for (std::size_t r = 0; r < jac.cols; ++r) {
                const double jr = row[r];
                if (jr == 0.0) continue;
                double* out = jtj.data() + r * jac.cols;
                for (std::size_t c = r; c < jac.cols; ++c) out[c] += jr * row[c];
                jte[r] += jr * e[i];
            }
        }
        for (std::size_t r = 0; r < jac.cols; ++r)
            for (std::size_t c = 0; c < r; ++c) jtj[r * jac.cols + c] = jtj[c * jac.cols + r];

        bool accepted = false;
        while (!accepted) {
            system = jtj;
            for (int d = 0; d < p; ++d) system[static_cast<std::size_t>(d) * p + d] += mu;
            if (!detail::cholesky_solve(system, p, jte, delta)) {
                mu *= cfg.mu_inc;
                if (mu > cfg.mu_max) throw SingularSystem();
                continue;
            }
            std::vector<double> proposal = theta;
            for (int d = 0; d < p; ++d) proposal[static_cast<std::size_t>(d)] -= delta[static_cast<std::size_t>(d)];
            unpack(trial, proposal);
            std::vector<double> e2 = errors(trial, batch);
            const double sse2 = sse_of(e2);
            if (std::isfinite(sse2) && sse2 < sse) {
                theta = std::move(proposal);
                net = trial;
                e = std::move(e2);
                sse = sse2;
                mu *= cfg.mu_dec;
                accepted = true;
            } else {
                mu *= cfg.mu_inc;
                if (mu > cfg.mu_max) {
                    report.stop_reason = StopReason::MuOverflow;
                    return report;
                }
            }
        }
        report.epoch_rmse.push_back(std::sqrt(sse / n));
        report.final_epoch = epoch;
        if (report.epoch_rmse.back() <= cfg.goal_rmse) {
            report.stop_reason = StopReason::Goal;
            return report;
        }
    }
    report.stop_reason = StopReason::MaxEpochs;
    return report;
}

// Full-batch gradient descent with momentum:
//   v_t = momentum * v_{t-1} - learning_rate * grad SSE
inline TrainReport train_gdm(Network& net, const std::vector<Sample>& batch,
                             const TrainConfig& cfg) {
    if (batch.empty()) throw EmptyInput("train_gdm: empty training set");
    const auto n = static_cast<double>(batch.size());
    TrainReport report;
    const double initial_rmse = std::sqrt(sse_of(errors(net, batch)) / n);
    if (initial_rmse <= cfg.goal_rmse) {
        report.stop_reason = StopReason::Goal;
        return report;
    }
    std::vector<double> theta = pack(net);
    std::vector<double> velocity(theta.size(), 0.0);
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const std::vector<double> g = gradient(net, batch);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * g[i];
            theta[i] += velocity[i];
        }
        unpack(net, theta);
        const double rmse_now = std::sqrt(sse_of(errors(net, batch)) / n);
        report.epoch_rmse.push_back(rmse_now);
        report.final_epoch = epoch;
        if (!std::isfinite(rmse_now) || rmse_now > 10.0 * initial_rmse) throw Diverged();
        if (rmse_now <= cfg.goal_rmse) {
            report.stop_reason = StopReason::Goal;
            return report;
        }
    }
    report.stop_reason = StopReason::MaxEpochs;
    return report;
}

inline TrainReport train(Network& net, const std::vector<Sample>& batch, const TrainConfig& cfg) {
    return cfg.algorithm == TrainConfig::Algorithm::LM ? train_lm(net, batch, cfg)
                                                       : train_gdm(net, batch, cfg);
}

// --------------------------------------------------------------------------
// Error metrics
// --------------------------------------------------------------------------

inline void check_lengths(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw LengthMismatch("prediction/target length mismatch");
    if (a.empty()) throw EmptyInput("no predictions");
}

inline double rmse(std::span<const double> preds, std::span<const double> targets) {
    check_lengths(preds, targets);
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double d = targets[i] - preds[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(preds.size()));
}

inline double mae(std::span<const double> preds, std::span<const double> targets) {
    check_lengths(preds, targets);
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) acc += std::fabs(targets[i] - preds[i]);
    return acc / static_cast<double>(preds.size());
}

// R^2 = 1 - SSE/SStot; undefined (nullopt) when all targets are equal.
inline std::optional<double> r_squared(std::span<const double> preds,
                                       std::span<const double> targets) {
    check_lengths(preds, targets);
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        ss_res += (targets[i] - preds[i]) * (targets[i] - preds[i]);
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
    }
    if (ss_tot == 0.0) return std::nullopt;
    return 1.0 - ss_res / ss_tot;
}

// --------------------------------------------------------------------------
// Network snapshot file: a header line with the layout and the per-layer
// transfers, then one line per layer holding its weights followed by its
// biases, full decimal precision.
// --------------------------------------------------------------------------

inline void save_network(std::ostream& out, const Network& net) {
    out << net.arch.layout_string();
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        out << ' ' << transfer_name(net.arch.transfer_of(static_cast<int>(l)));
    out << '\n';
    char buf[64];
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        bool first = true;
        for (double v : net.weights[l]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << (first ? "" : " ") << buf;
            first = false;
        }
        for (double v : net.biases[l]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << (first ? "" : " ") << buf;
            first = false;
        }
        out << '\n';
    }
}

inline void save_network_file(const std::string& path, const Network& net) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write network file: " + path);
    save_network(out, net);
}

inline Network load_network(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error("BadModel", "empty network file");
    std::istringstream hs(header);
    std::string layout;
    hs >> layout;
    std::vector<Transfer> transfers;
    std::string name;
    while (hs >> name) {
        auto t = transfer_from_name(name);
        if (!t) throw Error("BadModel", "unknown transfer '" + name + "'");
        transfers.push_back(*t);
    }
    Architecture arch = make_architecture(layout, Transfer::TanSig);
    if (transfers.size() != static_cast<std::size_t>(arch.layer_count()))
        throw Error("BadModel", "transfer count does not match layer count");
    for (std::size_t i = 0; i < arch.hidden.size(); ++i) arch.hidden[i].transfer = transfers[i];
    arch.output.transfer = transfers.back();
    Network net;
    net.arch = arch;
    const auto sizes = arch.sizes();
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        std::string line;
        if (!std::getline(in, line)) throw Error("BadModel", "missing layer line");
        std::istringstream ls(line);
        std::vector<double> w(static_cast<std::size_t>(sizes[l]) * sizes[l - 1]);
        std::vector<double> b(static_cast<std::size_t>(sizes[l]));
        for (auto& v : w)
            if (!(ls >> v)) throw Error("BadModel", "layer line too short");
        for (auto& v : b)
            if (!(ls >> v)) throw Error("BadModel", "layer line too short");
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

inline Network load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network file: " + path);
    return load_network(in);
}

}  // namespace manetid::nn
