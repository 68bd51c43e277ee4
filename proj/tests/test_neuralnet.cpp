#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "manetid/neuralnet.hpp"

using namespace manetid;
using namespace manetid::nn;

namespace {

std::vector<Sample> random_batch(Rng& rng, int input_dim, int n) {
    std::vector<Sample> batch;
    for (int i = 0; i < n; ++i) {
        Sample s;
        for (int d = 0; d < input_dim; ++d) s.x.push_back(rng.uniform(-1.0, 1.0));
        s.target = rng.uniform(0.0, 1.0);
        batch.push_back(std::move(s));
    }
    return batch;
}

double sse(const Network& net, const std::vector<Sample>& batch) {
    return sse_of(errors(net, batch));
}

// central finite difference of SSE with respect to parameter k
double fd_sse(Network net, const std::vector<Sample>& batch, std::size_t k, double h) {
    std::vector<double> theta = pack(net);
    theta[k] += h;
    unpack(net, theta);
    const double up = sse(net, batch);
    theta[k] -= 2 * h;
    unpack(net, theta);
    const double down = sse(net, batch);
    return (up - down) / (2 * h);
}

// central finite difference of e_i with respect to parameter k
double fd_error(Network net, const std::vector<Sample>& batch, std::size_t i, std::size_t k,
                double h) {
    std::vector<double> theta = pack(net);
    theta[k] += h;
    unpack(net, theta);
    const double up = batch[i].target - forward(net, batch[i].x);
    theta[k] -= 2 * h;
    unpack(net, theta);
    const double down = batch[i].target - forward(net, batch[i].x);
    return (up - down) / (2 * h);
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1e-3, std::abs(a), std::abs(b)});
}

// linear least squares for y = w*x + b, solved in closed form
std::pair<double, double> closed_form_line(const std::vector<Sample>& batch) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(batch.size());
    for (const auto& s : batch) {
        sx += s.x[0];
        sy += s.target;
        sxx += s.x[0] * s.x[0];
        sxy += s.x[0] * s.target;
    }
    const double w = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double b = (sy - w * sx) / n;
    return {w, b};
}

}  // namespace

TEST_CASE("transfer functions and their fixed points", "[neuralnet]") {
    CHECK(apply_transfer(Transfer::LogSig, 0.0) == 0.5);
    CHECK(apply_transfer(Transfer::TanSig, 0.0) == 0.0);
    CHECK(apply_transfer(Transfer::PureLin, 7.3) == 7.3);
}

TEST_CASE("transfer derivatives match central differences", "[neuralnet]") {
    Rng rng(3);
    const double h = 1e-6;
    for (Transfer t : {Transfer::LogSig, Transfer::TanSig, Transfer::PureLin}) {
        for (int i = 0; i < 200; ++i) {
            const double x = rng.uniform(-4.0, 4.0);
            const double fd =
                (apply_transfer(t, x + h) - apply_transfer(t, x - h)) / (2 * h);
            CHECK(std::abs(transfer_derivative(t, x) - fd) < 1e-8);
        }
    }
}

TEST_CASE("parameter counts for the two stock layouts", "[neuralnet]") {
    // (4*15+15) + (15*10+10) + (10*1+1) and (4*20+20) + (20*10+10) + (10*1+1)
    CHECK(make_architecture("4-15-10-1", Transfer::TanSig).parameter_count() == 246);
    CHECK(make_architecture("4-20-10-1", Transfer::TanSig).parameter_count() == 321);
}

TEST_CASE("initialization is seeded, bounded, and deterministic", "[neuralnet]") {
    const Architecture arch = make_architecture("4-15-10-1", Transfer::TanSig);
    const Network a = init(arch, 7);
    const Network b = init(arch, 7);
    const Network c = init(arch, 8);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (const auto& layer : a.weights)
        for (double v : layer) {
            REQUIRE(v >= -0.5);
            REQUIRE(v <= 0.5);
        }
}

TEST_CASE("zero networks output zero through tansig/purelin", "[neuralnet]") {
    Architecture arch = make_architecture("4-5-3-1", Transfer::TanSig, Transfer::PureLin);
    Network net = init(arch, 1);
    for (auto& layer : net.weights) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : net.biases) std::fill(layer.begin(), layer.end(), 0.0);
    CHECK(forward(net, std::vector<double>{0.3, -0.4, 0.9, 0.1}) == 0.0);
}

TEST_CASE("logsig output layers stay inside (0, 1)", "[neuralnet]") {
    Rng rng(5);
    const Network net = init(make_architecture("4-8-6-1", Transfer::TanSig), 9);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> x{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3),
                              rng.uniform(-3, 3)};
        const double y = forward(net, x);
        REQUIRE(y > 0.0);
        REQUIRE(y < 1.0);
    }
}

TEST_CASE("forward matches an independent straight-line recomputation", "[neuralnet]") {
    Rng rng(17);
    const Network net = init(make_architecture("4-5-3-1", Transfer::LogSig), 23);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                              rng.uniform(-1, 1)};
        // plain re-walk of the affine/transfer chain
        std::vector<double> act = x;
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            const std::size_t rows = net.biases[l].size();
            const std::size_t cols = act.size();
            std::vector<double> next(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                double z = net.biases[l][r];
                for (std::size_t c = 0; c < cols; ++c)
                    z += net.weights[l][r * cols + c] * act[c];
                next[r] = apply_transfer(net.arch.transfer_of(static_cast<int>(l)), z);
            }
            act = std::move(next);
        }
        CHECK(forward(net, x) == Catch::Approx(act[0]).margin(1e-12));
    }
}

TEST_CASE("forward rejects wrong input sizes", "[neuralnet]") {
    const Network net = init(make_architecture("4-5-1", Transfer::TanSig), 2);
    CHECK_THROWS_AS(forward(net, std::vector<double>{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("gradient is zero at a perfect fit", "[neuralnet]") {
    Network net = init(make_architecture("2-3-1", Transfer::TanSig, Transfer::PureLin), 4);
    std::vector<Sample> batch{{{0.5, -0.2}, 0.0}};
    batch[0].target = forward(net, batch[0].x);  // zero error by construction
    const auto g = gradient(net, batch);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("backprop gradient matches central finite differences", "[neuralnet]") {
    Rng rng(29);
    const Network net = init(make_architecture("4-5-3-1", Transfer::TanSig), 31);
    const auto batch = random_batch(rng, 4, 10);
    const auto g = gradient(net, batch);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        worst = std::max(worst, rel_err(g[k], fd_sse(net, batch, k, 1e-6)));
    CHECK(worst < 1e-6);
}

TEST_CASE("gradient over a concatenated batch is the sum of the parts", "[neuralnet]") {
    Rng rng(37);
    const Network net = init(make_architecture("3-4-1", Transfer::LogSig), 41);
    const auto part_a = random_batch(rng, 3, 5);
    const auto part_b = random_batch(rng, 3, 7);
    std::vector<Sample> both = part_a;
    both.insert(both.end(), part_b.begin(), part_b.end());
    const auto ga = gradient(net, part_a);
    const auto gb = gradient(net, part_b);
    const auto gboth = gradient(net, both);
    for (std::size_t k = 0; k < gboth.size(); ++k)
        CHECK(gboth[k] == Catch::Approx(ga[k] + gb[k]).margin(1e-12));
}

TEST_CASE("error Jacobian matches per-entry finite differences", "[neuralnet]") {
    Rng rng(43);
    const Network net = init(make_architecture("4-5-3-1", Transfer::TanSig), 47);
    const auto batch = random_batch(rng, 4, 10);
    const Jacobian jac = error_jacobian(net, batch);
    double worst = 0.0;
    for (std::size_t i = 0; i < jac.rows; ++i)
        for (std::size_t k = 0; k < jac.cols; ++k)
            worst = std::max(worst, rel_err(jac.at(i, k), fd_error(net, batch, i, k, 1e-6)));
    CHECK(worst < 1e-6);
}

TEST_CASE("grad SSE equals 2 J^T e to near machine precision", "[neuralnet]") {
    Rng rng(53);
    for (int trial = 0; trial < 5; ++trial) {
        const Network net =
            init(make_architecture("4-6-4-1", Transfer::TanSig), 59 + static_cast<unsigned>(trial));
        const auto batch = random_batch(rng, 4, 8);
        const auto g = gradient(net, batch);
        const auto jac = error_jacobian(net, batch);
        const auto e = errors(net, batch);
        double norm = 1.0;
        for (double v : g) norm = std::max(norm, std::abs(v));
        for (std::size_t k = 0; k < g.size(); ++k) {
            double jte = 0.0;
            for (std::size_t i = 0; i < jac.rows; ++i) jte += jac.at(i, k) * e[i];
            REQUIRE(std::abs(g[k] - 2.0 * jte) / norm < 1e-10);
        }
    }
}

TEST_CASE("single-sample J^T e is collinear with half the gradient", "[neuralnet]") {
    Rng rng(61);
    const Network net = init(make_architecture("3-4-1", Transfer::LogSig), 67);
    const auto batch = random_batch(rng, 3, 1);
    const auto g = gradient(net, batch);
    const auto jac = error_jacobian(net, batch);
    const auto e = errors(net, batch);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(2.0 * jac.at(0, k) * e[0] == Catch::Approx(g[k]).margin(1e-12));
}

TEST_CASE("a model already at the goal stops at epoch zero", "[neuralnet]") {
    Rng rng(71);
    Network net = init(make_architecture("4-5-1", Transfer::TanSig), 73);
    const auto batch = random_batch(rng, 4, 6);
    TrainConfig cfg;
    cfg.goal_rmse = 10.0;
    const Network before = net;
    const TrainReport report = train_lm(net, batch, cfg);
    CHECK(report.final_epoch == 0);
    CHECK(report.stop_reason == StopReason::Goal);
    CHECK(report.epoch_rmse.empty());
    CHECK(net == before);
}

TEST_CASE("LM solves an exact linear regression to machine precision fast", "[neuralnet]") {
    // y = 3x, exactly representable inputs; closed-form solution is w=3, b=0
    std::vector<Sample> batch;
    for (double x : {1.0, 2.0, 3.0, 4.0, 5.0}) batch.push_back({{x}, 3.0 * x});
    const auto [w_star, b_star] = closed_form_line(batch);
    CHECK(w_star == Catch::Approx(3.0).margin(1e-12));
    CHECK(b_star == Catch::Approx(0.0).margin(1e-12));

    Architecture arch;
    arch.input_dim = 1;
    arch.hidden.clear();
    arch.output = LayerSpec{1, Transfer::PureLin};
    Network net = init(arch, 5);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.goal_rmse = 0.0;
    const TrainReport report = train_lm(net, batch, cfg);
    CHECK(report.final_epoch <= 3);
    CHECK(sse(net, batch) < 1e-12);
    CHECK(net.weights[0][0] == Catch::Approx(w_star).margin(1e-6));
    CHECK(net.biases[0][0] == Catch::Approx(b_star).margin(1e-6));
}

TEST_CASE("accepted LM epochs strictly decrease the training error", "[neuralnet]") {
    Rng rng(79);
    Network net = init(make_architecture("4-6-4-1", Transfer::TanSig), 83);
    const auto batch = random_batch(rng, 4, 40);
    TrainConfig cfg;
    cfg.max_epochs = 30;
    cfg.goal_rmse = 0.0;
    cfg.mu_max = 1e8;
    TrainReport report;
    try {
        report = train_lm(net, batch, cfg);
    } catch (const SingularSystem&) {
        FAIL("unexpected singular system");
    }
    REQUIRE_FALSE(report.epoch_rmse.empty());
    CHECK(static_cast<int>(report.epoch_rmse.size()) == report.final_epoch);
    for (std::size_t i = 1; i < report.epoch_rmse.size(); ++i)
        REQUIRE(report.epoch_rmse[i] < report.epoch_rmse[i - 1]);
}

TEST_CASE("LM stops with mu overflow when no step can improve", "[neuralnet]") {
    // three points no line passes through: the least-squares optimum has a
    // strictly positive SSE, so an exact-zero goal is unreachable and mu
    // must eventually overflow at the minimum
    std::vector<Sample> batch{{{1.0}, 1.0}, {{2.0}, 2.0}, {{3.0}, 2.0}};
    Architecture arch;
    arch.input_dim = 1;
    arch.hidden.clear();
    arch.output = LayerSpec{1, Transfer::PureLin};
    Network net = init(arch, 11);
    TrainConfig cfg;
    cfg.max_epochs = 1000;
    cfg.goal_rmse = 0.0;
    const TrainReport report = train_lm(net, batch, cfg);
    CHECK(report.stop_reason == StopReason::MuOverflow);
    CHECK(report.final_epoch < 1000);
    // parked at the closed-form least-squares optimum
    const auto [w_star, b_star] = closed_form_line(batch);
    CHECK(net.weights[0][0] == Catch::Approx(w_star).margin(1e-9));
    CHECK(net.biases[0][0] == Catch::Approx(b_star).margin(1e-9));
}

TEST_CASE("GDM with zero momentum reproduces the hand-computed step", "[neuralnet]") {
    Network net = init(make_architecture("2-2-1", Transfer::TanSig), 13);
    std::vector<Sample> batch{{{0.4, -0.3}, 0.8}, {{-0.1, 0.9}, 0.2}};
    const auto theta0 = pack(net);
    const auto g = gradient(net, batch);
    TrainConfig cfg;
    cfg.algorithm = TrainConfig::Algorithm::GDM;
    cfg.max_epochs = 1;
    cfg.goal_rmse = 0.0;
    cfg.learning_rate = 0.05;
    cfg.momentum = 0.0;
    Network trained = net;
    train_gdm(trained, batch, cfg);
    const auto theta1 = pack(trained);
    for (std::size_t k = 0; k < theta0.size(); ++k)
        REQUIRE(theta1[k] == Catch::Approx(theta0[k] - 0.05 * g[k]).margin(1e-15));
}

TEST_CASE("GDM at a perfect fit never moves", "[neuralnet]") {
    Network net = init(make_architecture("2-2-1", Transfer::TanSig, Transfer::PureLin), 17);
    std::vector<Sample> batch{{{0.3, 0.1}, 0.0}};
    batch[0].target = forward(net, batch[0].x);
    TrainConfig cfg;
    cfg.algorithm = TrainConfig::Algorithm::GDM;
    cfg.goal_rmse = 0.0;
    const Network before = net;
    const TrainReport report = train_gdm(net, batch, cfg);
    CHECK(report.stop_reason == StopReason::Goal);
    CHECK(report.final_epoch == 0);
    CHECK(net == before);
}

TEST_CASE("a runaway learning rate raises Diverged", "[neuralnet]") {
    Rng rng(97);
    Network net = init(make_architecture("4-8-1", Transfer::PureLin, Transfer::PureLin), 19);
    const auto batch = random_batch(rng, 4, 12);
    TrainConfig cfg;
    cfg.algorithm = TrainConfig::Algorithm::GDM;
    cfg.learning_rate = 50.0;
    cfg.max_epochs = 200;
    cfg.goal_rmse = 0.0;
    CHECK_THROWS_AS(train_gdm(net, batch, cfg), Diverged);
}

TEST_CASE("training is invariant to batch order up to rounding", "[neuralnet]") {
    Rng rng(101);
    auto batch = random_batch(rng, 4, 30);
    auto shuffled = batch;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i)
        std::swap(shuffled[i], shuffled[rng.next_below(i + 1)]);
    TrainConfig cfg;
    cfg.max_epochs = 8;
    cfg.goal_rmse = 0.0;
    cfg.mu_max = 1e12;
    Network a = init(make_architecture("4-5-1", Transfer::TanSig), 3);
    Network b = a;
    TrainReport ra, rb;
    try {
        ra = train_lm(a, batch, cfg);
        rb = train_lm(b, shuffled, cfg);
    } catch (const SingularSystem&) {
        FAIL("unexpected singular system");
    }
    REQUIRE(ra.epoch_rmse.size() == rb.epoch_rmse.size());
    for (std::size_t i = 0; i < ra.epoch_rmse.size(); ++i)
        CHECK(ra.epoch_rmse[i] == Catch::Approx(rb.epoch_rmse[i]).epsilon(1e-7));
}

TEST_CASE("rmse, mae and r-squared definitions", "[neuralnet]") {
    std::vector<double> preds{0.0, 1.0};
    std::vector<double> targets{1.0, 1.0};
    CHECK(rmse(preds, targets) == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
    CHECK(mae(preds, targets) == Catch::Approx(0.5).margin(1e-12));

    std::vector<double> perfect{0.2, 0.4, 0.9};
    CHECK(rmse(perfect, perfect) == 0.0);
    CHECK(mae(perfect, perfect) == 0.0);
    CHECK(r_squared(perfect, perfect) == 1.0);

    // the mean predictor scores exactly zero
    std::vector<double> targets2{1.0, 2.0, 3.0, 6.0};
    const double mean = 3.0;
    std::vector<double> mean_preds(4, mean);
    CHECK(r_squared(mean_preds, targets2) == Catch::Approx(0.0).margin(1e-12));

    // all-equal targets: undefined
    std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK_FALSE(r_squared(flat, flat).has_value());

    CHECK_THROWS_AS(rmse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    LengthMismatch);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), EmptyInput);
}

TEST_CASE("network snapshots round-trip through the text format", "[neuralnet]") {
    const Network net = init(make_architecture("4-15-10-1", Transfer::TanSig), 123);
    std::ostringstream out;
    save_network(out, net);
    std::istringstream in(out.str());
    const Network back = load_network(in);
    REQUIRE(back == net);
}
