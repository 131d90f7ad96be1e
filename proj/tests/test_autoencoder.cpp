#include <doctest.h>

#include "fdia/autoencoder.hpp"
#include "fdia/errors.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace fdia;

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Central-difference gradient of batch_loss for one parameter.
template <class Ref>
double numeric_partial(AutoencoderModel& model, Ref&& param, const Eigen::MatrixXd& batch, double h) {
    const double keep = param;
    param = keep + h;
    const double up = batch_loss(model, batch);
    param = keep - h;
    const double down = batch_loss(model, batch);
    param = keep;
    return (up - down) / (2.0 * h);
}

double max_gradient_error(const LayerSpec& spec, std::uint64_t seed) {
    AutoencoderModel model = init_model(spec, seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd batch(spec.input_dim(), 5);
    for (auto& v : batch.reshaped()) v = u(rng);
    const Gradients g = backward(model, batch);
    double worst = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (Eigen::Index k = 0; k < model.weights[l].size(); ++k) {
            const double num = numeric_partial(model, model.weights[l].reshaped()(k), batch, 1e-6);
            worst = std::max(worst, std::abs(num - g.weights[l].reshaped()(k)));
        }
        for (Eigen::Index k = 0; k < model.biases[l].size(); ++k) {
            const double num = numeric_partial(model, model.biases[l](k), batch, 1e-6);
            worst = std::max(worst, std::abs(num - g.biases[l](k)));
        }
    }
    return worst;
}

Eigen::MatrixXd random_rows(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd m(n, d);
    for (auto& v : m.reshaped()) v = nd(rng);
    return m;
}

}  // namespace

TEST_CASE("layer spec") {
    const auto s = LayerSpec::symmetric(34, {256, 128, 64}, 32);
    CHECK(s.dims == std::vector<int>{34, 256, 128, 64, 32, 64, 128, 256, 34});
    CHECK(s.layer_count() == 8);
    CHECK(s.dims[s.bottleneck_index()] == 32);
    CHECK_THROWS_AS((LayerSpec{{3}}.validate()), InputError);
    CHECK_THROWS_AS((LayerSpec{{3, 0, 3}}.validate()), InputError);
    CHECK_THROWS_AS((LayerSpec{{3, 2, 4}}.validate()), InputError);
}

TEST_CASE("initialisation") {
    const auto s = LayerSpec::symmetric(6, {4}, 2);
    const auto a = init_model(s, 9);
    const auto b = init_model(s, 9);
    const auto c = init_model(s, 10);
    REQUIRE(a.weights.size() == 4);
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        CHECK(a.weights[l].rows() == s.dims[l + 1]);
        CHECK(a.weights[l].cols() == s.dims[l]);
        CHECK(a.weights[l] == b.weights[l]);
        CHECK(a.biases[l] == Eigen::VectorXd::Zero(s.dims[l + 1]));
        const double limit = std::sqrt(6.0 / (s.dims[l] + s.dims[l + 1]));
        CHECK(a.weights[l].cwiseAbs().maxCoeff() <= limit);
    }
    CHECK(a.weights[0] != c.weights[0]);
}

TEST_CASE("forward pass by hand") {
    AutoencoderModel m;
    m.spec.dims = {2, 1, 2};
    m.weights = {Eigen::RowVector2d(1.0, -1.0), Eigen::Vector2d(2.0, 3.0)};
    m.biases = {Eigen::VectorXd::Constant(1, 0.5), Eigen::Vector2d(-1.0, 0.0)};
    const Eigen::Vector2d z(0.25, 0.75);
    const double h = sigmoid(0.25 - 0.75 + 0.5);
    const auto f = forward(m, z);
    CHECK(f.bottleneck(0) == doctest::Approx(h));
    CHECK(f.output(0) == doctest::Approx(2.0 * h - 1.0));
    CHECK(f.output(1) == doctest::Approx(3.0 * h));
    // linear output: values outside (0, 1) are reachable
    CHECK(f.output(0) < 0.5);
    m.biases[1](1) = 10.0;
    CHECK(forward(m, z).output(1) > 1.0);
    const Eigen::MatrixXd batch = (Eigen::MatrixXd(2, 2) << 0.25, 0.0, 0.75, 1.0).finished();
    CHECK(reconstruct(m, batch).col(0) == forward(m, z).output);
}

TEST_CASE("reconstruction error") {
    CHECK(reconstruction_error(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0)) == doctest::Approx(0.5));
    CHECK(reconstruction_error(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)) == 0.0);
    CHECK(reconstruction_error(Eigen::Vector4d(1, 1, 1, 1), Eigen::Vector4d(0, 0, 0, 3)) == doctest::Approx(7.0 / 4));
}

TEST_CASE("gradients match finite differences") {
    const std::vector<LayerSpec> specs = {
        {{6, 4, 2, 4, 6}}, {{3, 2, 3}}, {{5, 3, 1, 3, 5}}, {{4, 6, 4}}, {{8, 5, 3, 2, 3, 5, 8}}};
    std::uint64_t seed = 1;
    for (const auto& s : specs) CHECK(max_gradient_error(s, seed++) <= 1e-6);
}

TEST_CASE("batch loss is the mean error and its gradient") {
    const auto s = LayerSpec::symmetric(5, {4}, 2);
    const auto m = init_model(s, 3);
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd batch = random_rows(rng, 5, 7);
    double mean = 0.0;
    for (Eigen::Index k = 0; k < batch.cols(); ++k)
        mean += reconstruction_error(batch.col(k), forward(m, batch.col(k)).output);
    CHECK(batch_loss(m, batch) == doctest::Approx(mean / 7.0).epsilon(1e-12));

    // gradient of a batch equals the average of single-column gradients
    const Gradients g = backward(m, batch);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(g.weights[0].rows(), g.weights[0].cols());
    for (Eigen::Index k = 0; k < batch.cols(); ++k) acc += backward(m, batch.col(k)).weights[0];
    CHECK((acc / 7.0 - g.weights[0]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("perfect reconstruction has zero gradient") {
    AutoencoderModel m;
    m.spec.dims = {1, 1, 1};
    m.weights = {Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 2.0)};
    m.biases = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
    const Eigen::MatrixXd batch = Eigen::MatrixXd::Constant(1, 1, 2.0 * sigmoid(0.3));
    m.weights[0](0, 0) = 0.3 / batch(0, 0);
    const Gradients g = backward(m, batch);
    for (const auto& w : g.weights) CHECK(w.cwiseAbs().maxCoeff() <= 1e-12);
    for (const auto& b : g.biases) CHECK(b.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("adam") {
    const auto s = LayerSpec::symmetric(3, {}, 2);
    AutoencoderModel m = init_model(s, 5);
    const AutoencoderModel before = m;
    AdamState st = AdamState::zeros_like(m);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;

    Gradients zero{{Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(3, 2)}, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)}};
    adam_step(m, zero, st, cfg);
    CHECK(m.weights[0] == before.weights[0]);
    CHECK(st.step == 1);

    // first step with a bias-corrected moment moves every parameter by about lr
    AdamState fresh = AdamState::zeros_like(m);
    Gradients g = zero;
    g.weights[0].setConstant(0.37);
    g.biases[1].setConstant(-4.0);
    AutoencoderModel moved = before;
    adam_step(moved, g, fresh, cfg);
    CHECK((moved.weights[0] - before.weights[0]).cwiseAbs().minCoeff() == doctest::Approx(0.01).epsilon(1e-6));
    CHECK((moved.biases[1] - before.biases[1]).minCoeff() == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(moved.weights[1] == before.weights[1]);

    AutoencoderModel again = before;
    AdamState fresh2 = AdamState::zeros_like(again);
    adam_step(again, g, fresh2, cfg);
    CHECK(again.weights[0] == moved.weights[0]);
}

TEST_CASE("scaler") {
    Eigen::MatrixXd rows(3, 3);
    rows << 0, 5, 1, 10, 5, 2, 5, 5, 3;
    const auto sc = fit_scaler(rows);
    CHECK(sc.min == Eigen::Vector3d(0, 5, 1));
    CHECK(sc.max == Eigen::Vector3d(10, 6, 3));
    const Eigen::MatrixXd t = sc.transform(rows);
    CHECK(t(1, 0) == doctest::Approx(1.0));
    CHECK(t(2, 0) == doctest::Approx(0.5));
    CHECK(t.col(1) == Eigen::Vector3d::Zero());
    const Eigen::MatrixXd outside = sc.transform((Eigen::MatrixXd(1, 3) << 20, 5, 0).finished());
    CHECK(outside(0, 0) == doctest::Approx(2.0));
    CHECK(outside(0, 2) == doctest::Approx(-0.5));
    CHECK((sc.inverse_transform(t) - rows).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(fit_scaler(Eigen::MatrixXd(0, 3)), InputError);
}

TEST_CASE("training converges on a repeated vector") {
    Eigen::MatrixXd rows(64, 4);
    for (Eigen::Index k = 0; k < 64; ++k) rows.row(k) = Eigen::RowVector4d(0.2, 0.9, 0.4, 0.6) + Eigen::RowVector4d::Constant(k % 2 ? 0.0 : 1.0);
    AutoencoderModel m = init_model(LayerSpec{{4, 2, 4}}, 3);
    m.scaler = fit_scaler(rows);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 16;
    cfg.epochs = 400;
    cfg.seed = 1;
    const auto r = train(m, rows, rows, cfg);
    REQUIRE_FALSE(r.diverged);
    REQUIRE(r.history.epochs() == 400);
    CHECK(r.history.train_error.back() < 1e-3);
    CHECK(r.history.train_error.back() < r.history.train_error.front());

    const auto r2 = train(m, rows, rows, cfg);
    CHECK(r2.history.train_error == r.history.train_error);
    CHECK(r2.history.val_error == r.history.val_error);

    int calls = 0;
    cfg.epochs = 3;
    train(m, rows, rows, cfg, [&](int, double, double) { ++calls; });
    CHECK(calls == 3);

    cfg.epochs = 0;
    CHECK_THROWS_AS(train(m, rows, rows, cfg), InputError);
    cfg.epochs = 3;
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(train(m, rows, rows, cfg), InputError);
    AutoencoderModel unfitted = init_model(LayerSpec{{4, 2, 4}}, 3);
    cfg.learning_rate = 1e-2;
    CHECK_THROWS_AS(train(unfitted, rows, rows, cfg), InputError);
}

TEST_CASE("grid search") {
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd tr = random_rows(rng, 40, 4);
    const Eigen::MatrixXd va = random_rows(rng, 10, 4);
    const LayerSpec spec{{4, 3, 2, 3, 4}};
    const auto all = grid_search(tr, va, {1e-3, 1e-2, 3e-2}, {4, 8, 16, 32}, spec, 3, 2);
    CHECK(all.size() == 12);
    for (std::size_t k = 1; k < all.size(); ++k) CHECK(all[k - 1].final_val_error <= all[k].final_val_error);
    for (const auto& e : all) CHECK(e.history.epochs() == 3);

    const auto one = grid_search(tr, va, {1e-3}, {8}, spec, 2, 2);
    REQUIRE(one.size() == 1);
    AutoencoderModel m = init_model(spec, 2);
    m.scaler = fit_scaler(tr);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 8;
    cfg.epochs = 2;
    cfg.seed = 2;
    CHECK(one[0].history.val_error == train(m, tr, va, cfg).history.val_error);

    const auto blown = grid_search(tr, va, {1e200, 1e-3}, {8}, spec, 3, 2);
    REQUIRE(blown.size() == 2);
    CHECK_FALSE(blown[0].diverged);
    CHECK(blown[1].diverged);
    CHECK(blown[1].learning_rate == 1e200);
}

TEST_CASE("model json round trip") {
    std::mt19937_64 rng(2);
    AutoencoderModel m = init_model(LayerSpec::symmetric(5, {4}, 3), 11);
    m.scaler = fit_scaler(random_rows(rng, 20, 5));
    const auto path = std::filesystem::temp_directory_path() / "fdia_model_test.json";
    save_model(m, path);
    const AutoencoderModel back = load_model(path);
    std::filesystem::remove(path);
    CHECK(back.spec.dims == m.spec.dims);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        CHECK(back.weights[l] == m.weights[l]);
        CHECK(back.biases[l] == m.biases[l]);
    }
    CHECK(back.scaler.min == m.scaler.min);
    CHECK(back.scaler.max == m.scaler.max);
    const Eigen::MatrixXd probe = random_rows(rng, 4, 5);
    CHECK(reconstruction_errors(back, probe) == reconstruction_errors(m, probe));

    nlohmann::json j = to_json(m);
    j["format_version"] = 99;
    CHECK_THROWS_AS(model_from_json(j), InputError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), InputError);
}
