#include "fdia/autoencoder.hpp"

#include "fdia/errors.hpp"
#include "fdia/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fdia {
namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// Activations of every layer; acts[0] is the input batch.
std::vector<Eigen::MatrixXd> forward_all(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
    const auto L = model.weights.size();
    if (batch.rows() != model.spec.input_dim())
        throw InputError("input has dimension " + std::to_string(batch.rows()) + ", model expects " +
                         std::to_string(model.spec.input_dim()));
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(L + 1);
    acts.push_back(batch);
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd z = model.weights[l] * acts.back();
        z.colwise() += model.biases[l];
        acts.push_back(l + 1 < L ? sigmoid(z) : std::move(z));
    }
    return acts;
}

}  // namespace

LayerSpec LayerSpec::symmetric(int input_dim, const std::vector<int>& hidden, int bottleneck) {
    LayerSpec spec;
    spec.dims.push_back(input_dim);
    spec.dims.insert(spec.dims.end(), hidden.begin(), hidden.end());
    spec.dims.push_back(bottleneck);
    spec.dims.insert(spec.dims.end(), hidden.rbegin(), hidden.rend());
    spec.dims.push_back(input_dim);
    spec.validate();
    return spec;
}

void LayerSpec::validate() const {
    if (dims.size() < 3 || dims.size() % 2 == 0)
        throw InputError("layer spec needs an odd number (>= 3) of layer widths");
    for (int d : dims)
        if (d <= 0) throw InputError("layer widths must be positive");
    for (std::size_t i = 0; i < dims.size() / 2; ++i)
        if (dims[i] != dims[dims.size() - 1 - i]) throw InputError("decoder widths must mirror the encoder");
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& rows) const {
    if (!fitted()) throw InputError("scaler is not fitted");
    if (rows.cols() != min.size()) throw InputError("scaler dimension mismatch");
    const Eigen::RowVectorXd range = (max - min).transpose();
    return (rows.rowwise() - min.transpose()).array().rowwise() / range.array();
}

Eigen::MatrixXd MinMaxScaler::inverse_transform(const Eigen::MatrixXd& rows) const {
    if (!fitted()) throw InputError("scaler is not fitted");
    if (rows.cols() != min.size()) throw InputError("scaler dimension mismatch");
    const Eigen::RowVectorXd range = (max - min).transpose();
    Eigen::MatrixXd out = rows.array().rowwise() * range.array();
    return out.rowwise() + min.transpose();
}

MinMaxScaler fit_scaler(const Eigen::MatrixXd& train_rows) {
    if (train_rows.rows() == 0 || train_rows.cols() == 0) throw InputError("cannot fit a scaler on an empty set");
    MinMaxScaler s;
    s.min = train_rows.colwise().minCoeff().transpose();
    s.max = train_rows.colwise().maxCoeff().transpose();
    for (Eigen::Index j = 0; j < s.min.size(); ++j)
        if (!(s.max(j) > s.min(j))) s.max(j) = s.min(j) + 1.0;
    return s;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InputError("learning rate must be positive");
    if (batch_size < 1) throw InputError("batch size must be at least 1");
    if (epochs < 1) throw InputError("epochs must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw InputError("Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw InputError("Adam epsilon must be positive");
}

AutoencoderModel init_model(const LayerSpec& spec, std::uint64_t seed) {
    spec.validate();
    AutoencoderModel model;
    model.spec = spec;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const int fan_in = spec.dims[l];
        const int fan_out = spec.dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return model;
}

ForwardResult forward(const AutoencoderModel& model, const Eigen::VectorXd& z_scaled) {
    const auto acts = forward_all(model, z_scaled);
    return {acts[model.spec.bottleneck_index()].col(0), acts.back().col(0)};
}

Eigen::MatrixXd reconstruct(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
    return forward_all(model, batch).back();
}

double reconstruction_error(const Eigen::VectorXd& z_scaled, const Eigen::VectorXd& z_tilde) {
    if (z_scaled.size() != z_tilde.size() || z_scaled.size() == 0)
        throw InputError("reconstruction error needs equal, nonzero dimensions");
    return (z_scaled - z_tilde).squaredNorm() / static_cast<double>(z_scaled.size());
}

Eigen::VectorXd reconstruction_errors(const AutoencoderModel& model, const Eigen::MatrixXd& raw_rows) {
    const Eigen::MatrixXd scaled = model.scaler.transform(raw_rows).transpose();
    Eigen::VectorXd errors(scaled.cols());
    constexpr Eigen::Index chunk = 4096;
    for (Eigen::Index start = 0; start < scaled.cols(); start += chunk) {
        const Eigen::Index n = std::min(chunk, scaled.cols() - start);
        const auto block = scaled.middleCols(start, n);
        const Eigen::MatrixXd out = reconstruct(model, block);
        errors.segment(start, n) = (block - out).colwise().squaredNorm().transpose() / static_cast<double>(scaled.rows());
    }
    return errors;
}

double batch_loss(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
    if (batch.cols() == 0) throw InputError("empty batch");
    const Eigen::MatrixXd out = reconstruct(model, batch);
    return (batch - out).squaredNorm() / static_cast<double>(batch.rows() * batch.cols());
}

Gradients backward(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
    if (batch.cols() == 0) throw InputError("empty batch");
    const auto acts = forward_all(model, batch);
    const std::size_t L = model.weights.size();
    Gradients g;
    g.weights.resize(L);
    g.biases.resize(L);
    // d(loss)/d(output) for loss = sum ||z - z~||^2 / (d * B).
    Eigen::MatrixXd delta = (acts[L] - batch) * (2.0 / static_cast<double>(batch.rows() * batch.cols()));
    for (std::size_t l = L; l-- > 0;) {
        g.weights[l].noalias() = delta * acts[l].transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = model.weights[l].transpose() * delta;
            delta = back.array() * acts[l].array() * (1.0 - acts[l].array());
        }
    }
    return g;
}

AdamState AdamState::zeros_like(const AutoencoderModel& model) {
    AdamState s;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        s.m_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        s.v_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        s.m_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        s.v_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }
    return s;
}

void adam_step(AutoencoderModel& model, const Gradients& grads, AdamState& state, const TrainConfig& config) {
    const std::size_t L = model.weights.size();
    if (grads.weights.size() != L || grads.biases.size() != L || state.m_w.size() != L || state.m_b.size() != L)
        throw InputError("Adam state does not match the model");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        if (grad.rows() != param.rows() || grad.cols() != param.cols() || m.rows() != param.rows() ||
            m.cols() != param.cols())
            throw InputError("Adam shape mismatch");
        m = config.beta1 * m + (1.0 - config.beta1) * grad;
        v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
        param.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config.epsilon);
    };
    for (std::size_t l = 0; l < L; ++l) {
        update(model.weights[l], grads.weights[l], state.m_w[l], state.v_w[l]);
        update(model.biases[l], grads.biases[l], state.m_b[l], state.v_b[l]);
    }
}

TrainResult train(AutoencoderModel model, const Eigen::MatrixXd& train_rows, const Eigen::MatrixXd& val_rows,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (train_rows.rows() == 0 || val_rows.rows() == 0) throw InputError("training and validation sets must be non-empty");
    if (!model.scaler.fitted()) throw InputError("scaler must be fitted before training");

    const Eigen::MatrixXd train_set = model.scaler.transform(train_rows).transpose();
    const Eigen::MatrixXd val_set = model.scaler.transform(val_rows).transpose();
    const Eigen::Index n = train_set.cols();
    const Eigen::Index d = train_set.rows();

    std::mt19937_64 rng(config.seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    AdamState state = AdamState::zeros_like(model);
    TrainResult result;
    Eigen::MatrixXd batch;

    auto mean_error = [&](const Eigen::MatrixXd& set) {
        double total = 0.0;
        constexpr Eigen::Index chunk = 4096;
        for (Eigen::Index s = 0; s < set.cols(); s += chunk) {
            const Eigen::Index k = std::min(chunk, set.cols() - s);
            total += (set.middleCols(s, k) - reconstruct(model, set.middleCols(s, k))).squaredNorm();
        }
        return total / static_cast<double>(set.cols() * d);
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index size = std::min<Eigen::Index>(config.batch_size, n - start);
            batch.resize(d, size);
            for (Eigen::Index k = 0; k < size; ++k) batch.col(k) = train_set.col(order[static_cast<std::size_t>(start + k)]);
            adam_step(model, backward(model, batch), state, config);
        }
        const double train_error = mean_error(train_set);
        const double val_error = mean_error(val_set);
        result.history.train_error.push_back(train_error);
        result.history.val_error.push_back(val_error);
        if (on_epoch) on_epoch(epoch + 1, train_error, val_error);
        if (!std::isfinite(train_error)) {
            result.diverged = true;
            break;
        }
    }
    result.model = std::move(model);
    return result;
}

std::vector<GridSearchEntry> grid_search(const Eigen::MatrixXd& train_rows, const Eigen::MatrixXd& val_rows,
                                         const std::vector<double>& learning_rates,
                                         const std::vector<int>& batch_sizes, const LayerSpec& spec,
                                         int epochs, std::uint64_t seed) {
    if (learning_rates.empty() || batch_sizes.empty()) throw InputError("grid search needs non-empty grids");
    AutoencoderModel initial = init_model(spec, seed);
    initial.scaler = fit_scaler(train_rows);
    std::vector<GridSearchEntry> entries;
    for (double lr : learning_rates) {
        for (int bs : batch_sizes) {
            TrainConfig cfg;
            cfg.learning_rate = lr;
            cfg.batch_size = bs;
            cfg.epochs = epochs;
            cfg.seed = seed;
            auto run = train(initial, train_rows, val_rows, cfg);
            GridSearchEntry e;
            e.learning_rate = lr;
            e.batch_size = bs;
            e.diverged = run.diverged || !std::isfinite(run.history.val_error.back());
            e.final_train_error = run.history.train_error.back();
            e.final_val_error = run.history.val_error.back();
            e.history = std::move(run.history);
            entries.push_back(std::move(e));
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const GridSearchEntry& a, const GridSearchEntry& b) {
        if (a.diverged != b.diverged) return !a.diverged;
        if (a.diverged) return false;
        return a.final_val_error < b.final_val_error;
    });
    return entries;
}

namespace {

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const AutoencoderModel& model) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < model.weights[l].rows(); ++i)
            rows.push_back(vec(model.weights[l].row(i).transpose()));
        layers.push_back({{"weights", rows}, {"bias", vec(model.biases[l])}});
    }
    nlohmann::json j = {{"format_version", kModelFormatVersion},
                        {"dims", model.spec.dims},
                        {"hidden_activation", "sigmoid"},
                        {"output_activation", "linear"},
                        {"layers", layers}};
    if (model.scaler.fitted()) j["scaler"] = {{"min", vec(model.scaler.min)}, {"max", vec(model.scaler.max)}};
    return j;
}

AutoencoderModel model_from_json(const nlohmann::json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw InputError("unsupported model format version " + std::to_string(version));
        AutoencoderModel model;
        model.spec.dims = j.at("dims").get<std::vector<int>>();
        model.spec.validate();
        const auto& layers = j.at("layers");
        if (layers.size() != model.spec.layer_count()) throw InputError("model has the wrong number of layers");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto rows = layers[l].at("weights").get<std::vector<std::vector<double>>>();
            const int out = model.spec.dims[l + 1];
            const int in = model.spec.dims[l];
            if (static_cast<int>(rows.size()) != out) throw InputError("weight matrix has the wrong shape");
            Eigen::MatrixXd w(out, in);
            for (int i = 0; i < out; ++i) {
                if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != in)
                    throw InputError("weight matrix has the wrong shape");
                w.row(i) = from_vec(rows[static_cast<std::size_t>(i)]).transpose();
            }
            auto b = from_vec(layers[l].at("bias").get<std::vector<double>>());
            if (b.size() != out) throw InputError("bias vector has the wrong length");
            model.weights.push_back(std::move(w));
            model.biases.push_back(std::move(b));
        }
        if (j.contains("scaler")) {
            model.scaler.min = from_vec(j["scaler"].at("min").get<std::vector<double>>());
            model.scaler.max = from_vec(j["scaler"].at("max").get<std::vector<double>>());
            if (model.scaler.min.size() != model.spec.input_dim() || model.scaler.max.size() != model.spec.input_dim())
                throw InputError("scaler dimension does not match the model");
            if ((model.scaler.max - model.scaler.min).minCoeff() < 0.0) throw InputError("scaler max below min");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid model JSON: ") + e.what());
    }
}

void save_model(const AutoencoderModel& model, const std::filesystem::path& path) {
    write_file(path, to_json(model).dump(1) + "\n");
}

AutoencoderModel load_model(const std::filesystem::path& path) {
    try {
        return model_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

}  // namespace fdia
