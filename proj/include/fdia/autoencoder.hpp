#pragma once

// Fully connected autoencoder used as a one-class detector.
//
// Hidden layers (bottleneck included) use the logistic sigmoid, the output
// layer is linear. Inputs are min-max scaled with statistics of the training
// split; values outside the training range are passed through unclipped.
//
// Batches are stored column-wise: one observation per column.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace fdia {

struct LayerSpec {
    std::vector<int> dims;  // input, hidden..., bottleneck, hidden reversed..., output

    /// {d, h1, ..., hk, b, hk, ..., h1, d}
    static LayerSpec symmetric(int input_dim, const std::vector<int>& hidden, int bottleneck);
    void validate() const;
    int input_dim() const { return dims.front(); }
    std::size_t layer_count() const { return dims.size() - 1; }
    /// Index into dims of the narrowest (middle) layer.
    std::size_t bottleneck_index() const { return dims.size() / 2; }
};

struct MinMaxScaler {
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    bool fitted() const { return min.size() > 0; }
    /// Rows are observations.
    Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& rows) const;
};

/// Per-feature min/max of the training rows; a constant feature gets
/// (v, v + 1) so that it maps to 0.
MinMaxScaler fit_scaler(const Eigen::MatrixXd& train_rows);

struct AutoencoderModel {
    LayerSpec spec;
    std::vector<Eigen::MatrixXd> weights;  // weights[l] is dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;
    MinMaxScaler scaler;
};

struct TrainConfig {
    double learning_rate = 3e-5;
    int batch_size = 256;
    int epochs = 3000;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_error;  // mean reconstruction error per epoch
    std::vector<double> val_error;

    std::size_t epochs() const { return train_error.size(); }
};

/// Glorot-uniform weights and zero biases from a seeded generator.
AutoencoderModel init_model(const LayerSpec& spec, std::uint64_t seed);

struct ForwardResult {
    Eigen::VectorXd bottleneck;
    Eigen::VectorXd output;
};

ForwardResult forward(const AutoencoderModel& model, const Eigen::VectorXd& z_scaled);
/// Output for a batch of scaled observations (columns).
Eigen::MatrixXd reconstruct(const AutoencoderModel& model, const Eigen::MatrixXd& batch);

/// ||z - z_tilde||^2 / d.
double reconstruction_error(const Eigen::VectorXd& z_scaled, const Eigen::VectorXd& z_tilde);
/// Reconstruction error of every raw (unscaled) observation row.
Eigen::VectorXd reconstruction_errors(const AutoencoderModel& model, const Eigen::MatrixXd& raw_rows);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Mean reconstruction error of a batch of scaled observations (columns).
double batch_loss(const AutoencoderModel& model, const Eigen::MatrixXd& batch);
/// Exact gradient of batch_loss with respect to every weight and bias.
Gradients backward(const AutoencoderModel& model, const Eigen::MatrixXd& batch);

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long step = 0;

    static AdamState zeros_like(const AutoencoderModel& model);
};

void adam_step(AutoencoderModel& model, const Gradients& grads, AdamState& state, const TrainConfig& config);

struct TrainResult {
    AutoencoderModel model;
    TrainHistory history;
    bool diverged = false;
};

using EpochCallback = std::function<void(int epoch, double train_error, double val_error)>;

/// Mini-batch Adam on the mean reconstruction error. Observation rows are raw;
/// the model's scaler must already be fitted. Stops early, with diverged set,
/// when the training error becomes non-finite.
TrainResult train(AutoencoderModel model, const Eigen::MatrixXd& train_rows, const Eigen::MatrixXd& val_rows,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

struct GridSearchEntry {
    double learning_rate = 0.0;
    int batch_size = 0;
    double final_train_error = 0.0;
    double final_val_error = 0.0;
    bool diverged = false;
    TrainHistory history;
};

/// One training run per (learning rate, batch size) pair from the same
/// initial weights, ranked by final validation error; diverged runs last.
std::vector<GridSearchEntry> grid_search(const Eigen::MatrixXd& train_rows, const Eigen::MatrixXd& val_rows,
                                         const std::vector<double>& learning_rates,
                                         const std::vector<int>& batch_sizes, const LayerSpec& spec,
                                         int epochs, std::uint64_t seed);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const AutoencoderModel& model);
AutoencoderModel model_from_json(const nlohmann::json& j);
void save_model(const AutoencoderModel& model, const std::filesystem::path& path);
AutoencoderModel load_model(const std::filesystem::path& path);

}  // namespace fdia
