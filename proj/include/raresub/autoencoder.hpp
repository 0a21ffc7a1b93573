#ifndef RARESUB_AUTOENCODER_HPP
#define RARESUB_AUTOENCODER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "raresub/clustering.hpp"
#include "raresub/preprocess.hpp"

namespace raresub {

struct AeConfig {
    int input_dim = 0;
    int latent_dim = 128;
    double dropout_p = 0.1;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;
    int batch_size = 256;
    double val_fraction = 0.15;
    int patience = 15;
    int max_epochs = 500;
    std::uint64_t seed = 42;

    // Hidden sizes derive from the input width; divisions floor.
    int hidden1() const { return std::min(1024, std::max(256, input_dim / 2)); }
    int hidden2() const { return std::min(512, std::max(128, input_dim / 4)); }

    void check() const;  // throws InvalidDims / InvalidArgument
};

struct DenseLayer {
    Eigen::MatrixXd weight;  // fan_in x fan_out
    Eigen::RowVectorXd bias;
    bool relu = false;
    bool dropout = false;  // only the first encoder layer carries dropout
};

// Symmetric fully connected autoencoder:
//   D_in -> H1 (relu, dropout) -> H2 (relu) -> latent (linear)
//        -> H2 (relu) -> H1 (relu) -> D_in (linear)
struct AutoencoderModel {
    AeConfig config;
    std::vector<DenseLayer> layers;  // 6 layers; 0..2 encoder, 3..5 decoder

    Eigen::MatrixXd encode_eval(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd forward_eval(const Eigen::MatrixXd& x) const;
};

struct TrainHistory {
    std::vector<double> train_mse;  // per-entry, mean of the epoch's batch losses
    std::vector<double> val_mse;    // per-entry, eval mode
    int best_epoch = 0;             // 1-based
    int stopped_epoch = 0;          // 1-based, <= best_epoch + patience
    double best_val_mse = 0.0;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    bool aborted_nonfinite = false;  // divergence; model holds the last finite checkpoint
};

struct TrainResult {
    AutoencoderModel model;
    TrainHistory history;
};

namespace ae {

// Deterministic Glorot-uniform initialization from config.seed.
AutoencoderModel build(const AeConfig& config);

// Adam + coupled L2 on the per-entry reconstruction MSE; 85/15 seeded split,
// early stopping on validation MSE, returns the best-validation parameters.
TrainResult train(const ScaledMatrix& x, const AeConfig& config);

LatentMatrix encode(const AutoencoderModel& model, const ScaledMatrix& x);

Eigen::MatrixXd reconstruct(const AutoencoderModel& model, const Eigen::MatrixXd& x);

// Mean over samples of the squared reconstruction error (sum across genes).
double mse_per_sample(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat);
// Mean over all entries; the convention used for training and reporting.
double mse_per_entry(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat);

// Central finite differences (step 1e-5) against the analytic gradient of
// per-entry MSE + (weight_decay/2)*||params||^2, dropout off. Returns the
// max scaled relative error over every parameter.
double gradient_check(const AutoencoderModel& model, const Eigen::MatrixXd& x_small);

// Versioned binary checkpoint: header JSON + raw little-endian doubles.
void save_model(const AutoencoderModel& model, const std::string& path);
AutoencoderModel load_model(const std::string& path);

void save_history_csv(const TrainHistory& history, int input_dim, const std::string& path);

}  // namespace ae
}  // namespace raresub

#endif
