#include "raresub/autoencoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "raresub/csv.hpp"
#include "raresub/error.hpp"
#include "raresub/rng.hpp"

namespace raresub {

void AeConfig::check() const {
    if (input_dim < 1) {
        throw Error(ErrorCode::InvalidArgument, "input_dim must be >= 1");
    }
    if (latent_dim < 1) {
        throw Error(ErrorCode::InvalidArgument, "latent_dim must be >= 1");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "dropout_p must be in [0,1)");
    }
    if (!(learning_rate > 0.0) || weight_decay < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "bad learning_rate / weight_decay");
    }
    if (batch_size < 1 || patience < 1 || max_epochs < 1) {
        throw Error(ErrorCode::InvalidArgument, "batch_size, patience, max_epochs must be >= 1");
    }
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "val_fraction must be in (0,1)");
    }
    if (hidden2() < latent_dim) {
        throw Error(ErrorCode::InvalidDims,
                    "latent_dim " + std::to_string(latent_dim) + " exceeds H2 " +
                        std::to_string(hidden2()));
    }
}

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& z) {
    return (z.array() > 0.0).cast<double>().matrix();
}

// Activations of one training-mode forward pass, kept for backprop.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
    std::vector<Eigen::MatrixXd> post;  // post-activation (after dropout) per layer
    Eigen::MatrixXd dropout_scale;      // mask/(1-p) for the dropout layer, or empty
};

ForwardTrace forward_train(const AutoencoderModel& model, const Eigen::MatrixXd& x, Pcg32* rng) {
    ForwardTrace trace;
    trace.pre.reserve(model.layers.size());
    trace.post.reserve(model.layers.size());
    Eigen::MatrixXd current = x;
    for (const DenseLayer& layer : model.layers) {
        Eigen::MatrixXd z = (current * layer.weight).rowwise() + layer.bias;
        trace.pre.push_back(z);
        Eigen::MatrixXd a = layer.relu ? relu(z) : z;
        if (layer.dropout && rng && model.config.dropout_p > 0.0) {
            const double p = model.config.dropout_p;
            const double scale = 1.0 / (1.0 - p);
            trace.dropout_scale.resize(a.rows(), a.cols());
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                for (Eigen::Index j = 0; j < a.cols(); ++j) {
                    trace.dropout_scale(i, j) = rng->next_double() < p ? 0.0 : scale;
                }
            }
            a = a.cwiseProduct(trace.dropout_scale);
        }
        trace.post.push_back(a);
        current = trace.post.back();
    }
    return trace;
}

struct Gradients {
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::RowVectorXd> bias;
};

// Analytic gradient of per-entry MSE + (lambda/2)*||params||^2 for one batch.
Gradients backward(const AutoencoderModel& model, const Eigen::MatrixXd& x,
                   const ForwardTrace& trace) {
    const std::size_t num_layers = model.layers.size();
    Gradients grads;
    grads.weight.resize(num_layers);
    grads.bias.resize(num_layers);

    const double scale = 2.0 / static_cast<double>(x.rows() * x.cols());
    Eigen::MatrixXd delta = scale * (trace.post.back() - x);

    for (std::size_t li = num_layers; li-- > 0;) {
        const DenseLayer& layer = model.layers[li];
        const Eigen::MatrixXd& input = (li == 0) ? x : trace.post[li - 1];
        grads.weight[li].noalias() = input.transpose() * delta;
        grads.bias[li] = delta.colwise().sum();
        if (li == 0) break;
        Eigen::MatrixXd upstream = delta * layer.weight.transpose();
        const DenseLayer& below = model.layers[li - 1];
        if (below.dropout && trace.dropout_scale.size() > 0) {
            upstream = upstream.cwiseProduct(trace.dropout_scale);
        }
        delta = below.relu ? upstream.cwiseProduct(relu_mask(trace.pre[li - 1])).eval()
                           : std::move(upstream);
    }

    const double lambda = model.config.weight_decay;
    if (lambda > 0.0) {
        for (std::size_t li = 0; li < num_layers; ++li) {
            grads.weight[li] += lambda * model.layers[li].weight;
            grads.bias[li] += lambda * model.layers[li].bias;
        }
    }
    return grads;
}

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::RowVectorXd> m_b, v_b;
    long step = 0;

    explicit AdamState(const AutoencoderModel& model) {
        for (const DenseLayer& layer : model.layers) {
            m_w.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
            v_w.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
            m_b.push_back(Eigen::RowVectorXd::Zero(layer.bias.cols()));
            v_b.push_back(Eigen::RowVectorXd::Zero(layer.bias.cols()));
        }
    }
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_step(AutoencoderModel& model, AdamState& state, const Gradients& grads, double lr) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
            m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
            v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
            param.array() -=
                lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
        };
        update(model.layers[li].weight, state.m_w[li], state.v_w[li], grads.weight[li]);
        update(model.layers[li].bias, state.m_b[li], state.v_b[li], grads.bias[li]);
    }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx,
                            std::size_t begin, std::size_t end) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), x.cols());
    for (std::size_t i = begin; i < end; ++i) {
        out.row(static_cast<Eigen::Index>(i - begin)) =
            x.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
}

}  // namespace

Eigen::MatrixXd AutoencoderModel::encode_eval(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd current = x;
    for (std::size_t li = 0; li < 3; ++li) {
        const DenseLayer& layer = layers[li];
        Eigen::MatrixXd z = (current * layer.weight).rowwise() + layer.bias;
        current = layer.relu ? relu(z) : std::move(z);
    }
    return current;
}

Eigen::MatrixXd AutoencoderModel::forward_eval(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd current = x;
    for (const DenseLayer& layer : layers) {
        Eigen::MatrixXd z = (current * layer.weight).rowwise() + layer.bias;
        current = layer.relu ? relu(z) : std::move(z);
    }
    return current;
}

namespace ae {

AutoencoderModel build(const AeConfig& config) {
    config.check();
    AutoencoderModel model;
    model.config = config;

    const int h1 = config.hidden1();
    const int h2 = config.hidden2();
    const std::vector<std::pair<int, int>> dims = {
        {config.input_dim, h1}, {h1, h2}, {h2, config.latent_dim},
        {config.latent_dim, h2}, {h2, h1}, {h1, config.input_dim}};
    const std::vector<bool> relu_flags = {true, true, false, true, true, false};

    Pcg32 rng(config.seed);
    for (std::size_t li = 0; li < dims.size(); ++li) {
        DenseLayer layer;
        const auto [fan_in, fan_out] = dims[li];
        layer.weight.resize(fan_in, fan_out);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
                layer.weight(i, j) = (2.0 * rng.next_double() - 1.0) * limit;
            }
        }
        layer.bias = Eigen::RowVectorXd::Zero(fan_out);
        layer.relu = relu_flags[li];
        layer.dropout = (li == 0);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

double mse_per_sample(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat) {
    if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "mse inputs differ in shape");
    }
    return (x - x_hat).squaredNorm() / static_cast<double>(x.rows());
}

double mse_per_entry(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat) {
    if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "mse inputs differ in shape");
    }
    return (x - x_hat).squaredNorm() / static_cast<double>(x.size());
}

TrainResult train(const ScaledMatrix& x, const AeConfig& config) {
    config.check();
    if (x.values.cols() != config.input_dim) {
        throw Error(ErrorCode::ShapeMismatch,
                    "matrix has " + std::to_string(x.values.cols()) + " genes, config expects " +
                        std::to_string(config.input_dim));
    }
    const std::size_t n = static_cast<std::size_t>(x.values.rows());
    const std::size_t n_val =
        static_cast<std::size_t>(std::lround(config.val_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_val;
    if (n_train < 2 || n_val < 2) {
        throw Error(ErrorCode::TooFewSamples,
                    "split " + std::to_string(n_train) + "/" + std::to_string(n_val) +
                        " needs >= 2 samples on both sides");
    }

    // stream 1 reserved for the split; epoch e uses stream e+1
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    {
        Pcg32 split_rng(config.seed, 1);
        split_rng.shuffle(order);
    }
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                     order.end());

    const Eigen::MatrixXd train_x = gather_rows(x.values, train_idx, 0, train_idx.size());
    const Eigen::MatrixXd val_x = gather_rows(x.values, val_idx, 0, val_idx.size());

    TrainResult result;
    result.model = build(config);
    result.history.n_train = n_train;
    result.history.n_val = n_val;

    AutoencoderModel best_model = result.model;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    AdamState adam(result.model);
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Pcg32 epoch_rng(config.seed, static_cast<std::uint64_t>(epoch) + 1);
        std::vector<std::size_t> shuffled = train_idx;
        epoch_rng.shuffle(shuffled);

        double epoch_loss = 0.0;
        bool finite = true;
        for (std::size_t start = 0; start < shuffled.size(); start += batch) {
            const std::size_t end = std::min(start + batch, shuffled.size());
            const Eigen::MatrixXd batch_x = gather_rows(x.values, shuffled, start, end);
            ForwardTrace trace = forward_train(result.model, batch_x, &epoch_rng);
            const double loss = mse_per_entry(batch_x, trace.post.back());
            if (!std::isfinite(loss)) {
                finite = false;
                break;
            }
            epoch_loss += loss * static_cast<double>(end - start);
            Gradients grads = backward(result.model, batch_x, trace);
            adam_step(result.model, adam, grads, config.learning_rate);
        }
        if (!finite) {
            result.history.aborted_nonfinite = true;
            result.history.stopped_epoch = epoch;
            break;
        }

        result.history.train_mse.push_back(epoch_loss / static_cast<double>(n_train));
        result.history.val_mse.push_back(
            mse_per_entry(val_x, result.model.forward_eval(val_x)));
        result.history.stopped_epoch = epoch;

        if (result.history.val_mse.back() < best_val) {
            best_val = result.history.val_mse.back();
            best_epoch = epoch;
            best_model = result.model;
        }
        if (epoch - best_epoch >= config.patience) break;
    }

    result.model = std::move(best_model);
    result.history.best_epoch = best_epoch;
    result.history.best_val_mse = best_val;
    return result;
}

LatentMatrix encode(const AutoencoderModel& model, const ScaledMatrix& x) {
    if (x.values.cols() != model.config.input_dim) {
        throw Error(ErrorCode::ShapeMismatch,
                    "matrix has " + std::to_string(x.values.cols()) + " genes, model expects " +
                        std::to_string(model.config.input_dim));
    }
    LatentMatrix z;
    z.sample_ids = x.sample_ids;
    z.values = model.encode_eval(x.values);
    return z;
}

Eigen::MatrixXd reconstruct(const AutoencoderModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.config.input_dim) {
        throw Error(ErrorCode::ShapeMismatch, "reconstruct input width mismatch");
    }
    return model.forward_eval(x);
}

double gradient_check(const AutoencoderModel& model, const Eigen::MatrixXd& x_small) {
    if (x_small.cols() != model.config.input_dim) {
        throw Error(ErrorCode::ShapeMismatch, "gradient_check input width mismatch");
    }
    AutoencoderModel probe = model;
    const double lambda = probe.config.weight_decay;

    auto objective = [&]() {
        const Eigen::MatrixXd out = probe.forward_eval(x_small);
        double value = mse_per_entry(x_small, out);
        if (lambda > 0.0) {
            double ss = 0.0;
            for (const DenseLayer& layer : probe.layers) {
                ss += layer.weight.squaredNorm() + layer.bias.squaredNorm();
            }
            value += 0.5 * lambda * ss;
        }
        return value;
    };

    // analytic gradients, dropout off (no rng passed)
    ForwardTrace trace = forward_train(probe, x_small, nullptr);
    Gradients grads = backward(probe, x_small, trace);

    constexpr double kStep = 1e-5;
    double max_rel = 0.0;
    for (std::size_t li = 0; li < probe.layers.size(); ++li) {
        auto probe_param = [&](double* param, double analytic) {
            const double saved = *param;
            *param = saved + kStep;
            const double up = objective();
            *param = saved - kStep;
            const double down = objective();
            *param = saved;
            const double numeric = (up - down) / (2.0 * kStep);
            const double rel = std::fabs(analytic - numeric) /
                               std::max(1e-2, std::fabs(analytic) + std::fabs(numeric));
            max_rel = std::max(max_rel, rel);
        };
        DenseLayer& layer = probe.layers[li];
        for (Eigen::Index idx = 0; idx < layer.weight.size(); ++idx) {
            probe_param(layer.weight.data() + idx, grads.weight[li].data()[idx]);
        }
        for (Eigen::Index idx = 0; idx < layer.bias.size(); ++idx) {
            probe_param(layer.bias.data() + idx, grads.bias[li].data()[idx]);
        }
    }
    return max_rel;
}

namespace {

constexpr char kMagic[4] = {'R', 'S', 'A', 'E'};
constexpr std::uint32_t kVersion = 1;

// checkpoint payload is raw little-endian IEEE doubles
static_assert(std::endian::native == std::endian::little,
              "model checkpoints are little-endian; add byte swapping for this target");

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void save_model(const AutoencoderModel& model, const std::string& path) {
    nlohmann::json header;
    header["input_dim"] = model.config.input_dim;
    header["latent_dim"] = model.config.latent_dim;
    header["dropout_p"] = model.config.dropout_p;
    header["learning_rate"] = model.config.learning_rate;
    header["weight_decay"] = model.config.weight_decay;
    header["batch_size"] = model.config.batch_size;
    header["val_fraction"] = model.config.val_fraction;
    header["patience"] = model.config.patience;
    header["max_epochs"] = model.config.max_epochs;
    header["seed"] = model.config.seed;
    nlohmann::json shapes = nlohmann::json::array();
    for (const DenseLayer& layer : model.layers) {
        shapes.push_back({{"in", layer.weight.rows()},
                          {"out", layer.weight.cols()},
                          {"relu", layer.relu},
                          {"dropout", layer.dropout}});
    }
    header["layers"] = shapes;
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    }
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, kVersion);
    const std::uint64_t header_len = header_text.size();
    write_raw(out, header_len);
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const DenseLayer& layer : model.layers) {
        out.write(reinterpret_cast<const char*>(layer.weight.data()),
                  static_cast<std::streamsize>(sizeof(double) * layer.weight.size()));
        out.write(reinterpret_cast<const char*>(layer.bias.data()),
                  static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "write failed for '" + path + "'");
    }
}

AutoencoderModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
    }
    char magic[4];
    in.read(magic, sizeof(magic));
    std::uint32_t version = 0;
    read_raw(in, version);
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || version != kVersion) {
        throw Error(ErrorCode::MalformedHeader, "'" + path + "' is not a model checkpoint");
    }
    std::uint64_t header_len = 0;
    read_raw(in, header_len);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
    if (in.fail() || header.is_discarded()) {
        throw Error(ErrorCode::MalformedHeader, "corrupt checkpoint header in '" + path + "'");
    }

    AutoencoderModel model;
    model.config.input_dim = header.at("input_dim").get<int>();
    model.config.latent_dim = header.at("latent_dim").get<int>();
    model.config.dropout_p = header.at("dropout_p").get<double>();
    model.config.learning_rate = header.at("learning_rate").get<double>();
    model.config.weight_decay = header.at("weight_decay").get<double>();
    model.config.batch_size = header.at("batch_size").get<int>();
    model.config.val_fraction = header.at("val_fraction").get<double>();
    model.config.patience = header.at("patience").get<int>();
    model.config.max_epochs = header.at("max_epochs").get<int>();
    model.config.seed = header.at("seed").get<std::uint64_t>();

    for (const auto& shape : header.at("layers")) {
        DenseLayer layer;
        layer.weight.resize(shape.at("in").get<Eigen::Index>(),
                            shape.at("out").get<Eigen::Index>());
        layer.bias.resize(shape.at("out").get<Eigen::Index>());
        layer.relu = shape.at("relu").get<bool>();
        layer.dropout = shape.at("dropout").get<bool>();
        in.read(reinterpret_cast<char*>(layer.weight.data()),
                static_cast<std::streamsize>(sizeof(double) * layer.weight.size()));
        in.read(reinterpret_cast<char*>(layer.bias.data()),
                static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
        model.layers.push_back(std::move(layer));
    }
    if (!in) {
        throw Error(ErrorCode::MalformedHeader, "truncated checkpoint '" + path + "'");
    }
    return model;
}

void save_history_csv(const TrainHistory& history, int input_dim, const std::string& path) {
    std::string text = "epoch,train_mse,val_mse,train_mse_per_sample,val_mse_per_sample\n";
    const double d = static_cast<double>(input_dim);
    for (std::size_t e = 0; e < history.train_mse.size(); ++e) {
        text += std::to_string(e + 1);
        text += ',';
        text += csv::format_double(history.train_mse[e]);
        text += ',';
        text += csv::format_double(history.val_mse[e]);
        text += ',';
        text += csv::format_double(history.train_mse[e] * d);
        text += ',';
        text += csv::format_double(history.val_mse[e] * d);
        text += '\n';
    }
    csv::write_file(path, text);
}

}  // namespace ae
}  // namespace raresub
