#include "raresub.h"

#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "raresub/autoencoder.hpp"
#include "raresub/clustering.hpp"
#include "raresub/error.hpp"
#include "raresub/ingest.hpp"
#include "raresub/pipeline.hpp"
#include "raresub/preprocess.hpp"

using raresub::Error;
using raresub::ErrorCode;

struct rsd_matrix {
    raresub::ExpressionMatrix m;
};
struct rsd_scaled {
    raresub::ScaledMatrix s;
};
struct rsd_model {
    raresub::AutoencoderModel m;
};
struct rsd_latent {
    raresub::LatentMatrix z;
};
struct rsd_clustering {
    raresub::ClusteringSolution c;
};

namespace {

thread_local std::string g_last_error;

rsd_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidDims:
        case ErrorCode::InfeasibleSpec:
            return RSD_ERR_INVALID_ARGUMENT;
        case ErrorCode::MissingFile:
        case ErrorCode::IoFailure:
            return RSD_ERR_IO;
        case ErrorCode::MalformedHeader:
        case ErrorCode::NonNumericCell:
        case ErrorCode::MalformedJson:
            return RSD_ERR_FORMAT;
        case ErrorCode::DuplicateSampleId:
        case ErrorCode::DuplicateGeneId:
        case ErrorCode::EmptyJoin:
        case ErrorCode::UnknownClass:
        case ErrorCode::NegativeInput:
        case ErrorCode::NoVariableGenes:
        case ErrorCode::ZeroVarianceColumn:
        case ErrorCode::TooFewSamples:
        case ErrorCode::ClusterTooSmall:
        case ErrorCode::MissingUpstream:
            return RSD_ERR_DATA;
        case ErrorCode::NonFiniteLoss:
        case ErrorCode::NonFinite:
        case ErrorCode::DegenerateData:
        case ErrorCode::SingleCluster:
        case ErrorCode::CoincidentCentroids:
        case ErrorCode::ZeroMarginal:
        case ErrorCode::OutOfRangeP:
            return RSD_ERR_NUMERIC;
        case ErrorCode::ShapeMismatch:
        case ErrorCode::LengthMismatch:
        case ErrorCode::KTooLarge:
        case ErrorCode::NonSquare:
        case ErrorCode::LabelOutOfRange:
            return RSD_ERR_STATE;
    }
    return RSD_ERR_STATE;
}

// Runs `fn`, translating exceptions into a status + thread-local message.
template <typename Fn>
rsd_status guarded(Fn&& fn) {
    try {
        fn();
        return RSD_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return RSD_ERR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RSD_ERR_STATE;
    }
}

template <typename Handle, typename Fn>
Handle* guarded_new(Fn&& fn) {
    Handle* out = nullptr;
    const rsd_status status = guarded([&] { out = new Handle{fn()}; });
    return status == RSD_OK ? out : nullptr;
}

rsd_status require(bool condition, const char* message) {
    if (condition) return RSD_OK;
    g_last_error = message;
    return RSD_ERR_INVALID_ARGUMENT;
}

void copy_run_dir(const std::string& dir, char* out, size_t capacity) {
    if (!out || capacity == 0) return;
    const size_t n = std::min(capacity - 1, dir.size());
    std::memcpy(out, dir.data(), n);
    out[n] = '\0';
}

raresub::AeConfig ae_config_from_json(const char* config_json, int input_dim) {
    raresub::AeConfig cfg;
    cfg.input_dim = input_dim;
    if (!config_json || !*config_json) return cfg;
    nlohmann::json j = nlohmann::json::parse(config_json, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::MalformedJson, "train config is not valid JSON");
    }
    if (j.contains("latent_dim")) cfg.latent_dim = j["latent_dim"].get<int>();
    if (j.contains("dropout_p")) cfg.dropout_p = j["dropout_p"].get<double>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("weight_decay")) cfg.weight_decay = j["weight_decay"].get<double>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("val_fraction")) cfg.val_fraction = j["val_fraction"].get<double>();
    if (j.contains("patience")) cfg.patience = j["patience"].get<int>();
    if (j.contains("max_epochs")) cfg.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    return cfg;
}

using PipelineRunner = std::string (*)(const raresub::Config&);

rsd_status run_pipeline(PipelineRunner runner, const char* config_json, char* run_dir_out,
                        size_t capacity) {
    return guarded([&] {
        const raresub::Config cfg =
            raresub::Config::from_json_text(config_json ? config_json : "");
        const std::string dir = runner(cfg);
        copy_run_dir(dir, run_dir_out, capacity);
    });
}

}  // namespace

extern "C" {

const char* rsd_version(void) { return raresub::kToolVersion; }

const char* rsd_last_error(void) { return g_last_error.c_str(); }

rsd_matrix* rsd_matrix_load(const char* data_csv, const char* labels_csv) {
    if (!data_csv || !labels_csv) {
        g_last_error = "data_csv and labels_csv must not be NULL";
        return nullptr;
    }
    return guarded_new<rsd_matrix>(
        [&] { return raresub::ingest::load_matrix(data_csv, labels_csv); });
}

rsd_matrix* rsd_matrix_filter_class(const rsd_matrix* m, const char* class_name) {
    if (!m || !class_name) {
        g_last_error = "matrix and class_name must not be NULL";
        return nullptr;
    }
    return guarded_new<rsd_matrix>(
        [&] { return raresub::ingest::filter_class(m->m, class_name); });
}

rsd_status rsd_matrix_validate(const rsd_matrix* m, size_t* nan_count, size_t* inf_count,
                               size_t* negative_count) {
    if (rsd_status s = require(m != nullptr, "matrix is NULL"); s != RSD_OK) return s;
    const raresub::ValidationSummary summary = raresub::ingest::validate(m->m);
    if (nan_count) *nan_count = summary.nan_count;
    if (inf_count) *inf_count = summary.inf_count;
    if (negative_count) *negative_count = summary.negative_count;
    return RSD_OK;
}

size_t rsd_matrix_rows(const rsd_matrix* m) { return m ? m->m.n_samples() : 0; }
size_t rsd_matrix_cols(const rsd_matrix* m) { return m ? m->m.n_genes() : 0; }

rsd_status rsd_matrix_save(const rsd_matrix* m, const char* data_csv, const char* labels_csv) {
    if (rsd_status s = require(m && data_csv && labels_csv, "NULL argument"); s != RSD_OK) {
        return s;
    }
    return guarded([&] { raresub::ingest::save_matrix(m->m, data_csv, labels_csv); });
}

void rsd_matrix_free(rsd_matrix* m) { delete m; }

rsd_matrix* rsd_matrix_log1p(const rsd_matrix* m) {
    if (!m) {
        g_last_error = "matrix is NULL";
        return nullptr;
    }
    return guarded_new<rsd_matrix>([&] { return raresub::prep::log1p_transform(m->m); });
}

rsd_scaled* rsd_scale(const rsd_matrix* m, int top_n) {
    if (!m) {
        g_last_error = "matrix is NULL";
        return nullptr;
    }
    return guarded_new<rsd_scaled>([&] {
        return raresub::prep::standardize(
            raresub::prep::select_hvg(m->m, static_cast<std::size_t>(top_n)));
    });
}

size_t rsd_scaled_rows(const rsd_scaled* s) { return s ? s->s.sample_ids.size() : 0; }
size_t rsd_scaled_cols(const rsd_scaled* s) { return s ? s->s.gene_ids.size() : 0; }
void rsd_scaled_free(rsd_scaled* s) { delete s; }

rsd_model* rsd_train(const rsd_scaled* s, const char* config_json) {
    if (!s) {
        g_last_error = "scaled matrix is NULL";
        return nullptr;
    }
    return guarded_new<rsd_model>([&] {
        const raresub::AeConfig cfg =
            ae_config_from_json(config_json, static_cast<int>(s->s.gene_ids.size()));
        raresub::TrainResult result = raresub::ae::train(s->s, cfg);
        if (result.history.aborted_nonfinite) {
            throw Error(ErrorCode::NonFiniteLoss, "training diverged");
        }
        return std::move(result.model);
    });
}

rsd_status rsd_model_save(const rsd_model* m, const char* path) {
    if (rsd_status s = require(m && path, "NULL argument"); s != RSD_OK) return s;
    return guarded([&] { raresub::ae::save_model(m->m, path); });
}

rsd_model* rsd_model_load(const char* path) {
    if (!path) {
        g_last_error = "path is NULL";
        return nullptr;
    }
    return guarded_new<rsd_model>([&] { return raresub::ae::load_model(path); });
}

void rsd_model_free(rsd_model* m) { delete m; }

rsd_latent* rsd_encode(const rsd_model* m, const rsd_scaled* s) {
    if (!m || !s) {
        g_last_error = "model and scaled matrix must not be NULL";
        return nullptr;
    }
    return guarded_new<rsd_latent>([&] { return raresub::ae::encode(m->m, s->s); });
}

size_t rsd_latent_rows(const rsd_latent* z) { return z ? z->z.sample_ids.size() : 0; }
size_t rsd_latent_cols(const rsd_latent* z) {
    return z ? static_cast<size_t>(z->z.values.cols()) : 0;
}

rsd_status rsd_latent_values(const rsd_latent* z, double* out, size_t capacity) {
    if (rsd_status s = require(z && out, "NULL argument"); s != RSD_OK) return s;
    const size_t needed = static_cast<size_t>(z->z.values.size());
    if (capacity < needed) {
        g_last_error = "buffer holds " + std::to_string(capacity) + " doubles, need " +
                       std::to_string(needed);
        return RSD_ERR_INVALID_ARGUMENT;
    }
    for (Eigen::Index i = 0; i < z->z.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < z->z.values.cols(); ++j) {
            out[static_cast<size_t>(i) * static_cast<size_t>(z->z.values.cols()) +
                static_cast<size_t>(j)] = z->z.values(i, j);
        }
    }
    return RSD_OK;
}

void rsd_latent_free(rsd_latent* z) { delete z; }

rsd_clustering* rsd_kmeans(const rsd_latent* z, int k, int n_init, uint64_t seed) {
    if (!z) {
        g_last_error = "latent matrix is NULL";
        return nullptr;
    }
    return guarded_new<rsd_clustering>(
        [&] { return raresub::cluster::kmeans(z->z, k, n_init, seed); });
}

rsd_status rsd_clustering_labels(const rsd_clustering* c, int* out, size_t capacity) {
    if (rsd_status s = require(c && out, "NULL argument"); s != RSD_OK) return s;
    if (capacity < c->c.labels.size()) {
        g_last_error = "buffer too small for labels";
        return RSD_ERR_INVALID_ARGUMENT;
    }
    std::memcpy(out, c->c.labels.data(), c->c.labels.size() * sizeof(int));
    return RSD_OK;
}

rsd_status rsd_clustering_inertia(const rsd_clustering* c, double* out) {
    if (rsd_status s = require(c && out, "NULL argument"); s != RSD_OK) return s;
    *out = c->c.inertia;
    return RSD_OK;
}

rsd_status rsd_silhouette(const rsd_latent* z, const rsd_clustering* c, double* out) {
    if (rsd_status s = require(z && c && out, "NULL argument"); s != RSD_OK) return s;
    return guarded([&] { *out = raresub::cluster::silhouette(z->z, c->c.labels); });
}

rsd_status rsd_davies_bouldin(const rsd_latent* z, const rsd_clustering* c, double* out) {
    if (rsd_status s = require(z && c && out, "NULL argument"); s != RSD_OK) return s;
    return guarded([&] { *out = raresub::cluster::davies_bouldin(z->z, c->c.labels); });
}

void rsd_clustering_free(rsd_clustering* c) { delete c; }

rsd_status rsd_run_ingest(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_ingest, config_json, run_dir_out, capacity);
}
rsd_status rsd_run_synth(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_synth, config_json, run_dir_out, capacity);
}
rsd_status rsd_run_pan(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_pan, config_json, run_dir_out, capacity);
}
rsd_status rsd_run_within(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_within, config_json, run_dir_out, capacity);
}
rsd_status rsd_run_scan_k(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_scan_k, config_json, run_dir_out, capacity);
}
rsd_status rsd_run_stability(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_stability, config_json, run_dir_out, capacity);
}
rsd_status rsd_run_de(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_de, config_json, run_dir_out, capacity);
}
rsd_status rsd_run_report(const char* config_json, char* run_dir_out, size_t capacity) {
    return run_pipeline(&raresub::pipeline::run_report, config_json, run_dir_out, capacity);
}

}  // extern "C"
