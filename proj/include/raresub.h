/*
 * raresub C API: rare-subtype discovery pipeline for expression matrices.
 *
 * The library is a thin C facade over the C++ core. Objects are opaque
 * handles; every fallible call either returns a handle (NULL on failure) or
 * an rsd_status. rsd_last_error() returns a thread-local message for the
 * most recent failure on the calling thread.
 */

#ifndef RARESUB_H
#define RARESUB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RSD_API __declspec(dllexport)
#else
#define RSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsd_status {
    RSD_OK = 0,
    RSD_ERR_INVALID_ARGUMENT = 1, /* bad parameters or config */
    RSD_ERR_IO = 2,               /* missing files, failed reads/writes */
    RSD_ERR_FORMAT = 3,           /* malformed CSV/JSON/checkpoint */
    RSD_ERR_DATA = 4,             /* domain violations in the data */
    RSD_ERR_NUMERIC = 5,          /* divergence or degenerate numerics */
    RSD_ERR_STATE = 6             /* shape mismatches, wrong call order */
} rsd_status;

typedef struct rsd_matrix rsd_matrix;         /* expression matrix + labels */
typedef struct rsd_scaled rsd_scaled;         /* selected + standardized matrix */
typedef struct rsd_model rsd_model;           /* trained autoencoder */
typedef struct rsd_latent rsd_latent;         /* latent codes */
typedef struct rsd_clustering rsd_clustering; /* k-means solution */

RSD_API const char* rsd_version(void);
RSD_API const char* rsd_last_error(void);

/* ---- expression matrices ---- */

/* Inner join of a data CSV (id + gene columns) and a labels CSV (id,Class). */
RSD_API rsd_matrix* rsd_matrix_load(const char* data_csv, const char* labels_csv);
RSD_API rsd_matrix* rsd_matrix_filter_class(const rsd_matrix* m, const char* class_name);
RSD_API rsd_status rsd_matrix_validate(const rsd_matrix* m, size_t* nan_count, size_t* inf_count,
                                       size_t* negative_count);
RSD_API size_t rsd_matrix_rows(const rsd_matrix* m);
RSD_API size_t rsd_matrix_cols(const rsd_matrix* m);
RSD_API rsd_status rsd_matrix_save(const rsd_matrix* m, const char* data_csv,
                                   const char* labels_csv);
RSD_API void rsd_matrix_free(rsd_matrix* m);

/* ---- preprocessing ---- */

RSD_API rsd_matrix* rsd_matrix_log1p(const rsd_matrix* m);
/* log-space input -> top_n variable genes -> per-gene z-scores */
RSD_API rsd_scaled* rsd_scale(const rsd_matrix* m, int top_n);
RSD_API size_t rsd_scaled_rows(const rsd_scaled* s);
RSD_API size_t rsd_scaled_cols(const rsd_scaled* s);
RSD_API void rsd_scaled_free(rsd_scaled* s);

/* ---- autoencoder ---- */

/* config_json may be NULL for defaults; recognised keys mirror the
 * "autoencoder" section of the pipeline config plus "seed". */
RSD_API rsd_model* rsd_train(const rsd_scaled* s, const char* config_json);
RSD_API rsd_status rsd_model_save(const rsd_model* m, const char* path);
RSD_API rsd_model* rsd_model_load(const char* path);
RSD_API void rsd_model_free(rsd_model* m);

RSD_API rsd_latent* rsd_encode(const rsd_model* m, const rsd_scaled* s);
RSD_API size_t rsd_latent_rows(const rsd_latent* z);
RSD_API size_t rsd_latent_cols(const rsd_latent* z);
/* row-major copy into caller storage of size rows*cols */
RSD_API rsd_status rsd_latent_values(const rsd_latent* z, double* out, size_t capacity);
RSD_API void rsd_latent_free(rsd_latent* z);

/* ---- clustering ---- */

RSD_API rsd_clustering* rsd_kmeans(const rsd_latent* z, int k, int n_init, uint64_t seed);
RSD_API rsd_status rsd_clustering_labels(const rsd_clustering* c, int* out, size_t capacity);
RSD_API rsd_status rsd_clustering_inertia(const rsd_clustering* c, double* out);
RSD_API rsd_status rsd_silhouette(const rsd_latent* z, const rsd_clustering* c, double* out);
RSD_API rsd_status rsd_davies_bouldin(const rsd_latent* z, const rsd_clustering* c, double* out);
RSD_API void rsd_clustering_free(rsd_clustering* c);

/* ---- batch pipelines ----
 *
 * Each runner consumes a pipeline config JSON document (see README), creates
 * a timestamped run directory under the configured output root, writes the
 * artifacts plus a run manifest, and copies the directory path into
 * run_dir_out (truncated if capacity is too small; pass 0 to skip). */
RSD_API rsd_status rsd_run_ingest(const char* config_json, char* run_dir_out, size_t capacity);
RSD_API rsd_status rsd_run_synth(const char* config_json, char* run_dir_out, size_t capacity);
RSD_API rsd_status rsd_run_pan(const char* config_json, char* run_dir_out, size_t capacity);
RSD_API rsd_status rsd_run_within(const char* config_json, char* run_dir_out, size_t capacity);
RSD_API rsd_status rsd_run_scan_k(const char* config_json, char* run_dir_out, size_t capacity);
RSD_API rsd_status rsd_run_stability(const char* config_json, char* run_dir_out, size_t capacity);
RSD_API rsd_status rsd_run_de(const char* config_json, char* run_dir_out, size_t capacity);
RSD_API rsd_status rsd_run_report(const char* config_json, char* run_dir_out, size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* RARESUB_H */
