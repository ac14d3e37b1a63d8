/* C interface to the graph outlier detection engine.
 *
 * All functions return a gode_status (GODE_OK on success); on failure
 * gode_last_error() describes the most recent error in the calling thread.
 * Objects returned through out-parameters are owned by the caller and must
 * be released with the matching gode_*_free function.
 */
#ifndef GODE_H
#define GODE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GODE_API __declspec(dllexport)
#else
#define GODE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gode_status {
    GODE_OK = 0,
    GODE_ERR_VALIDATION = 2, /* bad inputs, malformed bundles */
    GODE_ERR_TRIALS = 3,     /* benchmark finished with failed trials */
    GODE_ERR_IO = 4,
    GODE_ERR_INTERNAL = 5
} gode_status;

/* Attributed graph with optional ground-truth labels and provenance. */
typedef struct gode_graph gode_graph;
/* Per-node outlier scores (higher = more outlying). */
typedef struct gode_scores gode_scores;

GODE_API const char* gode_version(void);
/* Message for the last failing call on this thread; never NULL. */
GODE_API const char* gode_last_error(void);
/* Comma-separated list of available detector names. */
GODE_API const char* gode_detector_names(void);

GODE_API void gode_graph_free(gode_graph* g);
GODE_API void gode_scores_free(gode_scores* s);

typedef struct gode_gen_config {
    size_t num_classes;
    size_t nodes_per_class;
    double homophily;
    double avg_degree;
    size_t num_channels;
    uint64_t seed;
} gode_gen_config;

GODE_API gode_status gode_generate(const gode_gen_config* cfg, gode_graph** out);

/* type: "structural" | "contextual" | "both". The input graph is unchanged;
 * *out is a new graph with injected outliers and merged labels. */
GODE_API gode_status gode_inject(const gode_graph* g, const char* type, size_t m,
                                 size_t n, uint64_t seed, int allow_overlap,
                                 gode_graph** out);

GODE_API gode_status gode_bundle_save(const gode_graph* g, const char* dir);
GODE_API gode_status gode_bundle_load(const char* dir, gode_graph** out);

GODE_API size_t gode_graph_num_nodes(const gode_graph* g);
GODE_API size_t gode_graph_num_edges(const gode_graph* g);
GODE_API size_t gode_graph_num_features(const gode_graph* g);
GODE_API int gode_graph_is_labeled(const gode_graph* g);

/* params: "key=value,key=value" (e.g. "hid_dim=64,lr=0.05,alpha=auto");
 * NULL or "" for detector defaults. */
GODE_API gode_status gode_detect(const gode_graph* g, const char* algorithm,
                                 const char* params, uint64_t seed, gode_scores** out);

GODE_API size_t gode_scores_size(const gode_scores* s);
GODE_API gode_status gode_scores_get(const gode_scores* s, double* buffer, size_t len);

typedef struct gode_metrics {
    double auc;
    double ap;
    double recall_at_k;
    double auc_contextual; /* NaN when the type is absent */
    double auc_structural;
} gode_metrics;

/* Requires ground-truth labels on the graph. */
GODE_API gode_status gode_evaluate(const gode_graph* g, const gode_scores* s,
                                   gode_metrics* out);

typedef struct gode_bench_config {
    const char* const* dataset_dirs;
    size_t num_datasets;
    const char* algorithms; /* comma-separated or "all" */
    size_t trials;
    uint64_t master_seed;
    size_t workers;
    const char* results_csv;      /* required output path */
    const char* report_md;        /* optional markdown report path */
    int per_type;                 /* add per-type AUC tables to the report */
    const char* epoch_list;       /* optional "10,100,..." epoch study */
    const char* epoch_csv;        /* epoch study output path */
} gode_bench_config;

/* Returns GODE_ERR_TRIALS when some trials failed; results_csv is written
 * either way. */
GODE_API gode_status gode_benchmark(const gode_bench_config* cfg);

/* format: "md" | "csv"; out_path NULL writes to stdout. */
GODE_API gode_status gode_report(const char* results_csv, const char* format,
                                 int per_type, const char* out_path);

/* sizes: ascending comma-separated node counts. */
GODE_API gode_status gode_scale(const char* sizes, const char* algorithms,
                                uint64_t seed, size_t epochs, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* GODE_H */
