#ifndef MAI_MAI_H
#define MAI_MAI_H

/* C API of the cycle-memory engine. All functions return a status code;
 * outputs are written through pointers. Returned strings are owned by the
 * caller and released with mai_string_free. The last failure message is
 * kept per thread and read through mai_last_error. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mai_status {
    MAI_OK = 0,
    MAI_ERR_INVALID_ARGUMENT = 1,
    MAI_ERR_PARSE = 2,
    MAI_ERR_CONFIG = 3,
    MAI_ERR_DIMENSION = 4,
    MAI_ERR_IO = 5,
    MAI_ERR_RUNTIME = 6
} mai_status;

const char* mai_version(void);
/* Message of the most recent failure on this thread; empty when none. */
const char* mai_last_error(void);
void mai_string_free(char* s);

/* ---- simplicial complexes and homology -------------------------------- */

typedef struct mai_complex mai_complex;

/* Parse the chain text format ("k: v0 v1 ...; v0 v1 ..." per line); the
 * complex is the face closure of every listed simplex. */
mai_status mai_complex_parse(const char* text, mai_complex** out);
int mai_complex_max_dim(const mai_complex* k);
mai_status mai_complex_betti(const mai_complex* k, int dim, int* out_betti);
void mai_complex_free(mai_complex* k);

/* ---- persistence diagrams --------------------------------------------- */

typedef struct mai_diagram mai_diagram;

/* Vietoris-Rips diagram of a flat row-major point array. */
mai_status mai_diagram_from_points(const double* coords, size_t num_points,
                                   size_t point_dim, double max_scale, int max_dim,
                                   mai_diagram** out);
size_t mai_diagram_num_bars(const mai_diagram* d);
size_t mai_diagram_num_bars_in_dim(const mai_diagram* d, int dim);
/* CSV rows dim,birth,death,lifetime with "inf" for unbounded deaths.
 * with_representatives != 0 appends the representative cycles in the
 * chain text format as a final column. */
mai_status mai_diagram_to_csv(const mai_diagram* d, char** out_csv);
mai_status mai_diagram_to_csv_ex(const mai_diagram* d, int with_representatives,
                                 char** out_csv);
mai_status mai_diagram_bottleneck(const mai_diagram* a, const mai_diagram* b, int dim,
                                  double* out_distance);
void mai_diagram_free(mai_diagram* d);

/* ---- episode generation ------------------------------------------------ */

/* spec_json: {"task":"t1"|"t2"|"t3","shape":...,"steps":...,"jitter":...,
 *             "permute":bool,"seed":N}
 * out_json: {"episodes":[{header fields..., "csv": "..."}]} */
mai_status mai_episode_generate(const char* spec_json, char** out_json);

/* ---- experiments -------------------------------------------------------- */

/* Run a full experiment from a config document. Writes run artifacts into
 * the config's output directory and returns the verdict array as JSON. */
mai_status mai_experiment_run(const char* config_json, char** out_verdicts_json);

/* Run the paired baseline/ablation arms; returns the comparison report. */
mai_status mai_ablation_run(const char* config_json, const char* ablation_id,
                            char** out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* MAI_MAI_H */
