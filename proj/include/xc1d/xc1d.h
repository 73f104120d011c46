/* C interface to the xc1d keyword-spotting toolkit.
 *
 * Every fallible call returns an xc1d_status; on failure xc1d_last_error()
 * describes the problem (thread-local, valid until the next call on the same
 * thread). Strings returned through char** are owned by the caller and must
 * be released with xc1d_string_free. */
#ifndef XC1D_H
#define XC1D_H

#include <stddef.h>
#include <stdint.h>

#if defined(XC1D_BUILDING_LIBRARY)
#define XC1D_API __attribute__((visibility("default")))
#else
#define XC1D_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  XC1D_OK = 0,
  XC1D_ERR_CONFIG = 1,
  XC1D_ERR_DATA = 2,
  XC1D_ERR_NUMERIC = 3
} xc1d_status;

typedef struct xc1d_manifest xc1d_manifest;
typedef struct xc1d_checkpoint xc1d_checkpoint;

XC1D_API const char* xc1d_version(void);
XC1D_API const char* xc1d_last_error(void);
XC1D_API void xc1d_string_free(char* s);

/* 0 means one worker per hardware thread. Results do not depend on it. */
XC1D_API xc1d_status xc1d_set_threads(unsigned n);

/* ---- corpus manifests ---- */
XC1D_API xc1d_status xc1d_manifest_scan(const char* root, const char* version,
                                        xc1d_manifest** out);
XC1D_API xc1d_status xc1d_manifest_load(const char* path, xc1d_manifest** out);
XC1D_API xc1d_status xc1d_manifest_save(const xc1d_manifest* m, const char* path);
XC1D_API xc1d_status xc1d_manifest_summary(const xc1d_manifest* m, char** out);
XC1D_API void xc1d_manifest_free(xc1d_manifest* m);

/* Writes the original files plus `copies` distorted versions of every train
 * clip under out_dir (same word/file layout, copies named <stem>_augK.wav)
 * and returns a manifest of the new tree, also saved as out_dir/manifest.tsv.
 * dev and test clips are copied unchanged. */
XC1D_API xc1d_status xc1d_augment_manifest(const xc1d_manifest* m, const char* out_dir,
                                           unsigned copies, uint64_t seed,
                                           xc1d_manifest** out);

/* ---- training ---- */
typedef struct {
  size_t epochs;
  size_t batch_size;
  double lr;
  double weight_decay;
  double dropout;
  size_t patience;
  double lr_factor;
  const char* task;         /* words-all, commands-20, commands-10, left-right */
  uint64_t seed;
  const uint64_t* seeds;    /* multi-seed runs; NULL means 0..4 */
  size_t n_seeds;
  int augment;              /* nonzero: synthesise copies on the fly */
  unsigned augment_copies;
  uint64_t augment_seed;
  const char* model_overrides; /* "key=value" lines applied to the default
                                  architecture, or NULL */
} xc1d_train_options;

XC1D_API void xc1d_train_options_default(xc1d_train_options* opts);

/* Fully resolved model and training configuration as key=value text. */
XC1D_API xc1d_status xc1d_train_config_text(const xc1d_train_options* opts,
                                            const xc1d_manifest* m, char** out);

/* Writes checkpoint.xc1d, metrics.txt and per_class.tsv to out_dir.
 * metrics_out may be NULL. */
XC1D_API xc1d_status xc1d_train(const xc1d_manifest* m, const xc1d_train_options* opts,
                                const char* out_dir, char** metrics_out);

/* One run per seed under out_dir/seed-<s>/, plus out_dir/summary.txt. */
XC1D_API xc1d_status xc1d_multi_seed(const xc1d_manifest* m, const xc1d_train_options* opts,
                                     const char* out_dir, char** summary_out);

/* ---- checkpoints and inference ---- */
XC1D_API xc1d_status xc1d_checkpoint_load(const char* path, xc1d_checkpoint** out);
XC1D_API void xc1d_checkpoint_free(xc1d_checkpoint* ck);
XC1D_API xc1d_status xc1d_checkpoint_info(const xc1d_checkpoint* ck, char** out);
XC1D_API size_t xc1d_checkpoint_num_classes(const xc1d_checkpoint* ck);
/* Valid until the checkpoint is freed; NULL when out of range. */
XC1D_API const char* xc1d_checkpoint_class_name(const xc1d_checkpoint* ck, size_t index);

/* split: train, dev or test. per_class_out may be NULL. */
XC1D_API xc1d_status xc1d_evaluate(const xc1d_checkpoint* ck, const xc1d_manifest* m,
                                   const char* split, char** metrics_out,
                                   char** per_class_out);

/* probs must hold xc1d_checkpoint_num_classes(ck) values. */
XC1D_API xc1d_status xc1d_infer_file(const xc1d_checkpoint* ck, const char* wav_path,
                                     double* probs, size_t* top_class);

/* ---- analysis ---- */
typedef struct {
  uint64_t regular;           /* L*S*Cin*N */
  uint64_t separable;         /* L*S*Cin + L*Cin*N */
  uint64_t measured_regular;  /* counted inside the convolution kernels */
  uint64_t measured_separable;
  double ratio;               /* separable / regular */
} xc1d_opcount_result;

XC1D_API xc1d_status xc1d_opcount(uint64_t length, uint64_t kernel, uint64_t in_channels,
                                  uint64_t out_channels, int measure,
                                  xc1d_opcount_result* out);

XC1D_API xc1d_status xc1d_t_test(double mean_a, double std_a, double n_a, double mean_b,
                                 double std_b, double n_b, double* t, double* df, double* p);

#ifdef __cplusplus
}
#endif

#endif /* XC1D_H */
