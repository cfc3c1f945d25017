#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idlab/dgp.hpp"
#include "idlab/linalg.hpp"
#include "idlab/net.hpp"
#include "idlab/train.hpp"

namespace idlab {

enum class FitMode { orthogonal_no_intercept, affine_with_intercept };

std::string to_string(FitMode mode);

/// Least-squares map Y ~ X L (+ 1 psi^T). Rows are samples; L is p x q.
struct ProbeFit {
  Matrix map;
  std::optional<RowVector> intercept;
  FitMode mode = FitMode::orthogonal_no_intercept;
  Vector singular_values;  // of `map`, descending
  bool rank_deficient = false;
  double design_condition = 0.0;

  Matrix predict(const Matrix& x) const;
};

/// Column-pivoted Householder QR solve; singular values from jacobi_svd.
ProbeFit fit_probe(const Matrix& x, const Matrix& y, FitMode mode);

/// Orthogonal Procrustes fit (diagnostic; headline numbers use fit_probe).
ProbeFit fit_procrustes(const Matrix& x, const Matrix& y);

struct R2Result {
  double value = 0.0;
  std::vector<int> excluded_dims;  // zero-variance targets
};

/// 1 - SS_res / SS_tot per target dimension, averaged uniformly. Invariant to
/// the order of the held-out rows.
R2Result r2_score(const ProbeFit& fit, const Matrix& x_test, const Matrix& y_test);

/// mean_k |sigma_k - 1| of the fitted map.
double singular_value_mae(const ProbeFit& fit);

struct PearsonResult {
  std::vector<double> r;  // NaN for excluded dimensions
  std::vector<int> excluded_dims;
  double mean() const;
};

PearsonResult pearson_per_dimension(const Matrix& pred, const Matrix& truth);

/// Class-mean of the (effective) head rows, one row per class.
Matrix class_mean_rows(const Model& model, const ClassFunction& class_function);

struct ClusterRecovery {
  ProbeFit fit;
  double r2 = 0.0;
};

/// Probes w -> v_c over classes with a deterministic leave-fraction-out split.
ClusterRecovery cluster_recovery(const Model& model, const Dataset& dataset, Task task, FitMode mode,
                                 double fit_fraction = 0.8, std::uint64_t split_seed = 0);

/// Mean over classes of the mean pairwise cosine among the class's rows
/// (at most 100 sampled pairs per class). Classes with one row are skipped.
double weight_collapse_score(const Model& model, const ClassFunction& class_function, std::uint64_t seed = 0);

/// Model class posterior for rows of x: class softmax (supervised) or
/// instance probabilities summed within each class (instance discrimination).
Matrix model_class_posterior(const Model& model, const Matrix& x, Task task, const ClassFunction& class_function);

struct PosteriorMatch {
  double mad = 0.0;  // mean over samples and classes of |p_model - p_true|
  double l1 = 0.0;   // mean over samples of sum_c |p_model - p_true|
};

/// Compares the model's class posterior with the analytic vMF posterior on
/// latents z (observations x = g(z)). Throws unsupported-oracle for non-vMF data.
PosteriorMatch posterior_match(const Model& model, const Dataset& dataset, Task task, const Matrix& z,
                               const Matrix& x);

struct ProbeSettings {
  int samples = 5000;
  double fit_fraction = 0.8;

  bool operator==(const ProbeSettings&) const = default;
};

struct LatentProbeMetrics {
  double r2_orth = 0.0;
  double r2_affine = 0.0;
  double mae_singular = 0.0;
  PearsonResult pearson;
};

/// Fit on (emb_fit -> z_fit), score on the test split.
LatentProbeMetrics latent_probe(const Matrix& emb_fit, const Matrix& z_fit, const Matrix& emb_test,
                                const Matrix& z_test);

struct EvalReport {
  double r2_latent_orth = 0.0;
  double r2_latent_affine = 0.0;
  double r2_cluster_orth = 0.0;
  double r2_cluster_affine = 0.0;
  double mae_singular_latent = 0.0;
  double mae_singular_cluster = 0.0;
  std::vector<double> pearson;
  double pearson_mean = 0.0;
  double weight_collapse = 0.0;   // NaN for supervised heads
  double beta = 0.0;
  double beta_kappa_ratio = 0.0;  // NaN for non-vMF conditionals
  double posterior_mad = 0.0;     // NaN for non-vMF conditionals
  double posterior_l1 = 0.0;
  double heldout_loss = 0.0;      // model cross-entropy on fresh samples
  double bayes_loss = 0.0;        // analytic posterior on the same samples; NaN for non-vMF
  bool diverse = false;
  std::vector<std::string> notes;

  /// Scalar metrics by name, in a fixed order (CSV columns).
  static const std::vector<std::string>& metric_names();
  std::vector<double> metric_values() const;
};

/// Full identifiability report on a fresh probe draw from the dataset's DGP.
EvalReport evaluate(const Model& model, const Dataset& dataset, Task task, const ProbeSettings& settings,
                    std::uint64_t seed);

}  // namespace idlab
