#include "idlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "idlab/errors.hpp"

namespace idlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix with_intercept_column(const Matrix& x) {
  Matrix design(x.rows(), x.cols() + 1);
  design.leftCols(x.cols()) = x;
  design.col(x.cols()).setOnes();
  return design;
}

double column_mean(const Matrix& m, Eigen::Index col) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, col);
  return order_free_sum(std::move(v)) / static_cast<double>(m.rows());
}

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

std::string to_string(FitMode mode) {
  return mode == FitMode::orthogonal_no_intercept ? "orthogonal_no_intercept" : "affine_with_intercept";
}

Matrix ProbeFit::predict(const Matrix& x) const {
  Matrix y = x * map;
  if (intercept) y.rowwise() += *intercept;
  return y;
}

ProbeFit fit_probe(const Matrix& x, const Matrix& y, FitMode mode) {
  if (x.rows() != y.rows()) throw Error(Errc::invalid_input, "probe X and Y are not row-aligned");
  const bool affine = mode == FitMode::affine_with_intercept;
  Eigen::MatrixXd design = affine ? with_intercept_column(x) : x;
  if (design.rows() <= design.cols())
    throw Error(Errc::invalid_input, "probe needs more rows than design columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  Eigen::MatrixXd coef = qr.solve(Eigen::MatrixXd(y));

  ProbeFit fit;
  fit.mode = mode;
  fit.rank_deficient = qr.rank() < design.cols();
  Eigen::VectorXd rdiag = qr.matrixQR().diagonal().cwiseAbs();
  fit.design_condition = rdiag.minCoeff() > 0.0 ? rdiag.maxCoeff() / rdiag.minCoeff()
                                                : std::numeric_limits<double>::infinity();
  fit.map = coef.topRows(x.cols());
  if (affine) fit.intercept = RowVector(coef.row(x.cols()));
  fit.singular_values = singular_values(fit.map);
  return fit;
}

ProbeFit fit_procrustes(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw Error(Errc::invalid_input, "Procrustes needs equally shaped X and Y");
  Svd svd = jacobi_svd(Matrix(x.transpose() * y));
  ProbeFit fit;
  fit.map = svd.u * svd.v.transpose();
  fit.singular_values = singular_values(fit.map);
  return fit;
}

R2Result r2_score(const ProbeFit& fit, const Matrix& x_test, const Matrix& y_test) {
  Matrix pred = fit.predict(x_test);
  R2Result out;
  double total = 0.0;
  int used = 0;
  const auto n = static_cast<std::size_t>(y_test.rows());
  for (Eigen::Index j = 0; j < y_test.cols(); ++j) {
    const double mean = column_mean(y_test, j);
    std::vector<double> res(n);
    std::vector<double> tot(n);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = static_cast<Eigen::Index>(r);
      double e = y_test(row, j) - pred(row, j);
      double c = y_test(row, j) - mean;
      res[r] = e * e;
      tot[r] = c * c;
    }
    const double ss_tot = order_free_sum(std::move(tot));
    if (!(ss_tot > 1e-300)) {
      out.excluded_dims.push_back(static_cast<int>(j));
      continue;
    }
    total += 1.0 - order_free_sum(std::move(res)) / ss_tot;
    ++used;
  }
  out.value = used == 0 ? kNaN : total / used;
  return out;
}

double singular_value_mae(const ProbeFit& fit) {
  const Vector& s = fit.singular_values;
  return (s.array() - 1.0).abs().mean();
}

double PearsonResult::mean() const {
  double sum = 0.0;
  int used = 0;
  for (double v : r)
    if (!std::isnan(v)) {
      sum += v;
      ++used;
    }
  return used == 0 ? kNaN : sum / used;
}

PearsonResult pearson_per_dimension(const Matrix& pred, const Matrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw Error(Errc::invalid_input, "pearson inputs differ in shape");
  PearsonResult out;
  const auto n = static_cast<std::size_t>(pred.rows());
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    const double mp = column_mean(pred, j);
    const double mt = column_mean(truth, j);
    std::vector<double> sxy(n), sxx(n), syy(n);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = static_cast<Eigen::Index>(r);
      double a = pred(row, j) - mp;
      double b = truth(row, j) - mt;
      sxy[r] = a * b;
      sxx[r] = a * a;
      syy[r] = b * b;
    }
    double vx = order_free_sum(std::move(sxx));
    double vy = order_free_sum(std::move(syy));
    if (!(vx > 1e-300) || !(vy > 1e-300)) {
      out.r.push_back(kNaN);
      out.excluded_dims.push_back(static_cast<int>(j));
      continue;
    }
    out.r.push_back(order_free_sum(std::move(sxy)) / std::sqrt(vx * vy));
  }
  return out;
}

Matrix class_mean_rows(const Model& model, const ClassFunction& class_function) {
  if (model.head_rows() != class_function.num_instances())
    throw Error(Errc::invalid_input, "head rows do not match the class function");
  Matrix rows = model.effective_head();
  Matrix means = Matrix::Zero(class_function.num_classes, rows.cols());
  std::vector<int> counts(static_cast<std::size_t>(class_function.num_classes), 0);
  for (int i = 0; i < class_function.num_instances(); ++i) {
    Label c = class_function(i);
    means.row(c) += rows.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < class_function.num_classes; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0) means.row(c) /= counts[static_cast<std::size_t>(c)];
  return means;
}

ClusterRecovery cluster_recovery(const Model& model, const Dataset& dataset, Task task, FitMode mode,
                                 double fit_fraction, std::uint64_t split_seed) {
  Matrix rows = task == Task::supervised ? model.effective_head() : class_mean_rows(model, dataset.class_function);
  Matrix truth = dataset.clusters.matrix();
  if (rows.rows() != truth.rows()) throw Error(Errc::invalid_input, "one head row per class expected");
  const int classes = static_cast<int>(rows.rows());
  std::vector<int> order(static_cast<std::size_t>(classes));
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(split_seed);
  rng.shuffle(order.begin(), order.end());
  int n_fit = static_cast<int>(std::lround(fit_fraction * classes));
  n_fit = std::clamp(n_fit, 1, classes - 1);
  std::vector<int> fit_idx(order.begin(), order.begin() + n_fit);
  std::vector<int> test_idx(order.begin() + n_fit, order.end());
  std::sort(fit_idx.begin(), fit_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  ClusterRecovery out;
  out.fit = fit_probe(gather_rows(rows, fit_idx), gather_rows(truth, fit_idx), mode);
  out.r2 = r2_score(out.fit, gather_rows(rows, test_idx), gather_rows(truth, test_idx)).value;
  return out;
}

double weight_collapse_score(const Model& model, const ClassFunction& class_function, std::uint64_t seed) {
  if (model.head_rows() != class_function.num_instances())
    throw Error(Errc::invalid_input, "head rows do not match the class function");
  constexpr std::size_t kMaxPairs = 100;
  Matrix unit = model.head;
  for (Eigen::Index r = 0; r < unit.rows(); ++r) unit.row(r) /= unit.row(r).norm();
  RngStream rng(seed);
  double total = 0.0;
  int classes_used = 0;
  for (const auto& members : class_function.members()) {
    const std::size_t m = members.size();
    if (m < 2) continue;
    double sum = 0.0;
    std::size_t pairs = 0;
    if (m * (m - 1) / 2 <= kMaxPairs) {
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b, ++pairs) sum += unit.row(members[a]).dot(unit.row(members[b]));
    } else {
      for (; pairs < kMaxPairs; ++pairs) {
        std::size_t a = rng.below(m);
        std::size_t b = rng.below(m - 1);
        if (b >= a) ++b;
        sum += unit.row(members[a]).dot(unit.row(members[b]));
      }
    }
    total += sum / static_cast<double>(pairs);
    ++classes_used;
  }
  return classes_used == 0 ? kNaN : total / classes_used;
}

Matrix model_class_posterior(const Model& model, const Matrix& x, Task task, const ClassFunction& class_function) {
  Matrix scores = logits(model, encode(model, x));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    double m = scores.row(r).maxCoeff();
    scores.row(r) = (scores.row(r).array() - m).exp();
    scores.row(r) /= scores.row(r).sum();
  }
  if (task == Task::supervised) return scores;
  Matrix classes = Matrix::Zero(scores.rows(), class_function.num_classes);
  for (int i = 0; i < class_function.num_instances(); ++i) classes.col(class_function(i)) += scores.col(i);
  return classes;
}

PosteriorMatch posterior_match(const Model& model, const Dataset& dataset, Task task, const Matrix& z,
                               const Matrix& x) {
  if (dataset.spec.conditional.family != ConditionalFamily::vmf)
    throw Error(Errc::unsupported_oracle, "analytic posterior needs a vMF conditional");
  Matrix truth = vmf_class_posterior(dataset.clusters, dataset.spec.conditional.kappa, z);
  Matrix pred = model_class_posterior(model, x, task, dataset.class_function);
  std::vector<double> row_l1(static_cast<std::size_t>(truth.rows()));
  for (Eigen::Index r = 0; r < truth.rows(); ++r)
    row_l1[static_cast<std::size_t>(r)] = (truth.row(r) - pred.row(r)).cwiseAbs().sum();
  PosteriorMatch out;
  out.l1 = order_free_sum(std::move(row_l1)) / static_cast<double>(truth.rows());
  out.mad = out.l1 / static_cast<double>(truth.cols());
  return out;
}

LatentProbeMetrics latent_probe(const Matrix& emb_fit, const Matrix& z_fit, const Matrix& emb_test,
                                const Matrix& z_test) {
  LatentProbeMetrics out;
  ProbeFit orth = fit_probe(emb_fit, z_fit, FitMode::orthogonal_no_intercept);
  out.r2_orth = r2_score(orth, emb_test, z_test).value;
  out.mae_singular = singular_value_mae(orth);
  ProbeFit affine = fit_probe(emb_fit, z_fit, FitMode::affine_with_intercept);
  out.r2_affine = r2_score(affine, emb_test, z_test).value;
  out.pearson = pearson_per_dimension(affine.predict(emb_test), z_test);
  return out;
}

const std::vector<std::string>& EvalReport::metric_names() {
  static const std::vector<std::string> names = {
      "r2_latent_orth",   "r2_latent_affine", "r2_cluster_orth", "r2_cluster_affine", "mae_singular_latent",
      "mae_singular_cluster", "pearson_mean", "weight_collapse", "beta",             "beta_kappa_ratio",
      "posterior_mad",    "posterior_l1",     "heldout_loss",    "bayes_loss",        "diverse",
  };
  return names;
}

std::vector<double> EvalReport::metric_values() const {
  return {r2_latent_orth, r2_latent_affine, r2_cluster_orth, r2_cluster_affine, mae_singular_latent,
          mae_singular_cluster, pearson_mean, weight_collapse, beta, beta_kappa_ratio,
          posterior_mad, posterior_l1, heldout_loss, bayes_loss, diverse ? 1.0 : 0.0};
}

EvalReport evaluate(const Model& model, const Dataset& dataset, Task task, const ProbeSettings& settings,
                    std::uint64_t seed) {
  if (settings.samples < 10) throw Error(Errc::invalid_config, "probe needs at least 10 samples");
  if (!(settings.fit_fraction > 0.0 && settings.fit_fraction < 1.0))
    throw Error(Errc::invalid_config, "probe fit fraction must lie in (0, 1)");
  const RngStream root(seed);
  RngStream label_rng = root.split(1);

  // Fresh draw from the DGP: uniform instance label, its class, a latent, x = g(z).
  const auto n = static_cast<std::size_t>(settings.samples);
  std::vector<Label> instances(n), classes(n);
  for (std::size_t k = 0; k < n; ++k) {
    instances[k] = static_cast<Label>(label_rng.below(static_cast<std::uint64_t>(dataset.class_function.num_instances())));
    classes[k] = dataset.class_function(instances[k]);
  }
  Matrix z = sample_latents(dataset.clusters, dataset.spec.conditional, classes, root.split(2));
  Matrix x = dataset.generator.apply(z);
  Matrix emb = encode(model, x);

  const auto n_fit = static_cast<Eigen::Index>(std::lround(settings.fit_fraction * settings.samples));
  const Eigen::Index n_test = static_cast<Eigen::Index>(n) - n_fit;

  EvalReport rep;
  LatentProbeMetrics latent = latent_probe(emb.topRows(n_fit), z.topRows(n_fit), emb.bottomRows(n_test),
                                           z.bottomRows(n_test));
  rep.r2_latent_orth = latent.r2_orth;
  rep.r2_latent_affine = latent.r2_affine;
  rep.mae_singular_latent = latent.mae_singular;
  rep.pearson = latent.pearson.r;
  rep.pearson_mean = latent.pearson.mean();

  const std::uint64_t split_seed = root.split(3).next_u64();
  ClusterRecovery orth = cluster_recovery(model, dataset, task, FitMode::orthogonal_no_intercept,
                                          settings.fit_fraction, split_seed);
  ClusterRecovery affine = cluster_recovery(model, dataset, task, FitMode::affine_with_intercept,
                                            settings.fit_fraction, split_seed);
  rep.r2_cluster_orth = orth.r2;
  rep.r2_cluster_affine = affine.r2;
  rep.mae_singular_cluster = singular_value_mae(orth.fit);
  if (orth.fit.rank_deficient || affine.fit.rank_deficient) rep.notes.push_back("cluster probe rank deficient");

  rep.weight_collapse = task == Task::instance_discrimination
                            ? weight_collapse_score(model, dataset.class_function, root.split(4).next_u64())
                            : kNaN;
  rep.beta = model.beta();
  rep.diverse = is_diverse(dataset.clusters.vectors);

  std::vector<Label> test_labels(task == Task::supervised ? classes.begin() + n_fit : instances.begin() + n_fit,
                                 task == Task::supervised ? classes.end() : instances.end());
  Matrix x_test = x.bottomRows(n_test);
  Matrix z_test = z.bottomRows(n_test);
  rep.heldout_loss = order_free_sum(row_cross_entropy(logits(model, emb.bottomRows(n_test)), test_labels)) /
                     static_cast<double>(n_test);
  if (dataset.spec.conditional.family == ConditionalFamily::vmf) {
    const double kappa = dataset.spec.conditional.kappa;
    double mean_norm = model.effective_head().rowwise().norm().mean();
    rep.beta_kappa_ratio = kappa > 0.0 ? rep.beta * mean_norm / kappa : kNaN;
    PosteriorMatch pm = posterior_match(model, dataset, task, z_test, x_test);
    rep.posterior_mad = pm.mad;
    rep.posterior_l1 = pm.l1;
    rep.bayes_loss = bayes_optimal_loss(dataset, task, z_test, test_labels);
  } else {
    rep.beta_kappa_ratio = kNaN;
    rep.posterior_mad = kNaN;
    rep.posterior_l1 = kNaN;
    rep.bayes_loss = kNaN;
    rep.notes.push_back("non-vMF conditional: posterior oracle unavailable");
  }
  return rep;
}

}  // namespace idlab
