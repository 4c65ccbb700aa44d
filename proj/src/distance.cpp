#include "ccg/distance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccg/error.hpp"
#include "ccg/simd.hpp"

namespace ccg {

DistanceReport wasserstein_distance(const GroupProfile& p1, const GroupProfile& pg) {
  if (p1.J != pg.J || p1.quantiles.size() != pg.quantiles.size() || p1.quantiles.empty())
    throw Error(ErrorKind::GridMismatch, "profiles were built on different quantile grids",
                {{"J_1", p1.J}, {"J_g", pg.J}});
  DistanceReport r;
  r.group = pg.group;
  r.metric = Metric::wasserstein;
  r.numerator = simd::sum_sq_diff(p1.quantiles, pg.quantiles) / static_cast<double>(p1.quantiles.size());
  r.scale = std::sqrt((p1.var_last + pg.var_last) / 2.0);
  if (r.scale > 0.0) {
    r.d_hat = r.numerator / r.scale;
  } else if (r.numerator == 0.0) {
    r.d_hat = 0.0;
  } else {
    throw Error(ErrorKind::ZeroScale, "both groups have zero variance but different quantiles",
                {{"group", pg.group}, {"numerator", r.numerator}});
  }
  return r;
}

DistanceReport mean_distance(const GroupProfile& p1, const GroupProfile& pg, const MeanDistanceOptions& opts) {
  const std::size_t S = p1.means.size();
  if (S == 0 || S != pg.means.size() || p1.cov.rows() != static_cast<Eigen::Index>(S) ||
      pg.cov.rows() != static_cast<Eigen::Index>(S))
    throw Error(ErrorKind::DimensionMismatch, "profiles disagree on the number of pre-periods",
                {{"S_1", p1.means.size()}, {"S_g", pg.means.size()}});

  Eigen::VectorXd delta(S);
  for (std::size_t s = 0; s < S; ++s) delta(s) = pg.means[s] - p1.means[s];
  Eigen::MatrixXd pooled = (p1.cov + pg.cov) / 2.0;
  if (opts.ridge) pooled.diagonal().array() += 1e-8 * pooled.trace() / static_cast<double>(S);

  DistanceReport r;
  r.group = pg.group;
  r.metric = Metric::mean;
  r.numerator = delta.norm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pooled, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  r.rcond = lmax > 0.0 ? std::max(lmin, 0.0) / lmax : 0.0;

  if (r.numerator == 0.0) {
    r.d_hat = 0.0;
    r.scale = std::sqrt(std::max(pooled.trace(), 0.0) / static_cast<double>(S));
    return r;
  }
  if (r.rcond < opts.rcond_threshold)
    throw Error(ErrorKind::SingularPooledCovariance, "pooled pre-period covariance is numerically singular",
                {{"group", pg.group}, {"rcond", r.rcond}, {"threshold", opts.rcond_threshold}});

  const Eigen::VectorXd solved = pooled.ldlt().solve(delta);
  const double q = std::max(delta.dot(solved), 0.0);
  r.d_hat = std::sqrt(q);
  r.scale = r.numerator / r.d_hat;
  return r;
}

DistanceReport distance(const GroupProfile& p1, const GroupProfile& pg, const PipelineConfig& config) {
  if (config.metric == Metric::wasserstein) return wasserstein_distance(p1, pg);
  return mean_distance(p1, pg, {config.ridge, config.rcond_threshold});
}

namespace {

// Pre-window data of one group with the pieces needed for O(J + S^2)
// leave-one-out profiles.
struct LooGroup {
  GroupProfile base;
  Eigen::MatrixXd x;              // n x S
  std::vector<double> sorted;     // last pre-period, ascending
  std::vector<std::size_t> rank;  // unit -> position in sorted
  Eigen::MatrixXd scatter;        // (n - 1) * cov

  LooGroup(const PanelDataset& data, std::size_t g, int t_star, int S, int J)
      : base(profile_group(data, g, t_star, S, J)) {
    const std::size_t n = base.n_g;
    x.resize(static_cast<Eigen::Index>(n), S);
    for (int s = 0; s < S; ++s) {
      auto col = data.outcomes(t_star - S + s, g);
      for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), s) = col[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, S - 1) < x(b, S - 1); });
    sorted.resize(n);
    rank.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      sorted[k] = x(static_cast<Eigen::Index>(order[k]), S - 1);
      rank[order[k]] = k;
    }
    scatter = base.cov * static_cast<double>(n - 1);
  }

  GroupProfile without(std::size_t i) const {
    GroupProfile p = base;
    const std::size_t n = base.n_g;
    const double nd = static_cast<double>(n);
    const Eigen::Index S = x.cols();
    Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(base.means.data(), S);
    const Eigen::VectorXd xi = x.row(static_cast<Eigen::Index>(i)).transpose();
    const Eigen::VectorXd dev = xi - m;
    const Eigen::VectorXd m2 = (nd * m - xi) / (nd - 1.0);
    const Eigen::MatrixXd sc = scatter - (nd / (nd - 1.0)) * dev * dev.transpose();
    p.n_g = n - 1;
    p.means.assign(m2.data(), m2.data() + S);
    p.cov = sc / (nd - 2.0);
    p.var_last = p.cov(S - 1, S - 1);
    const std::size_t r = rank[i];
    const std::size_t J = static_cast<std::size_t>(base.J);
    for (std::size_t j = 1; j <= J; ++j) {
      const std::size_t k = std::max<std::size_t>(((n - 1) * j + J) / (J + 1), 1) - 1;
      p.quantiles[j - 1] = k < r ? sorted[k] : sorted[k + 1];
    }
    return p;
  }
};

}  // namespace

double jackknife_distance_se(const PanelDataset& data, std::size_t treated, std::size_t group, int t_star,
                             Metric metric, const PipelineConfig& config) {
  const std::size_t n1 = data.group(treated).size(), ng = data.group(group).size();
  if (n1 < 10 || ng < 10)
    throw Error(ErrorKind::TooFewUnits, "jackknife needs at least 10 units in each group",
                {{"n_1", n1}, {"n_g", ng}, {"group", data.group(group).label}});
  PipelineConfig cfg = config;
  cfg.metric = metric;
  const LooGroup a(data, treated, t_star, config.S, config.J);
  const LooGroup b(data, group, t_star, config.S, config.J);

  double var = 0.0;
  for (int side = 0; side < 2; ++side) {
    const LooGroup& drop = side == 0 ? a : b;
    const std::size_t n = drop.base.n_g;
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) {
      const GroupProfile loo = drop.without(i);
      theta[i] = side == 0 ? distance(loo, b.base, cfg).d_hat : distance(a.base, loo, cfg).d_hat;
    }
    const double nd = static_cast<double>(n);
    const double mean = simd::sum(theta) / nd;
    var += (nd - 1.0) / nd * simd::sum_sq_dev(theta, mean);
  }
  return std::sqrt(var);
}

double jackknife_distance_se(const PanelDataset& data, std::string_view group, Metric metric,
                             const PipelineConfig& config) {
  return jackknife_distance_se(data, data.treated_group(), data.group_index(group), data.t_star(), metric, config);
}

}  // namespace ccg
