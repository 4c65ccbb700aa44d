#include "ccg/timehomog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccg/error.hpp"
#include "ccg/simd.hpp"
#include "ccg/stats.hpp"

namespace ccg {

namespace {

struct GroupChange {
  double wald = 0.0;
  int dof = 0;
  double max_std = 0.0;
};

// Paired changes D_s = Y_s - Y_base for s = first..last within one group.
GroupChange group_change(const PanelDataset& data, std::size_t g, int base, int first, int last) {
  const auto y0 = data.outcomes(base, g);
  const std::size_t n = y0.size();
  const double nd = static_cast<double>(n);
  const int m = last - first + 1;

  std::vector<std::vector<double>> d(static_cast<std::size_t>(m), std::vector<double>(n));
  Eigen::VectorXd mean(m);
  for (int k = 0; k < m; ++k) {
    const auto ys = data.outcomes(first + k, g);
    for (std::size_t i = 0; i < n; ++i) d[k][i] = ys[i] - y0[i];
    mean(k) = simd::sum(d[k]) / nd;
  }
  Eigen::MatrixXd cov(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b <= a; ++b)
      cov(a, b) = cov(b, a) = simd::sum_cross_dev(d[a], d[b], mean(a), mean(b)) / (nd - 1.0);

  GroupChange out;
  const double sd0 = std::sqrt(stats::sample_variance(y0));
  out.max_std = 0.0;
  for (int k = 0; k < m; ++k) {
    const double z = sd0 > 0.0 ? std::abs(mean(k)) / sd0 : (mean(k) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    out.max_std = std::max(out.max_std, z);
  }

  // Wald statistic n * mean' cov^+ mean; a nonzero mean along a zero-variance
  // direction makes the statistic infinite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double cut = std::max(lmax * 1e-12, 1e-300);
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * mean;
  const double mean_scale = std::max(mean.cwiseAbs().maxCoeff(), 1.0);
  for (int k = 0; k < m; ++k) {
    const double lam = eig.eigenvalues()(k);
    if (lam > cut) {
      out.wald += nd * proj(k) * proj(k) / lam;
      ++out.dof;
    } else if (std::abs(proj(k)) > 1e-12 * mean_scale) {
      out.wald = std::numeric_limits<double>::infinity();
      ++out.dof;
    }
  }
  return out;
}

}  // namespace

TimeHomogReport detect_time_homogeneity(const PanelDataset& data, const TimeHomogConfig& config) {
  const auto comparisons = data.comparison_groups();
  if (comparisons.empty()) throw Error(ErrorKind::NoComparisonGroups, "time homogeneity needs comparison groups");
  const int t_star = data.t_star();
  if (t_star < 2) throw Error(ErrorKind::PeriodOutOfRange, "time homogeneity needs t* >= 2");
  const int base = t_star - 1;

  TimeHomogReport r;
  r.mode = config.mode;
  bool prefix = true;
  for (int t = t_star; t <= data.periods(); ++t) {
    PeriodHomogTest test;
    for (std::size_t g : comparisons) {
      const GroupChange c = group_change(data, g, base, t_star, t);
      test.wald_stat += c.wald;
      test.dof += c.dof;
      test.max_std_change = std::max(test.max_std_change, c.max_std);
    }
    test.p_value = test.dof > 0 ? stats::chi2_sf(test.wald_stat, test.dof) : 1.0;
    test.passes = config.mode == ThMode::test ? test.p_value > config.alpha : test.max_std_change < config.tol;
    prefix = prefix && test.passes;
    if (prefix) {
      r.t_th_mean = t;
      r.homogeneous_periods.push_back(t);
    }
    r.per_period_tests[t] = test;
  }
  return r;
}

AttEstimate tau_th(const PanelDataset& data, int t, const EstimateOptions& opts) {
  const int t_star = data.t_star();
  if (t < t_star || t > data.periods() || t_star < 2)
    throw Error(ErrorKind::PeriodOutOfRange, "tau_th period must lie in t*..T", {{"period", t}, {"t_star", t_star}});
  return detail::weighted_contrast(data, data.treated_group(), {}, {}, t, t_star - 1, opts);
}

std::vector<BasisFunction> default_basis(std::size_t m) {
  std::vector<BasisFunction> b;
  if (m == 0) return b;
  b.push_back({"y", [](double y) { return y; }});
  for (std::size_t p = 2; p < m; ++p)
    b.push_back({"y^" + std::to_string(p), [p](double y) { return std::pow(y, static_cast<double>(p)); }});
  if (m >= 2) b.push_back({"1", [](double) { return 1.0; }});
  return b;
}

TransferResult lou_parametric_transfer_check(const PanelDataset& data, const std::vector<BasisFunction>& basis,
                                             const TransferOptions& opts) {
  const auto comparisons = data.comparison_groups();
  const int t_star = data.t_star();
  const int t = opts.period > 0 ? opts.period : t_star;
  if (t < t_star || t > data.periods()) throw Error(ErrorKind::PeriodOutOfRange, "transfer period outside t*..T");
  const Eigen::Index G = static_cast<Eigen::Index>(comparisons.size());
  const Eigen::Index K = static_cast<Eigen::Index>(basis.size());
  if (K == 0) throw Error(ErrorKind::ConfigError, "empty basis");
  if (G < K)
    throw Error(ErrorKind::RankDeficientPsi, "fewer comparison groups than basis functions",
                {{"groups", G}, {"basis", K}});

  TransferResult r;
  r.psi.resize(G, K);
  r.rhs.resize(G);
  double se_frob2 = 0.0;
  for (Eigen::Index gi = 0; gi < G; ++gi) {
    const std::size_t g = comparisons[static_cast<std::size_t>(gi)];
    const auto lag = data.outcomes(t_star - 1, g);
    const double n = static_cast<double>(lag.size());
    std::vector<double> v(lag.size());
    for (Eigen::Index k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < lag.size(); ++i) v[i] = basis[static_cast<std::size_t>(k)].f(lag[i]);
      const double m = simd::sum(v) / n;
      r.psi(gi, k) = m;
      se_frob2 += simd::sum_sq_dev(v, m) / (n - 1.0) / n;
    }
    r.rhs(gi) = simd::sum(data.outcomes(t, g)) / n;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  r.singular_values = svd.singularValues();
  const double smax = r.singular_values(0);
  const double smin = r.singular_values(K - 1);
  r.rank_threshold = std::max(1e-10 * smax, opts.rank_z * std::sqrt(se_frob2));
  if (!(smin > r.rank_threshold))
    throw Error(ErrorKind::RankDeficientPsi, "moment matrix is rank deficient within sampling error",
                {{"sigma_min", smin}, {"sigma_max", smax}, {"threshold", r.rank_threshold}});

  r.beta = svd.solve(r.rhs);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(K);
  e1(0) = 1.0;
  r.transfer_holds = (r.beta - e1).cwiseAbs().maxCoeff() < opts.tolerance;
  return r;
}

}  // namespace ccg
