#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccg/config.hpp"
#include "ccg/estimator.hpp"
#include "ccg/panel.hpp"

namespace ccg {

struct PeriodHomogTest {
  double wald_stat = 0.0;  // test mode
  int dof = 0;
  double p_value = 1.0;
  double max_std_change = 0.0;  // largest |mean change| / sd over groups and periods
  bool passes = false;
};

struct TimeHomogReport {
  ThMode mode = ThMode::test;
  int t_th_mean = 0;
  std::vector<int> homogeneous_periods;
  std::map<int, PeriodHomogTest> per_period_tests;
};

TimeHomogReport detect_time_homogeneity(const PanelDataset& data, const TimeHomogConfig& config);

// Before/after change of the treated group between t*-1 and t.
AttEstimate tau_th(const PanelDataset& data, int t, const EstimateOptions& opts = {});

struct BasisFunction {
  std::string name;
  std::function<double(double)> f;
};

// (y, y^2, ..., y^(m-1), 1): identity first, constant last, m functions.
std::vector<BasisFunction> default_basis(std::size_t m);

struct TransferOptions {
  int period = 0;            // post period for the moment system; 0 = t*
  double tolerance = 1e-2;   // on max |beta - e_1|
  double rank_z = 3.0;       // sampling allowance on the smallest singular value
};

struct TransferResult {
  Eigen::VectorXd beta;
  bool transfer_holds = false;
  Eigen::MatrixXd psi;
  Eigen::VectorXd rhs;
  Eigen::VectorXd singular_values;
  double rank_threshold = 0.0;
};

TransferResult lou_parametric_transfer_check(const PanelDataset& data, const std::vector<BasisFunction>& basis,
                                             const TransferOptions& opts = {});

}  // namespace ccg
