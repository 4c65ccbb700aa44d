#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ccg {

struct GroupInfo {
  std::string label;
  int first_treated = 0;  // 0 = never treated
  std::size_t begin = 0;  // units [begin, end) in dataset order
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool ever_treated() const { return first_treated > 0; }
  bool treated_at(int t) const { return first_treated > 0 && t >= first_treated; }
};

// Raw pieces handed to PanelDataset for validation. Units must already be
// arranged contiguously by group, in the order of `groups`.
struct PanelParts {
  int T = 0;
  std::vector<GroupInfo> groups;
  std::vector<std::string> unit_ids;
  std::vector<double> outcomes;  // period-major, outcomes[(t - 1) * n + i]
  std::vector<int> covariate;    // optional, one code per unit
  std::vector<std::string> covariate_levels;
  bool staggered = false;
};

// A balanced panel held period-major so that one group's outcomes at one
// period form a contiguous slice.
class PanelDataset {
 public:
  PanelDataset() = default;
  explicit PanelDataset(PanelParts parts);

  int periods() const { return T_; }
  std::size_t units() const { return unit_ids_.size(); }
  const std::vector<GroupInfo>& groups() const { return groups_; }
  const GroupInfo& group(std::size_t g) const { return groups_.at(g); }
  std::size_t group_index(std::string_view label) const;
  std::optional<std::size_t> find_group(std::string_view label) const;
  std::size_t group_of(std::size_t unit) const { return unit_group_[unit]; }
  const std::string& unit_id(std::size_t unit) const { return unit_ids_[unit]; }

  std::span<const double> outcomes(int t) const;
  std::span<const double> outcomes(int t, std::size_t g) const;
  double outcome(std::size_t unit, int t) const { return outcomes_[static_cast<std::size_t>(t - 1) * units() + unit]; }
  bool treated(std::size_t unit, int t) const { return groups_[unit_group_[unit]].treated_at(t); }

  bool staggered() const { return staggered_; }
  // Single-treated-group accessors; in staggered mode they refer to the
  // earliest-treated group.
  std::size_t treated_group() const { return treated_; }
  const std::string& treated_label() const { return groups_[treated_].label; }
  int t_star() const { return groups_[treated_].first_treated; }
  std::vector<std::size_t> comparison_groups() const;
  std::vector<std::size_t> treated_groups() const;

  bool has_covariate() const { return !covariate_.empty(); }
  int covariate(std::size_t unit) const { return covariate_[unit]; }
  const std::vector<std::string>& covariate_levels() const { return covariate_levels_; }

  // Keep only the listed units (any order); groups left empty are dropped.
  PanelDataset subset(std::span<const std::size_t> units) const;

 private:
  int T_ = 0;
  std::vector<GroupInfo> groups_;
  std::vector<std::string> unit_ids_;
  std::vector<std::size_t> unit_group_;
  std::vector<double> outcomes_;
  std::vector<int> covariate_;
  std::vector<std::string> covariate_levels_;
  bool staggered_ = false;
  std::size_t treated_ = 0;
};

struct Schema {
  std::string unit = "unit";
  std::string group = "group";
  std::string time = "time";
  std::string outcome = "outcome";
  std::string treated = "treated";    // optional column
  std::string covariate;              // empty = no covariate column
  bool allow_staggered = false;
};

// Replaces the treated column: either one treated group with its first
// treated period, or (staggered) a first-treatment period per group.
struct GroupMetadata {
  std::string treated_group;
  int t_star = 0;
  std::vector<std::pair<std::string, int>> first_treated;

  static GroupMetadata from_json_text(std::string_view text);
};

PanelDataset load_panel(std::istream& in, const Schema& schema = {},
                        const std::optional<GroupMetadata>& metadata = std::nullopt);
void write_panel_csv(std::ostream& out, const PanelDataset& data);

struct GroupProfile {
  std::string group;
  std::size_t n_g = 0;
  std::vector<double> quantiles;
  std::vector<double> means;
  Eigen::MatrixXd cov;
  double var_last = 0.0;
  double p_hat = 0.0;
  int S = 0;
  int J = 0;
  int t_star = 0;
};

// Left-continuous empirical quantiles Q(u_j) = inf{y : F(y) >= u_j} on the
// grid u_j = j / (J + 1) from an ascending sample.
std::vector<double> grid_quantiles(std::span<const double> sorted, int J);

GroupProfile profile_group(const PanelDataset& data, std::size_t g, int t_star, int S, int J);
// One profile per group in dataset order, relative to the dataset's t*.
std::vector<GroupProfile> profile_groups(const PanelDataset& data, int S, int J);

}  // namespace ccg
