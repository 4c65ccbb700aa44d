#include "ccg/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "ccg/error.hpp"
#include "ccg/simd.hpp"

namespace ccg {

using nlohmann::json;

PanelDataset::PanelDataset(PanelParts parts)
    : T_(parts.T),
      groups_(std::move(parts.groups)),
      unit_ids_(std::move(parts.unit_ids)),
      outcomes_(std::move(parts.outcomes)),
      covariate_(std::move(parts.covariate)),
      covariate_levels_(std::move(parts.covariate_levels)),
      staggered_(parts.staggered) {
  const std::size_t n = unit_ids_.size();
  if (T_ < 1) throw Error(ErrorKind::InvalidPanel, "panel needs at least one period");
  if (groups_.empty() || n == 0) throw Error(ErrorKind::InvalidPanel, "panel has no units");
  if (outcomes_.size() != n * static_cast<std::size_t>(T_))
    throw Error(ErrorKind::InvalidPanel, "outcome block does not match units x periods");
  if (!covariate_.empty() && covariate_.size() != n)
    throw Error(ErrorKind::InvalidPanel, "covariate column does not match unit count");

  unit_group_.assign(n, 0);
  std::size_t expect = 0;
  std::vector<std::size_t> treated;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const GroupInfo& gi = groups_[g];
    if (gi.begin != expect || gi.end <= gi.begin)
      throw Error(ErrorKind::InvalidPanel, "group '" + gi.label + "' is empty or not contiguous");
    for (std::size_t i = gi.begin; i < gi.end; ++i) unit_group_[i] = g;
    expect = gi.end;
    if (gi.first_treated == 1)
      throw Error(ErrorKind::InvalidPanel, "group '" + gi.label + "' is treated in period 1",
                  {{"group", gi.label}});
    if (gi.first_treated < 0 || gi.first_treated > T_)
      throw Error(ErrorKind::InvalidPanel, "group '" + gi.label + "' has first treatment outside 1..T");
    if (gi.ever_treated()) treated.push_back(g);
  }
  if (expect != n) throw Error(ErrorKind::InvalidPanel, "groups do not cover every unit");
  if (treated.empty()) throw Error(ErrorKind::InvalidPanel, "no treated group");
  if (!staggered_ && treated.size() > 1) {
    json labels = json::array();
    for (auto g : treated) labels.push_back(groups_[g].label);
    throw Error(ErrorKind::InvalidPanel, "more than one treated group outside staggered mode",
                {{"treated_groups", labels}});
  }
  treated_ = treated.front();
  for (auto g : treated)
    if (groups_[g].first_treated < groups_[treated_].first_treated) treated_ = g;

  for (double y : outcomes_)
    if (!std::isfinite(y)) throw Error(ErrorKind::InvalidPanel, "non-finite outcome");
}

std::optional<std::size_t> PanelDataset::find_group(std::string_view label) const {
  for (std::size_t g = 0; g < groups_.size(); ++g)
    if (groups_[g].label == label) return g;
  return std::nullopt;
}

std::size_t PanelDataset::group_index(std::string_view label) const {
  if (auto g = find_group(label)) return *g;
  throw Error(ErrorKind::ConfigError, "unknown group '" + std::string(label) + "'");
}

std::span<const double> PanelDataset::outcomes(int t) const {
  if (t < 1 || t > T_) throw Error(ErrorKind::PeriodOutOfRange, "period " + std::to_string(t) + " outside 1..T");
  return {outcomes_.data() + static_cast<std::size_t>(t - 1) * units(), units()};
}

std::span<const double> PanelDataset::outcomes(int t, std::size_t g) const {
  const GroupInfo& gi = groups_.at(g);
  return outcomes(t).subspan(gi.begin, gi.size());
}

std::vector<std::size_t> PanelDataset::comparison_groups() const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < groups_.size(); ++g)
    if (!groups_[g].ever_treated()) out.push_back(g);
  return out;
}

std::vector<std::size_t> PanelDataset::treated_groups() const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < groups_.size(); ++g)
    if (groups_[g].ever_treated()) out.push_back(g);
  return out;
}

PanelDataset PanelDataset::subset(std::span<const std::size_t> keep) const {
  std::vector<std::vector<std::size_t>> by_group(groups_.size());
  for (std::size_t i : keep) by_group.at(unit_group_.at(i)).push_back(i);

  PanelParts parts;
  parts.T = T_;
  parts.staggered = staggered_;
  parts.covariate_levels = covariate_levels_;
  std::vector<std::size_t> order;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    auto& members = by_group[g];
    if (members.empty()) continue;
    std::sort(members.begin(), members.end());
    GroupInfo gi = groups_[g];
    gi.begin = order.size();
    order.insert(order.end(), members.begin(), members.end());
    gi.end = order.size();
    parts.groups.push_back(gi);
  }
  const std::size_t m = order.size();
  parts.outcomes.resize(m * static_cast<std::size_t>(T_));
  for (int t = 1; t <= T_; ++t) {
    auto col = outcomes(t);
    for (std::size_t k = 0; k < m; ++k) parts.outcomes[static_cast<std::size_t>(t - 1) * m + k] = col[order[k]];
  }
  for (std::size_t i : order) {
    parts.unit_ids.push_back(unit_ids_[i]);
    if (has_covariate()) parts.covariate.push_back(covariate_[i]);
  }
  return PanelDataset(std::move(parts));
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& value) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct UnitRecord {
  std::string id;
  std::size_t group = 0;
  std::map<int, std::pair<double, int>> cells;  // time -> (outcome, treated)
  int covariate = -1;
};

}  // namespace

GroupMetadata GroupMetadata::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("group metadata is not valid JSON: ") + e.what());
  }
  GroupMetadata m;
  if (j.contains("first_treated")) {
    if (!j["first_treated"].is_object())
      throw Error(ErrorKind::ConfigError, "first_treated must map group labels to periods");
    for (auto& [label, t] : j["first_treated"].items()) m.first_treated.emplace_back(label, t.get<int>());
    return m;
  }
  if (!j.contains("treated_group") || !j.contains("t_star"))
    throw Error(ErrorKind::ConfigError, "group metadata needs treated_group and t_star");
  m.treated_group = j["treated_group"].get<std::string>();
  m.t_star = j["t_star"].get<int>();
  return m;
}

PanelDataset load_panel(std::istream& in, const Schema& schema, const std::optional<GroupMetadata>& metadata) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::MissingColumn, "empty input: header row required");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    return std::nullopt;
  };
  const auto c_unit = column(schema.unit), c_group = column(schema.group), c_time = column(schema.time),
             c_outcome = column(schema.outcome), c_treated = column(schema.treated),
             c_cov = column(schema.covariate);
  {
    json missing = json::array();
    if (!c_unit) missing.push_back(schema.unit);
    if (!c_group) missing.push_back(schema.group);
    if (!c_time) missing.push_back(schema.time);
    if (!c_outcome) missing.push_back(schema.outcome);
    if (!schema.covariate.empty() && !c_cov) missing.push_back(schema.covariate);
    if (!missing.empty()) throw Error(ErrorKind::MissingColumn, "required column(s) absent", {{"missing", missing}});
  }
  if (!c_treated && !metadata)
    throw Error(ErrorKind::ConfigError, "no treated column and no group metadata sidecar");

  std::vector<UnitRecord> units;
  std::unordered_map<std::string, std::size_t> unit_index;
  std::vector<std::string> group_labels;
  std::unordered_map<std::string, std::size_t> group_index;
  std::vector<std::string> cov_levels;
  std::unordered_map<std::string, int> cov_index;

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size())
      throw Error(ErrorKind::InvalidPanel, "row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                                               " fields, header has " + std::to_string(header.size()));
    const std::string& uid = f[*c_unit];
    const std::string& glabel = f[*c_group];
    int t = 0;
    if (!parse_number(f[*c_time], t) || t < 1)
      throw Error(ErrorKind::InvalidPanel, "row " + std::to_string(row) + ": time must be a positive integer");
    double y = 0.0;
    if (!parse_number(f[*c_outcome], y) || !std::isfinite(y))
      throw Error(ErrorKind::InvalidPanel, "row " + std::to_string(row) + ": missing or invalid outcome",
                  {{"unit", uid}, {"time", t}});
    int d = 0;
    if (c_treated && (!parse_number(f[*c_treated], d) || (d != 0 && d != 1)))
      throw Error(ErrorKind::InvalidPanel, "row " + std::to_string(row) + ": treated must be 0 or 1");

    auto [git, gnew] = group_index.try_emplace(glabel, group_labels.size());
    if (gnew) group_labels.push_back(glabel);
    auto [uit, unew] = unit_index.try_emplace(uid, units.size());
    if (unew) units.push_back({uid, git->second, {}, -1});
    UnitRecord& u = units[uit->second];
    if (u.group != git->second)
      throw Error(ErrorKind::InvalidPanel, "unit '" + uid + "' appears in more than one group", {{"unit", uid}});
    if (!u.cells.emplace(t, std::make_pair(y, d)).second)
      throw Error(ErrorKind::DuplicateObservation, "unit '" + uid + "' has two rows for period " + std::to_string(t),
                  {{"unit", uid}, {"time", t}});
    if (c_cov) {
      auto [cit, cnew] = cov_index.try_emplace(f[*c_cov], static_cast<int>(cov_levels.size()));
      if (cnew) cov_levels.push_back(f[*c_cov]);
      if (u.covariate >= 0 && u.covariate != cit->second)
        throw Error(ErrorKind::InvalidPanel, "covariate of unit '" + uid + "' changes over time", {{"unit", uid}});
      u.covariate = cit->second;
    }
  }
  if (units.empty()) throw Error(ErrorKind::InvalidPanel, "no observations");

  int T = 0;
  for (const auto& u : units) T = std::max(T, u.cells.rbegin()->first);
  {
    json offending = json::array();
    for (const auto& u : units)
      if (static_cast<int>(u.cells.size()) != T) offending.push_back(u.id);
    if (!offending.empty())
      throw Error(ErrorKind::UnbalancedPanel,
                  std::to_string(offending.size()) + " unit(s) lack an observation for some period in 1.." +
                      std::to_string(T),
                  {{"units", offending}, {"T", T}});
  }

  std::vector<int> first_treated(group_labels.size(), 0);
  if (c_treated) {
    std::vector<std::optional<std::vector<int>>> regime(group_labels.size());
    json mismatched = json::array();
    for (const auto& u : units) {
      std::vector<int> d;
      for (const auto& [t, cell] : u.cells) d.push_back(cell.second);
      auto& r = regime[u.group];
      if (!r) {
        r = d;
      } else if (*r != d && std::find(mismatched.begin(), mismatched.end(), group_labels[u.group]) == mismatched.end()) {
        mismatched.push_back(group_labels[u.group]);
      }
    }
    if (!mismatched.empty())
      throw Error(ErrorKind::GroupTreatmentMismatch, "units within a group disagree on treatment",
                  {{"groups", mismatched}});
    for (std::size_t g = 0; g < regime.size(); ++g) {
      const auto& d = *regime[g];
      const auto first = std::find(d.begin(), d.end(), 1);
      if (first == d.end()) continue;
      if (std::find(first, d.end(), 0) != d.end())
        throw Error(ErrorKind::InvalidPanel, "group '" + group_labels[g] + "' switches out of treatment",
                    {{"group", group_labels[g]}});
      first_treated[g] = static_cast<int>(first - d.begin()) + 1;
    }
  } else if (!metadata->first_treated.empty()) {
    for (const auto& [label, t] : metadata->first_treated) {
      auto it = group_index.find(label);
      if (it == group_index.end()) throw Error(ErrorKind::ConfigError, "metadata names unknown group '" + label + "'");
      first_treated[it->second] = t;
    }
  } else {
    auto it = group_index.find(metadata->treated_group);
    if (it == group_index.end())
      throw Error(ErrorKind::ConfigError, "treated_group '" + metadata->treated_group + "' not present in data");
    if (metadata->t_star < 2 || metadata->t_star > T)
      throw Error(ErrorKind::ConfigError, "t_star must lie in 2..T");
    first_treated[it->second] = metadata->t_star;
  }

  std::size_t n_treated = 0;
  for (int f : first_treated) n_treated += f > 0;
  if (n_treated > 1 && !schema.allow_staggered)
    throw Error(ErrorKind::InvalidPanel, "more than one treated group; enable staggered mode");

  PanelParts parts;
  parts.T = T;
  parts.staggered = schema.allow_staggered;
  parts.covariate_levels = cov_levels;
  std::vector<std::vector<std::size_t>> members(group_labels.size());
  for (std::size_t i = 0; i < units.size(); ++i) members[units[i].group].push_back(i);
  std::vector<std::size_t> order;
  for (std::size_t g = 0; g < group_labels.size(); ++g) {
    GroupInfo gi{group_labels[g], first_treated[g], order.size(), 0};
    order.insert(order.end(), members[g].begin(), members[g].end());
    gi.end = order.size();
    parts.groups.push_back(gi);
  }
  const std::size_t n = order.size();
  parts.outcomes.resize(n * static_cast<std::size_t>(T));
  for (std::size_t k = 0; k < n; ++k) {
    const UnitRecord& u = units[order[k]];
    parts.unit_ids.push_back(u.id);
    if (c_cov) parts.covariate.push_back(u.covariate);
    for (const auto& [t, cell] : u.cells) parts.outcomes[static_cast<std::size_t>(t - 1) * n + k] = cell.first;
  }
  return PanelDataset(std::move(parts));
}

void write_panel_csv(std::ostream& out, const PanelDataset& data) {
  out << "unit,group,time,outcome,treated";
  if (data.has_covariate()) out << ",covariate";
  out << '\n';
  for (std::size_t i = 0; i < data.units(); ++i) {
    const std::string uid = csv_field(data.unit_id(i));
    const std::string glabel = csv_field(data.group(data.group_of(i)).label);
    for (int t = 1; t <= data.periods(); ++t) {
      out << uid << ',' << glabel << ',' << t << ',' << format_double(data.outcome(i, t)) << ','
          << (data.treated(i, t) ? 1 : 0);
      if (data.has_covariate()) out << ',' << csv_field(data.covariate_levels()[data.covariate(i)]);
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Group profiles
// ---------------------------------------------------------------------------

std::vector<double> grid_quantiles(std::span<const double> sorted, int J) {
  const std::size_t n = sorted.size();
  std::vector<double> q(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    // smallest k with k / n >= j / (J + 1), i.e. ceil(n j / (J + 1))
    const std::size_t k = (n * static_cast<std::size_t>(j) + static_cast<std::size_t>(J)) / static_cast<std::size_t>(J + 1);
    q[static_cast<std::size_t>(j - 1)] = sorted[std::max<std::size_t>(k, 1) - 1];
  }
  return q;
}

GroupProfile profile_group(const PanelDataset& data, std::size_t g, int t_star, int S, int J) {
  const GroupInfo& gi = data.group(g);
  if (J < 2) throw Error(ErrorKind::ConfigError, "quantile grid needs J >= 2");
  if (S < 1 || S > t_star - 1)
    throw Error(ErrorKind::InsufficientPrePeriods,
                "S = " + std::to_string(S) + " pre-periods requested but t* - 1 = " + std::to_string(t_star - 1),
                {{"S", S}, {"t_star", t_star}});
  if (gi.size() < 2)
    throw Error(ErrorKind::DegenerateGroup, "group '" + gi.label + "' has fewer than two units", {{"group", gi.label}});

  GroupProfile p;
  p.group = gi.label;
  p.n_g = gi.size();
  p.S = S;
  p.J = J;
  p.t_star = t_star;
  p.p_hat = static_cast<double>(gi.size()) / static_cast<double>(data.units());

  std::vector<std::span<const double>> cols;
  for (int s = t_star - S; s <= t_star - 1; ++s) cols.push_back(data.outcomes(s, g));
  const double n = static_cast<double>(p.n_g);
  p.means.resize(static_cast<std::size_t>(S));
  for (int a = 0; a < S; ++a) p.means[a] = simd::sum(cols[a]) / n;
  p.cov.resize(S, S);
  for (int a = 0; a < S; ++a)
    for (int b = 0; b <= a; ++b) {
      const double c = a == b ? simd::sum_sq_dev(cols[a], p.means[a])
                              : simd::sum_cross_dev(cols[a], cols[b], p.means[a], p.means[b]);
      p.cov(a, b) = p.cov(b, a) = c / (n - 1.0);
    }
  p.var_last = p.cov(S - 1, S - 1);

  std::vector<double> last(cols.back().begin(), cols.back().end());
  std::sort(last.begin(), last.end());
  p.quantiles = grid_quantiles(last, J);
  return p;
}

std::vector<GroupProfile> profile_groups(const PanelDataset& data, int S, int J) {
  std::vector<GroupProfile> out;
  for (std::size_t g = 0; g < data.groups().size(); ++g) out.push_back(profile_group(data, g, data.t_star(), S, J));
  return out;
}

}  // namespace ccg
