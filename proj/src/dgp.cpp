#include "ccg/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ccg/error.hpp"
#include "ccg/stats.hpp"

namespace ccg {

using nlohmann::json;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::did: return "did";
    case Strategy::cic: return "cic";
    case Strategy::lou: return "lou";
    case Strategy::ife: return "ife";
    case Strategy::latent: return "latent";
    case Strategy::linear_trend: return "linear_trend";
    case Strategy::dynamic_panel: return "dynamic_panel";
  }
  return "did";
}

Strategy parse_strategy(std::string_view s) {
  for (Strategy k : {Strategy::did, Strategy::cic, Strategy::lou, Strategy::ife, Strategy::latent,
                     Strategy::linear_trend, Strategy::dynamic_panel})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::InvalidSpec, "unknown strategy '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Laws and maps
// ---------------------------------------------------------------------------

double Law::draw(rng::UnitStream& s) const {
  switch (kind) {
    case Kind::normal: return s.normal(a, b);
    case Kind::uniform: return a + (b - a) * s.uniform();
    case Kind::triangular: return s.triangular(a, b, c);
    case Kind::constant: return a;
  }
  return a;
}

double Law::mean() const {
  switch (kind) {
    case Kind::normal: return a;
    case Kind::uniform: return 0.5 * (a + b);
    case Kind::triangular: return (a + b + c) / 3.0;
    case Kind::constant: return a;
  }
  return a;
}

double Law::variance() const {
  switch (kind) {
    case Kind::normal: return b * b;
    case Kind::uniform: return (b - a) * (b - a) / 12.0;
    case Kind::triangular: return (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0;
    case Kind::constant: return 0.0;
  }
  return 0.0;
}

double Law::pdf(double x) const {
  switch (kind) {
    case Kind::normal: return phi((x - a) / b) / b;
    case Kind::uniform: return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
    case Kind::triangular:
      if (x < a || x > b) return 0.0;
      return x < c ? 2.0 * (x - a) / ((b - a) * (c - a)) : 2.0 * (b - x) / ((b - a) * (b - c));
    case Kind::constant: return 0.0;
  }
  return 0.0;
}

std::pair<double, double> Law::support() const {
  switch (kind) {
    case Kind::normal: return {a - 12.0 * b, a + 12.0 * b};
    case Kind::uniform:
    case Kind::triangular: return {a, b};
    case Kind::constant: return {a, a};
  }
  return {a, a};
}

double PeriodMap::apply(double y) const {
  switch (kind) {
    case Kind::identity: return y;
    case Kind::affine: return a + b * y;
    case Kind::cubic: return a + b * y + c * y * y * y;
    case Kind::chi2_quantile: return stats::chi2_1_quantile(y);
    case Kind::perturbation: {
      double q = 0.0;
      for (std::size_t k = 0; k < centers.size(); ++k) q += coefs[k] * phi(y - centers[k]);
      return y + epsilon * q;
    }
  }
  return y;
}

double PeriodMap::derivative(double y) const {
  switch (kind) {
    case Kind::identity: return 1.0;
    case Kind::affine: return b;
    case Kind::cubic: return b + 3.0 * c * y * y;
    case Kind::chi2_quantile: {
      const double q = stats::chi2_1_quantile(y);
      // d/dp of the quantile is 1 / density at the quantile
      return 1.0 / (std::exp(-0.5 * q) / std::sqrt(2.0 * std::numbers::pi * q));
    }
    case Kind::perturbation: {
      double dq = 0.0;
      for (std::size_t k = 0; k < centers.size(); ++k) dq -= coefs[k] * (y - centers[k]) * phi(y - centers[k]);
      return 1.0 + epsilon * dq;
    }
  }
  return 1.0;
}

std::size_t DgpSpec::treated_index() const {
  std::size_t best = groups.size();
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g].first_treated > 0 && (best == groups.size() || groups[g].first_treated < groups[best].first_treated))
      best = g;
  if (best == groups.size()) throw Error(ErrorKind::InvalidSpec, "spec has no treated group");
  return best;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void validate(const DgpSpec& spec) {
  auto fail = [&](const std::string& why) { throw Error(ErrorKind::InvalidSpec, spec.name + ": " + why); };
  if (spec.T < 2) fail("T must be at least 2");
  if (spec.t_star < 2 || spec.t_star > spec.T) fail("t_star must lie in 2..T");
  if (spec.groups.size() < 2) fail("need a treated group and at least one comparison group");
  if (spec.n_per_group < 2) fail("n_per_group must be at least 2");
  if (spec.S < 1 || spec.S > spec.t_star - 1) fail("S must lie in 1..t_star-1");
  if (spec.noise_sd < 0.0 || spec.att_sd < 0.0) fail("standard deviations must be nonnegative");
  std::size_t treated = 0;
  for (const auto& g : spec.groups) {
    if (g.label.empty()) fail("group without label");
    if (g.first_treated == 1 || g.first_treated < 0 || g.first_treated > spec.T) fail("bad first_treated for " + g.label);
    treated += g.first_treated > 0;
    if (spec.group_size(g) < 2) fail("group " + g.label + " needs at least two units");
    for (const auto& other : spec.groups)
      if (&other != &g && other.label == g.label) fail("duplicate group label " + g.label);
  }
  if (treated == 0) fail("no treated group");
  if (spec.groups[spec.treated_index()].first_treated != spec.t_star) fail("t_star must be the earliest treatment period");
  const auto T = static_cast<std::size_t>(spec.T);
  if (spec.theta.size() != T && !(spec.theta.empty() && (spec.strategy == Strategy::cic || spec.strategy == Strategy::lou)))
    fail("theta must have T entries");
  switch (spec.strategy) {
    case Strategy::ife: {
      if (spec.F.size() != T) fail("F must have T rows");
      const std::size_t R = spec.F.front().size();
      for (const auto& row : spec.F)
        if (row.size() != R) fail("F rows differ in length");
      for (const auto& g : spec.groups)
        if (g.lambda.size() != R) fail("group " + g.label + " needs R loadings");
      break;
    }
    case Strategy::linear_trend:
      for (const auto& g : spec.groups)
        if (g.lambda.size() != 1) fail("group " + g.label + " needs one trend slope");
      break;
    case Strategy::latent: {
      if (spec.a.size() != T || spec.b.size() != T) fail("latent needs a and b with T rows");
      const std::size_t L = spec.a.front().size();
      if (L == 0) fail("latent dimension must be positive");
      for (const auto& row : spec.a)
        if (row.size() != L) fail("a rows differ in length");
      for (const auto& g : spec.groups)
        if (g.xi.size() != L) fail("group " + g.label + " needs L latent laws");
      break;
    }
    case Strategy::cic:
      if (spec.maps.size() != T) fail("cic needs one map per period");
      for (const auto& m : spec.maps) {
        if (m.kind == PeriodMap::Kind::affine && !(m.b > 0.0)) fail("affine map must be increasing");
        if (m.kind == PeriodMap::Kind::cubic && (!(m.b > 0.0) || m.c < 0.0)) fail("cubic map must be increasing");
        if (m.kind == PeriodMap::Kind::perturbation && m.centers.size() != m.coefs.size()) fail("perturbation sizes");
        if (m.kind == PeriodMap::Kind::chi2_quantile)
          for (const auto& g : spec.groups) {
            const auto [lo, hi] = g.u.support();
            if (g.u.kind == Law::Kind::normal || lo < 0.0 || hi > 1.0) fail("chi2 quantile map needs ranks in (0,1)");
          }
      }
      break;
    case Strategy::lou:
      if (spec.transition.size() != static_cast<std::size_t>(spec.T - spec.t_star + 1))
        fail("lou needs one transition per period from t_star to T");
      for (const auto& c : spec.transition)
        if (c.size() != 3) fail("lou transition has three coefficients");
      break;
    case Strategy::dynamic_panel:
    case Strategy::did:
      break;
  }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {

void draw_unit(const DgpSpec& spec, const GroupParams& g, rng::UnitStream& s, double* y) {
  const int T = spec.T;
  auto theta = [&](int t) { return spec.theta.empty() ? 0.0 : spec.theta[static_cast<std::size_t>(t - 1)]; };
  switch (spec.strategy) {
    case Strategy::did: {
      const double eta = g.eta.draw(s);
      for (int t = 1; t <= T; ++t) y[t - 1] = theta(t) + eta + spec.noise_sd * s.normal();
      break;
    }
    case Strategy::ife: {
      const double eta = g.eta.draw(s);
      std::vector<double> lam;
      for (const auto& l : g.lambda) lam.push_back(l.draw(s));
      for (int t = 1; t <= T; ++t) {
        double v = theta(t) + eta;
        for (std::size_t r = 0; r < lam.size(); ++r) v += lam[r] * spec.F[t - 1][r];
        y[t - 1] = v + spec.noise_sd * s.normal();
      }
      break;
    }
    case Strategy::linear_trend: {
      const double eta = g.eta.draw(s);
      const double slope = g.lambda[0].draw(s);
      for (int t = 1; t <= T; ++t) y[t - 1] = theta(t) + eta + slope * t + spec.noise_sd * s.normal();
      break;
    }
    case Strategy::latent: {
      std::vector<double> xi;
      for (const auto& l : g.xi) xi.push_back(l.draw(s));
      for (int t = 1; t <= T; ++t) {
        double v = theta(t) + spec.b[t - 1] * xi[0] * xi[0];
        for (std::size_t l = 0; l < xi.size(); ++l) v += spec.a[t - 1][l] * xi[l];
        y[t - 1] = v + spec.noise_sd * s.normal();
      }
      break;
    }
    case Strategy::dynamic_panel: {
      const double eta = g.eta.draw(s);
      y[0] = g.y1.draw(s);
      for (int t = 2; t <= T; ++t) y[t - 1] = theta(t) + eta + spec.rho * y[t - 2] + spec.noise_sd * s.normal();
      break;
    }
    case Strategy::cic: {
      const double u = g.u.draw(s);
      for (int t = 1; t <= T; ++t) {
        y[t - 1] = spec.maps[t - 1].apply(u);
        if (spec.noise_sd > 0.0) y[t - 1] += spec.noise_sd * s.normal();
      }
      break;
    }
    case Strategy::lou: {
      for (int t = 1; t < spec.t_star - 1; ++t) y[t - 1] = theta(t) + g.pre.draw(s);
      const double lag = g.lag.draw(s);
      y[spec.t_star - 2] = theta(spec.t_star - 1) + lag;
      for (int t = spec.t_star; t <= T; ++t) {
        const auto& c = spec.transition[static_cast<std::size_t>(t - spec.t_star)];
        y[t - 1] = c[0] + c[1] * lag + c[2] * lag * lag + spec.noise_sd * s.normal();
      }
      break;
    }
  }
}

}  // namespace

PanelDataset generate_panel(const DgpSpec& spec, unsigned threads) {
  validate(spec);
  PanelParts parts;
  parts.T = spec.T;
  std::size_t n_treated_groups = 0;
  std::vector<std::pair<std::size_t, std::size_t>> unit_ref;  // (group, index within group)
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const GroupParams& gp = spec.groups[g];
    GroupInfo gi{gp.label, gp.first_treated, unit_ref.size(), 0};
    for (std::size_t k = 0; k < spec.group_size(gp); ++k) {
      unit_ref.emplace_back(g, k);
      parts.unit_ids.push_back(gp.label + "-" + std::to_string(k + 1));
    }
    gi.end = unit_ref.size();
    parts.groups.push_back(gi);
    n_treated_groups += gp.first_treated > 0;
  }
  parts.staggered = n_treated_groups > 1;
  const std::size_t n = unit_ref.size();
  const auto T = static_cast<std::size_t>(spec.T);
  parts.outcomes.assign(n * T, 0.0);

  auto work = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> y(T);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto [g, k] = unit_ref[i];
      const GroupParams& gp = spec.groups[g];
      rng::UnitStream s(spec.seed, static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(k));
      const double effect = spec.att_sd > 0.0 ? spec.att + spec.att_sd * s.normal() : spec.att;
      draw_unit(spec, gp, s, y.data());
      for (std::size_t t = 1; t <= T; ++t) {
        double v = y[t - 1];
        if (gp.first_treated > 0 && static_cast<int>(t) >= gp.first_treated) v += effect;
        parts.outcomes[(t - 1) * n + i] = v;
      }
    }
  };
  const unsigned w = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n / 256, 1))));
  if (w == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(work, n * k / w, n * (k + 1) / w);
    for (auto& th : pool) th.join();
  }
  return PanelDataset(std::move(parts));
}

Generated generate(const DgpSpec& spec, unsigned threads) {
  Generated out{generate_panel(spec, threads), compute_truth(spec)};
  return out;
}

// ---------------------------------------------------------------------------
// Population moments
// ---------------------------------------------------------------------------

namespace {

// Y_t(0) = c_t + sum_k A(t,k) Z_k for rows where ok[t] holds; the Z_k are
// independent with the listed laws.
struct LinearRep {
  std::vector<double> c;
  std::vector<std::vector<double>> A;
  std::vector<Law> z;
  std::vector<bool> ok;
};

LinearRep linear_rep(const DgpSpec& spec, const GroupParams& g) {
  const int T = spec.T;
  LinearRep rep;
  rep.c.assign(static_cast<std::size_t>(T), 0.0);
  rep.ok.assign(static_cast<std::size_t>(T), true);
  auto theta = [&](int t) { return spec.theta.empty() ? 0.0 : spec.theta[static_cast<std::size_t>(t - 1)]; };
  const Law noise = Law::normal(0.0, spec.noise_sd);
  auto add_noise_block = [&]() -> std::size_t {
    const std::size_t first = rep.z.size();
    for (int t = 0; t < T; ++t) rep.z.push_back(noise);
    return first;
  };
  auto rows = [&]() { rep.A.assign(static_cast<std::size_t>(T), std::vector<double>(rep.z.size(), 0.0)); };

  switch (spec.strategy) {
    case Strategy::did:
    case Strategy::ife:
    case Strategy::linear_trend: {
      rep.z.push_back(g.eta);
      for (const auto& l : g.lambda) rep.z.push_back(l);
      const std::size_t e0 = add_noise_block();
      rows();
      for (int t = 1; t <= T; ++t) {
        auto& row = rep.A[t - 1];
        rep.c[t - 1] = theta(t);
        row[0] = 1.0;
        for (std::size_t r = 0; r < g.lambda.size(); ++r)
          row[1 + r] = spec.strategy == Strategy::ife ? spec.F[t - 1][r] : static_cast<double>(t);
        row[e0 + t - 1] = 1.0;
      }
      break;
    }
    case Strategy::latent: {
      for (const auto& l : g.xi) rep.z.push_back(l);
      const std::size_t e0 = add_noise_block();
      rows();
      for (int t = 1; t <= T; ++t) {
        rep.c[t - 1] = theta(t);
        for (std::size_t l = 0; l < g.xi.size(); ++l) rep.A[t - 1][l] = spec.a[t - 1][l];
        rep.A[t - 1][e0 + t - 1] = 1.0;
        rep.ok[t - 1] = spec.b[t - 1] == 0.0;
      }
      break;
    }
    case Strategy::dynamic_panel: {
      rep.z.push_back(g.eta);
      rep.z.push_back(g.y1);
      const std::size_t e0 = add_noise_block();
      rows();
      rep.A[0][1] = 1.0;
      for (int t = 2; t <= T; ++t) {
        rep.c[t - 1] = theta(t) + spec.rho * rep.c[t - 2];
        for (std::size_t k = 0; k < rep.z.size(); ++k) rep.A[t - 1][k] = spec.rho * rep.A[t - 2][k];
        rep.A[t - 1][0] += 1.0;
        rep.A[t - 1][e0 + t - 1] = 1.0;
      }
      break;
    }
    case Strategy::cic: {
      rep.z.push_back(g.u);
      const std::size_t e0 = add_noise_block();
      rows();
      for (int t = 1; t <= T; ++t) {
        const PeriodMap& m = spec.maps[t - 1];
        rep.A[t - 1][e0 + t - 1] = 1.0;
        if (m.kind == PeriodMap::Kind::identity) {
          rep.A[t - 1][0] = 1.0;
        } else if (m.kind == PeriodMap::Kind::affine) {
          rep.c[t - 1] = m.a;
          rep.A[t - 1][0] = m.b;
        } else {
          rep.ok[t - 1] = false;
        }
      }
      break;
    }
    case Strategy::lou: {
      for (int t = 1; t < spec.t_star - 1; ++t) rep.z.push_back(g.pre);
      rep.z.push_back(g.lag);
      const std::size_t lag = rep.z.size() - 1;
      const std::size_t e0 = add_noise_block();
      rows();
      for (int t = 1; t < spec.t_star; ++t) {
        rep.c[t - 1] = theta(t);
        rep.A[t - 1][static_cast<std::size_t>(t - 1)] = 1.0;
      }
      for (int t = spec.t_star; t <= T; ++t) {
        const auto& c = spec.transition[static_cast<std::size_t>(t - spec.t_star)];
        rep.c[t - 1] = c[0];
        rep.A[t - 1][lag] = c[1];
        rep.A[t - 1][e0 + t - 1] = 1.0;
        rep.ok[t - 1] = c[2] == 0.0;
      }
      break;
    }
  }
  return rep;
}

// E[h(U)] and E[h(U)^2] by numerical integration against the law of U.
std::pair<double, double> integrate_map(const PeriodMap& m, const Law& u) {
  if (u.kind == Law::Kind::constant) {
    const double v = m.apply(u.a);
    return {v, v * v};
  }
  auto piece = [&](auto&& f, double lo, double hi) {
    if (u.kind == Law::Kind::normal) return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, lo, hi, 1e-13);
  };
  auto first = [&](double x) { return m.apply(x) * u.pdf(x); };
  auto second = [&](double x) {
    const double h = m.apply(x);
    return h * h * u.pdf(x);
  };
  const auto [lo, hi] = u.support();
  if (u.kind == Law::Kind::triangular && u.c > lo && u.c < hi)
    return {piece(first, lo, u.c) + piece(first, u.c, hi), piece(second, lo, u.c) + piece(second, u.c, hi)};
  if (u.kind == Law::Kind::normal)
    return {piece(first, lo, u.a) + piece(first, u.a, hi), piece(second, lo, u.a) + piece(second, u.a, hi)};
  return {piece(first, lo, hi), piece(second, lo, hi)};
}

}  // namespace

PopulationMoments population_moments(const DgpSpec& spec) {
  validate(spec);
  PopulationMoments pm;
  pm.method = "closed_form";
  const int T = spec.T;
  for (const auto& g : spec.groups) {
    const LinearRep rep = linear_rep(spec, g);
    std::vector<double> mean(static_cast<std::size_t>(T)), var(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
      const auto& row = rep.A[t - 1];
      double m = rep.c[t - 1], v = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        m += row[k] * rep.z[k].mean();
        v += row[k] * row[k] * rep.z[k].variance();
      }
      if (!rep.ok[t - 1]) {
        switch (spec.strategy) {
          case Strategy::latent: {
            const double theta = spec.theta[t - 1];
            const Law& x1 = g.xi[0];
            m = theta + spec.b[t - 1] * (x1.variance() + x1.mean() * x1.mean());
            for (std::size_t l = 0; l < g.xi.size(); ++l) m += spec.a[t - 1][l] * g.xi[l].mean();
            v = kNaN;
            break;
          }
          case Strategy::lou: {
            const auto& c = spec.transition[static_cast<std::size_t>(t - spec.t_star)];
            const double mu = g.lag.mean(), s2 = g.lag.variance();
            m = c[0] + c[1] * mu + c[2] * (s2 + mu * mu);
            if (g.lag.gaussian()) {
              const double var_sq = 2.0 * s2 * s2 + 4.0 * mu * mu * s2;
              v = c[1] * c[1] * s2 + c[2] * c[2] * var_sq + 2.0 * c[1] * c[2] * 2.0 * mu * s2 +
                  spec.noise_sd * spec.noise_sd;
            } else {
              v = kNaN;
            }
            break;
          }
          case Strategy::cic: {
            const auto [e1, e2] = integrate_map(spec.maps[t - 1], g.u);
            m = e1;
            v = e2 - e1 * e1 + spec.noise_sd * spec.noise_sd;
            pm.method = "quadrature";
            break;
          }
          default:
            break;
        }
      }
      mean[t - 1] = m;
      var[t - 1] = v;
    }
    pm.mean.push_back(std::move(mean));
    pm.var.push_back(std::move(var));
  }
  return pm;
}

namespace {

bool close(double x, double y) { return std::abs(x - y) <= 1e-9 * (1.0 + std::abs(x) + std::abs(y)); }

// Whether groups a and b share the joint law of (Y_first(0), ..., Y_last(0)).
bool same_window_law(const DgpSpec& spec, const GroupParams& a, const GroupParams& b, int first, int last) {
  const LinearRep ra = linear_rep(spec, a), rb = linear_rep(spec, b);
  bool gaussian = true;
  for (int t = first; t <= last; ++t) {
    gaussian = gaussian && ra.ok[t - 1] && rb.ok[t - 1];
    for (std::size_t k = 0; k < ra.z.size() && gaussian; ++k)
      if (ra.A[t - 1][k] != 0.0 && !ra.z[k].gaussian()) gaussian = false;
    for (std::size_t k = 0; k < rb.z.size() && gaussian; ++k)
      if (rb.A[t - 1][k] != 0.0 && !rb.z[k].gaussian()) gaussian = false;
  }
  if (gaussian) {
    // Gaussian vectors coincide iff mean and covariance do.
    for (int s = first; s <= last; ++s) {
      double ma = ra.c[s - 1], mb = rb.c[s - 1];
      for (std::size_t k = 0; k < ra.z.size(); ++k) ma += ra.A[s - 1][k] * ra.z[k].mean();
      for (std::size_t k = 0; k < rb.z.size(); ++k) mb += rb.A[s - 1][k] * rb.z[k].mean();
      if (!close(ma, mb)) return false;
      for (int t = first; t <= s; ++t) {
        double ca = 0.0, cb = 0.0;
        for (std::size_t k = 0; k < ra.z.size(); ++k) ca += ra.A[s - 1][k] * ra.A[t - 1][k] * ra.z[k].variance();
        for (std::size_t k = 0; k < rb.z.size(); ++k) cb += rb.A[s - 1][k] * rb.A[t - 1][k] * rb.z[k].variance();
        if (!close(ca, cb)) return false;
      }
    }
    return true;
  }
  // Otherwise compare the parameters that generate the window; the period
  // maps are shared, so equal parameters give equal laws.
  switch (spec.strategy) {
    case Strategy::cic: return a.u == b.u;
    case Strategy::latent: return a.xi == b.xi;
    case Strategy::lou: return a.lag == b.lag && (first == spec.t_star - 1 || a.pre == b.pre);
    case Strategy::dynamic_panel: return a.eta == b.eta && a.y1 == b.y1;
    default: return a.eta == b.eta && a.lambda == b.lambda;
  }
}

}  // namespace

std::map<std::string, double> population_estimands(const DgpSpec& spec) {
  const Truth truth = compute_truth(spec);
  std::map<std::string, double> out;
  for (const auto& [key, bias] : truth.known_bias) out[key] = spec.att + bias;
  out["att"] = spec.att;
  return out;
}

Truth compute_truth(const DgpSpec& spec) {
  const PopulationMoments pm = population_moments(spec);
  Truth truth;
  truth.att_true = spec.att;
  truth.S = spec.S;
  truth.method = pm.method;
  const std::size_t tr = spec.treated_index();
  const int ts = spec.t_star;
  const GroupParams& g1 = spec.groups[tr];
  auto m = [&](std::size_t g, int t) { return pm.mean[g][static_cast<std::size_t>(t - 1)]; };

  std::vector<std::size_t> comparisons;
  for (std::size_t g = 0; g < spec.groups.size(); ++g)
    if (spec.groups[g].first_treated == 0) comparisons.push_back(g);

  for (std::size_t g : comparisons) {
    const GroupParams& gp = spec.groups[g];
    bool mean_1 = close(m(g, ts - 1), m(tr, ts - 1));
    bool mean_S = true;
    for (int s = ts - spec.S; s <= ts - 1; ++s) mean_S = mean_S && close(m(g, s), m(tr, s));
    if (mean_1) truth.gstar_mean_1.push_back(gp.label);
    if (mean_S) truth.gstar_mean_S.push_back(gp.label);
    if (mean_1 && same_window_law(spec, g1, gp, ts - 1, ts - 1)) truth.gstar_true.push_back(gp.label);
    if (mean_S && same_window_law(spec, g1, gp, ts - spec.S, ts - 1)) truth.gstar_dist_S.push_back(gp.label);

    truth.known_bias["tau_g:" + gp.label] = m(tr, ts) - m(g, ts);
    truth.known_bias["tau_mr_g:" + gp.label] = (m(tr, ts) - m(tr, ts - 1)) - (m(g, ts) - m(g, ts - 1));
  }

  auto set_bias = [&](const std::string& key, const std::vector<std::string>& set) {
    if (set.empty()) return;
    double total = 0.0, contrast = 0.0;
    for (const auto& label : set)
      for (std::size_t g : comparisons)
        if (spec.groups[g].label == label) {
          const double w = static_cast<double>(spec.group_size(spec.groups[g]));
          total += w;
          contrast += w * m(g, ts);
        }
    truth.known_bias[key] = m(tr, ts) - contrast / total;
  };
  set_bias("tau", truth.gstar_true);
  set_bias("tau_mean_1", truth.gstar_mean_1);
  set_bias("tau_mean_S", truth.gstar_mean_S);
  set_bias("tau_dist_S", truth.gstar_dist_S);
  for (int t = ts; t <= spec.T; ++t) truth.known_bias["tau_th_" + std::to_string(t)] = m(tr, t) - m(tr, ts - 1);
  truth.known_bias["tau_th"] = truth.known_bias["tau_th_" + std::to_string(ts)];
  return truth;
}

json to_json(const Truth& t) {
  return {{"att_true", t.att_true}, {"gstar_true", t.gstar_true}, {"gstar_mean_1", t.gstar_mean_1},
          {"gstar_mean_S", t.gstar_mean_S}, {"gstar_dist_S", t.gstar_dist_S}, {"S", t.S},
          {"known_bias", t.known_bias}, {"method", t.method}};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json law_json(const Law& l) {
  switch (l.kind) {
    case Law::Kind::normal: return {{"kind", "normal"}, {"mean", l.a}, {"sd", l.b}};
    case Law::Kind::uniform: return {{"kind", "uniform"}, {"lo", l.a}, {"hi", l.b}};
    case Law::Kind::triangular: return {{"kind", "triangular"}, {"lo", l.a}, {"hi", l.b}, {"mode", l.c}};
    case Law::Kind::constant: return {{"kind", "constant"}, {"value", l.a}};
  }
  return {};
}

Law law_from(const json& j) {
  if (j.is_number()) return Law::constant(j.get<double>());
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "normal") return Law::normal(j.at("mean").get<double>(), j.at("sd").get<double>());
  if (kind == "uniform") return Law::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (kind == "triangular")
    return Law::triangular(j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("mode").get<double>());
  if (kind == "constant") return Law::constant(j.at("value").get<double>());
  throw Error(ErrorKind::InvalidSpec, "unknown law kind '" + kind + "'");
}

const char* map_kind_name(PeriodMap::Kind k) {
  switch (k) {
    case PeriodMap::Kind::identity: return "identity";
    case PeriodMap::Kind::affine: return "affine";
    case PeriodMap::Kind::cubic: return "cubic";
    case PeriodMap::Kind::chi2_quantile: return "chi2_quantile";
    case PeriodMap::Kind::perturbation: return "perturbation";
  }
  return "identity";
}

json map_json(const PeriodMap& m) {
  json j = {{"kind", map_kind_name(m.kind)}};
  if (m.kind == PeriodMap::Kind::affine || m.kind == PeriodMap::Kind::cubic) {
    j["a"] = m.a;
    j["b"] = m.b;
    if (m.kind == PeriodMap::Kind::cubic) j["c"] = m.c;
  }
  if (m.kind == PeriodMap::Kind::perturbation) {
    j["epsilon"] = m.epsilon;
    j["centers"] = m.centers;
    j["coefs"] = m.coefs;
  }
  return j;
}

PeriodMap map_from(const json& j) {
  PeriodMap m;
  const std::string kind = j.at("kind").get<std::string>();
  for (auto k : {PeriodMap::Kind::identity, PeriodMap::Kind::affine, PeriodMap::Kind::cubic,
                 PeriodMap::Kind::chi2_quantile, PeriodMap::Kind::perturbation})
    if (kind == map_kind_name(k)) m.kind = k;
  if (kind != map_kind_name(m.kind)) throw Error(ErrorKind::InvalidSpec, "unknown map kind '" + kind + "'");
  m.a = j.value("a", 0.0);
  m.b = j.value("b", 1.0);
  m.c = j.value("c", 0.0);
  m.epsilon = j.value("epsilon", 0.0);
  m.centers = j.value("centers", std::vector<double>{});
  m.coefs = j.value("coefs", std::vector<double>{});
  return m;
}

}  // namespace

json to_json(const DgpSpec& s) {
  json groups = json::array();
  for (const auto& g : s.groups) {
    json jg = {{"label", g.label}, {"first_treated", g.first_treated}};
    if (g.n) jg["n"] = g.n;
    switch (s.strategy) {
      case Strategy::did: jg["eta"] = law_json(g.eta); break;
      case Strategy::ife:
      case Strategy::linear_trend: {
        jg["eta"] = law_json(g.eta);
        json lam = json::array();
        for (const auto& l : g.lambda) lam.push_back(law_json(l));
        jg["lambda"] = lam;
        break;
      }
      case Strategy::latent: {
        json xi = json::array();
        for (const auto& l : g.xi) xi.push_back(law_json(l));
        jg["xi"] = xi;
        break;
      }
      case Strategy::dynamic_panel:
        jg["eta"] = law_json(g.eta);
        jg["y1"] = law_json(g.y1);
        break;
      case Strategy::cic: jg["u"] = law_json(g.u); break;
      case Strategy::lou:
        jg["lag"] = law_json(g.lag);
        jg["pre"] = law_json(g.pre);
        break;
    }
    groups.push_back(jg);
  }
  json j = {{"name", s.name}, {"strategy", std::string(to_string(s.strategy))}, {"n_per_group", s.n_per_group},
            {"T", s.T}, {"t_star", s.t_star}, {"att", s.att}, {"att_sd", s.att_sd}, {"seed", s.seed},
            {"S", s.S}, {"noise_sd", s.noise_sd}, {"theta", s.theta}, {"groups", groups}};
  if (!s.counterexample.empty()) j["counterexample"] = s.counterexample;
  if (s.rank_deficient) j["rank_deficient"] = true;
  if (!s.F.empty()) j["F"] = s.F;
  if (!s.a.empty()) j["a"] = s.a;
  if (!s.b.empty()) j["b"] = s.b;
  if (!s.transition.empty()) j["transition"] = s.transition;
  if (s.strategy == Strategy::dynamic_panel) j["rho"] = s.rho;
  if (!s.maps.empty()) {
    json maps = json::array();
    for (const auto& m : s.maps) maps.push_back(map_json(m));
    j["maps"] = maps;
  }
  return j;
}

DgpSpec dgp_from_json(const json& j) {
  try {
    DgpSpec s;
    s.name = j.value("name", std::string("custom"));
    s.strategy = parse_strategy(j.at("strategy").get<std::string>());
    s.n_per_group = j.value("n_per_group", std::size_t{1000});
    s.T = j.at("T").get<int>();
    s.t_star = j.at("t_star").get<int>();
    s.att = j.value("att", 0.0);
    s.att_sd = j.value("att_sd", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.S = j.value("S", std::min(2, s.t_star - 1));
    s.noise_sd = j.value("noise_sd", 1.0);
    s.counterexample = j.value("counterexample", std::string());
    s.rank_deficient = j.value("rank_deficient", false);
    s.theta = j.value("theta", std::vector<double>{});
    s.F = j.value("F", std::vector<std::vector<double>>{});
    s.a = j.value("a", std::vector<std::vector<double>>{});
    s.b = j.value("b", std::vector<double>{});
    s.transition = j.value("transition", std::vector<std::vector<double>>{});
    s.rho = j.value("rho", 0.0);
    if (j.contains("maps"))
      for (const auto& m : j["maps"]) s.maps.push_back(map_from(m));
    for (const auto& jg : j.at("groups")) {
      GroupParams g;
      g.label = jg.at("label").get<std::string>();
      g.n = jg.value("n", std::size_t{0});
      g.first_treated = jg.value("first_treated", 0);
      if (jg.contains("eta")) g.eta = law_from(jg["eta"]);
      if (jg.contains("lambda"))
        for (const auto& l : jg["lambda"]) g.lambda.push_back(law_from(l));
      if (jg.contains("xi"))
        for (const auto& l : jg["xi"]) g.xi.push_back(law_from(l));
      if (jg.contains("u")) g.u = law_from(jg["u"]);
      if (jg.contains("lag")) g.lag = law_from(jg["lag"]);
      if (jg.contains("pre")) g.pre = law_from(jg["pre"]);
      if (jg.contains("y1")) g.y1 = law_from(jg["y1"]);
      s.groups.push_back(std::move(g));
    }
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("malformed spec: ") + e.what());
  }
}

std::pair<double, double> cic_prop3ii_weights() {
  // Overlaps of unit-variance Gaussian bumps share the factor 1/sqrt(4 pi),
  // which cancels from the 2x2 system.
  const double a = std::exp(-0.25), b = std::exp(-1.0);
  const double det = 1.0 - a * a;
  return {(-a + a * b) / det, (a * a - b) / det};
}

}  // namespace ccg
