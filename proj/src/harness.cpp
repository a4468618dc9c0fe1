#include "mvsde/harness.hpp"

#include "mvsde/error.hpp"
#include "mvsde/invariant.hpp"
#include "mvsde/pipeline.hpp"
#include "mvsde/random.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mvsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double
norm2_diff(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double
median(std::vector<double> v)
{
  if (v.empty())
    return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string
format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Integral of |F(t) - c| over [a, b] for F(t) = f0 + p (t - a) + s (t - a)^2 / 2
// nondecreasing on the piece.
double
abs_area(double a, double b, double f0, double p, double s, double c)
{
  auto F = [&](double t) { return f0 + p * t + 0.5 * s * t * t; };
  auto area = [&](double t1, double t2) {
    return (f0 - c) * (t2 - t1) + 0.5 * p * (t2 * t2 - t1 * t1) + s * (t2 * t2 * t2 - t1 * t1 * t1) / 6.0;
  };
  const double len = b - a;
  if (len <= 0.0)
    return 0.0;
  const double fa = F(0.0);
  const double fb = F(len);
  if (fa >= c || fb <= c)
    return std::abs(area(0.0, len));
  // Single crossing of the level c.
  const double r = c - f0;
  const double disc = std::max(0.0, p * p + 2.0 * s * r);
  const double denom = p + std::sqrt(disc);
  double tc = denom > 0.0 ? 2.0 * r / denom : 0.5 * len;
  tc = std::clamp(tc, 0.0, len);
  return std::abs(area(0.0, tc)) + std::abs(area(tc, len));
}

double
grid_tail(const GridFunction& f, double y, int power)
{
  const double L = f.half_width();
  if (y >= L)
    return 0.0;
  auto g = [power](double v) { return power == 1 ? std::abs(v) : v * v; };
  const double h = f.spacing();
  auto i = static_cast<std::size_t>(std::ceil((y + L) / h));
  i = std::min(i, f.size() - 1);
  double s = 0.5 * (f.x(i) - y) * (g(f.at(y)) + g(f[i]));
  for (std::size_t k = i; k + 1 < f.size(); ++k)
    s += 0.5 * h * (g(f[k]) + g(f[k + 1]));
  return s;
}

double
double_factorial(int n)
{
  double r = 1.0;
  for (int k = n; k > 1; k -= 2)
    r *= k;
  return r;
}

} // namespace

double
wasserstein1_empirical(std::span<const double> x, std::span<const double> y)
{
  if (x.empty() || y.empty())
    throw std::invalid_argument("wasserstein1_empirical: empty sample");
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == m) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(n);
  }
  // Quantile pieces ((i-1)/n, i/n] and ((j-1)/m, j/m], merged exactly by
  // comparing i m with j n.
  double s = 0.0;
  std::size_t i = 1;
  std::size_t j = 1;
  std::size_t prev_num = 0; // previous breakpoint times n m
  while (i <= n && j <= m) {
    const std::size_t ei = i * m;
    const std::size_t ej = j * n;
    const std::size_t e = std::min(ei, ej);
    s += static_cast<double>(e - prev_num) * std::abs(a[i - 1] - b[j - 1]);
    prev_num = e;
    if (ei == e)
      ++i;
    if (ej == e)
      ++j;
  }
  return s / static_cast<double>(n * m);
}

double
wasserstein1_to_density(std::span<const double> samples, const GridFunction& pi)
{
  if (samples.empty())
    throw std::invalid_argument("wasserstein1_to_density: empty sample");
  std::vector<double> ys(samples.begin(), samples.end());
  std::sort(ys.begin(), ys.end());
  const auto cdf_raw = cumulative(pi);
  const double total = cdf_raw.back();
  const double h = pi.spacing();
  const std::size_t n = pi.size();
  const auto N = static_cast<double>(ys.size());

  double w = 0.0;
  std::size_t j = 0; // number of samples <= current left end

  // Left of the grid the model CDF is 0.
  double t = std::min(ys.front(), pi.x(0));
  while (j < ys.size() && ys[j] <= t)
    ++j;
  while (t < pi.x(0)) {
    const double next = j < ys.size() ? std::min(ys[j], pi.x(0)) : pi.x(0);
    w += (next - t) * static_cast<double>(j) / N;
    t = next;
    while (j < ys.size() && ys[j] <= t)
      ++j;
  }

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double x0 = pi.x(k);
    const double x1 = pi.x(k + 1);
    const double c0 = cdf_raw[k] / total;
    const double p = pi[k] / total;
    const double s = (pi[k + 1] - pi[k]) / (h * total);
    double a = x0;
    while (a < x1) {
      const double b = (j < ys.size() && ys[j] < x1) ? std::max(ys[j], a) : x1;
      const double ta = a - x0;
      const double fa = c0 + p * ta + 0.5 * s * ta * ta;
      const double pa = p + s * ta;
      w += abs_area(a, b, fa, pa, s, static_cast<double>(j) / N);
      a = b;
      while (j < ys.size() && ys[j] <= a)
        ++j;
      if (b == x1)
        break;
    }
  }

  // Right of the grid the model CDF is 1.
  t = pi.x(n - 1);
  while (j < ys.size()) {
    const double next = ys[j];
    w += (next - t) * (1.0 - static_cast<double>(j) / N);
    t = next;
    while (j < ys.size() && ys[j] <= t)
      ++j;
  }
  return w;
}

double
l2_grid_error(const GridFunction& f, const GridFunction& g)
{
  require_same_grid(f, g, "l2_grid_error");
  const auto w = trapezoid_weights(f.shape());
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    s += w[i] * (f[i] - g[i]) * (f[i] - g[i]);
  return s;
}

double
tail_functional_phi(const GridFunction& beta_prime, double p, double y)
{
  if (!(y > 0.0))
    throw std::invalid_argument("tail_functional_phi: y must be positive");
  const double l1 = grid_tail(beta_prime, y, 1);
  const double l2 = grid_tail(beta_prime, y, 2);
  return std::pow(y, p - 0.5) * l1 + std::pow(y, p) * std::sqrt(l2);
}

double
tail_functional_phi(const BetaSpec& beta, double p, double y)
{
  if (!(y > 0.0))
    throw std::invalid_argument("tail_functional_phi: y must be positive");
  switch (beta.family()) {
    case BetaFamily::zero:
      return 0.0;
    case BetaFamily::tabulated: {
      GridFunction d(beta.table().shape());
      for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = beta.prime(d.x(i));
      return tail_functional_phi(d, p, y);
    }
    default:
      break;
  }
  const bool bump = beta.family() == BetaFamily::cos_bump;
  const double period = bump ? std::numbers::pi / beta.b() : std::numbers::pi;
  const double far = std::max(200.0, 20.0 * y);
  double l1 = 0.0;
  double l2 = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (double a = y; a < far; a += period) {
    const double b = std::min(a + period, far);
    l1 += GK::integrate([&](double t) { return std::abs(beta.prime(t)); }, a, b, 8, 1e-13);
    l2 += GK::integrate([&](double t) { return std::pow(beta.prime(t), 2); }, a, b, 8, 1e-13);
  }
  if (bump) {
    const double b = beta.b();
    l1 += 2.0 * b / (std::numbers::pi * far);
    l2 += b * b / (6.0 * std::pow(far, 3));
  } else {
    const int k = beta.k();
    l1 += 2.0 / (std::numbers::pi * (2 * k - 1) * std::pow(far, 2 * k - 1));
    const double mean_sq = double_factorial(4 * k - 3) / double_factorial(4 * k);
    l2 += 4.0 * k * k * mean_sq / ((4 * k - 1) * std::pow(far, 4 * k - 1));
  }
  return std::pow(y, p - 0.5) * l1 + std::pow(y, p) * std::sqrt(l2);
}

void
validate(const ExperimentPlan& plan)
{
  if (plan.replications < 1)
    throw std::invalid_argument("experiment: replications must be >= 1");
  if (plan.n_list.empty() || plan.t_list.empty())
    throw std::invalid_argument("experiment: N and T lists must be nonempty");
  for (auto n : plan.n_list) {
    SimConfig c;
    c.n_particles = n;
    c.dt = plan.dt;
    c.mu0 = plan.mu0;
    for (double t : plan.t_list) {
      c.horizon = t;
      validate(c);
    }
  }
  validate(plan.estimator);
}

std::uint64_t
replication_stream(std::size_t n_index, std::size_t t_index, std::size_t replication)
{
  return mix_seed(mix_seed(n_index, t_index), replication);
}

std::vector<MetricsRow>
run_experiment(const ExperimentPlan& plan)
{
  validate(plan);
  const auto& spec = plan.spec;
  const auto& grid = plan.estimator.grid;
  InvariantOptions io;
  io.half_width = grid.half_width;
  io.n_points = grid.n_points;
  const auto solution = solve_invariant(spec, io);
  const auto oracle = make_oracle(spec, solution);
  const auto psi_true = psi_oracle(spec, solution.density);
  const auto beta_prime_true = GridFunction::sample(grid, [&spec](double y) { return spec.beta().prime(y); });

  struct Task
  {
    std::size_t in, it, rep;
  };
  std::vector<Task> tasks;
  for (std::size_t in = 0; in < plan.n_list.size(); ++in)
    for (std::size_t it = 0; it < plan.t_list.size(); ++it)
      for (std::size_t r = 0; r < plan.replications; ++r)
        tasks.push_back({ in, it, r });

  std::vector<MetricsRow> rows(tasks.size());
  const auto n_tasks = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ti = 0; ti < n_tasks; ++ti) {
    const auto& task = tasks[static_cast<std::size_t>(ti)];
    auto& row = rows[static_cast<std::size_t>(ti)];
    row.n = plan.n_list[task.in];
    row.t = plan.t_list[task.it];
    row.replication = task.rep;
    const auto start = std::chrono::steady_clock::now();
    try {
      SimConfig sim;
      sim.n_particles = row.n;
      sim.horizon = row.t;
      sim.dt = plan.dt;
      sim.mu0 = plan.mu0;
      sim.seed = plan.base_seed;
      sim.stream = replication_stream(task.in, task.it, task.rep);
      const auto ens = simulate(sim, spec);
      const auto y = project(ens.positions);
      row.w1_to_oracle = wasserstein1_to_density(y, solution.density);
      if (plan.run_estimator) {
        auto cfg = plan.estimator;
        if (!cfg.n_eff)
          cfg.n_eff = effective_sample_size(row.n, row.t, spec.lambda());
        const auto est = run_pipeline(y, cfg, spec.shape(), &oracle);
        row.l2_beta_prime_error = l2_grid_error(est.beta_prime_hat, beta_prime_true);
        GridFunction psi_window(grid);
        const double window = cfg.epsilon * est.diagnostics.U;
        for (std::size_t i = 0; i < grid.n_points; ++i)
          psi_window[i] = std::abs(psi_window.x(i)) <= window ? psi_true[i] : 0.0;
        row.l2_psi_error = l2_grid_error(est.psi_hat, psi_window);
        row.alpha_error_norm = norm2_diff(est.alpha_hat, oracle.alpha.alpha);
        row.a_error_norm = norm2_diff(est.a_hat, spec.a());
      } else {
        row.l2_beta_prime_error = kNaN;
        row.l2_psi_error = kNaN;
        row.alpha_error_norm = kNaN;
        row.a_error_norm = kNaN;
      }
    } catch (const std::exception& e) {
      std::string what = e.what();
      std::replace_if(what.begin(), what.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
      row.status = "error: " + what;
      row.w1_to_oracle = kNaN;
      row.l2_beta_prime_error = kNaN;
      row.l2_psi_error = kNaN;
      row.alpha_error_norm = kNaN;
      row.a_error_norm = kNaN;
    }
    row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return rows;
}

void
write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows)
{
  out << "# mvsde-metrics v1\n";
  out << "N,T,replication,status,W1_to_oracle,L2_beta_prime_error,L2_psi_error,alpha_error_norm,a_error_norm\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.t) << ',' << r.replication << ',' << r.status << ','
        << format_double(r.w1_to_oracle) << ',' << format_double(r.l2_beta_prime_error) << ','
        << format_double(r.l2_psi_error) << ',' << format_double(r.alpha_error_norm) << ','
        << format_double(r.a_error_norm) << '\n';
  }
}

void
write_timings_csv(std::ostream& out, std::span<const MetricsRow> rows)
{
  out << "N,T,replication,runtime_seconds\n";
  for (const auto& r : rows)
    out << r.n << ',' << format_double(r.t) << ',' << r.replication << ',' << format_double(r.runtime_seconds)
        << '\n';
}

std::vector<MetricsRow>
read_metrics_csv(std::istream& in)
{
  std::vector<MetricsRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("N,", 0) == 0)
        continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      f.push_back(cell);
    if (f.size() != 9)
      throw std::invalid_argument("metrics CSV: expected 9 fields, got " + std::to_string(f.size()));
    MetricsRow r;
    r.n = std::stoull(f[0]);
    r.t = std::strtod(f[1].c_str(), nullptr);
    r.replication = std::stoull(f[2]);
    r.status = f[3];
    r.w1_to_oracle = std::strtod(f[4].c_str(), nullptr);
    r.l2_beta_prime_error = std::strtod(f[5].c_str(), nullptr);
    r.l2_psi_error = std::strtod(f[6].c_str(), nullptr);
    r.alpha_error_norm = std::strtod(f[7].c_str(), nullptr);
    r.a_error_norm = std::strtod(f[8].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

double
ols_slope(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("ols_slope: x has no spread");
  return sxy / sxx;
}

RateReport
rate_report(std::span<const MetricsRow> rows)
{
  std::set<std::size_t> distinct_n;
  for (const auto& r : rows)
    distinct_n.insert(r.n);
  if (distinct_n.size() < 2)
    throw std::invalid_argument("rate_report: need at least 2 distinct N values");

  std::map<std::pair<double, std::size_t>, std::vector<const MetricsRow*>> groups;
  for (const auto& r : rows)
    groups[{ r.t, r.n }].push_back(&r);

  RateReport rep;
  std::map<double, std::vector<std::pair<double, double>>> w1_by_t;
  std::map<double, std::vector<double>> l2_by_t;
  for (const auto& [key, members] : groups) {
    CellSummary c;
    c.t = key.first;
    c.n = key.second;
    std::vector<double> w1, l2b, l2p, ae, aa;
    double sum_sq = 0.0;
    for (const auto* r : members) {
      if (r->status != "ok") {
        ++c.failures;
        continue;
      }
      ++c.count;
      sum_sq += r->w1_to_oracle * r->w1_to_oracle;
      w1.push_back(r->w1_to_oracle);
      l2b.push_back(r->l2_beta_prime_error);
      l2p.push_back(r->l2_psi_error);
      ae.push_back(r->alpha_error_norm);
      aa.push_back(r->a_error_norm);
    }
    c.mean_w1_squared = c.count ? sum_sq / static_cast<double>(c.count) : kNaN;
    c.median_w1 = median(w1);
    c.median_l2_beta_prime = median(l2b);
    c.median_l2_psi = median(l2p);
    c.median_alpha_error = median(ae);
    c.median_a_error = median(aa);
    rep.cells.push_back(c);
    if (c.count) {
      w1_by_t[c.t].push_back({ std::log(static_cast<double>(c.n)), std::log(c.mean_w1_squared) });
      l2_by_t[c.t].push_back(c.median_l2_beta_prime);
    }
  }
  for (const auto& [t, pts] : w1_by_t) {
    if (pts.size() < 2)
      continue;
    std::vector<double> x, y;
    for (const auto& [a, b] : pts) {
      x.push_back(a);
      y.push_back(b);
    }
    rep.w1_squared_slope[t] = ols_slope(x, y);
  }
  for (const auto& [t, v] : l2_by_t) {
    std::vector<double> ratios;
    for (std::size_t i = 1; i < v.size(); ++i)
      ratios.push_back(v[i] / v[i - 1]);
    rep.l2_beta_prime_ratios[t] = ratios;
  }
  return rep;
}

void
write_report(std::ostream& out, const RateReport& report)
{
  out << "# mvsde-report v1\n";
  out << "N,T,ok,failed,mean_W1_sq,median_W1,median_L2_beta_prime,median_L2_psi,median_alpha_error,median_a_error\n";
  for (const auto& c : report.cells) {
    out << c.n << ',' << format_double(c.t) << ',' << c.count << ',' << c.failures << ','
        << format_double(c.mean_w1_squared) << ',' << format_double(c.median_w1) << ','
        << format_double(c.median_l2_beta_prime) << ',' << format_double(c.median_l2_psi) << ','
        << format_double(c.median_alpha_error) << ',' << format_double(c.median_a_error) << '\n';
  }
  out << "\n# log-log slope of mean W1^2 against N\n";
  for (const auto& [t, s] : report.w1_squared_slope)
    out << "T=" << format_double(t) << " slope=" << format_double(s) << '\n';
  out << "\n# ratios of median L2 beta' error between consecutive N (raw; no rate constant is fitted,\n"
         "# the logarithmic rate is not observable at these sample sizes)\n";
  for (const auto& [t, r] : report.l2_beta_prime_ratios) {
    out << "T=" << format_double(t) << " ratios=";
    for (std::size_t i = 0; i < r.size(); ++i)
      out << (i ? ";" : "") << format_double(r[i]);
    out << '\n';
  }
}

} // namespace mvsde
