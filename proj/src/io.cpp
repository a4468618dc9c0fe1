#include "mvsde/io.hpp"

#include "mvsde/error.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mvsde {

namespace fs = std::filesystem;

namespace {

template<typename T>
void
read_if(const YAML::Node& node, const char* key, T& target)
{
  if (node && node[key])
    target = node[key].as<T>();
}

template<typename T>
void
read_if(const YAML::Node& node, const char* key, std::optional<T>& target)
{
  if (node && node[key] && !node[key].IsNull())
    target = node[key].as<T>();
}

DriftSpec
spec_from_node(const YAML::Node& n, const fs::path& base_dir)
{
  DriftShape shape;
  shape.j1 = n["j1"].as<int>(1);
  shape.j = n["j"].as<int>(shape.j1);
  if (n["theta"])
    shape.theta = n["theta"].as<std::vector<double>>();
  if (!n["a"])
    throw SpecError("spec: missing coefficient list 'a'");
  auto a = n["a"].as<std::vector<double>>();

  BetaSpec beta = BetaSpec::zero();
  if (const auto b = n["beta"]) {
    const auto family = beta_family_from_string(b["family"].as<std::string>("zero"));
    std::vector<double> params;
    if (b["params"])
      params = b["params"].as<std::vector<double>>();
    switch (family) {
      case BetaFamily::zero:
        break;
      case BetaFamily::cos_bump:
        if (params.size() != 1)
          throw SpecError("spec: cos-bump takes one parameter b");
        beta = BetaSpec::cos_bump(params[0]);
        break;
      case BetaFamily::sinc_power:
        if (params.size() != 1 || params[0] != std::floor(params[0]))
          throw SpecError("spec: sinc-power takes one integer parameter k");
        beta = BetaSpec::sinc_power(static_cast<int>(params[0]));
        break;
      case BetaFamily::tabulated: {
        if (!b["table"])
          throw SpecError("spec: tabulated beta needs 'table: <path>'");
        fs::path p = b["table"].as<std::string>();
        if (p.is_relative())
          p = base_dir / p;
        beta = BetaSpec::tabulated(load_grid(p));
        break;
      }
    }
  }
  std::optional<double> lambda;
  read_if(n, "lambda", lambda);
  return DriftSpec(std::move(shape), std::move(a), std::move(beta), lambda);
}

GridShape
grid_from_node(const YAML::Node& n, GridShape g)
{
  read_if(n, "half_width", g.half_width);
  read_if(n, "n_points", g.n_points);
  return g;
}

void
estimator_from_node(const YAML::Node& n, EstimatorConfig& e)
{
  read_if(n, "m", e.m);
  read_if(n, "h0", e.h0);
  read_if(n, "h1", e.h1);
  if (n["delta_mode"])
    e.delta_mode = delta_mode_from_string(n["delta_mode"].as<std::string>());
  read_if(n, "delta", e.delta);
  read_if(n, "U", e.U);
  read_if(n, "epsilon", e.epsilon);
  if (n["weight"])
    e.weight = weight_kind_from_string(n["weight"].as<std::string>());
  read_if(n, "symmetric_contrast", e.symmetric_contrast);
  read_if(n, "omega", e.omega);
  read_if(n, "z_max", e.z_max);
  read_if(n, "n_eff", e.n_eff);
  if (n["grid"])
    e.grid = grid_from_node(n["grid"], e.grid);
  if (const auto p = n["plugin"]) {
    PluginInputs in;
    in.alpha.j1 = p["j1"].as<int>(1);
    in.alpha.alpha = p["alpha"].as<std::vector<double>>();
    if (p["alpha0"])
      in.alpha.alpha0 = p["alpha0"].as<double>();
    read_if(p, "normalizer", in.normalizer);
    read_if(p, "beta_sup", in.beta_sup);
    e.plugin = in;
  }
}

InitialLaw
initial_law_from_node(const YAML::Node& n)
{
  InitialLaw law;
  const auto kind = n["kind"].as<std::string>("gaussian");
  if (kind == "gaussian")
    law.kind = InitialLaw::Kind::gaussian;
  else if (kind == "point-mass")
    law.kind = InitialLaw::Kind::point_mass;
  else
    throw std::invalid_argument("unknown initial law '" + kind + "'");
  read_if(n, "variance", law.variance);
  return law;
}

std::vector<std::string>
split_csv(const std::string& line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  return out;
}

double
parse_double(const std::string& s)
{
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  for (std::size_t i = used; i < s.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(s[i])))
      throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::ofstream
open_out(const fs::path& p)
{
  std::ofstream f(p);
  if (!f)
    throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::ifstream
open_in(const fs::path& p)
{
  std::ifstream f(p);
  if (!f)
    throw std::runtime_error("cannot read " + p.string());
  return f;
}

} // namespace

std::string
format_number(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Config
parse_config(const std::string& text, const fs::path& base_dir)
{
  const YAML::Node root = YAML::Load(text);
  Config cfg;
  if (root["spec"])
    cfg.spec = spec_from_node(root["spec"], base_dir);

  if (const auto s = root["sim"]) {
    read_if(s, "n", cfg.sim.n_particles);
    read_if(s, "T", cfg.sim.horizon);
    read_if(s, "dt", cfg.sim.dt);
    read_if(s, "seed", cfg.sim.seed);
    read_if(s, "stream", cfg.sim.stream);
    if (s["mu0"])
      cfg.sim.mu0 = initial_law_from_node(s["mu0"]);
  }
  if (const auto v = root["invariant"]) {
    read_if(v, "half_width", cfg.invariant.half_width);
    read_if(v, "n_points", cfg.invariant.n_points);
    read_if(v, "tol", cfg.invariant.tol);
    read_if(v, "max_iter", cfg.invariant.max_iter);
    read_if(v, "damping", cfg.invariant.damping);
  }
  if (root["estimator"])
    estimator_from_node(root["estimator"], cfg.estimator);

  auto& plan = cfg.experiment;
  if (cfg.spec)
    plan.spec = *cfg.spec;
  plan.dt = cfg.sim.dt;
  plan.mu0 = cfg.sim.mu0;
  plan.base_seed = cfg.sim.seed;
  plan.estimator = cfg.estimator;
  if (const auto x = root["experiment"]) {
    read_if(x, "n_list", plan.n_list);
    read_if(x, "t_list", plan.t_list);
    read_if(x, "dt", plan.dt);
    read_if(x, "replications", plan.replications);
    read_if(x, "base_seed", plan.base_seed);
    read_if(x, "run_estimator", plan.run_estimator);
    if (x["outputs"])
      plan.outputs = x["outputs"].as<std::string>();
  }
  return cfg;
}

Config
load_config(const fs::path& path)
{
  auto f = open_in(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

DriftSpec
parse_spec_yaml(const std::string& text, const fs::path& base_dir)
{
  const YAML::Node root = YAML::Load(text);
  return spec_from_node(root["spec"] ? root["spec"] : root, base_dir);
}

std::string
spec_to_yaml(const DriftSpec& spec)
{
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "j1" << YAML::Value << spec.j1();
  e << YAML::Key << "j" << YAML::Value << spec.j();
  e << YAML::Key << "a" << YAML::Value << YAML::Flow << spec.a();
  e << YAML::Key << "theta" << YAML::Value << YAML::Flow << spec.theta();
  e << YAML::Key << "beta" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "family" << YAML::Value << to_string(spec.beta().family());
  e << YAML::Key << "params" << YAML::Value << YAML::Flow << spec.beta().params();
  e << YAML::EndMap;
  e << YAML::Key << "lambda" << YAML::Value << spec.lambda();
  e << YAML::Key << "certificate" << YAML::Value << spec.certificate();
  e << YAML::EndMap;
  return e.c_str();
}

void
write_grid_function(std::ostream& out, const GridFunction& f)
{
  out << "# half_width " << format_number(f.half_width()) << '\n';
  out << "# n_points " << f.size() << '\n';
  for (double v : f.values())
    out << format_number(v) << '\n';
}

GridFunction
read_grid_function(std::istream& in)
{
  std::optional<double> L;
  std::optional<std::size_t> n;
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      if (key == "half_width") {
        double v;
        ss >> v;
        L = v;
      } else if (key == "n_points") {
        std::size_t v;
        ss >> v;
        n = v;
      }
      continue;
    }
    values.push_back(parse_double(line));
  }
  if (!L || !n)
    throw std::invalid_argument("grid file: missing half_width or n_points header");
  if (values.size() != *n)
    throw DimensionError("grid file: header says " + std::to_string(*n) + " values, found " +
                         std::to_string(values.size()));
  return GridFunction(GridShape{ *L, *n }, std::move(values));
}

void
write_grid_csv(std::ostream& out, const GridFunction& f)
{
  out << "y,value\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << format_number(f.x(i)) << ',' << format_number(f[i]) << '\n';
}

GridFunction
read_grid_csv(std::istream& in)
{
  std::vector<double> ys, values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("y,", 0) == 0)
      continue;
    const auto f = split_csv(line);
    if (f.size() != 2)
      throw std::invalid_argument("grid CSV: expected 2 columns");
    ys.push_back(parse_double(f[0]));
    values.push_back(parse_double(f[1]));
  }
  if (values.size() < 3)
    throw std::invalid_argument("grid CSV: too few rows");
  const double L = ys.back();
  if (std::abs(ys.front() + L) > 1e-9 * std::max(1.0, L))
    throw std::invalid_argument("grid CSV: abscissae are not symmetric");
  const GridShape shape{ L, values.size() };
  return GridFunction(shape, std::move(values));
}

void
save_grid(const fs::path& path, const GridFunction& f)
{
  auto out = open_out(path);
  if (path.extension() == ".csv")
    write_grid_csv(out, f);
  else
    write_grid_function(out, f);
}

GridFunction
load_grid(const fs::path& path)
{
  auto in = open_in(path);
  return path.extension() == ".csv" ? read_grid_csv(in) : read_grid_function(in);
}

void
write_samples(std::ostream& out, const std::vector<double>& values, const std::map<std::string, std::string>& metadata)
{
  for (const auto& [k, v] : metadata)
    out << "# " << k << ' ' << v << '\n';
  for (double v : values)
    out << format_number(v) << '\n';
}

std::vector<double>
read_samples(std::istream& in)
{
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    out.push_back(parse_double(line));
  }
  return out;
}

std::vector<double>
load_samples(const fs::path& path)
{
  auto in = open_in(path);
  return read_samples(in);
}

void
write_estimation_result(const fs::path& dir, const EstimationResult& r)
{
  fs::create_directories(dir);
  auto write_vector = [&](const char* name, const std::vector<double>& v) {
    auto out = open_out(dir / name);
    out << "j,value\n";
    for (std::size_t i = 0; i < v.size(); ++i)
      out << i + 1 << ',' << format_number(v[i]) << '\n';
  };
  write_vector("alpha.csv", r.alpha_hat);
  write_vector("a.csv", r.a_hat);
  save_grid(dir / "psi.csv", r.psi_hat);
  save_grid(dir / "beta_prime.csv", r.beta_prime_hat);
  save_grid(dir / "pi_hat.csv", r.pi_hat);
  save_grid(dir / "l_hat.csv", r.l_hat);

  const auto& d = r.diagnostics;
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "condition_number" << YAML::Value << d.condition_number;
  e << YAML::Key << "surviving_fraction" << YAML::Value << d.surviving_fraction;
  e << YAML::Key << "degenerate" << YAML::Value << d.degenerate;
  e << YAML::Key << "delta" << YAML::Value << d.delta;
  e << YAML::Key << "n_eff" << YAML::Value << d.n_eff;
  e << YAML::Key << "h0" << YAML::Value << d.h0;
  e << YAML::Key << "h1" << YAML::Value << d.h1;
  e << YAML::Key << "U" << YAML::Value << d.U;
  e << YAML::Key << "omega" << YAML::Value << d.omega;
  e << YAML::Key << "z_max" << YAML::Value << d.z_max;
  e << YAML::EndMap;
  auto out = open_out(dir / "diagnostics.yaml");
  out << e.c_str() << '\n';
}

} // namespace mvsde
