#pragma once

#include "mvsde/grid_function.hpp"
#include "mvsde/harness.hpp"
#include "mvsde/invariant.hpp"
#include "mvsde/kde.hpp"
#include "mvsde/model.hpp"
#include "mvsde/pipeline.hpp"
#include "mvsde/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mvsde {

//! Everything a config file may carry. Sections absent from the file keep
//! their defaults; `spec` stays empty without a spec section.
struct Config
{
  std::optional<DriftSpec> spec;
  SimConfig sim{};
  InvariantOptions invariant{};
  EstimatorConfig estimator{};
  ExperimentPlan experiment{};
};

//! YAML config. Relative paths inside (tabulated beta tables) resolve
//! against `base_dir`.
Config parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
Config load_config(const std::filesystem::path& path);

DriftSpec parse_spec_yaml(const std::string& text, const std::filesystem::path& base_dir = ".");
std::string spec_to_yaml(const DriftSpec& spec);

//! Text format: "# half_width <L>", "# n_points <n>", then one value per line.
void write_grid_function(std::ostream& out, const GridFunction& f);
GridFunction read_grid_function(std::istream& in);
//! Two-column CSV with header "y,value"; the grid is inferred from the
//! first and last abscissae.
void write_grid_csv(std::ostream& out, const GridFunction& f);
GridFunction read_grid_csv(std::istream& in);

//! By extension: ".csv" selects the CSV layout, anything else the text one.
void save_grid(const std::filesystem::path& path, const GridFunction& f);
GridFunction load_grid(const std::filesystem::path& path);

//! One value per line after "# key value" metadata lines.
void write_samples(std::ostream& out,
                   const std::vector<double>& values,
                   const std::map<std::string, std::string>& metadata = {});
std::vector<double> read_samples(std::istream& in);
std::vector<double> load_samples(const std::filesystem::path& path);

//! alpha.csv, a.csv, psi.csv, beta_prime.csv, pi_hat.csv, l_hat.csv and
//! diagnostics.yaml under `dir` (created if missing).
void write_estimation_result(const std::filesystem::path& dir, const EstimationResult& result);

//! Shortest round-trip representation of a double.
std::string format_number(double v);

} // namespace mvsde
