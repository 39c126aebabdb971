#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtnlab/error.hpp"
#include "dtnlab/geometry.hpp"

namespace dtnlab {

enum class ExperimentKind { dtn_validate, recover_sigma, decay_profile, stability_sweep, liouville, spectral, density };
std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

/// A conductivity written as "family p1 p2 ...".
struct ConductivitySpec {
  std::string family;  // empty -> experiment default
  std::vector<double> params;
};

/// Resolved scenario. Defaults depend on the experiment; see docs/formats.md.
struct ScenarioConfig {
  ExperimentKind experiment = ExperimentKind::dtn_validate;
  std::optional<DomainKind> domain;  // empty -> experiment default
  std::vector<int> meshes;  // cube cells per axis or ball levels; several for refinement studies
  ConductivitySpec conductivity;
  ConductivitySpec reference;  // second member of pairs, sigma = 1 by default
  std::vector<Vec3> probes;
  std::vector<int> ks;
  std::vector<double> deltas;
  std::vector<double> rhos;
  std::vector<double> amplitudes;  // stability-sweep family scales
  double alpha = 1.0;
  int eigen_count = 0;
  int battery_mesh = -1;  // 0 disables the dense DtN battery, -1 -> default
  int samples = 0;
  std::vector<int> norm_meshes;  // spectral: norm-equivalence eigenvalue meshes
  double epsilon = 1e-3;
  std::vector<std::string> methods;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;

  /// Every field as key = value lines, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Parses key = value lines ('#' starts a comment) over the given base.
/// Unknown keys and malformed values are usage errors.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base);
ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base);
/// Fills experiment-dependent defaults for empty lists and checks ranges.
ScenarioConfig resolve_config(ScenarioConfig config);

/// One CSV table; cells are preformatted text.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Whitespace-separated plot data.
struct PlotData {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Bundle {
  ExperimentKind experiment = ExperimentKind::dtn_validate;
  std::vector<Table> tables;
  std::vector<PlotData> plots;
  std::string summary;  // JSON text
  std::vector<std::pair<std::string, std::string>> files;  // extra outputs: file name, contents
};

/// Error raised by run_scenario with the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Shortest text that reads back to the same double.
std::string format_real(double x);
/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
void write_csv(std::ostream& out, const Table& table);

/// Runs the experiment; nothing is written.
Bundle run_scenario(const ScenarioConfig& config);
/// Writes <name>.csv per table and summary.json into dir.
void write_bundle(const Bundle& bundle, const std::filesystem::path& dir);
/// Writes plot/<name>.dat per plot and manifest.txt; returns the manifest entries.
std::vector<std::string> export_report(const Bundle& bundle, const std::filesystem::path& dir);

}  // namespace dtnlab
