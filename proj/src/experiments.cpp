#include "dtnlab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>

#include "dtnlab/density.hpp"
#include "dtnlab/dtn.hpp"
#include "dtnlab/fit.hpp"
#include "dtnlab/kernels.hpp"
#include "dtnlab/liouville.hpp"
#include "dtnlab/recovery.hpp"
#include "dtnlab/trace_space.hpp"

namespace dtnlab {

using Json = nlohmann::ordered_json;

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kExperimentNames = {
    {ExperimentKind::dtn_validate, "dtn-validate"},       {ExperimentKind::recover_sigma, "recover-sigma"},
    {ExperimentKind::decay_profile, "decay-profile"},     {ExperimentKind::stability_sweep, "stability-sweep"},
    {ExperimentKind::liouville, "liouville"},             {ExperimentKind::spectral, "spectral"},
    {ExperimentKind::density, "density"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorKind::usage, "config key '" + key + "': " + why + " (got '" + value + "')");
}

double parse_real(const std::string& key, const std::string& w) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(w, &used);
  } catch (const std::exception&) {
    bad_value(key, w, "expected a number");
  }
  if (used != w.size() || !std::isfinite(v)) bad_value(key, w, "expected a finite number");
  return v;
}

long long parse_integer(const std::string& key, const std::string& w) {
  size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(w, &used);
  } catch (const std::exception&) {
    bad_value(key, w, "expected an integer");
  }
  if (used != w.size()) bad_value(key, w, "expected an integer");
  return v;
}

std::vector<double> parse_reals(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& w : split_words(value)) out.push_back(parse_real(key, w));
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& w : split_words(value)) {
    const auto v = parse_integer(key, w);
    if (v < 1 || v > 1000000) bad_value(key, w, "expected a positive integer");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

ConductivitySpec parse_conductivity_spec(const std::string& key, const std::string& value) {
  const auto words = split_words(value);
  if (words.empty()) bad_value(key, value, "expected 'family p1 p2 ...'");
  ConductivitySpec spec;
  spec.family = words[0];
  for (size_t i = 1; i < words.size(); ++i) spec.params.push_back(parse_real(key, words[i]));
  return spec;
}

std::vector<Vec3> parse_points(const std::string& key, const std::string& value) {
  std::vector<Vec3> out;
  std::istringstream in(value);
  for (std::string item; std::getline(in, item, ';');) {
    if (trim(item).empty()) continue;
    const auto xs = parse_reals(key, item);
    if (xs.size() != 3) bad_value(key, item, "points need three coordinates");
    out.emplace_back(xs[0], xs[1], xs[2]);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f, const char* sep = " ") {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + f(xs[i]);
  return out;
}

std::string spec_text(const ConductivitySpec& c) {
  std::string out = c.family;
  for (double p : c.params) out += " " + format_real(p);
  return out;
}

std::string point_text(const Vec3& p) {
  return format_real(p.x()) + " " + format_real(p.y()) + " " + format_real(p.z());
}

Conductivity make(const ConductivitySpec& spec) { return make_conductivity(spec.family, spec.params); }

int ceil_pow2(double x) {
  int k = 1;
  while (k < x) k *= 2;
  return k;
}

Mesh build_mesh(DomainKind kind, int n) { return kind == DomainKind::cube ? build_cube_mesh(n) : build_ball_mesh(n); }

/// Runs fn, tagging library errors with the stage name.
template <class F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

Json fit_json(const std::optional<ExponentFit>& f) {
  if (!f) return nullptr;
  return Json{{"slope", f->slope}, {"intercept", f->intercept}, {"ci95", f->ci95}, {"points", f->points}};
}

std::optional<ExponentFit> try_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 3) return std::nullopt;
  return fit_exponent(x, y);
}

std::string r(double x) { return format_real(x); }

std::string probe_label(size_t i) { return "p" + std::to_string(i); }

// dtn-validate ---------------------------------------------------------------

void run_dtn_validate(const ScenarioConfig& cfg, Bundle& b, Json& res) {
  const DomainKind kind = *cfg.domain;
  const Conductivity cond = stage("conductivity", [&] { return make(cfg.conductivity); });
  const int n = cfg.meshes.back();
  const Mesh mesh = stage("mesh", [&] { return build_mesh(kind, n); });
  const Vector ev = stage("steklov", [&] { return steklov_spectrum(mesh, cond, cfg.eigen_count); });

  // sigma = c on the ball: eigenvalue c*l with multiplicity 2l+1
  std::optional<double> scale;
  if (kind == DomainKind::ball && cfg.conductivity.family == "constant") scale = cfg.conductivity.params.at(0);

  Table spectrum{"spectrum", {"index", "lambda", "l", "exact", "rel_error"}, {}};
  PlotData plot{"spectrum", {"index", "lambda", "exact"}, {}};
  Json per_l = Json::array();
  double worst = 0.0;
  int l = 0, next = 1;
  std::map<int, double> l_err;
  for (int i = 0; i < ev.size(); ++i) {
    if (scale && i == next) next += 2 * (++l) + 1;
    if (scale) {
      const double exact = *scale * l;
      const double err = l == 0 ? std::abs(ev(i)) / *scale : std::abs(ev(i) - exact) / exact;
      if (l > 0) {
        l_err[l] = std::max(l_err[l], err);
        if (i < next && next <= ev.size()) worst = std::max(worst, err);
      }
      spectrum.rows.push_back({std::to_string(i), r(ev(i)), std::to_string(l), r(exact), r(err)});
      plot.rows.push_back({double(i), ev(i), exact});
    } else {
      spectrum.rows.push_back({std::to_string(i), r(ev(i)), "", "", ""});
      plot.rows.push_back({double(i), ev(i), NAN});
    }
  }
  for (const auto& [ll, e] : l_err) {
    const bool complete = ll * ll + 2 * ll + 1 <= ev.size();
    if (complete) per_l.push_back(Json{{"l", ll}, {"max_rel_error", e}});
  }
  b.tables.push_back(spectrum);
  b.plots.push_back(plot);
  res["mesh"] = {{"id", mesh.id}, {"h", mesh.h}, {"vertices", mesh.num_vertices()}, {"boundary", mesh.num_boundary()}};
  res["eigenvalues"] = ev.size();
  if (scale) {
    res["spectrum_errors"] = per_l;
    res["max_rel_error"] = worst;
  }

  if (cfg.battery_mesh <= 0) return;
  const Mesh small = stage("battery-mesh", [&] { return build_mesh(kind, cfg.battery_mesh); });
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  auto random_trace = [&] {
    Vector g(small.num_boundary());
    for (int i = 0; i < g.size(); ++i) g(i) = normal(rng);
    return g;
  };
  auto random_conductivity = [&] {
    Vec3 c;
    do {
      c = Vec3(unit(rng), unit(rng), unit(rng));
      if (kind == DomainKind::ball) c = 2.0 * c - Vec3::Ones();
    } while (!domain_contains(kind, c));
    const double width = 0.2 + 0.3 * unit(rng);
    const double amp = -0.5 + 1.5 * unit(rng);
    return gaussian_bump(c, width, amp);
  };

  Json battery;
  const DtnOperator l1 = stage("battery-dtn", [&] { return assemble_dtn(small, cond); });
  const double scale_l = l1.matrix.cwiseAbs().maxCoeff();
  battery["symmetry"] = (l1.matrix - l1.matrix.transpose()).cwiseAbs().maxCoeff() / scale_l;
  battery["conservation"] = (l1.matrix * Vector::Ones(small.num_boundary())).cwiseAbs().maxCoeff() / scale_l;
  {
    Conductivity doubled = cond;
    doubled.id += "*2";
    const auto base = cond.sigma;
    const auto grad = cond.grad_sigma;
    doubled.sigma = [base](const Vec3& x) { return 2.0 * base(x); };
    doubled.grad_sigma = [grad](const Vec3& x) { return (2.0 * grad(x)).eval(); };
    doubled.kappa = 2.0 * cond.kappa;
    const DtnOperator l2 = stage("battery-dtn", [&] { return assemble_dtn(small, doubled); });
    battery["linearity"] = (l2.matrix - 2.0 * l1.matrix).cwiseAbs().maxCoeff() / (2.0 * scale_l);
  }
  double energy_gap = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Vector g = random_trace();
    const double pair = l1.pairing(g, g);
    const double q = energy(small, cond, solve_dirichlet(small, cond, g));
    energy_gap = std::max(energy_gap, std::abs(pair - q) / (1.0 + std::abs(q)));
  }
  battery["energy_identity"] = energy_gap;

  Table ales{"alessandrini", {"tuple", "sigma1", "sigma2", "lhs", "rhs", "rel_gap"}, {}};
  double worst_ales = 0.0;
  for (int t = 0; t < cfg.samples; ++t) {
    const Conductivity c1 = random_conductivity();
    const Conductivity c2 = random_conductivity();
    const Vector g = random_trace();
    const Vector h = random_trace();
    const auto a = stage("alessandrini", [&] { return alessandrini_residual(small, c1, c2, g, h); });
    const double gap = std::abs(a.lhs - a.rhs) / (1.0 + std::abs(a.lhs));
    worst_ales = std::max(worst_ales, gap);
    ales.rows.push_back({std::to_string(t), c1.id, c2.id, r(a.lhs), r(a.rhs), r(gap)});
  }
  b.tables.push_back(ales);
  battery["alessandrini_max_rel_gap"] = worst_ales;
  battery["mesh"] = small.id;
  res["battery"] = battery;
}

// recover-sigma --------------------------------------------------------------

void run_recover_sigma(const ScenarioConfig& cfg, Bundle& b, Json& res) {
  const DomainKind kind = *cfg.domain;
  const Conductivity cond = stage("conductivity", [&] { return make(cfg.conductivity); });
  const Conductivity one = constant_conductivity(1.0);
  const Mesh mesh = stage("mesh", [&] { return build_mesh(kind, cfg.meshes.back()); });
  std::vector<int> ks = cfg.ks;
  if (ks.empty()) {
    for (int k = 1; k <= max_resolvable_k(mesh); k *= 2) ks.push_back(k);
  }
  for (int k : ks) stage("k-range", [&] { require_resolvable(mesh, k); });
  const DtnQuadraticForm q_sigma = stage("solve", [&] { return DtnQuadraticForm(mesh, cond); });
  const DtnQuadraticForm q_one = stage("solve", [&] { return DtnQuadraticForm(mesh, one); });

  Table kv{"kv", {"probe", "x", "y", "z", "k", "sigma_true", "sigma_hat", "rel_error"}, {}};
  Table sing{"singular",
             {"probe", "delta", "sigma_true", "sigma_hat", "rel_error", "energy_sigma", "energy_one", "pole_energy"},
             {}};
  Json probes = Json::array();
  for (size_t p = 0; p < cfg.probes.size(); ++p) {
    const Probe probe = stage("probe", [&] { return make_probe(kind, cfg.probes[p]); });
    const double truth = cond.sigma(probe.x0);
    PlotData kv_plot{"kv_" + probe_label(p), {"k", "sigma_hat"}, {}};
    PlotData sing_plot{"singular_" + probe_label(p), {"delta", "sigma_hat"}, {}};
    std::vector<double> errors;
    double finest = NAN;
    for (int k : ks) {
      const double est = stage("kv-estimate", [&] { return kv_estimate_sigma(q_sigma, q_one, psi_profile(mesh, probe, k)); });
      const double err = std::abs(est - truth) / truth;
      errors.push_back(err);
      finest = est;
      kv.rows.push_back({probe_label(p), r(probe.x0.x()), r(probe.x0.y()), r(probe.x0.z()), std::to_string(k), r(truth),
                         r(est), r(err)});
      kv_plot.rows.push_back({double(k), est});
    }
    bool monotone = true;
    for (size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] < errors[i - 1];
    Json sj = Json::array();
    for (double delta : cfg.deltas) {
      const auto s = stage("singular-estimate", [&] {
        return singular_estimate_sigma(mesh, q_sigma, q_one, make_pole(kind, probe, delta));
      });
      const double err = std::abs(s.sigma_hat - truth) / truth;
      sing.rows.push_back({probe_label(p), r(delta), r(truth), r(s.sigma_hat), r(err), r(s.energy_sigma),
                           r(s.energy_one), r(s.pole_energy)});
      sing_plot.rows.push_back({delta, s.sigma_hat});
      sj.push_back(Json{{"delta", delta},
                        {"sigma_hat", s.sigma_hat},
                        {"rel_error", err},
                        {"gap_to_kv", std::abs(s.sigma_hat - finest) / std::abs(finest)}});
    }
    b.plots.push_back(kv_plot);
    b.plots.push_back(sing_plot);
    probes.push_back(Json{{"probe", probe_label(p)},
                          {"x0", {probe.x0.x(), probe.x0.y(), probe.x0.z()}},
                          {"sigma_true", truth},
                          {"kv_finest", finest},
                          {"kv_finest_rel_error", errors.empty() ? NAN : errors.back()},
                          {"kv_monotone", monotone},
                          {"singular", sj}});
  }
  b.tables.push_back(kv);
  b.tables.push_back(sing);
  res["mesh"] = {{"id", mesh.id}, {"h", mesh.h}};
  res["ks"] = ks;
  res["probes"] = probes;
}

// decay-profile --------------------------------------------------------------

void run_decay_profile(const ScenarioConfig& cfg, Bundle& b, Json& res) {
  const DomainKind kind = *cfg.domain;
  const Conductivity cond = stage("conductivity", [&] { return make(cfg.conductivity); });
  const Mesh mesh = stage("mesh", [&] { return build_mesh(kind, cfg.meshes.back()); });
  const LanczosTraceNorm norms(mesh);
  const int kmax = max_resolvable_k(mesh);
  const double rho_min = *std::min_element(cfg.rhos.begin(), cfg.rhos.end());
  std::vector<int> ks = cfg.ks;
  if (ks.empty()) {
    for (int k = ceil_pow2(2.0 * kPsiSupport / rho_min); k <= kmax; k *= 2) ks.push_back(k);
  }
  for (int k : ks) stage("k-range", [&] { require_resolvable(mesh, k); });

  Table norm_table{"psi_norms", {"probe", "k", "h_half", "l2", "h_minus_half"}, {}};
  Table decay{"decay", {"probe", "k", "rho", "h1_outside", "grad_inside", "dist_weighted_inside"}, {}};
  Json probes = Json::array();
  for (size_t p = 0; p < cfg.probes.size(); ++p) {
    const Probe probe = stage("probe", [&] { return make_probe(kind, cfg.probes[p]); });

    // norm scalings over the whole resolvable dyadic window
    PlotData nplot{"psi_norms_" + probe_label(p), {"k", "h_half", "l2", "h_minus_half"}, {}};
    std::vector<double> kx;
    std::array<std::vector<double>, 3> ny;
    for (int k = 1; k <= kmax; k *= 2) {
      const auto datum = stage("psi", [&] { return build_psi_k(mesh, norms, probe, k); });
      const double n[3] = {norms.hs_norm(datum.trace, 0.5), norms.hs_norm(datum.trace, 0.0),
                           norms.hs_norm(datum.trace, -0.5)};
      kx.push_back(k);
      for (int i = 0; i < 3; ++i) ny[i].push_back(n[i]);
      norm_table.rows.push_back({probe_label(p), std::to_string(k), r(n[0]), r(n[1]), r(n[2])});
      nplot.rows.push_back({double(k), n[0], n[1], n[2]});
    }
    b.plots.push_back(nplot);
    Json nfit;
    const char* names[3] = {"s=-1/2", "s=0", "s=1/2"};
    for (int i = 0; i < 3; ++i) nfit[names[i]] = Json{{"expected", -0.5 * i}, {"fit", fit_json(try_fit(kx, ny[i]))}};

    const auto profile = stage("decay", [&] { return exterior_decay_profile(mesh, cond, norms, probe, ks, cfg.rhos); });
    Json fits = Json::array();
    for (double rho : cfg.rhos) {
      std::vector<std::pair<int, const DecayPoint*>> pts;
      for (const auto& d : profile)
        if (d.rho == rho) pts.emplace_back(d.k, &d);
      std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      PlotData plot{"decay_" + probe_label(p) + "_rho" + r(rho), {"k", "h1_outside"}, {}};
      std::vector<double> x, y, yd;
      for (const auto& [k, d] : pts) {
        plot.rows.push_back({double(k), d->h1_outside});
        x.push_back(k);
        y.push_back(d->h1_outside);
        yd.push_back(d->dist_weighted_inside);
      }
      b.plots.push_back(plot);
      fits.push_back(Json{{"rho", rho}, {"h1_outside", fit_json(try_fit(x, y))},
                          {"dist_weighted_inside", fit_json(try_fit(x, yd))}});
    }
    for (const auto& d : profile) {
      decay.rows.push_back({probe_label(p), std::to_string(d.k), r(d.rho), r(d.h1_outside), r(d.grad_inside),
                            r(d.dist_weighted_inside)});
    }
    probes.push_back(Json{{"probe", probe_label(p)},
                          {"x0", {probe.x0.x(), probe.x0.y(), probe.x0.z()}},
                          {"norm_fits", nfit},
                          {"decay_fits", fits}});
  }
  b.tables.push_back(norm_table);
  b.tables.push_back(decay);
  res["mesh"] = {{"id", mesh.id}, {"h", mesh.h}};
  res["ks"] = ks;
  res["probes"] = probes;
}

// stability-sweep ------------------------------------------------------------

void run_stability_sweep(const ScenarioConfig& cfg, Bundle& b, Json& res) {
  const DomainKind kind = *cfg.domain;
  const Mesh mesh = stage("mesh", [&] { return build_mesh(kind, cfg.meshes.back()); });
  const Conductivity reference = stage("conductivity", [&] { return make(cfg.reference); });
  std::vector<ConductivityPair> pairs;
  for (double a : cfg.amplitudes) {
    ConductivitySpec spec = cfg.conductivity;
    spec.params.at(4) = a;
    pairs.push_back({"amplitude=" + r(a), stage("conductivity", [&] { return make(spec); }), reference, cfg.alpha});
  }
  const TraceBasis basis = stage("trace-basis", [&] { return TraceBasis(mesh); });
  const StabilitySweep sweep = stage("sweep", [&] { return stability_sweep(mesh, basis, pairs); });

  Table t{"sweep", {"pair_id", "sup_gap", "normal_gap", "dtn_gap", "h1_gap", "h", "alpha"}, {}};
  PlotData plot{"sweep", {"dtn_gap", "sup_gap", "normal_gap"}, {}};
  std::vector<std::pair<double, double>> log_points;
  for (size_t i = 0; i < sweep.records.size(); ++i) {
    const auto& rec = sweep.records[i];
    const double h1 = stage("h1-gap", [&] { return h1_gap(mesh, pairs[i].first, pairs[i].second); });
    if (rec.dtn_gap > 0.0) log_points.emplace_back(h1, rec.dtn_gap);
    t.rows.push_back({rec.pair_id, r(rec.sup_gap), r(rec.normal_gap), r(rec.dtn_gap), r(h1), r(rec.h), r(rec.alpha)});
    plot.rows.push_back({rec.dtn_gap, rec.sup_gap, rec.normal_gap});
  }
  std::sort(plot.rows.begin(), plot.rows.end());
  b.tables.push_back(t);
  b.plots.push_back(plot);
  res["mesh"] = {{"id", mesh.id}, {"h", mesh.h}};
  res["sup_fit"] = fit_json(sweep.sup_fit);
  res["normal_fit"] = fit_json(sweep.normal_fit);
  res["normal_exponent_direct"] = cfg.alpha / (cfg.alpha + 1.0);
  res["normal_exponent_weak"] = cfg.alpha / (2.0 * (1.0 + cfg.alpha));
  if (!log_points.empty()) {
    const auto check = log_stability_check(log_points);
    res["log_stability"] = {{"constant", check.constant}, {"monotone", check.monotone}};
  }
}

// liouville ------------------------------------------------------------------

void run_liouville(const ScenarioConfig& cfg, Bundle& b, Json& res) {
  const DomainKind kind = *cfg.domain;
  const Conductivity cond = stage("conductivity", [&] { return make(cfg.conductivity); });
  const Conductivity reference = stage("conductivity", [&] { return make(cfg.reference); });
  Table t{"residuals", {"mesh", "h", "liouville", "transformed_dtn", "log_ratio", "elliptic_estimate_constant"}, {}};
  PlotData plot{"residuals", {"h", "liouville", "transformed_dtn", "log_ratio"}, {}};
  std::vector<std::array<double, 3>> values;
  std::vector<double> constants;
  for (int n : cfg.meshes) {
    const Mesh mesh = stage("mesh", [&] { return build_mesh(kind, n); });
    const Vector g = boundary_trace(mesh, [](const Vec3& x) { return std::cos(x.x()) + x.y() * x.z(); });
    const double lr = stage("liouville", [&] { return liouville_residual(mesh, cond, g); });
    const TraceBasis basis = stage("trace-basis", [&] { return TraceBasis(mesh); });
    const double tdtn = stage("transformed-dtn", [&] { return transformed_dtn_residual(mesh, basis, cond); });
    const double logr = stage("log-ratio", [&] { return log_ratio_residual(mesh, cond, reference); });
    const double ellc = stage("elliptic-constant", [&] { return elliptic_estimate_constant(mesh, cond, cfg.samples, cfg.seed); });
    values.push_back({lr, tdtn, logr});
    constants.push_back(ellc);
    t.rows.push_back({mesh.id, r(mesh.h), r(lr), r(tdtn), r(logr), r(ellc)});
    plot.rows.push_back({mesh.h, lr, tdtn, logr});
  }
  b.tables.push_back(t);
  b.plots.push_back(plot);
  Json ratios = Json::array();
  for (size_t i = 1; i < values.size(); ++i) {
    auto ratio = [&](int j) { return values[i][j] > 0.0 ? values[i - 1][j] / values[i][j] : NAN; };
    ratios.push_back(Json{{"liouville", ratio(0)},
                          {"transformed_dtn", ratio(1)},
                          {"log_ratio", ratio(2)},
                          {"elliptic_estimate_constant", constants[i] / constants[i - 1]}});
  }
  res["refinement_ratios"] = ratios;
  res["datum"] = "cos(x1) + x2 x3";
}

// spectral -------------------------------------------------------------------

void run_spectral(const ScenarioConfig& cfg, Bundle& b, Json& res) {
  const DomainKind kind = *cfg.domain;
  const Conductivity cond = stage("conductivity", [&] { return make(cfg.conductivity); });
  std::optional<double> exact;
  if (kind == DomainKind::cube && cfg.conductivity.family == "constant")
    exact = 3.0 * M_PI * M_PI * cfg.conductivity.params.at(0);
  Table t{"eigen", {"mesh", "h", "lambda1", "lambda2", "ratio_min", "ratio_max", "residual", "exact"}, {}};
  PlotData plot{"eigen", {"h", "lambda1"}, {}};
  Json meshes = Json::array();
  for (size_t i = 0; i < cfg.meshes.size(); ++i) {
    const Mesh mesh = stage("mesh", [&] { return build_mesh(kind, cfg.meshes[i]); });
    const EigenPair ep = stage("eigenpair", [&] { return smallest_eigenpair(mesh, cond); });
    const double l2 = stage("second-eigenvalue", [&] { return second_eigenvalue(mesh, cond, ep); });
    const DistanceRatio dr = distance_ratio(mesh, ep.phi1);
    const double min_phi = [&] {
      double m = INFINITY;
      for (int v : mesh.interior_vertices) m = std::min(m, ep.phi1(v));
      return m;
    }();
    t.rows.push_back({mesh.id, r(mesh.h), r(ep.lambda1), r(l2), r(dr.min), r(dr.max), r(ep.residual),
                      exact ? r(*exact) : ""});
    plot.rows.push_back({mesh.h, ep.lambda1});
    Json m{{"mesh", mesh.id},
           {"lambda1", ep.lambda1},
           {"lambda2", l2},
           {"min_interior_phi", min_phi},
           {"distance_ratio", dr.max / dr.min},
           {"residual", ep.residual}};
    if (exact) m["rel_error"] = std::abs(ep.lambda1 - *exact) / *exact;
    meshes.push_back(m);
    if (i + 1 == cfg.meshes.size()) {
      Table phi{"phi1", {"vertex", "x", "y", "z", "phi"}, {}};
      for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec3& x = mesh.vertices[v];
        phi.rows.push_back({std::to_string(v), r(x.x()), r(x.y()), r(x.z()), r(ep.phi1(v))});
      }
      b.tables.push_back(phi);
    }
  }
  b.tables.push_back(t);
  b.plots.push_back(plot);
  res["meshes"] = meshes;
  if (exact) res["exact"] = *exact;

  if (cfg.norm_meshes.empty()) return;
  Table ne{"norm_equivalence", {"mesh", "h", "lambda", "iterations"}, {}};
  Json nj = Json::array();
  for (int n : cfg.norm_meshes) {
    const Mesh mesh = stage("mesh", [&] { return build_mesh(kind, n); });
    const TraceBasis basis = stage("trace-basis", [&] { return TraceBasis(mesh); });
    const auto eq = stage("norm-equivalence", [&] { return norm_equivalence_eigenvalue(mesh, basis); });
    ne.rows.push_back({mesh.id, r(mesh.h), r(eq.lambda), std::to_string(eq.iterations)});
    nj.push_back(Json{{"mesh", mesh.id}, {"lambda", eq.lambda}});
  }
  b.tables.push_back(ne);
  res["norm_equivalence"] = nj;
}

// density --------------------------------------------------------------------

Conductivity approximant_conductivity(const DenseApproximant& chi, const std::string& id) {
  Conductivity c;
  c.id = "approximant(" + id + ")";
  auto eval = [chi](const Vec3& x) { return chi.evaluate({x})[0]; };
  c.sigma = eval;
  c.grad_sigma = [eval](const Vec3& x) {
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = 1e-6;
      g[i] = (eval(x + e) - eval(x - e)) / 2e-6;
    }
    return g;
  };
  c.kappa = 1.0 / chi.min_value;
  return c;
}

void run_density(const ScenarioConfig& cfg, Bundle& b, Json& res) {
  const DomainKind kind = *cfg.domain;
  const Conductivity cond = stage("conductivity", [&] { return make(cfg.conductivity); });
  Table t{"density", {"method", "k", "a", "b", "epsilon", "sup_error", "min_value", "dtn_gap"}, {}};
  Json methods = Json::array();
  std::optional<Mesh> mesh;
  std::optional<TraceBasis> basis;
  std::optional<DtnOperator> l_sigma;
  for (const auto& name : cfg.methods) {
    const DensityMethod method = stage("config", [&] { return parse_density_method(name); });
    const DenseApproximant chi = stage("approximant", [&] { return dense_approximant(cond, kind, cfg.epsilon, method); });
    std::optional<double> gap;
    // DtN comparison only on the cube, where the approximant is cheap to sample at centroids
    if (kind == DomainKind::cube && !cfg.meshes.empty()) {
      if (!mesh) {
        mesh = stage("mesh", [&] { return build_mesh(kind, cfg.meshes.back()); });
        basis.emplace(stage("trace-basis", [&] { return TraceBasis(*mesh); }));
        l_sigma = stage("dtn", [&] { return assemble_dtn(*mesh, cond); });
      }
      Conductivity cc = approximant_conductivity(chi, cond.id);
      cc.kappa = std::max(cc.kappa, cond.kappa + cfg.epsilon);
      const DtnOperator l_chi = stage("dtn", [&] { return assemble_dtn(*mesh, cc); });
      gap = dtn_diff_norm(*basis, *l_sigma, l_chi);
    }
    t.rows.push_back({name, std::to_string(chi.k), r(chi.a), r(chi.b), r(cfg.epsilon), r(chi.sup_error),
                      r(chi.min_value), gap ? r(*gap) : ""});
    Json m{{"method", name}, {"k", chi.k}, {"sup_error", chi.sup_error}, {"min_value", chi.min_value},
           {"positive", chi.min_value > 0.0}};
    m["dtn_gap"] = gap ? Json(*gap) : Json(nullptr);
    methods.push_back(m);
    if (chi.lattice) {
      std::ostringstream os;
      write_approximant_json(os, chi, cond.id);
      b.files.emplace_back("approximant_" + name + ".json", os.str());
    }
  }
  b.tables.push_back(t);
  res["methods"] = methods;
}

void check_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kExperimentNames)
    if (n == name) return k;
  throw Error(ErrorKind::usage, "unknown experiment '" + name + "'");
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.kind(), cause.what()), stage_(std::move(stage)) {}

std::string format_real(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv(std::ostream& out, const Table& table) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << "\r\n";
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::entries() const {
  auto ints = [](const std::vector<int>& v) { return join<int>(v, [](const int& x) { return std::to_string(x); }); };
  auto reals = [](const std::vector<double>& v) { return join<double>(v, [](const double& x) { return format_real(x); }); };
  return {
      {"experiment", to_string(experiment)},
      {"domain", domain ? to_string(*domain) : ""},
      {"mesh", ints(meshes)},
      {"conductivity", spec_text(conductivity)},
      {"reference", spec_text(reference)},
      {"probes", join<Vec3>(probes, point_text, "; ")},
      {"k", ints(ks)},
      {"delta", reals(deltas)},
      {"rho", reals(rhos)},
      {"amplitudes", reals(amplitudes)},
      {"alpha", format_real(alpha)},
      {"eigen_count", std::to_string(eigen_count)},
      {"battery_mesh", std::to_string(battery_mesh)},
      {"samples", std::to_string(samples)},
      {"norm_meshes", ints(norm_meshes)},
      {"epsilon", format_real(epsilon)},
      {"methods", join<std::string>(methods, [](const std::string& s) { return s; })},
      {"out", out.generic_string()},
      {"seed", std::to_string(seed)},
  };
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig c) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::usage, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "experiment") {
      c.experiment = parse_experiment(value);
    } else if (key == "domain") {
      c.domain = parse_domain_kind(value);
    } else if (key == "mesh") {
      c.meshes = parse_ints(key, value);
    } else if (key == "conductivity") {
      c.conductivity = parse_conductivity_spec(key, value);
    } else if (key == "reference") {
      c.reference = parse_conductivity_spec(key, value);
    } else if (key == "probes") {
      c.probes = parse_points(key, value);
    } else if (key == "k") {
      c.ks = parse_ints(key, value);
    } else if (key == "delta") {
      c.deltas = parse_reals(key, value);
    } else if (key == "rho") {
      c.rhos = parse_reals(key, value);
    } else if (key == "amplitudes") {
      c.amplitudes = parse_reals(key, value);
    } else if (key == "alpha") {
      c.alpha = parse_real(key, value);
    } else if (key == "eigen_count") {
      c.eigen_count = static_cast<int>(parse_integer(key, value));
    } else if (key == "battery_mesh") {
      c.battery_mesh = static_cast<int>(parse_integer(key, value));
    } else if (key == "samples") {
      c.samples = static_cast<int>(parse_integer(key, value));
    } else if (key == "norm_meshes") {
      c.norm_meshes = parse_ints(key, value);
    } else if (key == "epsilon") {
      c.epsilon = parse_real(key, value);
    } else if (key == "methods") {
      c.methods = split_words(value);
    } else if (key == "out") {
      c.out = value;
    } else if (key == "seed") {
      const auto v = parse_integer(key, value);
      if (v < 0) bad_value(key, value, "seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(v);
    } else {
      throw Error(ErrorKind::usage, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
  return parse_config(in, std::move(base));
}

ScenarioConfig resolve_config(ScenarioConfig c) {
  using E = ExperimentKind;
  const E e = c.experiment;
  if (!c.domain) c.domain = e == E::dtn_validate ? DomainKind::ball : DomainKind::cube;
  const DomainKind kind = *c.domain;
  if (c.meshes.empty()) {
    switch (e) {
      case E::dtn_validate: c.meshes = {kind == DomainKind::ball ? 8 : 16}; break;
      case E::recover_sigma: c.meshes = {24}; break;
      case E::decay_profile: c.meshes = {48}; break;
      case E::stability_sweep: c.meshes = {12}; break;
      case E::liouville: c.meshes = {8, 16}; break;
      case E::spectral: c.meshes = {24}; break;
      case E::density: c.meshes = {8}; break;
    }
  }
  if (c.conductivity.family.empty()) {
    switch (e) {
      case E::recover_sigma:
      case E::density: c.conductivity = {"affine", {1, 0, 0, 1}}; break;
      case E::stability_sweep: c.conductivity = {"gaussian-bump", {0.5, 0.5, 0.8, 0.3, 0.4, 1.0}}; break;
      case E::liouville: c.conductivity = {"product", {0.3}}; break;
      default: c.conductivity = {"constant", {1}}; break;
    }
  }
  if (c.reference.family.empty()) c.reference = {"constant", {1}};
  if (c.probes.empty()) {
    if (kind == DomainKind::ball) c.probes = {Vec3(0, 0, 1)};
    else c.probes = {e == E::recover_sigma ? Vec3(1, 0.5, 0.5) : Vec3(0.5, 0.5, 1)};
  }
  if (c.deltas.empty()) c.deltas = {0.1, 0.05, 0.025};
  if (c.rhos.empty()) c.rhos = {0.5};
  if (c.amplitudes.empty()) c.amplitudes = {0.4, 0.2, 0.1, 0.05};
  if (c.eigen_count == 0) c.eigen_count = 49;
  if (c.battery_mesh < 0) c.battery_mesh = e == E::dtn_validate ? (kind == DomainKind::ball ? 2 : 6) : 0;
  if (c.samples == 0) c.samples = e == E::liouville ? 50 : 20;
  if (c.methods.empty()) c.methods = {"bernstein"};

  auto usage = [](const std::string& m) { throw Error(ErrorKind::usage, m); };
  if (c.eigen_count < 1) usage("eigen_count must be positive");
  if (c.samples < 1) usage("samples must be positive");
  if (!(c.epsilon > 0.0)) usage("epsilon must be positive");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) usage("alpha must lie in (0, 1]");
  for (double d : c.deltas)
    if (!(d > 0.0)) usage("delta values must be positive");
  for (double r : c.rhos)
    if (!(r > 0.0)) usage("rho values must be positive");
  for (double a : c.amplitudes)
    if (!(a > 0.0)) usage("amplitudes must be positive");
  if (e == E::stability_sweep && (c.conductivity.family != "gaussian-bump" || c.conductivity.params.size() < 5)) {
    usage("stability-sweep scales the amplitude of a gaussian-bump conductivity");
  }
  for (const auto& m : c.methods) parse_density_method(m);
  return c;
}

Bundle run_scenario(const ScenarioConfig& config) {
  const ScenarioConfig cfg = stage("config", [&] { return resolve_config(config); });
  Bundle b;
  b.experiment = cfg.experiment;
  Json res = Json::object();
  switch (cfg.experiment) {
    case ExperimentKind::dtn_validate: run_dtn_validate(cfg, b, res); break;
    case ExperimentKind::recover_sigma: run_recover_sigma(cfg, b, res); break;
    case ExperimentKind::decay_profile: run_decay_profile(cfg, b, res); break;
    case ExperimentKind::stability_sweep: run_stability_sweep(cfg, b, res); break;
    case ExperimentKind::liouville: run_liouville(cfg, b, res); break;
    case ExperimentKind::spectral: run_spectral(cfg, b, res); break;
    case ExperimentKind::density: run_density(cfg, b, res); break;
  }
  Json summary;
  summary["experiment"] = to_string(cfg.experiment);
  Json echo = Json::object();
  for (const auto& [k, v] : cfg.entries()) echo[k] = v;
  summary["config"] = echo;
  summary["results"] = res;
  b.summary = summary.dump(2) + "\n";
  return b;
}

void write_bundle(const Bundle& bundle, const std::filesystem::path& dir) {
  check_directory(dir);
  for (const auto& t : bundle.tables) {
    std::ostringstream os;
    write_csv(os, t);
    write_text(dir / (t.name + ".csv"), os.str());
  }
  for (const auto& [name, text] : bundle.files) write_text(dir / name, text);
  write_text(dir / "summary.json", bundle.summary);
}

std::vector<std::string> export_report(const Bundle& bundle, const std::filesystem::path& dir) {
  check_directory(dir / "plot");
  std::vector<std::string> entries;
  for (const auto& p : bundle.plots) {
    std::ostringstream os;
    os << "#";
    for (const auto& c : p.columns) os << ' ' << c;
    os << '\n';
    for (const auto& row : p.rows) {
      for (size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << format_real(row[i]);
      os << '\n';
    }
    const std::string name = "plot/" + p.name + ".dat";
    write_text(dir / name, os.str());
    entries.push_back(name);
  }
  std::ostringstream man;
  man << "experiment " << to_string(bundle.experiment) << "\nentries " << entries.size() << "\n";
  for (const auto& e : entries) man << e << "\n";
  write_text(dir / "manifest.txt", man.str());
  return entries;
}

}  // namespace dtnlab
