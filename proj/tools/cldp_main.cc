// Copyright 2026 The CLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cldp: command-line front end for audits, sweeps, estimators and rate
// experiments. Exit status is 0 on success, 1 when a checked inequality is
// violated and 2 on configuration or usage errors.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cldp/adaptive.h"
#include "cldp/channels.h"
#include "cldp/contraction.h"
#include "cldp/effective_privacy.h"
#include "cldp/error.h"
#include "cldp/estimators.h"
#include "cldp/harness.h"
#include "cldp/lowerbounds.h"
#include "cldp/matrix.h"
#include "cldp/parallel.h"
#include "cldp/rng.h"
#include "cldp/simdata.h"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kConfig = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cldp::ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw cldp::ConfigError("'" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cldp::ConfigError("cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void reject_unused(const cldp::KeyValueConfig& kv) {
  const auto unused = kv.unused_keys();
  if (!unused.empty()) {
    throw cldp::ConfigError("unknown key '" + unused.front() + "'");
  }
}

// Rows of a CSV with header x1..xd.
cldp::Matrix read_matrix_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t d = 0;
  std::vector<double> values;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (header) {
      d = fields.size();
      for (std::size_t j = 0; j < d; ++j) {
        if (fields[j] != "x" + std::to_string(j + 1)) {
          throw cldp::ConfigError("data CSV header must be x1..xd");
        }
      }
      header = false;
      continue;
    }
    if (fields.size() != d) throw cldp::ConfigError("ragged data CSV row");
    for (const auto& v : fields) {
      try {
        values.push_back(std::stod(v));
      } catch (const std::exception&) {
        throw cldp::ConfigError("bad number '" + v + "' in data CSV");
      }
    }
  }
  if (d == 0 || values.empty()) throw cldp::ConfigError("empty data CSV");
  cldp::Matrix m(values.size() / d, d);
  std::copy(values.begin(), values.end(), m.data().begin());
  return m;
}

std::string matrix_csv(const cldp::Matrix& m) {
  std::string out;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    out += (j ? ",x" : "x") + std::to_string(j + 1);
  }
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------- audit

int cmd_audit(const std::string& channels_path, const std::string& out) {
  json report;
  bool ok = true;
  if (channels_path.empty()) {
    report["laplace"] = cldp::laplace_audit_table(&ok);
  } else {
    const auto channels = cldp::channels_from_json(read_json(channels_path));
    auto rows = json::array();
    for (const auto& ch : channels) {
      const auto r = cldp::privacy_audit(ch);
      const bool sound = !std::isfinite(ch.alpha()) ||
                         r.max_ratio <= std::exp(ch.alpha()) * (1.0 + 1e-9);
      ok = ok && sound;
      rows.push_back({{"channel", ch},
                      {"audited", r.max_ratio},
                      {"log_audited", r.log_max_ratio},
                      {"x", r.x},
                      {"x_prime", r.x_prime},
                      {"ok", sound}});
    }
    report["channels"] = rows;
    if (channels.size() > 1) {
      const auto joint = cldp::privacy_audit_product(channels);
      report["product"] = {{"audited", joint.max_ratio},
                           {"log_audited", joint.log_max_ratio}};
    }
  }
  report["ok"] = ok;
  write_json(out, report);
  return ok ? kOk : kViolation;
}

// -------------------------------------------------------- contract-verify

int cmd_contract(const std::vector<std::size_t>& dims, std::size_t instances,
                 std::uint64_t seed, std::size_t max_support, int threads,
                 const std::string& out) {
  cldp::ContractionSweepConfig cfg;
  cfg.dims = dims;
  cfg.instances = instances;
  cfg.seed = seed;
  cfg.max_support = max_support;
  cfg.threads = threads;
  const auto sweep = cldp::contraction_sweep(cfg);
  json report;
  report["seed"] = seed;
  report["instances"] = sweep.reports;
  report["kl_violations"] = sweep.kl_violations;
  report["f_violations"] = sweep.f_violations;
  write_json(out, report);
  std::fprintf(stderr, "%zu instances, %zu kl violations, %zu f violations\n",
               sweep.reports.size(), sweep.kl_violations, sweep.f_violations);
  return sweep.kl_violations + sweep.f_violations == 0 ? kOk : kViolation;
}

// ---------------------------------------------------------------- leakage

int cmd_leakage(const std::string& dist, const std::string& channels,
                const std::string& out) {
  const auto p = cldp::discrete_dist_from_json(read_json(dist));
  const auto ch = cldp::channels_from_json(read_json(channels));
  const auto r = cldp::analyze_leakage(p, ch);
  write_json(out, r);
  return r.violation ? kViolation : kOk;
}

// --------------------------------------------------------------- estimate

struct DataSpec {
  cldp::Matrix x;
  std::optional<double> truth;
};

cldp::KernelFn kernel_from(const cldp::KeyValueConfig& kv, double beta) {
  const std::string name = kv.get_string("kernel", "legendre");
  if (name == "triangular") return cldp::KernelFn::triangular();
  if (name != "legendre") throw cldp::ConfigError("unknown kernel '" + name + "'");
  return cldp::KernelFn::legendre(static_cast<int>(std::floor(beta)));
}

std::vector<double> alphas_from(const cldp::KeyValueConfig& kv) {
  auto alphas = kv.get_doubles("alphas");
  if (kv.has("d") && static_cast<std::size_t>(kv.get_int("d")) != alphas.size()) {
    throw cldp::ConfigError("d does not match the number of alphas");
  }
  return alphas;
}

// data = pareto | holder | <path to CSV with header x1..xd>
DataSpec load_data(const cldp::KeyValueConfig& kv, bool density,
                   const std::vector<double>& alphas, std::size_t n,
                   cldp::RngStream& rng, const std::string& target) {
  const std::string source = kv.get_string("data", density ? "holder" : "pareto");
  DataSpec out;
  const std::size_t d = alphas.size();
  if (source == "pareto") {
    const auto ks = kv.get_doubles("ks");
    const cldp::HeavyTailedModel model(ks, kv.get_double("rho", 0.5),
                                       kv.get_double("tail_offset", 0.5),
                                       kv.get_double("spread", 1.0));
    out.x = model.sample(n, rng);
    if (target == "mean") out.truth = model.true_mean(0);
    if (target == "moment") out.truth = model.true_joint_moment();
    if (target == "cov") out.truth = model.true_covariance();
    if (target == "corr") out.truth = model.true_correlation();
  } else if (source == "holder") {
    const cldp::HolderDensityModel model(
        cldp::HolderClass(kv.get_double("beta", 2.0), 1.0, d));
    out.x = model.sample(n, rng);
    std::vector<double> x0(d, kv.get_double("x0", 0.0));
    out.truth = model.density(x0);
  } else {
    out.x = read_matrix_csv(source);
  }
  if (out.x.cols() != d) {
    throw cldp::ConfigError("data has " + std::to_string(out.x.cols()) +
                            " columns but alphas has " + std::to_string(d));
  }
  return out;
}

int cmd_estimate(const std::string& mode, const std::string& config,
                 const std::string& out, const std::string& dump) {
  auto kv = cldp::KeyValueConfig::load(config);
  const auto alphas = alphas_from(kv);
  const cldp::PrivacyBudget budget(alphas);
  const std::size_t d = alphas.size();
  const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  const bool density = mode == "kde";
  const std::size_t n_cfg = kv.has("n") ? static_cast<std::size_t>(kv.get_int("n")) : 0;
  cldp::RngStream data_rng(seed, 0);
  cldp::RngStream noise_rng(seed, 1);
  const std::string data_src = kv.get_string("data", density ? "holder" : "pareto");
  if ((data_src == "pareto" || data_src == "holder") && n_cfg == 0) {
    throw cldp::ConfigError("missing key 'n'");
  }
  const auto data = load_data(kv, density, alphas, n_cfg, data_rng, mode);
  const std::size_t n = data.x.rows();
  if (!dump.empty()) write_text(dump, matrix_csv(data.x));

  json report;
  report["mode"] = mode;
  report["n"] = n;
  report["alphas"] = alphas;
  report["seed"] = seed;
  if (mode == "kde") {
    const double beta = kv.get_double("beta", 2.0);
    const double x0 = kv.get_double("x0", 0.0);
    const cldp::HolderClass hc(beta, 1.0, d);
    const auto kernel = kernel_from(kv, beta);
    double h = 0.0;
    if (kv.has("h")) {
      h = kv.get_double("h");
    } else {
      const auto bw = cldp::optimal_bandwidth(hc, budget, n);
      h = bw.h_star;
      report["regime"] = cldp::to_string(bw.regime);
    }
    std::vector<cldp::ChannelSpec> ch;
    for (double a : alphas) ch.push_back(cldp::ChannelSpec::kernel_laplace(h, x0, kernel, a));
    reject_unused(kv);
    const auto z = cldp::privatize_sample(data.x, ch, noise_rng);
    report["h"] = h;
    report["estimate"] = cldp::private_kde(z);
    report["channels"] = ch;
  } else {
    const cldp::MomentProfile profile(kv.get_doubles("ks"));
    if (profile.dims() != d) throw cldp::ConfigError("ks and alphas differ in length");
    if (mode == "mean" && d != 1) throw cldp::ConfigError("mean takes one alpha");
    if ((mode == "cov" || mode == "corr") && d != 2) {
      throw cldp::ConfigError("cov and corr take two alphas");
    }
    if (mode == "corr") {
      const auto plan = cldp::plan_correlation_channels(profile, budget, n);
      reject_unused(kv);
      const auto z = cldp::privatize_sample(data.x, plan.first, noise_rng);
      cldp::Matrix sq(n, d);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) sq(i, j) = data.x(i, j) * data.x(i, j);
      }
      const auto z2 = cldp::privatize_sample(sq, plan.second, noise_rng);
      const auto cc = cldp::private_covariance_correlation(z, &z2);
      report["theta"] = cc.theta;
      report["estimate"] = cc.corr ? json(*cc.corr) : json(nullptr);
      report["variance_nonpositive"] = cc.variance_nonpositive;
      report["channels"] = plan.first;
      report["second_channels"] = plan.second;
    } else {
      const auto t = cldp::optimal_truncations(
          profile, budget, n,
          mode == "mean" ? cldp::TruncationMode::kMean : cldp::TruncationMode::kJoint);
      std::vector<cldp::ChannelSpec> ch;
      for (std::size_t j = 0; j < d; ++j) {
        ch.push_back(cldp::ChannelSpec::laplace_trunc(t[j], alphas[j]));
      }
      reject_unused(kv);
      const auto z = cldp::privatize_sample(data.x, ch, noise_rng);
      if (mode == "mean") {
        report["estimate"] = cldp::private_mean(z, 0);
      } else if (mode == "moment") {
        report["estimate"] = cldp::private_joint_moment(z);
      } else if (mode == "cov") {
        report["estimate"] = cldp::private_covariance_correlation(z).theta;
      } else {
        throw cldp::ConfigError("unknown mode '" + mode + "'");
      }
      report["truncations"] = t;
      report["channels"] = ch;
    }
  }
  if (data.truth) report["truth"] = *data.truth;
  write_json(out, report);
  return kOk;
}

// --------------------------------------------------------------- adaptive

int cmd_adaptive(const std::string& mode, const std::string& config,
                 const std::string& out) {
  auto kv = cldp::KeyValueConfig::load(config);
  const auto alphas = alphas_from(kv);
  const std::size_t d = alphas.size();
  const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  const bool density = mode == "density";
  const cldp::GLConfig gl{kv.get_double(
      "c0", density ? cldp::GLConfig::kDensityC0 : cldp::GLConfig::kMomentC0)};
  if (!density && mode != "moment") {
    throw cldp::ConfigError("unknown mode '" + mode + "'");
  }
  const std::size_t n_cfg = kv.has("n") ? static_cast<std::size_t>(kv.get_int("n")) : 0;
  const std::string data_src = kv.get_string("data", density ? "holder" : "pareto");
  if ((data_src == "pareto" || data_src == "holder") && n_cfg == 0) {
    throw cldp::ConfigError("missing key 'n'");
  }
  cldp::RngStream data_rng(seed, 0);
  cldp::RngStream noise_rng(seed, 1);
  const auto data = load_data(kv, density, alphas, n_cfg, data_rng,
                              density ? "kde" : "moment");
  const std::size_t n = data.x.rows();
  json report;
  report["mode"] = mode;
  report["n"] = n;
  report["alphas"] = alphas;
  report["seed"] = seed;
  report["c0"] = gl.c0;
  if (density) {
    const double beta = kv.get_double("beta", 2.0);
    const double x0 = kv.get_double("x0", 0.0);
    const auto kernel = kernel_from(kv, beta);
    reject_unused(kv);
    std::vector<cldp::ChannelSpec> ch;
    for (double a : alphas) {
      ch.push_back(cldp::ChannelSpec::multi_bandwidth(cldp::bandwidth_grid(n), x0,
                                                      kernel, a));
    }
    const auto z = cldp::privatize_sample(data.x, ch, noise_rng);
    const auto sel = cldp::gl_select_bandwidth(z, gl);
    report["selected"] = sel.h_hat;
    report["estimate"] = sel.pi_hat;
    report["bv_table"] = sel.table;
    try {
      report["oracle"] =
          cldp::optimal_bandwidth(cldp::HolderClass(beta, 1.0, d),
                                  cldp::PrivacyBudget(alphas), n)
              .h_star;
    } catch (const cldp::Error&) {
    }
  } else {
    const auto ks = kv.get_doubles("ks");
    reject_unused(kv);
    std::vector<cldp::ChannelSpec> ch;
    for (double a : alphas) {
      ch.push_back(cldp::ChannelSpec::multi_trunc(cldp::truncation_grid(n), a));
    }
    const auto z = cldp::privatize_sample(data.x, ch, noise_rng);
    const auto sel = cldp::gl_select_truncation(z, gl);
    report["selected"] = sel.t_hat;
    report["estimate"] = sel.gamma_hat;
    report["bv_table"] = sel.table;
    try {
      report["oracle"] = cldp::optimal_truncations(
          cldp::MomentProfile(ks), cldp::PrivacyBudget(alphas), n,
          cldp::TruncationMode::kJoint);
    } catch (const cldp::Error&) {
    }
  }
  if (data.truth) report["truth"] = *data.truth;
  write_json(out, report);
  return kOk;
}

// ------------------------------------------------------------- lowerbound

int cmd_lowerbound(const std::string& kind, const std::string& config,
                   const std::string& out) {
  auto kv = cldp::KeyValueConfig::load(config);
  const auto alphas = alphas_from(kv);
  const cldp::PrivacyBudget budget(alphas);
  const auto n = static_cast<std::size_t>(kv.get_int("n"));
  json report;
  bool ok = false;
  if (kind == "moment") {
    const cldp::MomentProfile profile(kv.get_doubles("ks"));
    reject_unused(kv);
    const auto inst = cldp::moment_two_point(profile, budget, n);
    const auto r = cldp::verify_two_point(inst);
    report = r;
    report["delta"] = inst.delta;
    report["separation"] = inst.separation;
    report["P"] = inst.p;
    report["P_star"] = inst.p_star;
    ok = r.condition3_ok;
  } else if (kind == "density") {
    const cldp::HolderClass hc(kv.get_double("beta", 2.0), 1.0, alphas.size());
    const double eps0 = kv.get_double("eps0", 1.9);
    const double c_k = kv.get_double("c_k", 4.0);
    const double eta = kv.get_double("eta", 0.05);
    reject_unused(kv);
    const auto inst = cldp::density_two_point(hc, budget, n, eps0, c_k, eta);
    const auto r = cldp::density_quadrature_report(inst, budget, n);
    report = r;
    report["inv_m"] = inst.inv_m;
    report["h"] = inst.h;
    report["separation"] = inst.separation();
    ok = r.condition3_ok;
  } else {
    throw cldp::ConfigError("unknown kind '" + kind + "'");
  }
  write_json(out, report);
  return ok ? kOk : kViolation;
}

// ------------------------------------------------------------------ rates

int cmd_rates(const std::string& config, const std::string& out,
              const std::string& meta, std::optional<int> threads, bool check) {
  auto kv = cldp::KeyValueConfig::load(config);
  auto cfg = cldp::experiment_config_from(kv);
  if (threads) cfg.threads = *threads;
  const bool slope = cfg.n_grid.size() >= 4;
  if (slope) cldp::validate_for_slope(cfg);
  const auto curve = cldp::run_rate_experiment(cfg);
  write_text(out, cldp::rate_curve_csv(curve));
  std::string meta_path = meta;
  if (meta_path.empty() && !out.empty() && out != "-") meta_path = out + ".json";
  const auto md = cldp::rate_curve_metadata(curve);
  if (!meta_path.empty()) write_json(meta_path, md);
  if (md.contains("fit")) {
    std::fprintf(stderr, "slope %.4f +- %.4f", md["fit"]["slope"].get<double>(),
                 md["fit"]["band95"].get<double>());
    if (curve.target_slope) {
      std::fprintf(stderr, " (target %.4f, tolerance %.2f)", *curve.target_slope,
                   curve.tolerance);
    }
    std::fprintf(stderr, "\n");
  }
  if (check && md.contains("fit") && md["fit"].contains("within_tolerance") &&
      !md["fit"]["within_tolerance"].get<bool>()) {
    return kViolation;
  }
  return kOk;
}

// ----------------------------------------------------------------- report

int cmd_report_csv(const std::string& csv, std::optional<double> target,
                   double tolerance, const std::string& out) {
  const auto rows = cldp::read_rate_csv(read_file(csv));
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(r.n_eff);
    y.push_back(r.mse);
  }
  const auto fit = cldp::fit_loglog_slope(x, y);
  json report{{"points", fit.points},
              {"slope", fit.slope},
              {"intercept", fit.intercept},
              {"stderr", fit.stderr_slope},
              {"band95", fit.band}};
  bool ok = true;
  if (target) {
    ok = std::abs(fit.slope - *target) <= tolerance;
    report["target"] = *target;
    report["tolerance"] = tolerance;
    report["within_tolerance"] = ok;
  }
  write_json(out, report);
  return ok ? kOk : kViolation;
}

int cmd_report_suite(const std::string& which, std::uint64_t seed,
                     std::size_t instances, int threads, const std::string& out) {
  cldp::SuiteOptions opts;
  opts.seed = seed;
  opts.instances = instances;
  opts.threads = threads;
  const auto r = cldp::run_verification_suite(which, opts);
  write_json(out, r.report);
  std::fprintf(stderr, "suite %s: %s\n", which.c_str(), r.ok ? "ok" : "VIOLATION");
  return r.ok ? kOk : kViolation;
}

std::vector<std::size_t> parse_dims(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(item)));
    } catch (const std::exception&) {
      throw cldp::ConfigError("bad --dims entry '" + item + "'");
    }
  }
  if (out.empty()) throw cldp::ConfigError("--dims is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Componentwise local differential privacy toolkit"};
  app.require_subcommand(1);
  std::string out;
  std::string config;

  auto* audit = app.add_subcommand("audit", "Grid audit of channel likelihood ratios");
  std::string audit_channels;
  audit->add_option("--channels", audit_channels,
                    "Channel JSON (omit for the Laplace reference table)");
  audit->add_option("--out", out, "Output JSON (default stdout)");

  auto* contract = app.add_subcommand("contract-verify", "Random contraction sweep");
  std::string dims = "2,3";
  std::size_t instances = 500;
  std::uint64_t seed = 7;
  std::size_t max_support = 3;
  int threads = cldp::default_threads();
  contract->add_option("--dims", dims, "Comma-separated dimensions");
  contract->add_option("--instances", instances);
  contract->add_option("--seed", seed);
  contract->add_option("--max-support", max_support);
  contract->add_option("--threads", threads);
  contract->add_option("--out", out);

  auto* leakage = app.add_subcommand("leakage", "Marginal leakage audit");
  std::string dist, channels;
  leakage->add_option("--dist", dist)->required();
  leakage->add_option("--channels", channels)->required();
  leakage->add_option("--out", out);

  auto* estimate = app.add_subcommand("estimate", "Private point estimate");
  std::string mode, dump;
  estimate->add_option("--mode", mode)
      ->required()
      ->check(CLI::IsMember({"mean", "moment", "cov", "corr", "kde"}));
  estimate->add_option("--config", config)->required();
  estimate->add_option("--out", out);
  estimate->add_option("--dump-data", dump, "Write the raw sample as CSV");

  auto* adaptive = app.add_subcommand("adaptive", "Goldenshluger-Lepski selection");
  adaptive->add_option("--mode", mode)
      ->required()
      ->check(CLI::IsMember({"moment", "density"}));
  adaptive->add_option("--config", config)->required();
  adaptive->add_option("--out", out);

  auto* rates = app.add_subcommand("rates", "Monte Carlo rate curve");
  std::string meta;
  std::optional<int> rate_threads;
  bool check = false;
  rates->add_option("--config", config)->required();
  rates->add_option("--out", out, "CSV path (default stdout)");
  rates->add_option("--meta", meta, "Metadata JSON (default <out>.json)");
  rates->add_option("--threads", rate_threads);
  rates->add_flag("--check", check, "Exit 1 when the slope misses its target");

  auto* lower = app.add_subcommand("lowerbound", "Two-point lower-bound instance");
  std::string kind;
  lower->add_option("--kind", kind)->required()->check(
      CLI::IsMember({"moment", "density"}));
  lower->add_option("--config", config)->required();
  lower->add_option("--out", out);

  auto* report = app.add_subcommand("report", "Slope fit of a rate CSV or a suite");
  std::string csv, suite;
  std::optional<double> target;
  double tolerance = 0.15;
  std::size_t suite_instances = 0;
  report->add_option("--csv", csv);
  report->add_option("--target", target);
  report->add_option("--tolerance", tolerance);
  report->add_option("--suite", suite)->check(
      CLI::IsMember({"contraction", "privacy", "leakage", "lowerbound", "all"}));
  report->add_option("--seed", seed);
  report->add_option("--instances", suite_instances);
  report->add_option("--threads", threads);
  report->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*audit) return cmd_audit(audit_channels, out);
    if (*contract) {
      return cmd_contract(parse_dims(dims), instances, seed, max_support, threads, out);
    }
    if (*leakage) return cmd_leakage(dist, channels, out);
    if (*estimate) return cmd_estimate(mode, config, out, dump);
    if (*adaptive) return cmd_adaptive(mode, config, out);
    if (*rates) return cmd_rates(config, out, meta, rate_threads, check);
    if (*lower) return cmd_lowerbound(kind, config, out);
    if (*report) {
      if (csv.empty() == suite.empty()) {
        throw cldp::ConfigError("report needs exactly one of --csv or --suite");
      }
      if (!csv.empty()) return cmd_report_csv(csv, target, tolerance, out);
      return cmd_report_suite(suite, seed, suite_instances, threads, out);
    }
  } catch (const cldp::Error& e) {
    std::fprintf(stderr, "cldp: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cldp: %s\n", e.what());
    return kConfig;
  }
  return kConfig;
}
