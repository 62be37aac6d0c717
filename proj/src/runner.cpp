#include "spde/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "spde/conditions.hpp"
#include "spde/config.hpp"
#include "spde/markov.hpp"
#include "spde/models.hpp"
#include "spde/parallel.hpp"
#include "spde/types.hpp"

namespace fs = std::filesystem;

namespace spde {

namespace {

constexpr std::uint64_t kVerifySalt = 0x7E57F4A3C1B2D5E9ULL;

// What one experiment handler produces before persistence.
struct HandlerResult {
  nlohmann::json report;
  bool pass = false;
  long aborted = 0;
  nlohmann::json aborted_list = nlohmann::json::array();
  nlohmann::json test_seeds = nlohmann::json::object();
  nlohmann::json manifest_extras = nlohmann::json::object();
  // CSV artifacts: (filename, content) pairs written by the runner.
  std::vector<std::pair<std::string, std::string>> files;
};

double request_time(const nlohmann::json& test, const char* key,
                    double fallback) {
  return test.contains(key) ? test.at(key).get<double>() : fallback;
}

std::string csv_of_path(const SamplePath& path, bool projected) {
  const std::vector<HVec>& states = projected ? path.X : path.Y;
  std::string out;
  int dim = 0;
  for (const HVec& v : states)
    if (v.space.dim() > 0) dim = v.space.dim();
  out += "t";
  for (int i = 0; i < dim; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, ",x%d", i);
    out += buf;
  }
  out += "\n";
  char buf[32];
  for (std::size_t n = path.start; n < states.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%.17g", path.times[n]);
    out += buf;
    for (int i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", states[n].data[i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

TestFunction phi_from_test(const nlohmann::json& test, const SpaceSpec& space) {
  if (test.contains("phi")) return TestFunction::from_json(test["phi"], space);
  return TestFunction::gauss_exp(0.5);
}

ProbeSettings probe_settings(const ExperimentConfig& cfg, const RunOptions& opt,
                             double default_slack) {
  const nlohmann::json& test = cfg.test();
  ProbeSettings st;
  st.n_samples = test.value("n_samples", 1000);
  if (test.contains("t_samples"))
    st.t_samples = test["t_samples"].get<std::vector<double>>();
  if (test.contains("radius_tiers"))
    st.radius_tiers = test["radius_tiers"].get<std::vector<double>>();
  st.hemicont_tol = test.value("hemicont_tol", 1e-6);
  st.slack = test.value("slack", default_slack);
  st.seed = cfg.build_plan().seed;
  st.workers = opt.workers;
  return st;
}

// ---------------------------------------------------------------------------
// Experiment handlers
// ---------------------------------------------------------------------------

HandlerResult handle_verify_frame(const ExperimentConfig& cfg,
                                  const RunOptions&) {
  ContractionSemigroup S = cfg.build_semigroup();
  NoisePlan plan = cfg.build_plan();
  DilationFrame frame = cfg.build_frame(S);
  const nlohmann::json& test = cfg.test();
  int n_t = test.value("n_t", 10);
  int n_x = test.value("n_x", 20);
  int n_h = test.value("n_h", 20);

  // Aligned sample times spread over what the window supports.
  double tmax = std::min(plan.horizon(), frame.max_horizon());
  int steps_max = static_cast<int>(std::floor(tmax / plan.dt + 1e-9));
  std::vector<double> t_samples;
  for (int i = 0; i < n_t; ++i) {
    int idx = n_t > 1 ? (i * steps_max) / (n_t - 1) : 0;
    double t = idx * plan.dt;
    if (t_samples.empty() || t > t_samples.back()) t_samples.push_back(t);
  }

  std::vector<HVec> x_samples;
  for (int i = 0; i < n_x; ++i) {
    GaussianStream gs(noise_stream_key(plan.seed ^ kVerifySalt, i));
    HVec x = HVec::zero(S.space);
    for (int k = 0; k < S.space.dim(); ++k) x.data[k] = gs.next();
    x_samples.push_back(std::move(x));
  }

  FrameReport rep = verify_frame(frame, t_samples, x_samples,
                                 plan.seed ^ kVerifySalt, n_h);
  HandlerResult hr;
  hr.report = rep.to_json();
  hr.pass = rep.pass;
  hr.test_seeds["frame_verify"] = plan.seed ^ kVerifySalt;
  return hr;
}

HandlerResult handle_probe(const ExperimentConfig& cfg, const RunOptions& opt,
                           bool transferred) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  ProbeSettings st = probe_settings(cfg, opt, transferred ? 1e-8 : 0.0);

  ConditionReport rep;
  if (transferred) {
    DilationFrame frame = cfg.build_frame(S);
    DilatedCoefficients dc(model, frame);
    rep = probe_transferred_conditions(dc, st);
  } else {
    rep = probe_conditions(model, st);
  }

  HandlerResult hr;
  hr.report = rep.to_json();
  hr.pass = rep.all_pass();
  hr.test_seeds["probe"] = st.seed;
  return hr;
}

HandlerResult handle_simulate(const ExperimentConfig& cfg,
                              const RunOptions& opt) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  NoisePlan plan = cfg.build_plan();
  const nlohmann::json& test = cfg.test();
  int n_paths = test.value("n_paths", 1);
  bool save_paths = test.value("save_paths", true);
  std::string scheme = test.value("scheme", std::string("direct"));
  HVec xi = cfg.build_initial(S.space, "initial");

  std::optional<DilationFrame> frame;
  std::optional<DilatedCoefficients> dc;
  SdeSystem sys;
  HVec eta;
  if (scheme == "dilated") {
    frame.emplace(cfg.build_frame(S));
    dc.emplace(model, *frame);
    sys = dc->system();
    eta = frame->embed(xi);
  }

  struct Slot {
    bool ok = false;
    int abort_step = -1;
    double terminal_norm = 0.0;
    double integrability = 0.0;
    std::string csv;
  };
  std::vector<Slot> slots(n_paths);

  parallel_for(n_paths, opt.workers, [&](int p) {
    try {
      SamplePath path;
      if (scheme == "dilated") {
        path = solve_sde_euler(sys, eta, plan, p);
        project_mild(*frame, path);
      } else {
        path = solve_mild_direct(S, model, xi, plan, p);
      }
      slots[p].ok = true;
      slots[p].terminal_norm = norm(path.X[plan.steps]);
      slots[p].integrability = path.integrability;
      if (save_paths) slots[p].csv = csv_of_path(path, true);
    } catch (const OverflowError& e) {
      slots[p].abort_step = e.step;
    }
  });

  HandlerResult hr;
  double tsum = 0.0, imean = 0.0, imax = 0.0;
  long ok_count = 0;
  for (int p = 0; p < n_paths; ++p) {
    if (!slots[p].ok) {
      ++hr.aborted;
      hr.aborted_list.push_back(
          {{"path", p}, {"step", slots[p].abort_step}});
      continue;
    }
    ++ok_count;
    tsum += slots[p].terminal_norm;
    imean += slots[p].integrability;
    imax = std::max(imax, slots[p].integrability);
    if (save_paths) {
      char fname[64];
      std::snprintf(fname, sizeof fname, "%s-path-%03d.csv",
                    cfg.name().c_str(), p);
      hr.files.emplace_back(fname, std::move(slots[p].csv));
    }
  }
  if (ok_count > 0) {
    tsum /= ok_count;
    imean /= ok_count;
  }

  hr.report = {{"scheme", scheme},
               {"n_paths", n_paths},
               {"completed", ok_count},
               {"terminal_norm_mean", tsum},
               {"integrability_mean", imean},
               {"integrability_max", imax}};
  hr.manifest_extras["integrability"] = {{"mean", imean}, {"max", imax}};
  hr.pass = hr.aborted == 0;
  return hr;
}

HandlerResult from_stat(const StatReport& rep) {
  HandlerResult hr;
  hr.report = rep.to_json();
  hr.pass = rep.pass;
  hr.aborted = rep.aborted;
  hr.test_seeds["noise"] = rep.seed;
  return hr;
}

HandlerResult handle_equivalence(const ExperimentConfig& cfg,
                                 const RunOptions& opt, double default_s) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  NoisePlan plan = cfg.build_plan();
  DilationFrame frame = cfg.build_frame(S);
  const nlohmann::json& test = cfg.test();
  HVec xi = cfg.build_initial(S.space, "initial");
  StatReport rep = test_scheme_equivalence(
      S, model, frame, request_time(test, "s", default_s), xi, plan,
      test.value("n_paths", 50), test.value("tol", 1e-8), opt.workers);
  return from_stat(rep);
}

HandlerResult handle_flow(const ExperimentConfig& cfg, const RunOptions& opt) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  NoisePlan plan = cfg.build_plan();
  const nlohmann::json& test = cfg.test();
  HVec xi = cfg.build_initial(S.space, "initial");
  std::optional<DilationFrame> frame;
  if (test.value("scheme", std::string("direct")) == "dilated")
    frame.emplace(cfg.build_frame(S));
  StatReport rep = test_flow_property(
      S, model, frame ? &*frame : nullptr, test.at("r").get<double>(),
      test.at("s").get<double>(), test.at("t").get<double>(), xi, plan,
      test.value("n_paths", 100), test.value("tol", 1e-10), opt.workers);
  return from_stat(rep);
}

HandlerResult handle_ck(const ExperimentConfig& cfg, const RunOptions& opt,
                        bool tower) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  NoisePlan plan = cfg.build_plan();
  const nlohmann::json& test = cfg.test();
  TestFunction phi = phi_from_test(test, S.space);
  double r = test.at("r").get<double>();
  double s = test.at("s").get<double>();
  double t = test.at("t").get<double>();
  int n_outer = test.value("n_outer", 200);
  int n_inner = test.value("n_inner", 200);
  double z_max = test.value("z_max", 3.0);

  StatReport rep;
  if (tower) {
    auto sampler = cfg.build_initial_sampler(S.space, "xi");
    rep = test_markov_tower(S, model, r, s, t, sampler, phi, plan, n_outer,
                            n_inner, z_max, opt.workers);
  } else {
    HVec x = cfg.build_initial(S.space, "initial");
    rep = test_chapman_kolmogorov(S, model, r, s, t, x, phi, plan, n_outer,
                                  n_inner, z_max, opt.workers);
  }
  return from_stat(rep);
}

HandlerResult handle_apriori(const ExperimentConfig& cfg,
                             const RunOptions& opt) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  NoisePlan plan = cfg.build_plan();
  DilationFrame frame = cfg.build_frame(S);
  DilatedCoefficients dc(model, frame);
  HVec xi = cfg.build_initial(S.space, "initial");
  HVec eta = frame.embed(xi);
  const nlohmann::json& test = cfg.test();
  StatReport rep = test_apriori_bound(
      dc, eta, plan, test.value("n_paths", 1000),
      test.value("moment_order", model.p), opt.workers);
  return from_stat(rep);
}

HandlerResult handle_lipschitz(const ExperimentConfig& cfg,
                               const RunOptions& opt) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  NoisePlan plan = cfg.build_plan();
  DilationFrame frame = cfg.build_frame(S);
  DilatedCoefficients dc(model, frame);
  HVec xi = cfg.build_initial(S.space, "xi");
  HVec zeta = cfg.build_initial(S.space, "zeta");
  StatReport rep = test_lipschitz_map(dc, xi, zeta, plan,
                                      cfg.test().value("n_paths", 1000),
                                      opt.workers);
  return from_stat(rep);
}

HandlerResult handle_convergence(const ExperimentConfig& cfg,
                                 const RunOptions& opt) {
  ContractionSemigroup S = cfg.build_semigroup();
  CoefficientModel model = cfg.build_model(S.space);
  NoisePlan plan = cfg.build_plan();
  HVec xi = cfg.build_initial(S.space, "initial");
  const nlohmann::json& test = cfg.test();
  StatReport rep = test_strong_convergence(
      S, model, xi, plan, test.value("n_paths", 100),
      test.value("refine", 16), test.value("min_slope", 0.3), opt.workers);
  return from_stat(rep);
}

HandlerResult dispatch(const ExperimentConfig& cfg, const RunOptions& opt) {
  const std::string& kind = cfg.experiment();
  if (kind == "verify-frame") return handle_verify_frame(cfg, opt);
  if (kind == "probe-conditions") return handle_probe(cfg, opt, false);
  if (kind == "probe-transferred") return handle_probe(cfg, opt, true);
  if (kind == "simulate") return handle_simulate(cfg, opt);
  if (kind == "cross-validate") return handle_equivalence(cfg, opt, 0.0);
  if (kind == "lemma31-test") return handle_equivalence(cfg, opt, 0.25);
  if (kind == "flow-test") return handle_flow(cfg, opt);
  if (kind == "markov-ck") return handle_ck(cfg, opt, false);
  if (kind == "markov-tower") return handle_ck(cfg, opt, true);
  if (kind == "apriori") return handle_apriori(cfg, opt);
  if (kind == "lipschitz") return handle_lipschitz(cfg, opt);
  if (kind == "convergence") return handle_convergence(cfg, opt);
  throw ConfigError("unknown experiment kind: " + kind);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

// ---------------------------------------------------------------------------
// Run entry points
// ---------------------------------------------------------------------------

RunOutcome run_config_document(nlohmann::json doc, const RunOptions& opt) {
  RunOutcome out;
  if (opt.seed_override && doc.is_object() && doc.contains("noise") &&
      doc["noise"].is_object())
    doc["noise"]["seed"] = *opt.seed_override;

  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::parse(std::move(doc));
  } catch (const ConfigError& e) {
    out.exit_code = 2;
    out.error = e.what();
    return out;
  }
  out.name = cfg.name();
  out.experiment = cfg.experiment();

  auto t0 = std::chrono::steady_clock::now();
  HandlerResult hr;
  try {
    hr = dispatch(cfg, opt);
  } catch (const ConfigError& e) {
    out.exit_code = 2;
    out.error = e.what();
    return out;
  } catch (const OverflowError& e) {
    out.exit_code = 3;
    out.error = e.what();
    return out;
  } catch (const std::exception& e) {
    out.exit_code = 3;
    out.error = e.what();
    return out;
  }
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();

  out.pass = hr.pass;
  // Overflows inside simulate abort paths rather than tests; surface them
  // through the runtime exit code. Statistical tests fold aborts into their
  // own pass flag instead.
  if (cfg.experiment() == "simulate" && hr.aborted > 0)
    out.exit_code = 3;
  else
    out.exit_code = hr.pass ? 0 : 1;
  out.report = hr.report;

  nlohmann::json manifest;
  manifest["name"] = cfg.name();
  manifest["experiment"] = cfg.experiment();
  manifest["config_hash"] = cfg.hash();
  manifest["tool_version"] = kToolVersion;
  manifest["master_seed"] = cfg.build_plan().seed;
  manifest["test_seeds"] = hr.test_seeds;
  manifest["pass"] = hr.pass;
  manifest["exit_code"] = out.exit_code;
  manifest["aborted_paths"] = hr.aborted;
  if (!hr.aborted_list.empty()) manifest["aborted"] = hr.aborted_list;
  for (auto it = hr.manifest_extras.begin(); it != hr.manifest_extras.end();
       ++it)
    manifest[it.key()] = it.value();
  // Wall-clock; the single field that varies between byte-identical runs.
  manifest["timing_ms"] = ms;

  fs::path dir = opt.out_dir.empty() ? fs::path(cfg.output_dir())
                                     : fs::path(opt.out_dir);
  fs::create_directories(dir);

  std::vector<std::string> artifacts;
  for (const auto& [fname, content] : hr.files) {
    write_file(dir / fname, content);
    artifacts.push_back(fname);
  }
  std::string report_name = cfg.name() + "-report.json";
  write_file(dir / report_name, hr.report.dump(2) + "\n");
  artifacts.push_back(report_name);
  std::string manifest_name = cfg.name() + "-manifest.json";
  manifest["artifacts"] = artifacts;
  write_file(dir / manifest_name, manifest.dump(2) + "\n");
  artifacts.push_back(manifest_name);
  out.artifacts = std::move(artifacts);
  return out;
}

RunOutcome run_config_file(const std::string& path, const RunOptions& opt) {
  std::ifstream in(path);
  if (!in) {
    RunOutcome out;
    out.exit_code = 2;
    out.error = "cannot open config file: " + path;
    return out;
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    RunOutcome out;
    out.exit_code = 2;
    out.error = std::string("config parse error: ") + e.what();
    return out;
  }
  return run_config_document(std::move(doc), opt);
}

int run_suite(const std::string& dir, const RunOptions& opt) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    std::fprintf(stderr, "suite: not a directory: %s\n", dir.c_str());
    return 2;
  }
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::fprintf(stderr, "suite: no *.json configs in %s\n", dir.c_str());
    return 2;
  }

  // Duplicate experiment names would overwrite each other's artifacts.
  std::set<std::string> names;
  for (const auto& path : configs) {
    std::ifstream in(path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::parse_error&) {
      continue;  // recorded as a per-config failure below
    }
    if (doc.is_object() && doc.contains("name") && doc["name"].is_string()) {
      std::string n = doc["name"].get<std::string>();
      if (!names.insert(n).second) {
        std::fprintf(stderr, "suite: duplicate config name \"%s\"\n",
                     n.c_str());
        return 2;
      }
    }
  }

  nlohmann::json rollup = nlohmann::json::array();
  int worst = 0;
  for (const auto& path : configs) {
    RunOutcome out = run_config_file(path.string(), opt);
    nlohmann::json entry;
    entry["file"] = path.filename().string();
    entry["name"] = out.name;
    entry["experiment"] = out.experiment;
    entry["exit_code"] = out.exit_code;
    entry["pass"] = out.pass;
    if (!out.error.empty()) entry["error"] = out.error;
    rollup.push_back(entry);
    worst = std::max(worst, out.exit_code);
    std::fprintf(stderr, "%-32s %-18s exit %d%s\n", out.name.c_str(),
                 out.experiment.c_str(), out.exit_code,
                 out.pass ? " pass" : "");
  }

  fs::path out_dir = opt.out_dir.empty() ? fs::path("out")
                                         : fs::path(opt.out_dir);
  fs::create_directories(out_dir);
  nlohmann::json doc;
  doc["configs"] = rollup;
  doc["all_pass"] = worst == 0;
  write_file(out_dir / "suite-rollup.json", doc.dump(2) + "\n");
  return worst;
}

}  // namespace spde
