#include "spde/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "spde/types.hpp"

namespace spde {

namespace {

// Salt separating initial-condition draws from the path noise streams.
constexpr std::uint64_t kSamplerSalt = 0x8BADF00D5EEDFACEULL;

bool aligned_multiple(double t, double h) {
  if (h <= 0) return false;
  double raw = t / h;
  return std::abs(raw - std::round(raw)) <= 1e-9 * std::max(1.0, std::abs(raw));
}

bool is_num(const nlohmann::json& j) { return j.is_number(); }

double num_or(const nlohmann::json& j, const char* key, double fb) {
  return j.contains(key) && j.at(key).is_number() ? j.at(key).get<double>()
                                                  : fb;
}

const std::set<std::string> kFrameKinds = {
    "verify-frame", "probe-transferred", "cross-validate",
    "lemma31-test",  "apriori",           "lipschitz"};

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "verify-frame", "probe-conditions", "probe-transferred", "simulate",
      "cross-validate", "flow-test", "lemma31-test", "markov-ck",
      "markov-tower", "apriori", "lipschitz", "convergence"};
  return kinds;
}

std::string canonical_hash(const nlohmann::json& doc) {
  // nlohmann objects iterate keys in sorted order, so dump() is already a
  // canonical form; whitespace never enters it.
  std::string s = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Parsing and validation
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::parse(nlohmann::json doc) {
  std::vector<std::string> issues;
  auto bad = [&issues](std::string msg) { issues.push_back(std::move(msg)); };

  if (!doc.is_object()) {
    throw ConfigError("config document must be a JSON object");
  }

  std::string name, experiment;
  if (doc.contains("name") && doc["name"].is_string() &&
      !doc["name"].get<std::string>().empty())
    name = doc["name"].get<std::string>();
  else
    bad("\"name\": required nonempty string");

  if (doc.contains("experiment") && doc["experiment"].is_string()) {
    experiment = doc["experiment"].get<std::string>();
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), experiment) == kinds.end())
      bad("\"experiment\": unknown kind \"" + experiment + "\"");
  } else {
    bad("\"experiment\": required string");
  }

  // --- semigroup ---
  bool semigroup_ok = false;
  double shift_dx = 0.0;
  if (!doc.contains("semigroup") || !doc["semigroup"].is_object()) {
    bad("\"semigroup\": required object");
  } else {
    const auto& sg = doc["semigroup"];
    std::string kind = sg.value("kind", std::string());
    if (kind == "diagonal") {
      if (!sg.contains("lambdas") || !sg["lambdas"].is_array() ||
          sg["lambdas"].empty()) {
        bad("\"semigroup.lambdas\": required nonempty array");
      } else {
        semigroup_ok = true;
        for (const auto& l : sg["lambdas"])
          if (!l.is_number() || l.get<double>() <= 0) {
            bad("\"semigroup.lambdas\": every rate must be > 0");
            semigroup_ok = false;
            break;
          }
      }
    } else if (kind == "shift") {
      bool pts = sg.contains("points") && sg["points"].is_number_integer() &&
                 sg["points"].get<int>() >= 1;
      bool dx = sg.contains("dx") && is_num(sg["dx"]) &&
                sg["dx"].get<double>() > 0;
      if (!pts) bad("\"semigroup.points\": required integer >= 1");
      if (!dx)
        bad("\"semigroup.dx\": required positive number");
      else
        shift_dx = sg["dx"].get<double>();
      semigroup_ok = pts && dx;
    } else {
      bad("\"semigroup.kind\": must be \"diagonal\" or \"shift\"");
    }
  }

  // --- noise plan ---
  double dt = 0.0, T = 0.0;
  bool plan_ok = false;
  if (!doc.contains("noise") || !doc["noise"].is_object()) {
    bad("\"noise\": required object");
  } else {
    auto& nz = doc["noise"];
    bool ok = true;
    if (!(nz.contains("dim") && nz["dim"].is_number_integer() &&
          nz["dim"].get<int>() >= 1)) {
      bad("\"noise.dim\": required integer >= 1");
      ok = false;
    }
    if (!(nz.contains("dt") && is_num(nz["dt"]) &&
          nz["dt"].get<double>() > 0)) {
      bad("\"noise.dt\": required positive number");
      ok = false;
    } else {
      dt = nz["dt"].get<double>();
    }
    long steps = -1;
    if (nz.contains("steps")) {
      if (nz["steps"].is_number_integer() && nz["steps"].get<long>() >= 1)
        steps = nz["steps"].get<long>();
      else {
        bad("\"noise.steps\": integer >= 1");
        ok = false;
      }
    }
    if (ok && nz.contains("T")) {
      if (!is_num(nz["T"]) || nz["T"].get<double>() <= 0) {
        bad("\"noise.T\": positive number");
        ok = false;
      } else {
        double Tgiven = nz["T"].get<double>();
        long implied = std::lround(Tgiven / dt);
        if (implied < 1 ||
            std::abs(implied * dt - Tgiven) > 1e-9 * std::max(1.0, Tgiven)) {
          bad("\"noise\": T must equal steps*dt for an integer step count");
          ok = false;
        } else if (steps >= 0 && steps != implied) {
          bad("\"noise\": steps and T disagree (steps*dt != T)");
          ok = false;
        } else {
          steps = implied;
          nz["steps"] = steps;  // normalized form used downstream
        }
      }
    }
    if (ok && steps < 0) {
      bad("\"noise\": needs steps or T");
      ok = false;
    }
    // Accept any nonnegative integer: in-memory documents built with C++
    // integer literals carry the signed type even when the value fits.
    const bool seed_ok =
        nz.contains("seed") &&
        (nz["seed"].is_number_unsigned() ||
         (nz["seed"].is_number_integer() && nz["seed"].get<long long>() >= 0));
    if (!seed_ok) {
      if (!nz.contains("seed")) {
        nz["seed"] = 0;
      } else {
        bad("\"noise.seed\": unsigned integer");
        ok = false;
      }
    }
    if (ok) {
      plan_ok = true;
      T = steps * dt;
    }
  }

  // --- frame ---
  bool frame_present = doc.contains("frame");
  bool frame_needed =
      kFrameKinds.count(experiment) > 0 ||
      ((experiment == "simulate" || experiment == "flow-test") &&
       doc.value("test", nlohmann::json::object())
               .value("scheme", std::string("direct")) == "dilated");
  if (frame_needed && !frame_present)
    bad("\"frame\": required for experiment \"" + experiment + "\"");
  if (frame_present) {
    if (!doc["frame"].is_object()) {
      bad("\"frame\": must be an object");
    } else {
      const auto& fr = doc["frame"];
      double fdx = num_or(fr, "dx", shift_dx);
      if (fdx <= 0)
        bad("\"frame.dx\": required positive number (diagonal semigroups "
            "have no base grid to inherit it from)");
      if (shift_dx > 0 && fr.contains("dx") &&
          std::abs(fdx - shift_dx) > 1e-12 * shift_dx)
        bad("\"frame.dx\": must equal the halfline grid spacing");
      double eps = num_or(fr, "eps_frame", 1e-10);
      if (!(eps > 0 && eps < 1)) bad("\"frame.eps_frame\": must be in (0, 1)");
      if (fr.contains("window")) {
        const auto& w = fr["window"];
        if (!w.is_object() || num_or(w, "l_neg", -1) <= 0 ||
            num_or(w, "l_pos", -1) <= 0)
          bad("\"frame.window\": needs positive l_neg and l_pos");
      }
      if (plan_ok && fdx > 0 && !aligned_multiple(dt, fdx))
        bad("\"noise.dt\": must be an integer multiple of the frame grid "
            "spacing");
    }
  }
  if (plan_ok && shift_dx > 0 && !aligned_multiple(dt, shift_dx))
    bad("\"noise.dt\": must be an integer multiple of the halfline grid "
        "spacing");

  // --- model ---
  bool model_needed = experiment != "verify-frame";
  if (model_needed) {
    if (!doc.contains("model") || !doc["model"].is_object() ||
        !doc["model"].contains("id")) {
      bad("\"model\": required object with an \"id\"");
    } else if (semigroup_ok && plan_ok) {
      // Build it once to surface parameter and constant problems now.
      // (plan_ok gates on noise.dim, which the build folds into the model.)
      try {
        ExperimentConfig probe;
        probe.doc_ = doc;
        ContractionSemigroup S = probe.build_semigroup();
        CoefficientModel m = probe.build_model(S.space);
        m.validate();
      } catch (const ConfigError& e) {
        for (const auto& i : e.issues) issues.push_back("\"model\": " + i);
      }
    }
  }

  // --- initial-condition blocks ---
  auto check_initial = [&](const nlohmann::json& blk, const std::string& where,
                           bool allow_random) {
    if (!blk.is_object()) {
      bad("\"" + where + "\": must be an object");
      return;
    }
    std::string kind = blk.value("kind", std::string("zero"));
    if (kind == "zero") return;
    if (kind == "basis") {
      if (!blk.contains("index") || !blk["index"].is_number_integer())
        bad("\"" + where + ".index\": required integer");
      return;
    }
    if (kind == "vector") {
      if (!blk.contains("values") || !blk["values"].is_array())
        bad("\"" + where + ".values\": required array");
      return;
    }
    if (kind == "gaussian") {
      if (!allow_random)
        bad("\"" + where + "\": kind \"gaussian\" only allowed where a "
            "sampler is accepted");
      return;
    }
    bad("\"" + where + ".kind\": unknown kind \"" + kind + "\"");
  };
  if (doc.contains("initial"))
    check_initial(doc["initial"], "initial",
                  experiment == "markov-tower");

  // --- per-experiment test parameters ---
  nlohmann::json test = doc.value("test", nlohmann::json::object());
  if (doc.contains("test") && !doc["test"].is_object())
    bad("\"test\": must be an object");

  auto need_time = [&](const char* key, bool required) {
    if (!test.contains(key)) {
      if (required) bad(std::string("\"test.") + key + "\": required time");
      return -1.0;
    }
    if (!is_num(test[key])) {
      bad(std::string("\"test.") + key + "\": must be a number");
      return -1.0;
    }
    double v = test[key].get<double>();
    if (plan_ok) {
      if (v < -1e-12 || v > T * (1 + 1e-12))
        bad(std::string("\"test.") + key + "\": outside [0, T]");
      else if (!aligned_multiple(v, dt))
        bad(std::string("\"test.") + key + "\": not on the time grid");
    }
    return v;
  };

  if (experiment == "flow-test" || experiment == "markov-ck" ||
      experiment == "markov-tower") {
    double r = need_time("r", true);
    double s = need_time("s", true);
    double t = need_time("t", true);
    if (r >= 0 && s >= 0 && t >= 0 && !(r <= s && s <= t))
      bad("\"test\": needs r <= s <= t");
  }
  if (experiment == "lemma31-test") need_time("s", true);
  if (experiment == "lipschitz") {
    for (const char* key : {"xi", "zeta"}) {
      if (!test.contains(key))
        bad(std::string("\"test.") + key +
            "\": required initial-value block");
      else
        check_initial(test[key], std::string("test.") + key, false);
    }
  }
  if (experiment == "markov-tower" && test.contains("xi"))
    check_initial(test["xi"], "test.xi", true);
  if (experiment == "simulate" || experiment == "flow-test") {
    std::string scheme = test.value("scheme", std::string("direct"));
    if (scheme != "direct" && scheme != "dilated")
      bad("\"test.scheme\": must be \"direct\" or \"dilated\"");
  }

  if (!issues.empty()) throw ConfigError(issues);

  ExperimentConfig cfg;
  cfg.doc_ = std::move(doc);
  cfg.name_ = name;
  cfg.experiment_ = experiment;
  cfg.output_dir_ = cfg.doc_.value("output_dir", std::string("out"));
  cfg.test_ = cfg.doc_.value("test", nlohmann::json::object());
  cfg.hash_ = canonical_hash(cfg.doc_);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse(std::move(doc));
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

ContractionSemigroup ExperimentConfig::build_semigroup() const {
  const auto& sg = doc_.at("semigroup");
  std::string kind = sg.value("kind", std::string());
  if (kind == "diagonal") {
    auto lambdas = sg.at("lambdas").get<std::vector<double>>();
    Eigen::VectorXd lv =
        Eigen::Map<const Eigen::VectorXd>(lambdas.data(), lambdas.size());
    return ContractionSemigroup::diagonal(lv);
  }
  int points = sg.at("points").get<int>();
  double dx = sg.at("dx").get<double>();
  return ContractionSemigroup::shift(SpaceSpec::halfline(dx, points));
}

DilationFrame ExperimentConfig::build_frame(
    const ContractionSemigroup& S) const {
  if (!has_frame()) throw ConfigError("config has no \"frame\" block");
  const auto& fr = doc_.at("frame");
  double dx = num_or(fr, "dx",
                     S.kind == ContractionSemigroup::Kind::shift
                         ? S.space.dx
                         : 0.0);
  double eps = num_or(fr, "eps_frame", 1e-10);
  Window w;
  if (fr.contains("window")) {
    w.l_neg = fr["window"].at("l_neg").get<double>();
    w.l_pos = fr["window"].at("l_pos").get<double>();
  } else {
    w = DilationFrame::default_window(S, build_plan().horizon(), dx, eps);
  }
  return DilationFrame::dilate(S, w, dx, eps);
}

CoefficientModel ExperimentConfig::build_model(const SpaceSpec& space) const {
  const auto& mb = doc_.at("model");
  nlohmann::json params = mb.value("params", nlohmann::json::object());
  // noise.dim is the single source of truth for the driving dimension; a model
  // param may restate it but may not contradict it.
  const int plan_dim = doc_.at("noise").at("dim").get<int>();
  if (params.contains("noise_dim")) {
    if (params.at("noise_dim").get<int>() != plan_dim)
      throw ConfigError("model params.noise_dim (" +
                        params.at("noise_dim").dump() +
                        ") contradicts noise.dim (" + std::to_string(plan_dim) +
                        ")");
  } else {
    params["noise_dim"] = plan_dim;
  }
  return make_model(mb.at("id").get<std::string>(), space, params);
}

NoisePlan ExperimentConfig::build_plan() const {
  const auto& nz = doc_.at("noise");
  NoisePlan plan;
  plan.noise_dim = nz.at("dim").get<int>();
  plan.dt = nz.at("dt").get<double>();
  plan.steps = nz.at("steps").get<int>();
  plan.seed = nz.at("seed").get<std::uint64_t>();
  return plan;
}

namespace {

HVec initial_from_block(const nlohmann::json& blk, const SpaceSpec& space,
                        const std::string& where) {
  std::string kind = blk.value("kind", std::string("zero"));
  if (kind == "zero") return HVec::zero(space);
  if (kind == "basis") {
    int idx = blk.at("index").get<int>();
    if (idx < 0 || idx >= space.dim())
      throw ConfigError("\"" + where + ".index\": out of range");
    HVec v = HVec::basis(space, idx);
    double scale = blk.value("scale", 1.0);
    return HVec(space, v.data * scale);
  }
  if (kind == "vector") {
    auto vals = blk.at("values").get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != space.dim())
      throw ConfigError("\"" + where + ".values\": wrong dimension");
    HVec v = HVec::zero(space);
    for (int i = 0; i < space.dim(); ++i) v.data[i] = vals[i];
    return v;
  }
  throw ConfigError("\"" + where + "\": kind \"" + kind +
                    "\" is not deterministic");
}

}  // namespace

HVec ExperimentConfig::build_initial(const SpaceSpec& space,
                                     const std::string& key) const {
  nlohmann::json blk = nlohmann::json::object();
  if (key == "initial") {
    if (doc_.contains("initial")) blk = doc_.at("initial");
  } else if (test_.contains(key)) {
    blk = test_.at(key);
  }
  return initial_from_block(blk, space, key);
}

std::function<HVec(std::uint64_t)> ExperimentConfig::build_initial_sampler(
    const SpaceSpec& space, const std::string& key) const {
  nlohmann::json blk = nlohmann::json::object();
  if (key == "initial") {
    if (doc_.contains("initial")) blk = doc_.at("initial");
  } else if (test_.contains(key)) {
    blk = test_.at(key);
  }
  std::string kind = blk.value("kind", std::string("zero"));
  if (kind != "gaussian") {
    HVec fixed = initial_from_block(blk, space, key);
    return [fixed](std::uint64_t) { return fixed; };
  }
  double scale = blk.value("scale", 1.0);
  std::uint64_t seed = build_plan().seed ^ kSamplerSalt;
  return [space, scale, seed](std::uint64_t k) {
    GaussianStream gs(noise_stream_key(seed, k));
    HVec v = HVec::zero(space);
    for (int i = 0; i < space.dim(); ++i) v.data[i] = scale * gs.next();
    return v;
  };
}

// ---------------------------------------------------------------------------
// Published schema
// ---------------------------------------------------------------------------

nlohmann::json schema_document() {
  nlohmann::json s;
  s["tool_version"] = kToolVersion;
  s["experiments"] = experiment_kinds();
  s["exit_codes"] = {{"0", "all checks passed"},
                     {"1", "a test or probe failed"},
                     {"2", "configuration error"},
                     {"3", "runtime or overflow error"}};
  s["config"] = {
      {"name", "string, unique per suite"},
      {"experiment", "one of the listed kinds"},
      {"semigroup",
       {{"kind", "\"diagonal\" or \"shift\""},
        {"lambdas", "diagonal: array of rates > 0; state space is spectral"},
        {"points", "shift: halfline grid size"},
        {"dx", "shift: grid spacing"}}},
      {"frame",
       {{"dx", "dilated grid spacing; shift frames inherit the base spacing"},
        {"eps_frame", "frame tolerance, default 1e-10"},
        {"window",
         "{l_neg, l_pos} in time units; omitted: sized from the horizon"}}},
      {"model",
       {{"id", "linear-ou | allen-cahn | shift-hjm | cubic-blowup"},
        {"params", "model-specific parameter object"}}},
      {"noise",
       {{"dim", "noise dimension m"},
        {"dt", "step size; integer multiple of any grid spacing in play"},
        {"steps", "step count N (or give T = N*dt)"},
        {"T", "optional horizon, must equal steps*dt"},
        {"seed", "64-bit master seed"}}},
      {"initial",
       "{kind: zero|basis|vector|gaussian, index, scale, values}; "
       "gaussian only where a sampler is accepted"},
      {"test", "experiment-specific block, see \"tests\""},
      {"output_dir", "artifact directory, default \"out\""}};
  s["tests"] = {
      {"verify-frame", "n_t, n_x, n_h sample counts"},
      {"probe-conditions",
       "n_samples, t_samples[], radius_tiers[], slack, hemicont_tol"},
      {"probe-transferred", "same as probe-conditions"},
      {"simulate", "n_paths, scheme: direct|dilated, save_paths"},
      {"cross-validate", "n_paths, tol, s"},
      {"flow-test", "r, s, t, n_paths, tol, scheme"},
      {"lemma31-test", "s, n_paths, tol"},
      {"markov-ck", "r, s, t, n_outer, n_inner, z_max, phi"},
      {"markov-tower", "r, s, t, n_outer, n_inner, z_max, phi, xi"},
      {"apriori", "n_paths, moment_order"},
      {"lipschitz", "xi, zeta, n_paths"},
      {"convergence", "n_paths, refine, min_slope"}};
  s["phi"] = {
      {"gauss_exp", "{kind, c}: exp(-c||x||^2)"},
      {"coord_sigmoid", "{kind, w[]}: tanh(<x, w>)"},
      {"indicator_ball", "{kind, center[], radius}"}};
  s["outputs"] = {
      {"manifest", "<name>-manifest.json: config hash, version, seeds, "
                   "timing, pass rollup, aborted paths"},
      {"report", "<name>-report.json: experiment-specific report"},
      {"paths", "simulate: <name>-path-NNN.csv, columns t then components"}};
  return s;
}

}  // namespace spde
