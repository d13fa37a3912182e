#include "taylornet/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "taylornet/express.hpp"
#include "taylornet/io.hpp"
#include "taylornet/landscape.hpp"
#include "taylornet/measure.hpp"

namespace fs = std::filesystem;

namespace taylornet {

namespace {

const char* kWidths = "256,512,1024,2048,4096,8192,16384,32768";

std::vector<KeySpec> common_keys() {
  return {{"seed", "0", false, "master seed"},
          {"threads", "1", false, "worker threads"},
          {"deterministic", "false", false, "ordered reductions only"}};
}

// Keys shared by train and ntk-baseline. Empty values take the task defaults.
std::vector<KeySpec> data_keys() {
  return {{"task", "xor", false, "poly | xor | sensing"},
          {"data", "", false, "dataset CSV (overrides task generation)"},
          {"n", "", false, ""},
          {"n_test", "", false, ""},
          {"d", "", false, ""},
          {"m", "", false, ""},
          {"loss", "", false, "logistic | soft_hinge | huber_abs"},
          {"rank", "", false, "sensing rank"},
          {"label_noise", "", false, "xor label flip rate"},
          {"poly_p", "", false, ""},
          {"poly_alpha", "", false, ""}};
}

}  // namespace

std::vector<std::string> command_names() {
  return {"init-check", "couple-scan", "korder-scan", "train", "ntk-baseline", "landscape", "express", "experiment"};
}

std::vector<KeySpec> command_schema(const std::string& command) {
  std::vector<KeySpec> s;
  if (command == "init-check") {
    s = {{"d", "10", false, ""},          {"m", "1024", false, ""},
         {"bx", "1", false, ""},          {"delta", "0.01", false, "failure probability in the w0 bound"},
         {"probes", "100", false, ""},    {"activation", "relu3_6", false, "relu3_6 | relu_pow{k}"}};
  } else if (command == "couple-scan") {
    s = {{"d", "10", false, ""},
         {"bx", "1", false, ""},
         {"widths", kWidths, false, "comma separated widths"},
         {"trials", "50", false, ""},
         {"col_norm", "1", false, "column norm is col_norm * m^{-1/4}"}};
  } else if (command == "korder-scan") {
    s = {{"k", "3", false, ""}, {"d", "10", false, ""}, {"widths", kWidths, false, ""}, {"trials", "50", false, ""}};
  } else if (command == "train") {
    s = data_keys();
    const std::vector<KeySpec> extra = {{"method", "noisy_sgd", false, "noisy_sgd | clean"},
                                        {"eta", "", false, ""},
                                        {"T", "", false, ""},
                                        {"lambda", "", false, ""},
                                        {"perturb_radius", "", false, ""},
                                        {"perturb_trigger", "", false, ""},
                                        {"perturb_cooldown", "", false, ""},
                                        {"perturb_window", "", false, ""},
                                        {"batch", "", false, ""},
                                        {"record_every", "", false, ""}};
    s.insert(s.end(), extra.begin(), extra.end());
  } else if (command == "ntk-baseline") {
    s = data_keys();
    const std::vector<KeySpec> extra = {{"eta", "0", false, "0 selects the safe step"},
                                        {"T", "", false, ""},
                                        {"ridge", "", false, ""},
                                        {"record_every", "", false, ""}};
    s.insert(s.end(), extra.begin(), extra.end());
  } else if (command == "landscape") {
    s = {{"d", "10", false, ""},
         {"m", "16384", false, ""},
         {"bx", "1", false, ""},
         {"n", "200", false, ""},
         {"loss", "huber_abs", false, ""},
         {"target", "", false, "target polynomial JSON (default: one random quadratic)"},
         {"configs", "20", false, "number of random W"},
         {"max_norm", "1", false, "random W have ||W||_{2,4} <= max_norm"},
         {"check", "clean", false, "clean | randomized"},
         {"mode", "exact", false, "exact | mc (clean check)"},
         {"draws", "200", false, "MC draws (clean check, mc mode)"},
         {"outer", "8", false, "outer sign draws (randomized check)"},
         {"inner", "8", false, "inner sign draws (randomized check)"},
         {"lambda", "0", false, ""},
         {"tolerance", "0.05", false, "verdict fails when slack < -tolerance"},
         {"probes_per_feature", "4", false, ""}};
  } else if (command == "express") {
    s = {{"target", "", true, "target polynomial JSON"},
         {"k", "2", false, "2: quadratic model, >= 3: k-th order model"},
         {"m", "16384", false, ""},
         {"bx", "1", false, ""},
         {"probes_per_feature", "4", false, ""},
         {"ridge", "1e-8", false, "relative ridge"},
         {"eval_points", "200", false, ""},
         {"max_error", "0.05", false, "verdict fails above this max abs error"}};
  } else if (command == "experiment") {
    s = {{"task", "", true, "poly | xor | sensing"},
         {"seeds", "5", false, "number of seeds, seed + 0 .. seed + seeds - 1"},
         {"n", "", false, ""},
         {"n_test", "", false, ""},
         {"d", "", false, ""},
         {"m", "", false, ""},
         {"loss", "", false, ""},
         {"eta", "", false, ""},
         {"T", "", false, ""},
         {"lambda", "", false, ""},
         {"perturb_radius", "", false, ""},
         {"batch", "", false, ""},
         {"ntk_eta", "", false, "0 selects the safe step"},
         {"ntk_T", "", false, ""},
         {"ntk_ridge", "", false, ""},
         {"rank", "", false, ""},
         {"label_noise", "", false, ""},
         {"poly_p", "", false, ""},
         {"poly_alpha", "", false, ""},
         {"prediction", "f_quad", false, "f_quad | mc_forward"},
         {"mc_draws", "32", false, ""}};
  } else {
    return {};
  }
  const auto c = common_keys();
  s.insert(s.end(), c.begin(), c.end());
  return s;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Artifacts written into the output directory; the manifest lists all of them.
class RunOutput {
 public:
  RunOutput(fs::path dir, const RunConfig& cfg) : dir_(std::move(dir)), cfg_(cfg) {}

  fs::path path(const std::string& name) const { return dir_ / name; }

  void text(const std::string& name, const std::string& content) {
    write_text(path(name), content);
    add(name);
  }
  void add(const std::string& name) {
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }
  // Binary container plus its JSON sidecar.
  void add_with_sidecar(const std::string& bin_name) {
    add(bin_name);
    add(fs::path(bin_name).replace_extension(".json").string());
  }

  void write_manifest(int exit_code, const nlohmann::ordered_json& summary) const {
    nlohmann::ordered_json j;
    j["command"] = cfg_.command();
    nlohmann::ordered_json c;
    for (const auto& [k, v] : cfg_.entries()) c[k] = v;
    j["config"] = c;
    j["config_hash"] = git_blob_hash(cfg_.canonical_text());
    nlohmann::ordered_json arts = nlohmann::ordered_json::array();
    for (const auto& f : files_) arts.push_back({{"path", f}, {"blob", git_blob_hash(read_text(path(f)))}});
    j["artifacts"] = arts;
    j["exit_code"] = exit_code;
    j["summary"] = summary;
    write_text(path("manifest.json"), j.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  const RunConfig& cfg_;
  std::vector<std::string> files_;
};

struct Outcome {
  int code = kExitOk;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

// ---- data shared by train / ntk-baseline ----

ExperimentParams resolve_params(RunConfig& cfg, const std::string& task, bool for_experiment) {
  ExperimentParams p = default_experiment_params(task);
  auto set_int = [&](const std::string& key, int& dst) {
    if (cfg.has(key)) dst = cfg.i32(key); else cfg.apply_override(key, std::to_string(dst));
  };
  auto set_dbl = [&](const std::string& key, double& dst) {
    if (cfg.has(key)) dst = cfg.f64(key); else cfg.apply_override(key, fmt(dst));
  };
  set_int("n", p.n);
  set_int("n_test", p.n_test);
  set_int("d", p.d);
  set_int("m", p.m);
  if (cfg.has("loss")) p.loss = loss_from_name(cfg.str("loss")); else cfg.apply_override("loss", loss_name(p.loss));
  set_int("rank", p.rank);
  set_dbl("label_noise", p.label_noise);
  set_int("poly_p", p.poly_p);
  set_dbl("poly_alpha", p.poly_alpha);
  if (for_experiment) {
    set_dbl("eta", p.quad.eta);
    set_int("T", p.quad.T);
    set_dbl("lambda", p.quad.lambda);
    set_dbl("perturb_radius", p.quad.perturb_radius);
    set_int("batch", p.quad.batch);
    set_dbl("ntk_eta", p.ntk.eta);
    set_int("ntk_T", p.ntk.T);
    set_dbl("ntk_ridge", p.ntk.ridge);
    const std::string pred = cfg.str("prediction");
    if (pred != "f_quad" && pred != "mc_forward") throw ConfigError("prediction must be f_quad or mc_forward");
    p.mc_forward = pred == "mc_forward";
    p.mc_draws = cfg.i32("mc_draws");
    p.threads = cfg.i32("threads");
  }
  return p;
}

TaskSplit load_or_generate(RunConfig& cfg, const ExperimentParams& p, std::uint64_t seed) {
  if (cfg.has("data")) {
    TaskSplit s;
    s.train = load_dataset(cfg.str("data"));
    return s;
  }
  return make_task_data(p, seed);
}

void write_split_summary(nlohmann::ordered_json& summary, const std::string& prefix, const Network& net,
                         const TaskSplit& data, LossKind loss, const std::function<Vector(const Matrix&)>& predict) {
  summary[prefix + "train_loss"] = mean_loss(loss, data.train.y, predict(data.train.x));
  if (data.test.n() > 0) {
    const Vector f = predict(data.test.x);
    summary[prefix + "test_loss"] = mean_loss(loss, data.test.y, f);
    int wrong = 0;
    for (Eigen::Index i = 0; i < f.size(); ++i)
      if (!(f(i) * data.test.y(i) > 0.0)) ++wrong;
    summary[prefix + "test_err"] = static_cast<double>(wrong) / f.size();
  }
  (void)net;
}

// ---- commands ----

Outcome cmd_init_check(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  const int d = cfg.i32("d"), m = cfg.i32("m"), probes = cfg.i32("probes");
  const double bx = cfg.f64("bx"), delta = cfg.f64("delta");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  const Network net = init_symmetric(d, m, bx, cfg.u64("seed"), Activation::from_tag(cfg.str("activation")));
  const W0BoundReport b = check_w0_bound(net, delta);
  Rng rng(child_seed(cfg.u64("seed"), 1));
  const WeightDelta zero = WeightDelta::Zero(d, m);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) worst = std::max(worst, std::abs(forward(net, zero, sphere_point(d, bx, rng))));
  const double null_tol = 1e-10 * std::sqrt(static_cast<double>(m));
  const bool null_ok = worst <= null_tol;

  std::ostringstream csv;
  csv << std::setprecision(17) << "check,value,threshold,pass\n"
      << "w0_bound," << b.max_norm << ',' << b.threshold << ',' << (b.ok ? 1 : 0) << '\n'
      << "symmetric_nullity," << worst << ',' << null_tol << ',' << (null_ok ? 1 : 0) << '\n';
  out.text("init_check.csv", csv.str());

  os << std::left << std::setw(20) << "check" << std::setw(16) << "value" << std::setw(16) << "threshold"
     << "verdict\n";
  os << std::setw(20) << "w0_bound" << std::setw(16) << fmt(b.max_norm) << std::setw(16) << fmt(b.threshold)
     << (b.ok ? "PASS" : "FAIL") << '\n';
  os << std::setw(20) << "symmetric_nullity" << std::setw(16) << fmt(worst) << std::setw(16) << fmt(null_tol)
     << (null_ok ? "PASS" : "FAIL") << '\n';
  Outcome o;
  if (!b.ok) os << "verdict: max ||w0_r|| exceeds the w0 bound sqrt(8(d ln 5 + ln(m/delta)))\n";
  if (!null_ok) os << "verdict: symmetric initialization does not vanish\n";
  o.code = (b.ok && null_ok) ? kExitOk : kExitVerdict;
  o.summary["w0_max_norm"] = b.max_norm;
  o.summary["w0_threshold"] = b.threshold;
  o.summary["nullity_max"] = worst;
  return o;
}

Outcome write_scan(const ScanReport& r, RunOutput& out, std::ostream& os) {
  out.text("scan.csv", scan_csv(r));
  const nlohmann::json slopes = scan_slopes_json(r);
  out.text("slopes.json", slopes.dump(2) + "\n");
  os << std::left << std::setw(28) << "statistic" << std::setw(12) << "slope" << "95% band\n";
  for (const auto& [name, fit] : r.slopes)
    os << std::setw(28) << name << std::setw(12) << fmt(fit.slope) << '[' << fmt(fit.lo) << ", " << fmt(fit.hi)
       << "]\n";
  Outcome o;
  for (const auto& [name, fit] : r.slopes) o.summary[name] = fit.slope;
  return o;
}

Outcome cmd_couple_scan(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  const ScanReport r = coupling_scan(cfg.i32("d"), cfg.f64("bx"), cfg.int_list("widths"), ColNormRule{cfg.f64("col_norm")},
                                     cfg.i32("trials"), cfg.u64("seed"), cfg.i32("threads"));
  return write_scan(r, out, os);
}

Outcome cmd_korder_scan(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  const ScanReport r = korder_scan(cfg.i32("k"), cfg.i32("d"), cfg.int_list("widths"), cfg.i32("trials"),
                                   cfg.u64("seed"), cfg.i32("threads"));
  return write_scan(r, out, os);
}

Outcome cmd_train(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  ExperimentParams p = resolve_params(cfg, cfg.str("task"), false);
  const std::uint64_t seed = cfg.u64("seed");
  const TaskSplit data = load_or_generate(cfg, p, seed);
  if (cfg.has("data")) {
    p.d = data.train.d();
    cfg.apply_override("d", std::to_string(p.d));
  }
  OptConfig oc = p.quad;
  auto pick = [&](const std::string& key, auto& dst) {
    using T = std::decay_t<decltype(dst)>;
    if (cfg.has(key)) {
      if constexpr (std::is_same_v<T, int>) dst = cfg.i32(key); else dst = cfg.f64(key);
    } else {
      cfg.apply_override(key, fmt(dst));
    }
  };
  pick("eta", oc.eta);
  pick("T", oc.T);
  pick("lambda", oc.lambda);
  pick("perturb_radius", oc.perturb_radius);
  pick("perturb_trigger", oc.perturb_trigger);
  pick("perturb_cooldown", oc.perturb_cooldown);
  pick("perturb_window", oc.perturb_window);
  pick("batch", oc.batch);
  pick("record_every", oc.record_every);
  oc.seed = child_seed(seed, 2);
  const std::string method = cfg.str("method");
  if (method != "noisy_sgd" && method != "clean") throw ConfigError("method must be noisy_sgd or clean");

  const Network net = init_symmetric(p.d, p.m, data.train.bx, child_seed(seed, 0));
  const RiskSpec spec(net, data.train, p.loss);
  Outcome o;
  Trajectory tr;
  tr = method == "clean" ? train_clean(spec, oc) : noisy_sgd(spec, oc);
  out.text("trajectory.csv", trajectory_csv(tr));
  save_network(net, out.path("network.bin"));
  out.add_with_sidecar("network.bin");
  save_weight_delta(net, tr.w, out.path("weights.bin"));
  out.add_with_sidecar("weights.bin");

  write_split_summary(o.summary, "", net, data, p.loss,
                      [&](const Matrix& x) { return Vector(f_quad_batch(net, tr.w, x)); });
  const TrajRecord& last = tr.records.back();
  o.summary["clean_risk"] = last.clean_risk;
  o.summary["norm24"] = last.norm24;
  o.summary["kicks"] = tr.kicks.size();
  const LocalizeReport loc = sosp_localize(spec, tr);
  o.summary["localize"] = loc.status == LocalizeStatus::Ok ? "ok" : loc.status == LocalizeStatus::Exceeded ? "exceeded" : "skipped";
  os << "method " << method << ", steps " << oc.T << ", kicks " << tr.kicks.size() << '\n';
  for (const auto& [k, v] : o.summary.items())
    if (v.is_number()) os << k << ' ' << fmt(v.get<double>()) << '\n';
  os << "localize " << o.summary["localize"].get<std::string>() << '\n';
  return o;
}

Outcome cmd_ntk_baseline(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  ExperimentParams p = resolve_params(cfg, cfg.str("task"), false);
  const std::uint64_t seed = cfg.u64("seed");
  const TaskSplit data = load_or_generate(cfg, p, seed);
  if (cfg.has("data")) {
    p.d = data.train.d();
    cfg.apply_override("d", std::to_string(p.d));
  }
  OptConfig oc = p.ntk;
  if (cfg.has("T")) oc.T = cfg.i32("T"); else cfg.apply_override("T", std::to_string(oc.T));
  if (cfg.has("ridge")) oc.ridge = cfg.f64("ridge"); else cfg.apply_override("ridge", fmt(oc.ridge));
  if (cfg.has("record_every")) oc.record_every = cfg.i32("record_every");
  else cfg.apply_override("record_every", std::to_string(oc.record_every));
  const Network net = init_symmetric(p.d, p.m, data.train.bx, child_seed(seed, 0));
  const RiskSpec spec(net, data.train, p.loss);
  oc.eta = cfg.f64("eta");
  if (!(oc.eta > 0.0)) oc.eta = ntk_safe_eta(spec, oc.ridge);
  const Trajectory tr = train_linear_ntk(spec, oc);
  out.text("trajectory.csv", trajectory_csv(tr));
  save_network(net, out.path("network.bin"));
  out.add_with_sidecar("network.bin");
  save_weight_delta(net, tr.w, out.path("weights.bin"));
  out.add_with_sidecar("weights.bin");
  Outcome o;
  o.summary["eta"] = oc.eta;
  write_split_summary(o.summary, "", net, data, p.loss,
                      [&](const Matrix& x) { return Vector(f_lin_batch(net, tr.w, x)); });
  o.summary["objective"] = tr.records.back().objective;
  for (const auto& [k, v] : o.summary.items()) os << k << ' ' << fmt(v.get<double>()) << '\n';
  return o;
}

TargetPoly read_target(const std::string& path) {
  try {
    return target_from_json(nlohmann::json::parse(read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("target '" + path + "': " + e.what());
  }
}

Outcome cmd_landscape(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  const int d = cfg.i32("d"), m = cfg.i32("m"), n = cfg.i32("n"), configs = cfg.i32("configs");
  const double bx = cfg.f64("bx"), lambda = cfg.f64("lambda"), tol = cfg.f64("tolerance");
  const std::uint64_t seed = cfg.u64("seed");
  const std::string check = cfg.str("check"), mode = cfg.str("mode");
  if (check != "clean" && check != "randomized") throw ConfigError("check must be clean or randomized");
  if (mode != "exact" && mode != "mc") throw ConfigError("mode must be exact or mc");
  Rng rng(child_seed(seed, 1));
  TargetPoly target;
  if (cfg.has("target")) {
    target = read_target(cfg.str("target"));
  } else {
    target.terms.push_back({1.0, sphere_point(d, 1.0, rng), 2});
  }
  for (const auto& t : target.terms)
    if (t.beta.size() != d) throw ConfigError("target dimension does not match d");

  const Network net = init_symmetric(d, m, bx, child_seed(seed, 0));
  Dataset data;
  data.bx = bx;
  data.x = gen_sphere(n, d, bx, rng);
  data.y = target.eval_rows(data.x);
  FitConfig fc;
  fc.probes_per_feature = cfg.i32("probes_per_feature");
  fc.seed = child_seed(seed, 2);
  const QuadConstruction qc = construct_quadratic_Wstar(net, target, fc);
  RiskSpec spec(net, data, loss_from_name(cfg.str("loss")), lambda);
  spec = spec.with_opt_reference(clean_risk(spec, qc.wstar));
  save_weight_delta(net, qc.wstar, out.path("wstar.bin"));
  out.add_with_sidecar("wstar.bin");

  std::ostringstream csv;
  csv << landscape_csv_header() << '\n';
  Outcome o;
  int violated = 0;
  double worst = INFINITY;
  for (int c = 0; c < configs; ++c) {
    Rng wr(child_seed(seed, 100 + c));
    WeightDelta w = gaussian_matrix(d, m, wr, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    w *= cfg.f64("max_norm") * (1.0 - u(wr)) / norm_2p(w, 4.0);
    LandscapeReport r;
    if (check == "clean") {
      r = clean_landscape_check(spec, w, qc.wstar, mode == "exact" ? LandscapeMode::Exact : LandscapeMode::MonteCarlo,
                                cfg.i32("draws"), wr);
    } else {
      r = randomized_landscape_check(spec, w, qc.wstar, cfg.i32("outer"), cfg.i32("inner"), wr);
    }
    csv << landscape_csv_row(r) << '\n';
    worst = std::min(worst, r.slack);
    const bool fail = r.slack + 3.0 * r.mc_stderr < -tol;
    if (fail) ++violated;
    os << "config " << std::setw(3) << c << "  ||W|| " << std::setw(10) << fmt(r.norm_w) << " slack "
       << std::setw(12) << fmt(r.slack) << ' ' << (fail ? "FAIL" : "ok") << '\n';
  }
  out.text("landscape.csv", csv.str());
  os << "OPT " << fmt(spec.opt_reference()) << ", ||W*||_{2,4} " << fmt(norm_2p(qc.wstar, 4.0)) << ", worst slack "
     << fmt(worst) << ", violations " << violated << '/' << configs << '\n';
  o.summary["opt"] = spec.opt_reference();
  o.summary["worst_slack"] = worst;
  o.summary["violations"] = violated;
  o.code = violated > 0 ? kExitVerdict : kExitOk;
  return o;
}

Outcome cmd_express(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  const TargetPoly target = read_target(cfg.str("target"));
  if (target.terms.empty()) throw ConfigError("target has no terms");
  const int d = static_cast<int>(target.terms.front().beta.size());
  for (const auto& t : target.terms)
    if (t.beta.size() != d) throw ConfigError("target terms disagree on the dimension");
  const int k = cfg.i32("k"), m = cfg.i32("m"), npts = cfg.i32("eval_points");
  const double bx = cfg.f64("bx");
  const std::uint64_t seed = cfg.u64("seed");
  if (k < 2) throw ConfigError("k must be >= 2");
  FitConfig fc;
  fc.probes_per_feature = cfg.i32("probes_per_feature");
  fc.ridge_rel = cfg.f64("ridge");
  fc.seed = child_seed(seed, 2);
  const Activation act = k == 2 ? Activation::relu_cubed_sixth() : Activation::relu_power(k);
  const Network net = init_symmetric(d, m, bx, child_seed(seed, 0), act);

  Rng rng(child_seed(seed, 1));
  const Matrix x = gen_sphere(npts, d, bx, rng);
  const Vector fy = target.eval_rows(x);
  Vector fm(npts);
  WeightDelta wflat;
  double norm_val = 0.0, bound = 0.0;
  std::vector<FitResult> fits;
  if (k == 2) {
    QuadConstruction qc = construct_quadratic_Wstar(net, target, fc);
    fm = f_quad_batch(net, qc.wstar, x);
    wflat = qc.wstar;
    norm_val = qc.norm24_4;
    bound = qc.bound;
    fits = qc.fits;
  } else {
    KorderConstruction kc = construct_korder_Wstar(net, k, target, fc);
    for (int i = 0; i < npts; ++i) fm(i) = f_korder(net, kc.paired, x.row(i).transpose(), k);
    wflat = kc.paired.flat();
    norm_val = kc.norm22k_2k;
    bound = kc.bound;
    fits = kc.fits;
  }
  std::ostringstream csv;
  csv << std::setprecision(17) << "point,target,model,abs_error\n";
  double max_err = 0.0;
  for (int i = 0; i < npts; ++i) {
    const double e = std::abs(fm(i) - fy(i));
    max_err = std::max(max_err, e);
    csv << i << ',' << fy(i) << ',' << fm(i) << ',' << e << '\n';
  }
  out.text("eval.csv", csv.str());
  out.text("fit_report.json", fit_report_json(fits).dump(2) + "\n");
  save_network(net, out.path("network.bin"));
  out.add_with_sidecar("network.bin");
  save_weight_delta(net, wflat, out.path("wstar.bin"));
  out.add_with_sidecar("wstar.bin");

  const std::string norm_name = k == 2 ? "||W*||_{2,4}^4" : "||W*||_{2,2k}^{2k}";
  os << "max abs error " << fmt(max_err) << " over " << npts << " points\n"
     << norm_name << ' ' << fmt(norm_val) << ", bound " << fmt(bound) << '\n';
  Outcome o;
  o.summary["max_abs_error"] = max_err;
  o.summary["norm"] = norm_val;
  o.summary["bound"] = bound;
  if (max_err > cfg.f64("max_error")) {
    os << "verdict: max abs error exceeds max_error\n";
    o.code = kExitVerdict;
  }
  return o;
}

Outcome cmd_experiment(RunConfig& cfg, RunOutput& out, std::ostream& os) {
  const std::string task = cfg.str("task");
  if (task != "poly" && task != "xor" && task != "sensing") throw ConfigError("task must be poly, xor or sensing");
  const ExperimentParams p = resolve_params(cfg, task, true);
  const int ns = cfg.i32("seeds");
  if (ns < 1) throw ConfigError("seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < ns; ++i) seeds.push_back(cfg.u64("seed") + static_cast<std::uint64_t>(i));
  const ExperimentResult r = run_experiment(p, seeds);
  out.text("experiment.csv", experiment_csv(r));
  const nlohmann::json j = experiment_json(r);
  out.text("experiment.json", j.dump(2) + "\n");
  os << std::left << std::setw(8) << "seed" << std::setw(14) << "quad_loss" << std::setw(14) << "ntk_loss"
     << std::setw(12) << "quad_err" << "ntk_err\n";
  int failed = 0;
  for (const auto& s : r.seeds) {
    if (!s.ok) {
      ++failed;
      os << std::setw(8) << s.seed << "aborted: " << s.error << '\n';
      continue;
    }
    os << std::setw(8) << s.seed << std::setw(14) << fmt(s.quad_test_loss) << std::setw(14) << fmt(s.ntk_test_loss)
       << std::setw(12) << fmt(s.quad_test_err) << fmt(s.ntk_test_err) << '\n';
  }
  os << "quadratic wins " << r.wins << '/' << ns << '\n';
  Outcome o;
  o.summary["wins"] = r.wins;
  o.summary["failed_seeds"] = failed;
  if (task == "xor") o.summary["quad_err_le_0.2"] = r.quad_err_below_02;
  if (failed > 0) o.code = kExitNumerical;
  return o;
}

// "--key value" / "--key=value" pairs left over after the common flags.
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& rest) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (size_t i = 0; i < rest.size(); ++i) {
    const std::string& a = rest[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) throw ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2), value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= rest.size()) throw ConfigError("option --" + key + " needs a value");
      value = rest[++i];
    }
    std::replace(key.begin(), key.end(), '-', '_');
    kv.emplace_back(key, value);
  }
  return kv;
}

// Removes the files a previous run recorded in its manifest.
void clear_previous_run(const fs::path& dir) {
  const auto manifest = nlohmann::json::parse(read_text(dir / "manifest.json"), nullptr, false);
  if (!manifest.is_discarded() && manifest.contains("artifacts"))
    for (const auto& a : manifest["artifacts"])
      if (a.contains("path")) fs::remove(dir / a["path"].get<std::string>());
  fs::remove(dir / "manifest.json");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"taylornet: randomized coupling experiments for two-layer networks"};
  app.require_subcommand(1);
  struct Common {
    std::string config, out_dir, seed, threads;
    bool deterministic = false, force = false;
    std::string task;
  };
  std::map<std::string, Common> common;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    Common& c = common[name];
    sub->add_option("--config", c.config, "key = value config file");
    sub->add_option("--seed", c.seed, "master seed (u64)");
    sub->add_option("--out", c.out_dir, "output directory");
    sub->add_option("--threads", c.threads, "worker threads");
    sub->add_flag("--deterministic", c.deterministic, "ordered reductions");
    sub->add_flag("--force", c.force, "overwrite a previous run in --out");
    if (name == "experiment") sub->add_option("task", c.task, "poly | xor | sensing")->required();
    sub->allow_extras();
  }
  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests land here as well.
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const Common& c = common[command];

  RunConfig cfg(command, command_schema(command));
  try {
    if (!c.config.empty()) {
      if (!fs::exists(c.config)) throw ConfigError("config file not found: " + c.config);
      cfg.apply_file_text(read_text(c.config), c.config);
    }
    for (const auto& [k, v] : parse_overrides(sub->remaining())) cfg.apply_override(k, v);
    if (!c.seed.empty()) cfg.apply_override("seed", c.seed);
    if (!c.threads.empty()) cfg.apply_override("threads", c.threads);
    if (c.deterministic) cfg.apply_override("deterministic", "true");
    if (!c.task.empty()) cfg.apply_override("task", c.task);
    cfg.require_complete();
    cfg.u64("seed");
    if (cfg.i32("threads") < 1) throw ConfigError("threads must be >= 1");
    cfg.flag("deterministic");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const fs::path dir = c.out_dir.empty() ? fs::path("taylornet_out") / command : fs::path(c.out_dir);
  if (fs::exists(dir / "manifest.json")) {
    if (!c.force) {
      err << "error: " << (dir / "manifest.json").string() << " exists; rerun with --force to replace that run\n";
      return kExitUsage;
    }
    clear_previous_run(dir);
  }
  fs::create_directories(dir);

  RunOutput output(dir, cfg);
  std::ostringstream report;
  Outcome o;
  try {
    if (command == "init-check") o = cmd_init_check(cfg, output, report);
    else if (command == "couple-scan") o = cmd_couple_scan(cfg, output, report);
    else if (command == "korder-scan") o = cmd_korder_scan(cfg, output, report);
    else if (command == "train") o = cmd_train(cfg, output, report);
    else if (command == "ntk-baseline") o = cmd_ntk_baseline(cfg, output, report);
    else if (command == "landscape") o = cmd_landscape(cfg, output, report);
    else if (command == "express") o = cmd_express(cfg, output, report);
    else if (command == "experiment") o = cmd_experiment(cfg, output, report);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalAbort& e) {
    out << report.str();
    err << "numerical abort: " << e.what() << '\n';
    o.code = kExitNumerical;
    o.summary["abort"] = e.what();
    output.write_manifest(o.code, o.summary);
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  output.write_manifest(o.code, o.summary);
  out << report.str();
  out << "artifacts written to " << dir.string() << '\n';
  return o.code;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace taylornet
