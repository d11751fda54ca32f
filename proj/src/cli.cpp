#include "rbqkd/cli.hpp"

#include "rbqkd/chsh.hpp"
#include "rbqkd/entropy.hpp"
#include "rbqkd/errors.hpp"
#include "rbqkd/io.hpp"
#include "rbqkd/keyrate.hpp"
#include "rbqkd/lift.hpp"
#include "rbqkd/models.hpp"
#include "rbqkd/overlap.hpp"
#include "rbqkd/protocol.hpp"
#include "rbqkd/random.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>

namespace rbqkd::cli {

using nlohmann::json;
namespace fs = std::filesystem;

nlohmann::json RunManifest::to_json() const {
  return {{"subcommand", subcommand},
          {"config_digest", config_digest},
          {"seed", seed},
          {"version", version},
          {"outputs", outputs}};
}

std::string config_digest(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string format_number(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(12) << (v == 0.0 ? 0.0 : v);
  return s.str();
}

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes "key value" lines with uniform number formatting.
class Printer {
 public:
  explicit Printer(std::ostream& out) : out_(out) {}

  void line(const std::string& key, double v) { out_ << key << ' ' << format_number(v) << '\n'; }
  void line(const std::string& key, const std::string& v) { out_ << key << ' ' << v << '\n'; }
  void line(const std::string& key, bool v) { out_ << key << ' ' << (v ? "true" : "false") << '\n'; }
  void line(const std::string& key, std::uint64_t v) { out_ << key << ' ' << v << '\n'; }
  void raw(const std::string& text) { out_ << text; }

 private:
  std::ostream& out_;
};

struct Run {
  std::string name;
  std::uint64_t seed = 1;
  std::string out_dir;
  json config = json::object();
  json result = json::object();
  RunManifest manifest;

  fs::path path(const std::string& file) const { return fs::path(out_dir) / file; }

  void write_text(const std::string& file, const std::string& text) {
    fs::create_directories(out_dir);
    const fs::path p = path(file);
    std::ofstream f(p);
    if (!f) throw DomainError("cannot write " + p.string());
    f << text;
    manifest.outputs.push_back(p.string());
  }

  /// Writes <name>.json holding the manifest, config and result.
  void finish() {
    manifest.subcommand = name;
    manifest.seed = seed;
    manifest.config_digest = config_digest(config);
    const fs::path p = path(name + ".json");
    manifest.outputs.push_back(p.string());
    fs::create_directories(out_dir);
    std::ofstream f(p);
    if (!f) throw DomainError("cannot write " + p.string());
    f << json{{"manifest", manifest.to_json()}, {"config", config}, {"result", result}}.dump(2) << '\n';
  }
};

json table_json(const std::vector<std::pair<std::string, double>>& rows) {
  json j = json::object();
  for (const auto& [k, v] : rows) j[k] = v;
  return j;
}

std::vector<double> as_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return {j.get<double>()};
}

std::string state_text(const ComplexMatrix& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) s += ' ';
      s += format_number(m(i, k).real());
      const double im = m(i, k).imag();
      s += (im < 0 ? "-" : "+") + format_number(std::abs(im)) + "i";
    }
    s += '\n';
  }
  return s;
}

// Subcommand bodies. Each fills run.config before doing work and run.result
// afterwards, and returns an exit code.

struct KeyrateArgs {
  double omega = 2.0 * std::sqrt(2.0);
  double eps = 0.0;
  double qx = 0.0;
  double qz = 0.0;
  std::string config;
};

int cmd_keyrate(const KeyrateArgs& a, Run& run, Printer& out) {
  if (a.config.empty()) {
    RateInputs in{a.omega, a.eps, a.qx, a.qz};
    run.config = {{"omega", a.omega}, {"eps", a.eps}, {"qx", a.qx}, {"qz", a.qz}};
    const double rate = routed_bb84_rate(in);
    out.line("rate", rate);
    out.line("secure", rate > 0.0);
    run.result = {{"rate", rate}, {"secure", rate > 0.0}};
    run.finish();
    return kExitOk;
  }
  const json grid = io::read_json_file(a.config);
  run.config = grid;
  const auto omegas = as_list(grid.at("omega"));
  const auto epss = grid.contains("eps") ? as_list(grid.at("eps")) : std::vector<double>{0.0};
  const auto qxs = grid.contains("qx") ? as_list(grid.at("qx")) : std::vector<double>{0.0};
  const bool symmetric = grid.value("symmetric", false);
  const auto qzs = grid.contains("qz") ? as_list(grid.at("qz")) : std::vector<double>{0.0};
  std::ostringstream csv;
  csv << "omega,eps,qx,qz,rate,secure\n";
  std::size_t rows = 0;
  for (double w : omegas)
    for (double e : epss)
      for (double qx : qxs)
        for (double qz : symmetric ? std::vector<double>{qx} : qzs) {
          const double rate = routed_bb84_rate({w, e, qx, qz});
          csv << format_number(w) << ',' << format_number(e) << ',' << format_number(qx) << ','
              << format_number(qz) << ',' << format_number(rate) << ',' << (rate > 0.0 ? 1 : 0) << '\n';
          ++rows;
        }
  run.write_text("keyrate.csv", csv.str());
  out.raw(csv.str());
  run.result = {{"rows", rows}};
  run.finish();
  return kExitOk;
}

int cmd_overlap(const std::string& input, Run& run, Printer& out) {
  const json j = io::read_json_file(input);
  run.config = j;
  const DensityOperator sigma = io::decode_density(j.at("sigma"));
  const Reflection x = io::decode_reflection(j.at("x"));
  const Reflection z = io::decode_reflection(j.at("z"));
  std::optional<double> omega;
  if (j.contains("omega")) omega = j.at("omega").get<double>();
  const double marginal_eps = j.value("marginal_eps", 0.0);
  const OverlapReport r = overlap_report(sigma, x, z, omega, marginal_eps);
  const BlockDecomposition d = two_projection_blocks(x.effect(0), z.effect(0), sigma);
  out.line("blocks", static_cast<std::uint64_t>(d.blocks.size()));
  out.line("block_bound", r.block_bound);
  out.line("anticommutator_bound", r.anticommutator_bound);
  if (r.chsh_bound) out.line("chsh_bound", *r.chsh_bound);
  run.result = {{"blocks", d.blocks.size()},
                {"block_bound", r.block_bound},
                {"anticommutator_bound", r.anticommutator_bound}};
  if (r.chsh_bound) run.result["chsh_bound"] = *r.chsh_bound;
  run.finish();
  return kExitOk;
}

struct SelftestArgs {
  double epsilon = 0.0;
  double qx = 0.0;
  double qz = 0.0;
  double k2 = 222.0;
};

int cmd_selftest(const SelftestArgs& a, Run& run, Printer& out) {
  run.config = {{"epsilon", a.epsilon}, {"qx", a.qx}, {"qz", a.qz}, {"k2", a.k2}};
  const DilationBudget b = dilation_budget(a.epsilon);
  const auto dil = dilation_table(b);
  const SelftestRate r = selftest_rate(a.epsilon, a.qx, a.qz, a.k2);
  const auto rate = r.table();
  out.raw("[dilation]\n");
  for (const auto& [k, v] : dil) out.line(k, v);
  out.raw("[rate]\n");
  for (const auto& [k, v] : rate) out.line(k, v);
  run.result = {{"dilation", table_json(dil)}, {"rate", table_json(rate)}};
  run.finish();
  return kExitOk;
}

int cmd_attack(Run& run, Printer& out) {
  const AttackDemo d = attack_example();
  out.line("chsh", d.chsh);
  out.line("key_entropy", d.key_entropy);
  out.line("marginal_defect", d.marginal_defect);
  run.result = {{"chsh", d.chsh}, {"key_entropy", d.key_entropy}, {"marginal_defect", d.marginal_defect}};
  run.finish();
  return kExitOk;
}

struct ModelEquivArgs {
  std::size_t instances = 1;
  std::size_t branches = 2;
  std::size_t dim = 2;
};

int cmd_model_equiv(const ModelEquivArgs& a, Run& run, Printer& out) {
  run.config = {{"instances", a.instances}, {"branches", a.branches}, {"dim", a.dim}};
  double worst = 0.0;
  double worst_marginal = 0.0;
  json rows = json::array();
  for (std::size_t i = 0; i < a.instances; ++i) {
    Rng rng(splitmix(run.seed, i));
    const ModelBInstance m = random_model_b(a.branches, a.dim, rng);
    const ModelAConversion c = convert_model_b_to_a(m);
    double branch = 0.0;
    for (double e : c.branch_errors) branch = std::max(branch, e);
    worst = std::max({worst, branch, c.total_error});
    worst_marginal = std::max(worst_marginal, c.marginal_defect);
    rows.push_back({{"total_error", c.total_error}, {"max_branch_error", branch}, {"marginal_defect", c.marginal_defect}});
  }
  out.line("instances", static_cast<std::uint64_t>(a.instances));
  out.line("max_reconstruction_error", worst);
  out.line("max_marginal_defect", worst_marginal);
  run.result = {{"instances", rows}, {"max_reconstruction_error", worst}, {"max_marginal_defect", worst_marginal}};
  run.finish();
  return kExitOk;
}

Behavior load_behavior(const std::string& path) { return Behavior::parse(read_text(path)); }

json behavior_json(const Behavior& b) { return b.table(); }

struct SrqArgs {
  std::string behavior;
  std::optional<double> visibility;
};

int cmd_srq(const SrqArgs& a, Run& run, Printer& out) {
  const Behavior b = a.visibility ? Behavior::isotropic(*a.visibility) : load_behavior(a.behavior);
  run.config = {{"behavior", behavior_json(b)}};
  const LhvResult r = lhv_membership(b);
  out.line("lhv", r.feasible);
  out.line("facet_value", r.facet_value);
  out.line("residual", r.residual);
  run.result = {{"lhv", r.feasible}, {"facet_value", r.facet_value}, {"residual", r.residual}, {"weights", r.weights}};
  run.finish();
  return kExitOk;
}

struct DdOptArgs {
  std::string config;
  std::string behavior;
  std::optional<double> qber;
  double eps_a = 0.0;
  double eps_b = 0.0;
  std::size_t key_setting = 0;
  std::size_t restarts = 64;
  std::size_t workers = 0;
};

int cmd_dd_opt(DdOptArgs a, Run& run, Printer& out) {
  if (!a.config.empty()) {
    const json j = io::read_json_file(a.config);
    if (j.contains("behavior")) {
      const fs::path p = fs::path(a.config).parent_path() / j.at("behavior").get<std::string>();
      a.behavior = p.string();
    }
    if (j.contains("qber")) a.qber = j.at("qber").get<double>();
    a.eps_a = j.value("eps_a", a.eps_a);
    a.eps_b = j.value("eps_b", a.eps_b);
    a.key_setting = j.value("key_setting", a.key_setting);
    a.restarts = j.value("restarts", a.restarts);
    a.workers = j.value("workers", a.workers);
  }
  if (a.behavior.empty() && !a.qber) throw DomainError("dd-opt needs a behavior table or a qber");
  const Behavior b = a.qber ? bb84_behavior(*a.qber) : load_behavior(a.behavior);
  run.config = {{"behavior", behavior_json(b)}, {"eps_a", a.eps_a},       {"eps_b", a.eps_b},
                {"key_setting", a.key_setting}, {"restarts", a.restarts}};
  RelaxedOptions opts;
  opts.restarts = a.restarts;
  opts.seed = run.seed;
  opts.workers = a.workers;
  const ReductionResult r = reduction_chain(b, a.eps_a, a.eps_b, a.key_setting, opts);
  out.line("eps_prob", r.eps_prob);
  out.line("relaxed_entropy", r.relaxed);
  out.line("continuity", r.continuity);
  out.line("lifted_entropy", r.value);
  out.line("residual", r.solution.residual);
  out.line("feasible_restarts", static_cast<std::uint64_t>(r.solution.feasible_restarts));
  out.raw("state\n" + state_text(r.solution.state.matrix()));
  run.result = {{"eps_prob", r.eps_prob},
                {"relaxed_entropy", r.relaxed},
                {"continuity", r.continuity},
                {"lifted_entropy", r.value},
                {"residual", r.solution.residual},
                {"feasible_restarts", r.solution.feasible_restarts},
                {"state", io::encode(r.solution.state)}};
  run.finish();
  return kExitOk;
}

ProtocolConfig protocol_config(const json& j) {
  ProtocolConfig c;
  c.rounds = j.value("rounds", c.rounds);
  c.gamma = j.value("gamma", c.gamma);
  c.p_a = j.value("p_a", c.p_a);
  c.p_b = j.value("p_b", c.p_b);
  c.p_f = j.value("p_f", c.p_f);
  c.p_g = j.value("p_g", c.p_g);
  c.t_a = j.value("t_a", c.t_a);
  c.t_b = j.value("t_b", c.t_b);
  c.depolarizing_q = j.value("depolarizing_q", c.depolarizing_q);
  c.local_q = j.value("local_q", c.local_q);
  c.accept_tolerance = j.value("accept_tolerance", c.accept_tolerance);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  return c;
}

json protocol_config_json(const ProtocolConfig& c) {
  return {{"rounds", c.rounds},   {"gamma", c.gamma},
          {"p_a", c.p_a},         {"p_b", c.p_b},
          {"p_f", c.p_f},         {"p_g", c.p_g},
          {"t_a", c.t_a},         {"t_b", c.t_b},
          {"depolarizing_q", c.depolarizing_q}, {"local_q", c.local_q},
          {"accept_tolerance", c.accept_tolerance}};
}

struct SimulateArgs {
  std::string config;
  std::optional<std::size_t> workers;
  std::string rate = "none";
  double alpha = 1.01;
  double p_omega = 1e-10;
};

int cmd_simulate(const SimulateArgs& a, Run& run, bool seed_given, Printer& out) {
  const json file = a.config.empty() ? json::object() : io::read_json_file(a.config);
  ProtocolConfig cfg = protocol_config(file);
  if (seed_given) cfg.seed = run.seed;
  run.seed = cfg.seed;
  if (a.workers) cfg.workers = *a.workers;
  run.config = protocol_config_json(cfg);
  run.config["rate"] = a.rate;
  if (a.rate != "none") {
    run.config["alpha"] = a.alpha;
    run.config["p_omega"] = a.p_omega;
  }

  const ProtocolTranscript t = run_protocol(cfg);
  const SiftSummary s = sift(t, cfg);
  run.write_text("simulate.csv", t.to_csv());
  out.raw(t.to_csv());
  out.line("key_rounds", t.key_rounds);
  out.line("expected_key_rounds", s.expected_count);
  out.line("alternative_key_rounds", s.alternative_count);
  out.line("alice_marginal_defect", t.alice_marginal_defect);
  out.line("accepted", t.accepted);

  json stats = json::array();
  for (const auto& st : t.statistics)
    stats.push_back({{"name", st.name}, {"count", st.count}, {"estimate", st.estimate}, {"ideal", st.ideal}, {"sigma", st.sigma}});
  run.result = {{"rounds", t.rounds},
                {"test_rounds", t.test_rounds},
                {"key_rounds", t.key_rounds},
                {"af", t.af},
                {"bg", t.bg},
                {"ab", t.ab},
                {"key", t.key},
                {"alice_marginal", t.alice_marginal},
                {"alice_marginal_defect", t.alice_marginal_defect},
                {"statistics", stats},
                {"sift", {{"key_rounds", s.key_rounds},
                          {"expected_fraction", s.expected_fraction},
                          {"expected_count", s.expected_count},
                          {"sigma", s.sigma},
                          {"alternative_count", s.alternative_count}}},
                {"accepted", t.accepted}};
  if (!t.accepted) {
    run.finish();
    return kExitRejected;
  }
  if (a.rate != "none") {
    EndToEndOptions o;
    o.asymptotic = a.rate == "asymptotic";
    o.alpha = a.alpha;
    o.p_omega = a.p_omega;
    o.relaxed.seed = cfg.seed;
    const EndToEndReport r = end_to_end_rate(t, cfg, o);
    const std::vector<std::pair<std::string, double>> rows = {
        {"win_af", r.win_af},     {"win_bg", r.win_bg},         {"eps_a", r.eps_a},
        {"eps_b", r.eps_b},       {"eps_prob", r.eps_prob},     {"relaxed_entropy", r.relaxed},
        {"continuity", r.continuity}, {"lifted_entropy", r.lifted_entropy}, {"qber_key", r.qber_key},
        {"leak", r.leak},         {"penalty", r.penalty},       {"rate", r.rate}};
    for (const auto& [k, v] : rows) out.line(k, v);
    run.result["rate"] = table_json(rows);
  }
  run.finish();
  return kExitOk;
}

struct EntropyArgs {
  std::optional<double> binary;
  std::string state;
  std::vector<std::size_t> a_factors{0};
};

int cmd_entropy(const EntropyArgs& a, Run& run, Printer& out) {
  if (a.binary) {
    run.config = {{"binary", *a.binary}};
    const double h = binary_entropy(*a.binary);
    out.line("binary_entropy", h);
    run.result = {{"binary_entropy", h}};
  } else {
    const json j = io::read_json_file(a.state);
    run.config = {{"state", j}, {"a_factors", a.a_factors}};
    const DensityOperator rho = io::decode_density(j);
    const double h = conditional_entropy(rho, a.a_factors);
    out.line("conditional_entropy", h);
    run.result = {{"conditional_entropy", h}};
  }
  run.finish();
  return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Routed Bell-test QKD toolkit", "rbqkd"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Run run;
  const char* env_dir = std::getenv(kOutDirEnv);
  run.out_dir = env_dir && *env_dir ? env_dir : ".";
  app.add_option("--out-dir", run.out_dir, "directory for machine-readable output");
  app.add_option("--seed", run.seed, "seed for every random draw");

  std::function<int()> action;
  Printer printer(out);

  KeyrateArgs keyrate;
  auto* kr = app.add_subcommand("keyrate", "asymptotic key rate, single point or grid");
  kr->add_option("--omega", keyrate.omega, "CHSH correlator");
  kr->add_option("--eps", keyrate.eps, "marginal slack");
  kr->add_option("--qx", keyrate.qx);
  kr->add_option("--qz", keyrate.qz);
  kr->add_option("--config", keyrate.config, "JSON grid with omega, eps, qx, qz lists")->check(CLI::ExistingFile);
  kr->callback([&] { action = [&] { return cmd_keyrate(keyrate, run, printer); }; });

  std::string overlap_input;
  auto* ov = app.add_subcommand("overlap", "effective-overlap bounds for a state and two reflections");
  ov->add_option("--input", overlap_input, "JSON with sigma, x, z")->required()->check(CLI::ExistingFile);
  ov->callback([&] { action = [&] { return cmd_overlap(overlap_input, run, printer); }; });

  SelftestArgs selftest;
  auto* st = app.add_subcommand("selftest-constants", "dilation and rate constants for a CHSH deficit");
  st->add_option("--epsilon", selftest.epsilon, "deficit from the Tsirelson winning probability")->required();
  st->add_option("--qx", selftest.qx);
  st->add_option("--qz", selftest.qz);
  st->add_option("--k2", selftest.k2);
  st->callback([&] { action = [&] { return cmd_selftest(selftest, run, printer); }; });

  auto* ad = app.add_subcommand("attack-demo", "switch attack violating the marginal constraint");
  ad->callback([&] { action = [&] { return cmd_attack(run, printer); }; });

  ModelEquivArgs model;
  auto* me = app.add_subcommand("model-equiv", "convert random switch models to channel models");
  me->add_option("--instances", model.instances)->check(CLI::PositiveNumber);
  me->add_option("--branches", model.branches)->check(CLI::PositiveNumber);
  me->add_option("--dim", model.dim)->check(CLI::PositiveNumber);
  me->callback([&] { action = [&] { return cmd_model_equiv(model, run, printer); }; });

  SrqArgs srq;
  auto* sr = app.add_subcommand("srq-check", "local hidden variable membership of a behavior");
  auto* srq_in = sr->add_option_group("input");
  srq_in->add_option("--behavior", srq.behavior, "table of x y a b p lines")->check(CLI::ExistingFile);
  srq_in->add_option("--visibility", srq.visibility, "isotropic CHSH behavior");
  srq_in->require_option(1);
  sr->callback([&] { action = [&] { return cmd_srq(srq, run, printer); }; });

  DdOptArgs dd;
  auto* dopt = app.add_subcommand("dd-opt", "lifted entropy from a behavior and dilation errors");
  dopt->add_option("--config", dd.config, "JSON with behavior, eps_a, eps_b, ...")->check(CLI::ExistingFile);
  dopt->add_option("--behavior", dd.behavior)->check(CLI::ExistingFile);
  dopt->add_option("--qber", dd.qber, "use ideal statistics at this QBER");
  dopt->add_option("--eps-a", dd.eps_a);
  dopt->add_option("--eps-b", dd.eps_b);
  dopt->add_option("--key-setting", dd.key_setting);
  dopt->add_option("--restarts", dd.restarts)->check(CLI::PositiveNumber);
  dopt->add_option("--workers", dd.workers);
  dopt->callback([&] { action = [&] { return cmd_dd_opt(dd, run, printer); }; });

  SimulateArgs sim;
  auto* sm = app.add_subcommand("simulate", "Monte-Carlo protocol run");
  sm->add_option("--config", sim.config, "JSON protocol configuration")->check(CLI::ExistingFile);
  sm->add_option("--workers", sim.workers);
  sm->add_option("--rate", sim.rate, "none, asymptotic or finite")
      ->check(CLI::IsMember({"none", "asymptotic", "finite"}));
  sm->add_option("--alpha", sim.alpha);
  sm->add_option("--p-omega", sim.p_omega);
  sm->callback([&] { action = [&] { return cmd_simulate(sim, run, app.count("--seed") > 0, printer); }; });

  EntropyArgs ent;
  auto* en = app.add_subcommand("entropy", "binary or conditional von Neumann entropy");
  auto* ent_in = en->add_option_group("input");
  ent_in->add_option("--binary", ent.binary, "h2(q)");
  ent_in->add_option("--state", ent.state, "JSON density operator")->check(CLI::ExistingFile);
  ent_in->require_option(1);
  en->add_option("--a-factors", ent.a_factors, "factors of A, the rest is conditioned on");
  en->callback([&] { action = [&] { return cmd_entropy(ent, run, printer); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto* sub : app.get_subcommands()) run.name = sub->get_name();
  try {
    return action();
  } catch (const RejectedError& e) {
    err << "rejected: " << e.what() << '\n';
    return kExitRejected;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const nlohmann::json::exception& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace rbqkd::cli
