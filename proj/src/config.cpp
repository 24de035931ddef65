#include "seqmon/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "seqmon/error.hpp"
#include "seqmon/format.hpp"

namespace seqmon {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

double to_double(const std::string& where, const std::string& s) {
  const std::string t = boost::algorithm::trim_copy(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) config_error(where, "expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& where, const std::string& s) {
  const std::string t = boost::algorithm::trim_copy(s);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) config_error(where, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& where, const std::string& s) {
  const std::string t = boost::algorithm::trim_copy(s);
  char* end = nullptr;
  if (!t.empty() && t[0] == '-') config_error(where, "expected a non-negative integer");
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) config_error(where, "expected an integer, got '" + s + "'");
  return v;
}

const std::set<std::string> kScenarios = {"damping", "frequency", "frequency_scaled", "force", "iid", "custom"};

GaussianModel parse_model(const std::string& section, const pt::ptree& tree) {
  GaussianModel m;
  std::set<std::string> seen;
  for (const auto& [key, node] : tree) {
    const std::string where = section + "." + key;
    if (!seen.insert(key).second) config_error(where, "duplicate key");
    const std::string v = node.get_value<std::string>();
    try {
      if (key == "n_modes") {
        m.n_modes = static_cast<int>(to_int(where, v));
      } else if (key == "A") {
        m.A = parse_matrix(v);
      } else if (key == "b") {
        const auto xs = parse_list(v);
        m.b = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
      } else if (key == "C") {
        m.C = parse_matrix(v);
      } else if (key == "D") {
        m.D = parse_matrix(v);
      } else if (key == "Gamma") {
        m.Gamma = parse_matrix(v);
      } else {
        config_error(where, "unknown key");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      config_error(where, e.what());
    }
  }
  if (m.b.size() == 0) m.b = Vector::Zero(2 * m.n_modes);
  try {
    return validate_model(m);
  } catch (const Error& e) {
    config_error(section, e.what());
  }
}

}  // namespace

Matrix parse_matrix(const std::string& text) {
  std::vector<std::string> rows;
  boost::algorithm::split(rows, text, boost::is_any_of(";"));
  std::vector<std::vector<double>> vals;
  for (const auto& r : rows) {
    const auto xs = parse_list(r);
    if (xs.empty()) continue;
    if (!vals.empty() && xs.size() != vals.front().size()) {
      throw Error(ErrorCode::ConfigError, "matrix rows have different lengths in '" + text + "'");
    }
    vals.push_back(xs);
  }
  if (vals.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(vals.front().size()));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    for (std::size_t j = 0; j < vals[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i][j];
  }
  return m;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<std::string> cells;
  const std::string t = boost::algorithm::trim_copy(text);
  if (t.empty()) return {};
  boost::algorithm::split(cells, t, boost::is_any_of(" \t,"), boost::token_compress_on);
  std::vector<double> out;
  for (const auto& c : cells) {
    if (c.empty()) continue;
    out.push_back(to_double("list", c));
  }
  return out;
}

std::map<std::string, double> scenario_defaults(const std::string& scenario) {
  if (scenario == "damping") return {{"gamma0", 100.0}, {"gamma1", 440.0}, {"kappa", 10.0}, {"eta", 1.0}, {"nbar", 1.0}};
  if (scenario == "frequency") {
    return {{"omega0", 1e5}, {"omega1", 1.02e5}, {"gamma", 500.0}, {"kappa", 1e3}, {"eta", 1.0}, {"nbar", 1.0}};
  }
  if (scenario == "frequency_scaled") {
    return {{"omega0", 1e3}, {"omega1", 1.02e3}, {"gamma", 5.0}, {"kappa", 10.0}, {"eta", 1.0}, {"nbar", 1.0}};
  }
  if (scenario == "force") {
    return {{"b0", 0.0},       {"b1", 40.0}, {"gamma", 500.0}, {"kappa", 10.0},
            {"omega", 1e3},    {"eta", 0.1}, {"nbar", 1.0}};
  }
  if (scenario == "iid") return {{"m0", 0.0}, {"m1", 1.0}, {"sigma", 1.0}};
  if (scenario == "custom") return {};
  throw Error(ErrorCode::ConfigError, "scenario: unknown scenario '" + scenario + "'");
}

double scenario_default_dt(const std::string& scenario) {
  if (scenario == "frequency") return 1e-7;
  if (scenario == "frequency_scaled" || scenario == "force") return 1e-5;
  if (scenario == "iid") return 1.0;
  return 1e-4;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error(origin + ":" + std::to_string(e.line()), e.message());
  }

  RunConfig cfg;
  std::set<std::string> sections;
  for (const auto& [section, body] : tree) {
    const std::string where_s = origin + ": [" + section + "]";
    if (body.empty()) {
      if (!body.data().empty() || !(section == "scenario" || section == "test" || section == "run")) {
        config_error(origin, "key '" + section + "' outside of any section");
      }
    }
    if (!sections.insert(section).second) config_error(where_s, "duplicate section");
    if (section == "model0" || section == "model1") {
      (section == "model0" ? cfg.model0 : cfg.model1) = parse_model(origin + ": " + section, body);
      continue;
    }
    std::set<std::string> seen;
    for (const auto& [key, node] : body) {
      const std::string where = origin + ": " + section + "." + key;
      if (!seen.insert(key).second) config_error(where, "duplicate key");
      const std::string v = node.get_value<std::string>();
      if (section == "scenario") {
        if (key == "name") {
          cfg.scenario = boost::algorithm::trim_copy(v);
        } else {
          cfg.params[key] = to_double(where, v);
        }
      } else if (section == "test") {
        if (key == "mode") cfg.mode = boost::algorithm::trim_copy(v);
        else if (key == "epsilon") cfg.eps0 = cfg.eps1 = to_double(where, v);
        else if (key == "eps0") cfg.eps0 = to_double(where, v);
        else if (key == "eps1") cfg.eps1 = to_double(where, v);
        else if (key == "alpha0") cfg.alpha0 = to_double(where, v);
        else if (key == "alpha1") cfg.alpha1 = to_double(where, v);
        else if (key == "a0") cfg.a0 = to_double(where, v);
        else if (key == "a1") cfg.a1 = to_double(where, v);
        else if (key == "prior0") cfg.prior0 = to_double(where, v);
        else if (key == "policy") cfg.policy = boost::algorithm::trim_copy(v);
        else if (key == "init") cfg.init = boost::algorithm::trim_copy(v);
        else config_error(where, "unknown key");
      } else if (section == "run") {
        if (key == "n_traj") cfg.n_traj = static_cast<int>(to_int(where, v));
        else if (key == "dt") cfg.dt = to_double(where, v);
        else if (key == "t_max") cfg.t_max = to_double(where, v);
        else if (key == "seed") cfg.seed = to_u64(where, v);
        else if (key == "threads") cfg.threads = static_cast<int>(to_int(where, v));
        else if (key == "true_k") cfg.true_k = static_cast<int>(to_int(where, v));
        else if (key == "eps_list") cfg.eps_list = parse_list(v);
        else if (key == "times") cfg.times = parse_list(v);
        else if (key == "n_var") cfg.n_var = static_cast<int>(to_int(where, v));
        else if (key == "t_fit") cfg.t_fit = to_double(where, v);
        else if (key == "substeps") cfg.substeps = static_cast<int>(to_int(where, v));
        else if (key == "horizon") cfg.horizon = to_double(where, v);
        else if (key == "out") cfg.out = boost::algorithm::trim_copy(v);
        else if (key == "format") cfg.format = boost::algorithm::trim_copy(v);
        else config_error(where, "unknown key");
      } else {
        config_error(where_s, "unknown section");
      }
    }
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, path + ": cannot open config file");
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str(), path);
}

RunConfig resolve_config(RunConfig cfg) {
  if (!kScenarios.count(cfg.scenario)) config_error("scenario.name", "unknown scenario '" + cfg.scenario + "'");
  auto defaults = scenario_defaults(cfg.scenario);
  for (const auto& [key, value] : cfg.params) {
    if (!defaults.count(key)) config_error("scenario." + key, "not a parameter of scenario '" + cfg.scenario + "'");
    if (!std::isfinite(value)) config_error("scenario." + key, "must be finite");
    defaults[key] = value;
  }
  cfg.params = defaults;
  if (cfg.scenario == "custom") {
    if (!cfg.model0 || !cfg.model1) config_error("custom", "needs [model0] and [model1] sections");
  } else if (cfg.model0 || cfg.model1) {
    config_error("model0/model1", "model sections are only allowed with scenario 'custom'");
  }
  if (cfg.dt == 0.0) cfg.dt = scenario_default_dt(cfg.scenario);

  auto require = [](bool ok, const char* where, const char* what) {
    if (!ok) config_error(where, what);
  };
  require(cfg.mode == "strong" || cfg.mode == "weak" || cfg.mode == "direct", "test.mode",
          "must be strong, weak or direct");
  require(cfg.policy == "exclude" || cfg.policy == "sign", "test.policy", "must be exclude or sign");
  require(cfg.init == "steady" || cfg.init == "transient", "test.init", "must be steady or transient");
  require(cfg.prior0 > 0.0 && cfg.prior0 < 1.0, "test.prior0", "must lie in (0, 1)");
  require(cfg.n_traj > 0 && cfg.n_traj % 2 == 0, "run.n_traj", "must be a positive even number");
  require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "run.dt", "must be positive");
  require(cfg.t_max >= 0.0 && std::isfinite(cfg.t_max), "run.t_max", "must be non-negative");
  require(cfg.threads >= 1, "run.threads", "must be at least 1");
  require(cfg.true_k == 0 || cfg.true_k == 1, "run.true_k", "must be 0 or 1");
  require(cfg.n_var >= 0, "run.n_var", "must be non-negative");
  require(cfg.t_fit >= 0.0, "run.t_fit", "must be non-negative");
  require(cfg.substeps >= 1, "run.substeps", "must be positive");
  require(cfg.horizon >= 0.0, "run.horizon", "must be non-negative");
  require(cfg.format.empty() || cfg.format == "csv" || cfg.format == "json" || cfg.format == "bin", "run.format",
          "must be csv, json or bin");
  for (double e : cfg.eps_list) require(e > 0.0 && e < 0.5, "run.eps_list", "entries must lie in (0, 1/2)");
  for (double t : cfg.times) require(t >= 0.0, "run.times", "entries must be non-negative");
  return cfg;
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[scenario]\nname = " << cfg.scenario << '\n';
  for (const auto& [k, v] : cfg.params) os << k << " = " << format_double(v) << '\n';
  auto emit_model = [&](const char* name, const GaussianModel& m) {
    os << "\n[" << name << "]\n"
       << "n_modes = " << m.n_modes << '\n'
       << "A = " << format_matrix(m.A) << '\n'
       << "b = " << format_vector(m.b) << '\n'
       << "C = " << format_matrix(m.C) << '\n'
       << "D = " << format_matrix(m.D) << '\n'
       << "Gamma = " << format_matrix(m.Gamma) << '\n';
  };
  if (cfg.model0) emit_model("model0", *cfg.model0);
  if (cfg.model1) emit_model("model1", *cfg.model1);
  os << "\n[test]\n"
     << "mode = " << cfg.mode << '\n'
     << "eps0 = " << format_double(cfg.eps0) << '\n'
     << "eps1 = " << format_double(cfg.eps1) << '\n'
     << "alpha0 = " << format_double(cfg.alpha0) << '\n'
     << "alpha1 = " << format_double(cfg.alpha1) << '\n'
     << "a0 = " << format_double(cfg.a0) << '\n'
     << "a1 = " << format_double(cfg.a1) << '\n'
     << "prior0 = " << format_double(cfg.prior0) << '\n'
     << "policy = " << cfg.policy << '\n'
     << "init = " << cfg.init << '\n';
  os << "\n[run]\n"
     << "n_traj = " << cfg.n_traj << '\n'
     << "dt = " << format_double(cfg.dt) << '\n'
     << "t_max = " << format_double(cfg.t_max) << '\n'
     << "seed = " << cfg.seed << '\n'
     << "threads = " << cfg.threads << '\n'
     << "true_k = " << cfg.true_k << '\n'
     << "eps_list = " << format_list(cfg.eps_list) << '\n'
     << "times = " << format_list(cfg.times) << '\n'
     << "n_var = " << cfg.n_var << '\n'
     << "t_fit = " << format_double(cfg.t_fit) << '\n'
     << "substeps = " << cfg.substeps << '\n'
     << "horizon = " << format_double(cfg.horizon) << '\n'
     << "out = " << cfg.out << '\n'
     << "format = " << cfg.format << '\n';
  return os.str();
}

HypothesisPair build_pair(const RunConfig& cfg) {
  const auto& p = cfg.params;
  auto get = [&](const char* key) { return p.at(key); };
  HypothesisPair pair;
  if (cfg.scenario == "damping") {
    pair = preset_damping(get("gamma0"), get("gamma1"), get("kappa"), get("eta"), get("nbar"));
  } else if (cfg.scenario == "frequency" || cfg.scenario == "frequency_scaled") {
    pair = preset_frequency(get("omega0"), get("omega1"), get("gamma"), get("kappa"), get("eta"), get("nbar"));
  } else if (cfg.scenario == "force") {
    pair = preset_force(get("b0"), get("b1"), get("gamma"), get("kappa"), get("omega"), get("eta"), get("nbar"));
  } else if (cfg.scenario == "custom") {
    pair = HypothesisPair{*cfg.model0, *cfg.model1, {0.5, 0.5}};
  } else {
    throw Error(ErrorCode::ConfigError, "scenario '" + cfg.scenario + "' has no filter model");
  }
  pair.priors = {cfg.prior0, 1.0 - cfg.prior0};
  return validate_pair(pair);
}

SprtConfig build_sprt(const RunConfig& cfg) {
  if (cfg.mode == "strong") return SprtConfig::from_mode(StrongError{cfg.eps0, cfg.eps1, cfg.prior0});
  if (cfg.mode == "weak") return SprtConfig::from_mode(WeakError{cfg.alpha0, cfg.alpha1});
  return SprtConfig::from_mode(DirectThresholds{cfg.a0, cfg.a1});
}

EnsembleOptions build_options(const RunConfig& cfg) {
  EnsembleOptions o;
  o.n_traj = cfg.n_traj;
  o.dt = cfg.dt;
  o.t_max = cfg.t_max;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  o.init = cfg.init == "transient" ? InitPolicy::Transient : InitPolicy::SteadyState;
  o.policy = cfg.policy == "sign" ? UndecidedPolicy::DecideBySign : UndecidedPolicy::Exclude;
  return o;
}

IidGaussianSpec build_iid(const RunConfig& cfg) {
  if (cfg.scenario != "iid") throw Error(ErrorCode::ConfigError, "scenario is not 'iid'");
  IidGaussianSpec s{cfg.params.at("m0"), cfg.params.at("m1"), cfg.params.at("sigma")};
  if (!(s.sigma > 0.0)) throw Error(ErrorCode::ConfigError, "scenario.sigma: must be positive");
  return s;
}

}  // namespace seqmon
