#include "tvmpo/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tvmpo/errors.hpp"

namespace tvmpo {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw InvalidInputError("config: " + where + " must be an object");
}

// Unknown keys are hard errors so typos cannot silently fall back to defaults.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw InvalidInputError("config: unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

double parse_alpha(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw InvalidInputError("config: alpha must be a number or \"inf\"");
  }
  return j.get<double>();
}

json alpha_to_json(double alpha) {
  if (std::isinf(alpha)) return json("inf");
  return json(alpha);
}

Lattice parse_lattice(const json& j) {
  require_object(j, "model.lattice");
  const std::string kind = j.value("kind", "ring");
  if (kind == "ring") {
    check_keys(j, {"kind", "n"}, "model.lattice");
    if (!j.contains("n")) throw InvalidInputError("config: model.lattice.n is required");
    const int n = j.at("n").get<int>();
    if (n < 1) throw InvalidInputError("config: model.lattice.n must be >= 1");
    return Lattice::ring(n);
  }
  if (kind == "torus") {
    check_keys(j, {"kind", "cols", "rows"}, "model.lattice");
    if (!j.contains("cols") || !j.contains("rows")) {
      throw InvalidInputError("config: model.lattice torus needs cols and rows");
    }
    const int cols = j.at("cols").get<int>();
    const int rows = j.at("rows").get<int>();
    if (cols < 1 || rows < 1) throw InvalidInputError("config: torus dimensions must be >= 1");
    return Lattice::torus(cols, rows);
  }
  throw InvalidInputError("config: model.lattice.kind must be ring or torus");
}

ModelParams parse_model(const json& j) {
  require_object(j, "model");
  check_keys(j,
             {"kind", "couplings", "h", "gamma", "jump", "lattice", "sign", "kac", "r_trunc",
              "pair_counting"},
             "model");
  ModelParams m;
  const std::string kind = j.value("kind", "tfi");
  if (kind == "tfi") {
    m.kind = ModelKind::tfi_long_range;
  } else if (kind == "xyz") {
    m.kind = ModelKind::xyz_long_range;
  } else {
    throw InvalidInputError("config: model.kind must be tfi or xyz");
  }
  if (!j.contains("lattice")) throw InvalidInputError("config: model.lattice is required");
  m.lattice = parse_lattice(j.at("lattice"));
  if (!j.contains("couplings") || !j.at("couplings").is_array() || j.at("couplings").empty()) {
    throw InvalidInputError("config: model.couplings must be a non-empty array");
  }
  for (const json& c : j.at("couplings")) {
    require_object(c, "model.couplings[]");
    check_keys(c, {"J", "alpha"}, "model.couplings[]");
    if (!c.contains("J")) throw InvalidInputError("config: coupling J is required");
    CouplingParams cp;
    const json& jc = c.at("J");
    if (jc.is_array()) {
      if (jc.size() != 3) throw InvalidInputError("config: coupling J array must have 3 entries");
      for (int a = 0; a < 3; ++a) cp.J[a] = jc.at(a).get<double>();
    } else {
      // Scalar couplings are Ising (z-z) couplings.
      cp.J = {0.0, 0.0, jc.get<double>()};
    }
    if (c.contains("alpha")) cp.alpha = parse_alpha(c.at("alpha"));
    m.couplings.push_back(cp);
  }
  m.h = j.value("h", 0.0);
  m.gamma = j.value("gamma", 1.0);
  if (m.gamma < 0.0) throw InvalidInputError("config: model.gamma must be >= 0");
  const std::string jump = j.value("jump", "spin_decay_xy");
  if (jump == "spin_decay_xy") {
    m.jump_kind = JumpKind::spin_decay_xy;
  } else if (jump == "z_minus_y") {
    m.jump_kind = JumpKind::z_minus_y;
  } else {
    throw InvalidInputError("config: model.jump must be spin_decay_xy or z_minus_y");
  }
  const std::string sign = j.value("sign", "sm_plus");
  if (sign == "sm_plus") {
    m.sign = SignConvention::sm_plus;
  } else if (sign == "main_text_minus") {
    m.sign = SignConvention::main_text_minus;
  } else {
    throw InvalidInputError("config: model.sign must be sm_plus or main_text_minus");
  }
  m.kac = j.value("kac", false);
  m.r_trunc = j.value("r_trunc", 4);
  const std::string counting = j.value("pair_counting", "once");
  if (counting == "once") {
    m.pair_counting = PairCounting::once;
  } else if (counting == "twice") {
    m.pair_counting = PairCounting::twice;
  } else {
    throw InvalidInputError("config: model.pair_counting must be once or twice");
  }
  return m;
}

AnsatzConfig parse_ansatz(const json& j) {
  require_object(j, "ansatz");
  check_keys(j, {"chi", "period", "init_bloch"}, "ansatz");
  AnsatzConfig a;
  a.chi = j.value("chi", 8);
  if (a.chi < 1) throw InvalidInputError("config: ansatz.chi must be >= 1");
  a.period = j.value("period", 0);
  if (a.period < 0) throw InvalidInputError("config: ansatz.period must be >= 0");
  if (j.contains("init_bloch")) {
    const json& b = j.at("init_bloch");
    if (!b.is_array() || b.size() != 3) {
      throw InvalidInputError("config: ansatz.init_bloch must have 3 entries");
    }
    for (int k = 0; k < 3; ++k) a.init_bloch[k] = b.at(k).get<double>();
    const double norm = std::sqrt(a.init_bloch[0] * a.init_bloch[0] +
                                  a.init_bloch[1] * a.init_bloch[1] +
                                  a.init_bloch[2] * a.init_bloch[2]);
    if (norm > 1.0 + 1e-12) {
      throw InvalidInputError("config: ansatz.init_bloch must lie inside the Bloch ball");
    }
  }
  return a;
}

char parse_axis(const json& j, const std::string& where) {
  const std::string s = j.get<std::string>();
  if (s != "x" && s != "y" && s != "z") {
    throw InvalidInputError("config: " + where + ".axis must be x, y or z");
  }
  return s[0];
}

ObservableRequest parse_observable(const json& j) {
  require_object(j, "observables[]");
  if (!j.contains("kind")) throw InvalidInputError("config: observable kind is required");
  const std::string kind = j.at("kind").get<std::string>();
  ObservableRequest r;
  if (kind == "magnetization") {
    check_keys(j, {"kind", "axis"}, "observables[magnetization]");
    r.kind = ObservableRequest::Kind::magnetization;
    if (j.contains("axis")) r.axis = parse_axis(j.at("axis"), "observable");
  } else if (kind == "correlator") {
    check_keys(j, {"kind", "axis", "distance", "connected"}, "observables[correlator]");
    r.kind = ObservableRequest::Kind::correlator;
    if (j.contains("axis")) r.axis = parse_axis(j.at("axis"), "observable");
    r.distance = j.value("distance", 1);
    if (r.distance < 1) throw InvalidInputError("config: correlator distance must be >= 1");
    r.connected = j.value("connected", true);
  } else if (kind == "structure_factor") {
    check_keys(j, {"kind", "q_index"}, "observables[structure_factor]");
    r.kind = ObservableRequest::Kind::structure_factor;
    r.q_index = j.value("q_index", 0);
  } else if (kind == "renyi2") {
    check_keys(j, {"kind"}, "observables[renyi2]");
    r.kind = ObservableRequest::Kind::renyi2;
  } else if (kind == "purity") {
    check_keys(j, {"kind"}, "observables[purity]");
    r.kind = ObservableRequest::Kind::purity;
  } else if (kind == "min_eigenvalue") {
    check_keys(j, {"kind"}, "observables[min_eigenvalue]");
    r.kind = ObservableRequest::Kind::min_eigenvalue;
  } else if (kind == "rho_dot_cost") {
    check_keys(j, {"kind"}, "observables[rho_dot_cost]");
    r.kind = ObservableRequest::Kind::rho_dot_cost;
  } else {
    throw InvalidInputError("config: unknown observable kind \"" + kind + "\"");
  }
  return r;
}

json observable_to_json(const ObservableRequest& r) {
  json j;
  switch (r.kind) {
    case ObservableRequest::Kind::magnetization:
      j["kind"] = "magnetization";
      j["axis"] = std::string(1, r.axis);
      break;
    case ObservableRequest::Kind::correlator:
      j["kind"] = "correlator";
      j["axis"] = std::string(1, r.axis);
      j["distance"] = r.distance;
      j["connected"] = r.connected;
      break;
    case ObservableRequest::Kind::structure_factor:
      j["kind"] = "structure_factor";
      j["q_index"] = r.q_index;
      break;
    case ObservableRequest::Kind::renyi2: j["kind"] = "renyi2"; break;
    case ObservableRequest::Kind::purity: j["kind"] = "purity"; break;
    case ObservableRequest::Kind::min_eigenvalue: j["kind"] = "min_eigenvalue"; break;
    case ObservableRequest::Kind::rho_dot_cost: j["kind"] = "rho_dot_cost"; break;
  }
  return j;
}

}  // namespace

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::vmc: return "vmc";
    case Backend::exact: return "exact";
    case Backend::meanfield: return "meanfield";
  }
  return "vmc";
}

Backend backend_from_name(const std::string& name) {
  if (name == "vmc") return Backend::vmc;
  if (name == "exact") return Backend::exact;
  if (name == "meanfield") return Backend::meanfield;
  throw InvalidInputError("config: backend must be vmc, exact or meanfield");
}

std::string ObservableRequest::stream_name() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::magnetization:
      s << "magnetization_" << axis;
      break;
    case Kind::correlator:
      s << "correlator_" << axis << "_d" << distance;
      if (!connected) s << "_raw";
      break;
    case Kind::structure_factor:
      s << "structure_factor_q" << q_index;
      break;
    case Kind::renyi2: s << "renyi2"; break;
    case Kind::purity: s << "purity"; break;
    case Kind::min_eigenvalue: s << "min_eigenvalue"; break;
    case Kind::rho_dot_cost: s << "rho_dot_cost"; break;
  }
  return s.str();
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInputError(std::string("config: ") + e.what());
  }
  return parse_config_json(j);
}

RunConfig parse_config_json(const json& j) {
  require_object(j, "top level");
  check_keys(j,
             {"model", "ansatz", "sampler", "regularization", "integrator", "t_end",
              "observables", "cadence", "workers", "seed", "checkpoint_every", "output_dir",
              "backend", "oracle_dt"},
             "top level");
  RunConfig cfg;
  if (!j.contains("model")) throw InvalidInputError("config: model section is required");
  cfg.model = parse_model(j.at("model"));

  if (j.contains("ansatz")) cfg.ansatz = parse_ansatz(j.at("ansatz"));

  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    require_object(s, "sampler");
    check_keys(s, {"n_samples", "sweeps_between", "burn_in"}, "sampler");
    cfg.sampler.n_samples = s.value("n_samples", cfg.sampler.n_samples);
    cfg.sampler.sweeps_between = s.value("sweeps_between", cfg.sampler.sweeps_between);
    cfg.sampler.burn_in = s.value("burn_in", cfg.sampler.burn_in);
    if (cfg.sampler.n_samples < 1 || cfg.sampler.sweeps_between < 1 || cfg.sampler.burn_in < 0) {
      throw InvalidInputError("config: invalid sampler parameters");
    }
  }

  if (j.contains("regularization")) {
    const json& r = j.at("regularization");
    require_object(r, "regularization");
    check_keys(r, {"eps_shift", "eps_snr"}, "regularization");
    cfg.regularization.eps_shift = r.value("eps_shift", cfg.regularization.eps_shift);
    cfg.regularization.eps_snr = r.value("eps_snr", cfg.regularization.eps_snr);
    if (cfg.regularization.eps_shift < 0.0 || cfg.regularization.eps_snr < 0.0) {
      throw InvalidInputError("config: regularization epsilons must be >= 0");
    }
  }

  if (j.contains("integrator")) {
    const json& i = j.at("integrator");
    require_object(i, "integrator");
    check_keys(i, {"scheme", "tau", "eps_tol", "tau_init", "tau_max", "tau_floor"}, "integrator");
    const std::string scheme = i.value("scheme", "heun_adaptive");
    if (scheme == "heun_adaptive") {
      cfg.integrator.scheme = IntegratorConfig::Scheme::heun_adaptive;
    } else if (scheme == "euler") {
      cfg.integrator.scheme = IntegratorConfig::Scheme::euler;
    } else {
      throw InvalidInputError("config: integrator.scheme must be heun_adaptive or euler");
    }
    cfg.integrator.tau = i.value("tau", cfg.integrator.tau);
    cfg.integrator.eps_tol = i.value("eps_tol", cfg.integrator.eps_tol);
    cfg.integrator.tau_init = i.value("tau_init", cfg.integrator.tau_init);
    cfg.integrator.tau_max = i.value("tau_max", cfg.integrator.tau_max);
    cfg.integrator.tau_floor = i.value("tau_floor", cfg.integrator.tau_floor);
    if (cfg.integrator.tau <= 0.0 || cfg.integrator.eps_tol <= 0.0 ||
        cfg.integrator.tau_init <= 0.0 || cfg.integrator.tau_max <= 0.0 ||
        cfg.integrator.tau_floor <= 0.0) {
      throw InvalidInputError("config: integrator parameters must be positive");
    }
  }

  if (!j.contains("t_end")) throw InvalidInputError("config: t_end is required");
  cfg.t_end = j.at("t_end").get<double>();
  if (cfg.t_end <= 0.0) throw InvalidInputError("config: t_end must be positive");

  if (j.contains("observables")) {
    if (!j.at("observables").is_array()) {
      throw InvalidInputError("config: observables must be an array");
    }
    for (const json& o : j.at("observables")) cfg.observables.push_back(parse_observable(o));
  } else {
    for (char axis : {'x', 'y', 'z'}) {
      ObservableRequest r;
      r.kind = ObservableRequest::Kind::magnetization;
      r.axis = axis;
      cfg.observables.push_back(r);
    }
  }

  cfg.cadence = j.value("cadence", 1);
  if (cfg.cadence < 1) throw InvalidInputError("config: cadence must be >= 1");
  cfg.workers = j.value("workers", 1);
  if (cfg.workers < 1) throw InvalidInputError("config: workers must be >= 1");
  cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));
  cfg.checkpoint_every = j.value("checkpoint_every", static_cast<long>(0));
  if (cfg.checkpoint_every < 0) throw InvalidInputError("config: checkpoint_every must be >= 0");
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.backend = backend_from_name(j.value("backend", std::string("vmc")));
  cfg.oracle_dt = j.value("oracle_dt", 1e-3);
  if (cfg.oracle_dt <= 0.0) throw InvalidInputError("config: oracle_dt must be positive");

  // Cross-field checks.
  const int n = cfg.model.lattice.n_sites();
  for (const ObservableRequest& r : cfg.observables) {
    if (r.kind == ObservableRequest::Kind::correlator && r.distance > n / 2) {
      throw InvalidInputError("config: correlator distance exceeds N/2");
    }
    if (r.kind == ObservableRequest::Kind::structure_factor &&
        (r.q_index < 0 || r.q_index >= n)) {
      throw InvalidInputError("config: structure_factor q_index must be in [0, N)");
    }
    if (r.kind == ObservableRequest::Kind::rho_dot_cost && cfg.backend != Backend::vmc) {
      throw InvalidInputError("config: rho_dot_cost is only available on the vmc backend");
    }
    if (cfg.backend == Backend::meanfield &&
        r.kind != ObservableRequest::Kind::magnetization) {
      throw InvalidInputError("config: the meanfield backend only supports magnetization");
    }
  }
  if (cfg.backend == Backend::meanfield && cfg.model.kind != ModelKind::tfi_long_range) {
    throw InvalidInputError("config: the meanfield backend only supports the tfi model");
  }
  const int period = effective_period(cfg);
  if (n % period != 0) {
    throw InvalidInputError("config: ansatz period must divide the number of sites");
  }
  return cfg;
}

json resolved_config_json(const RunConfig& cfg) {
  json m;
  m["kind"] = cfg.model.kind == ModelKind::tfi_long_range ? "tfi" : "xyz";
  if (cfg.model.lattice.kind == Lattice::Kind::ring) {
    m["lattice"] = {{"kind", "ring"}, {"n", cfg.model.lattice.n1}};
  } else {
    m["lattice"] = {{"kind", "torus"}, {"cols", cfg.model.lattice.n1},
                    {"rows", cfg.model.lattice.n2}};
  }
  m["couplings"] = json::array();
  for (const CouplingParams& c : cfg.model.couplings) {
    json jc;
    if (cfg.model.kind == ModelKind::tfi_long_range) {
      jc["J"] = c.J[2];
    } else {
      jc["J"] = {c.J[0], c.J[1], c.J[2]};
    }
    jc["alpha"] = alpha_to_json(c.alpha);
    m["couplings"].push_back(jc);
  }
  m["h"] = cfg.model.h;
  m["gamma"] = cfg.model.gamma;
  m["jump"] = cfg.model.jump_kind == JumpKind::spin_decay_xy ? "spin_decay_xy" : "z_minus_y";
  m["sign"] = cfg.model.sign == SignConvention::sm_plus ? "sm_plus" : "main_text_minus";
  m["kac"] = cfg.model.kac;
  m["r_trunc"] = cfg.model.r_trunc;
  m["pair_counting"] = cfg.model.pair_counting == PairCounting::once ? "once" : "twice";

  json j;
  j["model"] = m;
  j["ansatz"] = {{"chi", cfg.ansatz.chi},
                 {"period", cfg.ansatz.period},
                 {"init_bloch", cfg.ansatz.init_bloch}};
  j["sampler"] = {{"n_samples", cfg.sampler.n_samples},
                  {"sweeps_between", cfg.sampler.sweeps_between},
                  {"burn_in", cfg.sampler.burn_in}};
  j["regularization"] = {{"eps_shift", cfg.regularization.eps_shift},
                         {"eps_snr", cfg.regularization.eps_snr}};
  j["integrator"] = {
      {"scheme",
       cfg.integrator.scheme == IntegratorConfig::Scheme::heun_adaptive ? "heun_adaptive"
                                                                        : "euler"},
      {"tau", cfg.integrator.tau},
      {"eps_tol", cfg.integrator.eps_tol},
      {"tau_init", cfg.integrator.tau_init},
      {"tau_max", cfg.integrator.tau_max},
      {"tau_floor", cfg.integrator.tau_floor}};
  j["t_end"] = cfg.t_end;
  j["observables"] = json::array();
  for (const ObservableRequest& r : cfg.observables) j["observables"].push_back(observable_to_json(r));
  j["cadence"] = cfg.cadence;
  j["workers"] = cfg.workers;
  j["seed"] = cfg.seed;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["output_dir"] = cfg.output_dir;
  j["backend"] = backend_name(cfg.backend);
  j["oracle_dt"] = cfg.oracle_dt;
  return j;
}

int effective_period(const RunConfig& cfg) {
  return cfg.ansatz.period > 0 ? cfg.ansatz.period : cfg.model.lattice.unit_cell();
}

Matrix bloch_density(const std::array<double, 3>& b) {
  Matrix rho = 0.5 * (pauli_id() + b[0] * pauli_x() + b[1] * pauli_y() + b[2] * pauli_z());
  return rho;
}

}  // namespace tvmpo
