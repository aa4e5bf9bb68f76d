#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "tvmpo/config.hpp"
#include "tvmpo/errors.hpp"

using namespace tvmpo;
using nlohmann::json;

namespace {

json minimal_config() {
  return json::parse(R"({
    "model": {"lattice": {"kind": "ring", "n": 4}, "couplings": [{"J": 0.5}]},
    "t_end": 1.0
  })");
}

std::string config_path(const std::string& name) {
  return std::string(TVMPO_SOURCE_DIR) + "/configs/" + name;
}

}  // namespace

TEST_CASE("minimal config takes documented defaults") {
  const RunConfig cfg = parse_config_json(minimal_config());
  CHECK(cfg.model.kind == ModelKind::tfi_long_range);
  CHECK(cfg.model.lattice.n_sites() == 4);
  CHECK(cfg.model.couplings.size() == 1);
  CHECK(cfg.model.couplings[0].J[2] == 0.5);  // scalar J is an Ising coupling
  CHECK(cfg.model.couplings[0].J[0] == 0.0);
  CHECK(std::isinf(cfg.model.couplings[0].alpha));
  CHECK(cfg.model.h == 0.0);
  CHECK(cfg.model.gamma == 1.0);
  CHECK(cfg.model.jump_kind == JumpKind::spin_decay_xy);
  CHECK(cfg.model.sign == SignConvention::sm_plus);
  CHECK(cfg.model.kac == false);
  CHECK(cfg.model.pair_counting == PairCounting::once);

  CHECK(cfg.ansatz.chi == 8);
  CHECK(cfg.ansatz.period == 0);
  CHECK(effective_period(cfg) == 1);
  CHECK(cfg.ansatz.init_bloch == std::array<double, 3>{0.0, 0.0, 1.0});

  CHECK(cfg.sampler.n_samples == 5000);
  CHECK(cfg.sampler.sweeps_between == 5);
  CHECK(cfg.sampler.burn_in == 5);
  CHECK(cfg.regularization.eps_shift == 1e-8);
  CHECK(cfg.regularization.eps_snr == 1e-8);
  CHECK(cfg.integrator.scheme == IntegratorConfig::Scheme::heun_adaptive);
  CHECK(cfg.integrator.eps_tol == 0.01);
  CHECK(cfg.integrator.tau_init == 1e-8);
  CHECK(cfg.integrator.tau_max == 0.1);

  CHECK(cfg.t_end == 1.0);
  REQUIRE(cfg.observables.size() == 3);  // default xyz magnetizations
  CHECK(cfg.observables[0].stream_name() == "magnetization_x");
  CHECK(cfg.observables[2].stream_name() == "magnetization_z");
  CHECK(cfg.cadence == 1);
  CHECK(cfg.workers == 1);
  CHECK(cfg.seed == 0);
  CHECK(cfg.checkpoint_every == 0);
  CHECK(cfg.backend == Backend::vmc);
  CHECK(cfg.oracle_dt == 1e-3);
}

TEST_CASE("shipped configs parse") {
  const RunConfig sm = parse_config(config_path("sm_tfi_n10.json"));
  CHECK(sm.model.lattice.n_sites() == 10);
  CHECK(sm.ansatz.chi == 20);
  CHECK(sm.sampler.n_samples == 10000);
  CHECK(sm.workers == 10);
  CHECK(sm.checkpoint_every == 50);

  const RunConfig dipolar = parse_config(config_path("dipolar_ising_n8.json"));
  CHECK(dipolar.model.kac);
  CHECK(dipolar.model.sign == SignConvention::main_text_minus);
  CHECK(dipolar.model.jump_kind == JumpKind::z_minus_y);

  const RunConfig xyz = parse_config(config_path("xyz_chain_n10.json"));
  CHECK(xyz.model.kind == ModelKind::xyz_long_range);
  CHECK(xyz.model.couplings[0].J == std::array<double, 3>{-1.0, -0.9, -1.2});
  CHECK(xyz.model.r_trunc == 1);

  const RunConfig mf = parse_config(config_path("meanfield_dipolar.json"));
  CHECK(mf.backend == Backend::meanfield);
  CHECK(mf.model.couplings.size() == 2);

  CHECK_NOTHROW(parse_config(config_path("tfi_short_range_n6.json")));
  CHECK_NOTHROW(parse_config(config_path("tfi_weak_long_range_n6.json")));
  CHECK_THROWS_AS(parse_config(config_path("does_not_exist.json")), InvalidInputError);
}

TEST_CASE("unknown keys are named in the error") {
  json j = minimal_config();
  j["sampler"] = {{"n_sample", 100}};
  try {
    parse_config_json(j);
    FAIL("expected InvalidInputError");
  } catch (const InvalidInputError& e) {
    CHECK(std::string(e.what()).find("n_sample") != std::string::npos);
  }

  json top = minimal_config();
  top["t_endd"] = 2.0;
  CHECK_THROWS_AS(parse_config_json(top), InvalidInputError);
}

TEST_CASE("resolved config round-trips") {
  for (const char* name :
       {"tfi_short_range_n6.json", "tfi_weak_long_range_n6.json", "dipolar_ising_n8.json",
        "sm_tfi_n10.json", "xyz_chain_n10.json", "meanfield_dipolar.json"}) {
    const RunConfig cfg = parse_config(config_path(name));
    const json resolved = resolved_config_json(cfg);
    const RunConfig reparsed = parse_config_json(resolved);
    CHECK(resolved_config_json(reparsed) == resolved);
  }

  // alpha = infinity survives the round trip as the string "inf".
  const RunConfig cfg = parse_config_json(minimal_config());
  const json resolved = resolved_config_json(cfg);
  CHECK(resolved["model"]["couplings"][0]["alpha"] == "inf");
}

TEST_CASE("config validation rejects inconsistent input") {
  auto reject = [](json j) { CHECK_THROWS_AS(parse_config_json(j), InvalidInputError); };

  json no_tend = minimal_config();
  no_tend.erase("t_end");
  reject(no_tend);

  json bad_tend = minimal_config();
  bad_tend["t_end"] = -1.0;
  reject(bad_tend);

  json no_couplings = minimal_config();
  no_couplings["model"]["couplings"] = json::array();
  reject(no_couplings);

  json bad_j = minimal_config();
  bad_j["model"]["couplings"] = {{{"J", {1.0, 2.0}}}};
  reject(bad_j);

  json bad_alpha = minimal_config();
  bad_alpha["model"]["couplings"][0]["alpha"] = "infinity";
  reject(bad_alpha);

  json bad_gamma = minimal_config();
  bad_gamma["model"]["gamma"] = -0.5;
  reject(bad_gamma);

  json bad_jump = minimal_config();
  bad_jump["model"]["jump"] = "dephasing";
  reject(bad_jump);

  json far_corr = minimal_config();
  far_corr["observables"] = {{{"kind", "correlator"}, {"axis", "z"}, {"distance", 3}}};
  reject(far_corr);  // N = 4, N/2 = 2

  json bad_q = minimal_config();
  bad_q["observables"] = {{{"kind", "structure_factor"}, {"q_index", 4}}};
  reject(bad_q);

  json cost_exact = minimal_config();
  cost_exact["backend"] = "exact";
  cost_exact["observables"] = {{{"kind", "rho_dot_cost"}}};
  reject(cost_exact);

  json mf_xyz = minimal_config();
  mf_xyz["backend"] = "meanfield";
  mf_xyz["model"]["kind"] = "xyz";
  mf_xyz["model"]["couplings"] = {{{"J", {1.0, 1.0, 1.0}}}};
  reject(mf_xyz);

  json mf_purity = minimal_config();
  mf_purity["backend"] = "meanfield";
  mf_purity["observables"] = {{{"kind", "purity"}}};
  reject(mf_purity);

  json bad_period = minimal_config();
  bad_period["ansatz"] = {{"period", 3}};  // does not divide N = 4
  reject(bad_period);

  json long_bloch = minimal_config();
  long_bloch["ansatz"] = {{"init_bloch", {1.0, 1.0, 1.0}}};
  reject(long_bloch);

  json bad_backend = minimal_config();
  bad_backend["backend"] = "dmrg";
  reject(bad_backend);

  json bad_obs = minimal_config();
  bad_obs["observables"] = {{{"kind", "energy"}}};
  reject(bad_obs);
}

TEST_CASE("stream names") {
  ObservableRequest r;
  r.kind = ObservableRequest::Kind::correlator;
  r.axis = 'z';
  r.distance = 2;
  r.connected = true;
  CHECK(r.stream_name() == "correlator_z_d2");
  r.connected = false;
  CHECK(r.stream_name() == "correlator_z_d2_raw");
  r.kind = ObservableRequest::Kind::structure_factor;
  r.q_index = 4;
  CHECK(r.stream_name() == "structure_factor_q4");
  r.kind = ObservableRequest::Kind::rho_dot_cost;
  CHECK(r.stream_name() == "rho_dot_cost");
}

TEST_CASE("backend names round-trip") {
  for (Backend b : {Backend::vmc, Backend::exact, Backend::meanfield}) {
    CHECK(backend_from_name(backend_name(b)) == b);
  }
  CHECK_THROWS_AS(backend_from_name("tdvp"), InvalidInputError);
}

TEST_CASE("effective period and bloch density") {
  json j = minimal_config();
  j["model"]["lattice"] = {{"kind", "torus"}, {"cols", 4}, {"rows", 2}};
  RunConfig cfg = parse_config_json(j);
  CHECK(effective_period(cfg) == 4);  // torus unit cell is one row
  j["ansatz"] = {{"period", 2}};
  cfg = parse_config_json(j);
  CHECK(effective_period(cfg) == 2);

  const Matrix up = bloch_density({0.0, 0.0, 1.0});
  CHECK(up(0, 0) == Complex(1.0, 0.0));
  CHECK(up(1, 1) == Complex(0.0, 0.0));
  const Matrix mixed = bloch_density({0.0, 0.0, 0.0});
  CHECK((mixed - 0.5 * Matrix::Identity(2, 2)).norm() == 0.0);
  const Matrix tilted = bloch_density({0.6, 0.0, 0.8});
  CHECK(std::abs(tilted.trace() - 1.0) < 1e-15);
  CHECK((tilted - tilted.adjoint()).norm() < 1e-15);
}
