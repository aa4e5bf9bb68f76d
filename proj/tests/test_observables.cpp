#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tvmpo/errors.hpp"
#include "tvmpo/liouvillian.hpp"
#include "tvmpo/observables.hpp"

using namespace tvmpo;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix bloch_rho(double bx, double by, double bz) {
  return 0.5 * (pauli_id() + bx * pauli_x() + by * pauli_y() + bz * pauli_z());
}

// rho = (|up...up><up...up| + |down...down><down...down|) / 2 as a chi = 2
// diagonal-bond MPO.
MpoAnsatz ghz_diagonal_mixture(int n) {
  MpoAnsatz a(n, 1, 2, 2);
  const double c = std::pow(0.5, 1.0 / n);
  a.tensor(0, 0)(0, 0) = c;  // sigma = sigma' = up rides bond 0
  a.tensor(0, 3)(1, 1) = c;  // sigma = sigma' = down rides bond 1
  return a;
}

// Pure Neel product state |up down up down ...> via a period-2 unit cell.
MpoAnsatz neel_state(int n) {
  MpoAnsatz a(n, 2, 2, 1);
  a.tensor(0, 0)(0, 0) = 1.0;  // even sites up
  a.tensor(1, 3)(0, 0) = 1.0;  // odd sites down
  return a;
}

}  // namespace

TEST_CASE("pauli lookup by axis") {
  CHECK((pauli_by_axis('x') - pauli_x()).norm() == 0.0);
  CHECK((pauli_by_axis('y') - pauli_y()).norm() == 0.0);
  CHECK((pauli_by_axis('z') - pauli_z()).norm() == 0.0);
  CHECK_THROWS_AS(pauli_by_axis('w'), InvalidInputError);
}

TEST_CASE("raw product expectations") {
  MpoAnsatz a = MpoAnsatz::product_state(3, 1, 1, bloch_rho(1.0, 0.0, 0.0));
  CHECK(std::abs(expect_product(a, {{1, pauli_x()}}) - 1.0) < 1e-13);
  CHECK(std::abs(expect_product(a, {{2, pauli_z()}})) < 1e-13);
  CHECK(std::abs(expect_product(a, {}) - 1.0) < 1e-13);
  // Operators on the same site compose in order: sigma_x sigma_x = 1.
  CHECK(std::abs(expect_product(a, {{1, pauli_x()}, {1, pauli_x()}}) - 1.0) < 1e-13);
  CHECK_THROWS_AS(expect_product(a, {{0, pauli_x()}}), InvalidInputError);

  // Raw means unnormalized: scaling rho scales the expectation.
  a.scale(std::pow(2.0, 1.0 / 3.0));
  CHECK(std::abs(expect_product(a, {{1, pauli_x()}}) - 2.0) < 1e-12);
  CHECK(std::abs(mpo_trace(a) - 2.0) < 1e-12);
}

TEST_CASE("expectations match dense reconstruction") {
  MpoAnsatz a = oracles::random_ansatz(3, 1, 3, 41);
  const Matrix rho = reconstruct_dense(a);
  const Complex tr = rho.trace();

  for (char axis : {'x', 'y', 'z'}) {
    const Matrix op = pauli_by_axis(axis);
    Complex ref{0.0, 0.0};
    for (int site = 1; site <= 3; ++site) {
      ref += (oracles::site_operator_full(3, site, op) * rho).trace();
      const Complex raw = expect_product(a, {{site, op}});
      CHECK(std::abs(raw - (oracles::site_operator_full(3, site, op) * rho).trace()) <
            1e-10 * std::max(1.0, std::abs(raw)));
    }
    const ObservableValue m = magnetization(a, axis);
    const Complex expected = ref / (3.0 * tr);
    CHECK(std::abs(m.value - expected.real()) < 1e-10);
    CHECK(std::abs(m.im_residual - std::abs(expected.imag())) < 1e-10);
  }
}

TEST_CASE("magnetization of bloch product states") {
  MpoAnsatz a = MpoAnsatz::product_state(4, 1, 2, bloch_rho(0.3, -0.2, 0.5));
  CHECK(magnetization(a, 'x').value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(magnetization(a, 'y').value == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(magnetization(a, 'z').value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(magnetization(a, 'z').im_residual < 1e-12);

  // Normalization is insensitive to a global scale.
  a.scale(1.7);
  CHECK(magnetization(a, 'z').value == doctest::Approx(0.5).epsilon(1e-12));

  MpoAnsatz zero(3, 1, 2, 2);
  CHECK_THROWS_AS(magnetization(zero, 'z'), DegenerateTraceError);
}

TEST_CASE("pair correlation matrix") {
  MpoAnsatz a = MpoAnsatz::product_state(4, 1, 1, bloch_rho(0.0, 0.0, 0.6));
  const Matrix c = pair_correlation_matrix(a, 'z');
  REQUIRE(c.rows() == 4);
  for (int n = 0; n < 4; ++n) {
    CHECK(std::abs(c(n, n) - 1.0) < 1e-12);  // sigma_z^2 = 1
    for (int m = 0; m < 4; ++m) {
      if (n != m) CHECK(std::abs(c(n, m) - 0.36) < 1e-12);
    }
  }

  // Against dense reconstruction on a random (unphysical) ansatz.
  MpoAnsatz r = oracles::random_ansatz(3, 1, 2, 59);
  const Matrix rho = reconstruct_dense(r);
  const Matrix cx = pair_correlation_matrix(r, 'x');
  for (int n = 1; n <= 3; ++n) {
    for (int m = 1; m <= 3; ++m) {
      const Complex ref = (oracles::site_operator_full(3, n, pauli_x()) *
                           oracles::site_operator_full(3, m, pauli_x()) * rho)
                              .trace() /
                          rho.trace();
      CHECK(std::abs(cx(n - 1, m - 1) - ref) < 1e-10);
    }
  }
}

TEST_CASE("ghz mixture correlators") {
  MpoAnsatz a = ghz_diagonal_mixture(4);
  CHECK(std::abs(mpo_trace(a) - 1.0) < 1e-12);
  CHECK(std::abs(magnetization(a, 'z').value) < 1e-12);
  CHECK(correlator(a, 'z', 1, false).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(correlator(a, 'z', 2, false).value == doctest::Approx(1.0).epsilon(1e-12));
  // Connected version keeps the full value because <sigma_z> vanishes.
  CHECK(correlator(a, 'z', 1, true).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(purity(a) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(renyi2(a) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("connected correlator subtracts the mean field") {
  MpoAnsatz a = MpoAnsatz::product_state(6, 1, 1, bloch_rho(0.0, 0.0, 0.7));
  CHECK(correlator(a, 'z', 2, false).value == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(std::abs(correlator(a, 'z', 2, true).value) < 1e-12);
  CHECK_THROWS_AS(correlator(a, 'z', 0, false), InvalidInputError);
  CHECK_THROWS_AS(correlator(a, 'z', 4, false), InvalidInputError);  // d > N/2
}

TEST_CASE("structure factor of ordered and disordered states") {
  // Fully polarized: all weight at q = 0.
  MpoAnsatz up = MpoAnsatz::product_state(4, 1, 1, bloch_rho(0.0, 0.0, 1.0));
  CHECK(structure_factor(up, 0.0).value == doctest::Approx(1.0).epsilon(1e-12));

  // Neel order: all weight at q = pi.
  MpoAnsatz neel = neel_state(4);
  CHECK(structure_factor(neel, kPi).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(structure_factor(neel, 0.0).value) < 1e-12);

  // Maximally mixed: only the on-site term survives, S(q) = 1/N.
  MpoAnsatz mixed = MpoAnsatz::product_state(4, 1, 1, 0.5 * pauli_id());
  for (int k = 0; k < 4; ++k) {
    CHECK(structure_factor(mixed, 2.0 * kPi * k / 4.0).value ==
          doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("structure factor symmetry and positivity on a physical state") {
  MpoAnsatz a = MpoAnsatz::product_state(5, 1, 2, bloch_rho(0.3, -0.2, 0.5));
  for (int k = 0; k < 5; ++k) {
    const double q = 2.0 * kPi * k / 5.0;
    const ObservableValue plus = structure_factor(a, q);
    const ObservableValue minus = structure_factor(a, -q);
    CHECK(plus.value == doctest::Approx(minus.value).epsilon(1e-12));
    CHECK(plus.value > -1e-12);
    CHECK(plus.im_residual < 1e-10);
  }
}

TEST_CASE("purity and renyi entropy") {
  MpoAnsatz pure = MpoAnsatz::product_state(3, 1, 2, bloch_rho(0.0, 1.0, 0.0));
  CHECK(purity(pure) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(renyi2(pure)) < 1e-10);

  MpoAnsatz mixed = MpoAnsatz::product_state(3, 1, 1, 0.5 * pauli_id());
  CHECK(purity(mixed) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(renyi2(mixed) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-10));

  // Dense cross-check on a random ansatz.
  MpoAnsatz r = oracles::random_ansatz(3, 1, 3, 71);
  const Matrix rho = reconstruct_dense(r);
  CHECK(purity(r) == doctest::Approx((rho * rho).trace().real()).epsilon(1e-10));

  // tr(rho^2) < 0 for an antisymmetric reconstruction: no valid entropy.
  MpoAnsatz anti(1, 1, 2, 1);
  anti.tensor(0, 1)(0, 0) = 1.0;
  anti.tensor(0, 2)(0, 0) = -1.0;
  CHECK(purity(anti) < 0.0);
  CHECK_THROWS_AS(renyi2(anti), NumericalError);
}

TEST_CASE("minimum eigenvalue of the hermitized state") {
  MpoAnsatz mixed = MpoAnsatz::product_state(2, 1, 1, 0.5 * pauli_id());
  CHECK(min_eigenvalue(mixed) == doctest::Approx(0.25).epsilon(1e-12));

  MpoAnsatz pure = MpoAnsatz::product_state(2, 1, 2, bloch_rho(0.0, 0.0, 1.0));
  CHECK(std::abs(min_eigenvalue(pure)) < 1e-12);

  // Bloch vector outside the ball: trace-one Hermitian but not positive.
  MpoAnsatz bad = MpoAnsatz::product_state(2, 1, 1, bloch_rho(0.0, 0.0, 2.0));
  CHECK(min_eigenvalue(bad) == doctest::Approx(-0.75).epsilon(1e-10));
}

TEST_CASE("steady-state cost normalization") {
  CHECK(rho_dot_cost(0.12, 6) == doctest::Approx(0.02));
  CHECK(rho_dot_cost(0.0, 3) == 0.0);
  CHECK_THROWS_AS(rho_dot_cost(-1.0, 4), InvalidInputError);
  CHECK_THROWS_AS(rho_dot_cost(1.0, 0), InvalidInputError);
}
