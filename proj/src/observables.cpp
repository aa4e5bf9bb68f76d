#include "tvmpo/observables.hpp"

#include <cmath>
#include <complex>

#include "tvmpo/errors.hpp"
#include "tvmpo/liouvillian.hpp"

namespace tvmpo {

namespace {

// Transfer matrix of site j under weight vector w: W = sum_x w[x] A_j^x.
Matrix weighted_transfer(const MpoAnsatz& ansatz, int site, const Vector& w) {
  const int chi = ansatz.bond_dim();
  Matrix out = Matrix::Zero(chi, chi);
  for (int x = 0; x < ansatz.vec_dim(); ++x) {
    if (w(x) == Complex(0.0, 0.0)) continue;
    out.noalias() += w(x) * ansatz.site_tensor(site, x);
  }
  return out;
}

Vector trace_weight(int d) {
  Vector w = Vector::Zero(d * d);
  for (int s = 0; s < d; ++s) w(s * d + s) = 1.0;
  return w;
}

// tr(O rho) weight: w[sigma*d + sigma'] = O(sigma', sigma).
Vector op_weight(const Matrix& op) {
  const int d = static_cast<int>(op.rows());
  Vector w(d * d);
  for (int s = 0; s < d; ++s) {
    for (int sp = 0; sp < d; ++sp) w(s * d + sp) = op(sp, s);
  }
  return w;
}

struct TraceEnvironments {
  std::vector<Matrix> prefix;  // prefix[j] = T_1 ... T_j, prefix[0] = 1
  std::vector<Matrix> suffix;  // suffix[j] = T_j ... T_N, suffix[N+1] = 1
};

TraceEnvironments trace_environments(const MpoAnsatz& ansatz) {
  const int n = ansatz.n_sites();
  const int chi = ansatz.bond_dim();
  const Vector w = trace_weight(ansatz.phys_dim());
  TraceEnvironments env;
  env.prefix.resize(n + 1);
  env.suffix.resize(n + 2);
  env.prefix[0] = Matrix::Identity(chi, chi);
  env.suffix[n + 1] = Matrix::Identity(chi, chi);
  for (int j = 1; j <= n; ++j) {
    env.prefix[j].noalias() = env.prefix[j - 1] * weighted_transfer(ansatz, j, w);
  }
  for (int j = n; j >= 1; --j) {
    env.suffix[j].noalias() = weighted_transfer(ansatz, j, w) * env.suffix[j + 1];
  }
  return env;
}

Complex normalizing_trace(const MpoAnsatz& ansatz) {
  const Complex tr = trace_of_rho(ansatz);
  if (std::abs(tr) < kAmplitudeFloor) {
    throw DegenerateTraceError("observable: tr(rho) vanished, cannot normalize");
  }
  return tr;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ObservableValue as_real(Complex v) { return ObservableValue{v.real(), std::abs(v.imag())}; }

}  // namespace

Matrix pauli_by_axis(char axis) {
  switch (axis) {
    case 'x': return pauli_x();
    case 'y': return pauli_y();
    case 'z': return pauli_z();
    default: throw InvalidInputError("pauli_by_axis: axis must be one of x, y, z");
  }
}

Complex expect_product(const MpoAnsatz& ansatz,
                       const std::vector<std::pair<int, Matrix>>& site_ops) {
  const int n = ansatz.n_sites();
  const int d = ansatz.phys_dim();
  std::vector<Matrix> site_total(n, Matrix::Identity(d, d));
  for (const auto& [site, op] : site_ops) {
    if (site < 1 || site > n) throw InvalidInputError("expect_product: site out of range");
    if (op.rows() != d || op.cols() != d) {
      throw InvalidInputError("expect_product: operator must be d x d");
    }
    site_total[site - 1] = site_total[site - 1] * op;
  }
  const Vector wtr = trace_weight(d);
  Matrix prod = Matrix::Identity(ansatz.bond_dim(), ansatz.bond_dim());
  for (int j = 1; j <= n; ++j) {
    const bool plain = site_total[j - 1].isIdentity(0.0);
    const Vector w = plain ? wtr : op_weight(site_total[j - 1]);
    prod = prod * weighted_transfer(ansatz, j, w);
  }
  return prod.trace();
}

Complex mpo_trace(const MpoAnsatz& ansatz) { return trace_of_rho(ansatz); }

ObservableValue magnetization(const MpoAnsatz& ansatz, char axis) {
  const int n = ansatz.n_sites();
  const Matrix op = pauli_by_axis(axis);
  const Vector w = op_weight(op);
  const TraceEnvironments env = trace_environments(ansatz);
  const Complex tr = normalizing_trace(ansatz);
  Complex sum = 0.0;
  for (int j = 1; j <= n; ++j) {
    sum += (env.prefix[j - 1] * weighted_transfer(ansatz, j, w) * env.suffix[j + 1]).trace();
  }
  return as_real(sum / (tr * static_cast<double>(n)));
}

Matrix pair_correlation_matrix(const MpoAnsatz& ansatz, char axis) {
  const int n = ansatz.n_sites();
  const Matrix op = pauli_by_axis(axis);
  const Vector w = op_weight(op);
  const Vector w2 = op_weight(Matrix(op * op));
  const Vector wtr = trace_weight(ansatz.phys_dim());
  const TraceEnvironments env = trace_environments(ansatz);
  const Complex tr = normalizing_trace(ansatz);

  Matrix corr(n, n);
  for (int a = 1; a <= n; ++a) {
    corr(a - 1, a - 1) =
        (env.prefix[a - 1] * weighted_transfer(ansatz, a, w2) * env.suffix[a + 1]).trace() / tr;
    // Carry the partial product rightward so the whole row costs O(N chi^3).
    Matrix g = env.prefix[a - 1] * weighted_transfer(ansatz, a, w);
    for (int b = a + 1; b <= n; ++b) {
      const Complex v = (g * weighted_transfer(ansatz, b, w) * env.suffix[b + 1]).trace() / tr;
      corr(a - 1, b - 1) = v;
      corr(b - 1, a - 1) = v;
      g = g * weighted_transfer(ansatz, b, wtr);
    }
  }
  return corr;
}

ObservableValue correlator(const MpoAnsatz& ansatz, char axis, int distance, bool connected) {
  const int n = ansatz.n_sites();
  if (distance < 1 || distance > n / 2) {
    throw InvalidInputError("correlator: distance must satisfy 1 <= d <= N/2");
  }
  const Matrix corr = pair_correlation_matrix(ansatz, axis);
  Complex sum = 0.0;
  if (connected) {
    const Matrix op = pauli_by_axis(axis);
    const Vector w = op_weight(op);
    const TraceEnvironments env = trace_environments(ansatz);
    const Complex tr = normalizing_trace(ansatz);
    Vector mags(n);
    for (int j = 1; j <= n; ++j) {
      mags(j - 1) =
          (env.prefix[j - 1] * weighted_transfer(ansatz, j, w) * env.suffix[j + 1]).trace() / tr;
    }
    for (int a = 0; a < n; ++a) {
      const int b = (a + distance) % n;
      sum += corr(a, b) - mags(a) * mags(b);
    }
  } else {
    for (int a = 0; a < n; ++a) sum += corr(a, (a + distance) % n);
  }
  return as_real(sum / static_cast<double>(n));
}

ObservableValue structure_factor(const MpoAnsatz& ansatz, double q) {
  const int n = ansatz.n_sites();
  const Matrix corr = pair_correlation_matrix(ansatz, 'z');
  Complex sum = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      sum += std::exp(Complex(0.0, q * (a - b))) * corr(a, b);
    }
  }
  return as_real(sum / static_cast<double>(n) / static_cast<double>(n));
}

double purity(const MpoAnsatz& ansatz) {
  const int d = ansatz.phys_dim();
  const int chi = ansatz.bond_dim();
  Matrix prod = Matrix::Identity(chi * chi, chi * chi);
  for (int j = 1; j <= ansatz.n_sites(); ++j) {
    Matrix e = Matrix::Zero(chi * chi, chi * chi);
    for (int s = 0; s < d; ++s) {
      for (int sp = 0; sp < d; ++sp) {
        e += kron(ansatz.site_tensor(j, s * d + sp), ansatz.site_tensor(j, sp * d + s));
      }
    }
    prod = prod * e;
  }
  const Complex tr2 = prod.trace();
  return tr2.real();
}

double renyi2(const MpoAnsatz& ansatz) {
  const double p = purity(ansatz);
  if (p <= 0.0) {
    throw NumericalError("renyi2: tr(rho^2) is non-positive, ansatz state is non-physical");
  }
  return -std::log(p);
}

double min_eigenvalue(const MpoAnsatz& ansatz) {
  const Matrix rho = reconstruct_dense(ansatz);
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  if (es.info() != Eigen::Success) {
    throw NumericalError("min_eigenvalue: eigendecomposition failed");
  }
  return es.eigenvalues().minCoeff();
}

double rho_dot_cost(double l2, int n_sites) {
  if (n_sites < 1) throw InvalidInputError("rho_dot_cost: n_sites must be >= 1");
  if (l2 < 0.0) throw InvalidInputError("rho_dot_cost: l2 must be non-negative");
  return l2 / n_sites;
}

}  // namespace tvmpo
