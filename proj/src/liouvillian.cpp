#include "tvmpo/liouvillian.hpp"

#include <cmath>
#include <limits>

#include "tvmpo/errors.hpp"

namespace tvmpo {

namespace {

const Complex kI{0.0, 1.0};

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// d^{-alpha} with the alpha -> infinity limit picking out nearest neighbors.
double power_law(double dist, double alpha) {
  if (std::isinf(alpha)) {
    return std::abs(dist - 1.0) < 1e-12 ? 1.0 : 0.0;
  }
  return std::pow(dist, -alpha);
}

}  // namespace

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix pauli_id() { return Matrix::Identity(2, 2); }

double distance_pbc(int i, int j, const Lattice& lattice) {
  const int n = lattice.n_sites();
  if (i < 1 || i > n || j < 1 || j > n) {
    throw InvalidInputError("distance_pbc: site index out of range");
  }
  if (lattice.kind == Lattice::Kind::ring) {
    const int diff = std::abs(i - j);
    return static_cast<double>(std::min(diff, n - diff));
  }
  const int cols = lattice.n1;
  const int rows = lattice.n2;
  const int ri = (i - 1) / cols, ci = (i - 1) % cols;
  const int rj = (j - 1) / cols, cj = (j - 1) % cols;
  const int dr = std::min(std::abs(ri - rj), rows - std::abs(ri - rj));
  const int dc = std::min(std::abs(ci - cj), cols - std::abs(ci - cj));
  return std::sqrt(static_cast<double>(dr * dr + dc * dc));
}

double kac_factor(double alpha, const Lattice& lattice) {
  const int n = lattice.n_sites();
  double k = 0.0;
  for (int j = 2; j <= n; ++j) {
    k += power_law(distance_pbc(1, j, lattice), alpha);
  }
  return k;
}

ChainMapping map_2d_to_chain(const Lattice& torus) {
  if (torus.kind != Lattice::Kind::torus) {
    throw InvalidInputError("map_2d_to_chain: lattice is not a torus");
  }
  const int n = torus.n_sites();
  ChainMapping mapping;
  mapping.unit_cell = torus.unit_cell();
  mapping.coords.reserve(n);
  for (int r = 0; r < torus.n2; ++r) {
    for (int c = 0; c < torus.n1; ++c) {
      mapping.coords.emplace_back(r, c);
    }
  }
  mapping.distances.resize(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      mapping.distances(i - 1, j - 1) = distance_pbc(i, j, torus);
    }
  }
  return mapping;
}

Matrix vectorize_hamiltonian_factor(const Matrix& op, FactorSide side) {
  const Matrix id = Matrix::Identity(op.rows(), op.cols());
  if (side == FactorSide::left) return kron(op, id);
  return kron(id, op.transpose());
}

Complex DiagonalTerm::evaluate(const SpinConfiguration& x) const {
  const int n = static_cast<int>(x.size());
  const int d = phys_dim;
  double ising = 0.0;
  if (pair_couplings.size() > 0) {
    for (int i = 0; i < n; ++i) {
      const int zi = (x[i] / d == 0) ? 1 : -1;
      const int zpi = (x[i] % d == 0) ? 1 : -1;
      for (int j = i + 1; j < n; ++j) {
        const double g = pair_couplings(i, j);
        if (g == 0.0) continue;
        const int zj = (x[j] / d == 0) ? 1 : -1;
        const int zpj = (x[j] % d == 0) ? 1 : -1;
        ising += g * (zi * zj - zpi * zpj);
      }
    }
  }
  Complex out = -kI * ising;
  for (int i = 0; i < n; ++i) {
    out += site_diag[i][x[i]];
  }
  return out;
}

Matrix jump_operator(JumpKind kind, double gamma) {
  const double c = 0.5 * std::sqrt(gamma);
  switch (kind) {
    case JumpKind::spin_decay_xy:
      return c * (pauli_x() - kI * pauli_y());
    case JumpKind::z_minus_y:
      return c * (pauli_z() - kI * pauli_y());
  }
  throw InvalidInputError("jump_operator: unsupported jump kind");
}

namespace {

// Dissipator plus transverse-field Liouvillian for one site, as a d^2 x d^2
// matrix on the vectorized index.
Matrix one_site_liouvillian(const Matrix& field_op, double field_strength,
                            const Matrix& jump) {
  const Matrix gdg = jump.adjoint() * jump;
  Matrix t = kron(jump, jump.conjugate());
  t -= 0.5 * (vectorize_hamiltonian_factor(gdg, FactorSide::left) +
              vectorize_hamiltonian_factor(gdg, FactorSide::right));
  if (field_strength != 0.0) {
    t += -kI * field_strength *
         (vectorize_hamiltonian_factor(field_op, FactorSide::left) -
          vectorize_hamiltonian_factor(field_op, FactorSide::right));
  }
  return t;
}

// Splits the one-site operator into its diagonal (handled exactly) and the
// remainder, which becomes a 1-local span term when nonzero.
void add_site_terms(LindbladianSpec& spec, const Matrix& site_op) {
  const Vector diag = site_op.diagonal();
  Matrix offdiag = site_op;
  offdiag.diagonal().setZero();
  const bool has_offdiag = offdiag.cwiseAbs().maxCoeff() > 0.0;
  for (int i = 0; i < spec.n_sites; ++i) {
    spec.diagonal.site_diag[i] = diag;
    if (has_offdiag) {
      SpanTerm term;
      term.anchor = i + 1;
      term.coefficient = Complex(1.0, 0.0);
      term.factors.push_back({0, offdiag});
      spec.span_terms.push_back(std::move(term));
    }
  }
}

double sign_factor(SignConvention sign) {
  return sign == SignConvention::main_text_minus ? -1.0 : 1.0;
}

double effective_coupling(const ModelParams& params, const CouplingParams& c,
                          int axis) {
  double j = c.J[axis];
  if (params.kac) {
    const double k = kac_factor(c.alpha, params.lattice);
    if (k > 0.0) j /= k;
  }
  if (params.pair_counting == PairCounting::twice) j *= 2.0;
  return j;
}

LindbladianSpec init_spec(const ModelParams& params) {
  LindbladianSpec spec;
  spec.n_sites = params.lattice.n_sites();
  spec.phys_dim = 2;
  spec.period = params.lattice.unit_cell();
  spec.diagonal.phys_dim = 2;
  spec.diagonal.pair_couplings = Eigen::MatrixXd::Zero(spec.n_sites, spec.n_sites);
  spec.diagonal.site_diag.assign(spec.n_sites, Vector::Zero(4));
  return spec;
}

// Accumulates z-z couplings for all unordered pairs into the diagonal term.
void add_zz_pairs(LindbladianSpec& spec, const ModelParams& params, int axis_z = 2) {
  const double s = sign_factor(params.sign);
  const int n = spec.n_sites;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const double dist = distance_pbc(i, j, params.lattice);
      double g = 0.0;
      for (const CouplingParams& c : params.couplings) {
        g += effective_coupling(params, c, axis_z) * power_law(dist, c.alpha);
      }
      g *= s;
      spec.diagonal.pair_couplings(i - 1, j - 1) += g;
      spec.diagonal.pair_couplings(j - 1, i - 1) += g;
    }
  }
}

}  // namespace

LindbladianSpec build_tfi(const ModelParams& params) {
  if (params.kind != ModelKind::tfi_long_range) {
    throw InvalidInputError("build_tfi: wrong model kind");
  }
  for (const CouplingParams& c : params.couplings) {
    if (c.J[0] != 0.0 || c.J[1] != 0.0) {
      throw InvalidInputError("build_tfi: Ising couplings must be z-z only");
    }
  }
  LindbladianSpec spec = init_spec(params);
  add_zz_pairs(spec, params);
  const double s = sign_factor(params.sign);
  const Matrix site_op = one_site_liouvillian(
      pauli_x(), s * params.h, jump_operator(params.jump_kind, params.gamma));
  add_site_terms(spec, site_op);
  return spec;
}

LindbladianSpec build_xyz(const ModelParams& params) {
  if (params.kind != ModelKind::xyz_long_range) {
    throw InvalidInputError("build_xyz: wrong model kind");
  }
  const int n = params.lattice.n_sites();
  if (params.r_trunc < 1) throw InvalidInputError("build_xyz: r_trunc must be >= 1");
  if (params.r_trunc >= n) throw InvalidInputError("build_xyz: r_trunc must be < N");
  LindbladianSpec spec = init_spec(params);
  // z-z couplings route through the diagonal term at every range.
  add_zz_pairs(spec, params);

  const double s = sign_factor(params.sign);
  const Matrix sigma[2] = {pauli_x(), pauli_y()};
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const double dist = distance_pbc(i, j, params.lattice);
      if (dist > params.r_trunc + 1e-12) continue;
      // Anchor the term so the span runs forward along the chain, wrapping
      // through the boundary when that is shorter.
      int anchor = i, offset = j - i;
      if (n - (j - i) < offset) {
        anchor = j;
        offset = n - (j - i);
      }
      for (int axis = 0; axis < 2; ++axis) {
        double coupling = 0.0;
        for (const CouplingParams& c : params.couplings) {
          coupling += effective_coupling(params, c, axis) * power_law(dist, c.alpha);
        }
        coupling *= s;
        if (coupling == 0.0) continue;
        const Matrix op_l = vectorize_hamiltonian_factor(sigma[axis], FactorSide::left);
        const Matrix op_r = vectorize_hamiltonian_factor(sigma[axis], FactorSide::right);
        SpanTerm left;
        left.anchor = anchor;
        left.coefficient = -kI * coupling;
        left.factors = {{0, op_l}, {offset, op_l}};
        spec.span_terms.push_back(std::move(left));
        SpanTerm right;
        right.anchor = anchor;
        right.coefficient = kI * coupling;
        right.factors = {{0, op_r}, {offset, op_r}};
        spec.span_terms.push_back(std::move(right));
      }
    }
  }
  const Matrix site_op = one_site_liouvillian(
      pauli_z(), s * params.h, jump_operator(params.jump_kind, params.gamma));
  add_site_terms(spec, site_op);
  return spec;
}

LindbladianSpec build_model(const ModelParams& params) {
  switch (params.kind) {
    case ModelKind::tfi_long_range:
      return build_tfi(params);
    case ModelKind::xyz_long_range:
      return build_xyz(params);
  }
  throw InvalidInputError("build_model: unsupported model kind");
}

}  // namespace tvmpo
