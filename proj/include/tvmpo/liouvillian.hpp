#ifndef TVMPO_LIOUVILLIAN_HPP
#define TVMPO_LIOUVILLIAN_HPP

#include <array>
#include <limits>
#include <utility>
#include <vector>

#include "tvmpo/mpo.hpp"
#include "tvmpo/types.hpp"

namespace tvmpo {

// Spin-1/2 Pauli matrices in the basis {0 = up, 1 = down} with sigma_z|up> = +|up>.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix pauli_id();

struct Lattice {
  enum class Kind { ring, torus };
  Kind kind = Kind::ring;
  int n1 = 0;  // ring: N; torus: row length (columns)
  int n2 = 1;  // torus: number of rows

  static Lattice ring(int n) { return Lattice{Kind::ring, n, 1}; }
  static Lattice torus(int cols, int rows) { return Lattice{Kind::torus, cols, rows}; }

  int n_sites() const { return kind == Kind::ring ? n1 : n1 * n2; }
  // The MPO unit cell: one row of the torus, a single site on a ring.
  int unit_cell() const { return kind == Kind::ring ? 1 : n1; }
};

// Minimal-image Euclidean distance between 1-based chain sites (row-major
// ordering on a torus).
double distance_pbc(int i, int j, const Lattice& lattice);

// K(alpha) = sum_{j != i} d_ij^{-alpha}; couplings become J/K(alpha) when
// Kac normalization is on. alpha may be +infinity (nearest neighbors only).
double kac_factor(double alpha, const Lattice& lattice);

// Row-major ordering of a torus onto the periodic chain.
struct ChainMapping {
  int unit_cell = 1;
  std::vector<std::pair<int, int>> coords;  // chain site k+1 -> (row, col)
  Eigen::MatrixXd distances;                // torus distances, chain-indexed
};
ChainMapping map_2d_to_chain(const Lattice& torus);

enum class FactorSide { left, right };

// Row-vectorization x = sigma*d + sigma': left factor acts on sigma as
// op (x) I, right factor acts on sigma' as I (x) op^T.
Matrix vectorize_hamiltonian_factor(const Matrix& op, FactorSide side);

// One quasi-local Liouvillian term. Offsets are strictly increasing and start
// at 0; offsets not listed are identity pass-throughs.
struct SpanFactor {
  int offset = 0;
  Matrix op;  // d^2 x d^2, acting on one vectorized site index
};

struct SpanTerm {
  int anchor = 1;  // 1-based site
  Complex coefficient{1.0, 0.0};
  std::vector<SpanFactor> factors;
  int span() const { return factors.back().offset + 1; }
};

// Diagonal part of the Lindbladian: evaluated exactly at any range.
// pair_couplings holds the z-z Hamiltonian couplings g_ij (symmetric, zero
// diagonal); site_diag holds per-site diagonal Liouvillian entries.
struct DiagonalTerm {
  int phys_dim = 2;
  Eigen::MatrixXd pair_couplings;
  std::vector<Vector> site_diag;

  // <x|L_diag|x> = -i (E(sigma) - E(sigma')) + sum_i site_diag[i][x_i],
  // with E the Ising energy of the pair couplings.
  Complex evaluate(const SpinConfiguration& x) const;
};

struct LindbladianSpec {
  int n_sites = 0;
  int phys_dim = 2;
  int period = 1;  // unit-cell period of the term pattern
  DiagonalTerm diagonal;
  std::vector<SpanTerm> span_terms;
};

enum class ModelKind { tfi_long_range, xyz_long_range };
enum class JumpKind { spin_decay_xy, z_minus_y };
enum class SignConvention { main_text_minus, sm_plus };
enum class PairCounting { once, twice };

struct CouplingParams {
  std::array<double, 3> J{0.0, 0.0, 0.0};  // (Jx, Jy, Jz); Ising uses Jz only
  double alpha = std::numeric_limits<double>::infinity();
};

struct ModelParams {
  ModelKind kind = ModelKind::tfi_long_range;
  std::vector<CouplingParams> couplings;
  double h = 0.0;
  double gamma = 1.0;
  JumpKind jump_kind = JumpKind::spin_decay_xy;
  Lattice lattice = Lattice::ring(1);
  SignConvention sign = SignConvention::sm_plus;
  bool kac = false;
  int r_trunc = 4;
  PairCounting pair_counting = PairCounting::once;
};

// Jump operator matrix for one site, including the sqrt(gamma) prefactor.
Matrix jump_operator(JumpKind kind, double gamma);

LindbladianSpec build_tfi(const ModelParams& params);
LindbladianSpec build_xyz(const ModelParams& params);
LindbladianSpec build_model(const ModelParams& params);

}  // namespace tvmpo

#endif
