#ifndef TVMPO_MPO_HPP
#define TVMPO_MPO_HPP

#include <string>
#include <vector>

#include "tvmpo/types.hpp"

namespace tvmpo {

// Per-site configuration of the vectorized density matrix. Each entry encodes
// the bra/ket pair (sigma, sigma') as x = sigma*d + sigma'.
using SpinConfiguration = std::vector<int>;

// Periodic MPO density matrix in vectorized (MPS) form: D unit-cell tensors of
// shape d^2 x chi x chi, replicated over N sites. Site j (1-based) uses the
// unit-cell tensor with index ((j-1) mod D).
class MpoAnsatz {
 public:
  MpoAnsatz(int n_sites, int period, int phys_dim, int bond_dim);

  // Embeds a single-site density matrix as an exact product state: the matrix
  // occupies the (0,0) bond block of each tensor, zeros elsewhere.
  static MpoAnsatz product_state(int n_sites, int period, int bond_dim,
                                 const Matrix& single_site_rho);

  int n_sites() const { return n_sites_; }
  int period() const { return period_; }
  int phys_dim() const { return phys_dim_; }
  int vec_dim() const { return vec_dim_; }
  int bond_dim() const { return bond_dim_; }
  long n_params() const {
    return static_cast<long>(period_) * vec_dim_ * bond_dim_ * bond_dim_;
  }

  // 1-based site index -> 0-based unit-cell index.
  int cell_index(int site) const { return (site - 1) % period_; }

  const Matrix& tensor(int cell, int s) const { return tensors_[cell * vec_dim_ + s]; }
  Matrix& tensor(int cell, int s) { return tensors_[cell * vec_dim_ + s]; }
  const Matrix& site_tensor(int site, int s) const { return tensor(cell_index(site), s); }

  // Flattened parameter layout: ((r*d^2 + s)*chi + u)*chi + v, row-major in (u,v).
  long param_index(int cell, int s, int u, int v) const {
    return ((static_cast<long>(cell) * vec_dim_ + s) * bond_dim_ + u) * bond_dim_ + v;
  }
  Vector parameters() const;
  void set_parameters(const Vector& params);

  bool is_finite() const;
  void scale(Complex factor);

 private:
  int n_sites_;
  int period_;
  int phys_dim_;
  int vec_dim_;
  int bond_dim_;
  std::vector<Matrix> tensors_;
};

// Cached partial matrix products for one configuration. left[j] = L_j for
// j = 0..N with L_0 = 1; right[j] = R_j for j = 1..N+1 with R_{N+1} = 1
// (right[0] is unused). tr L_N = tr R_1 = <x|rho>.
struct PartialProducts {
  std::vector<Matrix> left;
  std::vector<Matrix> right;
};

// Log-derivative of ln<x|rho> with respect to every tensor entry, flattened in
// the MpoAnsatz parameter layout.
struct LogDerivative {
  Vector delta;
};

void validate_configuration(const MpoAnsatz& ansatz, const SpinConfiguration& x);

Complex amplitude(const MpoAnsatz& ansatz, const SpinConfiguration& x);

PartialProducts partial_products(const MpoAnsatz& ansatz, const SpinConfiguration& x);

LogDerivative log_derivative(const MpoAnsatz& ansatz, const SpinConfiguration& x,
                             const PartialProducts& pp);

Complex trace_of_rho(const MpoAnsatz& ansatz);

// Scales every unit-cell tensor by the principal N-th root of 1/tr(rho).
void renormalize_trace(MpoAnsatz& ansatz);

// Dense d^N x d^N matrix with entry (sigma, sigma') = amplitude at
// x_j = sigma_j*d + sigma'_j. Guarded to N <= 10.
Matrix reconstruct_dense(const MpoAnsatz& ansatz);

// Binary checkpoint: 8-byte magic "TVMPOCK1", four little-endian uint64
// (N, D, d, chi), then D*d^2 tensors as row-major (re, im) float64 pairs.
void save_checkpoint(const MpoAnsatz& ansatz, const std::string& path);
MpoAnsatz load_checkpoint(const std::string& path);

}  // namespace tvmpo

#endif
