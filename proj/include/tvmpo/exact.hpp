#ifndef TVMPO_EXACT_HPP
#define TVMPO_EXACT_HPP

#include <functional>
#include <utility>
#include <vector>

#include "tvmpo/liouvillian.hpp"
#include "tvmpo/types.hpp"

namespace tvmpo {

// Vectorized density matrix over the full Hilbert space, site 1 most
// significant: index = sum_j x_j * (d^2)^(N-j). Capped at N <= 8.
struct DenseState {
  int n_sites = 0;
  int phys_dim = 2;
  Vector vec;
};

DenseState dense_product_state(int n_sites, const Matrix& single_site_rho);

// Matrix-free application of the Lindbladian; the diagonal part is
// precomputed once per spec.
class DenseLindbladian {
 public:
  explicit DenseLindbladian(LindbladianSpec spec);

  void apply(const Vector& in, Vector& out) const;
  Vector apply(const Vector& in) const;
  const LindbladianSpec& spec() const { return spec_; }

 private:
  LindbladianSpec spec_;
  Vector diagonal_;
};

DenseState apply_lindbladian(const LindbladianSpec& spec, const DenseState& state);

// Classical fixed-step RK4 integration of d rho/dt = L rho.
void rk4_evolve(const LindbladianSpec& spec, DenseState& state, double t_end, double dt,
                const std::function<void(double, const DenseState&)>& observer = nullptr);

// tr(O rho) for a product of single-site d x d operators (1-based sites).
Complex dense_expectation(const DenseState& state,
                          const std::vector<std::pair<int, Matrix>>& site_ops);
Complex dense_trace(const DenseState& state);

// Reshape to the d^N x d^N density matrix.
Matrix dense_to_matrix(const DenseState& state);

struct MeanFieldState {
  double mx = 0.0;
  double my = 0.0;
  double mz = 0.0;
};

// Mean-field Heisenberg equations of motion for the Kac-normalized Ising
// model: coupled magnetization ODEs with total coupling jsum = sum_n J~_n.
MeanFieldState meanfield_rhs(const MeanFieldState& m, double jsum, double h, double gamma);

void meanfield_evolve(MeanFieldState& m, double jsum, double h, double gamma,
                      double t_end, double dt,
                      const std::function<void(double, const MeanFieldState&)>& observer = nullptr);

}  // namespace tvmpo

#endif
