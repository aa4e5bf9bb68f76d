#ifndef TVMPO_OBSERVABLES_HPP
#define TVMPO_OBSERVABLES_HPP

#include <utility>
#include <vector>

#include "tvmpo/mpo.hpp"
#include "tvmpo/types.hpp"

namespace tvmpo {

// Hermitian measurements report the real part; the imaginary residual is kept
// as a health metric because the ansatz is not structurally Hermitian.
struct ObservableValue {
  double value = 0.0;
  double im_residual = 0.0;
};

Matrix pauli_by_axis(char axis);  // 'x', 'y' or 'z'

// Raw tr(O rho) for a product of single-site operators, contracted through
// per-site transfer matrices (trace vector on unmeasured sites). Sites are
// 1-based and need not be distinct (operators on one site compose in order).
Complex expect_product(const MpoAnsatz& ansatz, const std::vector<std::pair<int, Matrix>>& site_ops);

// tr(rho) via the same contraction.
Complex mpo_trace(const MpoAnsatz& ansatz);

// Site-averaged <sigma^axis>, normalized by tr(rho).
ObservableValue magnetization(const MpoAnsatz& ansatz, char axis);

// All normalized pair expectations <sigma^axis_n sigma^axis_m>, n,m = 1..N.
Matrix pair_correlation_matrix(const MpoAnsatz& ansatz, char axis);

// C_d = <sigma_n sigma_{n+d}> (minus <sigma_n><sigma_{n+d}> when connected),
// averaged over all translations. Requires 1 <= d <= N/2.
ObservableValue correlator(const MpoAnsatz& ansatz, char axis, int distance, bool connected);

// S_zz(q) = (1/N^2) sum_{n,m} e^{iq(n-m)} <sigma^z_n sigma^z_m>, q = 2*pi*k/N.
// Uses the non-connected correlator.
ObservableValue structure_factor(const MpoAnsatz& ansatz, double q);

// tr(rho^2) through the doubled transfer matrix E_j = sum_{ss'} A^{(s,s')} (x) A^{(s',s)}.
double purity(const MpoAnsatz& ansatz);

// S_2 = -log tr(rho^2); throws if the purity is non-positive.
double renyi2(const MpoAnsatz& ansatz);

// Smallest eigenvalue of (rho + rho^dagger)/2 from dense reconstruction (N <= 10).
double min_eigenvalue(const MpoAnsatz& ansatz);

// |rho_dot|^2 / N steady-state cost from the assembled E[|L_loc|^2].
double rho_dot_cost(double l2, int n_sites);

}  // namespace tvmpo

#endif
