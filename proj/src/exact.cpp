#include "tvmpo/exact.hpp"

#include <cmath>
#include <utility>

#include "tvmpo/errors.hpp"

namespace tvmpo {

namespace {

constexpr int kMaxDenseSites = 8;

long dense_dim(int n_sites, int phys_dim) {
  long dim = 1;
  const long d2 = static_cast<long>(phys_dim) * phys_dim;
  for (int j = 0; j < n_sites; ++j) dim *= d2;
  return dim;
}

void check_dense_capacity(int n_sites, int phys_dim) {
  if (n_sites < 1 || phys_dim < 2) {
    throw InvalidInputError("dense state: need n_sites >= 1 and phys_dim >= 2");
  }
  if (n_sites > kMaxDenseSites) {
    throw CapacityError("dense state: n_sites exceeds the exact-solver cap of 8");
  }
}

// Decode the vectorized site indices from a flat index, site 1 most significant.
void decode(long index, int n_sites, int d2, SpinConfiguration& x) {
  for (int j = n_sites - 1; j >= 0; --j) {
    x[j] = static_cast<int>(index % d2);
    index /= d2;
  }
}

// out gets op applied to site j (1-based) of in; both length dim.
void apply_site_op(const Vector& in, Vector& out, const Matrix& op, int site,
                   int n_sites, int d2) {
  const long dim = in.size();
  long inner = 1;
  for (int k = 0; k < n_sites - site; ++k) inner *= d2;
  const long outer = dim / (inner * d2);
  out.setZero();
  for (long o = 0; o < outer; ++o) {
    const long base = o * d2 * inner;
    for (int s = 0; s < d2; ++s) {
      for (int t = 0; t < d2; ++t) {
        const Complex w = op(s, t);
        if (w == Complex(0.0, 0.0)) continue;
        out.segment(base + s * inner, inner) += w * in.segment(base + t * inner, inner);
      }
    }
  }
}

}  // namespace

DenseState dense_product_state(int n_sites, const Matrix& single_site_rho) {
  const int d = static_cast<int>(single_site_rho.rows());
  if (single_site_rho.cols() != d) {
    throw InvalidInputError("dense_product_state: single_site_rho must be square");
  }
  check_dense_capacity(n_sites, d);
  const int d2 = d * d;
  Vector site(d2);
  for (int s = 0; s < d; ++s) {
    for (int sp = 0; sp < d; ++sp) site(s * d + sp) = single_site_rho(s, sp);
  }
  Vector vec = site;
  for (int j = 1; j < n_sites; ++j) {
    Vector next(vec.size() * d2);
    for (long a = 0; a < vec.size(); ++a) {
      next.segment(a * d2, d2) = vec(a) * site;
    }
    vec = std::move(next);
  }
  DenseState state;
  state.n_sites = n_sites;
  state.phys_dim = d;
  state.vec = std::move(vec);
  return state;
}

DenseLindbladian::DenseLindbladian(LindbladianSpec spec) : spec_(std::move(spec)) {
  check_dense_capacity(spec_.n_sites, spec_.phys_dim);
  const int d2 = spec_.phys_dim * spec_.phys_dim;
  const long dim = dense_dim(spec_.n_sites, spec_.phys_dim);
  diagonal_.resize(dim);
  SpinConfiguration x(spec_.n_sites);
  for (long idx = 0; idx < dim; ++idx) {
    decode(idx, spec_.n_sites, d2, x);
    diagonal_(idx) = spec_.diagonal.evaluate(x);
  }
}

void DenseLindbladian::apply(const Vector& in, Vector& out) const {
  if (in.size() != diagonal_.size()) {
    throw InvalidInputError("DenseLindbladian::apply: dimension mismatch");
  }
  const int n = spec_.n_sites;
  const int d2 = spec_.phys_dim * spec_.phys_dim;
  out = diagonal_.cwiseProduct(in);
  Vector tmp(in.size());
  Vector tmp2(in.size());
  for (const SpanTerm& term : spec_.span_terms) {
    const Vector* src = &in;
    for (const SpanFactor& f : term.factors) {
      const int site = (term.anchor - 1 + f.offset) % n + 1;
      Vector& dst = (src == &tmp) ? tmp2 : tmp;
      apply_site_op(*src, dst, f.op, site, n, d2);
      src = &dst;
    }
    out += term.coefficient * *src;
  }
}

Vector DenseLindbladian::apply(const Vector& in) const {
  Vector out;
  apply(in, out);
  return out;
}

DenseState apply_lindbladian(const LindbladianSpec& spec, const DenseState& state) {
  DenseLindbladian lind(spec);
  DenseState out = state;
  lind.apply(state.vec, out.vec);
  return out;
}

void rk4_evolve(const LindbladianSpec& spec, DenseState& state, double t_end, double dt,
                const std::function<void(double, const DenseState&)>& observer) {
  if (dt <= 0.0) throw InvalidInputError("rk4_evolve: dt must be positive");
  DenseLindbladian lind(spec);
  double t = 0.0;
  Vector k1, k2, k3, k4, work;
  if (observer) observer(t, state);
  while (t < t_end - 1e-15) {
    const double step = std::min(dt, t_end - t);
    lind.apply(state.vec, k1);
    work = state.vec + (0.5 * step) * k1;
    lind.apply(work, k2);
    work = state.vec + (0.5 * step) * k2;
    lind.apply(work, k3);
    work = state.vec + step * k3;
    lind.apply(work, k4);
    state.vec += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += step;
    if (observer) observer(t, state);
  }
}

Complex dense_expectation(const DenseState& state,
                          const std::vector<std::pair<int, Matrix>>& site_ops) {
  const int d = state.phys_dim;
  const int d2 = d * d;
  // Fold repeated operators on a site into one matrix, identity elsewhere.
  std::vector<Matrix> site_total(state.n_sites, Matrix::Identity(d, d));
  for (const auto& [site, op] : site_ops) {
    if (site < 1 || site > state.n_sites) {
      throw InvalidInputError("dense_expectation: site index out of range");
    }
    if (op.rows() != d || op.cols() != d) {
      throw InvalidInputError("dense_expectation: operator must be d x d");
    }
    site_total[site - 1] = site_total[site - 1] * op;
  }
  // Per-site weight over the vectorized index x = sigma*d + sigma':
  // tr(O rho) = sum_x O(sigma', sigma) rho(sigma, sigma').
  std::vector<Vector> weights(state.n_sites, Vector::Zero(d2));
  for (int j = 0; j < state.n_sites; ++j) {
    for (int s = 0; s < d; ++s) {
      for (int sp = 0; sp < d; ++sp) weights[j](s * d + sp) = site_total[j](sp, s);
    }
  }
  // Contract site by site, last site innermost.
  Vector acc = state.vec;
  for (int j = state.n_sites; j >= 1; --j) {
    const long blocks = acc.size() / d2;
    Vector next(blocks);
    for (long b = 0; b < blocks; ++b) {
      next(b) = acc.segment(b * d2, d2).cwiseProduct(weights[j - 1]).sum();
    }
    acc = std::move(next);
  }
  return acc(0);
}

Complex dense_trace(const DenseState& state) { return dense_expectation(state, {}); }

Matrix dense_to_matrix(const DenseState& state) {
  const int d = state.phys_dim;
  const int d2 = d * d;
  long hdim = 1;
  for (int j = 0; j < state.n_sites; ++j) hdim *= d;
  Matrix rho = Matrix::Zero(hdim, hdim);
  SpinConfiguration x(state.n_sites);
  for (long idx = 0; idx < state.vec.size(); ++idx) {
    decode(idx, state.n_sites, d2, x);
    long row = 0, col = 0;
    for (int j = 0; j < state.n_sites; ++j) {
      row = row * d + x[j] / d;
      col = col * d + x[j] % d;
    }
    rho(row, col) = state.vec(idx);
  }
  return rho;
}

MeanFieldState meanfield_rhs(const MeanFieldState& m, double jsum, double h, double gamma) {
  MeanFieldState dm;
  dm.mx = 2.0 * jsum * m.my * m.mz + gamma * (1.0 - m.mx);
  dm.my = -2.0 * jsum * m.mx * m.mz + 2.0 * h * m.mz - 0.5 * gamma * m.my;
  dm.mz = -2.0 * h * m.my - 0.5 * gamma * m.mz;
  return dm;
}

void meanfield_evolve(MeanFieldState& m, double jsum, double h, double gamma,
                      double t_end, double dt,
                      const std::function<void(double, const MeanFieldState&)>& observer) {
  if (dt <= 0.0) throw InvalidInputError("meanfield_evolve: dt must be positive");
  auto axpy = [](const MeanFieldState& a, double c, const MeanFieldState& b) {
    return MeanFieldState{a.mx + c * b.mx, a.my + c * b.my, a.mz + c * b.mz};
  };
  double t = 0.0;
  if (observer) observer(t, m);
  while (t < t_end - 1e-15) {
    const double step = std::min(dt, t_end - t);
    const MeanFieldState k1 = meanfield_rhs(m, jsum, h, gamma);
    const MeanFieldState k2 = meanfield_rhs(axpy(m, 0.5 * step, k1), jsum, h, gamma);
    const MeanFieldState k3 = meanfield_rhs(axpy(m, 0.5 * step, k2), jsum, h, gamma);
    const MeanFieldState k4 = meanfield_rhs(axpy(m, step, k3), jsum, h, gamma);
    m.mx += (step / 6.0) * (k1.mx + 2.0 * k2.mx + 2.0 * k3.mx + k4.mx);
    m.my += (step / 6.0) * (k1.my + 2.0 * k2.my + 2.0 * k3.my + k4.my);
    m.mz += (step / 6.0) * (k1.mz + 2.0 * k2.mz + 2.0 * k3.mz + k4.mz);
    t += step;
    if (observer) observer(t, m);
  }
}

}  // namespace tvmpo
