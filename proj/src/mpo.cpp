#include "tvmpo/mpo.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tvmpo/errors.hpp"

namespace tvmpo {

MpoAnsatz::MpoAnsatz(int n_sites, int period, int phys_dim, int bond_dim)
    : n_sites_(n_sites),
      period_(period),
      phys_dim_(phys_dim),
      vec_dim_(phys_dim * phys_dim),
      bond_dim_(bond_dim) {
  if (n_sites < 1 || period < 1 || phys_dim < 2 || bond_dim < 1) {
    throw InvalidInputError("MpoAnsatz: all dimensions must be positive");
  }
  if (n_sites % period != 0) {
    throw InvalidInputError("MpoAnsatz: N must be divisible by the unit-cell period D");
  }
  tensors_.assign(static_cast<size_t>(period_) * vec_dim_,
                  Matrix::Zero(bond_dim_, bond_dim_));
}

MpoAnsatz MpoAnsatz::product_state(int n_sites, int period, int bond_dim,
                                   const Matrix& single_site_rho) {
  const int d = static_cast<int>(single_site_rho.rows());
  if (single_site_rho.cols() != d) {
    throw InvalidInputError("product_state: single-site density matrix must be square");
  }
  if (std::abs(single_site_rho.trace() - Complex(1.0, 0.0)) > 1e-10) {
    throw InvalidInputError("product_state: single-site density matrix must have unit trace");
  }
  if ((single_site_rho - single_site_rho.adjoint()).norm() > 1e-10) {
    throw InvalidInputError("product_state: single-site density matrix must be Hermitian");
  }
  MpoAnsatz ansatz(n_sites, period, d, bond_dim);
  for (int r = 0; r < period; ++r) {
    for (int sigma = 0; sigma < d; ++sigma) {
      for (int sigmap = 0; sigmap < d; ++sigmap) {
        ansatz.tensor(r, sigma * d + sigmap)(0, 0) = single_site_rho(sigma, sigmap);
      }
    }
  }
  return ansatz;
}

Vector MpoAnsatz::parameters() const {
  Vector params(n_params());
  for (int r = 0; r < period_; ++r) {
    for (int s = 0; s < vec_dim_; ++s) {
      const Matrix& a = tensor(r, s);
      for (int u = 0; u < bond_dim_; ++u) {
        for (int v = 0; v < bond_dim_; ++v) {
          params[param_index(r, s, u, v)] = a(u, v);
        }
      }
    }
  }
  return params;
}

void MpoAnsatz::set_parameters(const Vector& params) {
  if (params.size() != n_params()) {
    throw InvalidInputError("set_parameters: parameter vector has wrong length");
  }
  for (int r = 0; r < period_; ++r) {
    for (int s = 0; s < vec_dim_; ++s) {
      Matrix& a = tensor(r, s);
      for (int u = 0; u < bond_dim_; ++u) {
        for (int v = 0; v < bond_dim_; ++v) {
          a(u, v) = params[param_index(r, s, u, v)];
        }
      }
    }
  }
}

bool MpoAnsatz::is_finite() const {
  for (const Matrix& a : tensors_) {
    if (!a.allFinite()) return false;
  }
  return true;
}

void MpoAnsatz::scale(Complex factor) {
  for (Matrix& a : tensors_) a *= factor;
}

void validate_configuration(const MpoAnsatz& ansatz, const SpinConfiguration& x) {
  if (static_cast<int>(x.size()) != ansatz.n_sites()) {
    throw InvalidInputError("configuration length does not match site count");
  }
  for (int xi : x) {
    if (xi < 0 || xi >= ansatz.vec_dim()) {
      throw InvalidInputError("configuration entry out of range");
    }
  }
}

Complex amplitude(const MpoAnsatz& ansatz, const SpinConfiguration& x) {
  validate_configuration(ansatz, x);
  const int n = ansatz.n_sites();
  Matrix prod = ansatz.site_tensor(1, x[0]);
  Matrix tmp(ansatz.bond_dim(), ansatz.bond_dim());
  for (int j = 2; j <= n; ++j) {
    tmp.noalias() = prod * ansatz.site_tensor(j, x[j - 1]);
    prod.swap(tmp);
  }
  return prod.trace();
}

PartialProducts partial_products(const MpoAnsatz& ansatz, const SpinConfiguration& x) {
  validate_configuration(ansatz, x);
  const int n = ansatz.n_sites();
  const int chi = ansatz.bond_dim();
  PartialProducts pp;
  pp.left.resize(n + 1);
  pp.right.resize(n + 2);
  pp.left[0] = Matrix::Identity(chi, chi);
  for (int j = 1; j <= n; ++j) {
    pp.left[j].noalias() = pp.left[j - 1] * ansatz.site_tensor(j, x[j - 1]);
  }
  pp.right[n + 1] = Matrix::Identity(chi, chi);
  for (int j = n; j >= 1; --j) {
    pp.right[j].noalias() = ansatz.site_tensor(j, x[j - 1]) * pp.right[j + 1];
  }
  pp.right[0] = pp.right[1];
  return pp;
}

LogDerivative log_derivative(const MpoAnsatz& ansatz, const SpinConfiguration& x,
                             const PartialProducts& pp) {
  validate_configuration(ansatz, x);
  const int n = ansatz.n_sites();
  const int chi = ansatz.bond_dim();
  const Complex amp = pp.left[n].trace();
  if (std::abs(amp) < kAmplitudeFloor) {
    throw DegenerateAmplitudeError("log_derivative: amplitude underflow");
  }
  LogDerivative ld;
  ld.delta = Vector::Zero(ansatz.n_params());
  Matrix g(chi, chi);
  const Complex inv_amp = 1.0 / amp;
  for (int j = 1; j <= n; ++j) {
    g.noalias() = pp.right[j + 1] * pp.left[j - 1];
    const int r = ansatz.cell_index(j);
    const int s = x[j - 1];
    const long base = ansatz.param_index(r, s, 0, 0);
    for (int u = 0; u < chi; ++u) {
      for (int v = 0; v < chi; ++v) {
        // [R_{j+1} L_{j-1}]_{vu} contributes to Delta_{uv}.
        ld.delta[base + static_cast<long>(u) * chi + v] += inv_amp * g(v, u);
      }
    }
  }
  return ld;
}

Complex trace_of_rho(const MpoAnsatz& ansatz) {
  const int n = ansatz.n_sites();
  const int d = ansatz.phys_dim();
  const int chi = ansatz.bond_dim();
  // Per-cell physical trace: T_r = sum_sigma A_r^{(sigma,sigma)}.
  std::vector<Matrix> traced(ansatz.period(), Matrix::Zero(chi, chi));
  for (int r = 0; r < ansatz.period(); ++r) {
    for (int sigma = 0; sigma < d; ++sigma) {
      traced[r] += ansatz.tensor(r, sigma * d + sigma);
    }
  }
  Matrix prod = traced[ansatz.cell_index(1)];
  Matrix tmp(chi, chi);
  for (int j = 2; j <= n; ++j) {
    tmp.noalias() = prod * traced[ansatz.cell_index(j)];
    prod.swap(tmp);
  }
  return prod.trace();
}

void renormalize_trace(MpoAnsatz& ansatz) {
  const Complex tr = trace_of_rho(ansatz);
  if (std::abs(tr) < kAmplitudeFloor) {
    throw DegenerateTraceError("renormalize_trace: trace magnitude underflow");
  }
  // Principal N-th root of 1/tr.
  const Complex factor = std::exp(-std::log(tr) / static_cast<double>(ansatz.n_sites()));
  ansatz.scale(factor);
}

namespace {

void enumerate_dense(const MpoAnsatz& ansatz, int site, const Matrix& prefix,
                     long row, long col, Matrix& out) {
  const int d = ansatz.phys_dim();
  const int n = ansatz.n_sites();
  for (int sigma = 0; sigma < d; ++sigma) {
    for (int sigmap = 0; sigmap < d; ++sigmap) {
      const Matrix next = prefix * ansatz.site_tensor(site, sigma * d + sigmap);
      const long r = row * d + sigma;
      const long c = col * d + sigmap;
      if (site == n) {
        out(r, c) = next.trace();
      } else {
        enumerate_dense(ansatz, site + 1, next, r, c, out);
      }
    }
  }
}

}  // namespace

Matrix reconstruct_dense(const MpoAnsatz& ansatz) {
  if (ansatz.n_sites() > 10) {
    throw CapacityError("reconstruct_dense: N > 10");
  }
  const long dim = static_cast<long>(std::pow(ansatz.phys_dim(), ansatz.n_sites()));
  Matrix out(dim, dim);
  enumerate_dense(ansatz, 1, Matrix::Identity(ansatz.bond_dim(), ansatz.bond_dim()),
                  0, 0, out);
  return out;
}

namespace {

constexpr char kCheckpointMagic[8] = {'T', 'V', 'M', 'P', 'O', 'C', 'K', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  write_u64(os, bits);
}

double read_f64(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace

void save_checkpoint(const MpoAnsatz& ansatz, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInputError("save_checkpoint: cannot open " + path);
  os.write(kCheckpointMagic, 8);
  write_u64(os, static_cast<std::uint64_t>(ansatz.n_sites()));
  write_u64(os, static_cast<std::uint64_t>(ansatz.period()));
  write_u64(os, static_cast<std::uint64_t>(ansatz.phys_dim()));
  write_u64(os, static_cast<std::uint64_t>(ansatz.bond_dim()));
  for (int r = 0; r < ansatz.period(); ++r) {
    for (int s = 0; s < ansatz.vec_dim(); ++s) {
      const Matrix& a = ansatz.tensor(r, s);
      for (int u = 0; u < ansatz.bond_dim(); ++u) {
        for (int v = 0; v < ansatz.bond_dim(); ++v) {
          write_f64(os, a(u, v).real());
          write_f64(os, a(u, v).imag());
        }
      }
    }
  }
  if (!os) throw NumericalError("save_checkpoint: write failure on " + path);
}

MpoAnsatz load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInputError("load_checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw InvalidInputError("load_checkpoint: bad magic in " + path);
  }
  const int n = static_cast<int>(read_u64(is));
  const int period = static_cast<int>(read_u64(is));
  const int d = static_cast<int>(read_u64(is));
  const int chi = static_cast<int>(read_u64(is));
  MpoAnsatz ansatz(n, period, d, chi);
  for (int r = 0; r < period; ++r) {
    for (int s = 0; s < ansatz.vec_dim(); ++s) {
      Matrix& a = ansatz.tensor(r, s);
      for (int u = 0; u < chi; ++u) {
        for (int v = 0; v < chi; ++v) {
          const double re = read_f64(is);
          const double im = read_f64(is);
          a(u, v) = Complex(re, im);
        }
      }
    }
  }
  if (!is) throw InvalidInputError("load_checkpoint: truncated file " + path);
  return ansatz;
}

}  // namespace tvmpo
