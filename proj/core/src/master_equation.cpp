#include "dualprobe/master_equation.hpp"

#include <cmath>
#include <stdexcept>

namespace dualprobe {

void DecoherenceRates::validate() const {
  if (!std::isfinite(gamma_1) || !std::isfinite(gamma_phi)) {
    throw std::invalid_argument("decoherence rates must be finite");
  }
  if (gamma_1 < 0.0 || gamma_phi < 0.0) throw std::invalid_argument("decoherence rates must be nonnegative");
}

DecoherenceRates rates_from_coupling(const BathCoupling& bath) {
  bath.validate();
  return {bath.v_perp * bath.v_perp * bath.spectral.c_split, bath.v_par * bath.v_par * bath.spectral.c_zero};
}

BathCoupling coupling_from_rates(const DecoherenceRates& rates) {
  rates.validate();
  return {std::sqrt(rates.gamma_1), std::sqrt(rates.gamma_phi), SpectralFunction{1.0, 1.0}};
}

std::vector<ElementIndex> vectorization_order(Eigen::Index d) {
  std::vector<ElementIndex> order;
  order.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index n = 0; n < d; ++n) order.emplace_back(n, n);
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m < d; ++m) {
      if (n != m) order.emplace_back(n, m);
    }
  }
  return order;
}

Superoperator::Superoperator(EigenSystem basis, Eigen::MatrixXcd generator)
    : basis_(std::move(basis)), generator_(std::move(generator)), order_(vectorization_order(basis_.dim())) {
  const Eigen::Index n = basis_.dim() * basis_.dim();
  if (generator_.rows() != n || generator_.cols() != n) {
    throw std::invalid_argument("generator size does not match the basis");
  }
}

Eigen::VectorXcd Superoperator::vectorize(const DensityMatrix& rho) const {
  const DensityMatrix r = basis_.to_eigenbasis(rho);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(order_.size()));
  for (std::size_t i = 0; i < order_.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = r(order_[i].first, order_[i].second);
  }
  return v;
}

DensityMatrix Superoperator::devectorize(const Eigen::VectorXcd& v) const {
  if (v.size() != static_cast<Eigen::Index>(order_.size())) throw std::invalid_argument("vector size mismatch");
  DensityMatrix r(basis_.dim(), basis_.dim());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    r(order_[i].first, order_[i].second) = v(static_cast<Eigen::Index>(i));
  }
  return basis_.from_eigenbasis(r);
}

Eigen::RowVectorXcd Superoperator::trace_functional() const {
  Eigen::RowVectorXcd t = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(order_.size()));
  t.head(basis_.dim()).setOnes();
  return t;
}

Eigen::VectorXd Superoperator::slot_frequencies() const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(order_.size()));
  for (std::size_t i = 0; i < order_.size(); ++i) {
    f(static_cast<Eigen::Index>(i)) = basis_.energies(order_[i].first) - basis_.energies(order_[i].second);
  }
  return f;
}

Eigen::MatrixXcd apply_full_secular(const Eigen::MatrixXcd& generator, const EigenSystem& eig) {
  const Eigen::Index d = eig.dim();
  const auto order = vectorization_order(d);
  if (generator.rows() != d * d || generator.cols() != d * d) {
    throw std::invalid_argument("generator size does not match the basis");
  }
  auto freq = [&](Eigen::Index i) {
    const auto [n, m] = order[static_cast<std::size_t>(i)];
    return eig.energies(n) - eig.energies(m);
  };
  const double tol = 1e-9 * std::max(1.0, eig.energies.cwiseAbs().maxCoeff());
  Eigen::MatrixXcd out = generator;
  for (Eigen::Index i = 0; i < d * d; ++i) {
    for (Eigen::Index j = 0; j < d * d; ++j) {
      if (i == j) continue;
      const bool pop_i = i < d;
      const bool pop_j = j < d;
      if (pop_i && pop_j) continue;
      if (pop_i != pop_j || std::abs(freq(i) - freq(j)) > tol) out(i, j) = 0.0;
    }
  }
  return out;
}

Superoperator build_redfield_tensor(const EigenSystem& eig, const Operator& coupling_eig,
                                    const SpectralFunction& spectral, SecularMode mode) {
  spectral.validate();
  const Eigen::Index d = eig.dim();
  if (coupling_eig.rows() != d || coupling_eig.cols() != d) {
    throw std::invalid_argument("coupling operator dimension mismatch");
  }
  for (int s : eig.sectors) {
    if (s < 0) throw std::invalid_argument("Redfield construction needs excitation-sector labels");
  }

  // C(E_a - E_b) from the sector difference.
  Eigen::MatrixXd c(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      const int diff = eig.sectors[static_cast<std::size_t>(a)] - eig.sectors[static_cast<std::size_t>(b)];
      c(a, b) = diff == 0 ? spectral.c_zero : diff == 1 ? spectral.c_split : 0.0;
    }
  }
  const Operator& s = coupling_eig;
  // Lambda_{nmab} = s_nm s_ab C(E_b - E_a)/2 and its partner with C(E_a - E_b)/2.
  auto lambda = [&](Eigen::Index n, Eigen::Index m, Eigen::Index a, Eigen::Index b) {
    return s(n, m) * s(a, b) * 0.5 * c(b, a);
  };
  auto lambda_t = [&](Eigen::Index n, Eigen::Index m, Eigen::Index a, Eigen::Index b) {
    return s(n, m) * s(a, b) * 0.5 * c(a, b);
  };

  // Contractions that only depend on two indices.
  Eigen::MatrixXcd sum_l = Eigen::MatrixXcd::Zero(d, d);   // sum_k Lambda_{n k k a}
  Eigen::MatrixXcd sum_lt = Eigen::MatrixXcd::Zero(d, d);  // sum_k Lambda~_{k m b k}
  for (Eigen::Index x = 0; x < d; ++x) {
    for (Eigen::Index y = 0; y < d; ++y) {
      for (Eigen::Index k = 0; k < d; ++k) {
        sum_l(x, y) += lambda(x, k, k, y);
        sum_lt(x, y) += lambda_t(k, x, y, k);
      }
    }
  }

  const auto order = vectorization_order(d);
  const auto n_slots = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n_slots, n_slots);
  for (Eigen::Index i = 0; i < n_slots; ++i) {
    const auto [n, m] = order[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n_slots; ++j) {
      const auto [a, b] = order[static_cast<std::size_t>(j)];
      Complex v = lambda(b, m, n, a) + lambda_t(n, a, b, m);
      if (m == b) v -= sum_l(n, a);
      if (n == a) v -= sum_lt(m, b);
      r(i, j) = v;
    }
    r(i, i) -= Complex(0.0, eig.energies(n) - eig.energies(m));
  }
  if (mode == SecularMode::Full) r = apply_full_secular(r, eig);
  return Superoperator(eig, std::move(r));
}

Superoperator redfield_generator(const SystemParams& params, const BathCoupling& bath,
                                 const StateSpace& space, SecularMode mode) {
  const EigenSystem eig = eigensystem(params, space);
  const Operator coupling = eig.to_eigenbasis(tls_coupling_operator(bath, space));
  return build_redfield_tensor(eig, coupling, bath.spectral, mode);
}

Superoperator build_lindblad_generator(const EigenSystem& eig, const DecoherenceRates& rates, SecularMode mode) {
  rates.validate();
  const Eigen::Index d = eig.dim();
  const Operator h = eig.energies.cast<Complex>().asDiagonal();
  std::vector<Operator> jumps;
  if (rates.gamma_1 > 0.0) {
    jumps.push_back(std::sqrt(rates.gamma_1) * eig.to_eigenbasis(eig.space.site_operator(Site::Tls, pauli::lowering())));
  }
  if (rates.gamma_phi > 0.0) {
    jumps.push_back(std::sqrt(rates.gamma_phi) * eig.to_eigenbasis(eig.space.site_operator(Site::Tls, pauli::z())));
  }
  std::vector<Operator> anti;
  for (const auto& l : jumps) anti.push_back(l.adjoint() * l);

  // Column j is the image of the basis matrix behind slot j.
  const auto order = vectorization_order(d);
  const auto n_slots = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXcd gen(n_slots, n_slots);
  for (Eigen::Index j = 0; j < n_slots; ++j) {
    Operator x = Operator::Zero(d, d);
    x(order[static_cast<std::size_t>(j)].first, order[static_cast<std::size_t>(j)].second) = 1.0;
    Operator y = Complex(0.0, -1.0) * (h * x - x * h);
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      y += jumps[k] * x * jumps[k].adjoint() - 0.5 * (anti[k] * x + x * anti[k]);
    }
    for (Eigen::Index i = 0; i < n_slots; ++i) {
      gen(i, j) = y(order[static_cast<std::size_t>(i)].first, order[static_cast<std::size_t>(i)].second);
    }
  }
  if (mode == SecularMode::Full) gen = apply_full_secular(gen, eig);
  return Superoperator(eig, std::move(gen));
}

Superoperator lindblad_generator(const SystemParams& params, const DecoherenceRates& rates,
                                 const StateSpace& space, SecularMode mode) {
  return build_lindblad_generator(eigensystem(params, space), rates, mode);
}

}  // namespace dualprobe
