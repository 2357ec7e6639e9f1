// master_equation.hpp - vectorized generators of the reduced dynamics.
//
// Density matrices are vectorized in the Hamiltonian eigenbasis with all
// diagonal elements first, followed by the off-diagonal elements (n, m), n != m,
// in row-major order. With this ordering the full secular approximation is a
// literal block operation on the generator.

#pragma once

#include "dualprobe/model.hpp"

#include <utility>
#include <vector>

namespace dualprobe {

enum class SecularMode { None, Full };

struct DecoherenceRates {
  double gamma_1{0.0};    // TLS relaxation rate
  double gamma_phi{0.0};  // TLS pure dephasing rate

  void validate() const;
};

/// Gamma_1 = v_perp^2 C(2 omega_q), Gamma_phi = v_par^2 C(0).
DecoherenceRates rates_from_coupling(const BathCoupling& bath);

/// A bath with the given rates: v_perp = sqrt(Gamma_1), v_par = sqrt(Gamma_phi)
/// and a unit flat spectrum.
BathCoupling coupling_from_rates(const DecoherenceRates& rates);

using ElementIndex = std::pair<Eigen::Index, Eigen::Index>;

/// (n, m) element behind each vector slot for Hilbert dimension d.
std::vector<ElementIndex> vectorization_order(Eigen::Index d);

class Superoperator {
 public:
  Superoperator(EigenSystem basis, Eigen::MatrixXcd generator);

  const Eigen::MatrixXcd& matrix() const { return generator_; }
  const EigenSystem& basis() const { return basis_; }
  Eigen::Index hilbert_dim() const { return basis_.dim(); }

  /// Lab-basis density matrix to the eigenbasis vector used by matrix().
  Eigen::VectorXcd vectorize(const DensityMatrix& rho) const;
  /// Inverse of vectorize, returning a lab-basis density matrix.
  DensityMatrix devectorize(const Eigen::VectorXcd& v) const;

  /// Row vector t with t * vectorize(rho) = Tr(rho).
  Eigen::RowVectorXcd trace_functional() const;

  /// Frequency E_n - E_m of each slot.
  Eigen::VectorXd slot_frequencies() const;

 private:
  EigenSystem basis_;
  Eigen::MatrixXcd generator_;
  std::vector<ElementIndex> order_;
};

/// Zeroes population/coherence couplings and couplings between coherences of
/// different frequency. Couplings between equal-frequency coherences remain.
Eigen::MatrixXcd apply_full_secular(const Eigen::MatrixXcd& generator, const EigenSystem& eig);

/// Bloch-Redfield generator. `coupling_eig` is the TLS-bath coupling operator
/// already expressed in the eigenbasis of `eig`. The spectral function is
/// evaluated by excitation-sector bookkeeping: transitions inside a sector see
/// c_zero, emission into the next lower sector sees c_split, and everything
/// else (absorption) sees zero.
Superoperator build_redfield_tensor(const EigenSystem& eig, const Operator& coupling_eig,
                                    const SpectralFunction& spectral, SecularMode mode);

/// Convenience wrapper building the eigensystem and coupling operator.
Superoperator redfield_generator(const SystemParams& params, const BathCoupling& bath,
                                 const StateSpace& space, SecularMode mode);

/// Lindblad generator with TLS jump operators sqrt(Gamma_1) sigma_minus and
/// sqrt(Gamma_phi) sigma_z, written in the basis of `eig`.
Superoperator build_lindblad_generator(const EigenSystem& eig, const DecoherenceRates& rates,
                                       SecularMode mode = SecularMode::None);

Superoperator lindblad_generator(const SystemParams& params, const DecoherenceRates& rates,
                                 const StateSpace& space, SecularMode mode = SecularMode::None);

}  // namespace dualprobe
