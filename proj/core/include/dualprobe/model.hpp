// model.hpp - system parameters, Hamiltonians, eigensystems and reductions for
// two probe qubits coupled to one environmental TLS.
//
// All frequencies and rates are angular and expressed in units of the total
// coupling g = sqrt(g1^2 + g2^2) unless a caller chooses otherwise; nothing in
// the library assumes g = 1.

#pragma once

#include "dualprobe/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dualprobe {

struct SystemParams {
  double omega_q{1000.0};  // qubit half level splitting
  double delta{0.0};       // TLS detuning (TLS half splitting is omega_q + delta)
  double g1{0.0};          // Q1-TLS transversal coupling
  double g2{0.0};          // Q2-TLS transversal coupling

  double g() const;

  /// Throws std::invalid_argument on non-finite values, negative couplings or
  /// omega_q <= 0.
  void validate() const;

  /// omega_q >= 100 * max(|delta|, g): the single-excitation picture applies.
  bool in_validity_regime() const;
};

/// Flat two-point bath spectrum: C(omega) = c_zero for transitions inside an
/// excitation sector, c_split for emission across sectors (omega near +2 omega_q)
/// and 0 for absorption (low-temperature bath).
struct SpectralFunction {
  double c_zero{0.0};
  double c_split{0.0};

  void validate() const;
};

struct BathCoupling {
  double v_perp{0.0};
  double v_par{0.0};
  SpectralFunction spectral{};

  void validate() const;
};

/// 8x8 Hamiltonian on |Q1,Q2,TLS>.
Operator build_hamiltonian(const SystemParams& params);

/// 4x4 Hamiltonian on |Q1,TLS>; params.g2 is ignored.
Operator build_single_qubit_hamiltonian(const SystemParams& params);

/// Hamiltonian expressed in `space` (ThreeSpin, its single-excitation
/// projection, or the single-probe QubitTls space).
Operator hamiltonian_in(const SystemParams& params, const StateSpace& space);

/// TLS-bath coupling operator v_perp sigma_x^TLS + v_par sigma_z^TLS in `space`.
Operator tls_coupling_operator(const BathCoupling& bath, const StateSpace& space);

struct EigenSystem {
  StateSpace space{SpaceKind::ThreeSpin};
  Eigen::VectorXd energies;  // grouped by sector, ascending inside each sector
  Eigen::MatrixXcd vectors;  // orthonormal columns
  std::vector<int> sectors;  // excitation number per eigenvector, -1 if mixed

  Eigen::Index dim() const { return energies.size(); }

  /// Operator expressed in the eigenbasis, V^dagger op V.
  Operator to_eigenbasis(const Operator& op) const;
  Operator from_eigenbasis(const Operator& op) const;
};

/// Diagonalizes a Hermitian operator on `space`. If the operator conserves the
/// excitation number, each sector is diagonalized separately and the sector
/// labels are exact; otherwise a dense diagonalization is used and labels are
/// -1. When `params` is given, degenerate eigenspaces are resolved by aligning
/// with the analytic eigenstates from analytic_eigenstates.
EigenSystem eigensystem(const Operator& h, const StateSpace& space,
                        const std::optional<SystemParams>& params = std::nullopt);

/// Convenience: eigensystem of hamiltonian_in(params, space) with alignment.
EigenSystem eigensystem(const SystemParams& params, const StateSpace& space);

struct LabeledState {
  int label;  // 1..8 following the energy-diagram numbering
  Eigen::VectorXcd vector;  // unnormalized
};

/// Closed-form (unnormalized) eigenstates of the chain Hamiltonian in `space`.
/// ThreeSpin returns |1>..|8>; SingleExcitation returns |1>..|4>; QubitTls
/// returns the four independent single-probe states |1>,|2>,|4>,|8> (g2 = 0).
/// Vectors of zero norm (degenerate parameter points) are returned as-is.
std::vector<LabeledState> analytic_eigenstates(const SystemParams& params, const StateSpace& space);

/// Projection of an 8x8 operator or density matrix onto the single-excitation
/// subspace (ground state plus one excitation).
Operator restrict_single_excitation(const Operator& op);
Eigen::VectorXcd restrict_single_excitation(const Eigen::VectorXcd& state);

/// Inverse of restrict_single_excitation: zero-padded 8x8 operator.
Operator embed_single_excitation(const Operator& op);

/// Trace over every site not listed in `keep`. The kept sites appear in
/// Q1, Q2, TLS order. States on SingleExcitation are embedded first.
DensityMatrix partial_trace(const DensityMatrix& rho, const StateSpace& space,
                            std::vector<Site> keep);

}  // namespace dualprobe
