// operators.hpp - Pauli algebra and state-space bookkeeping for the qubit/TLS chain.
//
// Basis convention (shared by every module): product states |Q1,Q2,TLS>, each
// spin ordered up (index 0) before down (index 1). The flat index of a product
// state is 4*b_Q1 + 2*b_Q2 + b_TLS with b = 0 for up and b = 1 for down, so
// |up,down,down> is index 3 and |down,down,down> is index 7.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace dualprobe {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

enum class Site { Q1, Q2, Tls };

std::string_view to_string(Site site);

namespace pauli {
Operator identity();
Operator x();
Operator y();
Operator z();
Operator lowering();  // |down><up|
Operator raising();   // |up><down|
}  // namespace pauli

Operator kron(const Operator& a, const Operator& b);
Operator kron(std::initializer_list<Operator> factors);

/// Hilbert spaces used by the engine.
///
/// ThreeSpin is the full 8-dim |Q1,Q2,TLS> space. SingleExcitation is its
/// projection onto {|ddd>, |udd>, |dud>, |ddu>} (ground plus one excitation),
/// in that order. QubitTls is the 4-dim |Q1,TLS> space of the single-probe
/// model, ordered like ThreeSpin with Q2 removed.
enum class SpaceKind { ThreeSpin, SingleExcitation, QubitTls };

class StateSpace {
 public:
  explicit StateSpace(SpaceKind kind) : kind_(kind) {}

  static StateSpace three_spin() { return StateSpace(SpaceKind::ThreeSpin); }
  static StateSpace single_excitation() { return StateSpace(SpaceKind::SingleExcitation); }
  static StateSpace qubit_tls() { return StateSpace(SpaceKind::QubitTls); }

  SpaceKind kind() const { return kind_; }
  Eigen::Index dim() const;

  /// Number of excited spins in basis state `index`.
  int excitation(Eigen::Index index) const;
  int max_excitation() const;

  bool has_site(Site site) const;

  /// Single-site operator embedded in this space. For SingleExcitation the
  /// full-space operator is projected, which is exact for diagonal operators
  /// and for the TLS coupling operators used by the bath.
  Operator site_operator(Site site, const Operator& op) const;

  /// sigma_z of a site; a site absent from the space (Q2 in QubitTls) reads as
  /// its ground state, i.e. -identity.
  Operator sigma_z(Site site) const;

  /// Basis index of the product state with the listed sites excited.
  Eigen::Index product_state(std::initializer_list<Site> excited) const;

  /// Density matrix |i><i| for the product state with the listed sites excited.
  DensityMatrix pure_product_state(std::initializer_list<Site> excited) const;

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  SpaceKind kind_;
};

/// Full-space indices of the SingleExcitation basis, in order.
const std::vector<Eigen::Index>& single_excitation_indices();

/// 8x4 isometry whose columns are the SingleExcitation basis states.
Eigen::MatrixXd single_excitation_isometry();

bool is_hermitian(const Operator& op, double tol = 1e-12);

}  // namespace dualprobe
