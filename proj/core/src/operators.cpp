#include "dualprobe/operators.hpp"

#include <stdexcept>
#include <string>

namespace dualprobe {

std::string_view to_string(Site site) {
  switch (site) {
    case Site::Q1:
      return "Q1";
    case Site::Q2:
      return "Q2";
    case Site::Tls:
      return "TLS";
  }
  return "?";
}

namespace pauli {

Operator identity() { return Operator::Identity(2, 2); }

Operator x() {
  Operator m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Operator y() {
  Operator m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Operator z() {
  Operator m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Operator lowering() {
  Operator m = Operator::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

Operator raising() { return lowering().adjoint(); }

}  // namespace pauli

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator kron(std::initializer_list<Operator> factors) {
  Operator out = Operator::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

const std::vector<Eigen::Index>& single_excitation_indices() {
  // |ddd>, |udd>, |dud>, |ddu>
  static const std::vector<Eigen::Index> indices{7, 3, 5, 6};
  return indices;
}

Eigen::MatrixXd single_excitation_isometry() {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(8, 4);
  const auto& idx = single_excitation_indices();
  for (Eigen::Index j = 0; j < 4; ++j) p(idx[static_cast<std::size_t>(j)], j) = 1.0;
  return p;
}

namespace {

int count_up_bits(Eigen::Index index, int n_spins) {
  int up = 0;
  for (int s = 0; s < n_spins; ++s) {
    if (((index >> s) & 1) == 0) ++up;
  }
  return up;
}

Operator three_spin_site_operator(Site site, const Operator& op) {
  const Operator id = pauli::identity();
  switch (site) {
    case Site::Q1:
      return kron({op, id, id});
    case Site::Q2:
      return kron({id, op, id});
    case Site::Tls:
      return kron({id, id, op});
  }
  throw std::logic_error("unknown site");
}

}  // namespace

Eigen::Index StateSpace::dim() const { return kind_ == SpaceKind::ThreeSpin ? 8 : 4; }

int StateSpace::excitation(Eigen::Index index) const {
  if (index < 0 || index >= dim()) throw std::out_of_range("basis index out of range");
  switch (kind_) {
    case SpaceKind::ThreeSpin:
      return count_up_bits(index, 3);
    case SpaceKind::SingleExcitation:
      return index == 0 ? 0 : 1;
    case SpaceKind::QubitTls:
      return count_up_bits(index, 2);
  }
  return 0;
}

int StateSpace::max_excitation() const {
  switch (kind_) {
    case SpaceKind::ThreeSpin:
      return 3;
    case SpaceKind::SingleExcitation:
      return 1;
    case SpaceKind::QubitTls:
      return 2;
  }
  return 0;
}

bool StateSpace::has_site(Site site) const {
  return !(kind_ == SpaceKind::QubitTls && site == Site::Q2);
}

Operator StateSpace::site_operator(Site site, const Operator& op) const {
  if (op.rows() != 2 || op.cols() != 2) throw std::invalid_argument("site operator must be 2x2");
  switch (kind_) {
    case SpaceKind::ThreeSpin:
      return three_spin_site_operator(site, op);
    case SpaceKind::SingleExcitation: {
      const Eigen::MatrixXcd p = single_excitation_isometry().cast<Complex>();
      return p.transpose() * three_spin_site_operator(site, op) * p;
    }
    case SpaceKind::QubitTls: {
      const Operator id = pauli::identity();
      if (site == Site::Q1) return kron(op, id);
      if (site == Site::Tls) return kron(id, op);
      throw std::invalid_argument("Q2 does not exist in the single-probe space");
    }
  }
  throw std::logic_error("unknown space");
}

Operator StateSpace::sigma_z(Site site) const {
  if (!has_site(site)) return -Operator::Identity(dim(), dim());
  return site_operator(site, pauli::z());
}

Eigen::Index StateSpace::product_state(std::initializer_list<Site> excited) const {
  int b_q1 = 1, b_q2 = 1, b_tls = 1;
  for (Site s : excited) {
    if (!has_site(s)) throw std::invalid_argument("site not present in this space");
    (s == Site::Q1 ? b_q1 : s == Site::Q2 ? b_q2 : b_tls) = 0;
  }
  switch (kind_) {
    case SpaceKind::ThreeSpin:
      return 4 * b_q1 + 2 * b_q2 + b_tls;
    case SpaceKind::QubitTls:
      return 2 * b_q1 + b_tls;
    case SpaceKind::SingleExcitation: {
      const Eigen::Index full = 4 * b_q1 + 2 * b_q2 + b_tls;
      const auto& idx = single_excitation_indices();
      for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] == full) return static_cast<Eigen::Index>(j);
      }
      throw std::invalid_argument("state lies outside the single-excitation subspace");
    }
  }
  throw std::logic_error("unknown space");
}

DensityMatrix StateSpace::pure_product_state(std::initializer_list<Site> excited) const {
  DensityMatrix rho = DensityMatrix::Zero(dim(), dim());
  const Eigen::Index i = product_state(excited);
  rho(i, i) = 1.0;
  return rho;
}

bool is_hermitian(const Operator& op, double tol) {
  if (op.rows() != op.cols()) return false;
  const double scale = std::max(1.0, op.cwiseAbs().maxCoeff());
  return (op - op.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace dualprobe
