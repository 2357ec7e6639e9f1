#include "dualprobe/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dualprobe {

double SystemParams::g() const { return std::hypot(g1, g2); }

void SystemParams::validate() const {
  if (!std::isfinite(omega_q) || !std::isfinite(delta) || !std::isfinite(g1) || !std::isfinite(g2)) {
    throw std::invalid_argument("system parameters must be finite");
  }
  if (omega_q <= 0.0) throw std::invalid_argument("omega_q must be positive");
  if (g1 < 0.0 || g2 < 0.0) throw std::invalid_argument("couplings g1, g2 must be nonnegative");
}

bool SystemParams::in_validity_regime() const {
  return omega_q >= 100.0 * std::max(std::abs(delta), g());
}

void SpectralFunction::validate() const {
  if (!std::isfinite(c_zero) || !std::isfinite(c_split)) {
    throw std::invalid_argument("spectral function values must be finite");
  }
  if (c_zero < 0.0 || c_split < 0.0) {
    throw std::invalid_argument("spectral function values must be nonnegative");
  }
}

void BathCoupling::validate() const {
  if (!std::isfinite(v_perp) || !std::isfinite(v_par)) {
    throw std::invalid_argument("bath couplings must be finite");
  }
  if (v_perp < 0.0 || v_par < 0.0) throw std::invalid_argument("bath couplings must be nonnegative");
  spectral.validate();
}

Operator build_hamiltonian(const SystemParams& params) {
  params.validate();
  const auto space = StateSpace::three_spin();
  const auto op = [&](Site s, const Operator& p) { return space.site_operator(s, p); };
  const Operator x = pauli::x();
  const Operator y = pauli::y();
  const Operator z = pauli::z();
  Operator h = params.omega_q * op(Site::Q1, z) + params.omega_q * op(Site::Q2, z) +
               (params.omega_q + params.delta) * op(Site::Tls, z);
  h += params.g1 * (op(Site::Q1, x) * op(Site::Tls, x) + op(Site::Q1, y) * op(Site::Tls, y));
  h += params.g2 * (op(Site::Q2, x) * op(Site::Tls, x) + op(Site::Q2, y) * op(Site::Tls, y));
  return h;
}

Operator build_single_qubit_hamiltonian(const SystemParams& params) {
  params.validate();
  const auto space = StateSpace::qubit_tls();
  const auto op = [&](Site s, const Operator& p) { return space.site_operator(s, p); };
  Operator h = params.omega_q * op(Site::Q1, pauli::z()) +
               (params.omega_q + params.delta) * op(Site::Tls, pauli::z());
  h += params.g1 * (op(Site::Q1, pauli::x()) * op(Site::Tls, pauli::x()) +
                    op(Site::Q1, pauli::y()) * op(Site::Tls, pauli::y()));
  return h;
}

Operator hamiltonian_in(const SystemParams& params, const StateSpace& space) {
  switch (space.kind()) {
    case SpaceKind::ThreeSpin:
      return build_hamiltonian(params);
    case SpaceKind::SingleExcitation:
      return restrict_single_excitation(build_hamiltonian(params));
    case SpaceKind::QubitTls:
      return build_single_qubit_hamiltonian(params);
  }
  throw std::logic_error("unknown space");
}

Operator tls_coupling_operator(const BathCoupling& bath, const StateSpace& space) {
  bath.validate();
  return bath.v_perp * space.site_operator(Site::Tls, pauli::x()) +
         bath.v_par * space.site_operator(Site::Tls, pauli::z());
}

Operator EigenSystem::to_eigenbasis(const Operator& op) const {
  if (op.rows() != dim() || op.cols() != dim()) throw std::invalid_argument("dimension mismatch");
  return vectors.adjoint() * op * vectors;
}

Operator EigenSystem::from_eigenbasis(const Operator& op) const {
  if (op.rows() != dim() || op.cols() != dim()) throw std::invalid_argument("dimension mismatch");
  return vectors * op * vectors.adjoint();
}

namespace {

bool conserves_excitation(const Operator& h, const StateSpace& space) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      if (space.excitation(i) != space.excitation(j) && std::abs(h(i, j)) > 1e-12 * scale) return false;
    }
  }
  return true;
}

// Replaces the columns of `block` spanning a degenerate cluster by the
// projections of `candidates` onto that cluster, Gram-Schmidt orthonormalized.
void align_cluster(Eigen::MatrixXcd& vectors, Eigen::Index first, Eigen::Index count,
                   const std::vector<Eigen::VectorXcd>& candidates) {
  const Eigen::MatrixXcd cluster = vectors.middleCols(first, count);
  const Eigen::MatrixXcd projector = cluster * cluster.adjoint();
  std::vector<Eigen::VectorXcd> chosen;
  for (const auto& c : candidates) {
    if (static_cast<Eigen::Index>(chosen.size()) == count) break;
    Eigen::VectorXcd v = projector * c;
    for (const auto& u : chosen) v -= u.dot(v) * u;
    const double n = v.norm();
    if (n > 1e-6 * std::max(1.0, c.norm())) chosen.push_back(v / n);
  }
  if (static_cast<Eigen::Index>(chosen.size()) != count) return;
  for (Eigen::Index k = 0; k < count; ++k) vectors.col(first + k) = chosen[static_cast<std::size_t>(k)];
}

std::vector<Eigen::VectorXcd> alignment_candidates(const std::optional<SystemParams>& params,
                                                   const StateSpace& space, int sector) {
  std::vector<Eigen::VectorXcd> out;
  if (params) {
    for (auto& s : analytic_eigenstates(*params, space)) {
      const double n = s.vector.norm();
      if (n > 1e-12) out.push_back(s.vector / n);
    }
  }
  for (Eigen::Index i = 0; i < space.dim(); ++i) {
    if (space.excitation(i) == sector) out.push_back(Eigen::VectorXcd::Unit(space.dim(), i));
  }
  return out;
}

// Makes the largest-magnitude entry of each column real and positive so the
// eigenbasis does not depend on solver internals.
void fix_phases(Eigen::MatrixXcd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index imax = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&imax);
    const Complex pivot = vectors(imax, k);
    if (std::abs(pivot) > 0.0) vectors.col(k) *= std::conj(pivot) / std::abs(pivot);
  }
}

}  // namespace

EigenSystem eigensystem(const Operator& h, const StateSpace& space,
                        const std::optional<SystemParams>& params) {
  if (h.rows() != space.dim() || h.cols() != space.dim()) {
    throw std::invalid_argument("operator dimension does not match the state space");
  }
  if (!h.allFinite()) throw std::invalid_argument("operator has non-finite entries");
  if (!is_hermitian(h)) throw std::invalid_argument("eigensystem requires a Hermitian operator");

  const Eigen::Index d = space.dim();
  EigenSystem out;
  out.space = space;
  out.energies.resize(d);
  out.vectors = Eigen::MatrixXcd::Zero(d, d);
  out.sectors.assign(static_cast<std::size_t>(d), -1);

  if (!conserves_excitation(h, space)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    out.energies = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    fix_phases(out.vectors);
    return out;
  }

  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  Eigen::Index col = 0;
  for (int sector = 0; sector <= space.max_excitation(); ++sector) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (space.excitation(i) == sector) members.push_back(i);
    }
    if (members.empty()) continue;
    const auto n = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXcd block(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        block(a, b) = h(members[static_cast<std::size_t>(a)], members[static_cast<std::size_t>(b)]);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    for (Eigen::Index k = 0; k < n; ++k) {
      out.energies(col + k) = solver.eigenvalues()(k);
      out.sectors[static_cast<std::size_t>(col + k)] = sector;
      for (Eigen::Index a = 0; a < n; ++a) {
        out.vectors(members[static_cast<std::size_t>(a)], col + k) = solver.eigenvectors()(a, k);
      }
    }

    const double tol = 1e-9 * scale;
    Eigen::Index start = 0;
    while (start < n) {
      Eigen::Index stop = start + 1;
      while (stop < n && out.energies(col + stop) - out.energies(col + stop - 1) < tol) ++stop;
      if (stop - start > 1) {
        align_cluster(out.vectors, col + start, stop - start, alignment_candidates(params, space, sector));
      }
      start = stop;
    }
    col += n;
  }
  fix_phases(out.vectors);
  return out;
}

EigenSystem eigensystem(const SystemParams& params, const StateSpace& space) {
  return eigensystem(hamiltonian_in(params, space), space, params);
}

std::vector<LabeledState> analytic_eigenstates(const SystemParams& params, const StateSpace& space) {
  const double d = params.delta;
  const double g1 = params.g1;
  const double g2 = space.kind() == SpaceKind::QubitTls ? 0.0 : params.g2;
  const double s = std::sqrt(d * d + 4.0 * (g1 * g1 + g2 * g2));

  // Full-space index of each product state, see operators.hpp.
  enum : Eigen::Index { uuu = 0, uud = 1, udu = 2, udd = 3, duu = 4, dud = 5, ddu = 6, ddd = 7 };
  auto full = [](std::initializer_list<std::pair<Eigen::Index, double>> amps) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
    for (auto [i, a] : amps) v(i) = a;
    return v;
  };

  std::vector<LabeledState> states{
      {1, full({{ddd, 1.0}})},
      {2, full({{udd, 2 * g1}, {dud, 2 * g2}, {ddu, d - s}})},
      {3, full({{udd, -g2}, {dud, g1}})},
      {4, full({{udd, 2 * g1}, {dud, 2 * g2}, {ddu, d + s}})},
      {5, full({{uud, -d - s}, {udu, 2 * g2}, {duu, 2 * g1}})},
      {6, full({{udu, -g1}, {duu, g2}})},
      {7, full({{uud, -d + s}, {udu, 2 * g2}, {duu, 2 * g1}})},
      {8, full({{uuu, 1.0}})},
  };

  switch (space.kind()) {
    case SpaceKind::ThreeSpin:
      return states;
    case SpaceKind::SingleExcitation: {
      std::vector<LabeledState> out;
      for (int k = 0; k < 4; ++k) {
        out.push_back({states[static_cast<std::size_t>(k)].label,
                       restrict_single_excitation(states[static_cast<std::size_t>(k)].vector)});
      }
      return out;
    }
    case SpaceKind::QubitTls: {
      // Single probe: basis |uu>, |ud>, |du>, |dd> on (Q1, TLS).
      auto two = [](Complex uu, Complex ud, Complex du, Complex dd) {
        Eigen::VectorXcd v(4);
        v << uu, ud, du, dd;
        return v;
      };
      return {
          {1, two(0, 0, 0, 1)},
          {2, two(0, 2 * g1, d - s, 0)},
          {4, two(0, 2 * g1, d + s, 0)},
          {8, two(1, 0, 0, 0)},
      };
    }
  }
  throw std::logic_error("unknown space");
}

Operator restrict_single_excitation(const Operator& op) {
  if (op.rows() != 8 || op.cols() != 8) throw std::invalid_argument("expected an 8x8 operator");
  const Eigen::MatrixXcd p = single_excitation_isometry().cast<Complex>();
  return p.transpose() * op * p;
}

Eigen::VectorXcd restrict_single_excitation(const Eigen::VectorXcd& state) {
  if (state.size() != 8) throw std::invalid_argument("expected an 8-dim state");
  const Eigen::MatrixXcd p = single_excitation_isometry().cast<Complex>();
  return p.transpose() * state;
}

Operator embed_single_excitation(const Operator& op) {
  if (op.rows() != 4 || op.cols() != 4) throw std::invalid_argument("expected a 4x4 operator");
  const Eigen::MatrixXcd p = single_excitation_isometry().cast<Complex>();
  return p * op * p.transpose();
}

DensityMatrix partial_trace(const DensityMatrix& rho, const StateSpace& space, std::vector<Site> keep) {
  if (rho.rows() != space.dim() || rho.cols() != space.dim()) {
    throw std::invalid_argument("density matrix dimension does not match the state space");
  }
  if (space.kind() == SpaceKind::SingleExcitation) {
    return partial_trace(embed_single_excitation(rho), StateSpace::three_spin(), std::move(keep));
  }
  const std::vector<Site> sites = space.kind() == SpaceKind::ThreeSpin
                                      ? std::vector<Site>{Site::Q1, Site::Q2, Site::Tls}
                                      : std::vector<Site>{Site::Q1, Site::Tls};
  const int n = static_cast<int>(sites.size());
  std::vector<bool> kept(sites.size(), false);
  for (Site s : keep) {
    auto it = std::find(sites.begin(), sites.end(), s);
    if (it == sites.end()) throw std::invalid_argument("site not present in this space");
    const auto pos = static_cast<std::size_t>(it - sites.begin());
    if (kept[pos]) throw std::invalid_argument("site listed twice");
    kept[pos] = true;
  }

  auto bit = [n](Eigen::Index i, int p) { return (i >> (n - 1 - p)) & 1; };
  auto split = [&](Eigen::Index i, Eigen::Index& kept_index, Eigen::Index& traced_index) {
    kept_index = 0;
    traced_index = 0;
    for (int p = 0; p < n; ++p) {
      if (kept[static_cast<std::size_t>(p)]) {
        kept_index = 2 * kept_index + bit(i, p);
      } else {
        traced_index = 2 * traced_index + bit(i, p);
      }
    }
  };

  const auto n_kept = std::count(kept.begin(), kept.end(), true);
  const Eigen::Index out_dim = Eigen::Index{1} << n_kept;
  DensityMatrix out = DensityMatrix::Zero(out_dim, out_dim);
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    Eigen::Index ki = 0, ti = 0;
    split(i, ki, ti);
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      Eigen::Index kj = 0, tj = 0;
      split(j, kj, tj);
      if (ti == tj) out(ki, kj) += rho(i, j);
    }
  }
  return out;
}

}  // namespace dualprobe
