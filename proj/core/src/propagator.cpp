#include "dualprobe/propagator.hpp"

#include "dualprobe/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace dualprobe {

void TimeSeries::validate() const {
  if (times.size() != values.size()) throw std::invalid_argument("time series length mismatch");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("time series contains non-finite values");
  }
}

double expectation(const DensityMatrix& rho, const Operator& obs) {
  if (rho.rows() != obs.rows() || rho.cols() != obs.cols() || rho.rows() != rho.cols()) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  if (!is_hermitian(obs)) throw std::invalid_argument("expectation: observable is not Hermitian");
  const Complex v = (rho * obs).trace();
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v))) {
    throw std::invalid_argument("expectation: state is not Hermitian");
  }
  return v.real();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("trace_distance: dimension mismatch");
  const Eigen::MatrixXcd diff = a - b;
  const Eigen::MatrixXcd herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

Asymptote asymptotic_state(const Superoperator& gen, const DensityMatrix& rho0) {
  const Eigen::MatrixXcd& g = gen.matrix();
  // JacobiSVD rather than BDCSVD: the divide-and-conquer variant returned
  // inaccurate null vectors for some of these strongly non-normal generators.
  Eigen::JacobiSVD<Eigen::MatrixXcd> right(g, Eigen::ComputeFullV);
  Eigen::JacobiSVD<Eigen::MatrixXcd> left(g.adjoint(), Eigen::ComputeFullV);
  const auto& sv = right.singularValues();
  const double tol = 1e-9 * std::max(1.0, sv(0));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= tol) ++k;
  }
  if (k == 0) throw ConvergenceError("generator has no stationary subspace");
  // Singular values are sorted descending, so the null vectors are the last columns.
  const Eigen::MatrixXcd v0 = right.matrixV().rightCols(k);
  const Eigen::MatrixXcd w0 = left.matrixV().rightCols(k);
  if ((g * v0).norm() > 1e3 * tol || (w0.adjoint() * g).norm() > 1e3 * tol)
    throw ConvergenceError("asymptotic_state: inaccurate null space of the generator");
  const Eigen::MatrixXcd overlap = w0.adjoint() * v0;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(overlap);
  if (!lu.isInvertible()) throw ConvergenceError("zero eigenvalue of the generator is not semisimple");
  const Eigen::VectorXcd p0 = v0 * lu.solve(w0.adjoint() * gen.vectorize(rho0));

  Asymptote out;
  out.state = gen.devectorize(p0);
  out.state = 0.5 * (out.state + out.state.adjoint()).eval();
  const auto& space = gen.basis().space;
  out.sz = {expectation(out.state, space.sigma_z(Site::Q1)), expectation(out.state, space.sigma_z(Site::Q2)),
            expectation(out.state, space.sigma_z(Site::Tls))};
  return out;
}

Trajectory evolve(const Superoperator& gen, const DensityMatrix& rho0, double t_max, std::size_t n_points) {
  const Eigen::Index d = gen.hilbert_dim();
  if (rho0.rows() != d || rho0.cols() != d) throw std::invalid_argument("evolve: initial state dimension mismatch");
  if (!gen.matrix().allFinite()) throw std::invalid_argument("evolve: generator has non-finite entries");
  if (n_points < 2) throw std::invalid_argument("evolve: need at least two grid points");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("evolve: t_max must be positive");

  const double dt = t_max / static_cast<double>(n_points - 1);
  const Eigen::MatrixXcd step = (gen.matrix() * Complex(dt, 0.0)).exp();

  const auto& space = gen.basis().space;
  const Operator z1 = space.sigma_z(Site::Q1);
  const Operator z2 = space.sigma_z(Site::Q2);
  const Operator zt = space.sigma_z(Site::Tls);

  Trajectory traj;
  traj.space = space;
  traj.times.resize(n_points);
  traj.states.reserve(n_points);
  for (auto* s : {&traj.sz_q1, &traj.sz_q2, &traj.sz_tls}) {
    s->times.resize(n_points);
    s->values.resize(n_points);
  }

  Eigen::VectorXcd v = gen.vectorize(rho0);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double t = dt * static_cast<double>(k);
    DensityMatrix rho = gen.devectorize(v);
    traj.times[k] = t;
    traj.sz_q1.times[k] = traj.sz_q2.times[k] = traj.sz_tls.times[k] = t;
    traj.sz_q1.values[k] = expectation(rho, z1);
    traj.sz_q2.values[k] = expectation(rho, z2);
    traj.sz_tls.values[k] = expectation(rho, zt);
    traj.states.push_back(std::move(rho));
    v = step * v;
  }

  try {
    traj.asymptote = asymptotic_state(gen, rho0);
  } catch (const ConvergenceError&) {
    traj.asymptote.reset();
  }
  return traj;
}

TimeGrid default_time_grid(const Superoperator& gen, double g) {
  const double g_scale = g > 0.0 ? g : 1.0;
  double t_max = 20.0 / g_scale;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(gen.matrix(), false);
  double slowest = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double rate = -solver.eigenvalues()(i).real();
    if (rate > 1e-8 * g_scale && (slowest == 0.0 || rate < slowest)) slowest = rate;
  }
  if (slowest > 0.0) t_max = std::max(t_max, 10.0 / slowest);
  return {t_max, 4096};
}

}  // namespace dualprobe
