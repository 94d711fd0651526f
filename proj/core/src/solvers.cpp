#include "qolat/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qolat/errors.hpp"

#ifdef QOLAT_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace qolat {

std::string_view to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::automatic: return "auto";
    case SolverMethod::dense: return "dense";
    case SolverMethod::lanczos: return "lanczos";
    case SolverMethod::imaginary_time: return "imaginary_time";
  }
  return "?";
}

namespace {

void project_out(Eigen::VectorXcd& v, std::span<const Eigen::VectorXcd> basis) {
  for (const auto& u : basis) v -= u * u.dot(v);
}

Eigen::VectorXcd random_start(Eigen::Index d, std::span<const Eigen::VectorXcd> deflate,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed + 7919 * deflate.size());
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = Complex(normal(rng), normal(rng));
  project_out(v, deflate);
  project_out(v, deflate);
  const double n = v.norm();
  if (!(n > 0.0)) throw NumericError("deflation space exhausts the Hilbert space");
  return v / n;
}

double projected_residual(const SparseMatrix& H, const Eigen::VectorXcd& y, double theta,
                          std::span<const Eigen::VectorXcd> deflate) {
  Eigen::VectorXcd r = H * y;
  project_out(r, deflate);
  r -= theta * y;
  return r.norm();
}

SolverMethod resolve(SolverMethod m, std::size_t d, std::size_t limit) {
  if (m != SolverMethod::automatic) return m;
  return d <= limit ? SolverMethod::dense : SolverMethod::lanczos;
}

struct DenseSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

#ifdef QOLAT_HAVE_LAPACKE
// Lowest `count` eigenpairs through LAPACK's MRRR driver.
DenseSpectrum lapack_lowest(const SparseMatrix& m, bool real, Eigen::Index count) {
  const auto n = static_cast<lapack_int>(m.rows());
  const auto k = static_cast<lapack_int>(count);
  lapack_int found = 0;
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  DenseSpectrum out;
  Eigen::VectorXd w(n);
  lapack_int info = 0;
  if (real) {
    Eigen::MatrixXd a = Eigen::MatrixXd(m.real());
    Eigen::MatrixXd z(n, k);
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k, 0.0, &found,
                          w.data(), z.data(), n, support.data());
    out.vectors = z.cast<Complex>();
  } else {
    Eigen::MatrixXcd a = Eigen::MatrixXcd(m);
    Eigen::MatrixXcd z(n, k);
    info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                          n, 0.0, 0.0, 1, k, 0.0, &found, w.data(),
                          reinterpret_cast<lapack_complex_double*>(z.data()), n, support.data());
    out.vectors = std::move(z);
  }
  if (info != 0 || found != k) throw NumericError("dense eigensolver failed (info=" + std::to_string(info) + ")");
  out.values = w.head(k);
  return out;
}
#endif

// Lowest `count` eigenpairs in ascending order.
DenseSpectrum dense_spectrum(const SparseOperator& H, Eigen::Index count) {
  const auto& m = H.matrix();
  count = std::min<Eigen::Index>(count, m.rows());
#ifdef QOLAT_HAVE_LAPACKE
  return lapack_lowest(m, H.is_real(), count);
#else
  DenseSpectrum out;
  if (H.is_real()) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(m.real());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    out.values = es.eigenvalues().head(count);
    out.vectors = es.eigenvectors().leftCols(count).cast<Complex>();
  } else {
    Eigen::MatrixXcd dense = Eigen::MatrixXcd(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    out.values = es.eigenvalues().head(count);
    out.vectors = es.eigenvectors().leftCols(count);
  }
  return out;
#endif
}

EigenPair iterative_lowest(SolverMethod method, const SparseMatrix& H,
                           std::span<const Eigen::VectorXcd> deflate, const SolverOptions& options) {
  return method == SolverMethod::imaginary_time ? imaginary_time_lowest(H, deflate, options)
                                                : lanczos_lowest(H, deflate, options);
}

}  // namespace

std::pair<double, double> gershgorin_bounds(const SparseMatrix& H) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < H.outerSize(); ++k) {
    double centre = 0.0;
    double radius = 0.0;
    for (SparseMatrix::InnerIterator it(H, k); it; ++it) {
      if (it.row() == it.col()) {
        centre = it.value().real();
      } else {
        radius += std::abs(it.value());
      }
    }
    lo = std::min(lo, centre - radius);
    hi = std::max(hi, centre + radius);
  }
  return {lo, hi};
}

EigenPair lanczos_lowest(const SparseMatrix& H, std::span<const Eigen::VectorXcd> deflate,
                         const SolverOptions& options) {
  const Eigen::Index d = H.rows();
  const Eigen::Index effective = d - static_cast<Eigen::Index>(deflate.size());
  if (effective <= 0) throw InvalidArgument("nothing left to solve after deflation");

  const double scale = std::max(1.0, H.norm() / std::sqrt(static_cast<double>(d)));
  const double tol = options.residual_tolerance * scale;
  const Eigen::Index k_max =
      std::min<Eigen::Index>(std::max(options.krylov_dimension, 2), effective);

  Eigen::VectorXcd start = random_start(d, deflate, options.seed);
  int total = 0;
  double last_residual = std::numeric_limits<double>::infinity();

  while (total < options.max_iterations) {
    std::vector<Eigen::VectorXcd> V;
    V.reserve(static_cast<std::size_t>(k_max));
    std::vector<double> alpha;
    std::vector<double> beta;
    Eigen::VectorXcd v = start;

    for (Eigen::Index j = 0; j < k_max; ++j) {
      V.push_back(v);
      Eigen::VectorXcd w = H * v;
      project_out(w, deflate);
      const double a = v.dot(w).real();
      w -= a * v;
      if (j > 0) w -= beta.back() * V[V.size() - 2];
      // full reorthogonalisation, twice is enough
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& u : V) w -= u * u.dot(w);
        project_out(w, deflate);
      }
      const double b = w.norm();
      alpha.push_back(a);
      ++total;

      const auto n = static_cast<Eigen::Index>(alpha.size());
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), n);
      Eigen::VectorXd sub = n > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), n - 1))
                                  : Eigen::VectorXd(0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const double theta = tri.eigenvalues()[0];
      const Eigen::VectorXd s = tri.eigenvectors().col(0);
      const double estimate = b * std::abs(s[n - 1]);

      const bool invariant = b <= 1e-14 * scale;
      const bool last = (j == k_max - 1);
      if (estimate < tol || invariant || last || total >= options.max_iterations) {
        Eigen::VectorXcd y = Eigen::VectorXcd::Zero(d);
        for (Eigen::Index i = 0; i < n; ++i) y += s[i] * V[static_cast<std::size_t>(i)];
        project_out(y, deflate);
        y.normalize();
        const double r = projected_residual(H, y, theta, deflate);
        last_residual = r;
        if (r < tol || (invariant && effective <= n)) {
          return {theta, std::move(y), total, r};
        }
        if (last || invariant || total >= options.max_iterations) {
          start = std::move(y);
          break;
        }
      }
      beta.push_back(b);
      v = w / b;
    }
  }
  throw ConvergenceError("Lanczos did not converge", total, last_residual);
}

EigenPair imaginary_time_lowest(const SparseMatrix& H, std::span<const Eigen::VectorXcd> deflate,
                                const SolverOptions& options) {
  const Eigen::Index d = H.rows();
  if (d - static_cast<Eigen::Index>(deflate.size()) <= 0) {
    throw InvalidArgument("nothing left to solve after deflation");
  }
  auto [lo, hi] = gershgorin_bounds(H);
  Eigen::VectorXcd v = random_start(d, deflate, options.seed);

  auto energy_of = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& hx) {
    hx = H * x;
    project_out(hx, deflate);
    return x.dot(hx).real();
  };

  Eigen::VectorXcd hv;
  double energy = energy_of(v, hv);
  if (!(hi - lo > 0.0)) {
    // H is a multiple of the identity
    return {energy, v, 0, projected_residual(H, v, energy, deflate)};
  }
  // Spectrum of 1 - dtau (H - lo) lies in [0, 1]; the ground state dominates.
  const double dtau = 1.0 / (hi - lo);
  int calm = 0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    v -= dtau * (hv - lo * v);
    project_out(v, deflate);
    v.normalize();
    const double next = energy_of(v, hv);
    const double change = std::abs(next - energy);
    energy = next;
    calm = change < options.energy_tolerance ? calm + 1 : 0;
    if (calm >= 2) {
      Eigen::VectorXcd r = hv - energy * v;
      return {energy, v, it, r.norm()};
    }
  }
  Eigen::VectorXcd r = hv - energy * v;
  throw ConvergenceError("imaginary-time evolution did not converge", options.max_iterations,
                         r.norm());
}

GroundState ground_state(const SparseOperator& H, const SolverOptions& options) {
  const std::size_t d = H.dimension();
  const SolverMethod method = resolve(options.method, d, options.dense_limit);
  const auto& basis = H.basis_ptr();

  if (d == 1) {
    Eigen::VectorXcd v(1);
    v[0] = 1.0;
    return {H.matrix().coeff(0, 0).real(), StateVector(basis, v), false, 0.0, 0, 0.0};
  }

  if (method == SolverMethod::dense) {
    auto spec = dense_spectrum(H, 2);
    const double gap = spec.values[1] - spec.values[0];
    Eigen::VectorXcd v = spec.vectors.col(0);
    const double r = (H.matrix() * v - spec.values[0] * v).norm();
    return {spec.values[0], StateVector(basis, std::move(v)), gap < options.degeneracy_tolerance,
            gap, 1, r};
  }

  auto first = iterative_lowest(method, H.matrix(), {}, options);
  std::vector<Eigen::VectorXcd> locked{first.vector};
  auto second = iterative_lowest(method, H.matrix(), locked, options);
  const double gap = second.value - first.value;
  return {first.value, StateVector(basis, std::move(first.vector)),
          gap < options.degeneracy_tolerance, gap, first.iterations, first.residual};
}

GroundManifold ground_manifold(const SparseOperator& H, const SolverOptions& options) {
  const std::size_t d = H.dimension();
  const SolverMethod method = resolve(options.method, d, options.dense_limit);
  const auto& basis = H.basis_ptr();
  GroundManifold out;

  if (d == 1 || method == SolverMethod::dense) {
    if (d == 1) {
      out.energy = H.matrix().coeff(0, 0).real();
      Eigen::VectorXcd v(1);
      v[0] = 1.0;
      out.states.emplace_back(basis, v);
      return out;
    }
    auto spec = dense_spectrum(H, static_cast<Eigen::Index>(options.max_manifold) + 1);
    out.energy = spec.values[0];
    for (Eigen::Index k = 0; k < spec.values.size(); ++k) {
      if (spec.values[k] - out.energy < options.degeneracy_tolerance) {
        if (static_cast<int>(out.states.size()) >= options.max_manifold) break;
        out.states.emplace_back(basis, Eigen::VectorXcd(spec.vectors.col(k)));
      } else {
        out.next_energy = spec.values[k];
        out.has_next = true;
        break;
      }
    }
    return out;
  }

  std::vector<Eigen::VectorXcd> locked;
  auto first = iterative_lowest(method, H.matrix(), locked, options);
  out.energy = first.value;
  locked.push_back(std::move(first.vector));
  while (locked.size() < d && static_cast<int>(locked.size()) < options.max_manifold) {
    auto next = iterative_lowest(method, H.matrix(), locked, options);
    if (next.value - out.energy >= options.degeneracy_tolerance) {
      out.next_energy = next.value;
      out.has_next = true;
      break;
    }
    locked.push_back(std::move(next.vector));
  }
  for (auto& v : locked) out.states.emplace_back(basis, std::move(v));
  return out;
}

}  // namespace qolat
