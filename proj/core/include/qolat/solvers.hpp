#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qolat/lattice.hpp"

namespace qolat {

enum class SolverMethod { automatic, dense, lanczos, imaginary_time };

std::string_view to_string(SolverMethod m);

struct SolverOptions {
  SolverMethod method = SolverMethod::automatic;
  // `automatic` switches from dense to Lanczos above this dimension.
  std::size_t dense_limit = 2000;
  double degeneracy_tolerance = 1e-10;
  // Lanczos residual ||H v - E v|| target.
  double residual_tolerance = 1e-11;
  int krylov_dimension = 120;
  int max_iterations = 200000;
  // Imaginary time stops once successive energies differ by less than this.
  double energy_tolerance = 1e-12;
  std::uint64_t seed = 0x5eed;
  // Upper bound on the number of degenerate vectors returned by ground_manifold.
  int max_manifold = 64;
};

struct GroundState {
  double energy = 0.0;
  StateVector state;
  bool degenerate = false;
  // E1 - E0 (0 for a 1x1 problem).
  double gap = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct GroundManifold {
  double energy = 0.0;
  std::vector<StateVector> states;
  // Lowest level strictly above the manifold, if one exists.
  double next_energy = 0.0;
  bool has_next = false;
};

// Lowest eigenpair of a Hermitian operator. Throws ConvergenceError when an
// iterative method runs out of iterations.
GroundState ground_state(const SparseOperator& H, const SolverOptions& options = {});

// Orthonormal basis of the lowest eigenspace (levels within the degeneracy
// tolerance of E0).
GroundManifold ground_manifold(const SparseOperator& H, const SolverOptions& options = {});

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  int iterations = 0;
  double residual = 0.0;
};

// Lowest eigenpair of H restricted to the orthogonal complement of `deflate`
// (which must be orthonormal).
EigenPair lanczos_lowest(const SparseMatrix& H, std::span<const Eigen::VectorXcd> deflate,
                         const SolverOptions& options);

EigenPair imaginary_time_lowest(const SparseMatrix& H, std::span<const Eigen::VectorXcd> deflate,
                                const SolverOptions& options);

// Gershgorin enclosure [lower, upper] of the spectrum.
std::pair<double, double> gershgorin_bounds(const SparseMatrix& H);

}  // namespace qolat
