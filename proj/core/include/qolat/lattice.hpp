#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qolat {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

enum class Boundary { open, periodic };
enum class Statistics { boson, fermion };
enum class Spin { up = 0, down = 1 };

// Which per-site occupation a diagonal operator measures.
enum class Channel { density, magnetization, spin_up, spin_down, boson };

std::string_view to_string(Boundary b);
std::string_view to_string(Statistics s);
std::string_view to_string(Channel c);

struct LatticeSpec {
  int sites = 1;
  Boundary boundary = Boundary::periodic;
  Statistics statistics = Statistics::fermion;
  int n_max = 5;      // per-site cap, bosons only
  int particles = 0;  // total N, bosons only
  int n_up = 0;
  int n_down = 0;
  double lattice_constant = 1.0;

  static LatticeSpec bosons(int sites, int particles, int n_max,
                            Boundary boundary = Boundary::periodic);
  static LatticeSpec fermions(int sites, int n_up, int n_down,
                              Boundary boundary = Boundary::periodic);

  // Throws InvalidArgument / CapacityError.
  void validate() const;

  int modes() const;
  int total_particles() const;

  bool operator==(const LatticeSpec&) const = default;
};

// Raw occupation-number algebra on a single Fock configuration. Fermionic
// modes are ordered site-major with the up mode before the down mode, and a
// ladder operator on mode k picks up (-1)^(number of occupied modes < k).
struct FockAction {
  std::vector<std::uint8_t> occupation;
  double amplitude = 0.0;
};

std::optional<FockAction> annihilate(std::span<const std::uint8_t> occupation,
                                     int mode, Statistics statistics);
std::optional<FockAction> create(std::span<const std::uint8_t> occupation,
                                 int mode, Statistics statistics,
                                 int n_max = 1);

// All configurations of one particle-number sector, lexicographically
// ordered by their per-mode occupation vectors.
class FockBasis {
 public:
  explicit FockBasis(const LatticeSpec& spec);

  const LatticeSpec& spec() const noexcept { return spec_; }
  std::size_t dimension() const noexcept { return dimension_; }
  int modes() const noexcept { return modes_; }
  int sites() const noexcept { return spec_.sites; }
  Statistics statistics() const noexcept { return spec_.statistics; }

  std::span<const std::uint8_t> configuration(std::size_t index) const;
  std::optional<std::size_t> index_of(std::span<const std::uint8_t> occupation) const;

  int mode(int site, Spin spin = Spin::up) const;

  // Eigenvalue of the channel's site operator on basis state `index`.
  int site_value(std::size_t index, int site, Channel channel) const;

  void check_channel(Channel channel) const;

 private:
  std::uint64_t key(std::span<const std::uint8_t> occupation) const;

  LatticeSpec spec_;
  int modes_ = 0;
  std::size_t dimension_ = 0;
  std::vector<std::uint8_t> configs_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr build_basis(const LatticeSpec& spec);

class SparseOperator {
 public:
  SparseOperator(BasisPtr basis, SparseMatrix matrix);

  const FockBasis& basis() const noexcept { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  std::size_t dimension() const noexcept { return basis_->dimension(); }

  // max_ij |A_ij - conj(A_ji)|
  double hermiticity_defect() const;
  bool is_diagonal() const;
  bool is_real() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

 private:
  BasisPtr basis_;
  SparseMatrix matrix_;
};

class StateVector {
 public:
  StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes);

  static StateVector basis_state(BasisPtr basis, std::size_t index);

  const FockBasis& basis() const noexcept { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  std::size_t dimension() const noexcept { return amplitudes_.size(); }

  double norm() const { return amplitudes_.norm(); }
  // Throws NumericError on a zero vector.
  StateVector& normalize();

  double probability(std::size_t index) const { return std::norm(amplitudes_[index]); }

 private:
  BasisPtr basis_;
  Eigen::VectorXcd amplitudes_;
};

// Nearest-neighbour pairs (i < j) of a 1D chain. Periodic chains with M <= 2
// have no extra wrap bond.
std::vector<std::pair<int, int>> chain_bonds(int sites, Boundary boundary);

// Bose-Hubbard or Hubbard Hamiltonian, depending on the basis statistics.
SparseOperator build_hamiltonian(BasisPtr basis, double t0, double U);
// Checks that `basis` was built for `spec`; throws BasisMismatch otherwise.
SparseOperator build_hamiltonian(const LatticeSpec& spec, BasisPtr basis, double t0, double U);

SparseOperator number_operator(BasisPtr basis, int site, Channel channel);
// Sum of the channel operator over every site.
SparseOperator total_operator(BasisPtr basis, Channel channel);

Complex expectation(const StateVector& state, const SparseOperator& op);
Complex two_point(const StateVector& state, const SparseOperator& a, const SparseOperator& b);

}  // namespace qolat
