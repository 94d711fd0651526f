#include "qolat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qolat/errors.hpp"

namespace qolat {

std::string_view to_string(Boundary b) {
  return b == Boundary::open ? "open" : "periodic";
}

std::string_view to_string(Statistics s) {
  return s == Statistics::boson ? "boson" : "fermion";
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::density: return "density";
    case Channel::magnetization: return "magnetization";
    case Channel::spin_up: return "spin-up";
    case Channel::spin_down: return "spin-down";
    case Channel::boson: return "boson";
  }
  return "?";
}

LatticeSpec LatticeSpec::bosons(int sites, int particles, int n_max, Boundary boundary) {
  LatticeSpec s;
  s.sites = sites;
  s.boundary = boundary;
  s.statistics = Statistics::boson;
  s.n_max = n_max;
  s.particles = particles;
  return s;
}

LatticeSpec LatticeSpec::fermions(int sites, int n_up, int n_down, Boundary boundary) {
  LatticeSpec s;
  s.sites = sites;
  s.boundary = boundary;
  s.statistics = Statistics::fermion;
  s.n_max = 1;
  s.n_up = n_up;
  s.n_down = n_down;
  return s;
}

void LatticeSpec::validate() const {
  if (sites < 1) throw InvalidArgument("lattice needs at least one site");
  if (!(lattice_constant > 0.0)) throw InvalidArgument("lattice constant must be positive");
  if (statistics == Statistics::boson) {
    if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
    if (particles < 0) throw InvalidArgument("particle number must be nonnegative");
    if (static_cast<long long>(particles) > static_cast<long long>(sites) * n_max) {
      throw CapacityError("N=" + std::to_string(particles) + " exceeds capacity M*n_max=" +
                          std::to_string(static_cast<long long>(sites) * n_max));
    }
    // Mixed-radix configuration keys must fit in 64 bits.
    const double bits = sites * std::log2(static_cast<double>(n_max) + 1.0);
    if (bits > 63.0) throw InvalidArgument("boson basis too large for 64-bit configuration keys");
  } else {
    if (n_up < 0 || n_down < 0) throw InvalidArgument("spin populations must be nonnegative");
    if (n_up > sites || n_down > sites) {
      throw CapacityError("spin population exceeds number of sites");
    }
    if (2 * sites > 64) throw InvalidArgument("fermion basis limited to 32 sites");
  }
}

int LatticeSpec::modes() const {
  return statistics == Statistics::boson ? sites : 2 * sites;
}

int LatticeSpec::total_particles() const {
  return statistics == Statistics::boson ? particles : n_up + n_down;
}

namespace {

int fermion_parity_below(std::span<const std::uint8_t> occ, int mode) {
  int count = 0;
  for (int k = 0; k < mode; ++k) count += occ[k];
  return (count % 2 == 0) ? 1 : -1;
}

}  // namespace

std::optional<FockAction> annihilate(std::span<const std::uint8_t> occupation, int mode,
                                     Statistics statistics) {
  if (mode < 0 || mode >= static_cast<int>(occupation.size())) {
    throw InvalidArgument("mode index out of range");
  }
  const int n = occupation[mode];
  if (n == 0) return std::nullopt;
  FockAction out{std::vector<std::uint8_t>(occupation.begin(), occupation.end()), 0.0};
  out.occupation[mode] = static_cast<std::uint8_t>(n - 1);
  if (statistics == Statistics::boson) {
    out.amplitude = std::sqrt(static_cast<double>(n));
  } else {
    out.amplitude = fermion_parity_below(occupation, mode);
  }
  return out;
}

std::optional<FockAction> create(std::span<const std::uint8_t> occupation, int mode,
                                 Statistics statistics, int n_max) {
  if (mode < 0 || mode >= static_cast<int>(occupation.size())) {
    throw InvalidArgument("mode index out of range");
  }
  const int n = occupation[mode];
  const int cap = statistics == Statistics::boson ? n_max : 1;
  if (n >= cap) return std::nullopt;
  FockAction out{std::vector<std::uint8_t>(occupation.begin(), occupation.end()), 0.0};
  out.occupation[mode] = static_cast<std::uint8_t>(n + 1);
  if (statistics == Statistics::boson) {
    out.amplitude = std::sqrt(static_cast<double>(n + 1));
  } else {
    out.amplitude = fermion_parity_below(occupation, mode);
  }
  return out;
}

// ---------------------------------------------------------------------------

FockBasis::FockBasis(const LatticeSpec& spec) : spec_(spec) {
  spec_.validate();
  modes_ = spec_.modes();

  std::vector<std::uint8_t> current(modes_, 0);
  auto push = [&] {
    configs_.insert(configs_.end(), current.begin(), current.end());
    ++dimension_;
  };

  if (spec_.statistics == Statistics::boson) {
    const int M = spec_.sites;
    const int cap = spec_.n_max;
    // Depth-first over sites with ascending occupations gives lexicographic order.
    auto rec = [&](auto&& self, int site, int remaining) -> void {
      if (site == M - 1) {
        if (remaining <= cap) {
          current[site] = static_cast<std::uint8_t>(remaining);
          push();
        }
        return;
      }
      const int max_here = std::min(cap, remaining);
      const int min_here = std::max(0, remaining - cap * (M - 1 - site));
      for (int n = min_here; n <= max_here; ++n) {
        current[site] = static_cast<std::uint8_t>(n);
        self(self, site + 1, remaining - n);
      }
      current[site] = 0;
    };
    rec(rec, 0, spec_.particles);
  } else {
    const int M = spec_.sites;
    auto rec = [&](auto&& self, int mode, int up_left, int down_left) -> void {
      if (mode == modes_) {
        if (up_left == 0 && down_left == 0) push();
        return;
      }
      const bool is_up = (mode % 2) == 0;
      const int site = mode / 2;
      // modes of this spin species still available after this one
      const int remaining_slots = M - site - 1;
      for (int n = 0; n <= 1; ++n) {
        const int left = (is_up ? up_left : down_left) - n;
        if (left < 0 || left > remaining_slots) continue;
        current[mode] = static_cast<std::uint8_t>(n);
        if (is_up) {
          self(self, mode + 1, left, down_left);
        } else {
          self(self, mode + 1, up_left, left);
        }
      }
      current[mode] = 0;
    };
    rec(rec, 0, spec_.n_up, spec_.n_down);
  }

  if (dimension_ == 0) throw CapacityError("empty particle-number sector");

  index_.reserve(dimension_ * 2);
  for (std::size_t i = 0; i < dimension_; ++i) {
    index_.emplace(key(configuration(i)), i);
  }
}

std::span<const std::uint8_t> FockBasis::configuration(std::size_t index) const {
  if (index >= dimension_) throw InvalidArgument("basis index out of range");
  return {configs_.data() + index * modes_, static_cast<std::size_t>(modes_)};
}

std::uint64_t FockBasis::key(std::span<const std::uint8_t> occupation) const {
  const std::uint64_t radix =
      spec_.statistics == Statistics::boson ? static_cast<std::uint64_t>(spec_.n_max) + 1 : 2;
  std::uint64_t k = 0;
  for (auto n : occupation) k = k * radix + n;
  return k;
}

std::optional<std::size_t> FockBasis::index_of(std::span<const std::uint8_t> occupation) const {
  if (static_cast<int>(occupation.size()) != modes_) return std::nullopt;
  const int cap = spec_.statistics == Statistics::boson ? spec_.n_max : 1;
  for (auto n : occupation) {
    if (n > cap) return std::nullopt;
  }
  auto it = index_.find(key(occupation));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int FockBasis::mode(int site, Spin spin) const {
  if (site < 0 || site >= spec_.sites) throw InvalidArgument("site index out of range");
  if (spec_.statistics == Statistics::boson) return site;
  return 2 * site + static_cast<int>(spin);
}

void FockBasis::check_channel(Channel channel) const {
  const bool boson = spec_.statistics == Statistics::boson;
  if (boson && channel != Channel::boson && channel != Channel::density) {
    throw BasisMismatch(std::string("channel '") + std::string(to_string(channel)) +
                        "' requires spin-1/2 fermions");
  }
  if (!boson && channel == Channel::boson) {
    throw BasisMismatch("boson channel requested on a fermion basis");
  }
}

int FockBasis::site_value(std::size_t index, int site, Channel channel) const {
  const auto occ = configuration(index);
  if (spec_.statistics == Statistics::boson) return occ[mode(site)];
  const int up = occ[mode(site, Spin::up)];
  const int down = occ[mode(site, Spin::down)];
  switch (channel) {
    case Channel::density: return up + down;
    case Channel::magnetization: return up - down;
    case Channel::spin_up: return up;
    case Channel::spin_down: return down;
    case Channel::boson: break;
  }
  throw BasisMismatch("boson channel requested on a fermion basis");
}

BasisPtr build_basis(const LatticeSpec& spec) {
  return std::make_shared<const FockBasis>(spec);
}

// ---------------------------------------------------------------------------

SparseOperator::SparseOperator(BasisPtr basis, SparseMatrix matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  if (!basis_) throw InvalidArgument("operator needs a basis");
  const auto d = static_cast<Eigen::Index>(basis_->dimension());
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw BasisMismatch("operator dimensions do not match basis dimension");
  }
  matrix_.makeCompressed();
}

double SparseOperator::hermiticity_defect() const {
  SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

bool SparseOperator::is_diagonal() const {
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) {
      if (it.row() != it.col() && it.value() != Complex(0.0)) return false;
    }
  }
  return true;
}

bool SparseOperator::is_real() const {
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) {
      if (it.value().imag() != 0.0) return false;
    }
  }
  return true;
}

Eigen::VectorXcd SparseOperator::apply(const Eigen::VectorXcd& v) const {
  if (v.size() != matrix_.cols()) throw BasisMismatch("vector dimension mismatch");
  return matrix_ * v;
}

StateVector::StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (!basis_) throw InvalidArgument("state needs a basis");
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_->dimension()) {
    throw BasisMismatch("state dimension does not match basis dimension");
  }
}

StateVector StateVector::basis_state(BasisPtr basis, std::size_t index) {
  if (!basis) throw InvalidArgument("state needs a basis");
  if (index >= basis->dimension()) throw InvalidArgument("basis index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dimension()));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(std::move(basis), std::move(v));
}

StateVector& StateVector::normalize() {
  const double n = amplitudes_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("cannot normalize a zero or non-finite state");
  amplitudes_ /= n;
  return *this;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<int, int>> chain_bonds(int sites, Boundary boundary) {
  std::vector<std::pair<int, int>> bonds;
  for (int i = 0; i + 1 < sites; ++i) bonds.emplace_back(i, i + 1);
  if (boundary == Boundary::periodic && sites > 2) bonds.emplace_back(0, sites - 1);
  return bonds;
}

namespace {

using Triplet = Eigen::Triplet<Complex>;

// Adds -t0 (c_a^dag c_b + c_b^dag c_a) acting on basis state `col`.
void add_hop(const FockBasis& basis, std::size_t col, int a, int b, double t0,
             std::vector<Triplet>& out) {
  const auto occ = basis.configuration(col);
  const auto stats = basis.statistics();
  const int cap = basis.spec().n_max;
  for (auto [to, from] : {std::pair{a, b}, std::pair{b, a}}) {
    auto removed = annihilate(occ, from, stats);
    if (!removed) continue;
    auto added = create(removed->occupation, to, stats, cap);
    if (!added) continue;
    auto row = basis.index_of(added->occupation);
    if (!row) continue;
    out.emplace_back(static_cast<int>(*row), static_cast<int>(col),
                     Complex(-t0 * removed->amplitude * added->amplitude, 0.0));
  }
}

SparseMatrix diagonal_matrix(const FockBasis& basis, auto&& value_of) {
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  SparseMatrix m(d, d);
  std::vector<Triplet> trips;
  trips.reserve(basis.dimension());
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double v = value_of(i);
    if (v != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), Complex(v, 0.0));
  }
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

SparseOperator build_hamiltonian(BasisPtr basis, double t0, double U) {
  if (!basis) throw InvalidArgument("hamiltonian needs a basis");
  const auto& spec = basis->spec();
  const auto d = basis->dimension();
  const auto bonds = chain_bonds(spec.sites, spec.boundary);

  std::vector<Triplet> trips;
  trips.reserve(d * (1 + 4 * bonds.size()));

  for (std::size_t col = 0; col < d; ++col) {
    const auto occ = basis->configuration(col);
    double diag = 0.0;
    if (spec.statistics == Statistics::boson) {
      for (int i = 0; i < spec.sites; ++i) {
        const double n = occ[i];
        diag += 0.5 * U * n * (n - 1.0);
      }
      if (t0 != 0.0) {
        for (auto [i, j] : bonds) add_hop(*basis, col, i, j, t0, trips);
      }
    } else {
      for (int i = 0; i < spec.sites; ++i) {
        diag += U * occ[basis->mode(i, Spin::up)] * occ[basis->mode(i, Spin::down)];
      }
      if (t0 != 0.0) {
        for (auto [i, j] : bonds) {
          for (auto s : {Spin::up, Spin::down}) {
            add_hop(*basis, col, basis->mode(i, s), basis->mode(j, s), t0, trips);
          }
        }
      }
    }
    if (diag != 0.0) trips.emplace_back(static_cast<int>(col), static_cast<int>(col), Complex(diag, 0.0));
  }

  SparseMatrix H(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  H.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(std::move(basis), std::move(H));
}

SparseOperator build_hamiltonian(const LatticeSpec& spec, BasisPtr basis, double t0, double U) {
  if (!basis) throw InvalidArgument("hamiltonian needs a basis");
  if (!(basis->spec() == spec)) throw BasisMismatch("basis was built for a different lattice spec");
  return build_hamiltonian(std::move(basis), t0, U);
}

SparseOperator number_operator(BasisPtr basis, int site, Channel channel) {
  if (!basis) throw InvalidArgument("operator needs a basis");
  basis->check_channel(channel);
  if (site < 0 || site >= basis->sites()) throw InvalidArgument("site index out of range");
  auto m = diagonal_matrix(*basis, [&](std::size_t i) {
    return static_cast<double>(basis->site_value(i, site, channel));
  });
  return SparseOperator(std::move(basis), std::move(m));
}

SparseOperator total_operator(BasisPtr basis, Channel channel) {
  if (!basis) throw InvalidArgument("operator needs a basis");
  basis->check_channel(channel);
  auto m = diagonal_matrix(*basis, [&](std::size_t i) {
    int total = 0;
    for (int s = 0; s < basis->sites(); ++s) total += basis->site_value(i, s, channel);
    return static_cast<double>(total);
  });
  return SparseOperator(std::move(basis), std::move(m));
}

Complex expectation(const StateVector& state, const SparseOperator& op) {
  if (state.basis_ptr() != op.basis_ptr() && !(state.basis().spec() == op.basis().spec())) {
    throw BasisMismatch("state and operator live on different bases");
  }
  return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

Complex two_point(const StateVector& state, const SparseOperator& a, const SparseOperator& b) {
  if (!(state.basis().spec() == a.basis().spec()) || !(state.basis().spec() == b.basis().spec())) {
    throw BasisMismatch("state and operators live on different bases");
  }
  const Eigen::VectorXcd bv = b.matrix() * state.amplitudes();
  return state.amplitudes().dot(a.matrix() * bv);
}

}  // namespace qolat
