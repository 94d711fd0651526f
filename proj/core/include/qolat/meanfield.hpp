#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace qolat {

// Energies in units of U. The cavity term is alpha_D N^2 for N atoms in the
// K illuminated sites, so 1/gamma_D = 2 K alpha_D.
struct QuantumLatticeParams {
  double mu_over_U = 0.0;
  double alpha_D = 0.0;
  int K = 1;
  int n_max = 5;
  double t0_over_U = 0.0;
  int coordination = 2;

  double inv_gamma() const { return 2.0 * K * alpha_D; }
  double gamma_D() const;  // +inf when alpha_D == 0
  void validate() const;

  static QuantumLatticeParams from_gamma(double mu_over_U, double gamma_D, int K = 1);
};

enum class MeanFieldPhase { vacuum, mott, superfluid_minimal, superfluid };

struct MeanFieldSolution {
  double psi = 0.0;
  double rho = 0.0;
  double delta_n = 0.0;
  double energy = 0.0;  // per site
  MeanFieldPhase phase = MeanFieldPhase::vacuum;
  int filling = 0;  // m: Mott(m) has rho = m, SF-minimal(m) lives on {m, m+1}
  int iterations = 0;
  double residual = 0.0;
  Eigen::VectorXd site_state;  // Fock amplitudes, empty for analytic solutions

  std::string label() const;
};

// Closed-form t0 = 0 solution. With m = floor(mu / (1/gamma + 1)):
// SF-minimal for mu <= m + (m+1)/gamma, Mott(m+1) above.
MeanFieldSolution analytic_solution(const QuantumLatticeParams& p);

// Decoupled on-site energy at occupation g; the one-argument form uses
// g = x + 1 with x = mu/U - rho/gamma_D.
double onsite_energy(const QuantumLatticeParams& p, double rho, double g);
double onsite_energy(const QuantumLatticeParams& p, double rho);

// Expectation of onsite_energy over the two-level state on {m, m+1} with
// density rho; equals the mean-field energy per site at t0 = 0.
double minimal_fluctuation_energy(const QuantumLatticeParams& p, double rho);

// Single-site mean-field Hamiltonian on Fock levels 0..n_max:
// n(n-1)/2 - x n - rho^2/(2 gamma) - z t0 psi (b + b^dag) + z t0 psi^2.
Eigen::MatrixXd effective_site_hamiltonian(const QuantumLatticeParams& p, double rho, double psi);

struct SelfConsistentOptions {
  double damping = 0.5;
  double tolerance = 1e-10;
  int max_iterations = 10000;
  double psi_start = 0.1;
  double degeneracy_tolerance = 1e-9;
};

MeanFieldSolution selfconsistent_solve(const QuantumLatticeParams& p, const SelfConsistentOptions& options = {});

struct StaircasePoint {
  double mu_over_U = 0.0;
  long long atoms = 0;
  double rho = 0.0;
};

// Exact t0 = 0 ground state of K homogeneously illuminated sites: the best
// N with atoms spread as evenly as possible, for every mu on the grid.
std::vector<StaircasePoint> atomic_limit_ed(const QuantumLatticeParams& p, const std::vector<double>& mu_grid);

// Number of density changes along a staircase.
int count_steps(const std::vector<StaircasePoint>& staircase);

enum class MeanFieldMethod { analytic, selfconsistent };

struct PhaseBoundary {
  double alpha_D = 0.0;
  double mu_over_U = 0.0;  // midpoint between the grid points where psi crosses 1e-9
  bool entering_superfluid = false;
};

struct PhaseDiagram {
  std::vector<double> mu_grid;
  std::vector<double> alpha_grid;
  std::vector<MeanFieldSolution> cells;  // alpha-major
  std::vector<PhaseBoundary> boundaries;

  const MeanFieldSolution& at(std::size_t alpha_index, std::size_t mu_index) const {
    return cells[alpha_index * mu_grid.size() + mu_index];
  }
  // Fraction of the mu grid in a Mott or vacuum state for one alpha row.
  double insulating_fraction(std::size_t alpha_index) const;
};

PhaseDiagram phase_diagram(const std::vector<double>& mu_grid, const std::vector<double>& alpha_grid,
                           const QuantumLatticeParams& base, MeanFieldMethod method, int threads = 1);

// Default grids: mu/U in [0, 3] step 0.005, alpha_D log-spaced over [1e-3, 10].
std::vector<double> default_mu_grid();
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace qolat
