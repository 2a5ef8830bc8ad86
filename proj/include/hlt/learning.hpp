#ifndef HLT_LEARNING_HPP
#define HLT_LEARNING_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hlt/measurement.hpp"
#include "hlt/pauli.hpp"
#include "hlt/state.hpp"

namespace hlt {

struct Provenance {
    enum class Kind { exact, dataset };
    Kind kind = Kind::exact;
    std::uint64_t seed = 0;
    long long total_shots = 0;
};

// Q x M matrix with entry (q,m) = <i[A_q, S_m]>_rho. Rows run over the
// constraint operators {A_q} (locality <= k+1), columns over the Hamiltonian
// basis {S_m} (locality <= k). Entries vanish structurally when A_q and S_m
// commute.
struct ConstraintMatrix {
    OperatorBasis rows_basis;
    OperatorBasis cols_basis;
    Eigen::MatrixXd entries;
    Provenance provenance;
};

ConstraintMatrix build_constraint_matrix(const DensityMatrix& rho, int k);
ConstraintMatrix build_constraint_matrix(const MeasurementDataset& data, int k);

// The l lowest right singular vectors, ascending by singular value. Vector
// signs are fixed (largest-magnitude component positive) so outputs are
// deterministic.
struct SpectralCutoff {
    Eigen::VectorXd singular_values;  // ascending, length l
    Eigen::MatrixXd right_vectors;    // M x l, orthonormal columns
    int l = 0;
};

SpectralCutoff svd_cutoff(const ConstraintMatrix& km, int l);

// epsilon * sqrt(sum_{i>=l} 1/lambda_i^2) over the full empirical spectrum
// (requires cutoff.l == M). Returns +inf when the tail is ill-conditioned.
double estimate_reconstruction_error(const SpectralCutoff& full_spectrum, int l,
                                     double epsilon);

// Unit-norm random combination over the locality-k basis, coefficients drawn
// i.i.d. standard normal.
HamiltonianOperator random_local_hamiltonian(int n, int k, std::mt19937_64& rng);

struct OracleResult {
    std::vector<double> ratios;
    double mean = 0.0;
};

// Monte-Carlo check of the subspace-projection error estimate: random
// normalized 2-local Gibbs Hamiltonians, exact constraint matrix plus
// Gaussian entrywise noise of amplitude epsilon, ratio of the observed
// projection error to the estimated one. An empty l_grid means all
// l in [1, M-1].
OracleResult run_error_oracle(const std::vector<int>& n_range,
                              const std::vector<double>& epsilons, int trials,
                              const std::vector<int>& l_grid, std::uint64_t seed);

// Text export with Pauli-word row/column labels.
void write_constraint_matrix(std::ostream& os, const ConstraintMatrix& km);

}  // namespace hlt

#endif  // HLT_LEARNING_HPP
