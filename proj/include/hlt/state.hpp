#ifndef HLT_STATE_HPP
#define HLT_STATE_HPP

#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hlt/pauli.hpp"

namespace hlt {

// Dense Hermitian, PSD, unit-trace matrix of dimension 2^n.
struct DensityMatrix {
    int n_qubits = 0;
    Eigen::MatrixXcd matrix;

    std::int64_t dim() const { return std::int64_t(1) << n_qubits; }
};

// Validates the DensityMatrix invariants (Hermitian within 1e-10, unit trace
// within 1e-10, smallest eigenvalue >= -1e-9) and returns the state.
DensityMatrix make_density_matrix(int n_qubits, Eigen::MatrixXcd m);

// Real linear combination of basis elements; traceless by construction since
// the identity never appears in an OperatorBasis.
struct HamiltonianOperator {
    OperatorBasis basis;
    Eigen::VectorXd coefficients;
};

HamiltonianOperator make_hamiltonian(OperatorBasis basis, Eigen::VectorXd coefficients);

Eigen::MatrixXcd to_dense(const HamiltonianOperator& h);

// rho = exp(-H)/Tr(exp(-H)) via Hermitian eigendecomposition.
DensityMatrix gibbs_state(const HamiltonianOperator& h);
DensityMatrix gibbs_state_dense(const Eigen::MatrixXcd& h, int n_qubits);

// Nearest-neighbor XX couplings plus on-site Z fields, all +1.
HamiltonianOperator transverse_ising(int n);

// Classical Ising chain: -a on every nearest-neighbor ZZ.
HamiltonianOperator ghz_hamiltonian(int m, double a);

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clipped to [0,1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Reduced state on the contiguous window [keep_start, keep_start + keep_len).
DensityMatrix partial_trace(const DensityMatrix& rho, int keep_start, int keep_len);

std::vector<double> top_eigenvalues(const DensityMatrix& rho, int count);

// Gibbs Hamiltonian -log(rho) with eigenvalues clamped below at `floor`
// before the log; the identity component is removed.
Eigen::MatrixXcd extract_gh(const DensityMatrix& rho, double floor = 1e-12);

// Squared-coefficient weights of the Pauli decomposition, normalized by the
// squared Hilbert-Schmidt norm. Classes: single-site Z (1-classical),
// nearest-neighbor ZZ (2-classical), single-site X/Y (1-quantum), other
// nearest-neighbor pairs (2-quantum), everything else (higher).
struct LocalityWeight {
    double one_classical = 0.0;
    double two_classical = 0.0;
    double one_quantum = 0.0;
    double two_quantum = 0.0;
    double higher = 0.0;
};

struct PauliDecomposition {
    std::vector<std::pair<std::string, double>> terms;  // (letters, coefficient)
    LocalityWeight weight;
};

// Full-Pauli-set decomposition: coefficient of P is Tr(P h)/2^n.
PauliDecomposition pauli_decompose(const Eigen::MatrixXcd& h, int n_qubits);
// Restricted to the given basis (weights computed over the same strings).
PauliDecomposition pauli_decompose(const Eigen::MatrixXcd& h, const OperatorBasis& basis);

DensityMatrix ghz_pure(int n);
DensityMatrix maximally_mixed(int n);

void save_density_matrix(std::ostream& os, const DensityMatrix& rho);
DensityMatrix load_density_matrix(std::istream& is);

}  // namespace hlt

#endif  // HLT_STATE_HPP
