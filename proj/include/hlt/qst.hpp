#ifndef HLT_QST_HPP
#define HLT_QST_HPP

#include <cstdint>

#include "hlt/measurement.hpp"
#include "hlt/state.hpp"

namespace hlt {

// Full quantum state tomography is held to n <= 6; the 3^n basis count makes
// anything larger impractical.
inline constexpr int kQstQubitLimit = 6;

// All 3^n Pauli bases with equal shots per basis.
MeasurementPlan build_qst_plan(int n_qubits, long long shots_per_basis);
// Equal split of a total budget (floor division; the remainder is dropped to
// keep the per-basis allocation equal).
MeasurementPlan build_qst_plan_total(int n_qubits, long long total_shots);

// Linear inversion over Pauli expectations followed by maximum-likelihood
// physical projection.
DensityMatrix full_qst(const MeasurementDataset& data);

// Eigenvalue truncate-and-redistribute: repeatedly zero the most negative
// eigenvalue and spread its value uniformly over the remaining nonzero ones.
DensityMatrix project_physical(const Eigen::MatrixXcd& h);

// QST of a 3-qubit contiguous window of rho_source. shots_per_basis == 0
// runs on exact probabilities.
DensityMatrix subsystem_qst(const DensityMatrix& rho_source, int window_start,
                            long long shots_per_basis, std::uint64_t seed);

// Mean fidelity between matching 3-qubit windows of the two states.
double average_window_fidelity(const DensityMatrix& candidate,
                               const DensityMatrix& reference);

}  // namespace hlt

#endif  // HLT_QST_HPP
