#ifndef HLT_MEASUREMENT_HPP
#define HLT_MEASUREMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hlt/pauli.hpp"
#include "hlt/state.hpp"

namespace hlt {

// Per-site measurement basis, one of X/Y/Z per qubit. Z measures the
// computational basis; X and Y rotate the respective eigenbasis onto it.
// Outcome bit 0 corresponds to eigenvalue +1.
struct BasisLabel {
    std::string letters;
};

struct MeasurementPlan {
    int n_qubits = 0;
    std::vector<BasisLabel> bases;
    std::vector<long long> shots;
    // set when total_shots < |bases| left some bases without shots
    bool underallocated = false;
};

// Overlapping local tomography: 3^{2k} bases whose letters repeat a length-2k
// cell pattern cyclically along the chain. Shots are split by floor division
// with the remainder handed out one per basis in plan order.
MeasurementPlan build_overlapping_plan(int n_qubits, int k, long long total_shots);

struct MeasurementDataset {
    enum class Mode { sampled, exact };

    MeasurementPlan plan;
    int n_qubits = 0;
    Mode mode = Mode::sampled;
    std::uint64_t seed = 0;
    // per basis, sorted by outcome; values are counts (sampled) or
    // probabilities (exact)
    std::vector<std::vector<std::pair<std::uint64_t, double>>> counts;
};

// diag(U_B^dag rho U_B) as a real probability vector over 2^n outcomes.
Eigen::VectorXd basis_probabilities(const DensityMatrix& rho, const BasisLabel& basis);

// Multinomial sampling of every basis in the plan. Each basis draws from its
// own stream derived as seed + basis index, so results are independent of
// evaluation order.
MeasurementDataset sample(const DensityMatrix& rho, const MeasurementPlan& plan,
                          std::uint64_t seed);

// Infinite-shot limit: stores exact outcome probabilities.
MeasurementDataset exact_dataset(const DensityMatrix& rho, const MeasurementPlan& plan);

struct PauliEstimate {
    double value = 0.0;
    long long samples_used = 0;  // 0 for exact datasets
};

// Pools every basis that agrees with p on its support; the per-shot
// contribution is the product of (+1/-1) outcome signs over the support.
PauliEstimate estimate_pauli_expectation(const MeasurementDataset& data,
                                         const PauliString& p);

// Text round-trip format: header, then one block per basis with
// outcome/value pairs (values hex-formatted so round-trips are exact).
void save_dataset(std::ostream& os, const MeasurementDataset& data);
MeasurementDataset load_dataset(std::istream& is);

}  // namespace hlt

#endif  // HLT_MEASUREMENT_HPP
