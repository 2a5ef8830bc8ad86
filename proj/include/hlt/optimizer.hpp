#ifndef HLT_OPTIMIZER_HPP
#define HLT_OPTIMIZER_HPP

#include <vector>

#include <Eigen/Dense>

#include "hlt/learning.hpp"
#include "hlt/measurement.hpp"
#include "hlt/state.hpp"

namespace hlt {

// H(theta) = sum_i theta_i sum_m v^(i)_m S_m over the retained singular
// directions. Traceless by construction.
struct SpectralAnsatz {
    SpectralCutoff cutoff;
    OperatorBasis basis;
    Eigen::VectorXd theta;
};

SpectralAnsatz make_ansatz(SpectralCutoff cutoff, OperatorBasis basis);

HamiltonianOperator ansatz_hamiltonian(const SpectralAnsatz& ansatz);

struct LossValue {
    double value = 0.0;
    // ordered by (basis index, outcome integer); zero-shot bases contribute
    // zero rows
    Eigen::VectorXd residuals;
};

// chi^2 between the dataset's empirical outcome distributions and those of
// gibbs_state(ansatz_hamiltonian(theta)), summed over the plan's bases.
LossValue loss(const SpectralAnsatz& ansatz, const MeasurementDataset& data);

struct FitOptions {
    int max_iterations = 500;
    double fd_step = 1e-6;  // relative forward-difference step
    double ftol = 1e-8;
    double gtol = 1e-8;
    // true: run every (sign, beta) start; false: probe all six and descend
    // only from the best start of each sign
    bool full_multistart = false;
    int threads = 1;
};

struct StartSummary {
    double sign = 1.0;
    double beta = 1.0;
    double final_loss = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct FitReport {
    Eigen::VectorXd theta_star;
    double loss_value = 0.0;
    int iterations = 0;
    std::vector<StartSummary> starts;
    bool converged = false;
};

// Levenberg-Marquardt on the loss residuals with a 2-point (forward
// difference) Jacobian, over the multi-start schedule.
FitReport fit(const SpectralAnsatz& ansatz, const MeasurementDataset& data,
              const FitOptions& options = {});

DensityMatrix reconstruct_state(const SpectralAnsatz& ansatz);

}  // namespace hlt

#endif  // HLT_OPTIMIZER_HPP
