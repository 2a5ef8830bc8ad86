#ifndef HLT_EXPERIMENT_HPP
#define HLT_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hlt/optimizer.hpp"
#include "hlt/qst.hpp"

namespace hlt {

enum class ExperimentKind {
    hlt_sweep,
    qst_sweep,
    eigen_recovery,
    error_oracle,
    subsystem_verify,
    convergence,
    ghz_study,
};

std::string to_string(ExperimentKind kind);

struct StateSpec {
    enum class Family { transverse_ising, ghz_reduced, perturbed_ising, perturbed_ghz };
    Family family = Family::transverse_ising;
    double eta = 0.0;  // nonlocal weight for the perturbed families
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::hlt_sweep;
    int n_qubits = 5;
    int k = 2;
    std::vector<int> l_grid;
    std::vector<long long> m_grid;
    std::vector<std::uint64_t> seeds;
    StateSpec state;
    // error-oracle only
    std::vector<int> oracle_n;
    std::vector<double> oracle_epsilons;
    int oracle_trials = 10;
    // subsystem-verify only
    long long subsystem_shots = 8192;
};

// Flat key = value text config; unknown keys are rejected.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config_file(const std::string& path);
std::uint64_t config_hash(const ExperimentConfig& config);

struct RunRow {
    std::string key;  // grid-point identity, unique within a record
    std::vector<std::pair<std::string, std::string>> fields;
    bool failed = false;
};

struct RunRecord {
    ExperimentConfig config;
    std::uint64_t hash = 0;
    std::vector<RunRow> rows;
    double seconds = 0.0;
    int failures = 0;
};

struct RunOptions {
    int threads = 1;
    std::uint64_t seed_base = 0;  // added to every configured seed
    // grid-point keys to skip (already present in the output)
    std::set<std::string> completed;
};

// H_TI plus a random strictly 3-local contiguous combination scaled so its
// squared-coefficient share of the total is eta.
HamiltonianOperator make_perturbed_ising(int n, double eta, std::uint64_t seed);
// Same injection on top of the classical-Ising GHZ Hamiltonian.
HamiltonianOperator make_perturbed_ghz(int n, double eta, std::uint64_t seed);

// Target state plus the ground-truth density matrix for a config.
DensityMatrix build_state(const StateSpec& spec, int n_qubits, std::uint64_t seed);

struct HltPointResult {
    double fidelity_truth = 0.0;
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
    double smallest_sv = 0.0;
    DensityMatrix state;
};

// One full pipeline pass: sample -> constraint matrix -> cutoff -> fit.
// m == 0 runs on exact probabilities.
HltPointResult run_hlt_point(const DensityMatrix& rho, int k, int l, long long m,
                             std::uint64_t seed, const FitOptions& fit_options = {});

RunRecord run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// CSV (one row per grid point) plus a JSON manifest, named by kind and
// config hash. Appends to an existing CSV when resuming.
void write_record(const RunRecord& record, const std::string& out_dir);
// Keys already present in the output for this config (used with --resume).
std::set<std::string> completed_keys(const ExperimentConfig& config,
                                     const std::string& out_dir);

}  // namespace hlt

#endif  // HLT_EXPERIMENT_HPP
