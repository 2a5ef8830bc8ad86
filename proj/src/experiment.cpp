#include "hlt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hlt {

namespace {

using json = nlohmann::json;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        // trim
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "hlt-sweep") return ExperimentKind::hlt_sweep;
    if (s == "qst-sweep") return ExperimentKind::qst_sweep;
    if (s == "eigen-recovery") return ExperimentKind::eigen_recovery;
    if (s == "error-oracle") return ExperimentKind::error_oracle;
    if (s == "subsystem-verify") return ExperimentKind::subsystem_verify;
    if (s == "convergence") return ExperimentKind::convergence;
    if (s == "ghz-study") return ExperimentKind::ghz_study;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

StateSpec state_from_string(const std::string& s) {
    StateSpec spec;
    auto paren = s.find('(');
    std::string name = paren == std::string::npos ? s : s.substr(0, paren);
    if (name == "transverse-ising") {
        spec.family = StateSpec::Family::transverse_ising;
        return spec;
    }
    if (name == "ghz-reduced") {
        spec.family = StateSpec::Family::ghz_reduced;
        return spec;
    }
    if (name == "perturbed-ising" || name == "perturbed-ghz") {
        spec.family = name == "perturbed-ising" ? StateSpec::Family::perturbed_ising
                                                : StateSpec::Family::perturbed_ghz;
        if (paren == std::string::npos || s.back() != ')') {
            throw std::invalid_argument("perturbed state spec needs (eta)");
        }
        spec.eta = std::stod(s.substr(paren + 1, s.size() - paren - 2));
        if (spec.eta < 0.0 || spec.eta >= 1.0) {
            throw std::invalid_argument("eta must be in [0, 1)");
        }
        return spec;
    }
    throw std::invalid_argument("unknown state spec: " + s);
}

std::string state_to_string(const StateSpec& spec) {
    switch (spec.family) {
        case StateSpec::Family::transverse_ising: return "transverse-ising";
        case StateSpec::Family::ghz_reduced: return "ghz-reduced";
        case StateSpec::Family::perturbed_ising:
            return "perturbed-ising(" + std::to_string(spec.eta) + ")";
        case StateSpec::Family::perturbed_ghz:
            return "perturbed-ghz(" + std::to_string(spec.eta) + ")";
    }
    return "?";
}

std::string canonical_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << to_string(c.kind) << ";n=" << c.n_qubits << ";k=" << c.k << ";l=";
    for (int l : c.l_grid) os << l << ",";
    os << ";m=";
    for (long long m : c.m_grid) os << m << ",";
    os << ";seeds=";
    for (auto s : c.seeds) os << s << ",";
    os << ";state=" << state_to_string(c.state) << ";on=";
    for (int n : c.oracle_n) os << n << ",";
    os << ";oeps=";
    for (double e : c.oracle_epsilons) os << e << ",";
    os << ";otrials=" << c.oracle_trials << ";sshots=" << c.subsystem_shots;
    return os.str();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::hlt_sweep: return "hlt-sweep";
        case ExperimentKind::qst_sweep: return "qst-sweep";
        case ExperimentKind::eigen_recovery: return "eigen-recovery";
        case ExperimentKind::error_oracle: return "error-oracle";
        case ExperimentKind::subsystem_verify: return "subsystem-verify";
        case ExperimentKind::convergence: return "convergence";
        case ExperimentKind::ghz_study: return "ghz-study";
    }
    return "?";
}

ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig config;
    bool have_kind = false;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            " is not key = value");
            }
            continue;
        }
        auto keyv = split(line.substr(0, eq), '=');
        std::string key = keyv.empty() ? "" : keyv[0];
        std::string value = line.substr(eq + 1);
        auto b = value.find_first_not_of(" \t\r");
        auto e = value.find_last_not_of(" \t\r");
        value = b == std::string::npos ? "" : value.substr(b, e - b + 1);
        if (key == "kind") {
            config.kind = kind_from_string(value);
            have_kind = true;
        } else if (key == "n_qubits") {
            config.n_qubits = std::stoi(value);
        } else if (key == "k") {
            config.k = std::stoi(value);
        } else if (key == "l_grid") {
            config.l_grid.clear();
            for (const auto& t : split(value, ',')) config.l_grid.push_back(std::stoi(t));
        } else if (key == "m_grid") {
            config.m_grid.clear();
            for (const auto& t : split(value, ',')) {
                config.m_grid.push_back(static_cast<long long>(std::stod(t)));
            }
        } else if (key == "seeds") {
            config.seeds.clear();
            for (const auto& t : split(value, ',')) config.seeds.push_back(std::stoull(t));
        } else if (key == "state") {
            config.state = state_from_string(value);
        } else if (key == "oracle_n") {
            config.oracle_n.clear();
            for (const auto& t : split(value, ',')) config.oracle_n.push_back(std::stoi(t));
        } else if (key == "oracle_epsilons") {
            config.oracle_epsilons.clear();
            for (const auto& t : split(value, ',')) config.oracle_epsilons.push_back(std::stod(t));
        } else if (key == "oracle_trials") {
            config.oracle_trials = std::stoi(value);
        } else if (key == "subsystem_shots") {
            config.subsystem_shots = std::stoll(value);
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
    if (!have_kind) throw std::invalid_argument("config is missing the kind key");
    std::set<std::uint64_t> unique(config.seeds.begin(), config.seeds.end());
    if (unique.size() != config.seeds.size()) {
        throw std::invalid_argument("seeds must be distinct");
    }
    return config;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file: " + path);
    return parse_config(is);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    // FNV-1a over the canonical serialization
    std::string s = canonical_config(config);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

HamiltonianOperator inject_nonlocal(HamiltonianOperator base, double eta,
                                    std::uint64_t seed) {
    const int n = base.basis.n_qubits;
    if (eta < 0.0 || eta >= 1.0) throw std::invalid_argument("eta must be in [0, 1)");
    OperatorBasis wide = enumerate_local_basis(n, 3);
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(wide.size());
    for (int i = 0; i < base.basis.size(); ++i) {
        int j = wide.index_of(base.basis.elements[i].letters);
        coeffs[j] = base.coefficients[i];
    }
    if (eta > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(wide.size());
        for (int i = 0; i < wide.size(); ++i) {
            if (wide.elements[i].support_size() == 3 && wide.elements[i].support_span() == 3) {
                delta[i] = normal(rng);
            }
        }
        // ||delta||^2 / (||base||^2 + ||delta||^2) = eta
        double base_sq = coeffs.squaredNorm();
        delta *= std::sqrt(eta / (1.0 - eta) * base_sq) / delta.norm();
        coeffs += delta;
    }
    return HamiltonianOperator{std::move(wide), std::move(coeffs)};
}

}  // namespace

HamiltonianOperator make_perturbed_ising(int n, double eta, std::uint64_t seed) {
    return inject_nonlocal(transverse_ising(n), eta, seed);
}

HamiltonianOperator make_perturbed_ghz(int n, double eta, std::uint64_t seed) {
    return inject_nonlocal(ghz_hamiltonian(n, 5.0), eta, seed);
}

DensityMatrix build_state(const StateSpec& spec, int n_qubits, std::uint64_t seed) {
    switch (spec.family) {
        case StateSpec::Family::transverse_ising:
            return gibbs_state(transverse_ising(n_qubits));
        case StateSpec::Family::ghz_reduced:
            return partial_trace(ghz_pure(n_qubits + 1), 0, n_qubits);
        case StateSpec::Family::perturbed_ising:
            return gibbs_state(make_perturbed_ising(n_qubits, spec.eta, seed));
        case StateSpec::Family::perturbed_ghz:
            return gibbs_state(make_perturbed_ghz(n_qubits, spec.eta, seed));
    }
    throw std::invalid_argument("unknown state family");
}

HltPointResult run_hlt_point(const DensityMatrix& rho, int k, int l, long long m,
                             std::uint64_t seed, const FitOptions& fit_options) {
    MeasurementPlan plan = build_overlapping_plan(rho.n_qubits, k, m);
    MeasurementDataset data =
        m > 0 ? sample(rho, plan, seed) : exact_dataset(rho, plan);
    ConstraintMatrix km = build_constraint_matrix(data, k);
    SpectralCutoff cutoff = svd_cutoff(km, l);
    double smallest = cutoff.singular_values.size() ? cutoff.singular_values[0] : 0.0;
    SpectralAnsatz ansatz = make_ansatz(std::move(cutoff), km.cols_basis);
    FitReport report = fit(ansatz, data, fit_options);
    ansatz.theta = report.theta_star;
    HltPointResult out;
    out.state = reconstruct_state(ansatz);
    out.fidelity_truth = fidelity(out.state, rho);
    out.loss = report.loss_value;
    out.iterations = report.iterations;
    out.converged = report.converged;
    out.smallest_sv = smallest;
    return out;
}

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// grid loop shared by the sweep kinds; `body` fills the row fields from the
// flat grid index and may throw, in which case the failure is recorded and
// the run continues.
template <typename Body>
void grid_run(RunRecord& record, const RunOptions& options,
              const std::vector<std::string>& keys, Body&& body) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (options.completed.count(keys[i])) continue;
        RunRow row;
        row.key = keys[i];
        try {
            body(i, row);
        } catch (const std::exception& ex) {
            row.failed = true;
            row.fields.emplace_back("error", ex.what());
            ++record.failures;
        }
        record.rows.push_back(std::move(row));
    }
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    RunRecord record;
    record.config = config;
    record.hash = config_hash(config);
    auto t0 = std::chrono::steady_clock::now();

    FitOptions fopt;
    fopt.threads = options.threads;

    auto seeds = config.seeds;
    for (auto& s : seeds) s += options.seed_base;

    switch (config.kind) {
        case ExperimentKind::hlt_sweep: {
            std::vector<std::string> keys;
            for (int l : config.l_grid)
                for (long long m : config.m_grid)
                    for (auto s : seeds)
                        keys.push_back("l=" + std::to_string(l) + ";m=" + std::to_string(m) +
                                       ";seed=" + std::to_string(s));
            grid_run(record, options, keys, [&](std::size_t i, RunRow& row) {
                int l = config.l_grid[i / (config.m_grid.size() * seeds.size())];
                long long m = config.m_grid[(i / seeds.size()) % config.m_grid.size()];
                std::uint64_t seed = seeds[i % seeds.size()];
                DensityMatrix rho = build_state(config.state, config.n_qubits, seed);
                HltPointResult res = run_hlt_point(rho, config.k, l, m, seed, fopt);
                row.fields = {{"l", std::to_string(l)},
                              {"m", std::to_string(m)},
                              {"seed", std::to_string(seed)},
                              {"fidelity", format_double(res.fidelity_truth)},
                              {"loss", format_double(res.loss)},
                              {"iterations", std::to_string(res.iterations)},
                              {"converged", res.converged ? "1" : "0"},
                              {"smallest_sv", format_double(res.smallest_sv)}};
            });
            break;
        }
        case ExperimentKind::qst_sweep: {
            std::vector<std::string> keys;
            for (long long m : config.m_grid)
                for (auto s : seeds)
                    keys.push_back("m=" + std::to_string(m) + ";seed=" + std::to_string(s));
            grid_run(record, options, keys, [&](std::size_t i, RunRow& row) {
                long long m = config.m_grid[i / seeds.size()];
                std::uint64_t seed = seeds[i % seeds.size()];
                DensityMatrix rho = build_state(config.state, config.n_qubits, seed);
                MeasurementPlan plan = build_qst_plan_total(config.n_qubits, m);
                MeasurementDataset data =
                    m > 0 ? sample(rho, plan, seed) : exact_dataset(rho, plan);
                DensityMatrix est = full_qst(data);
                row.fields = {{"m", std::to_string(m)},
                              {"seed", std::to_string(seed)},
                              {"fidelity", format_double(fidelity(est, rho))}};
            });
            break;
        }
        case ExperimentKind::eigen_recovery: {
            std::vector<std::string> keys;
            for (int l : config.l_grid)
                for (long long m : config.m_grid)
                    for (auto s : seeds)
                        keys.push_back("l=" + std::to_string(l) + ";m=" + std::to_string(m) +
                                       ";seed=" + std::to_string(s));
            grid_run(record, options, keys, [&](std::size_t i, RunRow& row) {
                int l = config.l_grid[i / (config.m_grid.size() * seeds.size())];
                long long m = config.m_grid[(i / seeds.size()) % config.m_grid.size()];
                std::uint64_t seed = seeds[i % seeds.size()];
                DensityMatrix rho = build_state(config.state, config.n_qubits, seed);
                HltPointResult res = run_hlt_point(rho, config.k, l, m, seed, fopt);
                auto mu = top_eigenvalues(res.state, 4);
                auto exact = top_eigenvalues(rho, 4);
                row.fields = {{"l", std::to_string(l)},
                              {"m", std::to_string(m)},
                              {"seed", std::to_string(seed)}};
                for (int j = 0; j < 4; ++j) {
                    row.fields.emplace_back("mu" + std::to_string(j + 1), format_double(mu[j]));
                    row.fields.emplace_back("exact" + std::to_string(j + 1),
                                            format_double(exact[j]));
                }
            });
            break;
        }
        case ExperimentKind::error_oracle: {
            RunRow row;
            row.key = "oracle";
            try {
                std::uint64_t seed = seeds.empty() ? options.seed_base : seeds[0];
                OracleResult res = run_error_oracle(config.oracle_n, config.oracle_epsilons,
                                                    config.oracle_trials, {}, seed);
                row.fields = {{"samples", std::to_string(res.ratios.size())},
                              {"mean_ratio", format_double(res.mean)}};
            } catch (const std::exception& ex) {
                row.failed = true;
                row.fields.emplace_back("error", ex.what());
                ++record.failures;
            }
            if (!options.completed.count(row.key)) record.rows.push_back(std::move(row));
            break;
        }
        case ExperimentKind::subsystem_verify: {
            std::vector<std::string> keys;
            for (int l : config.l_grid)
                for (long long m : config.m_grid)
                    for (auto s : seeds)
                        keys.push_back("l=" + std::to_string(l) + ";m=" + std::to_string(m) +
                                       ";seed=" + std::to_string(s));
            grid_run(record, options, keys, [&](std::size_t i, RunRow& row) {
                int l = config.l_grid[i / (config.m_grid.size() * seeds.size())];
                long long m = config.m_grid[(i / seeds.size()) % config.m_grid.size()];
                std::uint64_t seed = seeds[i % seeds.size()];
                DensityMatrix rho = build_state(config.state, config.n_qubits, seed);
                HltPointResult res = run_hlt_point(rho, config.k, l, m, seed, fopt);
                double sum = 0.0;
                int windows = config.n_qubits - 2;
                for (int w = 0; w < windows; ++w) {
                    DensityMatrix win_qst =
                        subsystem_qst(rho, w, config.subsystem_shots, seed + 1000 + w);
                    sum += fidelity(partial_trace(res.state, w, 3), win_qst);
                }
                row.fields = {{"l", std::to_string(l)},
                              {"m", std::to_string(m)},
                              {"seed", std::to_string(seed)},
                              {"fidelity", format_double(res.fidelity_truth)},
                              {"avg_window_fidelity", format_double(sum / windows)}};
            });
            break;
        }
        case ExperimentKind::convergence: {
            if (config.m_grid.empty()) throw std::invalid_argument("m_grid required");
            long long m_max = *std::max_element(config.m_grid.begin(), config.m_grid.end());
            int l_max = config.l_grid.empty()
                            ? enumerate_local_basis(config.n_qubits, config.k).size()
                            : config.l_grid.back();
            std::vector<std::string> keys;
            for (long long m : config.m_grid)
                for (auto s : seeds)
                    keys.push_back("m=" + std::to_string(m) + ";seed=" + std::to_string(s));
            // reference fits at m_max, one per seed
            std::map<std::uint64_t, DensityMatrix> reference;
            grid_run(record, options, keys, [&](std::size_t i, RunRow& row) {
                long long m = config.m_grid[i / seeds.size()];
                std::uint64_t seed = seeds[i % seeds.size()];
                DensityMatrix rho = build_state(config.state, config.n_qubits, seed);
                if (!reference.count(seed)) {
                    reference.emplace(seed, run_hlt_point(rho, config.k, l_max, m_max,
                                                          seed + 500000, fopt)
                                                .state);
                }
                HltPointResult res = run_hlt_point(rho, config.k, l_max, m, seed, fopt);
                double infid = 1.0 - fidelity(res.state, reference.at(seed));
                row.fields = {{"m", std::to_string(m)},
                              {"seed", std::to_string(seed)},
                              {"infidelity_vs_mmax", format_double(infid)},
                              {"fidelity_truth", format_double(res.fidelity_truth)}};
            });
            break;
        }
        case ExperimentKind::ghz_study: {
            if (config.n_qubits < 3) throw std::invalid_argument("ghz-study needs n >= 3");
            DensityMatrix rho = build_state(StateSpec{StateSpec::Family::ghz_reduced, 0.0},
                                            config.n_qubits, 0);
            // null-space degeneracy of the exact constraint matrix
            RunRow diag;
            diag.key = "diagnostics";
            if (!options.completed.count(diag.key)) {
                try {
                    ConstraintMatrix km = build_constraint_matrix(rho, config.k);
                    SpectralCutoff full = svd_cutoff(km, km.cols_basis.size());
                    int null_count = 0;
                    for (int j = 0; j < full.singular_values.size(); ++j) {
                        if (full.singular_values[j] < 1e-10) ++null_count;
                    }
                    int z_only = 0;
                    for (const auto& p : km.cols_basis.elements) {
                        bool z = true;
                        for (char c : p.letters) {
                            if (c != 'I' && c != 'Z') z = false;
                        }
                        if (z) ++z_only;
                    }
                    diag.fields = {{"null_space_count", std::to_string(null_count)},
                                   {"z_only_strings", std::to_string(z_only)}};
                } catch (const std::exception& ex) {
                    diag.failed = true;
                    diag.fields.emplace_back("error", ex.what());
                    ++record.failures;
                }
                record.rows.push_back(std::move(diag));
            }
            std::vector<std::string> keys;
            for (int l : config.l_grid)
                for (long long m : config.m_grid)
                    for (auto s : seeds)
                        keys.push_back("l=" + std::to_string(l) + ";m=" + std::to_string(m) +
                                       ";seed=" + std::to_string(s));
            grid_run(record, options, keys, [&](std::size_t i, RunRow& row) {
                int l = config.l_grid[i / (config.m_grid.size() * seeds.size())];
                long long m = config.m_grid[(i / seeds.size()) % config.m_grid.size()];
                std::uint64_t seed = seeds[i % seeds.size()];
                HltPointResult res = run_hlt_point(rho, config.k, l, m, seed, fopt);
                double win = average_window_fidelity(res.state, rho);
                row.fields = {{"l", std::to_string(l)},
                              {"m", std::to_string(m)},
                              {"seed", std::to_string(seed)},
                              {"fidelity", format_double(res.fidelity_truth)},
                              {"avg_window_fidelity", format_double(win)}};
            });
            break;
        }
    }

    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

namespace {

std::string record_stem(const ExperimentConfig& config) {
    std::ostringstream os;
    os << to_string(config.kind) << "-" << std::hex << config_hash(config);
    return os.str();
}

}  // namespace

void write_record(const RunRecord& record, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::path csv_path = fs::path(out_dir) / (record_stem(record.config) + ".csv");
    bool fresh = !fs::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    if (!csv) throw std::runtime_error("cannot open " + csv_path.string());
    if (fresh) {
        csv << "config_hash,key,status";
        // header from the widest row (kind-specific rows like the ghz-study
        // diagnostics carry fewer fields than the grid rows)
        const RunRow* widest = nullptr;
        for (const auto& row : record.rows) {
            if (!widest || row.fields.size() > widest->fields.size()) widest = &row;
        }
        if (widest) {
            for (const auto& [name, value] : widest->fields) csv << "," << name;
        }
        csv << "\n";
    }
    for (const auto& row : record.rows) {
        csv << std::hex << record.hash << std::dec << ",\"" << row.key << "\","
            << (row.failed ? "failed" : "ok");
        for (const auto& [name, value] : row.fields) csv << "," << value;
        csv << "\n";
    }

    json manifest;
    manifest["artifact_version"] = "1.0";
    manifest["kind"] = to_string(record.config.kind);
    std::ostringstream hex_hash;
    hex_hash << std::hex << record.hash;
    manifest["config_hash"] = hex_hash.str();
    manifest["config"] = canonical_config(record.config);
    manifest["rows"] = record.rows.size();
    manifest["failures"] = record.failures;
    manifest["seconds"] = record.seconds;
    std::ofstream mf(fs::path(out_dir) / (record_stem(record.config) + ".json"));
    mf << manifest.dump(2) << "\n";
}

std::set<std::string> completed_keys(const ExperimentConfig& config,
                                     const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::set<std::string> keys;
    fs::path csv_path = fs::path(out_dir) / (record_stem(config) + ".csv");
    std::ifstream csv(csv_path);
    if (!csv) return keys;
    std::string line;
    std::getline(csv, line);  // header
    std::ostringstream hex_hash;
    hex_hash << std::hex << config_hash(config);
    while (std::getline(csv, line)) {
        auto first = line.find(',');
        if (first == std::string::npos) continue;
        if (line.substr(0, first) != hex_hash.str()) continue;
        auto q1 = line.find('"', first);
        auto q2 = line.find('"', q1 + 1);
        if (q1 == std::string::npos || q2 == std::string::npos) continue;
        // only completed (non-failed) points are skipped on resume
        if (line.find(",ok", q2) == q2 + 1) keys.insert(line.substr(q1 + 1, q2 - q1 - 1));
    }
    return keys;
}

}  // namespace hlt
