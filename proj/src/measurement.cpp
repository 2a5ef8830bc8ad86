#include "hlt/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace hlt {

namespace {

const std::complex<double> kI(0, 1);

// Columns are the eigenvectors of the measured Pauli, +1 eigenvector first.
Eigen::Matrix2cd basis_unitary(char letter) {
    Eigen::Matrix2cd u;
    const double s = 1.0 / std::sqrt(2.0);
    switch (letter) {
        case 'Z':
            u.setIdentity();
            break;
        case 'X':
            u << s, s, s, -s;
            break;
        case 'Y':
            u << s, s, kI * s, -kI * s;
            break;
        default:
            throw std::invalid_argument("basis letters must be X, Y or Z");
    }
    return u;
}

// M <- (I x g x I) M, mixing row pairs that differ at `qubit`.
void apply_gate_rows(Eigen::MatrixXcd& m, int n, int qubit, const Eigen::Matrix2cd& g) {
    const std::int64_t dim = m.rows();
    const std::int64_t mask = std::int64_t(1) << (n - 1 - qubit);
    for (std::int64_t i0 = 0; i0 < dim; ++i0) {
        if (i0 & mask) continue;
        const std::int64_t i1 = i0 | mask;
        for (std::int64_t c = 0; c < m.cols(); ++c) {
            std::complex<double> a = m(i0, c), b = m(i1, c);
            m(i0, c) = g(0, 0) * a + g(0, 1) * b;
            m(i1, c) = g(1, 0) * a + g(1, 1) * b;
        }
    }
}

// M <- M (I x g x I), mixing column pairs that differ at `qubit`.
void apply_gate_cols(Eigen::MatrixXcd& m, int n, int qubit, const Eigen::Matrix2cd& g) {
    const std::int64_t dim = m.cols();
    const std::int64_t mask = std::int64_t(1) << (n - 1 - qubit);
    for (std::int64_t c0 = 0; c0 < dim; ++c0) {
        if (c0 & mask) continue;
        const std::int64_t c1 = c0 | mask;
        for (std::int64_t r = 0; r < m.rows(); ++r) {
            std::complex<double> a = m(r, c0), b = m(r, c1);
            m(r, c0) = a * g(0, 0) + b * g(1, 0);
            m(r, c1) = a * g(0, 1) + b * g(1, 1);
        }
    }
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_plan_state(const DensityMatrix& rho, const MeasurementPlan& plan) {
    if (rho.n_qubits != plan.n_qubits) {
        throw std::invalid_argument("plan and state dimension mismatch");
    }
}

}  // namespace

MeasurementPlan build_overlapping_plan(int n_qubits, int k, long long total_shots) {
    if (n_qubits < 1) throw std::invalid_argument("n_qubits must be positive");
    if (k < 1 || 2 * k > 4) {
        throw std::invalid_argument("cell length 2k above the supported cap of 4");
    }
    if (total_shots < 0) throw std::invalid_argument("total_shots must be nonnegative");
    const int period = 2 * k;
    int n_bases = 1;
    for (int i = 0; i < period; ++i) n_bases *= 3;

    MeasurementPlan plan;
    plan.n_qubits = n_qubits;
    static const char kLetters[3] = {'X', 'Y', 'Z'};
    for (int j = 0; j < n_bases; ++j) {
        std::string pattern(period, 'X');
        int rem = j;
        for (int i = period - 1; i >= 0; --i) {
            pattern[i] = kLetters[rem % 3];
            rem /= 3;
        }
        std::string letters(n_qubits, 'X');
        for (int i = 0; i < n_qubits; ++i) letters[i] = pattern[i % period];
        plan.bases.push_back(BasisLabel{std::move(letters)});
    }
    const long long base = total_shots / n_bases;
    const long long extra = total_shots % n_bases;
    plan.shots.resize(n_bases);
    for (int j = 0; j < n_bases; ++j) plan.shots[j] = base + (j < extra ? 1 : 0);
    plan.underallocated = total_shots < n_bases;
    return plan;
}

Eigen::VectorXd basis_probabilities(const DensityMatrix& rho, const BasisLabel& basis) {
    const int n = rho.n_qubits;
    if (static_cast<int>(basis.letters.size()) != n) {
        throw std::invalid_argument("basis label length mismatch");
    }
    Eigen::MatrixXcd m = rho.matrix;
    for (int q = 0; q < n; ++q) {
        if (basis.letters[q] == 'Z') continue;
        Eigen::Matrix2cd u = basis_unitary(basis.letters[q]);
        apply_gate_rows(m, n, q, u.adjoint());
        apply_gate_cols(m, n, q, u);
    }
    return m.diagonal().real();
}

MeasurementDataset sample(const DensityMatrix& rho, const MeasurementPlan& plan,
                          std::uint64_t seed) {
    check_plan_state(rho, plan);
    MeasurementDataset data;
    data.plan = plan;
    data.n_qubits = rho.n_qubits;
    data.mode = MeasurementDataset::Mode::sampled;
    data.seed = seed;
    data.counts.resize(plan.bases.size());
    const std::int64_t dim = rho.dim();
    std::vector<double> cdf(dim);
    std::vector<long long> tally(dim);
    for (std::size_t b = 0; b < plan.bases.size(); ++b) {
        if (plan.shots[b] == 0) continue;
        Eigen::VectorXd p = basis_probabilities(rho, plan.bases[b]);
        double total = 0.0;
        for (std::int64_t s = 0; s < dim; ++s) {
            if (p[s] < -1e-9) {
                throw std::runtime_error("negative outcome probability beyond tolerance");
            }
            total += std::max(0.0, p[s]);
            cdf[s] = total;
        }
        std::fill(tally.begin(), tally.end(), 0);
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(b));
        for (long long shot = 0; shot < plan.shots[b]; ++shot) {
            double u = uniform01(rng) * total;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            std::int64_t s = std::min<std::int64_t>(it - cdf.begin(), dim - 1);
            ++tally[s];
        }
        for (std::int64_t s = 0; s < dim; ++s) {
            if (tally[s] > 0) {
                data.counts[b].emplace_back(static_cast<std::uint64_t>(s),
                                            static_cast<double>(tally[s]));
            }
        }
    }
    return data;
}

MeasurementDataset exact_dataset(const DensityMatrix& rho, const MeasurementPlan& plan) {
    check_plan_state(rho, plan);
    MeasurementDataset data;
    data.plan = plan;
    data.n_qubits = rho.n_qubits;
    data.mode = MeasurementDataset::Mode::exact;
    data.counts.resize(plan.bases.size());
    const std::int64_t dim = rho.dim();
    for (std::size_t b = 0; b < plan.bases.size(); ++b) {
        Eigen::VectorXd p = basis_probabilities(rho, plan.bases[b]);
        for (std::int64_t s = 0; s < dim; ++s) {
            double v = std::max(0.0, p[s]);
            if (v > 0) data.counts[b].emplace_back(static_cast<std::uint64_t>(s), v);
        }
    }
    return data;
}

PauliEstimate estimate_pauli_expectation(const MeasurementDataset& data,
                                         const PauliString& p) {
    if (p.n_qubits != data.n_qubits) {
        throw std::invalid_argument("observable dimension mismatch");
    }
    if (p.is_identity()) return {1.0, 0};
    const int n = data.n_qubits;
    double weighted_sum = 0.0;
    double weight_total = 0.0;
    long long samples = 0;
    int compatible = 0;
    for (std::size_t b = 0; b < data.plan.bases.size(); ++b) {
        const std::string& letters = data.plan.bases[b].letters;
        bool ok = true;
        for (int q = 0; q < n && ok; ++q) {
            if (p.letters[q] != 'I' && p.letters[q] != letters[q]) ok = false;
        }
        if (!ok) continue;
        ++compatible;
        const bool sampled = data.mode == MeasurementDataset::Mode::sampled;
        if (sampled && data.plan.shots[b] == 0) continue;
        double acc = 0.0, norm = 0.0;
        for (const auto& [outcome, value] : data.counts[b]) {
            int parity = 0;
            for (int q = 0; q < n; ++q) {
                if (p.letters[q] == 'I') continue;
                parity ^= static_cast<int>((outcome >> (n - 1 - q)) & 1u);
            }
            acc += (parity ? -value : value);
            norm += value;
        }
        if (norm <= 0) continue;
        if (sampled) {
            weighted_sum += acc;
            weight_total += norm;
            samples += static_cast<long long>(norm + 0.5);
        } else {
            weighted_sum += acc / norm;
            weight_total += 1.0;
        }
    }
    if (compatible == 0) {
        throw std::runtime_error("observable not covered by any basis in the plan");
    }
    if (weight_total <= 0) {
        throw std::runtime_error("observable has no recorded shots in the dataset");
    }
    return {weighted_sum / weight_total, samples};
}

void save_dataset(std::ostream& os, const MeasurementDataset& data) {
    os << "hlt-dataset 1\n";
    os << "n_qubits " << data.n_qubits << "\n";
    if (data.mode == MeasurementDataset::Mode::sampled) {
        os << "mode sampled " << data.seed << "\n";
    } else {
        os << "mode exact\n";
    }
    os << "bases " << data.plan.bases.size() << "\n";
    char buf[48];
    for (std::size_t b = 0; b < data.plan.bases.size(); ++b) {
        os << "basis " << data.plan.bases[b].letters << " " << data.plan.shots[b]
           << " " << data.counts[b].size() << "\n";
        for (const auto& [outcome, value] : data.counts[b]) {
            std::string bits(data.n_qubits, '0');
            for (int q = 0; q < data.n_qubits; ++q) {
                if ((outcome >> (data.n_qubits - 1 - q)) & 1u) bits[q] = '1';
            }
            if (data.mode == MeasurementDataset::Mode::sampled) {
                os << bits << ":" << static_cast<long long>(value + 0.5) << "\n";
            } else {
                std::snprintf(buf, sizeof(buf), "%a", value);
                os << bits << ":" << buf << "\n";
            }
        }
    }
}

MeasurementDataset load_dataset(std::istream& is) {
    std::string magic, key, mode;
    int version = 0;
    is >> magic >> version;
    if (magic != "hlt-dataset" || version != 1) {
        throw std::runtime_error("bad dataset header");
    }
    MeasurementDataset data;
    is >> key >> data.n_qubits;
    if (key != "n_qubits" || data.n_qubits < 1) throw std::runtime_error("bad dataset header");
    is >> key >> mode;
    if (key != "mode") throw std::runtime_error("bad dataset header");
    if (mode == "sampled") {
        data.mode = MeasurementDataset::Mode::sampled;
        is >> data.seed;
    } else if (mode == "exact") {
        data.mode = MeasurementDataset::Mode::exact;
    } else {
        throw std::runtime_error("unknown dataset mode");
    }
    std::size_t n_bases = 0;
    is >> key >> n_bases;
    if (key != "bases") throw std::runtime_error("bad dataset header");
    data.plan.n_qubits = data.n_qubits;
    data.counts.resize(n_bases);
    for (std::size_t b = 0; b < n_bases; ++b) {
        std::string letters;
        long long shots = 0;
        std::size_t records = 0;
        is >> key >> letters >> shots >> records;
        if (key != "basis" || static_cast<int>(letters.size()) != data.n_qubits) {
            throw std::runtime_error("bad basis record");
        }
        data.plan.bases.push_back(BasisLabel{letters});
        data.plan.shots.push_back(shots);
        for (std::size_t r = 0; r < records; ++r) {
            std::string entry;
            if (!(is >> entry)) throw std::runtime_error("truncated dataset");
            auto colon = entry.find(':');
            if (colon == std::string::npos) throw std::runtime_error("bad outcome record");
            std::uint64_t outcome = 0;
            for (std::size_t i = 0; i < colon; ++i) {
                outcome = (outcome << 1) | (entry[i] == '1' ? 1u : 0u);
            }
            double value = std::strtod(entry.c_str() + colon + 1, nullptr);
            data.counts[b].emplace_back(outcome, value);
        }
    }
    return data;
}

}  // namespace hlt
