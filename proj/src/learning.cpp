#include "hlt/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/SVD>

namespace hlt {

namespace {

// Shared skeleton: walks all (A_q, S_m) pairs with a nonzero commutator and
// asks `eval` for <R>.
template <typename Eval>
ConstraintMatrix build_matrix(int n, int k, Eval&& eval) {
    if (k < 1 || k > n) throw std::invalid_argument("locality k out of range");
    ConstraintMatrix km;
    km.cols_basis = enumerate_local_basis(n, k);
    km.rows_basis = enumerate_local_basis(n, std::min(k + 1, n));
    km.entries = Eigen::MatrixXd::Zero(km.rows_basis.size(), km.cols_basis.size());
    std::unordered_map<std::string, double> cache;
    for (int q = 0; q < km.rows_basis.size(); ++q) {
        const PauliString& a = km.rows_basis.elements[q];
        for (int m = 0; m < km.cols_basis.size(); ++m) {
            auto comm = commutator_i(a, km.cols_basis.elements[m]);
            if (!comm) continue;
            auto [it, fresh] = cache.try_emplace(comm->string.letters, 0.0);
            if (fresh) it->second = eval(comm->string);
            km.entries(q, m) = comm->coefficient * it->second;
        }
    }
    return km;
}

}  // namespace

ConstraintMatrix build_constraint_matrix(const DensityMatrix& rho, int k) {
    ConstraintMatrix km = build_matrix(rho.n_qubits, k, [&](const PauliString& r) {
        return expectation(r, rho.matrix);
    });
    km.provenance = {Provenance::Kind::exact, 0, 0};
    return km;
}

ConstraintMatrix build_constraint_matrix(const MeasurementDataset& data, int k) {
    ConstraintMatrix km = build_matrix(data.n_qubits, k, [&](const PauliString& r) {
        return estimate_pauli_expectation(data, r).value;
    });
    long long total = 0;
    for (long long s : data.plan.shots) total += s;
    km.provenance = {data.mode == MeasurementDataset::Mode::exact
                         ? Provenance::Kind::exact
                         : Provenance::Kind::dataset,
                     data.seed, total};
    return km;
}

SpectralCutoff svd_cutoff(const ConstraintMatrix& km, int l) {
    const int m = km.cols_basis.size();
    if (l < 1 || l > m) throw std::invalid_argument("cutoff l out of range");
    SpectralCutoff cut;
    cut.l = l;
    cut.singular_values.resize(l);
    cut.right_vectors.resize(m, l);
    if (km.entries.norm() == 0.0) {
        // degenerate case: canonical coordinate vectors
        cut.singular_values.setZero();
        cut.right_vectors.setZero();
        for (int i = 0; i < l; ++i) cut.right_vectors(i, i) = 1.0;
        return cut;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(km.entries, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();  // descending
    const int total = static_cast<int>(sv.size());
    for (int i = 0; i < l; ++i) {
        int src = total - 1 - i;  // ascending order
        cut.singular_values[i] = sv[src];
        Eigen::VectorXd v = svd.matrixV().col(src);
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        cut.right_vectors.col(i) = v;
    }
    return cut;
}

double estimate_reconstruction_error(const SpectralCutoff& full_spectrum, int l,
                                     double epsilon) {
    const int m = static_cast<int>(full_spectrum.singular_values.size());
    if (full_spectrum.l != m || full_spectrum.right_vectors.rows() != m) {
        throw std::invalid_argument("full spectrum required");
    }
    if (l < 1 || l > m) throw std::invalid_argument("l out of range");
    if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
    double sum = 0.0;
    for (int i = l; i < m; ++i) {
        double lam = full_spectrum.singular_values[i];
        if (lam < 1e-14) return std::numeric_limits<double>::infinity();
        sum += 1.0 / (lam * lam);
    }
    return epsilon * std::sqrt(sum);
}

HamiltonianOperator random_local_hamiltonian(int n, int k, std::mt19937_64& rng) {
    OperatorBasis basis = enumerate_local_basis(n, k);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd c(basis.size());
    for (int i = 0; i < c.size(); ++i) c[i] = normal(rng);
    c.normalize();
    return HamiltonianOperator{std::move(basis), std::move(c)};
}

OracleResult run_error_oracle(const std::vector<int>& n_range,
                              const std::vector<double>& epsilons, int trials,
                              const std::vector<int>& l_grid, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    OracleResult result;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int n : n_range) {
        for (int trial = 0; trial < trials; ++trial) {
            HamiltonianOperator h = random_local_hamiltonian(n, 2, rng);
            Eigen::VectorXd v0 = h.coefficients;  // unit norm
            DensityMatrix rho = gibbs_state(h);
            ConstraintMatrix km = build_constraint_matrix(rho, 2);
            const int m = km.cols_basis.size();
            for (double eps : epsilons) {
                Eigen::MatrixXd noisy = km.entries;
                for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
                    for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
                        noisy(i, j) += eps * normal(rng);
                    }
                }
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(noisy, Eigen::ComputeThinV);
                Eigen::VectorXd lam(m);
                Eigen::MatrixXd vr(m, m);
                for (int i = 0; i < m; ++i) {
                    lam[i] = svd.singularValues()[m - 1 - i];  // ascending
                    vr.col(i) = svd.matrixV().col(m - 1 - i);
                }
                Eigen::VectorXd overlaps = vr.transpose() * v0;
                std::vector<int> grid = l_grid;
                if (grid.empty()) {
                    for (int l = 1; l < m; ++l) grid.push_back(l);
                }
                for (int l : grid) {
                    if (l < 1 || l >= m) continue;
                    Eigen::VectorXd proj =
                        vr.leftCols(l) * overlaps.head(l);
                    double num = (proj - v0).norm();
                    double tail = 0.0;
                    for (int i = l; i < m; ++i) tail += 1.0 / (lam[i] * lam[i]);
                    double den = eps * std::sqrt(tail);
                    if (den > 0) result.ratios.push_back(num / den);
                }
            }
        }
    }
    double sum = 0.0;
    for (double r : result.ratios) sum += r;
    result.mean = result.ratios.empty() ? 0.0 : sum / result.ratios.size();
    return result;
}

void write_constraint_matrix(std::ostream& os, const ConstraintMatrix& km) {
    os << "hlt-constraint-matrix " << km.rows_basis.size() << " "
       << km.cols_basis.size() << "\n";
    os << "#";
    for (const auto& s : km.cols_basis.elements) os << " " << s.letters;
    os << "\n";
    for (int q = 0; q < km.rows_basis.size(); ++q) {
        os << km.rows_basis.elements[q].letters;
        for (int m = 0; m < km.cols_basis.size(); ++m) {
            os << " " << km.entries(q, m);
        }
        os << "\n";
    }
}

}  // namespace hlt
