#include "hlt/qst.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hlt {

namespace {

long long pow3(int n) {
    long long v = 1;
    for (int i = 0; i < n; ++i) v *= 3;
    return v;
}

}  // namespace

MeasurementPlan build_qst_plan(int n_qubits, long long shots_per_basis) {
    if (n_qubits < 1 || n_qubits > kQstQubitLimit) {
        throw std::invalid_argument("QST supports 1..6 qubits");
    }
    if (shots_per_basis < 0) throw std::invalid_argument("negative shot count");
    const long long n_bases = pow3(n_qubits);
    MeasurementPlan plan;
    plan.n_qubits = n_qubits;
    static const char kLetters[3] = {'X', 'Y', 'Z'};
    for (long long j = 0; j < n_bases; ++j) {
        std::string letters(n_qubits, 'X');
        long long rem = j;
        for (int i = n_qubits - 1; i >= 0; --i) {
            letters[i] = kLetters[rem % 3];
            rem /= 3;
        }
        plan.bases.push_back(BasisLabel{std::move(letters)});
        plan.shots.push_back(shots_per_basis);
    }
    plan.underallocated = shots_per_basis == 0;
    return plan;
}

MeasurementPlan build_qst_plan_total(int n_qubits, long long total_shots) {
    if (total_shots < 0) throw std::invalid_argument("negative shot count");
    return build_qst_plan(n_qubits, total_shots / pow3(n_qubits));
}

DensityMatrix full_qst(const MeasurementDataset& data) {
    const int n = data.n_qubits;
    if (n > kQstQubitLimit) throw std::invalid_argument("QST supports 1..6 qubits");
    if (static_cast<long long>(data.plan.bases.size()) != pow3(n)) {
        throw std::invalid_argument("dataset does not cover all 3^n bases");
    }
    const std::int64_t dim = std::int64_t(1) << n;
    Eigen::MatrixXcd est =
        Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
    // every non-identity Pauli word
    static const char kLetters[4] = {'I', 'X', 'Y', 'Z'};
    std::vector<int> digits(n, 0);
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) total *= 4;
    std::string word(n, 'I');
    for (std::int64_t idx = 1; idx < total; ++idx) {
        for (int i = n - 1; i >= 0; --i) {
            if (++digits[i] < 4) break;
            digits[i] = 0;
        }
        for (int i = 0; i < n; ++i) word[i] = kLetters[digits[i]];
        PauliString p(n, word);
        double value = estimate_pauli_expectation(data, p).value;
        if (value == 0.0) continue;
        PauliAction act = pauli_action(p);
        const double scale = value / static_cast<double>(dim);
        for (std::int64_t k = 0; k < dim; ++k) {
            double sign = std::popcount(static_cast<std::uint64_t>(k) & act.sign_mask) % 2
                              ? -1.0 : 1.0;
            est(k ^ act.flip_mask, k) += scale * act.prefactor * sign;
        }
    }
    est = 0.5 * (est + est.adjoint().eval());
    return project_physical(est);
}

DensityMatrix project_physical(const Eigen::MatrixXcd& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("non-square input");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
        throw std::invalid_argument("input is not Hermitian");
    }
    if (std::abs(h.trace().real() - 1.0) > 1e-8) {
        throw std::invalid_argument("input trace is not 1");
    }
    int n = 0;
    while ((std::int64_t(1) << n) < h.rows()) ++n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (h + h.adjoint()));
    Eigen::VectorXd w = es.eigenvalues();
    std::vector<bool> zeroed(w.size(), false);
    while (true) {
        int worst = -1;
        for (int i = 0; i < w.size(); ++i) {
            if (zeroed[i] || w[i] >= 0) continue;
            if (worst < 0 || w[i] < w[worst]) worst = i;
        }
        if (worst < 0) break;
        double deficit = w[worst];
        w[worst] = 0.0;
        zeroed[worst] = true;
        int remaining = 0;
        for (int i = 0; i < w.size(); ++i) {
            if (!zeroed[i] && w[i] != 0.0) ++remaining;
        }
        if (remaining == 0) break;
        for (int i = 0; i < w.size(); ++i) {
            if (!zeroed[i] && w[i] != 0.0) w[i] += deficit / remaining;
        }
    }
    double trace = w.sum();
    if (trace <= 0) throw std::runtime_error("projection produced an empty spectrum");
    w /= trace;
    Eigen::MatrixXcd rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
    rho = 0.5 * (rho + rho.adjoint().eval());
    return DensityMatrix{n, std::move(rho)};
}

DensityMatrix subsystem_qst(const DensityMatrix& rho_source, int window_start,
                            long long shots_per_basis, std::uint64_t seed) {
    if (window_start < 0 || window_start + 3 > rho_source.n_qubits) {
        throw std::invalid_argument("3-qubit window out of range");
    }
    DensityMatrix reduced = partial_trace(rho_source, window_start, 3);
    MeasurementPlan plan = build_qst_plan(3, shots_per_basis);
    MeasurementDataset data = shots_per_basis > 0 ? sample(reduced, plan, seed)
                                                  : exact_dataset(reduced, plan);
    return full_qst(data);
}

double average_window_fidelity(const DensityMatrix& candidate,
                               const DensityMatrix& reference) {
    if (candidate.n_qubits != reference.n_qubits) {
        throw std::invalid_argument("dimension mismatch");
    }
    if (candidate.n_qubits < 3) throw std::invalid_argument("need at least 3 qubits");
    double sum = 0.0;
    int windows = candidate.n_qubits - 2;
    for (int s = 0; s < windows; ++s) {
        sum += fidelity(partial_trace(candidate, s, 3), partial_trace(reference, s, 3));
    }
    return sum / windows;
}

}  // namespace hlt
