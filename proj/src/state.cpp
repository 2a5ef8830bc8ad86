#include "hlt/state.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hlt {

namespace {

void check_dense_limit(int n) {
    if (n > kDenseQubitLimit) {
        throw std::runtime_error("dense state above the qubit limit");
    }
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) {
    return 0.5 * (m + m.adjoint());
}

}  // namespace

DensityMatrix make_density_matrix(int n_qubits, Eigen::MatrixXcd m) {
    check_dense_limit(n_qubits);
    const std::int64_t dim = std::int64_t(1) << n_qubits;
    if (m.rows() != dim || m.cols() != dim) {
        throw std::invalid_argument("matrix dimension does not match n_qubits");
    }
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(m.trace().real() - 1.0) > 1e-10 || std::abs(m.trace().imag()) > 1e-10) {
        throw std::invalid_argument("density matrix trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(m),
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) {
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
    return DensityMatrix{n_qubits, std::move(m)};
}

HamiltonianOperator make_hamiltonian(OperatorBasis basis, Eigen::VectorXd coefficients) {
    if (coefficients.size() != basis.size()) {
        throw std::invalid_argument("coefficient count does not match basis size");
    }
    if (!coefficients.allFinite()) {
        throw std::invalid_argument("non-finite Hamiltonian coefficients");
    }
    return HamiltonianOperator{std::move(basis), std::move(coefficients)};
}

Eigen::MatrixXcd to_dense(const HamiltonianOperator& h) {
    check_dense_limit(h.basis.n_qubits);
    const std::int64_t dim = std::int64_t(1) << h.basis.n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < h.basis.size(); ++i) {
        double c = h.coefficients[i];
        if (c == 0.0) continue;
        PauliAction act = pauli_action(h.basis.elements[i]);
        for (std::int64_t k = 0; k < dim; ++k) {
            double sign = std::popcount(static_cast<std::uint64_t>(k) & act.sign_mask) % 2 ? -1.0 : 1.0;
            m(k ^ act.flip_mask, k) += c * act.prefactor * sign;
        }
    }
    return m;
}

DensityMatrix gibbs_state_dense(const Eigen::MatrixXcd& h, int n_qubits) {
    check_dense_limit(n_qubits);
    if (!h.allFinite()) throw std::invalid_argument("non-finite Hamiltonian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(h));
    Eigen::VectorXd w = es.eigenvalues();
    Eigen::VectorXd p = (-(w.array() - w.minCoeff())).exp();
    p /= p.sum();
    Eigen::MatrixXcd rho = es.eigenvectors() * p.asDiagonal() *
                           es.eigenvectors().adjoint();
    rho = hermitian_part(rho);
    return DensityMatrix{n_qubits, std::move(rho)};
}

DensityMatrix gibbs_state(const HamiltonianOperator& h) {
    return gibbs_state_dense(to_dense(h), h.basis.n_qubits);
}

HamiltonianOperator transverse_ising(int n) {
    if (n < 2) throw std::invalid_argument("transverse_ising needs n >= 2");
    OperatorBasis basis = enumerate_local_basis(n, 2);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
    for (int i = 0; i < basis.size(); ++i) {
        const std::string& w = basis.elements[i].letters;
        const PauliString& p = basis.elements[i];
        if (p.support_size() == 1 && w[p.support_start()] == 'Z') c[i] = 1.0;
        if (p.support_size() == 2 && p.support_span() == 2 &&
            w[p.support_start()] == 'X' && w[p.support_start() + 1] == 'X') {
            c[i] = 1.0;
        }
    }
    return HamiltonianOperator{std::move(basis), std::move(c)};
}

HamiltonianOperator ghz_hamiltonian(int m, double a) {
    if (m < 2) throw std::invalid_argument("ghz_hamiltonian needs m >= 2");
    if (a <= 0) throw std::invalid_argument("ghz_hamiltonian needs a > 0");
    OperatorBasis basis = enumerate_local_basis(m, 2);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
    for (int i = 0; i < basis.size(); ++i) {
        const std::string& w = basis.elements[i].letters;
        const PauliString& p = basis.elements[i];
        if (p.support_size() == 2 && p.support_span() == 2 &&
            w[p.support_start()] == 'Z' && w[p.support_start() + 1] == 'Z') {
            c[i] = -a;
        }
    }
    return HamiltonianOperator{std::move(basis), std::move(c)};
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.n_qubits != sigma.n_qubits) {
        throw std::invalid_argument("fidelity dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(rho.matrix));
    Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd sqrt_rho = es.eigenvectors() *
                                w.cwiseSqrt().asDiagonal() *
                                es.eigenvectors().adjoint();
    Eigen::MatrixXcd inner = sqrt_rho * sigma.matrix * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(hermitian_part(inner),
                                                        Eigen::EigenvaluesOnly);
    double tr = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    double f = tr * tr;
    return std::min(1.0, std::max(0.0, f));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep_start, int keep_len) {
    int n = rho.n_qubits;
    if (keep_len < 1 || keep_start < 0 || keep_start + keep_len > n) {
        throw std::invalid_argument("keep range must be a non-empty contiguous subrange");
    }
    int n_left = keep_start;
    int n_right = n - keep_start - keep_len;
    const std::int64_t dk = std::int64_t(1) << keep_len;
    const std::int64_t dl = std::int64_t(1) << n_left;
    const std::int64_t dr = std::int64_t(1) << n_right;
    Eigen::MatrixXcd red = Eigen::MatrixXcd::Zero(dk, dk);
    for (std::int64_t l = 0; l < dl; ++l) {
        for (std::int64_t a = 0; a < dk; ++a) {
            for (std::int64_t b = 0; b < dk; ++b) {
                std::complex<double> acc(0, 0);
                std::int64_t ia = (l << (keep_len + n_right)) | (a << n_right);
                std::int64_t ib = (l << (keep_len + n_right)) | (b << n_right);
                for (std::int64_t r = 0; r < dr; ++r) {
                    acc += rho.matrix(ia | r, ib | r);
                }
                red(a, b) += acc;
            }
        }
    }
    return DensityMatrix{keep_len, std::move(red)};
}

std::vector<double> top_eigenvalues(const DensityMatrix& rho, int count) {
    if (count < 1 || count > rho.dim()) {
        throw std::invalid_argument("eigenvalue count out of range");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(rho.matrix),
                                                       Eigen::EigenvaluesOnly);
    Eigen::VectorXd w = es.eigenvalues();  // ascending
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = w[w.size() - 1 - i];
    return out;
}

Eigen::MatrixXcd extract_gh(const DensityMatrix& rho, double floor) {
    if (floor <= 0) throw std::invalid_argument("eigenvalue floor must be positive");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(rho.matrix));
    Eigen::VectorXd w = es.eigenvalues().cwiseMax(floor);
    Eigen::MatrixXcd h = -(es.eigenvectors() * w.array().log().matrix().asDiagonal() *
                           es.eigenvectors().adjoint());
    h = hermitian_part(h);
    std::complex<double> tr = h.trace();
    h -= (tr / static_cast<double>(h.rows())) *
         Eigen::MatrixXcd::Identity(h.rows(), h.cols());
    return h;
}

namespace {

void classify_weight(const PauliString& p, double c2, LocalityWeight& w) {
    int t = p.support_size();
    int span = p.support_span();
    char first = t > 0 ? p.letters[p.support_start()] : 'I';
    if (t == 1) {
        if (first == 'Z') w.one_classical += c2;
        else w.one_quantum += c2;
    } else if (t == 2 && span == 2) {
        char second = p.letters[p.support_start() + 1];
        if (first == 'Z' && second == 'Z') w.two_classical += c2;
        else w.two_quantum += c2;
    } else {
        w.higher += c2;
    }
}

void normalize_weight(LocalityWeight& w) {
    double total = w.one_classical + w.two_classical + w.one_quantum +
                   w.two_quantum + w.higher;
    if (total <= 0) return;
    w.one_classical /= total;
    w.two_classical /= total;
    w.one_quantum /= total;
    w.two_quantum /= total;
    w.higher /= total;
}

}  // namespace

PauliDecomposition pauli_decompose(const Eigen::MatrixXcd& h, int n_qubits) {
    check_dense_limit(n_qubits);
    const std::int64_t dim = std::int64_t(1) << n_qubits;
    if (h.rows() != dim || h.cols() != dim) {
        throw std::invalid_argument("operator dimension mismatch");
    }
    PauliDecomposition out;
    static const char kLetters[4] = {'I', 'X', 'Y', 'Z'};
    std::string w(n_qubits, 'I');
    // iterate all 4^n words, skipping the identity
    std::vector<int> digits(n_qubits, 0);
    std::int64_t total = 1;
    for (int i = 0; i < n_qubits; ++i) total *= 4;
    for (std::int64_t idx = 1; idx < total; ++idx) {
        // increment base-4 counter
        for (int i = n_qubits - 1; i >= 0; --i) {
            if (++digits[i] < 4) break;
            digits[i] = 0;
        }
        for (int i = 0; i < n_qubits; ++i) w[i] = kLetters[digits[i]];
        PauliString p(n_qubits, w);
        double c = expectation(p, h) / static_cast<double>(dim);  // Tr(P h)/2^n
        if (std::abs(c) > 1e-12) out.terms.emplace_back(w, c);
        classify_weight(p, c * c, out.weight);
    }
    normalize_weight(out.weight);
    return out;
}

PauliDecomposition pauli_decompose(const Eigen::MatrixXcd& h, const OperatorBasis& basis) {
    check_dense_limit(basis.n_qubits);
    const std::int64_t dim = std::int64_t(1) << basis.n_qubits;
    if (h.rows() != dim || h.cols() != dim) {
        throw std::invalid_argument("operator dimension mismatch");
    }
    PauliDecomposition out;
    for (const PauliString& p : basis.elements) {
        double c = expectation(p, h) / static_cast<double>(dim);
        if (std::abs(c) > 1e-12) out.terms.emplace_back(p.letters, c);
        classify_weight(p, c * c, out.weight);
    }
    normalize_weight(out.weight);
    return out;
}

DensityMatrix ghz_pure(int n) {
    check_dense_limit(n);
    if (n < 1) throw std::invalid_argument("n must be positive");
    const std::int64_t dim = std::int64_t(1) << n;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(dim - 1) = 1.0 / std::sqrt(2.0);
    return DensityMatrix{n, psi * psi.adjoint()};
}

DensityMatrix maximally_mixed(int n) {
    check_dense_limit(n);
    const std::int64_t dim = std::int64_t(1) << n;
    return DensityMatrix{n, Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim)};
}

void save_density_matrix(std::ostream& os, const DensityMatrix& rho) {
    os << "hlt-density 1\n" << rho.n_qubits << "\n";
    char buf[64];
    for (std::int64_t i = 0; i < rho.dim(); ++i) {
        for (std::int64_t j = 0; j < rho.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%a %a", rho.matrix(i, j).real(),
                          rho.matrix(i, j).imag());
            os << buf << (j + 1 == rho.dim() ? '\n' : ' ');
        }
    }
}

DensityMatrix load_density_matrix(std::istream& is) {
    std::string magic;
    int version = 0, n = 0;
    is >> magic >> version >> n;
    if (magic != "hlt-density" || version != 1) {
        throw std::runtime_error("bad density matrix header");
    }
    check_dense_limit(n);
    const std::int64_t dim = std::int64_t(1) << n;
    Eigen::MatrixXcd m(dim, dim);
    for (std::int64_t i = 0; i < dim; ++i) {
        for (std::int64_t j = 0; j < dim; ++j) {
            std::string re, im;
            if (!(is >> re >> im)) throw std::runtime_error("truncated density matrix file");
            m(i, j) = std::complex<double>(std::strtod(re.c_str(), nullptr),
                                           std::strtod(im.c_str(), nullptr));
        }
    }
    return DensityMatrix{n, std::move(m)};
}

}  // namespace hlt
