#include "hlt/pauli.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace hlt {

namespace {

bool valid_letter(char c) {
    return c == 'I' || c == 'X' || c == 'Y' || c == 'Z';
}

// Single-site product table: a*b = phase * c with phase a power of i.
// Returns (phase, letter).
std::pair<std::complex<double>, char> site_product(char a, char b) {
    using C = std::complex<double>;
    if (a == 'I') return {C(1, 0), b};
    if (b == 'I') return {C(1, 0), a};
    if (a == b) return {C(1, 0), 'I'};
    // cyclic: XY=iZ, YZ=iX, ZX=iY; reversed order picks up a minus sign
    auto cyc = [](char x, char y) -> char {
        if ((x == 'X' && y == 'Y') || (x == 'Y' && y == 'X')) return 'Z';
        if ((x == 'Y' && y == 'Z') || (x == 'Z' && y == 'Y')) return 'X';
        return 'Y';
    };
    bool forward = (a == 'X' && b == 'Y') || (a == 'Y' && b == 'Z') ||
                   (a == 'Z' && b == 'X');
    return {forward ? std::complex<double>(0, 1)
                    : std::complex<double>(0, -1),
            cyc(a, b)};
}

void check_same_system(const PauliString& a, const PauliString& b) {
    if (a.n_qubits != b.n_qubits) {
        throw std::invalid_argument("Pauli strings act on different numbers of qubits");
    }
}

}  // namespace

PauliString::PauliString(int n, std::string word) : n_qubits(n), letters(std::move(word)) {
    if (n <= 0) throw std::invalid_argument("n_qubits must be positive");
    if (static_cast<int>(letters.size()) != n) {
        throw std::invalid_argument("letter word length does not match n_qubits");
    }
    for (char c : letters) {
        if (!valid_letter(c)) throw std::invalid_argument("invalid Pauli letter");
    }
}

PauliString PauliString::identity(int n) { return PauliString(n, std::string(n, 'I')); }

PauliString PauliString::single(int n, int site, char letter) {
    if (site < 0 || site >= n) throw std::invalid_argument("site out of range");
    std::string w(n, 'I');
    w[site] = letter;
    return PauliString(n, w);
}

bool PauliString::is_identity() const {
    return letters.find_first_not_of('I') == std::string::npos;
}

int PauliString::support_start() const {
    auto p = letters.find_first_not_of('I');
    return p == std::string::npos ? -1 : static_cast<int>(p);
}

int PauliString::support_end() const {
    auto p = letters.find_last_not_of('I');
    return p == std::string::npos ? 0 : static_cast<int>(p) + 1;
}

int PauliString::support_size() const {
    int t = 0;
    for (char c : letters) t += (c != 'I');
    return t;
}

int PauliString::support_span() const {
    int s = support_start();
    return s < 0 ? 0 : support_end() - s;
}

int OperatorBasis::index_of(const std::string& word) const {
    for (int i = 0; i < size(); ++i) {
        if (elements[i].letters == word) return i;
    }
    return -1;
}

OperatorBasis enumerate_local_basis(int n_qubits, int max_locality) {
    if (n_qubits < 1) throw std::invalid_argument("n_qubits must be positive");
    if (max_locality < 1 || max_locality > n_qubits) {
        throw std::invalid_argument("max_locality must be in [1, n_qubits]");
    }
    OperatorBasis basis;
    basis.n_qubits = n_qubits;
    basis.max_locality = max_locality;
    static const char kLetters[3] = {'X', 'Y', 'Z'};
    for (int start = 0; start < n_qubits; ++start) {
        for (int len = 1; len <= max_locality && start + len <= n_qubits; ++len) {
            // all 3^len fully non-I windows, lexicographic
            int count = 1;
            for (int i = 0; i < len; ++i) count *= 3;
            for (int idx = 0; idx < count; ++idx) {
                std::string w(n_qubits, 'I');
                int rem = idx;
                for (int i = len - 1; i >= 0; --i) {
                    w[start + i] = kLetters[rem % 3];
                    rem /= 3;
                }
                basis.elements.emplace_back(n_qubits, std::move(w));
            }
        }
    }
    return basis;
}

PauliProduct pauli_product(const PauliString& a, const PauliString& b) {
    check_same_system(a, b);
    std::complex<double> phase(1, 0);
    std::string out(a.n_qubits, 'I');
    for (int i = 0; i < a.n_qubits; ++i) {
        auto [ph, c] = site_product(a.letters[i], b.letters[i]);
        phase *= ph;
        out[i] = c;
    }
    return {phase, PauliString(a.n_qubits, std::move(out))};
}

std::optional<ScaledPauli> commutator_i(const PauliString& a, const PauliString& b) {
    check_same_system(a, b);
    int anticommuting = 0;
    for (int i = 0; i < a.n_qubits; ++i) {
        char x = a.letters[i], y = b.letters[i];
        if (x != 'I' && y != 'I' && x != y) ++anticommuting;
    }
    if (anticommuting % 2 == 0) return std::nullopt;
    // AB = -BA, so i[A,B] = 2i * phase * C; phase is +-i here, which makes
    // the coefficient real.
    auto prod = pauli_product(a, b);
    std::complex<double> coeff = std::complex<double>(0, 2) * prod.phase;
    return ScaledPauli{coeff.real(), std::move(prod.string)};
}

PauliAction pauli_action(const PauliString& p) {
    PauliAction act;
    int n = p.n_qubits;
    int y_count = 0;
    for (int q = 0; q < n; ++q) {
        std::uint64_t bit = std::uint64_t(1) << (n - 1 - q);
        switch (p.letters[q]) {
            case 'X':
                act.flip_mask |= bit;
                break;
            case 'Y':
                act.flip_mask |= bit;
                act.sign_mask |= bit;
                ++y_count;
                break;
            case 'Z':
                act.sign_mask |= bit;
                break;
            default:
                break;
        }
    }
    static const std::complex<double> kIPow[4] = {
        {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    act.prefactor = kIPow[y_count % 4];
    return act;
}

Eigen::MatrixXcd to_dense(const PauliString& p) {
    if (p.n_qubits > kDenseQubitLimit) {
        throw std::runtime_error("dense realization above the qubit limit");
    }
    const std::int64_t dim = std::int64_t(1) << p.n_qubits;
    PauliAction act = pauli_action(p);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::int64_t k = 0; k < dim; ++k) {
        double sign = std::popcount(static_cast<std::uint64_t>(k) & act.sign_mask) % 2 ? -1.0 : 1.0;
        m(k ^ act.flip_mask, k) = act.prefactor * sign;
    }
    return m;
}

double expectation(const PauliString& p, const Eigen::MatrixXcd& rho) {
    const std::int64_t dim = std::int64_t(1) << p.n_qubits;
    if (rho.rows() != dim || rho.cols() != dim) {
        throw std::invalid_argument("density matrix dimension mismatch");
    }
    PauliAction act = pauli_action(p);
    std::complex<double> tr(0, 0);
    for (std::int64_t k = 0; k < dim; ++k) {
        double sign = std::popcount(static_cast<std::uint64_t>(k) & act.sign_mask) % 2 ? -1.0 : 1.0;
        tr += act.prefactor * sign * rho(k, k ^ act.flip_mask);
    }
    if (std::abs(tr.imag()) > 1e-8) {
        throw std::runtime_error("expectation value has a non-negligible imaginary part");
    }
    return tr.real();
}

}  // namespace hlt
