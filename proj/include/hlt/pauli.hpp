#ifndef HLT_PAULI_HPP
#define HLT_PAULI_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hlt {

// Largest system for which dense 2^n x 2^n realizations are allowed.
inline constexpr int kDenseQubitLimit = 12;

// A word over {I,X,Y,Z} on a 1D open chain. Qubit 0 is the leftmost letter
// and the most significant bit of the computational-basis index.
struct PauliString {
    int n_qubits = 0;
    std::string letters;

    PauliString() = default;
    PauliString(int n, std::string word);

    static PauliString identity(int n);
    static PauliString single(int n, int site, char letter);

    bool is_identity() const;
    int support_start() const;  // first non-I site, -1 for identity
    int support_end() const;    // one past last non-I site, 0 for identity
    int support_size() const;   // number of non-I sites
    int support_span() const;   // support_end - support_start

    bool operator==(const PauliString& o) const {
        return n_qubits == o.n_qubits && letters == o.letters;
    }
};

// A real multiple of a Pauli string. i[A,B] is Hermitian, so coefficients
// stay real.
struct ScaledPauli {
    double coefficient = 0.0;
    PauliString string;
};

// Ordered list of Pauli strings whose support is a fully non-I contiguous
// window of size 1..max_locality. Ordering: support start, then support
// length, then lexicographic letters. The identity never appears.
struct OperatorBasis {
    int n_qubits = 0;
    int max_locality = 0;
    std::vector<PauliString> elements;

    int size() const { return static_cast<int>(elements.size()); }
    // Index of a letter word in the basis, -1 if absent.
    int index_of(const std::string& word) const;
};

OperatorBasis enumerate_local_basis(int n_qubits, int max_locality);

struct PauliProduct {
    std::complex<double> phase;  // one of {+1,-1,+i,-i}
    PauliString string;
};

// dense(a)*dense(b) = phase * dense(string)
PauliProduct pauli_product(const PauliString& a, const PauliString& b);

// i[dense(a),dense(b)] = coefficient * dense(string), coefficient in {+2,-2}.
// Absent when a and b commute.
std::optional<ScaledPauli> commutator_i(const PauliString& a,
                                        const PauliString& b);

// Sparse column action: P e_k = prefactor * (-1)^popcount(k & sign_mask)
// * e_{k ^ flip_mask}.
struct PauliAction {
    std::uint64_t flip_mask = 0;
    std::uint64_t sign_mask = 0;
    std::complex<double> prefactor{1.0, 0.0};
};

PauliAction pauli_action(const PauliString& p);

Eigen::MatrixXcd to_dense(const PauliString& p);

// Tr(dense(p) * rho). Throws if the imaginary part exceeds 1e-8.
double expectation(const PauliString& p, const Eigen::MatrixXcd& rho);

}  // namespace hlt

#endif  // HLT_PAULI_HPP
