#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hlt/learning.hpp"

using namespace hlt;

namespace {

HamiltonianOperator embed(int n, int k, const std::string& word, double coeff) {
    OperatorBasis basis = enumerate_local_basis(n, k);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
    int idx = basis.index_of(word);
    REQUIRE(idx >= 0);
    c[idx] = coeff;
    return make_hamiltonian(std::move(basis), std::move(c));
}

DensityMatrix reduced_ghz(int n) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(1 << n, 1 << n);
    m(0, 0) = 0.5;
    m((1 << n) - 1, (1 << n) - 1) = 0.5;
    return make_density_matrix(n, std::move(m));
}

}  // namespace

TEST_CASE("constraint matrix shape and annihilation examples") {
    DensityMatrix rho = gibbs_state(embed(2, 2, "ZI", 1.0));
    ConstraintMatrix km = build_constraint_matrix(rho, 2);
    CHECK(km.cols_basis.size() == 15);  // 12N - 9 at N = 2
    int zi = km.cols_basis.index_of("ZI");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(km.cols_basis.size());
    e[zi] = 1.0;
    CHECK((km.entries * e).cwiseAbs().maxCoeff() < 1e-12);

    ConstraintMatrix mm = build_constraint_matrix(maximally_mixed(3), 2);
    CHECK(mm.entries.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(mm.rows_basis.size() >= mm.cols_basis.size());
}

TEST_CASE("TI null vector recovery at N=3") {
    HamiltonianOperator h = transverse_ising(3);
    ConstraintMatrix km = build_constraint_matrix(gibbs_state(h), 2);
    CHECK(km.rows_basis.size() == 39 * 3 - 63);
    CHECK(km.cols_basis.size() == 12 * 3 - 9);
    SpectralCutoff cut = svd_cutoff(km, 1);
    CHECK(cut.singular_values[0] <= 1e-10);
    Eigen::VectorXd v_true = h.coefficients.normalized();
    double cosine = std::abs(cut.right_vectors.col(0).dot(v_true));
    CHECK(cosine >= 1.0 - 1e-8);
}

TEST_CASE("structural zeros match the commutation test") {
    DensityMatrix rho = gibbs_state(transverse_ising(4));
    ConstraintMatrix km = build_constraint_matrix(rho, 2);
    for (int q = 0; q < km.rows_basis.size(); ++q) {
        for (int m = 0; m < km.cols_basis.size(); ++m) {
            if (!commutator_i(km.rows_basis.elements[q], km.cols_basis.elements[m])) {
                CHECK(km.entries(q, m) == 0.0);
            }
        }
    }
}

TEST_CASE("svd_cutoff vectors are orthonormal with matching norms") {
    DensityMatrix rho = gibbs_state(transverse_ising(4));
    ConstraintMatrix km = build_constraint_matrix(rho, 2);
    const int m = km.cols_basis.size();
    SpectralCutoff full = svd_cutoff(km, m);
    CHECK((full.right_vectors.transpose() * full.right_vectors -
           Eigen::MatrixXd::Identity(m, m))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    for (int i = 0; i < m; ++i) {
        CHECK(std::abs((km.entries * full.right_vectors.col(i)).norm() -
                       full.singular_values[i]) < 1e-8);
        if (i > 0) CHECK(full.singular_values[i] >= full.singular_values[i - 1]);
    }

    // K = 0 degenerate case: canonical coordinate vectors
    ConstraintMatrix zero = build_constraint_matrix(maximally_mixed(3), 2);
    SpectralCutoff cut = svd_cutoff(zero, 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(cut.right_vectors(i, i) == 1.0);
        CHECK(cut.right_vectors.col(i).cwiseAbs().sum() == 1.0);
    }

    CHECK_THROWS_AS(svd_cutoff(km, m + 1), std::invalid_argument);
}

TEST_CASE("reduced GHZ null space degeneracy") {
    ConstraintMatrix km = build_constraint_matrix(reduced_ghz(5), 2);
    SpectralCutoff full = svd_cutoff(km, km.cols_basis.size());
    int z_only = 0;
    for (const auto& p : km.cols_basis.elements) {
        bool z = true;
        for (char c : p.letters) {
            if (c != 'I' && c != 'Z') z = false;
        }
        if (z) ++z_only;
    }
    int null_count = 0;
    for (int i = 0; i < full.singular_values.size(); ++i) {
        if (full.singular_values[i] < 1e-10) ++null_count;
    }
    CHECK(null_count >= z_only);
}

TEST_CASE("reconstruction error estimate") {
    // all singular values 1, M - l = 4, eps = 0.1 -> 0.2
    SpectralCutoff flat;
    flat.l = 10;
    flat.singular_values = Eigen::VectorXd::Ones(10);
    flat.right_vectors = Eigen::MatrixXd::Identity(10, 10);
    CHECK(estimate_reconstruction_error(flat, 6, 0.1) == doctest::Approx(0.2));
    CHECK(estimate_reconstruction_error(flat, 10, 0.1) == doctest::Approx(0.0));

    // pinned regression value for the exact TI N=5 spectrum
    ConstraintMatrix km = build_constraint_matrix(gibbs_state(transverse_ising(5)), 2);
    SpectralCutoff full = svd_cutoff(km, km.cols_basis.size());
    CHECK(estimate_reconstruction_error(full, 20, 1e-3) ==
          doctest::Approx(0.00245279299071).epsilon(1e-9));

    // exact TI spectrum has a true null direction, so l = 1 hits the
    // ill-conditioned-tail signal
    CHECK(std::isinf(estimate_reconstruction_error(full, 1, 1e-3)) ==
          (full.singular_values[1] < 1e-14));

    CHECK_THROWS_AS(estimate_reconstruction_error(flat, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_reconstruction_error(svd_cutoff(km, 5), 2, 0.1),
                    std::invalid_argument);
}

TEST_CASE("exact null property on random 2-local Gibbs states") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        int n = 4 + trial % 3;
        HamiltonianOperator h = random_local_hamiltonian(n, 2, rng);
        ConstraintMatrix km = build_constraint_matrix(gibbs_state(h), 2);
        CHECK((km.entries * h.coefficients).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("noise scaling of the smallest singular value") {
    DensityMatrix rho = gibbs_state(transverse_ising(4));
    std::vector<long long> ms = {10000, 40000, 160000};
    std::vector<double> log_sv;
    for (long long m : ms) {
        double acc = 0;
        const int n_seeds = 4;
        for (int s = 0; s < n_seeds; ++s) {
            MeasurementDataset data =
                sample(rho, build_overlapping_plan(4, 2, m), 100 * s + 1);
            ConstraintMatrix km = build_constraint_matrix(data, 2);
            acc += svd_cutoff(km, 1).singular_values[0];
        }
        log_sv.push_back(std::log(acc / n_seeds));
    }
    double slope = (log_sv.back() - log_sv.front()) /
                   (std::log(double(ms.back())) - std::log(double(ms.front())));
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));
}

TEST_CASE("zero-noise oracle projection is exact") {
    std::mt19937_64 rng(5);
    HamiltonianOperator h = random_local_hamiltonian(5, 2, rng);
    ConstraintMatrix km = build_constraint_matrix(gibbs_state(h), 2);
    SpectralCutoff cut = svd_cutoff(km, 1);
    Eigen::VectorXd v0 = h.coefficients;
    Eigen::VectorXd proj = cut.right_vectors * (cut.right_vectors.transpose() * v0);
    CHECK((proj - v0).norm() < 1e-7);
}

TEST_CASE("error oracle smoke setting") {
    OracleResult res = run_error_oracle({5, 6}, {1e-3}, 5, {}, 21);
    CHECK_FALSE(res.ratios.empty());
    CHECK(res.mean >= 0.8);
    CHECK(res.mean <= 1.2);
}

TEST_CASE("constraint matrix export") {
    ConstraintMatrix km = build_constraint_matrix(gibbs_state(transverse_ising(3)), 2);
    std::stringstream ss;
    write_constraint_matrix(ss, km);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "hlt-constraint-matrix 54 27");
}
