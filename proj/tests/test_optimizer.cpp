#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hlt/optimizer.hpp"

using namespace hlt;

namespace {

struct Setup {
    DensityMatrix rho;
    MeasurementDataset data;
    ConstraintMatrix km;
};

Setup exact_setup(int n) {
    Setup s{gibbs_state(transverse_ising(n)), {}, {}};
    s.data = exact_dataset(s.rho, build_overlapping_plan(n, 2, 0));
    s.km = build_constraint_matrix(s.rho, 2);
    return s;
}

}  // namespace

TEST_CASE("ansatz_hamiltonian is linear with theta") {
    Setup s = exact_setup(4);
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(s.km, 5), s.km.cols_basis);

    ansatz.theta = Eigen::VectorXd::Zero(5);
    HamiltonianOperator zero = ansatz_hamiltonian(ansatz);
    CHECK(zero.coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fidelity(reconstruct_state(ansatz), maximally_mixed(4)) >= 1.0 - 1e-12);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Eigen::VectorXd a(5), b(5);
    for (int i = 0; i < 5; ++i) {
        a[i] = normal(rng);
        b[i] = normal(rng);
    }
    ansatz.theta = a;
    Eigen::VectorXd ca = ansatz_hamiltonian(ansatz).coefficients;
    ansatz.theta = b;
    Eigen::VectorXd cb = ansatz_hamiltonian(ansatz).coefficients;
    ansatz.theta = a + b;
    CHECK((ansatz_hamiltonian(ansatz).coefficients - ca - cb).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("loss vanishes at the generating parameters on exact data") {
    Setup s = exact_setup(4);
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(s.km, 5), s.km.cols_basis);
    // the lowest right vector spans v_true up to sign
    Eigen::VectorXd v_true = transverse_ising(4).coefficients;
    double scale = ansatz.cutoff.right_vectors.col(0).dot(v_true);
    ansatz.theta = Eigen::VectorXd::Zero(5);
    ansatz.theta[0] = scale;
    CHECK(loss(ansatz, s.data).value <= 1e-10);
}

TEST_CASE("loss vanishes at theta = 0 for the maximally mixed state") {
    DensityMatrix mixed = maximally_mixed(4);
    MeasurementDataset data = exact_dataset(mixed, build_overlapping_plan(4, 2, 0));
    ConstraintMatrix km = build_constraint_matrix(mixed, 2);
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(km, 3), km.cols_basis);
    ansatz.theta = Eigen::VectorXd::Zero(3);
    CHECK(loss(ansatz, data).value <= 1e-12);
}

TEST_CASE("loss residual vector squares to the value") {
    Setup s = exact_setup(4);
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(s.km, 4), s.km.cols_basis);
    ansatz.theta = Eigen::VectorXd::Constant(4, 0.3);
    LossValue lv = loss(ansatz, s.data);
    CHECK(lv.value == doctest::Approx(lv.residuals.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("loss is invariant under ansatz vector permutation") {
    Setup s = exact_setup(4);
    SpectralCutoff cut = svd_cutoff(s.km, 3);
    SpectralAnsatz ansatz = make_ansatz(cut, s.km.cols_basis);
    ansatz.theta = Eigen::VectorXd(3);
    ansatz.theta << 0.4, -0.2, 0.9;
    double base = loss(ansatz, s.data).value;

    SpectralCutoff perm = cut;
    perm.singular_values = Eigen::Vector3d(cut.singular_values[2],
                                           cut.singular_values[0],
                                           cut.singular_values[1]);
    perm.right_vectors.col(0) = cut.right_vectors.col(2);
    perm.right_vectors.col(1) = cut.right_vectors.col(0);
    perm.right_vectors.col(2) = cut.right_vectors.col(1);
    SpectralAnsatz shuffled = make_ansatz(perm, s.km.cols_basis);
    shuffled.theta = Eigen::VectorXd(3);
    shuffled.theta << 0.9, 0.4, -0.2;
    CHECK(loss(shuffled, s.data).value == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("finite-difference gradient agrees with central differences") {
    Setup s = exact_setup(4);
    const int l = 4;
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(s.km, l), s.km.cols_basis);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd theta(l);
        for (int i = 0; i < l; ++i) theta[i] = 0.5 * normal(rng);
        auto value_at = [&](const Eigen::VectorXd& t) {
            SpectralAnsatz a = ansatz;
            a.theta = t;
            return loss(a, s.data).value;
        };
        for (int i = 0; i < l; ++i) {
            const double hf = 1e-6 * std::max(1.0, std::abs(theta[i]));
            const double hc = 1e-5;
            Eigen::VectorXd tp = theta, tm = theta;
            tp[i] += hf;
            double forward = (value_at(tp) - value_at(theta)) / hf;
            tp[i] = theta[i] + hc;
            tm[i] -= hc;
            double central = (value_at(tp) - value_at(tm)) / (2 * hc);
            double scale = std::max({1e-6, std::abs(forward), std::abs(central)});
            CHECK(std::abs(forward - central) / scale <= 1e-4);
        }
    }
}

TEST_CASE("fit recovers the exact state from exact data") {
    Setup s = exact_setup(4);
    const int l_max = s.km.cols_basis.size();
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(s.km, l_max), s.km.cols_basis);
    FitReport report = fit(ansatz, s.data);
    CHECK(report.converged);
    ansatz.theta = report.theta_star;
    CHECK(std::abs(report.loss_value - loss(ansatz, s.data).value) <= 1e-12);
    CHECK(fidelity(reconstruct_state(ansatz), s.rho) >= 1.0 - 1e-6);
}

TEST_CASE("fit on maximally mixed data returns theta near zero") {
    DensityMatrix mixed = maximally_mixed(4);
    MeasurementDataset data = exact_dataset(mixed, build_overlapping_plan(4, 2, 0));
    ConstraintMatrix km = build_constraint_matrix(mixed, 2);
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(km, 5), km.cols_basis);
    FitReport report = fit(ansatz, data);
    ansatz.theta = report.theta_star;
    CHECK(fidelity(reconstruct_state(ansatz), mixed) >= 1.0 - 1e-4);
}

TEST_CASE("fit is deterministic") {
    DensityMatrix rho = gibbs_state(transverse_ising(4));
    MeasurementDataset data = sample(rho, build_overlapping_plan(4, 2, 20000), 31);
    ConstraintMatrix km = build_constraint_matrix(data, 2);
    SpectralAnsatz ansatz = make_ansatz(svd_cutoff(km, 10), km.cols_basis);
    FitReport a = fit(ansatz, data);
    FitReport b = fit(ansatz, data);
    CHECK(a.loss_value == b.loss_value);
    CHECK((a.theta_star - b.theta_star).cwiseAbs().maxCoeff() == 0.0);
}
