// =====================================================================
// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if
// any criterion fails. Heavier than the unit tests by design — the full
// run takes tens of minutes on one core.
// =====================================================================

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "hlt/experiment.hpp"

using namespace hlt;

namespace {

int failures = 0;

void report(int criterion, bool pass, const char* label, const std::string& detail) {
    std::printf("criterion %d [%s] %s: %s\n", criterion, pass ? "PASS" : "FAIL", label,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

struct Stats {
    double mean = 0.0;
    double sd = 0.0;
};

Stats stats(const std::vector<double>& xs) {
    Stats s;
    for (double x : xs) s.mean += x;
    s.mean /= xs.size();
    for (double x : xs) s.sd += (x - s.mean) * (x - s.mean);
    s.sd = xs.size() > 1 ? std::sqrt(s.sd / (xs.size() - 1)) : 0.0;
    return s;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// criterion 1: N=5 TI, l=20, m=5e4, 10 seeds -> mean fidelity >= 0.95
void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    DensityMatrix rho = gibbs_state(transverse_ising(5));
    std::vector<double> fids;
    for (int seed = 1; seed <= 10; ++seed) {
        fids.push_back(run_hlt_point(rho, 2, 20, 50000, seed).fidelity_truth);
    }
    Stats s = stats(fids);
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean fidelity %.4f +- %.4f in %.0f s", s.mean, s.sd,
                  elapsed(t0));
    report(1, s.mean >= 0.95, "N=5 HLT l=20 m=5e4", buf);
}

// criterion 2: QST baseline N=5 m=1e5, 10 seeds -> mean fidelity in [0.86, 0.96]
void criterion2() {
    DensityMatrix rho = gibbs_state(transverse_ising(5));
    MeasurementPlan plan = build_qst_plan_total(5, 100000);
    std::vector<double> fids;
    for (int seed = 1; seed <= 10; ++seed) {
        fids.push_back(fidelity(full_qst(sample(rho, plan, seed)), rho));
    }
    Stats s = stats(fids);
    char buf[96];
    std::snprintf(buf, sizeof buf, "mean fidelity %.4f +- %.4f", s.mean, s.sd);
    report(2, s.mean >= 0.86 && s.mean <= 0.96, "N=5 QST m=1e5", buf);
}

// criterion 3: N=8, l=30, m=2e4, 10 seeds -> mean fidelity >= 0.85
void criterion3() {
    auto t0 = std::chrono::steady_clock::now();
    DensityMatrix rho = gibbs_state(transverse_ising(8));
    std::vector<double> fids;
    for (int seed = 1; seed <= 10; ++seed) {
        fids.push_back(run_hlt_point(rho, 2, 30, 20000, seed).fidelity_truth);
    }
    Stats s = stats(fids);
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean fidelity %.4f +- %.4f in %.0f s", s.mean, s.sd,
                  elapsed(t0));
    report(3, s.mean >= 0.85, "N=8 HLT l=30 m=2e4", buf);
}

// criterion 4: N=8, m=1e5, l=30 -> top-4 eigenvalues within 0.02 of exact
void criterion4() {
    DensityMatrix rho = gibbs_state(transverse_ising(8));
    HltPointResult res = run_hlt_point(rho, 2, 30, 100000, 1);
    std::vector<double> mu = top_eigenvalues(res.state, 4);
    const double exact[4] = {0.306591656070304, 0.211969694468140, 0.102602755735507,
                             0.070936942849669};
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(mu[i] - exact[i]));
    char buf[96];
    std::snprintf(buf, sizeof buf, "max eigenvalue deviation %.4f", worst);
    report(4, worst <= 0.02, "N=8 eigenvalue recovery m=1e5 l=30", buf);
}

// criterion 5: Appendix-A oracle at paper scale plus a bounded smoke run
void criterion5() {
    auto t0 = std::chrono::steady_clock::now();
    OracleResult smoke = run_error_oracle({5, 6}, {1e-3}, 5, {}, 11);
    double smoke_seconds = elapsed(t0);

    OracleResult paper = run_error_oracle({5, 6, 7, 8}, {1e-2, 1e-3, 1e-4}, 10, {}, 1);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "paper-setting mean r %.4f (%zu samples), smoke mean %.4f in %.0f s",
                  paper.mean, paper.ratios.size(), smoke.mean, smoke_seconds);
    bool pass = paper.mean >= 0.9 && paper.mean <= 1.1 && smoke_seconds <= 300.0;
    report(5, pass, "error oracle", buf);
}

// criterion 6: property bundle
void criterion6() {
    bool pass = true;
    std::string detail;
    auto require = [&](bool ok, const char* what) {
        if (!ok) {
            pass = false;
            detail += std::string(detail.empty() ? "" : ", ") + what;
        }
    };

    // exhaustive commutators on <= 3 qubits
    {
        bool ok = true;
        for (int n = 1; n <= 3 && ok; ++n) {
            std::vector<std::string> words{""};
            for (int i = 0; i < n; ++i) {
                std::vector<std::string> next;
                for (const auto& w : words)
                    for (char c : {'I', 'X', 'Y', 'Z'}) next.push_back(w + c);
                words = std::move(next);
            }
            for (const auto& wa : words) {
                for (const auto& wb : words) {
                    PauliString a(n, wa), b(n, wb);
                    Eigen::MatrixXcd da = to_dense(a), db = to_dense(b);
                    Eigen::MatrixXcd dense =
                        std::complex<double>(0, 1) * (da * db - db * da);
                    auto r = commutator_i(a, b);
                    Eigen::MatrixXcd model =
                        r ? (r->coefficient * to_dense(r->string)).eval()
                          : Eigen::MatrixXcd::Zero(dense.rows(), dense.cols()).eval();
                    if ((dense - model).cwiseAbs().maxCoeff() > 1e-12) ok = false;
                }
            }
        }
        require(ok, "commutators");
    }

    // basis count 12N - 9
    {
        bool ok = true;
        for (int n = 2; n <= 12; ++n) {
            if (enumerate_local_basis(n, 2).size() != 12 * n - 9) ok = false;
        }
        require(ok, "basis count");
    }

    // exact null property over 20 random 2-local Gibbs states
    {
        bool ok = true;
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 20; ++trial) {
            int n = 4 + trial % 3;
            HamiltonianOperator h = random_local_hamiltonian(n, 2, rng);
            ConstraintMatrix km = build_constraint_matrix(gibbs_state(h), 2);
            if ((km.entries * h.coefficients).cwiseAbs().maxCoeff() > 1e-9) ok = false;
        }
        require(ok, "null property");
    }

    // finite-difference gradient agreement at N=4
    {
        bool ok = true;
        DensityMatrix rho = gibbs_state(transverse_ising(4));
        MeasurementDataset data = exact_dataset(rho, build_overlapping_plan(4, 2, 0));
        ConstraintMatrix km = build_constraint_matrix(rho, 2);
        SpectralAnsatz ansatz = make_ansatz(svd_cutoff(km, 4), km.cols_basis);
        std::mt19937_64 rng(17);
        std::normal_distribution<double> normal;
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd theta(4);
            for (int i = 0; i < 4; ++i) theta[i] = 0.5 * normal(rng);
            auto value_at = [&](const Eigen::VectorXd& t) {
                SpectralAnsatz a = ansatz;
                a.theta = t;
                return loss(a, data).value;
            };
            for (int i = 0; i < 4; ++i) {
                Eigen::VectorXd tp = theta, tm = theta;
                double hf = 1e-6 * std::max(1.0, std::abs(theta[i]));
                tp[i] += hf;
                double forward = (value_at(tp) - value_at(theta)) / hf;
                tp[i] = theta[i] + 1e-5;
                tm[i] -= 1e-5;
                double central = (value_at(tp) - value_at(tm)) / 2e-5;
                double scale = std::max({1e-6, std::abs(forward), std::abs(central)});
                if (std::abs(forward - central) / scale > 1e-4) ok = false;
            }
        }
        require(ok, "fd gradient");
    }

    // project_physical contract on 100 random inputs
    {
        bool ok = true;
        std::mt19937_64 rng(13);
        std::normal_distribution<double> normal;
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::MatrixXcd r(4, 4);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) r(i, j) = {normal(rng), normal(rng)};
            Eigen::MatrixXcd h = 0.5 * (r + r.adjoint());
            h -= Eigen::MatrixXcd::Identity(4, 4) * (h.trace().real() - 1.0) / 4.0;
            DensityMatrix out = project_physical(h);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.matrix);
            if (es.eigenvalues().minCoeff() < -1e-12) ok = false;
            if (std::abs(out.matrix.trace().real() - 1.0) > 1e-10) ok = false;
            DensityMatrix again = project_physical(out.matrix);
            if ((again.matrix - out.matrix).cwiseAbs().maxCoeff() > 1e-10) ok = false;
        }
        require(ok, "project_physical");
    }

    // exact-data end-to-end on N=4 TI
    {
        DensityMatrix rho = gibbs_state(transverse_ising(4));
        HltPointResult res = run_hlt_point(rho, 2, 39, 0, 0);
        require(res.fidelity_truth >= 1.0 - 1e-6, "exact end-to-end");
    }

    // estimator unbiasedness at 3 sigma over 100 seeds. Seeds are spread out
    // (the sampler derives per-basis streams as seed + basis index, so dataset
    // seeds must differ by more than the basis count) and the band uses the
    // empirical standard error of the seed ensemble.
    {
        DensityMatrix rho = gibbs_state(transverse_ising(4));
        PauliString p(4, "XXII");
        double exact = expectation(p, rho.matrix);
        MeasurementPlan plan = build_overlapping_plan(4, 2, 81000);
        std::vector<double> values;
        for (int s = 0; s < 100; ++s) {
            std::uint64_t seed = (s + 1) * 0x9e3779b97f4a7c15ull;
            values.push_back(estimate_pauli_expectation(sample(rho, plan, seed), p).value);
        }
        Stats st = stats(values);
        require(std::abs(st.mean - exact) <= 3.0 * st.sd / std::sqrt(100.0),
                "estimator bias");
    }

    // smallest singular value scales as m^-0.5
    {
        DensityMatrix rho = gibbs_state(transverse_ising(4));
        std::vector<long long> ms = {10000, 40000, 160000};
        std::vector<double> log_sv;
        for (long long m : ms) {
            double acc = 0;
            for (int s = 0; s < 4; ++s) {
                MeasurementDataset data =
                    sample(rho, build_overlapping_plan(4, 2, m), 500 * s + 3);
                acc += svd_cutoff(build_constraint_matrix(data, 2), 1).singular_values[0];
            }
            log_sv.push_back(std::log(acc / 4.0));
        }
        double slope = (log_sv.back() - log_sv.front()) /
                       (std::log(16.0));  // log(160000/10000)
        require(std::abs(slope + 0.5) <= 0.15, "noise scaling");
    }

    report(6, pass, "property bundle", pass ? "all properties hold" : detail);
}

// criterion 7: convergence diagnostic separates TI success from perturbed-GHZ
// failure. Both curves compare HLT(m) against HLT(m_max) without ground truth.
// TI converges (mean infidelity monotone non-increasing beyond 2e4 within
// error bars); injecting 35% nonlocal weight into the GHZ Hamiltonian makes
// individual runs jump upward by more than twice the ensemble standard error.
void criterion7() {
    const std::vector<long long> ms = {10000, 20000, 40000, 80000};
    const int n_seeds = 8;
    const long long m_max = 160000;

    auto curves = [&](const StateSpec& spec, int l) {
        // infid[i][s]: infidelity of HLT(ms[i]) vs the m_max reference, seed s
        std::vector<std::vector<double>> infid(ms.size());
        for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
            DensityMatrix rho = build_state(spec, 5, seed);
            DensityMatrix ref = run_hlt_point(rho, 2, l, m_max, seed + 900000).state;
            for (std::size_t i = 0; i < ms.size(); ++i) {
                HltPointResult res = run_hlt_point(rho, 2, l, ms[i], seed);
                infid[i].push_back(1.0 - fidelity(res.state, ref));
            }
        }
        return infid;
    };

    auto ti = curves(StateSpec{StateSpec::Family::transverse_ising, 0.0}, 20);
    auto ghz = curves(StateSpec{StateSpec::Family::perturbed_ghz, 0.35}, 10);

    // TI: mean curve monotone non-increasing beyond m = 2e4 within error bars
    bool ti_monotone = true;
    for (std::size_t i = 1; i + 1 < ms.size(); ++i) {
        Stats a = stats(ti[i]), b = stats(ti[i + 1]);
        if (b.mean > a.mean + (a.sd + b.sd)) ti_monotone = false;
    }

    // perturbed GHZ: some run's infidelity rises between consecutive m by more
    // than 2x the ensemble standard error at the later grid point
    bool ghz_excursion = false;
    for (std::size_t i = 0; i + 1 < ms.size(); ++i) {
        double se = stats(ghz[i + 1]).sd / std::sqrt(double(n_seeds));
        for (int s = 0; s < n_seeds; ++s) {
            if (ghz[i + 1][s] - ghz[i][s] > 2.0 * se) ghz_excursion = true;
        }
    }

    std::string detail = "ti mean infidelity:";
    char buf[64];
    for (const auto& col : ti) {
        Stats s = stats(col);
        std::snprintf(buf, sizeof buf, " %.4f(%.4f)", s.mean, s.sd);
        detail += buf;
    }
    detail += "; ghz mean infidelity:";
    for (const auto& col : ghz) {
        Stats s = stats(col);
        std::snprintf(buf, sizeof buf, " %.4f(%.4f)", s.mean, s.sd);
        detail += buf;
    }
    report(7, ti_monotone && ghz_excursion, "convergence diagnostic", detail);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed"
                                      : "acceptance: FAILURES present");
    return failures == 0 ? 0 : 1;
}
