#include "hlt/optimizer.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace hlt {

namespace {

// Walsh-Hadamard transform with H_{c,s} = (-1)^popcount(c & s); turns an
// outcome distribution into the vector of sign-correlator expectations.
void walsh_hadamard(Eigen::VectorXd& v) {
    const std::int64_t dim = v.size();
    for (std::int64_t h = 1; h < dim; h <<= 1) {
        for (std::int64_t i = 0; i < dim; i += h << 1) {
            for (std::int64_t j = i; j < i + h; ++j) {
                double a = v[j], b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
}

// Fast residual evaluator. Works in correlator space: per basis B and site
// mask c, the Pauli P_{B,c} (letters of B on c, I elsewhere) has model
// expectation Tr(P rho(theta)), and the per-basis Walsh-Hadamard transform
// of the empirical distribution gives the matching empirical correlator.
// The resulting residual vector is an orthogonal (norm-preserving after the
// 2^{-n/2} scaling) transform of the per-outcome residuals, so sums of
// squares and least-squares steps are identical.
class LossEngine {
  public:
    LossEngine(const SpectralAnsatz& ansatz, const MeasurementDataset& data)
        : n_(data.n_qubits),
          dim_(std::int64_t(1) << data.n_qubits),
          directions_(ansatz.cutoff.right_vectors) {
        if (ansatz.basis.n_qubits != data.n_qubits) {
            throw std::invalid_argument("ansatz and dataset dimension mismatch");
        }
        if (directions_.rows() != ansatz.basis.size()) {
            throw std::invalid_argument("cutoff does not match the ansatz basis");
        }
        scale_ = std::pow(2.0, -0.5 * n_);
        basis_actions_.reserve(ansatz.basis.size());
        for (const auto& p : ansatz.basis.elements) {
            basis_actions_.push_back(pauli_action(p));
        }
        const bool sampled = data.mode == MeasurementDataset::Mode::sampled;
        std::unordered_map<std::string, int> seen;
        for (std::size_t b = 0; b < data.plan.bases.size(); ++b) {
            double total = 0.0;
            for (const auto& [outcome, value] : data.counts[b]) total += value;
            if (sampled && total <= 0) continue;  // basis without shots
            Eigen::VectorXd dist = Eigen::VectorXd::Zero(dim_);
            for (const auto& [outcome, value] : data.counts[b]) {
                dist[static_cast<std::int64_t>(outcome)] = value / total;
            }
            walsh_hadamard(dist);
            targets_.push_back(std::move(dist));
            const std::string& letters = data.plan.bases[b].letters;
            std::vector<int> index(dim_);
            std::string word(n_, 'I');
            for (std::int64_t c = 0; c < dim_; ++c) {
                for (int q = 0; q < n_; ++q) {
                    word[q] = ((c >> (n_ - 1 - q)) & 1) ? letters[q] : 'I';
                }
                auto [it, fresh] = seen.try_emplace(word, static_cast<int>(actions_.size()));
                if (fresh) actions_.push_back(pauli_action(PauliString(n_, word)));
                index[c] = it->second;
            }
            string_index_.push_back(std::move(index));
        }
    }

    int n_residuals() const { return static_cast<int>(targets_.size()) * dim_; }

    Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const {
        Eigen::MatrixXcd rho = state_matrix(theta);
        // model expectation of every distinct correlator string
        Eigen::VectorXd model(actions_.size());
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            const PauliAction& act = actions_[i];
            std::complex<double> tr(0, 0);
            for (std::int64_t k = 0; k < dim_; ++k) {
                double sign = std::popcount(static_cast<std::uint64_t>(k) & act.sign_mask) % 2
                                  ? -1.0 : 1.0;
                tr += sign * rho(k, k ^ act.flip_mask);
            }
            model[i] = (act.prefactor * tr).real();
        }
        Eigen::VectorXd r(n_residuals());
        for (std::size_t b = 0; b < targets_.size(); ++b) {
            const auto& idx = string_index_[b];
            for (std::int64_t c = 0; c < dim_; ++c) {
                r[b * dim_ + c] = scale_ * (targets_[b][c] - model[idx[c]]);
            }
        }
        return r;
    }

    double value(const Eigen::VectorXd& theta) const {
        return residuals(theta).squaredNorm();
    }

  private:
    Eigen::MatrixXcd state_matrix(const Eigen::VectorXd& theta) const {
        Eigen::VectorXd coeffs = directions_ * theta;
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim_, dim_);
        for (int m = 0; m < coeffs.size(); ++m) {
            if (coeffs[m] == 0.0) continue;
            const PauliAction& act = basis_actions_[m];
            for (std::int64_t k = 0; k < dim_; ++k) {
                double sign = std::popcount(static_cast<std::uint64_t>(k) & act.sign_mask) % 2
                                  ? -1.0 : 1.0;
                h(k ^ act.flip_mask, k) += coeffs[m] * act.prefactor * sign;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        Eigen::VectorXd p = (-(es.eigenvalues().array() - es.eigenvalues().minCoeff())).exp();
        p /= p.sum();
        return es.eigenvectors() * p.asDiagonal() * es.eigenvectors().adjoint();
    }

    int n_;
    std::int64_t dim_;
    Eigen::MatrixXd directions_;
    double scale_;
    std::vector<PauliAction> basis_actions_;
    std::vector<Eigen::VectorXd> targets_;          // active bases only
    std::vector<std::vector<int>> string_index_;    // [active basis][mask]
    std::vector<PauliAction> actions_;
};

struct LmResult {
    Eigen::VectorXd theta;
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
};

LmResult levenberg_marquardt(const LossEngine& engine, Eigen::VectorXd theta,
                             const FitOptions& opt) {
    const int l = static_cast<int>(theta.size());
    Eigen::VectorXd r = engine.residuals(theta);
    double value = r.squaredNorm();
    double mu = -1.0;
    LmResult out;
    out.converged = false;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        // 2-point Jacobian
        Eigen::MatrixXd jac(r.size(), l);
        auto column = [&](int j) {
            Eigen::VectorXd t2 = theta;
            double h = opt.fd_step * std::max(1.0, std::abs(theta[j]));
            t2[j] += h;
            jac.col(j) = (engine.residuals(t2) - r) / h;
        };
        if (opt.threads > 1 && l > 1) {
            std::vector<std::thread> pool;
            int nt = std::min(opt.threads, l);
            for (int t = 0; t < nt; ++t) {
                pool.emplace_back([&, t] {
                    for (int j = t; j < l; j += nt) column(j);
                });
            }
            for (auto& th : pool) th.join();
        } else {
            for (int j = 0; j < l; ++j) column(j);
        }
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * r;
        if ((2.0 * jtr).lpNorm<Eigen::Infinity>() < opt.gtol) {
            out.converged = true;
            break;
        }
        if (mu < 0) mu = 1e-3 * jtj.diagonal().maxCoeff();
        bool accepted = false;
        double drop = 0.0;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += mu;
            Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            Eigen::VectorXd candidate = theta + step;
            Eigen::VectorXd r2 = engine.residuals(candidate);
            double v2 = r2.squaredNorm();
            if (v2 < value) {
                drop = (value - v2) / std::max(value, 1e-300);
                theta = std::move(candidate);
                r = std::move(r2);
                value = v2;
                mu = std::max(mu * 0.3, 1e-14);
                accepted = true;
            } else {
                mu *= 4.0;
            }
        }
        if (!accepted) {
            // damping exhausted; no descent direction left
            out.converged = true;
            break;
        }
        if (drop < opt.ftol) {
            out.converged = true;
            ++iter;
            break;
        }
    }
    out.theta = std::move(theta);
    out.loss = value;
    out.iterations = iter;
    return out;
}

}  // namespace

SpectralAnsatz make_ansatz(SpectralCutoff cutoff, OperatorBasis basis) {
    if (cutoff.right_vectors.rows() != basis.size()) {
        throw std::invalid_argument("cutoff does not match the basis");
    }
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(cutoff.l);
    return SpectralAnsatz{std::move(cutoff), std::move(basis), std::move(theta)};
}

HamiltonianOperator ansatz_hamiltonian(const SpectralAnsatz& ansatz) {
    if (ansatz.theta.size() != ansatz.cutoff.l) {
        throw std::invalid_argument("theta length does not match the cutoff");
    }
    Eigen::VectorXd coeffs = ansatz.cutoff.right_vectors * ansatz.theta;
    return HamiltonianOperator{ansatz.basis, std::move(coeffs)};
}

LossValue loss(const SpectralAnsatz& ansatz, const MeasurementDataset& data) {
    if (ansatz.basis.n_qubits != data.n_qubits) {
        throw std::invalid_argument("ansatz and dataset dimension mismatch");
    }
    DensityMatrix rho = gibbs_state(ansatz_hamiltonian(ansatz));
    const std::int64_t dim = rho.dim();
    const bool sampled = data.mode == MeasurementDataset::Mode::sampled;
    LossValue out;
    out.residuals = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.plan.bases.size()) * dim);
    for (std::size_t b = 0; b < data.plan.bases.size(); ++b) {
        double total = 0.0;
        for (const auto& [outcome, value] : data.counts[b]) total += value;
        if (sampled && total <= 0) continue;
        Eigen::VectorXd empirical = Eigen::VectorXd::Zero(dim);
        for (const auto& [outcome, value] : data.counts[b]) {
            empirical[static_cast<std::int64_t>(outcome)] = value / total;
        }
        Eigen::VectorXd model = basis_probabilities(rho, data.plan.bases[b]);
        out.residuals.segment(b * dim, dim) = empirical - model;
    }
    out.value = out.residuals.squaredNorm();
    return out;
}

FitReport fit(const SpectralAnsatz& ansatz, const MeasurementDataset& data,
              const FitOptions& options) {
    if (ansatz.cutoff.l < 1) throw std::invalid_argument("ansatz needs l >= 1");
    LossEngine engine(ansatz, data);
    const int l = ansatz.cutoff.l;

    struct Start {
        double sign, beta;
        Eigen::VectorXd theta;
        double initial;
    };
    std::vector<Start> starts;
    for (double sign : {1.0, -1.0}) {
        for (double beta : {0.5, 1.0, 2.0}) {
            Eigen::VectorXd t = Eigen::VectorXd::Zero(l);
            t[0] = sign * beta;
            starts.push_back({sign, beta, std::move(t), 0.0});
        }
    }
    if (ansatz.theta.size() == l && ansatz.theta.norm() > 0) {
        starts.push_back({0.0, 0.0, ansatz.theta, 0.0});
    }
    for (auto& s : starts) s.initial = engine.value(s.theta);

    std::vector<std::size_t> chosen;
    if (options.full_multistart) {
        for (std::size_t i = 0; i < starts.size(); ++i) chosen.push_back(i);
    } else {
        // best beta per sign, plus the caller-provided start when present
        for (double sign : {1.0, -1.0}) {
            std::size_t best = starts.size();
            for (std::size_t i = 0; i < starts.size(); ++i) {
                if (starts[i].sign != sign) continue;
                if (best == starts.size() || starts[i].initial < starts[best].initial) best = i;
            }
            if (best < starts.size()) chosen.push_back(best);
        }
        if (starts.size() == 7) chosen.push_back(6);
    }

    FitReport report;
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t i : chosen) {
        LmResult res = levenberg_marquardt(engine, starts[i].theta, options);
        report.starts.push_back({starts[i].sign, starts[i].beta, res.loss,
                                 res.iterations, res.converged});
        if (res.loss < best_loss) {
            best_loss = res.loss;
            report.theta_star = res.theta;
            report.iterations = res.iterations;
            report.converged = res.converged;
        }
    }
    SpectralAnsatz fitted = ansatz;
    fitted.theta = report.theta_star;
    report.loss_value = loss(fitted, data).value;
    return report;
}

DensityMatrix reconstruct_state(const SpectralAnsatz& ansatz) {
    return gibbs_state(ansatz_hamiltonian(ansatz));
}

}  // namespace hlt
