#include "qd/cma_es.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qd/errors.hpp"

namespace qd {

namespace {

struct Strategy {
    std::size_t mu = 0;
    Eigen::VectorXd weights;
    double mueff = 0, cc = 0, cs = 0, c1 = 0, cmu = 0, damps = 0, chi_n = 0;
};

Strategy strategy_for(std::size_t n, std::size_t lambda)
{
    Strategy s;
    const double dn = static_cast<double>(n);
    s.mu = std::max<std::size_t>(lambda / 2, 1);
    s.weights.resize(static_cast<Eigen::Index>(s.mu));
    for (std::size_t i = 0; i < s.mu; ++i)
        s.weights[static_cast<Eigen::Index>(i)] =
            std::log((static_cast<double>(lambda) + 1.0) / 2.0) - std::log(static_cast<double>(i + 1));
    if (s.mu == 1)
        s.weights[0] = 1.0;
    s.weights /= s.weights.sum();
    s.mueff = 1.0 / s.weights.squaredNorm();
    s.cc = (4.0 + s.mueff / dn) / (dn + 4.0 + 2.0 * s.mueff / dn);
    s.cs = (s.mueff + 2.0) / (dn + s.mueff + 5.0);
    s.c1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + s.mueff);
    s.cmu = std::min(1.0 - s.c1, 2.0 * (s.mueff - 2.0 + 1.0 / s.mueff) / ((dn + 2.0) * (dn + 2.0) + s.mueff));
    s.damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mueff - 1.0) / (dn + 1.0)) - 1.0) + s.cs;
    s.chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));
    return s;
}

} // namespace

CmaEs::CmaEs(const Vector& mean, double sigma, std::size_t population)
{
    if (mean.empty())
        throw std::invalid_argument("CMA-ES needs a non-empty mean");
    population_ = population ? population
                             : 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(mean.size()))));
    if (population_ < 2)
        throw std::invalid_argument("CMA-ES population must be at least 2");
    reset(mean, sigma);
}

void CmaEs::reset(const Vector& mean, double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("CMA-ES step size must be positive");
    const auto n = static_cast<Eigen::Index>(mean.size());
    mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), n);
    sigma_ = sigma;
    cov_ = Eigen::MatrixXd::Identity(n, n);
    basis_ = Eigen::MatrixXd::Identity(n, n);
    scales_ = Eigen::VectorXd::Ones(n);
    inv_sqrt_cov_ = Eigen::MatrixXd::Identity(n, n);
    path_sigma_ = Eigen::VectorXd::Zero(n);
    path_c_ = Eigen::VectorXd::Zero(n);
    generation_ = 0;
    degenerate_ = false;
}

std::vector<Genome> CmaEs::ask(Rng& rng, std::size_t batch) const
{
    if (degenerate_)
        throw InvalidState("CMA-ES distribution is degenerate; restart required");
    const auto n = mean_.size();
    std::vector<Genome> out;
    out.reserve(batch);
    Eigen::VectorXd z(n);
    for (std::size_t b = 0; b < batch; ++b) {
        for (Eigen::Index i = 0; i < n; ++i)
            z[i] = rng.normal();
        const Eigen::VectorXd x = mean_ + sigma_ * (basis_ * scales_.cwiseProduct(z));
        out.push_back(Genome::clipped(Vector(x.data(), x.data() + n)));
    }
    return out;
}

void CmaEs::tell(std::span<const Genome> ranked)
{
    if (ranked.size() < 2)
        throw std::invalid_argument("CMA-ES update needs at least two ranked samples");
    const auto n = mean_.size();
    for (const auto& g : ranked)
        if (static_cast<Eigen::Index>(g.size()) != n)
            throw std::invalid_argument("sample dimension differs from the distribution");

    const Strategy s = strategy_for(static_cast<std::size_t>(n), ranked.size());
    const auto mu = static_cast<Eigen::Index>(s.mu);

    Eigen::MatrixXd steps(n, mu);
    for (Eigen::Index i = 0; i < mu; ++i)
        for (Eigen::Index d = 0; d < n; ++d)
            steps(d, i) = (ranked[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] - mean_[d]) / sigma_;

    const Eigen::VectorXd y = steps * s.weights;
    mean_ += sigma_ * y;
    ++generation_;

    path_sigma_ = (1.0 - s.cs) * path_sigma_ + std::sqrt(s.cs * (2.0 - s.cs) * s.mueff) * (inv_sqrt_cov_ * y);
    const double ps_norm = path_sigma_.norm();
    const double decay = 1.0 - std::pow(1.0 - s.cs, 2.0 * static_cast<double>(generation_));
    const bool hsig = ps_norm / std::sqrt(decay) / s.chi_n < 1.4 + 2.0 / (static_cast<double>(n) + 1.0);
    path_c_ = (1.0 - s.cc) * path_c_;
    if (hsig)
        path_c_ += std::sqrt(s.cc * (2.0 - s.cc) * s.mueff) * y;

    const Eigen::MatrixXd rank_mu = steps * s.weights.asDiagonal() * steps.transpose();
    const double hsig_correction = hsig ? 0.0 : s.cc * (2.0 - s.cc);
    cov_ = (1.0 - s.c1 - s.cmu) * cov_ + s.c1 * (path_c_ * path_c_.transpose() + hsig_correction * cov_) +
           s.cmu * rank_mu;
    cov_ = 0.5 * (cov_ + cov_.transpose());

    sigma_ *= std::exp((s.cs / s.damps) * (ps_norm / s.chi_n - 1.0));
    decompose();
}

void CmaEs::decompose()
{
    if (!cov_.allFinite() || !std::isfinite(sigma_) || !(sigma_ > 0.0)) {
        degenerate_ = true;
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
    if (eig.info() != Eigen::Success) {
        degenerate_ = true;
        return;
    }
    const Eigen::VectorXd values = eig.eigenvalues();
    const double max_value = values.maxCoeff();
    if (!(values.minCoeff() > 0.0) || values.minCoeff() < 1e-14 * max_value) {
        degenerate_ = true;
        return;
    }
    basis_ = eig.eigenvectors();
    scales_ = values.cwiseSqrt();
    inv_sqrt_cov_ = basis_ * scales_.cwiseInverse().asDiagonal() * basis_.transpose();
    // Step sizes below this can no longer move a genome in double precision.
    if (sigma_ * scales_.maxCoeff() < 1e-300 || sigma_ * scales_.maxCoeff() > 1e10)
        degenerate_ = true;
}

} // namespace qd
