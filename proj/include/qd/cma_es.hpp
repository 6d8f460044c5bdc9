#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qd/core.hpp"

namespace qd {

/// Standard (mu/mu_w, lambda) CMA-ES with rank-one and rank-mu covariance updates and
/// cumulative step-size adaptation. Samples are clipped to the genome box [-1, 1].
class CmaEs {
public:
    /// population == 0 selects the default 4 + floor(3 ln n).
    CmaEs(const Vector& mean, double sigma, std::size_t population = 0);

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(mean_.size()); }
    std::size_t population() const noexcept { return population_; }
    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    double sigma() const noexcept { return sigma_; }
    const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
    const Eigen::VectorXd& path_sigma() const noexcept { return path_sigma_; }
    const Eigen::VectorXd& path_c() const noexcept { return path_c_; }
    long generation() const noexcept { return generation_; }

    /// `batch` samples from N(mean, sigma^2 C). Throws InvalidState when needs_restart().
    std::vector<Genome> ask(Rng& rng, std::size_t batch) const;
    std::vector<Genome> ask(Rng& rng) const { return ask(rng, population_); }

    /// Updates the distribution from samples ordered best first. Throws std::invalid_argument
    /// for fewer than two samples or a dimension mismatch.
    void tell(std::span<const Genome> ranked);

    /// Covariance lost positive definiteness, or the step size collapsed or diverged.
    bool needs_restart() const noexcept { return degenerate_; }

    /// Fresh distribution: identity covariance, zero paths, generation 0.
    void reset(const Vector& mean, double sigma);

private:
    void decompose();

    std::size_t population_;
    Eigen::VectorXd mean_;
    double sigma_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd basis_;        // eigenvectors of cov_
    Eigen::VectorXd scales_;       // sqrt of eigenvalues
    Eigen::MatrixXd inv_sqrt_cov_;
    Eigen::VectorXd path_sigma_;
    Eigen::VectorXd path_c_;
    long generation_ = 0;
    bool degenerate_ = false;
};

} // namespace qd
