#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "msel/errors.hpp"

namespace msel {

// Normalized input feature h = [h0^T, 1]^T / sqrt(d0 + 1). The appended bias
// plus the global 1/sqrt(d) scaling keep h^T h on a comparable scale across
// feature dimensions; the last coordinate is always 1/sqrt(d).
struct FeatureVector {
    Eigen::VectorXd values;

    Eigen::Index size() const { return values.size(); }
};

// One-hot regression target for a class label: exactly one coordinate is 1.
struct OneHotTarget {
    Eigen::VectorXd values;

    Eigen::Index size() const { return values.size(); }
};

// Per-output predictive Gaussian. The variance is shared across outputs
// because the precision matrix is shared (the prior is independent and
// identical across output dimensions).
struct GaussianPredictive {
    Eigen::VectorXd means;
    double variance = 0.0;
};

FeatureVector normalize_feature(const Eigen::VectorXd& raw);
OneHotTarget one_hot(int label, int n_outputs);

// log N(y | mu, v) for scalar y with variance v.
double log_normal(double y, double mu, double v);

// Gaussian linear scorer over normalized features.
//
// Maintains inv_a = (H^T H + c I)^-1 and b = H^T Y for the points currently
// absorbed, and evaluates the selection criteria (surprise, learnability,
// MIC, IG, entropy reduction) in closed form. Adds and removes are O(d^2)
// rank-one updates; every criterion costs one inv_a * h product plus O(d K)
// follow-up, with no augmented inverse ever materialized.
//
// Not safe for concurrent mutation or scoring: criterion evaluation reuses
// internal scratch storage. Confine an instance to one thread at a time.
class PosteriorState {
public:
    // Isotropic prior N(0, sigma_w^2 I) on each output's weights; c = sigma^2 / sigma_w^2.
    PosteriorState(int raw_dim, int n_outputs, double sigma, double sigma_w);

    static PosteriorState from_jitter(int raw_dim, int n_outputs, double sigma, double jitter);

    // Direct O(d^3) solve of (H^T H + c I) via Cholesky. `features` holds one
    // normalized feature per row, `targets` the matching one-hot rows.
    static PosteriorState rebuild_from(const Eigen::MatrixXd& features,
                                       const Eigen::MatrixXd& targets,
                                       double sigma, double jitter);

    // Sherman-Morrison rank-one absorb of (h, y).
    void add(const FeatureVector& h, const OneHotTarget& y);

    // Rank-one downdate. Returns false (state untouched) when the downdate
    // denominator 1 - h^T inv_a h falls below the conditioning guard; the
    // caller must rebuild from its buffer instead.
    [[nodiscard]] bool try_remove(const FeatureVector& h, const OneHotTarget& y);

    GaussianPredictive predictive(const FeatureVector& h) const;

    // Negative log predictive density of y at h, summed over outputs.
    double surprise(const FeatureVector& h, const OneHotTarget& y) const;

    // Log predictive density of y at h after absorbing (h, y), summed over
    // outputs. The augmented quantities are formed in scratch; the state is
    // not mutated.
    double learnability(const FeatureVector& h, const OneHotTarget& y) const;

    // eta * learnability + surprise. With eta == 0 this is bit-identical to
    // surprise().
    double mic(const FeatureVector& h, const OneHotTarget& y, double eta) const;

    // Weighted information gain: eta * E_{posterior+}[log p(y | w)] + surprise.
    // At eta == 1 this is the KL divergence between the weight posteriors
    // with and without (h, y); at eta == 0 it reduces to surprise().
    double info_gain(const FeatureVector& h, const OneHotTarget& y, double eta) const;

    // 1/2 log(1 + h^T inv_a h): the drop in weight-posterior entropy from
    // absorbing h. Independent of the target.
    double entropy_reduction(const FeatureVector& h) const;

    // MIC of a member point (h_m, y_m) against this state minus that member.
    // Call on the posterior over M+ = M u {new point}; the result is the
    // member's MIC for the pseudo buffer M+ \ {m}, comparable to the new
    // point's own MIC. Returns nullopt when the downdate denominator hits the
    // conditioning guard; the caller should fall back to a dense rebuild.
    std::optional<double> mic_leave_one_out(const FeatureVector& h_m,
                                            const OneHotTarget& y_m,
                                            double eta) const;

    int dim() const { return static_cast<int>(inv_a_.rows()); }
    int n_outputs() const { return static_cast<int>(b_.cols()); }
    double sigma2() const { return sigma2_; }
    double jitter() const { return c_; }
    std::int64_t count() const { return count_; }
    std::int64_t ops_since_rebuild() const { return ops_since_rebuild_; }
    const Eigen::MatrixXd& inv_a() const { return inv_a_; }
    const Eigen::MatrixXd& b() const { return b_; }

    // Downdate refusal threshold on 1 - h^T inv_a h.
    static constexpr double kDowndateGuard = 1e-8;

private:
    PosteriorState() = default;

    void check_point(const FeatureVector& h, const OneHotTarget& y) const;
    // Fills u_ = inv_a * h and returns s = h^T inv_a h.
    double project(const Eigen::VectorXd& h) const;

    Eigen::MatrixXd inv_a_;
    Eigen::MatrixXd b_;
    double sigma2_ = 0.0;
    double c_ = 0.0;
    std::int64_t count_ = 0;
    std::int64_t ops_since_rebuild_ = 0;

    mutable Eigen::VectorXd u_;   // inv_a * h
    mutable Eigen::VectorXd mu_;  // b^T u
};

} // namespace msel
