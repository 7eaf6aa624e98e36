#pragma once

// Test-only oracles. These deliberately avoid the library's incremental
// paths: posteriors are built densely and inverted with full-pivot LU,
// log-determinants come from fresh Cholesky factors, and moments use the
// two-pass formulas.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "msel/bayes.hpp"
#include "msel/rng.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DenseState {
    MatrixXd a;      // c I + sum h h^T
    MatrixXd inv_a;  // full-pivot LU inverse
    MatrixXd b;      // sum h y^T
    double sigma2;
    double c;
};

inline DenseState dense_state(const std::vector<msel::FeatureVector>& hs,
                              const std::vector<msel::OneHotTarget>& ys,
                              int d, int k, double sigma, double c) {
    DenseState s;
    s.a = c * MatrixXd::Identity(d, d);
    s.b = MatrixXd::Zero(d, k);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        s.a += hs[i].values * hs[i].values.transpose();
        s.b += hs[i].values * ys[i].values.transpose();
    }
    s.inv_a = s.a.fullPivLu().inverse();
    s.sigma2 = sigma * sigma;
    s.c = c;
    return s;
}

inline double dense_log_normal(double y, double mu, double v) {
    const double r = y - mu;
    return -0.5 * (std::log(2.0 * std::numbers::pi_v<double> * v) + r * r / v);
}

inline double dense_surprise(const DenseState& s, const msel::FeatureVector& h,
                             const msel::OneHotTarget& y) {
    const VectorXd u = s.inv_a * h.values;
    const double v = s.sigma2 * h.values.dot(u) + s.sigma2;
    const VectorXd mu = s.b.transpose() * u;
    double out = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        out -= dense_log_normal(y.values(i), mu(i), v);
    }
    return out;
}

inline double dense_learnability(const DenseState& plus, const msel::FeatureVector& h,
                                 const msel::OneHotTarget& y) {
    const VectorXd u = plus.inv_a * h.values;
    const double v = plus.sigma2 * h.values.dot(u) + plus.sigma2;
    const VectorXd mu = plus.b.transpose() * u;
    double out = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        out += dense_log_normal(y.values(i), mu(i), v);
    }
    return out;
}

inline double dense_mic(const std::vector<msel::FeatureVector>& hs,
                        const std::vector<msel::OneHotTarget>& ys,
                        const msel::FeatureVector& h, const msel::OneHotTarget& y,
                        int d, int k, double sigma, double c, double eta) {
    const DenseState base = dense_state(hs, ys, d, k, sigma, c);
    auto hs_plus = hs;
    auto ys_plus = ys;
    hs_plus.push_back(h);
    ys_plus.push_back(y);
    const DenseState plus = dense_state(hs_plus, ys_plus, d, k, sigma, c);
    return eta * dense_learnability(plus, h, y) + dense_surprise(base, h, y);
}

inline double logdet_spd(const MatrixXd& m) {
    const Eigen::LLT<MatrixXd> llt(m);
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// KL( N(m1, s^2 A1^-1) || N(m0, s^2 A0^-1) ) summed over the K output
// columns, with A and b in dense form.
inline double dense_kl(const DenseState& from_plus, const DenseState& to_base) {
    const int d = static_cast<int>(from_plus.a.rows());
    const int k = static_cast<int>(from_plus.b.cols());
    const MatrixXd m1 = from_plus.inv_a * from_plus.b;
    const MatrixXd m0 = to_base.inv_a * to_base.b;
    const double shared = (to_base.a * from_plus.inv_a).trace() - d +
                          logdet_spd(from_plus.a) - logdet_spd(to_base.a);
    double out = 0.5 * k * shared;
    for (int i = 0; i < k; ++i) {
        const VectorXd diff = m0.col(i) - m1.col(i);
        out += 0.5 * diff.dot(to_base.a * diff) / from_plus.sigma2;
    }
    return out;
}

struct TwoPassMoments {
    double mean;
    double variance;  // population (count divisor)
};

inline TwoPassMoments two_pass_moments(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double m2 = 0.0;
    for (double x : xs) m2 += (x - mean) * (x - mean);
    return {mean, m2 / static_cast<double>(xs.size())};
}

inline VectorXd random_raw(msel::Rng& rng, int d0, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    VectorXd v(d0);
    for (int i = 0; i < d0; ++i) v(i) = n(rng);
    return v;
}

struct RandomInstance {
    msel::PosteriorState state;
    std::vector<msel::FeatureVector> features;
    std::vector<msel::OneHotTarget> targets;
};

inline RandomInstance random_instance(msel::Rng& rng, int d0, int k, int n_points,
                                      double sigma = 0.3, double c = 0.1) {
    RandomInstance inst{msel::PosteriorState::from_jitter(d0, k, sigma, c), {}, {}};
    std::uniform_int_distribution<int> label(0, k - 1);
    for (int i = 0; i < n_points; ++i) {
        inst.features.push_back(msel::normalize_feature(random_raw(rng, d0)));
        inst.targets.push_back(msel::one_hot(label(rng), k));
        inst.state.add(inst.features.back(), inst.targets.back());
    }
    return inst;
}

} // namespace oracle
