#include "msel/bayes.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

namespace msel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

} // namespace

FeatureVector normalize_feature(const Eigen::VectorXd& raw) {
    if (raw.size() < 1) {
        throw InvalidInput("normalize_feature: empty raw feature");
    }
    if (!raw.allFinite()) {
        throw InvalidInput("normalize_feature: non-finite entry in raw feature");
    }
    const Eigen::Index d = raw.size() + 1;
    Eigen::VectorXd h(d);
    h.head(d - 1) = raw;
    h(d - 1) = 1.0;
    h /= std::sqrt(static_cast<double>(d));
    return FeatureVector{std::move(h)};
}

OneHotTarget one_hot(int label, int n_outputs) {
    if (n_outputs < 1 || label < 0 || label >= n_outputs) {
        throw InvalidInput("one_hot: label " + std::to_string(label) +
                           " outside [0, " + std::to_string(n_outputs) + ")");
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_outputs);
    v(label) = 1.0;
    return OneHotTarget{std::move(v)};
}

double log_normal(double y, double mu, double v) {
    const double r = y - mu;
    return -0.5 * (std::log(kTwoPi * v) + r * r / v);
}

PosteriorState::PosteriorState(int raw_dim, int n_outputs, double sigma, double sigma_w) {
    if (raw_dim < 1 || n_outputs < 1) {
        throw InvalidConfig("posterior: need raw_dim >= 1 and n_outputs >= 1");
    }
    if (!(sigma > 0.0) || !(sigma_w > 0.0)) {
        throw InvalidConfig("posterior: sigma and sigma_w must be positive");
    }
    const int d = raw_dim + 1;
    sigma2_ = sigma * sigma;
    c_ = sigma2_ / (sigma_w * sigma_w);
    inv_a_ = Eigen::MatrixXd::Identity(d, d) / c_;
    b_ = Eigen::MatrixXd::Zero(d, n_outputs);
    u_.resize(d);
    mu_.resize(n_outputs);
}

PosteriorState PosteriorState::from_jitter(int raw_dim, int n_outputs, double sigma, double jitter) {
    if (!(jitter > 0.0) || !(sigma > 0.0)) {
        throw InvalidConfig("posterior: sigma and jitter must be positive");
    }
    // c = sigma^2 / sigma_w^2  =>  sigma_w = sigma / sqrt(c)
    return PosteriorState(raw_dim, n_outputs, sigma, sigma / std::sqrt(jitter));
}

PosteriorState PosteriorState::rebuild_from(const Eigen::MatrixXd& features,
                                            const Eigen::MatrixXd& targets,
                                            double sigma, double jitter) {
    if (!(jitter > 0.0) || !(sigma > 0.0)) {
        throw InvalidConfig("rebuild: sigma and jitter must be positive");
    }
    const Eigen::Index d = features.cols();
    const Eigen::Index m = features.rows();
    if (d < 2) {
        throw InvalidConfig("rebuild: features must be normalized (d = d0 + 1 >= 2)");
    }
    if (targets.rows() != m) {
        throw InvalidInput("rebuild: feature/target row mismatch");
    }

    PosteriorState out;
    out.sigma2_ = sigma * sigma;
    out.c_ = jitter;

    Eigen::MatrixXd a = jitter * Eigen::MatrixXd::Identity(d, d);
    a.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose(), 1.0);
    Eigen::LLT<Eigen::MatrixXd> llt(a.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) {
        throw InvalidConfig("rebuild: normal equations not positive definite");
    }
    out.inv_a_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
    out.inv_a_ = (0.5 * (out.inv_a_ + out.inv_a_.transpose())).eval();
    out.b_ = features.transpose() * targets;
    out.count_ = m;
    out.ops_since_rebuild_ = 0;
    out.u_.resize(d);
    out.mu_.resize(targets.cols());
    return out;
}

void PosteriorState::check_point(const FeatureVector& h, const OneHotTarget& y) const {
    if (h.size() != inv_a_.rows()) {
        throw InvalidInput("posterior: feature dimension mismatch");
    }
    if (y.size() != b_.cols()) {
        throw InvalidInput("posterior: target dimension mismatch");
    }
}

double PosteriorState::project(const Eigen::VectorXd& h) const {
    u_.noalias() = inv_a_ * h;
    return h.dot(u_);
}

void PosteriorState::add(const FeatureVector& h, const OneHotTarget& y) {
    check_point(h, y);
    const double s = project(h.values);
    inv_a_.selfadjointView<Eigen::Lower>().rankUpdate(u_, -1.0 / (1.0 + s));
    inv_a_.triangularView<Eigen::StrictlyUpper>() =
        inv_a_.transpose().triangularView<Eigen::StrictlyUpper>();
    b_.noalias() += h.values * y.values.transpose();
    ++count_;
    ++ops_since_rebuild_;
}

bool PosteriorState::try_remove(const FeatureVector& h, const OneHotTarget& y) {
    check_point(h, y);
    const double s = project(h.values);
    const double denom = 1.0 - s;
    if (denom <= kDowndateGuard) {
        return false;
    }
    inv_a_.selfadjointView<Eigen::Lower>().rankUpdate(u_, 1.0 / denom);
    inv_a_.triangularView<Eigen::StrictlyUpper>() =
        inv_a_.transpose().triangularView<Eigen::StrictlyUpper>();
    b_.noalias() -= h.values * y.values.transpose();
    --count_;
    ++ops_since_rebuild_;
    return true;
}

GaussianPredictive PosteriorState::predictive(const FeatureVector& h) const {
    if (h.size() != inv_a_.rows()) {
        throw InvalidInput("posterior: feature dimension mismatch");
    }
    const double s = project(h.values);
    GaussianPredictive out;
    out.means.noalias() = b_.transpose() * u_;
    out.variance = sigma2_ * s + sigma2_;
    return out;
}

double PosteriorState::surprise(const FeatureVector& h, const OneHotTarget& y) const {
    return mic(h, y, 0.0);
}

double PosteriorState::learnability(const FeatureVector& h, const OneHotTarget& y) const {
    check_point(h, y);
    const double s = project(h.values);
    mu_.noalias() = b_.transpose() * u_;
    const double v_plus = sigma2_ * s / (1.0 + s) + sigma2_;
    double total = 0.0;
    for (Eigen::Index k = 0; k < mu_.size(); ++k) {
        const double yk = y.values(k);
        const double mu_plus = (mu_(k) + s * yk) / (1.0 + s);
        total += log_normal(yk, mu_plus, v_plus);
    }
    return total;
}

double PosteriorState::mic(const FeatureVector& h, const OneHotTarget& y, double eta) const {
    check_point(h, y);
    const double s = project(h.values);
    mu_.noalias() = b_.transpose() * u_;
    const double v = sigma2_ * s + sigma2_;

    double surp = 0.0;
    for (Eigen::Index k = 0; k < mu_.size(); ++k) {
        surp -= log_normal(y.values(k), mu_(k), v);
    }
    if (eta == 0.0) {
        return surp;
    }

    // Augmented predictive via the cached projection: A+^-1 h = u / (1 + s).
    const double v_plus = sigma2_ * s / (1.0 + s) + sigma2_;
    double learn = 0.0;
    for (Eigen::Index k = 0; k < mu_.size(); ++k) {
        const double yk = y.values(k);
        const double mu_plus = (mu_(k) + s * yk) / (1.0 + s);
        learn += log_normal(yk, mu_plus, v_plus);
    }
    return eta * learn + surp;
}

double PosteriorState::info_gain(const FeatureVector& h, const OneHotTarget& y, double eta) const {
    check_point(h, y);
    const double s = project(h.values);
    mu_.noalias() = b_.transpose() * u_;
    const double v = sigma2_ * s + sigma2_;

    double surp = 0.0;
    for (Eigen::Index k = 0; k < mu_.size(); ++k) {
        surp -= log_normal(y.values(k), mu_(k), v);
    }
    if (eta == 0.0) {
        return surp;
    }

    // E_{posterior+}[log p(y | w)] = log N(y | mu+, sigma^2) - s+ / 2 per output.
    const double s_plus = s / (1.0 + s);
    double expected = 0.0;
    for (Eigen::Index k = 0; k < mu_.size(); ++k) {
        const double yk = y.values(k);
        const double mu_plus = (mu_(k) + s * yk) / (1.0 + s);
        expected += log_normal(yk, mu_plus, sigma2_) - 0.5 * s_plus;
    }
    return eta * expected + surp;
}

double PosteriorState::entropy_reduction(const FeatureVector& h) const {
    if (h.size() != inv_a_.rows()) {
        throw InvalidInput("posterior: feature dimension mismatch");
    }
    const double s = project(h.values);
    return 0.5 * std::log1p(s);
}

std::optional<double> PosteriorState::mic_leave_one_out(const FeatureVector& h_m,
                                                        const OneHotTarget& y_m,
                                                        double eta) const {
    check_point(h_m, y_m);
    const double s = project(h_m.values);
    const double denom = 1.0 - s;
    if (denom <= kDowndateGuard) {
        return std::nullopt;
    }
    mu_.noalias() = b_.transpose() * u_;

    // Learnability term conditions on this full state: (M+ \ m) u {m} = M+.
    const double v_plus = sigma2_ * s + sigma2_;
    // Surprise term conditions on the downdated state: (A+ - h h^T)^-1 h = u / denom.
    const double s_bar = s / denom;
    const double v_bar = sigma2_ * s_bar + sigma2_;

    double total = 0.0;
    for (Eigen::Index k = 0; k < mu_.size(); ++k) {
        const double yk = y_m.values(k);
        const double mu_bar = (mu_(k) - s * yk) / denom;
        total -= log_normal(yk, mu_bar, v_bar);
        if (eta != 0.0) {
            total += eta * log_normal(yk, mu_(k), v_plus);
        }
    }
    return total;
}

} // namespace msel
