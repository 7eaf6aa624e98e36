#include "msel/selectors.hpp"

#include <cmath>

namespace msel {

void RunningMoments::update(double x) {
    if (!std::isfinite(x)) {
        throw InvalidInput("moments: non-finite value");
    }
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

double RunningMoments::stddev() const {
    const double v = variance();
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

double threshold(const RunningMoments& m, double gamma) {
    if (!std::isfinite(gamma)) {
        return gamma;
    }
    if (m.count < 2) {
        return -std::numeric_limits<double>::infinity();
    }
    return m.mean + gamma * m.stddev();
}

double criterion_value(const PosteriorState& posterior, const MemoryItem& item,
                       const SelectorParams& params) {
    switch (params.criterion) {
        case Criterion::ig:
            return posterior.info_gain(item.feature, item.one_hot, params.eta);
        case Criterion::er:
            return posterior.entropy_reduction(item.feature);
        case Criterion::mic:
        default:
            return posterior.mic(item.feature, item.one_hot, params.eta);
    }
}

double hessian_weight(std::span<const double> p) {
    double sum = 0.0, sum_sq = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvalidInput("hessian_weight: probabilities must be finite and >= 0");
        }
        sum += v;
        sum_sq += v * v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw InvalidInput("hessian_weight: probabilities must sum to 1");
    }
    return 1.0 - sum_sq;
}

double hessian_weight(const Eigen::VectorXd& p) {
    return hessian_weight(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

namespace detail {

std::size_t fill_from_batch(MemoryStore& store, std::vector<MemoryItem>& batch,
                            std::vector<bool>& used) {
    std::size_t inserted = 0;
    for (std::size_t i = 0; i < batch.size() && !store.full(); ++i) {
        store.insert(batch[i]);
        used[i] = true;
        ++inserted;
    }
    return inserted;
}

std::optional<GreedyChoice> greedy_pick(const MemoryStore& store,
                                        const RunningMoments& moments_i,
                                        const RunningMoments& moments_l,
                                        const std::vector<MemoryItem>& batch,
                                        const std::vector<bool>& used,
                                        const SelectorParams& params) {
    const auto& posterior = store.posterior();
    const double learn_gate = threshold(moments_l, params.gamma_l);

    // b*: largest MIC among candidates clearing the learnability gate.
    // Ties break toward the lowest stream id.
    std::size_t best = batch.size();
    double best_mic = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (used[i]) continue;
        if (posterior.learnability(batch[i].feature, batch[i].one_hot) < learn_gate) continue;
        const double mic = posterior.mic(batch[i].feature, batch[i].one_hot, params.eta);
        if (best == batch.size() || mic > best_mic ||
            (mic == best_mic && batch[i].id < batch[best].id)) {
            best = i;
            best_mic = mic;
        }
    }
    if (best == batch.size()) {
        return std::nullopt;
    }

    // m*: smallest leave-one-out MIC against the buffer plus b*.
    auto plus = posterior;
    plus.add(batch[best].feature, batch[best].one_hot);
    std::size_t worst = 0;
    double worst_mic = std::numeric_limits<double>::infinity();
    bool have_worst = false;
    for (std::size_t m = 0; m < store.size(); ++m) {
        const auto& member = store.item(m);
        auto loo = plus.mic_leave_one_out(member.feature, member.one_hot, params.eta);
        if (!loo) {
            // Downdate too ill-conditioned: score against a dense rebuild of
            // the pseudo buffer instead.
            const auto d = posterior.dim();
            const auto k = posterior.n_outputs();
            Eigen::MatrixXd feats(store.size(), d), targs(store.size(), k);
            Eigen::Index row = 0;
            for (std::size_t j = 0; j < store.size(); ++j) {
                if (j == m) continue;
                feats.row(row) = store.item(j).feature.values.transpose();
                targs.row(row) = store.item(j).one_hot.values.transpose();
                ++row;
            }
            feats.row(row) = batch[best].feature.values.transpose();
            targs.row(row) = batch[best].one_hot.values.transpose();
            const auto pseudo = PosteriorState::rebuild_from(
                feats, targs, std::sqrt(posterior.sigma2()), posterior.jitter());
            loo = pseudo.mic(member.feature, member.one_hot, params.eta);
        }
        if (!have_worst || *loo < worst_mic ||
            (*loo == worst_mic && member.id < store.item(worst).id)) {
            worst = m;
            worst_mic = *loo;
            have_worst = true;
        }
    }

    GreedyChoice choice{best, worst, false};
    choice.passed_improvement = best_mic >= worst_mic + threshold(moments_i, params.gamma_i);
    return choice;
}

void update_batch_moments(const MemoryStore& store, RunningMoments& moments_i,
                          RunningMoments& moments_l, const std::vector<MemoryItem>& batch,
                          const SelectorParams& params) {
    const auto& posterior = store.posterior();
    for (const auto& item : batch) {
        moments_i.update(posterior.mic(item.feature, item.one_hot, params.eta));
        moments_l.update(posterior.learnability(item.feature, item.one_hot));
    }
}

} // namespace detail

void infogs_observe_batch(MemoryStore& store, RunningMoments& moments_i,
                          RunningMoments& moments_l, std::vector<MemoryItem> batch,
                          const SelectorParams& params) {
    std::vector<bool> used(batch.size(), false);
    detail::fill_from_batch(store, batch, used);
    if (store.full()) {
        for (std::size_t pass = 0; pass < batch.size(); ++pass) {
            const auto pick = detail::greedy_pick(store, moments_i, moments_l,
                                                  batch, used, params);
            if (!pick) break;
            if (!pick->passed_improvement) break;  // early return branch
            store.replace(pick->memory_index, batch[pick->batch_index]);
            used[pick->batch_index] = true;
        }
    }
    detail::update_batch_moments(store, moments_i, moments_l, batch, params);
}

} // namespace msel
