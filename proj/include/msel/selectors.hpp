#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "msel/memory.hpp"

namespace msel {

enum class Criterion { mic, ig, er };

struct SelectorParams {
    double eta = 1.0;
    double gamma_i = 0.0;
    double gamma_l = 0.0;
    Criterion criterion = Criterion::mic;
};

// Welford single-pass tracker; variance uses the count divisor.
struct RunningMoments {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void update(double x);
    double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
    double stddev() const;
};

// mean + gamma * std. Returns -inf while fewer than two values have been
// seen, so early observations always pass; a non-finite gamma short-circuits
// to itself (gamma = -inf must disable the gate even when std is 0).
double threshold(const RunningMoments& m, double gamma);

// Points admitted to reservoir consideration so far.
struct ReservoirCount {
    std::int64_t n = 0;
};

// Criterion value of a candidate against the current posterior.
double criterion_value(const PosteriorState& posterior, const MemoryItem& item,
                       const SelectorParams& params);

// Total output-space Hessian 1 - sum p_k^2 of a probability vector.
double hessian_weight(std::span<const double> p);
double hessian_weight(const Eigen::VectorXd& p);

// Plain reservoir sampling: insert below budget, otherwise replace a
// uniformly random slot with probability budget / (n + 1).
template <class Urbg>
void rs_observe(MemoryStore& store, ReservoirCount& count, MemoryItem item, Urbg& rng) {
    if (!store.full()) {
        store.insert(std::move(item));
    } else {
        std::uniform_int_distribution<std::int64_t> draw(1, count.n + 1);
        const std::int64_t i = draw(rng);
        if (i <= static_cast<std::int64_t>(store.budget())) {
            store.replace(static_cast<std::size_t>(i - 1), std::move(item));
        }
    }
    ++count.n;
}

// Weighted reservoir sampling. Each slot is taken with probability
// min(weight / wbar, 1/M); a constant weight stream reduces to rs_observe
// in distribution.
template <class Urbg>
void wrs_observe(MemoryStore& store, double& wbar, MemoryItem item, double weight, Urbg& rng) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw InvalidInput("wrs: weight must be finite and >= 0");
    }
    wbar += weight;
    if (!store.full()) {
        store.insert(std::move(item));
        return;
    }
    const double m = static_cast<double>(store.budget());
    const double w_hat = wbar > 0.0 ? std::min(weight / wbar, 1.0 / m) : 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    if (u < m * w_hat) {
        auto slot = static_cast<std::size_t>(u / w_hat);
        if (slot >= store.budget()) slot = store.budget() - 1;
        store.replace(slot, std::move(item));
    }
}

// Class-balanced reservoir sampling. While the buffer has a class strictly
// larger (by buffered items) than the arrival's class, the new point evicts
// a random member of the largest class; otherwise the arrival competes in a
// per-class reservoir driven by its class's own observation count.
template <class Urbg>
void cbrs_observe(MemoryStore& store, std::vector<ReservoirCount>& per_class,
                  MemoryItem item, Urbg& rng) {
    const int y = item.label;
    if (y < 0 || y >= static_cast<int>(per_class.size())) {
        throw InvalidInput("cbrs: label outside the per-class count range");
    }
    if (!store.full()) {
        store.insert(std::move(item));
        ++per_class[static_cast<std::size_t>(y)].n;
        return;
    }
    const auto counts = store.class_counts();
    std::size_t k = 0;
    for (std::size_t j = 1; j < counts.size(); ++j) {
        if (counts[j] > counts[k]) k = j;
    }
    if (counts[k] > counts[static_cast<std::size_t>(y)]) {
        const auto slots = store.class_slots(static_cast<int>(k));
        std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
        store.replace(slots[pick(rng)], std::move(item));
        ++per_class[static_cast<std::size_t>(y)].n;
    } else {
        auto& cls = per_class[static_cast<std::size_t>(y)];
        const auto slots = store.class_slots(y);
        std::uniform_int_distribution<std::int64_t> draw(1, cls.n + 1);
        const std::int64_t i = draw(rng);
        if (i <= static_cast<std::int64_t>(slots.size())) {
            store.replace(slots[static_cast<std::size_t>(i - 1)], std::move(item));
        }
        ++cls.n;
    }
}

// Reservoir sampling restricted to points whose criterion clears the running
// information threshold. The criterion is evaluated against the pre-update
// posterior and feeds the moments whether or not the point was admitted.
template <class Urbg>
void infors_observe_batch(MemoryStore& store, RunningMoments& moments_i,
                          ReservoirCount& count, std::vector<MemoryItem> batch,
                          const SelectorParams& params, Urbg& rng) {
    for (auto& item : batch) {
        const double crit = criterion_value(store.posterior(), item, params);
        if (!store.full() || crit >= threshold(moments_i, params.gamma_i)) {
            rs_observe(store, count, std::move(item), rng);
        }
        moments_i.update(crit);
    }
}

namespace detail {

struct GreedyChoice {
    std::size_t batch_index;
    std::size_t memory_index;
    bool passed_improvement;
};

// One greedy pass: picks the learnability-gated MIC argmax b* and the
// leave-one-out argmin m*, then checks the information improvement. Returns
// nullopt when no candidate passes the learnability gate.
std::optional<GreedyChoice> greedy_pick(const MemoryStore& store,
                                        const RunningMoments& moments_i,
                                        const RunningMoments& moments_l,
                                        const std::vector<MemoryItem>& batch,
                                        const std::vector<bool>& used,
                                        const SelectorParams& params);

void update_batch_moments(const MemoryStore& store, RunningMoments& moments_i,
                          RunningMoments& moments_l, const std::vector<MemoryItem>& batch,
                          const SelectorParams& params);

std::size_t fill_from_batch(MemoryStore& store, std::vector<MemoryItem>& batch,
                            std::vector<bool>& used);

} // namespace detail

// Greedy selection: repeatedly replace the least informative memory point
// with the most informative batch point until the information improvement
// threshold fails.
void infogs_observe_batch(MemoryStore& store, RunningMoments& moments_i,
                          RunningMoments& moments_l, std::vector<MemoryItem> batch,
                          const SelectorParams& params);

// InfoGS with the replacement additionally gated by a reservoir acceptance
// draw; n counts every candidate that passed both thresholds.
template <class Urbg>
void infogs_rs_observe_batch(MemoryStore& store, RunningMoments& moments_i,
                             RunningMoments& moments_l, ReservoirCount& count,
                             std::vector<MemoryItem> batch, const SelectorParams& params,
                             Urbg& rng) {
    std::vector<bool> used(batch.size(), false);
    count.n += static_cast<std::int64_t>(detail::fill_from_batch(store, batch, used));
    if (store.full()) {
        for (std::size_t pass = 0; pass < batch.size(); ++pass) {
            const auto pick = detail::greedy_pick(store, moments_i, moments_l,
                                                  batch, used, params);
            if (!pick) break;
            if (!pick->passed_improvement) break;
            std::uniform_int_distribution<std::int64_t> draw(1, count.n + 1);
            const bool accept = draw(rng) <= static_cast<std::int64_t>(store.budget());
            ++count.n;
            if (accept) {
                store.replace(pick->memory_index, batch[pick->batch_index]);
            }
            used[pick->batch_index] = true;
        }
    }
    detail::update_batch_moments(store, moments_i, moments_l, batch, params);
}

} // namespace msel
