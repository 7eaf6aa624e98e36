#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "msel/bayes.hpp"

namespace msel {

// One buffered observation. `id` is the unique stream index of the
// observation; `logits` are carried for downstream replay systems but never
// consulted by any selector.
struct MemoryItem {
    std::int64_t id = 0;
    Eigen::VectorXd raw_feature;
    FeatureVector feature;
    int label = 0;
    OneHotTarget one_hot;
    std::optional<Eigen::VectorXd> logits;
};

MemoryItem make_memory_item(std::int64_t id, Eigen::VectorXd raw, int label, int n_classes);

// Budgeted memory buffer owning the scorer state. Every insert and replace
// applies the matching rank-one updates, so the posterior always reflects
// exactly the buffered points; after `rebuild_period` rank-one operations the
// posterior is recomputed from scratch to bound drift. One logical thread at
// a time.
class MemoryStore {
public:
    MemoryStore(std::size_t budget, PosteriorState posterior, std::int64_t rebuild_period = 512);

    std::size_t size() const { return items_.size(); }
    std::size_t budget() const { return budget_; }
    bool full() const { return items_.size() >= budget_; }
    const MemoryItem& item(std::size_t i) const { return items_.at(i); }
    const std::vector<MemoryItem>& items() const { return items_; }
    const PosteriorState& posterior() const { return posterior_; }
    int n_classes() const { return posterior_.n_outputs(); }

    // Appends below budget. Throws CapacityError when full.
    void insert(MemoryItem item);

    // Swaps the item at `index` for the new one and returns the evicted item.
    // The posterior sees a rank-one downdate plus update; if the downdate is
    // too ill-conditioned it is rebuilt from the final buffer instead.
    MemoryItem replace(std::size_t index, MemoryItem item);

    // Reapplies the feature map to every stored raw feature, renormalizes,
    // and rebuilds the posterior (rank-one updates cannot express a change
    // of all rows at once).
    void refresh_features(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map);

    // Per-class item counts; sums to size().
    std::vector<std::int64_t> class_counts() const;

    // Indices of items with the given label, in buffer order.
    std::vector<std::size_t> class_slots(int label) const;

    void rebuild_posterior();

private:
    void validate(const MemoryItem& item) const;
    void maybe_periodic_rebuild();

    std::vector<MemoryItem> items_;
    std::size_t budget_;
    PosteriorState posterior_;
    std::int64_t rebuild_period_;
};

} // namespace msel
