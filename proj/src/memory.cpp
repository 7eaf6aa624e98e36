#include "msel/memory.hpp"

#include <utility>

namespace msel {

MemoryItem make_memory_item(std::int64_t id, Eigen::VectorXd raw, int label, int n_classes) {
    MemoryItem item;
    item.id = id;
    item.feature = normalize_feature(raw);
    item.raw_feature = std::move(raw);
    item.label = label;
    item.one_hot = one_hot(label, n_classes);
    return item;
}

MemoryStore::MemoryStore(std::size_t budget, PosteriorState posterior, std::int64_t rebuild_period)
    : budget_(budget), posterior_(std::move(posterior)), rebuild_period_(rebuild_period) {
    if (budget_ < 1) {
        throw InvalidConfig("memory: budget must be >= 1");
    }
    if (rebuild_period_ < 1) {
        throw InvalidConfig("memory: rebuild period must be >= 1");
    }
    items_.reserve(budget_);
}

void MemoryStore::validate(const MemoryItem& item) const {
    if (item.label < 0 || item.label >= posterior_.n_outputs()) {
        throw InvalidInput("memory: item label outside [0, K)");
    }
    if (item.one_hot.size() != posterior_.n_outputs() ||
        item.one_hot.values(item.label) != 1.0 ||
        item.one_hot.values.sum() != 1.0) {
        throw InvalidInput("memory: one-hot target inconsistent with label");
    }
    if (item.feature.size() != posterior_.dim()) {
        throw InvalidInput("memory: feature dimension mismatch");
    }
}

void MemoryStore::insert(MemoryItem item) {
    if (full()) {
        throw CapacityError("memory: buffer is full; use replace");
    }
    validate(item);
    posterior_.add(item.feature, item.one_hot);
    items_.push_back(std::move(item));
    maybe_periodic_rebuild();
}

MemoryItem MemoryStore::replace(std::size_t index, MemoryItem item) {
    if (index >= items_.size()) {
        throw InvalidInput("memory: replace index out of range");
    }
    validate(item);
    MemoryItem evicted = std::move(items_[index]);
    const bool clean = posterior_.try_remove(evicted.feature, evicted.one_hot);
    if (clean) {
        posterior_.add(item.feature, item.one_hot);
    }
    items_[index] = std::move(item);
    if (!clean) {
        rebuild_posterior();
    } else {
        maybe_periodic_rebuild();
    }
    return evicted;
}

void MemoryStore::refresh_features(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map) {
    for (auto& item : items_) {
        item.raw_feature = map(item.raw_feature);
        item.feature = normalize_feature(item.raw_feature);
    }
    rebuild_posterior();
}

std::vector<std::int64_t> MemoryStore::class_counts() const {
    std::vector<std::int64_t> counts(posterior_.n_outputs(), 0);
    for (const auto& item : items_) {
        ++counts[static_cast<std::size_t>(item.label)];
    }
    return counts;
}

std::vector<std::size_t> MemoryStore::class_slots(int label) const {
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (items_[i].label == label) {
            slots.push_back(i);
        }
    }
    return slots;
}

void MemoryStore::rebuild_posterior() {
    const auto m = static_cast<Eigen::Index>(items_.size());
    Eigen::MatrixXd features(m, posterior_.dim());
    Eigen::MatrixXd targets(m, posterior_.n_outputs());
    for (Eigen::Index i = 0; i < m; ++i) {
        features.row(i) = items_[static_cast<std::size_t>(i)].feature.values.transpose();
        targets.row(i) = items_[static_cast<std::size_t>(i)].one_hot.values.transpose();
    }
    posterior_ = PosteriorState::rebuild_from(features, targets,
                                              std::sqrt(posterior_.sigma2()),
                                              posterior_.jitter());
}

void MemoryStore::maybe_periodic_rebuild() {
    if (posterior_.ops_since_rebuild() >= rebuild_period_) {
        rebuild_posterior();
    }
}

} // namespace msel
