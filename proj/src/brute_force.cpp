#include "fcvi/brute_force.hpp"

#include <algorithm>

namespace fcvi {

const char* backend_name(BackendChoice b) {
    return b == BackendChoice::brute_force ? "bf" : "hnsw";
}

BackendChoice backend_from_name(const std::string& name) {
    if (name == "bf" || name == "brute_force") return BackendChoice::brute_force;
    if (name == "hnsw") return BackendChoice::hnsw;
    throw std::invalid_argument("unknown backend: " + name);
}

void BruteForceIndex::build(const FloatMatrix& vectors) {
    if (vectors.cols != dim_) throw std::invalid_argument("build: dimension mismatch");
    data_ = vectors.data;
    ids_.resize(vectors.rows);
    deleted_.assign(vectors.rows, false);
    id_to_row_.clear();
    for (std::size_t i = 0; i < vectors.rows; ++i) {
        ids_[i] = std::uint32_t(i);
        id_to_row_.emplace(std::uint32_t(i), i);
    }
    live_ = vectors.rows;
}

void BruteForceIndex::insert(std::uint32_t id, std::span<const float> v) {
    if (v.size() != dim_) throw std::invalid_argument("insert: dimension mismatch");
    if (id_to_row_.count(id)) throw std::invalid_argument("duplicate id: " + std::to_string(id));
    id_to_row_.emplace(id, ids_.size());
    ids_.push_back(id);
    deleted_.push_back(false);
    data_.insert(data_.end(), v.begin(), v.end());
    ++live_;
}

void BruteForceIndex::mark_deleted(std::uint32_t id) {
    auto it = id_to_row_.find(id);
    if (it == id_to_row_.end() || deleted_[it->second])
        throw std::invalid_argument("unknown id: " + std::to_string(id));
    deleted_[it->second] = true;
    --live_;
}

std::vector<SearchHit> BruteForceIndex::search(std::span<const float> q, std::size_t count,
                                               std::size_t) const {
    if (q.size() != dim_) throw std::invalid_argument("search: dimension mismatch");
    std::vector<SearchHit> hits;
    hits.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (deleted_[i]) continue;
        std::span<const float> row(data_.data() + i * dim_, dim_);
        hits.push_back({ids_[i], std::sqrt(l2_sq(q, row))});
    }
    std::size_t take = std::min(count, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + std::ptrdiff_t(take), hits.end(),
                      [](const SearchHit& a, const SearchHit& b) {
                          if (a.distance != b.distance) return a.distance < b.distance;
                          return a.id < b.id;
                      });
    hits.resize(take);
    return hits;
}

std::size_t BruteForceIndex::memory_bytes() const {
    return data_.size() * sizeof(float) + ids_.size() * sizeof(std::uint32_t) + deleted_.size() / 8;
}

}  // namespace fcvi
