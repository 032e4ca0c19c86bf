#pragma once

#include <unordered_map>

#include "fcvi/index_backend.hpp"

namespace fcvi {

/// Exact exhaustive-scan index over flat row-major float storage. Serves as the
/// ground-truth oracle for every recall measurement.
class BruteForceIndex final : public IndexBackend {
public:
    explicit BruteForceIndex(std::size_t dim) : dim_(dim) {}

    void build(const FloatMatrix& vectors) override;
    void insert(std::uint32_t id, std::span<const float> v) override;
    void mark_deleted(std::uint32_t id) override;
    std::vector<SearchHit> search(std::span<const float> q, std::size_t count,
                                  std::size_t search_effort = 0) const override;
    std::size_t size() const override { return live_; }
    std::size_t dim() const override { return dim_; }
    std::size_t memory_bytes() const override;

private:
    std::size_t dim_;
    std::vector<float> data_;            // row i belongs to ids_[i]
    std::vector<std::uint32_t> ids_;
    std::vector<bool> deleted_;
    std::unordered_map<std::uint32_t, std::size_t> id_to_row_;
    std::size_t live_ = 0;
};

}  // namespace fcvi
