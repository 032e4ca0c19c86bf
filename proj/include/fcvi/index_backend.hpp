#pragma once

#include <iosfwd>
#include <memory>

#include "fcvi/core.hpp"

namespace fcvi {

struct SearchHit {
    std::uint32_t id = 0;
    double distance = 0.0;
};

enum class BackendChoice { brute_force, hnsw };

const char* backend_name(BackendChoice b);
BackendChoice backend_from_name(const std::string& name);

/// Vector index over raw float rows. search returns exact Euclidean distances
/// between stored and query vectors, ascending, ties broken by ascending id;
/// deleted ids never appear. Result count is min(count, live size).
class IndexBackend {
public:
    virtual ~IndexBackend() = default;

    /// Bulk-builds over rows with ids 0..n-1.
    virtual void build(const FloatMatrix& vectors) = 0;

    virtual void insert(std::uint32_t id, std::span<const float> v) = 0;
    virtual void mark_deleted(std::uint32_t id) = 0;

    virtual std::vector<SearchHit> search(std::span<const float> q, std::size_t count,
                                          std::size_t search_effort) const = 0;

    /// Live (non-deleted) element count.
    virtual std::size_t size() const = 0;
    virtual std::size_t dim() const = 0;

    virtual std::size_t memory_bytes() const = 0;
};

}  // namespace fcvi
