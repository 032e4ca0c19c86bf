#pragma once

#include <optional>
#include <random>
#include <unordered_map>

#include "fcvi/index_backend.hpp"

namespace fcvi {

struct HnswParams {
    std::size_t M = 16;
    std::size_t ef_construction = 200;

    void validate() const {
        if (M < 2) throw std::invalid_argument("hnsw: M must be >= 2");
        if (ef_construction < M) throw std::invalid_argument("hnsw: ef_construction must be >= M");
    }
};

/// From-scratch hierarchical navigable small world index. Node levels are drawn
/// as floor(-ln(U) / ln(M)); construction links each node per level through an
/// ef_construction beam plus the distance-based diversity heuristic, keeping
/// adjacency symmetric (back-links of pruned edges are dropped too). Degree is
/// capped at M per upper level and 2M at level 0. Deletes are tombstones:
/// traversed, never returned. Deterministic for a fixed seed and insertion
/// order.
class HnswIndex final : public IndexBackend {
public:
    HnswIndex(std::size_t dim, HnswParams params, std::uint64_t seed);

    void build(const FloatMatrix& vectors) override;
    void insert(std::uint32_t id, std::span<const float> v) override;
    void mark_deleted(std::uint32_t id) override;
    std::vector<SearchHit> search(std::span<const float> q, std::size_t count,
                                  std::size_t ef_search) const override;
    std::size_t size() const override { return live_; }
    std::size_t dim() const override { return dim_; }
    std::size_t memory_bytes() const override;

    const HnswParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    void save(std::ostream& os) const;
    static std::unique_ptr<HnswIndex> load(std::istream& is);

    // introspection (tests, persistence checks)
    std::size_t node_count() const { return external_.size(); }
    int max_level() const { return max_level_; }
    std::optional<std::uint32_t> entry_point() const;
    int level_of(std::uint32_t id) const;
    std::vector<std::uint32_t> neighbors_of(std::uint32_t id, int level) const;
    bool is_deleted(std::uint32_t id) const;

    bool operator==(const HnswIndex& other) const;

private:
    using dist_node = std::pair<double, std::uint32_t>;

    std::span<const float> row(std::uint32_t internal) const {
        return {data_.data() + std::size_t(internal) * dim_, dim_};
    }
    double dist_to(std::span<const float> q, std::uint32_t internal) const {
        return l2_sq(q, row(internal));
    }

    int sample_level();
    std::uint32_t greedy_descend(std::span<const float> q, std::uint32_t start, int from_level,
                                 int to_level) const;
    std::vector<dist_node> search_layer(std::span<const float> q, std::uint32_t entry,
                                        std::size_t ef, int level, bool skip_deleted_results) const;
    std::vector<std::uint32_t> select_neighbors(std::vector<dist_node> candidates,
                                                std::size_t max_count) const;
    void shrink_links(std::uint32_t node, int level, std::size_t cap);
    void reassign_entry();
    std::uint32_t internal_of(std::uint32_t id) const;

    std::size_t dim_;
    HnswParams params_;
    std::uint64_t seed_;
    double ml_;
    std::mt19937_64 level_gen_;
    std::uint64_t level_draws_ = 0;

    std::vector<float> data_;
    std::vector<std::uint32_t> external_;
    std::unordered_map<std::uint32_t, std::uint32_t> to_internal_;
    std::vector<int> levels_;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [node][level]
    std::vector<char> deleted_;
    std::int64_t entry_ = -1;
    int max_level_ = -1;
    std::size_t live_ = 0;
};

/// Builds a graph over rows with ids 0..n-1 (sequential, seed-deterministic).
std::unique_ptr<HnswIndex> hnsw_build(const FloatMatrix& vectors, HnswParams params,
                                      std::uint64_t seed);

std::unique_ptr<IndexBackend> make_backend(BackendChoice choice, std::size_t dim,
                                           HnswParams params, std::uint64_t seed);

}  // namespace fcvi
