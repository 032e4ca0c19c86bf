#include "fcvi/hnsw.hpp"

#include <algorithm>
#include <queue>

#include "fcvi/binary_io.hpp"
#include "fcvi/brute_force.hpp"

namespace fcvi {

namespace {

struct MinFirst {
    bool operator()(const std::pair<double, std::uint32_t>& a,
                    const std::pair<double, std::uint32_t>& b) const {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    }
};

struct MaxFirst {
    bool operator()(const std::pair<double, std::uint32_t>& a,
                    const std::pair<double, std::uint32_t>& b) const {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    }
};

}  // namespace

HnswIndex::HnswIndex(std::size_t dim, HnswParams params, std::uint64_t seed)
    : dim_(dim), params_(params), seed_(seed), level_gen_(seed) {
    params_.validate();
    if (dim_ == 0) throw std::invalid_argument("hnsw: dimension must be positive");
    ml_ = 1.0 / std::log(double(params_.M));
}

int HnswIndex::sample_level() {
    double u;
    do {
        u = double(level_gen_() >> 11) * 0x1.0p-53;
        ++level_draws_;
    } while (u <= 0.0);
    return int(std::floor(-std::log(u) * ml_));
}

std::uint32_t HnswIndex::internal_of(std::uint32_t id) const {
    auto it = to_internal_.find(id);
    if (it == to_internal_.end()) throw std::invalid_argument("unknown id: " + std::to_string(id));
    return it->second;
}

void HnswIndex::build(const FloatMatrix& vectors) {
    if (vectors.cols != dim_) throw std::invalid_argument("build: dimension mismatch");
    for (std::size_t i = 0; i < vectors.rows; ++i) insert(std::uint32_t(i), vectors.row(i));
}

std::uint32_t HnswIndex::greedy_descend(std::span<const float> q, std::uint32_t start,
                                        int from_level, int to_level) const {
    std::uint32_t cur = start;
    double cur_d = dist_to(q, cur);
    for (int lc = from_level; lc > to_level; --lc) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::uint32_t nb : links_[cur][std::size_t(lc)]) {
                double d = dist_to(q, nb);
                if (d < cur_d) {
                    cur_d = d;
                    cur = nb;
                    improved = true;
                }
            }
        }
    }
    return cur;
}

std::vector<HnswIndex::dist_node> HnswIndex::search_layer(std::span<const float> q,
                                                          std::uint32_t entry, std::size_t ef,
                                                          int level,
                                                          bool skip_deleted_results) const {
    std::vector<char> visited(external_.size(), 0);
    std::priority_queue<dist_node, std::vector<dist_node>, MinFirst> candidates;
    std::priority_queue<dist_node, std::vector<dist_node>, MaxFirst> results;

    double d0 = dist_to(q, entry);
    visited[entry] = 1;
    candidates.emplace(d0, entry);
    if (!skip_deleted_results || !deleted_[entry]) results.emplace(d0, entry);

    while (!candidates.empty()) {
        auto [d, c] = candidates.top();
        double lower = results.size() >= ef ? results.top().first
                                            : std::numeric_limits<double>::infinity();
        if (d > lower) break;
        candidates.pop();
        for (std::uint32_t nb : links_[c][std::size_t(level)]) {
            if (visited[nb]) continue;
            visited[nb] = 1;
            double dn = dist_to(q, nb);
            if (results.size() < ef || dn < results.top().first) {
                candidates.emplace(dn, nb);
                if (!skip_deleted_results || !deleted_[nb]) {
                    results.emplace(dn, nb);
                    if (results.size() > ef) results.pop();
                }
            }
        }
    }

    std::vector<dist_node> out;
    out.reserve(results.size());
    while (!results.empty()) {
        out.push_back(results.top());
        results.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<dist_node> candidates,
                                                       std::size_t max_count) const {
    std::sort(candidates.begin(), candidates.end());
    if (candidates.size() <= max_count) {
        std::vector<std::uint32_t> all;
        all.reserve(candidates.size());
        for (auto& [d, n] : candidates) all.push_back(n);
        return all;
    }
    std::vector<std::uint32_t> selected;
    selected.reserve(max_count);
    for (auto& [d, n] : candidates) {
        if (selected.size() >= max_count) break;
        bool keep = true;
        for (std::uint32_t s : selected) {
            if (l2_sq(row(n), row(s)) < d) {
                keep = false;
                break;
            }
        }
        if (keep) selected.push_back(n);
    }
    return selected;
}

void HnswIndex::shrink_links(std::uint32_t node, int level, std::size_t cap) {
    auto& lst = links_[node][std::size_t(level)];
    if (lst.size() <= cap) return;
    std::vector<dist_node> cand;
    cand.reserve(lst.size());
    for (std::uint32_t nb : lst) cand.emplace_back(dist_to(row(node), nb), nb);
    std::vector<std::uint32_t> selected = select_neighbors(std::move(cand), cap);

    // symmetric removal of pruned back-links
    for (std::uint32_t old : lst) {
        if (std::find(selected.begin(), selected.end(), old) != selected.end()) continue;
        auto& back = links_[old][std::size_t(level)];
        back.erase(std::remove(back.begin(), back.end(), node), back.end());
    }
    lst = std::move(selected);
}

void HnswIndex::insert(std::uint32_t id, std::span<const float> v) {
    if (v.size() != dim_) throw std::invalid_argument("insert: dimension mismatch");
    if (to_internal_.count(id)) throw std::invalid_argument("duplicate id: " + std::to_string(id));

    std::uint32_t internal = std::uint32_t(external_.size());
    int level = sample_level();
    data_.insert(data_.end(), v.begin(), v.end());
    external_.push_back(id);
    to_internal_.emplace(id, internal);
    levels_.push_back(level);
    links_.emplace_back(std::size_t(level) + 1);
    deleted_.push_back(0);
    ++live_;

    if (internal == 0) {
        entry_ = 0;
        max_level_ = level;
        return;
    }

    std::span<const float> q = row(internal);
    std::uint32_t cur = std::uint32_t(entry_);
    if (max_level_ > level) cur = greedy_descend(q, cur, max_level_, level);

    for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
        auto candidates = search_layer(q, cur, params_.ef_construction, lc, false);
        cur = candidates.front().second;
        std::vector<std::uint32_t> selected = select_neighbors(candidates, params_.M);
        links_[internal][std::size_t(lc)] = selected;
        std::size_t cap = lc == 0 ? 2 * params_.M : params_.M;
        for (std::uint32_t s : selected) {
            links_[s][std::size_t(lc)].push_back(internal);
            shrink_links(s, lc, cap);
        }
    }

    if (level > max_level_ || deleted_[std::size_t(entry_)]) {
        if (level > max_level_) {
            max_level_ = level;
            entry_ = internal;
        } else {
            reassign_entry();
        }
    }
}

void HnswIndex::reassign_entry() {
    std::int64_t best = -1;
    int best_level = -1;
    for (std::size_t i = 0; i < external_.size(); ++i) {
        if (deleted_[i]) continue;
        if (levels_[i] > best_level) {
            best_level = levels_[i];
            best = std::int64_t(i);
        }
    }
    // max_level_ always equals the entry's own level so descents stay in range
    if (best >= 0) {
        entry_ = best;
        max_level_ = best_level;
    }
    // all nodes deleted: keep the old entry for routing; searches return empty
}

void HnswIndex::mark_deleted(std::uint32_t id) {
    std::uint32_t internal = internal_of(id);
    if (deleted_[internal]) throw std::invalid_argument("unknown id: " + std::to_string(id));
    deleted_[internal] = 1;
    --live_;
    if (entry_ == std::int64_t(internal)) reassign_entry();
}

std::vector<SearchHit> HnswIndex::search(std::span<const float> q, std::size_t count,
                                         std::size_t ef_search) const {
    if (q.size() != dim_) throw std::invalid_argument("search: dimension mismatch");
    if (external_.empty() || live_ == 0 || count == 0) return {};

    std::size_t ef = std::max(ef_search, count);
    std::uint32_t cur = greedy_descend(q, std::uint32_t(entry_), max_level_, 0);
    auto beam = search_layer(q, cur, ef, 0, true);

    std::vector<SearchHit> hits;
    hits.reserve(beam.size());
    for (auto& [d, n] : beam) hits.push_back({external_[n], std::sqrt(d)});
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    if (hits.size() > count) hits.resize(count);
    return hits;
}

std::size_t HnswIndex::memory_bytes() const {
    std::size_t bytes = data_.size() * sizeof(float) + external_.size() * sizeof(std::uint32_t) +
                        levels_.size() * sizeof(int) + deleted_.size();
    for (const auto& per_node : links_)
        for (const auto& lst : per_node) bytes += lst.size() * sizeof(std::uint32_t) + sizeof(std::uint32_t);
    return bytes;
}

std::optional<std::uint32_t> HnswIndex::entry_point() const {
    if (entry_ < 0 || live_ == 0) return std::nullopt;
    if (deleted_[std::size_t(entry_)]) return std::nullopt;
    return external_[std::size_t(entry_)];
}

int HnswIndex::level_of(std::uint32_t id) const { return levels_[internal_of(id)]; }

std::vector<std::uint32_t> HnswIndex::neighbors_of(std::uint32_t id, int level) const {
    std::uint32_t internal = internal_of(id);
    if (level < 0 || level > levels_[internal]) return {};
    std::vector<std::uint32_t> out;
    for (std::uint32_t nb : links_[internal][std::size_t(level)]) out.push_back(external_[nb]);
    return out;
}

bool HnswIndex::is_deleted(std::uint32_t id) const { return deleted_[internal_of(id)] != 0; }

bool HnswIndex::operator==(const HnswIndex& other) const {
    return dim_ == other.dim_ && params_.M == other.params_.M &&
           params_.ef_construction == other.params_.ef_construction && seed_ == other.seed_ &&
           data_ == other.data_ && external_ == other.external_ && levels_ == other.levels_ &&
           links_ == other.links_ && deleted_ == other.deleted_ && entry_ == other.entry_ &&
           max_level_ == other.max_level_;
}

void HnswIndex::save(std::ostream& os) const {
    write_le<std::uint64_t>(os, dim_);
    write_le<std::uint64_t>(os, params_.M);
    write_le<std::uint64_t>(os, params_.ef_construction);
    write_le<std::uint64_t>(os, seed_);
    write_le<std::uint64_t>(os, level_draws_);
    write_le<std::uint64_t>(os, external_.size());
    write_le<std::int64_t>(os, entry_);
    write_le<std::int32_t>(os, max_level_);
    write_le_array(os, external_.data(), external_.size());
    for (int lv : levels_) write_le<std::int32_t>(os, lv);
    os.write(reinterpret_cast<const char*>(deleted_.data()), std::streamsize(deleted_.size()));
    write_le_array(os, data_.data(), data_.size());
    for (const auto& per_node : links_) {
        for (const auto& lst : per_node) {
            write_le<std::uint32_t>(os, std::uint32_t(lst.size()));
            write_le_array(os, lst.data(), lst.size());
        }
    }
}

std::unique_ptr<HnswIndex> HnswIndex::load(std::istream& is) {
    auto dim = read_le<std::uint64_t>(is);
    HnswParams params;
    params.M = read_le<std::uint64_t>(is);
    params.ef_construction = read_le<std::uint64_t>(is);
    auto seed = read_le<std::uint64_t>(is);
    auto draws = read_le<std::uint64_t>(is);
    auto count = read_le<std::uint64_t>(is);

    auto idx = std::make_unique<HnswIndex>(std::size_t(dim), params, seed);
    idx->entry_ = read_le<std::int64_t>(is);
    idx->max_level_ = read_le<std::int32_t>(is);
    idx->external_.resize(count);
    read_le_array(is, idx->external_.data(), count);
    idx->levels_.resize(count);
    for (auto& lv : idx->levels_) lv = read_le<std::int32_t>(is);
    idx->deleted_.resize(count);
    is.read(reinterpret_cast<char*>(idx->deleted_.data()), std::streamsize(count));
    if (!is) throw IoError("unexpected end of stream");
    idx->data_.resize(count * dim);
    read_le_array(is, idx->data_.data(), idx->data_.size());
    idx->links_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        idx->links_[i].resize(std::size_t(idx->levels_[i]) + 1);
        for (auto& lst : idx->links_[i]) {
            auto sz = read_le<std::uint32_t>(is);
            lst.resize(sz);
            read_le_array(is, lst.data(), sz);
        }
    }
    idx->live_ = 0;
    for (std::size_t i = 0; i < count; ++i) {
        idx->to_internal_.emplace(idx->external_[i], std::uint32_t(i));
        if (!idx->deleted_[i]) ++idx->live_;
    }
    // replay level draws so post-load inserts continue the same stream
    while (idx->level_draws_ < draws) idx->sample_level();
    return idx;
}

std::unique_ptr<HnswIndex> hnsw_build(const FloatMatrix& vectors, HnswParams params,
                                      std::uint64_t seed) {
    auto idx = std::make_unique<HnswIndex>(vectors.cols, params, seed);
    idx->build(vectors);
    return idx;
}

std::unique_ptr<IndexBackend> make_backend(BackendChoice choice, std::size_t dim,
                                           HnswParams params, std::uint64_t seed) {
    if (choice == BackendChoice::brute_force) return std::make_unique<BruteForceIndex>(dim);
    return std::make_unique<HnswIndex>(dim, params, seed);
}

}  // namespace fcvi
