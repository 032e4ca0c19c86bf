#pragma once

#include <filesystem>

#include "fcvi/bench.hpp"
#include "fcvi/engine.hpp"

namespace fcvi::storage {

// Container corruption errors, each distinct so callers can tell them apart.
struct BadMagicError : IoError {
    using IoError::IoError;
};
struct VersionError : IoError {
    using IoError::IoError;
};
struct CrcError : IoError {
    using IoError::IoError;
};
struct TruncatedError : IoError {
    using IoError::IoError;
};

inline constexpr std::uint32_t kContainerVersion = 1;

std::uint32_t crc32(const unsigned char* data, std::size_t len, std::uint32_t seed = 0);

/// Dataset-only container: header + NormStats-free sections (stats are refit on
/// load paths that need them). Layout documented in README.
void save_dataset(const RecordStore& store, const std::string& path);
RecordStore load_dataset(const std::string& path);

/// Full index container: header, NormStats, schema JSON, raw vectors/filters,
/// transformed vectors, optional centers/W, optional serialized HNSW graph,
/// trailing CRC32. Loading never recomputes psi; the graph is rebuilt from the
/// stored seed only when its section is absent.
void save_index(const FcviIndex& index, const std::string& path);
FcviIndex load_index(const std::string& path);

/// Summary of a container file without materializing the index.
struct ContainerInfo {
    bool has_index = false;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t m = 0;
    std::size_t padded_dim = 0;
    std::string variant;
    double alpha = 0.0;
    std::string backend;
    bool has_graph = false;
    bool has_centers = false;
    bool has_projection = false;
    std::uint64_t rng_seed = 0;
};
ContainerInfo inspect_container(const std::string& path);

/// Pull variant data out of an existing container.
Matrix load_projection_matrix(const std::string& path);
Matrix load_cluster_centers(const std::string& path);

/// fvecs: per row, an int32 little-endian dimension then that many float32s.
FloatMatrix load_fvecs(const std::string& path);
void save_fvecs(const FloatMatrix& m, const std::string& path);

/// bvecs: per row, an int32 dimension then that many uint8s (widened to float).
FloatMatrix load_bvecs(const std::string& path);
void save_bvecs(const FloatMatrix& m, const std::string& path);

/// CSV of raw attribute values with a header row naming every schema attribute
/// (exact set match, order free). Numeric parse failures report line numbers.
std::vector<RawAttributes> load_attributes_csv(const std::string& path,
                                               const FilterSchema& schema);
void save_attributes_csv(const RecordStore& store, const std::string& path);

FloatMatrix encode_attribute_rows(const FilterSchema& schema,
                                  const std::vector<RawAttributes>& rows);

/// JSON-lines query stream: {"vector": [...], "filter": {"predicates": [...]}}.
void save_queries_jsonl(const std::vector<bench::BenchQuery>& queries, const std::string& path);
std::vector<bench::BenchQuery> load_queries_jsonl(const std::string& path);

}  // namespace fcvi::storage
