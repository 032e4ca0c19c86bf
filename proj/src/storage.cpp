#include "fcvi/storage.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fcvi/binary_io.hpp"

namespace fcvi::storage {

using nlohmann::json;

std::uint32_t crc32(const unsigned char* data, std::size_t len, std::uint32_t seed) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = seed ^ 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

namespace {

constexpr char kMagic[4] = {'F', 'C', 'V', 'I'};

constexpr std::uint32_t kFlagHasIndex = 1u << 0;
constexpr std::uint32_t kFlagBackendHnsw = 1u << 1;
constexpr std::uint32_t kFlagHasCenters = 1u << 2;
constexpr std::uint32_t kFlagHasProjection = 1u << 3;
constexpr std::uint32_t kFlagHasGraph = 1u << 4;

// Bounds-checked reader over an in-memory container image.
class BufReader {
public:
    BufReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    template <typename T>
    T scalar() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        if constexpr (!detail::is_little_endian()) {
            auto* p = reinterpret_cast<unsigned char*>(&v);
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
        }
        return v;
    }

    void bytes(void* dst, std::size_t len) {
        need(len);
        std::memcpy(dst, data_ + pos_, len);
        pos_ += len;
    }

    std::string str(std::size_t len) {
        need(len);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
        pos_ += len;
        return s;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t len) const {
        if (pos_ + len > size_) throw TruncatedError("truncated section in container");
    }
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

void append_le_f32(std::string& out, const float* data, std::size_t count) {
    static_assert(sizeof(float) == 4);
    std::size_t off = out.size();
    out.resize(off + count * 4);
    if constexpr (detail::is_little_endian()) {
        std::memcpy(out.data() + off, data, count * 4);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            unsigned char b[4];
            std::memcpy(b, data + i, 4);
            std::swap(b[0], b[3]);
            std::swap(b[1], b[2]);
            std::memcpy(out.data() + off + i * 4, b, 4);
        }
    }
}

void append_le_f64(std::string& out, const double* data, std::size_t count) {
    std::size_t off = out.size();
    out.resize(off + count * 8);
    if constexpr (detail::is_little_endian()) {
        std::memcpy(out.data() + off, data, count * 8);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            unsigned char b[8];
            std::memcpy(b, data + i, 8);
            for (int k = 0; k < 4; ++k) std::swap(b[k], b[7 - k]);
            std::memcpy(out.data() + off + i * 8, b, 8);
        }
    }
}

template <typename T>
void append_le_scalar(std::string& out, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (!detail::is_little_endian()) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
    out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

void append_section(std::string& out, const std::string& payload) {
    append_le_scalar<std::uint64_t>(out, payload.size());
    out += payload;
}

std::uint32_t variant_tag(TransformVariant v) {
    switch (v) {
        case TransformVariant::partition: return 1;
        case TransformVariant::cluster: return 2;
        case TransformVariant::embedding: return 3;
    }
    return 0;
}

TransformVariant variant_from_tag(std::uint32_t tag) {
    switch (tag) {
        case 1: return TransformVariant::partition;
        case 2: return TransformVariant::cluster;
        case 3: return TransformVariant::embedding;
    }
    throw IoError("container has unknown transform variant tag");
}

struct ContainerImage {
    std::uint32_t flags = 0;
    std::size_t n = 0, d = 0, m = 0, d_star = 0;
    std::uint32_t vtag = 0;
    double alpha = 0.0;
    std::uint64_t rng_seed = 0;
    std::string stats_section;
    std::string schema_section;
    std::string vectors_section;
    std::string filters_section;
    std::string transformed_section;
    std::string centers_section;
    std::string projection_section;
    std::string graph_section;

    std::string serialize() const {
        std::string out;
        out.append(kMagic, 4);
        append_le_scalar<std::uint32_t>(out, kContainerVersion);
        append_le_scalar<std::uint64_t>(out, d);
        append_le_scalar<std::uint64_t>(out, m);
        append_le_scalar<std::uint64_t>(out, d_star);
        append_le_scalar<std::uint64_t>(out, n);
        append_le_scalar<std::uint32_t>(out, vtag);
        append_le_scalar<double>(out, alpha);
        append_le_scalar<std::uint32_t>(out, flags);
        append_le_scalar<std::uint64_t>(out, rng_seed);
        append_section(out, stats_section);
        append_section(out, schema_section);
        append_section(out, vectors_section);
        append_section(out, filters_section);
        append_section(out, transformed_section);
        if (flags & kFlagHasCenters) append_section(out, centers_section);
        if (flags & kFlagHasProjection) append_section(out, projection_section);
        if (flags & kFlagHasGraph) append_section(out, graph_section);
        std::uint32_t crc = crc32(reinterpret_cast<const unsigned char*>(out.data()), out.size());
        append_le_scalar<std::uint32_t>(out, crc);
        return out;
    }
};

std::string read_file(const std::string& path) {
    if (path.empty()) throw IoError("empty path");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    if (path.empty()) throw IoError("empty path");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

std::string read_section(BufReader& r) {
    auto len = r.scalar<std::uint64_t>();
    if (len > r.remaining()) throw TruncatedError("truncated section in container");
    return r.str(std::size_t(len));
}

ContainerImage parse_container(const std::string& raw, const std::string& path) {
    if (raw.size() < 4 + 4) throw TruncatedError("container too short: " + path);
    if (std::memcmp(raw.data(), kMagic, 4) != 0)
        throw BadMagicError("bad magic in container: " + path);

    const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
    std::uint32_t stored_crc;
    {
        unsigned char b[4];
        std::memcpy(b, raw.data() + raw.size() - 4, 4);
        if constexpr (!detail::is_little_endian()) {
            std::swap(b[0], b[3]);
            std::swap(b[1], b[2]);
        }
        std::memcpy(&stored_crc, b, 4);
    }
    std::uint32_t actual_crc = crc32(bytes, raw.size() - 4);
    if (stored_crc != actual_crc)
        throw CrcError("CRC mismatch in container: " + path);

    BufReader r(bytes, raw.size() - 4);
    (void)r.str(4);  // magic
    auto version = r.scalar<std::uint32_t>();
    if (version != kContainerVersion)
        throw VersionError("unsupported container version " + std::to_string(version));

    ContainerImage img;
    img.d = std::size_t(r.scalar<std::uint64_t>());
    img.m = std::size_t(r.scalar<std::uint64_t>());
    img.d_star = std::size_t(r.scalar<std::uint64_t>());
    img.n = std::size_t(r.scalar<std::uint64_t>());
    img.vtag = r.scalar<std::uint32_t>();
    img.alpha = r.scalar<double>();
    img.flags = r.scalar<std::uint32_t>();
    img.rng_seed = r.scalar<std::uint64_t>();
    img.stats_section = read_section(r);
    img.schema_section = read_section(r);
    img.vectors_section = read_section(r);
    img.filters_section = read_section(r);
    img.transformed_section = read_section(r);
    if (img.flags & kFlagHasCenters) img.centers_section = read_section(r);
    if (img.flags & kFlagHasProjection) img.projection_section = read_section(r);
    if (img.flags & kFlagHasGraph) img.graph_section = read_section(r);
    if (r.remaining() != 0)
        throw TruncatedError("container section lengths do not cover the file: " + path);
    return img;
}

std::string stats_to_section(const NormStats& s) {
    std::string out;
    append_le_f64(out, s.vector_mean.data(), s.vector_mean.size());
    append_le_f64(out, s.vector_std.data(), s.vector_std.size());
    append_le_f64(out, s.filter_mean.data(), s.filter_mean.size());
    append_le_f64(out, s.filter_std.data(), s.filter_std.size());
    append_le_scalar<double>(out, s.epsilon);
    return out;
}

NormStats stats_from_section(const std::string& sec, std::size_t d, std::size_t m) {
    if (sec.size() != (2 * d + 2 * m + 1) * 8)
        throw TruncatedError("NormStats section has wrong length");
    BufReader r(reinterpret_cast<const unsigned char*>(sec.data()), sec.size());
    NormStats s;
    s.vector_mean.resize(d);
    s.vector_std.resize(d);
    s.filter_mean.resize(m);
    s.filter_std.resize(m);
    for (auto& x : s.vector_mean) x = r.scalar<double>();
    for (auto& x : s.vector_std) x = r.scalar<double>();
    for (auto& x : s.filter_mean) x = r.scalar<double>();
    for (auto& x : s.filter_std) x = r.scalar<double>();
    s.epsilon = r.scalar<double>();
    return s;
}

std::string float_matrix_to_section(const FloatMatrix& m) {
    std::string out;
    append_le_f32(out, m.data.data(), m.data.size());
    return out;
}

FloatMatrix float_matrix_from_section(const std::string& sec, std::size_t rows, std::size_t cols,
                                      const char* what) {
    if (sec.size() != rows * cols * 4)
        throw TruncatedError(std::string(what) + " section has wrong length");
    FloatMatrix m(rows, cols);
    BufReader r(reinterpret_cast<const unsigned char*>(sec.data()), sec.size());
    r.bytes(m.data.data(), sec.size());
    if constexpr (!detail::is_little_endian()) {
        for (auto& x : m.data) {
            unsigned char b[4];
            std::memcpy(b, &x, 4);
            std::swap(b[0], b[3]);
            std::swap(b[1], b[2]);
            std::memcpy(&x, b, 4);
        }
    }
    return m;
}

std::string matrix_to_section(const Matrix& m) {
    std::string out;
    append_le_scalar<std::uint64_t>(out, m.rows);
    append_le_scalar<std::uint64_t>(out, m.cols);
    append_le_f64(out, m.data.data(), m.data.size());
    return out;
}

Matrix matrix_from_section(const std::string& sec, const char* what) {
    BufReader r(reinterpret_cast<const unsigned char*>(sec.data()), sec.size());
    auto rows = std::size_t(r.scalar<std::uint64_t>());
    auto cols = std::size_t(r.scalar<std::uint64_t>());
    if (sec.size() != 16 + rows * cols * 8)
        throw TruncatedError(std::string(what) + " section has wrong length");
    Matrix m(rows, cols);
    for (auto& x : m.data) x = r.scalar<double>();
    return m;
}

}  // namespace

void save_dataset(const RecordStore& store, const std::string& path) {
    store.validate();
    ContainerImage img;
    img.n = store.size();
    img.d = store.dim();
    img.m = store.filter_dim();
    img.d_star = 0;
    img.vtag = 0;
    img.alpha = 0.0;
    img.flags = 0;
    img.schema_section = store.schema.to_json_string();
    img.vectors_section = float_matrix_to_section(store.vectors);
    img.filters_section = float_matrix_to_section(store.filters);
    write_file(path, img.serialize());
}

namespace {

RecordStore store_from_image(const ContainerImage& img) {
    RecordStore store;
    store.schema = FilterSchema::from_json_string(img.schema_section);
    if (store.schema.encoded_dim() != img.m)
        throw IoError("schema dimension disagrees with container header");
    store.vectors = float_matrix_from_section(img.vectors_section, img.n, img.d, "raw vectors");
    store.filters = float_matrix_from_section(img.filters_section, img.n, img.m, "raw filters");
    return store;
}

}  // namespace

RecordStore load_dataset(const std::string& path) {
    auto img = parse_container(read_file(path), path);
    return store_from_image(img);
}

void save_index(const FcviIndex& index, const std::string& path) {
    const auto& config = index.config();
    if (index.backend_choice() == BackendChoice::brute_force &&
        index.size() != index.store().size())
        throw IoError("brute-force container cannot carry tombstones; rebuild before saving");

    ContainerImage img;
    img.n = index.store().size();
    img.d = config.original_dim;
    img.m = config.filter_dim;
    img.d_star = config.padded_dim;
    img.vtag = variant_tag(config.variant);
    img.alpha = config.alpha;
    img.rng_seed = config.rng_seed;
    img.flags = kFlagHasIndex;
    img.stats_section = stats_to_section(index.stats());
    img.schema_section = index.store().schema.to_json_string();
    img.vectors_section = float_matrix_to_section(index.store().vectors);
    img.filters_section = float_matrix_to_section(index.store().filters);
    img.transformed_section = float_matrix_to_section(index.transformed());
    if (config.cluster_centers) {
        img.flags |= kFlagHasCenters;
        img.centers_section = matrix_to_section(*config.cluster_centers);
    }
    if (config.projection) {
        img.flags |= kFlagHasProjection;
        img.projection_section = matrix_to_section(*config.projection);
    }
    if (index.backend_choice() == BackendChoice::hnsw) {
        img.flags |= kFlagBackendHnsw;
        auto* graph = dynamic_cast<const HnswIndex*>(&index.backend());
        if (graph) {
            img.flags |= kFlagHasGraph;
            std::ostringstream os(std::ios::binary);
            graph->save(os);
            img.graph_section = os.str();
        }
    }
    write_file(path, img.serialize());
}

FcviIndex load_index(const std::string& path) {
    auto img = parse_container(read_file(path), path);
    if (!(img.flags & kFlagHasIndex)) throw IoError("container has no index: " + path);

    RecordStore store = store_from_image(img);
    NormStats stats = stats_from_section(img.stats_section, img.d, img.m);

    TransformConfig config;
    config.variant = variant_from_tag(img.vtag);
    config.alpha = img.alpha;
    config.original_dim = img.d;
    config.filter_dim = img.m;
    config.padded_dim = img.d_star;
    config.rng_seed = img.rng_seed;
    if (img.flags & kFlagHasCenters)
        config.cluster_centers = matrix_from_section(img.centers_section, "centers");
    if (img.flags & kFlagHasProjection)
        config.projection = matrix_from_section(img.projection_section, "projection");

    std::size_t t_dim = config.variant == TransformVariant::embedding ? img.d : img.d_star;
    FloatMatrix transformed =
        float_matrix_from_section(img.transformed_section, img.n, t_dim, "transformed vectors");

    BackendChoice backend_choice = (img.flags & kFlagBackendHnsw) ? BackendChoice::hnsw
                                                                  : BackendChoice::brute_force;
    std::unique_ptr<IndexBackend> backend;
    HnswParams hnsw_params;
    if (img.flags & kFlagHasGraph) {
        std::istringstream is(img.graph_section, std::ios::binary);
        auto graph = HnswIndex::load(is);
        hnsw_params = graph->params();
        backend = std::move(graph);
    }

    auto data = NormalizedStore::with_stats(std::move(store), std::move(stats));
    return FcviIndex::assemble(std::move(data), std::move(config), backend_choice, hnsw_params,
                               std::move(transformed), std::move(backend));
}

ContainerInfo inspect_container(const std::string& path) {
    auto img = parse_container(read_file(path), path);
    ContainerInfo info;
    info.has_index = img.flags & kFlagHasIndex;
    info.n = img.n;
    info.d = img.d;
    info.m = img.m;
    info.padded_dim = img.d_star;
    info.variant = info.has_index ? variant_name(variant_from_tag(img.vtag)) : "none";
    info.alpha = img.alpha;
    info.backend = !info.has_index         ? "none"
                   : (img.flags & kFlagBackendHnsw) ? "hnsw"
                                                    : "bf";
    info.has_graph = img.flags & kFlagHasGraph;
    info.has_centers = img.flags & kFlagHasCenters;
    info.has_projection = img.flags & kFlagHasProjection;
    info.rng_seed = img.rng_seed;
    return info;
}

Matrix load_projection_matrix(const std::string& path) {
    auto img = parse_container(read_file(path), path);
    if (!(img.flags & kFlagHasProjection))
        throw IoError("container has no projection matrix: " + path);
    return matrix_from_section(img.projection_section, "projection");
}

Matrix load_cluster_centers(const std::string& path) {
    auto img = parse_container(read_file(path), path);
    if (!(img.flags & kFlagHasCenters))
        throw IoError("container has no cluster centers: " + path);
    return matrix_from_section(img.centers_section, "centers");
}

FloatMatrix load_fvecs(const std::string& path) {
    std::string raw = read_file(path);
    if (raw.empty()) throw IoError("empty fvecs file: " + path);
    BufReader r(reinterpret_cast<const unsigned char*>(raw.data()), raw.size());
    FloatMatrix m;
    std::size_t row = 0;
    while (r.remaining() > 0) {
        if (r.remaining() < 4) throw IoError("truncated row header at row " + std::to_string(row));
        auto dim = r.scalar<std::int32_t>();
        if (dim <= 0)
            throw IoError("invalid row dimension " + std::to_string(dim) + " at row " +
                          std::to_string(row));
        if (m.cols == 0) {
            m.cols = std::size_t(dim);
        } else if (std::size_t(dim) != m.cols) {
            throw IoError("inconsistent row dimension at row " + std::to_string(row));
        }
        if (r.remaining() < m.cols * 4) throw IoError("truncated row " + std::to_string(row));
        std::size_t off = m.data.size();
        m.data.resize(off + m.cols);
        r.bytes(m.data.data() + off, m.cols * 4);
        if constexpr (!detail::is_little_endian()) {
            for (std::size_t i = off; i < m.data.size(); ++i) {
                unsigned char b[4];
                std::memcpy(b, &m.data[i], 4);
                std::swap(b[0], b[3]);
                std::swap(b[1], b[2]);
                std::memcpy(&m.data[i], b, 4);
            }
        }
        ++row;
    }
    m.rows = row;
    return m;
}

void save_fvecs(const FloatMatrix& m, const std::string& path) {
    std::string out;
    for (std::size_t i = 0; i < m.rows; ++i) {
        append_le_scalar<std::int32_t>(out, std::int32_t(m.cols));
        append_le_f32(out, m.row(i).data(), m.cols);
    }
    write_file(path, out);
}

FloatMatrix load_bvecs(const std::string& path) {
    std::string raw = read_file(path);
    if (raw.empty()) throw IoError("empty bvecs file: " + path);
    BufReader r(reinterpret_cast<const unsigned char*>(raw.data()), raw.size());
    FloatMatrix m;
    std::size_t row = 0;
    while (r.remaining() > 0) {
        if (r.remaining() < 4) throw IoError("truncated row header at row " + std::to_string(row));
        auto dim = r.scalar<std::int32_t>();
        if (dim <= 0)
            throw IoError("invalid row dimension " + std::to_string(dim) + " at row " +
                          std::to_string(row));
        if (m.cols == 0) {
            m.cols = std::size_t(dim);
        } else if (std::size_t(dim) != m.cols) {
            throw IoError("inconsistent row dimension at row " + std::to_string(row));
        }
        if (r.remaining() < m.cols) throw IoError("truncated row " + std::to_string(row));
        std::vector<unsigned char> bytes(m.cols);
        r.bytes(bytes.data(), m.cols);
        for (unsigned char b : bytes) m.data.push_back(float(b));
        ++row;
    }
    m.rows = row;
    return m;
}

void save_bvecs(const FloatMatrix& m, const std::string& path) {
    std::string out;
    for (std::size_t i = 0; i < m.rows; ++i) {
        append_le_scalar<std::int32_t>(out, std::int32_t(m.cols));
        for (float x : m.row(i)) {
            if (x < 0.0f || x > 255.0f) throw IoError("value out of byte range for bvecs");
            out.push_back(char(static_cast<unsigned char>(x)));
        }
    }
    write_file(path, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::vector<RawAttributes> load_attributes_csv(const std::string& path,
                                               const FilterSchema& schema) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open file: " + path);
    std::string line;
    if (!std::getline(f, line)) throw IoError("empty CSV file: " + path);
    auto header = split_csv_line(line);

    std::vector<std::size_t> attr_of_column(header.size());
    std::vector<bool> seen(schema.attributes.size(), false);
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::size_t ai = schema.find(header[c]);  // throws on unknown column
        attr_of_column[c] = ai;
        seen[ai] = true;
    }
    for (std::size_t ai = 0; ai < schema.attributes.size(); ++ai)
        if (!seen[ai])
            throw IoError("missing column: " + schema.attributes[ai].name);

    std::vector<RawAttributes> rows;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw IoError("row width mismatch at line " + std::to_string(line_no));
        RawAttributes raw;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& attr = schema.attributes[attr_of_column[c]];
            if (attr.kind == AttrKind::numeric) {
                try {
                    std::size_t pos = 0;
                    double v = std::stod(cells[c], &pos);
                    if (pos != cells[c].size()) throw std::invalid_argument("trailing junk");
                    raw[attr.name] = v;
                } catch (const std::exception&) {
                    throw IoError("cannot parse numeric value '" + cells[c] + "' for column " +
                                  attr.name + " at line " + std::to_string(line_no));
                }
            } else {
                raw[attr.name] = cells[c];
            }
        }
        rows.push_back(std::move(raw));
    }
    return rows;
}

void save_attributes_csv(const RecordStore& store, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open file for writing: " + path);
    const auto& schema = store.schema;
    for (std::size_t ai = 0; ai < schema.attributes.size(); ++ai) {
        if (ai) f << ',';
        f << schema.attributes[ai].name;
    }
    f << '\n';
    char buf[64];
    for (std::size_t i = 0; i < store.size(); ++i) {
        auto row = store.filters.row(i);
        std::size_t off = 0;
        for (std::size_t ai = 0; ai < schema.attributes.size(); ++ai) {
            const auto& a = schema.attributes[ai];
            if (ai) f << ',';
            if (a.kind == AttrKind::numeric) {
                std::snprintf(buf, sizeof(buf), "%.9g", double(row[off]));
                f << buf;
            } else {
                std::size_t best = 0;
                for (std::size_t c = 1; c < a.categories.size(); ++c)
                    if (row[off + c] > row[off + best]) best = c;
                f << a.categories[best];
            }
            off += a.width();
        }
        f << '\n';
    }
    if (!f) throw IoError("write failed: " + path);
}

FloatMatrix encode_attribute_rows(const FilterSchema& schema,
                                  const std::vector<RawAttributes>& rows) {
    FloatMatrix m(rows.size(), schema.encoded_dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto enc = encode_filter_values(schema, rows[i]);
        auto dst = m.row(i);
        for (std::size_t j = 0; j < enc.size(); ++j) dst[j] = float(enc[j]);
    }
    return m;
}

void save_queries_jsonl(const std::vector<bench::BenchQuery>& queries, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open file for writing: " + path);
    for (const auto& q : queries) {
        json j;
        json vec = json::array();
        for (float x : q.vector) vec.push_back(x);
        j["vector"] = vec;
        j["filter"] = json::parse(q.filter.to_json_string());
        f << j.dump() << '\n';
    }
    if (!f) throw IoError("write failed: " + path);
}

std::vector<bench::BenchQuery> load_queries_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open file: " + path);
    std::vector<bench::BenchQuery> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IoError("bad JSON at line " + std::to_string(line_no) + ": " + e.what());
        }
        bench::BenchQuery q;
        for (const auto& x : j.at("vector")) q.vector.push_back(x.get<float>());
        q.filter = QueryFilter::from_json_string(j.at("filter").dump());
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace fcvi::storage
