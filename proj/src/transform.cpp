#include "fcvi/transform.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

namespace fcvi {

using nlohmann::json;

const char* variant_name(TransformVariant v) {
    switch (v) {
        case TransformVariant::partition: return "partition";
        case TransformVariant::cluster: return "cluster";
        case TransformVariant::embedding: return "embedding";
    }
    return "?";
}

TransformVariant variant_from_name(const std::string& name) {
    if (name == "partition") return TransformVariant::partition;
    if (name == "cluster") return TransformVariant::cluster;
    if (name == "embedding") return TransformVariant::embedding;
    throw std::invalid_argument("unknown transform variant: " + name);
}

std::size_t padded_dim_for(std::size_t d, std::size_t m) {
    if (m == 0) throw std::invalid_argument("filter dimension must be positive");
    return ((d + m - 1) / m) * m;
}

std::vector<double> zero_pad(std::span<const double> v, std::size_t target_dim) {
    if (v.size() > target_dim) throw std::invalid_argument("zero_pad: vector longer than target");
    std::vector<double> out(target_dim, 0.0);
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

void TransformConfig::validate() const {
    if (alpha < 1.0) throw std::invalid_argument("alpha must be >= 1");
    if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
    if (original_dim == 0) throw std::invalid_argument("original_dim must be positive");
    if (filter_dim == 0) throw std::invalid_argument("filter_dim must be positive");
    if (padded_dim % filter_dim != 0 || padded_dim < original_dim)
        throw std::invalid_argument("padded_dim must be a multiple of filter_dim covering original_dim");
    if (variant == TransformVariant::cluster) {
        if (!cluster_centers || cluster_centers->rows == 0)
            throw std::invalid_argument("cluster variant requires cluster centers");
        if (cluster_centers->cols != filter_dim)
            throw std::invalid_argument("cluster centers have wrong dimension");
    }
    if (variant == TransformVariant::embedding) {
        if (!projection) throw std::invalid_argument("embedding variant requires projection matrix");
        if (projection->rows != original_dim || projection->cols != filter_dim)
            throw std::invalid_argument("projection matrix must be d x m");
    }
}

std::string TransformConfig::to_json_string(int indent) const {
    json j;
    j["variant"] = variant_name(variant);
    j["alpha"] = alpha;
    j["original_dim"] = original_dim;
    j["filter_dim"] = filter_dim;
    j["padded_dim"] = padded_dim;
    j["rng_seed"] = rng_seed;
    auto matrix_to_json = [](const Matrix& m) {
        json rows = json::array();
        for (std::size_t i = 0; i < m.rows; ++i) {
            json row = json::array();
            for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(i, c));
            rows.push_back(row);
        }
        return rows;
    };
    if (cluster_centers) j["cluster_centers"] = matrix_to_json(*cluster_centers);
    if (projection) j["projection"] = matrix_to_json(*projection);
    return j.dump(indent);
}

TransformConfig TransformConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config JSON parse error: ") + e.what());
    }
    TransformConfig c;
    c.variant = variant_from_name(j.at("variant").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    c.original_dim = j.at("original_dim").get<std::size_t>();
    c.filter_dim = j.at("filter_dim").get<std::size_t>();
    c.padded_dim = j.at("padded_dim").get<std::size_t>();
    c.rng_seed = j.value("rng_seed", std::uint64_t(0));
    auto matrix_from_json = [](const json& rows) {
        Matrix m;
        m.rows = rows.size();
        m.cols = m.rows ? rows[0].size() : 0;
        for (const auto& row : rows) {
            if (row.size() != m.cols) throw std::invalid_argument("ragged matrix in config JSON");
            for (const auto& x : row) m.data.push_back(x.get<double>());
        }
        return m;
    };
    if (j.contains("cluster_centers")) c.cluster_centers = matrix_from_json(j["cluster_centers"]);
    if (j.contains("projection")) c.projection = matrix_from_json(j["projection"]);
    c.validate();
    return c;
}

TransformConfig make_transform_config(TransformVariant variant, double alpha, std::size_t d,
                                      std::size_t m, std::uint64_t seed,
                                      std::optional<Matrix> cluster_centers,
                                      std::optional<Matrix> projection) {
    TransformConfig c;
    c.variant = variant;
    c.alpha = alpha;
    c.original_dim = d;
    c.filter_dim = m;
    c.padded_dim = padded_dim_for(d, m);
    c.rng_seed = seed;
    c.cluster_centers = std::move(cluster_centers);
    c.projection = std::move(projection);
    if (variant == TransformVariant::embedding && !c.projection) {
        Matrix w(d, m);
        Rng rng(seed);
        double scale = 1.0 / std::sqrt(double(m));
        for (auto& x : w.data) x = rng.gaussian() * scale;
        c.projection = std::move(w);
    }
    c.validate();
    return c;
}

std::vector<double> encode_filter_values(const FilterSchema& schema, const RawAttributes& raw) {
    std::vector<double> out(schema.encoded_dim(), 0.0);
    std::size_t off = 0;
    for (std::size_t ai = 0; ai < schema.attributes.size(); ++ai) {
        const auto& a = schema.attributes[ai];
        auto it = raw.find(a.name);
        if (it == raw.end()) throw std::invalid_argument("missing attribute: " + a.name);
        if (a.kind == AttrKind::numeric) {
            if (!std::holds_alternative<double>(it->second))
                throw std::invalid_argument("attribute " + a.name + " expects a numeric value");
            out[off] = std::get<double>(it->second);
        } else {
            if (!std::holds_alternative<std::string>(it->second))
                throw std::invalid_argument("attribute " + a.name + " expects a category value");
            std::size_t ci = schema.category_index(ai, std::get<std::string>(it->second));
            out[off + ci] = 1.0;
        }
        off += a.width();
    }
    return out;
}

namespace {

// Candidate slot assignments for one attribute, one entry per probe alternative.
struct AttrOptions {
    std::vector<std::vector<double>> fills;  // each of width() length
    bool constrained = false;
};

std::vector<double> one_hot(std::size_t width, std::size_t idx) {
    std::vector<double> v(width, 0.0);
    v[idx] = 1.0;
    return v;
}

AttrOptions options_for_attribute(const FilterSchema& schema, std::size_t ai, const QueryFilter& qf,
                                  std::size_t probes) {
    const auto& a = schema.attributes[ai];
    AttrOptions opt;
    for (const auto& p : qf.predicates) {
        const std::string& attr = std::visit([](const auto& q) -> const std::string& { return q.attr; }, p);
        if (attr != a.name) continue;
        if (opt.constrained)
            throw std::invalid_argument("multiple predicates on attribute " + a.name);
        opt.constrained = true;
        if (std::holds_alternative<ExactPredicate>(p)) {
            const auto& e = std::get<ExactPredicate>(p);
            if (a.kind == AttrKind::numeric) {
                opt.fills.push_back({std::get<double>(e.value)});
            } else {
                opt.fills.push_back(one_hot(a.width(), schema.category_index(ai, std::get<std::string>(e.value))));
            }
        } else if (std::holds_alternative<RangePredicate>(p)) {
            const auto& r = std::get<RangePredicate>(p);
            if (r.lo > r.hi) throw std::invalid_argument("range predicate has lo > hi");
            if (probes == 1 || r.lo == r.hi) {
                opt.fills.push_back({(r.lo + r.hi) / 2.0});
            } else {
                for (std::size_t i = 0; i < probes; ++i) {
                    double t = double(i) / double(probes - 1);
                    opt.fills.push_back({r.lo + t * (r.hi - r.lo)});
                }
            }
        } else {
            const auto& o = std::get<OneOfPredicate>(p);
            for (const auto& v : o.values) {
                if (a.kind == AttrKind::numeric) {
                    opt.fills.push_back({std::get<double>(v)});
                } else {
                    opt.fills.push_back(one_hot(a.width(), schema.category_index(ai, std::get<std::string>(v))));
                }
            }
        }
    }
    if (!opt.constrained) opt.fills.push_back(std::vector<double>(a.width(), 0.0));
    return opt;
}

}  // namespace

ProbeExpansion encode_query_filter(const FilterSchema& schema, const QueryFilter& qf,
                                   std::size_t probes) {
    if (probes < 1) throw std::invalid_argument("probe count must be >= 1");
    qf.validate(schema);

    std::vector<AttrOptions> per_attr;
    per_attr.reserve(schema.attributes.size());
    std::size_t total = 1;
    constexpr std::size_t kTotalClamp = std::size_t(1) << 20;
    for (std::size_t ai = 0; ai < schema.attributes.size(); ++ai) {
        per_attr.push_back(options_for_attribute(schema, ai, qf, probes));
        total = std::min(total * per_attr.back().fills.size(), kTotalClamp);
    }

    ProbeExpansion out;
    out.trimmed = total > kProbeCap;
    std::size_t take = std::min(total, kProbeCap);

    std::vector<bool> constrained(schema.encoded_dim(), false);
    {
        std::size_t off = 0;
        for (std::size_t ai = 0; ai < schema.attributes.size(); ++ai) {
            for (std::size_t s = 0; s < schema.attributes[ai].width(); ++s)
                constrained[off + s] = per_attr[ai].constrained;
            off += schema.attributes[ai].width();
        }
    }

    std::set<std::vector<double>> seen;
    for (std::size_t pick = 0; pick < take; ++pick) {
        // Stratified even selection over the lexicographic product enumeration.
        std::size_t lex = out.trimmed ? (pick * total) / take : pick;
        std::vector<double> values(schema.encoded_dim(), 0.0);
        std::size_t rem = lex;
        std::size_t off = schema.encoded_dim();
        for (std::size_t ai = schema.attributes.size(); ai-- > 0;) {
            const auto& opt = per_attr[ai];
            off -= schema.attributes[ai].width();
            const auto& fill = opt.fills[rem % opt.fills.size()];
            rem /= opt.fills.size();
            std::copy(fill.begin(), fill.end(), values.begin() + std::ptrdiff_t(off));
        }
        if (seen.insert(values).second)
            out.probes.push_back(ProbeVector{std::move(values), constrained});
    }
    return out;
}

std::vector<double> psi_partition(std::span<const double> v, std::span<const double> f,
                                  double alpha) {
    if (f.empty() || v.size() % f.size() != 0)
        throw std::invalid_argument("psi_partition: padded dimension is not a multiple of filter dimension");
    std::vector<double> out(v.size());
    std::size_t m = f.size();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - alpha * f[i % m];
    return out;
}

std::size_t nearest_center(std::span<const double> f, const Matrix& centers) {
    if (centers.rows == 0) throw std::invalid_argument("empty center list");
    if (centers.cols != f.size()) throw std::invalid_argument("center dimension mismatch");
    std::size_t best = 0;
    double best_d = l2_sq(f, centers.row(0));
    for (std::size_t i = 1; i < centers.rows; ++i) {
        double d = l2_sq(f, centers.row(i));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<double> psi_cluster(std::span<const double> v, std::span<const double> f, double alpha,
                                const Matrix& centers) {
    return psi_partition(v, centers.row(nearest_center(f, centers)), alpha);
}

std::vector<double> psi_embedding(std::span<const double> v, std::span<const double> f,
                                  double alpha, const Matrix& W) {
    if (W.rows != v.size() || W.cols != f.size())
        throw std::invalid_argument("psi_embedding: projection shape mismatch");
    std::vector<double> out(v.begin(), v.end());
    for (std::size_t i = 0; i < W.rows; ++i) {
        double acc = 0.0;
        auto row = W.row(i);
        for (std::size_t j = 0; j < W.cols; ++j) acc += row[j] * f[j];
        out[i] -= alpha * acc;
    }
    return out;
}

std::vector<double> psi_apply(const TransformConfig& config, std::span<const double> v,
                              std::span<const double> f) {
    if (v.size() != config.original_dim) throw std::invalid_argument("psi_apply: vector dimension mismatch");
    if (f.size() != config.filter_dim) throw std::invalid_argument("psi_apply: filter dimension mismatch");
    switch (config.variant) {
        case TransformVariant::partition: {
            auto padded = zero_pad(v, config.padded_dim);
            return psi_partition(padded, f, config.alpha);
        }
        case TransformVariant::cluster: {
            auto padded = zero_pad(v, config.padded_dim);
            return psi_cluster(padded, f, config.alpha, *config.cluster_centers);
        }
        case TransformVariant::embedding:
            return psi_embedding(v, f, config.alpha, *config.projection);
    }
    throw std::logic_error("unreachable");
}

std::vector<double> psi_offset(const TransformConfig& config, std::span<const double> f) {
    if (f.size() != config.filter_dim) throw std::invalid_argument("psi_offset: filter dimension mismatch");
    std::size_t dim = config.transformed_dim();
    std::vector<double> out(dim, 0.0);
    switch (config.variant) {
        case TransformVariant::partition:
            for (std::size_t i = 0; i < dim; ++i) out[i] = -config.alpha * f[i % f.size()];
            break;
        case TransformVariant::cluster: {
            auto center = config.cluster_centers->row(nearest_center(f, *config.cluster_centers));
            for (std::size_t i = 0; i < dim; ++i) out[i] = -config.alpha * center[i % center.size()];
            break;
        }
        case TransformVariant::embedding: {
            const Matrix& W = *config.projection;
            for (std::size_t i = 0; i < W.rows; ++i) {
                double acc = 0.0;
                auto row = W.row(i);
                for (std::size_t j = 0; j < W.cols; ++j) acc += row[j] * f[j];
                out[i] = -config.alpha * acc;
            }
            break;
        }
    }
    return out;
}

Matrix fit_filter_clusters(const Matrix& filters, std::size_t k, std::uint64_t seed) {
    std::size_t n = filters.rows;
    if (k == 0) throw std::invalid_argument("cluster count must be positive");
    if (k > n) throw std::invalid_argument("cluster count exceeds dataset size");

    Rng rng(seed);
    std::size_t m = filters.cols;
    Matrix centers(k, m);
    std::vector<bool> chosen(n, false);

    // k-means++ seeding
    std::size_t first = std::size_t(rng.index(n));
    chosen[first] = true;
    std::copy_n(filters.row(first).begin(), m, centers.row(0).begin());
    std::vector<double> min_d2(n);
    for (std::size_t i = 0; i < n; ++i) min_d2[i] = l2_sq(filters.row(i), centers.row(0));

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += min_d2[i];
        std::size_t pick = n;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc >= target && min_d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // all remaining mass at zero distance: take the first unchosen point
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        if (pick == n) pick = std::size_t(rng.index(n));
        chosen[pick] = true;
        std::copy_n(filters.row(pick).begin(), m, centers.row(c).begin());
        for (std::size_t i = 0; i < n; ++i)
            min_d2[i] = std::min(min_d2[i], l2_sq(filters.row(i), centers.row(c)));
    }

    // Lloyd iterations
    std::vector<std::size_t> assign(n, 0);
    for (int iter = 0; iter < 25; ++iter) {
        for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_center(filters.row(i), centers);
        Matrix next(k, m);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = filters.row(i);
            auto dst = next.row(assign[i]);
            for (std::size_t j = 0; j < m; ++j) dst[j] += row[j];
            ++count[assign[i]];
        }
        double max_shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) {
                // empty cluster keeps its previous center
                std::copy_n(centers.row(c).begin(), m, next.row(c).begin());
            } else {
                auto dst = next.row(c);
                for (std::size_t j = 0; j < m; ++j) dst[j] /= double(count[c]);
            }
            max_shift = std::max(max_shift, l2(next.row(c), centers.row(c)));
        }
        centers = std::move(next);
        if (max_shift < 1e-4) break;
    }
    return centers;
}

double separation_alpha(double vector_diameter, double filter_gap, std::size_t padded_dim,
                        std::size_t filter_dim) {
    if (vector_diameter < 0.0) throw std::invalid_argument("vector diameter must be >= 0");
    if (filter_gap <= 0.0) throw std::invalid_argument("filter gap must be > 0");
    if (filter_dim == 0 || padded_dim % filter_dim != 0)
        throw std::invalid_argument("padded_dim must be a positive multiple of filter_dim");
    double segments = double(padded_dim) / double(filter_dim);
    if (segments * filter_gap <= 2.0 * vector_diameter)
        throw std::invalid_argument("separation condition unsatisfied");
    double num = 2.0 * vector_diameter + vector_diameter * vector_diameter;
    double den = segments * filter_gap * filter_gap - 2.0 * vector_diameter * filter_gap;
    return std::sqrt(num / den);
}

double optimal_alpha(double lambda) {
    if (lambda <= 0.0 || lambda > 1.0)
        throw std::invalid_argument("lambda must be in (0, 1]");
    return std::max(1.0, std::sqrt((1.0 - lambda) / lambda));
}

}  // namespace fcvi
