#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "fcvi/normalize.hpp"
#include "fcvi/schema.hpp"
#include "fcvi/transform.hpp"

using namespace fcvi;

namespace {

FilterSchema price_cat_schema() {
    FilterSchema s;
    s.attributes.push_back({"price", AttrKind::numeric, {}, 0.0, 1000.0});
    s.attributes.push_back({"cat", AttrKind::categorical, {"a", "b", "c"}, 0.0, 0.0});
    return s;
}

std::vector<double> gaussian_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.gaussian();
    return v;
}

}  // namespace

TEST_CASE("fit_normalizer two-point symmetric case") {
    FloatMatrix vectors(2, 1, {0.0f, 2.0f});
    FloatMatrix filters(2, 1, {1.0f, 1.0f});
    auto stats = fit_normalizer(vectors, filters, 1e-9);
    CHECK(stats.vector_mean[0] == doctest::Approx(1.0));
    CHECK(stats.vector_std[0] == doctest::Approx(1.0));
    CHECK(stats.filter_std[0] == doctest::Approx(1e-9));  // constant dimension floored
}

TEST_CASE("fit_normalizer single record degenerates to zeros") {
    FloatMatrix vectors(1, 3, {4.0f, -2.0f, 7.0f});
    FloatMatrix filters(1, 2, {1.0f, 9.0f});
    auto stats = fit_normalizer(vectors, filters);
    for (double s : stats.vector_std) CHECK(s == doctest::Approx(1e-9));
    auto [v, f] = apply_normalizer(stats, vectors.row(0), filters.row(0));
    for (double x : v) CHECK(x == 0.0);
    for (double x : f) CHECK(x == 0.0);
}

TEST_CASE("fit_normalizer standardizes random data") {
    Rng rng(99);
    std::size_t n = 1000, d = 8;
    FloatMatrix vectors(n, d);
    FloatMatrix filters(n, 2);
    for (auto& x : vectors.data) x = float(rng.gaussian() * 3.0 + 1.5);
    for (auto& x : filters.data) x = float(rng.uniform01());
    auto stats = fit_normalizer(vectors, filters);
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto z = normalize_vector(stats, vectors.row(i));
        for (std::size_t j = 0; j < d; ++j) mean[j] += z[j];
    }
    for (auto& m : mean) m /= double(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto z = normalize_vector(stats, vectors.row(i));
        for (std::size_t j = 0; j < d; ++j) var[j] += (z[j] - mean[j]) * (z[j] - mean[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        CHECK(std::abs(mean[j]) < 1e-9);
        CHECK(var[j] / double(n) > 0.999);
        CHECK(var[j] / double(n) < 1.001);
    }
}

TEST_CASE("fit_normalizer rejects bad input") {
    FloatMatrix empty(0, 2);
    CHECK_THROWS_WITH_AS(fit_normalizer(empty, empty), "empty dataset", std::invalid_argument);
    FloatMatrix v(1, 1, {std::numeric_limits<float>::quiet_NaN()});
    FloatMatrix f(1, 1, {0.0f});
    CHECK_THROWS_AS(fit_normalizer(v, f), std::invalid_argument);
}

TEST_CASE("apply_normalizer hand arithmetic") {
    NormStats stats;
    stats.vector_mean = {1.0};
    stats.vector_std = {2.0};
    stats.filter_mean = {0.0};
    stats.filter_std = {1.0};
    std::vector<float> v{3.0f}, f{0.5f};
    auto [zv, zf] = apply_normalizer(stats, v, f);
    CHECK(zv[0] == doctest::Approx(1.0));
    CHECK(zf[0] == doctest::Approx(0.5));

    std::vector<float> at_mean{1.0f};
    CHECK(normalize_vector(stats, at_mean)[0] == 0.0);
}

TEST_CASE("apply_normalizer round-trips through the inverse") {
    Rng rng(3);
    FloatMatrix vectors(50, 6);
    FloatMatrix filters(50, 3);
    for (auto& x : vectors.data) x = float(rng.gaussian() * 2 + 1);
    for (auto& x : filters.data) x = float(rng.gaussian());
    auto stats = fit_normalizer(vectors, filters);
    for (std::size_t i = 0; i < vectors.rows; ++i) {
        auto z = normalize_vector(stats, vectors.row(i));
        auto back = denormalize_vector(stats, z);
        for (std::size_t j = 0; j < vectors.cols; ++j)
            CHECK(back[j] == doctest::Approx(double(vectors.at(i, j))).epsilon(1e-12));
    }
}

TEST_CASE("apply_normalizer rejects dimension mismatch") {
    NormStats stats;
    stats.vector_mean = {0.0, 0.0};
    stats.vector_std = {1.0, 1.0};
    stats.filter_mean = {0.0};
    stats.filter_std = {1.0};
    std::vector<float> v{1.0f};
    CHECK_THROWS_AS(normalize_vector(stats, v), std::invalid_argument);
}

TEST_CASE("encode_filter_values one-hot layout") {
    auto schema = price_cat_schema();
    RawAttributes raw{{"price", 5.0}, {"cat", std::string("b")}};
    auto enc = encode_filter_values(schema, raw);
    CHECK(enc == std::vector<double>{5.0, 0.0, 1.0, 0.0});
}

TEST_CASE("encode_filter_values all-numeric identity layout") {
    FilterSchema s;
    s.attributes.push_back({"a", AttrKind::numeric, {}, 0, 1});
    s.attributes.push_back({"b", AttrKind::numeric, {}, 0, 1});
    auto enc = encode_filter_values(s, {{"a", 2.5}, {"b", -1.0}});
    CHECK(enc == std::vector<double>{2.5, -1.0});
}

TEST_CASE("encode_filter_values errors") {
    auto schema = price_cat_schema();
    CHECK_THROWS_AS(encode_filter_values(schema, {{"price", 5.0}, {"cat", std::string("z")}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(encode_filter_values(schema, {{"price", 5.0}}), std::invalid_argument);
}

TEST_CASE("encode_query_filter exact predicate gives one probe") {
    auto schema = price_cat_schema();
    QueryFilter qf;
    qf.predicates.push_back(ExactPredicate{"cat", std::string("b")});
    auto exp = encode_query_filter(schema, qf, 4);
    CHECK(exp.probes.size() == 1);
    CHECK_FALSE(exp.trimmed);
    CHECK(exp.probes[0].values == std::vector<double>{0.0, 0.0, 1.0, 0.0});
    CHECK_FALSE(exp.probes[0].constrained[0]);  // price untouched
    CHECK(exp.probes[0].constrained[2]);
}

TEST_CASE("encode_query_filter range encodes the center at r=1") {
    auto schema = price_cat_schema();
    QueryFilter qf;
    qf.predicates.push_back(RangePredicate{"price", 50.0, 100.0});
    auto exp = encode_query_filter(schema, qf, 1);
    CHECK(exp.probes.size() == 1);
    CHECK(exp.probes[0].values[0] == doctest::Approx(75.0));
}

TEST_CASE("encode_query_filter spaces ranges evenly") {
    auto schema = price_cat_schema();
    QueryFilter qf;
    qf.predicates.push_back(RangePredicate{"price", 0.0, 10.0});
    auto exp = encode_query_filter(schema, qf, 3);
    REQUIRE(exp.probes.size() == 3);
    CHECK(exp.probes[0].values[0] == doctest::Approx(0.0));
    CHECK(exp.probes[1].values[0] == doctest::Approx(5.0));
    CHECK(exp.probes[2].values[0] == doctest::Approx(10.0));
}

TEST_CASE("encode_query_filter one range with r probes gives exactly r") {
    auto schema = price_cat_schema();
    QueryFilter qf;
    qf.predicates.push_back(RangePredicate{"price", 1.0, 2.0});
    for (std::size_t r : {1, 2, 5, 9}) CHECK(encode_query_filter(schema, qf, r).probes.size() == r);
}

TEST_CASE("encode_query_filter deduplicates and collapses degenerate ranges") {
    auto schema = price_cat_schema();
    QueryFilter qf;
    qf.predicates.push_back(RangePredicate{"price", 7.0, 7.0});
    auto exp = encode_query_filter(schema, qf, 5);
    CHECK(exp.probes.size() == 1);
    CHECK(exp.probes[0].values[0] == doctest::Approx(7.0));
}

TEST_CASE("encode_query_filter caps the Cartesian product") {
    FilterSchema s;
    s.attributes.push_back({"p", AttrKind::numeric, {}, 0, 1});
    s.attributes.push_back({"q", AttrKind::numeric, {}, 0, 1});
    QueryFilter qf;
    qf.predicates.push_back(RangePredicate{"p", 0.0, 1.0});
    qf.predicates.push_back(RangePredicate{"q", 0.0, 1.0});
    auto exp = encode_query_filter(s, qf, 8);  // 64 combinations
    CHECK(exp.probes.size() <= kProbeCap);
    CHECK(exp.trimmed);
}

TEST_CASE("encode_query_filter errors") {
    auto schema = price_cat_schema();
    QueryFilter empty;
    CHECK_THROWS_AS(encode_query_filter(schema, empty, 1), std::invalid_argument);
    QueryFilter bad;
    bad.predicates.push_back(RangePredicate{"price", 5.0, 1.0});
    CHECK_THROWS_AS(encode_query_filter(schema, bad, 1), std::invalid_argument);
}

TEST_CASE("psi_partition direct evaluation") {
    std::vector<double> v{1, 2, 3, 4}, f{1, 0};
    CHECK(psi_partition(v, f, 1.0) == std::vector<double>{0, 2, 2, 4});
}

TEST_CASE("psi_partition with zero filter is identity") {
    std::vector<double> v{1, 2, 3, 4}, f{0, 0};
    for (double alpha : {1.0, 2.0, 7.5}) CHECK(psi_partition(v, f, alpha) == v);
}

TEST_CASE("psi_partition zero vector has closed-form norm") {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        std::size_t m = 1 + std::size_t(rng.index(6));
        std::size_t segments = 1 + std::size_t(rng.index(8));
        std::vector<double> v(segments * m, 0.0);
        auto f = gaussian_vec(rng, m);
        double alpha = rng.uniform(1.0, 3.0);
        auto out = psi_partition(v, f, alpha);
        double expect = double(segments) * alpha * alpha * norm_sq(f);
        CHECK(norm_sq(out) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("psi_partition rejects bad shapes") {
    std::vector<double> v{1, 2, 3}, f{1, 0};
    CHECK_THROWS_AS(psi_partition(v, f, 1.0), std::invalid_argument);
}

TEST_CASE("psi_cluster with exact center match equals psi_partition") {
    Matrix centers(2, 2, {0.0, 0.0, 10.0, 10.0});
    std::vector<double> v{1, 2, 3, 4}, f{10, 10};
    CHECK(psi_cluster(v, f, 2.0, centers) == psi_partition(v, centers.row(1), 2.0));
}

TEST_CASE("psi_cluster snaps to the nearest center") {
    Matrix centers(2, 2, {0.0, 0.0, 10.0, 10.0});
    std::vector<double> f{1, 1};
    CHECK(nearest_center(f, centers) == 0);
}

TEST_CASE("psi_cluster breaks ties toward the lower index") {
    Matrix centers(2, 1, {-1.0, 1.0});
    std::vector<double> f{0.0};
    CHECK(nearest_center(f, centers) == 0);
    std::vector<double> v{5.0};
    auto out1 = psi_cluster(v, f, 1.0, centers);
    auto out2 = psi_cluster(v, f, 1.0, centers);
    CHECK(out1 == out2);
    CHECK(out1[0] == doctest::Approx(6.0));  // 5 - 1*(-1)
}

TEST_CASE("psi_cluster rejects an empty center list") {
    Matrix centers(0, 2);
    std::vector<double> v{1, 2}, f{1, 1};
    CHECK_THROWS_AS(psi_cluster(v, f, 1.0, centers), std::invalid_argument);
}

TEST_CASE("psi_embedding with zero projection is identity") {
    Matrix w(3, 2);
    std::vector<double> v{1, 2, 3}, f{4, 5};
    CHECK(psi_embedding(v, f, 3.0, w) == v);
}

TEST_CASE("psi_embedding with identity projection subtracts the filter") {
    Matrix w(2, 2, {1.0, 0.0, 0.0, 1.0});
    std::vector<double> v{5, 7}, f{1, 2};
    CHECK(psi_embedding(v, f, 1.0, w) == std::vector<double>{4, 5});
}

TEST_CASE("psi_embedding matches a naive triple-loop oracle") {
    Rng rng(17);
    for (int t = 0; t < 10; ++t) {
        std::size_t d = 2 + std::size_t(rng.index(10)), m = 1 + std::size_t(rng.index(4));
        Matrix w(d, m);
        for (auto& x : w.data) x = rng.gaussian();
        auto v = gaussian_vec(rng, d);
        auto f = gaussian_vec(rng, m);
        double alpha = rng.uniform(1.0, 3.0);
        auto out = psi_embedding(v, f, alpha, w);
        for (std::size_t i = 0; i < d; ++i) {
            double wf = 0.0;
            for (std::size_t j = 0; j < m; ++j) wf += w.at(i, j) * f[j];
            CHECK(out[i] == doctest::Approx(v[i] - alpha * wf).epsilon(1e-12));
        }
    }
}

TEST_CASE("fit_filter_clusters identical points") {
    Matrix pts(5, 2, {3, 4, 3, 4, 3, 4, 3, 4, 3, 4});
    auto centers = fit_filter_clusters(pts, 1, 0);
    CHECK(centers.rows == 1);
    CHECK(centers.at(0, 0) == doctest::Approx(3.0));
    CHECK(centers.at(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("fit_filter_clusters separates two blobs") {
    Rng rng(8);
    Matrix pts(200, 2);
    for (std::size_t i = 0; i < 200; ++i) {
        double cx = i < 100 ? 0.0 : 10.0;
        pts.at(i, 0) = cx + 0.05 * rng.gaussian();
        pts.at(i, 1) = cx + 0.05 * rng.gaussian();
    }
    auto centers = fit_filter_clusters(pts, 2, 1);
    REQUIRE(centers.rows == 2);
    double lo = std::min(centers.at(0, 0), centers.at(1, 0));
    double hi = std::max(centers.at(0, 0), centers.at(1, 0));
    CHECK(std::abs(lo - 0.0) < 0.1);
    CHECK(std::abs(hi - 10.0) < 0.1);
}

TEST_CASE("fit_filter_clusters with k=n makes each point a center") {
    Matrix pts(4, 1, {1.0, 5.0, 9.0, 13.0});
    auto centers = fit_filter_clusters(pts, 4, 2);
    std::vector<double> vals = centers.data;
    std::sort(vals.begin(), vals.end());
    CHECK(vals == std::vector<double>{1.0, 5.0, 9.0, 13.0});
}

TEST_CASE("fit_filter_clusters validates k") {
    Matrix pts(3, 1, {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(fit_filter_clusters(pts, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_filter_clusters(pts, 4, 0), std::invalid_argument);
}

TEST_CASE("fit_filter_clusters is deterministic under a fixed seed") {
    Rng rng(12);
    Matrix pts(60, 3);
    for (auto& x : pts.data) x = rng.gaussian();
    auto a = fit_filter_clusters(pts, 5, 77);
    auto b = fit_filter_clusters(pts, 5, 77);
    CHECK(a == b);
}

TEST_CASE("separation_alpha closed form") {
    CHECK(separation_alpha(1.0, 1.0, 8, 2) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
    CHECK(separation_alpha(0.0, 1.0, 8, 2) == 0.0);
    CHECK_THROWS_WITH_AS(separation_alpha(2.0, 1.0, 8, 2), "separation condition unsatisfied",
                         std::invalid_argument);
}

TEST_CASE("optimal_alpha formula and clamp") {
    CHECK(optimal_alpha(0.5) == 1.0);
    CHECK(optimal_alpha(0.2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(optimal_alpha(0.9) == 1.0);  // sqrt(1/9) clamped up
    CHECK_THROWS_AS(optimal_alpha(0.0), std::invalid_argument);
    CHECK_THROWS_AS(optimal_alpha(1.5), std::invalid_argument);
}

TEST_CASE("padding preserves pairwise distances") {
    Rng rng(4);
    CHECK(padded_dim_for(10, 4) == 12);
    CHECK(padded_dim_for(8, 4) == 8);
    for (int t = 0; t < 10; ++t) {
        auto a = gaussian_vec(rng, 10);
        auto b = gaussian_vec(rng, 10);
        auto pa = zero_pad(a, 12);
        auto pb = zero_pad(b, 12);
        CHECK(l2_sq(std::span<const double>(pa), std::span<const double>(pb)) ==
              l2_sq(std::span<const double>(a), std::span<const double>(b)));
    }
}

// Guarantees of the transformation geometry

TEST_CASE("distance preservation for equal filters") {
    Rng rng(21);
    for (int t = 0; t < 500; ++t) {
        std::size_t m = 1 + std::size_t(rng.index(8));
        std::size_t segments = 1 + std::size_t(rng.index(128 / m));
        auto va = gaussian_vec(rng, segments * m);
        auto vb = gaussian_vec(rng, segments * m);
        auto f = gaussian_vec(rng, m);
        double alpha = rng.uniform(1.0, 4.0);
        auto pa = psi_partition(va, f, alpha);
        auto pb = psi_partition(vb, f, alpha);
        double dv = l2(std::span<const double>(va), std::span<const double>(vb));
        double dt = l2(std::span<const double>(pa), std::span<const double>(pb));
        CHECK(std::abs(dt - dv) <= 1e-9 * std::max(1.0, dv));
    }
}

TEST_CASE("expansion identity matches direct computation") {
    Rng rng(22);
    for (int t = 0; t < 500; ++t) {
        std::size_t m = 1 + std::size_t(rng.index(8));
        std::size_t segments = 1 + std::size_t(rng.index(16));
        std::size_t d_star = segments * m;
        auto va = gaussian_vec(rng, d_star);
        auto vb = gaussian_vec(rng, d_star);
        auto fa = gaussian_vec(rng, m);
        auto fb = gaussian_vec(rng, m);
        double alpha = rng.uniform(1.0, 4.0);
        auto pa = psi_partition(va, fa, alpha);
        auto pb = psi_partition(vb, fb, alpha);
        double lhs = l2_sq(std::span<const double>(pa), std::span<const double>(pb));
        double dv2 = 0.0, cross = 0.0, df2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double dfj = fa[j] - fb[j];
            df2 += dfj * dfj;
        }
        for (std::size_t i = 0; i < d_star; ++i) {
            double dvi = va[i] - vb[i];
            dv2 += dvi * dvi;
            cross += dvi * (fa[i % m] - fb[i % m]);
        }
        double rhs = dv2 + double(segments) * alpha * alpha * df2 - 2.0 * alpha * cross;
        CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max({1.0, lhs, rhs}));
    }
}

TEST_CASE("pure-filter distance grows with alpha and filter gap") {
    Rng rng(23);
    std::size_t m = 3, segments = 5, d_star = 15;
    auto v = gaussian_vec(rng, d_star);
    auto fa = gaussian_vec(rng, m);
    auto fb = gaussian_vec(rng, m);
    std::vector<double> df(m);
    for (std::size_t j = 0; j < m; ++j) df[j] = fa[j] - fb[j];
    double gap = std::sqrt(norm_sq(df));

    double prev = 0.0;
    for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
        auto pa = psi_partition(v, fa, alpha);
        auto pb = psi_partition(v, fb, alpha);
        double dist = l2(std::span<const double>(pa), std::span<const double>(pb));
        CHECK(dist == doctest::Approx(std::sqrt(double(segments)) * alpha * gap).epsilon(1e-9));
        CHECK(dist > prev);
        prev = dist;
    }
}

TEST_CASE("transformation is linear and segment-symmetric") {
    Rng rng(24);
    std::size_t m = 2, d_star = 8;
    auto v1 = gaussian_vec(rng, d_star);
    auto v2 = gaussian_vec(rng, d_star);
    auto f1 = gaussian_vec(rng, m);
    auto f2 = gaussian_vec(rng, m);
    double alpha = 1.75;

    std::vector<double> v_sum(d_star), f_sum(m);
    for (std::size_t i = 0; i < d_star; ++i) v_sum[i] = v1[i] + v2[i];
    for (std::size_t j = 0; j < m; ++j) f_sum[j] = f1[j] + f2[j];
    auto lhs = psi_partition(v_sum, f_sum, alpha);
    auto r1 = psi_partition(v1, f1, alpha);
    auto r2 = psi_partition(v2, f2, alpha);
    for (std::size_t i = 0; i < d_star; ++i)
        CHECK(lhs[i] == doctest::Approx(r1[i] + r2[i]).epsilon(1e-12));

    // every segment receives the identical offset
    std::vector<double> zero(d_star, 0.0);
    auto offsets = psi_partition(zero, f1, alpha);
    for (std::size_t i = 0; i < d_star; ++i)
        CHECK(offsets[i] == offsets[i % m]);
}

TEST_CASE("cluster separation at twice the threshold alpha") {
    Rng rng(25);
    for (int t = 0; t < 10; ++t) {
        std::size_t m = 2 + std::size_t(rng.index(4));
        std::size_t segments = 2 + std::size_t(rng.index(8));
        double diameter = rng.uniform(0.3, 1.5);
        double gap = rng.uniform(1.1, 2.5) * 2.0 * diameter / double(segments);
        double alpha = 2.0 * separation_alpha(diameter, gap, segments * m, m);

        auto fa = gaussian_vec(rng, m);
        auto dir = gaussian_vec(rng, m);
        double dn = std::sqrt(norm_sq(dir));
        auto fb = fa;
        for (std::size_t j = 0; j < m; ++j) fb[j] += gap * dir[j] / dn;

        auto center = gaussian_vec(rng, segments * m);
        auto draw = [&](const std::vector<double>& f) {
            Matrix out(8, segments * m);
            for (std::size_t i = 0; i < out.rows; ++i) {
                auto u = gaussian_vec(rng, segments * m);
                double un = std::sqrt(norm_sq(u));
                double r = rng.uniform01() * diameter / 2.0;
                std::vector<double> p(segments * m);
                for (std::size_t j = 0; j < p.size(); ++j) p[j] = center[j] + r * u[j] / un;
                auto tp = psi_partition(p, f, alpha);
                std::copy(tp.begin(), tp.end(), out.row(i).begin());
            }
            return out;
        };
        Matrix ta = draw(fa), tb = draw(fb);
        double max_intra = 0.0;
        for (const Matrix* mp : {&ta, &tb})
            for (std::size_t i = 0; i < mp->rows; ++i)
                for (std::size_t j = i + 1; j < mp->rows; ++j)
                    max_intra = std::max(max_intra, l2(mp->row(i), mp->row(j)));
        double min_inter = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ta.rows; ++i)
            for (std::size_t j = 0; j < tb.rows; ++j)
                min_inter = std::min(min_inter, l2(ta.row(i), tb.row(j)));
        CHECK(min_inter > max_intra);
    }
}

TEST_CASE("transform ops are pure") {
    Rng rng(26);
    auto v = gaussian_vec(rng, 12);
    auto f = gaussian_vec(rng, 3);
    auto a = psi_partition(v, f, 1.5);
    auto b = psi_partition(v, f, 1.5);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("TransformConfig validation and JSON round-trip") {
    auto cfg = make_transform_config(TransformVariant::embedding, 2.0, 6, 3, 42);
    CHECK(cfg.projection.has_value());
    CHECK(cfg.padded_dim == 6);
    CHECK(cfg.transformed_dim() == 6);

    auto text = cfg.to_json_string();
    auto back = TransformConfig::from_json_string(text);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.variant == cfg.variant);
    CHECK(*back.projection == *cfg.projection);

    TransformConfig bad = cfg;
    bad.alpha = 0.5;
    CHECK_THROWS_WITH_AS(bad.validate(), "alpha must be >= 1", std::invalid_argument);

    TransformConfig no_centers;
    no_centers.variant = TransformVariant::cluster;
    no_centers.alpha = 1.0;
    no_centers.original_dim = 4;
    no_centers.filter_dim = 2;
    no_centers.padded_dim = 4;
    CHECK_THROWS_AS(no_centers.validate(), std::invalid_argument);
}

TEST_CASE("FilterSchema JSON round-trip and validation") {
    auto schema = price_cat_schema();
    auto text = schema.to_json_string(2);
    auto back = FilterSchema::from_json_string(text);
    CHECK(back.encoded_dim() == 4);
    CHECK(back.attributes[1].categories == schema.attributes[1].categories);

    FilterSchema dup;
    dup.attributes.push_back({"x", AttrKind::numeric, {}, 0, 1});
    dup.attributes.push_back({"x", AttrKind::numeric, {}, 0, 1});
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

TEST_CASE("filter expression mini-language") {
    auto schema = price_cat_schema();
    auto qf = parse_filter_expr("price:50..100,cat=b", schema);
    REQUIRE(qf.predicates.size() == 2);
    CHECK(std::get<RangePredicate>(qf.predicates[0]).lo == 50.0);
    CHECK(std::get<ExactPredicate>(qf.predicates[1]).attr == "cat");

    auto qf2 = parse_filter_expr("cat in {a,c}", schema);
    CHECK(std::get<OneOfPredicate>(qf2.predicates[0]).values.size() == 2);

    CHECK_THROWS_AS(parse_filter_expr("", schema), UsageError);
    CHECK_THROWS_AS(parse_filter_expr("nope=3", schema), std::invalid_argument);
    CHECK_THROWS_AS(parse_filter_expr("price:abc..1", schema), UsageError);
}
