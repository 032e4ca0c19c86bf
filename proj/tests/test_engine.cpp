#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <thread>

#include "fcvi/bench.hpp"
#include "fcvi/engine.hpp"

using namespace fcvi;

namespace {

FilterSchema two_attr_schema() {
    FilterSchema s;
    s.attributes.push_back({"price", AttrKind::numeric, {}, 0.0, 100.0});
    s.attributes.push_back({"cat", AttrKind::categorical, {"a", "b", "c"}, 0.0, 0.0});
    return s;
}

RecordStore random_store(Rng& rng, std::size_t n, std::size_t d) {
    RecordStore store;
    store.schema = two_attr_schema();
    store.vectors = FloatMatrix(n, d);
    store.filters = FloatMatrix(n, 4);
    for (auto& x : store.vectors.data) x = float(rng.gaussian());
    const char* cats = "abc";
    for (std::size_t i = 0; i < n; ++i) {
        auto enc = encode_filter_values(
            store.schema,
            {{"price", rng.uniform(0.0, 100.0)}, {"cat", std::string(1, cats[rng.index(3)])}});
        for (std::size_t j = 0; j < 4; ++j) store.filters.at(i, j) = float(enc[j]);
    }
    return store;
}

QueryFilter exact_filter_for(const RecordStore& store, std::size_t row) {
    QueryFilter qf;
    qf.predicates.push_back(ExactPredicate{"price", double(store.filters.at(row, 0))});
    std::size_t ci = 0;
    for (std::size_t c = 1; c < 4; ++c)
        if (store.filters.at(row, c) == 1.0f) ci = c - 1;
    qf.predicates.push_back(ExactPredicate{"cat", std::string(1, "abc"[ci])});
    return qf;
}

std::vector<std::uint32_t> hit_ids(const QueryResult& r) {
    std::vector<std::uint32_t> ids;
    for (const auto& h : r.hits) ids.push_back(h.id);
    return ids;
}

}  // namespace

TEST_CASE("similarity formula") {
    std::vector<double> a{1, 2, 3}, b{1, 2, 3};
    CHECK(similarity(a, b) == 1.0);
    std::vector<double> c{1, 2, 4};
    CHECK(similarity(a, c) == doctest::Approx(0.5).epsilon(1e-15));
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> x(5), y(5);
        for (auto& v : x) v = rng.gaussian();
        for (auto& v : y) v = rng.gaussian();
        CHECK(similarity(x, y) == similarity(y, x));
        CHECK(similarity(x, y) > 0.0);
        CHECK(similarity(x, y) <= 1.0);
    }
    std::vector<double> short_vec{1.0};
    CHECK_THROWS_AS(similarity(a, short_vec), std::invalid_argument);
}

TEST_CASE("compute_k_prime examples and clamps") {
    CHECK(compute_k_prime(10, 1.0, 1.0, 1.0, 1000) == 10);
    CHECK(compute_k_prime(10, 0.5, 1.0, 2.0, 1000) == 40);
    CHECK(compute_k_prime(10, 0.1, 2.0, 1.0, 20) == 20);
    // formula below k is clamped up to k
    CHECK(compute_k_prime(10, 1.0, 4.0, 1.0, 1000) == 10);
    CHECK_THROWS_WITH_AS(compute_k_prime(10, 0.0, 1.0, 1.0, 1000),
                         "lambda=0 requests filter-only scoring; use prefilter search instead",
                         std::invalid_argument);
}

TEST_CASE("compute_k_prime monotonicity") {
    for (double lam : {0.1, 0.5, 1.0})
        for (double alpha : {1.0, 2.0})
            for (std::size_t k : {1, 10, 50}) {
                std::size_t base = compute_k_prime(k, lam, alpha, 4.0, 1000000);
                CHECK(compute_k_prime(k, lam, alpha * 2, 4.0, 1000000) <= base);
                CHECK(compute_k_prime(k, std::min(1.0, lam * 2), alpha, 4.0, 1000000) <= base);
                CHECK(compute_k_prime(k + 5, lam, alpha, 4.0, 1000000) >= base);
                CHECK(compute_k_prime(k, lam, alpha, 8.0, 1000000) >= base);
            }
}

TEST_CASE("single-record index returns itself with a perfect score") {
    RecordStore store;
    store.schema = two_attr_schema();
    store.vectors = FloatMatrix(1, 3, {1.0f, 2.0f, 3.0f});
    auto enc = encode_filter_values(store.schema, {{"price", 42.0}, {"cat", std::string("b")}});
    store.filters = FloatMatrix(1, 4);
    for (std::size_t j = 0; j < 4; ++j) store.filters.at(0, j) = float(enc[j]);

    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);
    CHECK(idx.size() == 1);

    SearchParams params;
    params.k = 1;
    auto r = idx.query(store.vectors.row(0), exact_filter_for(store, 0), params);
    REQUIRE(r.hits.size() == 1);
    CHECK(r.hits[0].id == 0);
    CHECK(r.hits[0].vector_sim == 1.0);
    CHECK(r.hits[0].filter_sim == 1.0);
    CHECK(r.hits[0].score == 1.0);
}

TEST_CASE("identical filters preserve pairwise distances at alpha=1") {
    Rng rng(2);
    RecordStore store;
    store.schema = two_attr_schema();
    std::size_t n = 40, d = 6;
    store.vectors = FloatMatrix(n, d);
    for (auto& x : store.vectors.data) x = float(rng.gaussian());
    auto enc = encode_filter_values(store.schema, {{"price", 10.0}, {"cat", std::string("a")}});
    store.filters = FloatMatrix(n, 4);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 4; ++j) store.filters.at(i, j) = float(enc[j]);

    BuildOptions opts;
    opts.alpha = 1.0;
    auto idx = FcviIndex::build(store, opts);
    const auto& t = idx.transformed();
    const auto& nv = idx.data().norm_vectors;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) {
            double dt = l2(t.row(i), t.row(j));
            double dv = l2(nv.row(i), nv.row(j));
            CHECK(dt == doctest::Approx(dv).epsilon(1e-5));
        }
}

TEST_CASE("stored transformed vectors equal recomputed psi bitwise") {
    Rng rng(3);
    auto store = random_store(rng, 500, 10);
    BuildOptions opts;
    opts.alpha = 2.0;
    auto idx = FcviIndex::build(store, opts);
    for (std::size_t i = 0; i < 100; ++i) {
        std::size_t row = std::size_t(rng.index(500));
        auto expect =
            psi_apply(idx.config(), idx.data().norm_vectors.row(row), idx.data().norm_filters.row(row));
        auto stored = idx.transformed().row(row);
        REQUIRE(stored.size() == expect.size());
        for (std::size_t j = 0; j < expect.size(); ++j) CHECK(stored[j] == float(expect[j]));
    }
}

TEST_CASE("lambda=1 with equal filters ranks exactly like raw k-NN") {
    Rng rng(4);
    RecordStore store;
    store.schema = two_attr_schema();
    std::size_t n = 200, d = 8;
    store.vectors = FloatMatrix(n, d);
    for (auto& x : store.vectors.data) x = float(rng.gaussian());
    auto enc = encode_filter_values(store.schema, {{"price", 10.0}, {"cat", std::string("a")}});
    store.filters = FloatMatrix(n, 4);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 4; ++j) store.filters.at(i, j) = float(enc[j]);

    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 10;
    params.lambda = 1.0;
    QueryFilter qf;
    qf.predicates.push_back(ExactPredicate{"price", 10.0});
    qf.predicates.push_back(ExactPredicate{"cat", std::string("a")});

    std::vector<float> q(d);
    for (auto& x : q) x = float(rng.gaussian());
    auto got = hit_ids(idx.query(q, qf, params));

    auto q_norm = normalize_vector(idx.stats(), q);
    std::vector<std::pair<double, std::uint32_t>> plain;
    for (std::size_t i = 0; i < n; ++i)
        plain.emplace_back(l2(idx.data().norm_vectors.row(i), std::span<const double>(q_norm)),
                           std::uint32_t(i));
    std::sort(plain.begin(), plain.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(got[i] == plain[i].second);
}

TEST_CASE("query with total candidates equals the exhaustive oracle") {
    Rng rng(5);
    auto store = random_store(rng, 300, 6);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 10;
    params.c = 1e9;  // k' = N
    for (int t = 0; t < 10; ++t) {
        std::vector<float> q(6);
        for (auto& x : q) x = float(rng.gaussian());
        auto qf = exact_filter_for(store, rng.index(300));
        auto got = hit_ids(idx.query(q, qf, params));
        auto want = bench::oracle_for_query(idx.data(), q, qf, params);
        CHECK(got == want);
    }
}

TEST_CASE("recall is non-decreasing in c and reaches 1 at k_prime = N") {
    Rng rng(6);
    auto store = random_store(rng, 400, 6);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 10;
    std::vector<double> cs{1.0, 2.0, 4.0, 16.0, 1e9};
    double prev = -1.0;
    for (double c : cs) {
        params.c = c;
        double total = 0.0;
        Rng qrng(70);
        for (int t = 0; t < 20; ++t) {
            std::vector<float> q(6);
            for (auto& x : q) x = float(qrng.gaussian());
            auto qf = exact_filter_for(store, qrng.index(400));
            auto got = hit_ids(idx.query(q, qf, params));
            auto want = bench::oracle_for_query(idx.data(), q, qf, params);
            total += bench::recall_at_k(got, want);
        }
        double mean = total / 20.0;
        CHECK(mean >= prev - 1e-12);
        prev = mean;
    }
    CHECK(prev == 1.0);
}

TEST_CASE("returned scores equal recomputation from originals") {
    Rng rng(7);
    auto store = random_store(rng, 200, 5);
    BuildOptions opts;
    opts.alpha = 1.5;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 10;
    params.lambda = 0.3;
    std::vector<float> q(5);
    for (auto& x : q) x = float(rng.gaussian());
    QueryFilter qf;
    qf.predicates.push_back(RangePredicate{"price", 20.0, 60.0});
    auto r = idx.query(q, qf, params);
    REQUIRE(!r.hits.empty());

    auto q_norm = normalize_vector(idx.stats(), q);
    auto probes = idx.data().normalized_probes(qf, params.probes);
    for (const auto& h : r.hits) {
        double vs = similarity(idx.data().norm_vectors.row(h.id), std::span<const double>(q_norm));
        auto rec_f = idx.data().norm_filters.row(h.id);
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best = 0;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            double d = l2_sq(rec_f, std::span<const double>(probes[p]));
            if (d < best_d) {
                best_d = d;
                best = p;
            }
        }
        double fs = similarity(rec_f, std::span<const double>(probes[best]));
        double score = params.lambda * vs + (1 - params.lambda) * fs;
        CHECK(std::abs(h.score - score) <= 1e-12);
        CHECK(h.vector_sim == vs);
        CHECK(h.filter_sim == fs);
    }
}

TEST_CASE("probe filter equal to a record filter cancels in transformed space") {
    Rng rng(8);
    auto store = random_store(rng, 100, 6);
    BuildOptions opts;
    opts.alpha = 2.0;
    auto idx = FcviIndex::build(store, opts);

    for (std::size_t row : {std::size_t(3), std::size_t(42), std::size_t(77)}) {
        std::vector<float> q(6);
        for (auto& x : q) x = float(rng.gaussian());
        auto q_norm = normalize_vector(idx.stats(), q);
        auto probes = idx.data().normalized_probes(exact_filter_for(store, row), 1);
        REQUIRE(probes.size() == 1);
        auto q_t = idx.transform_query(q_norm, probes[0]);
        double transformed = l2(std::span<const float>(q_t), idx.transformed().row(row));
        auto padded_q = zero_pad(q_norm, idx.config().padded_dim);
        auto padded_v = zero_pad(idx.data().norm_vectors.row(row), idx.config().padded_dim);
        double raw = l2(std::span<const double>(padded_q), std::span<const double>(padded_v));
        CHECK(transformed == doctest::Approx(raw).epsilon(1e-4));
    }
}

TEST_CASE("multi-probe point range equals the exact query") {
    Rng rng(9);
    auto store = random_store(rng, 150, 4);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 5;
    params.probes = 4;
    double price = double(store.filters.at(10, 0));
    QueryFilter point_range;
    point_range.predicates.push_back(RangePredicate{"price", price, price});
    QueryFilter exact;
    exact.predicates.push_back(ExactPredicate{"price", price});

    std::vector<float> q(4);
    for (auto& x : q) x = float(rng.gaussian());
    CHECK(hit_ids(idx.query(q, point_range, params)) == hit_ids(idx.query(q, exact, params)));
}

TEST_CASE("multi-probe improves recall over a single probe on wide ranges") {
    Rng rng(10);
    auto store = random_store(rng, 1000, 8);
    BuildOptions opts;
    opts.alpha = 2.0;
    auto idx = FcviIndex::build(store, opts);

    QueryFilter wide;
    wide.predicates.push_back(RangePredicate{"price", 0.0, 100.0});

    double total_r1 = 0.0, total_r3 = 0.0;
    Rng qrng(11);
    for (int t = 0; t < 25; ++t) {
        std::vector<float> q(8);
        for (auto& x : q) x = float(qrng.gaussian());
        SearchParams p1;
        p1.k = 10;
        p1.probes = 1;
        SearchParams p3 = p1;
        p3.probes = 3;
        auto oracle1 = bench::oracle_for_query(idx.data(), q, wide, p1);
        auto oracle3 = bench::oracle_for_query(idx.data(), q, wide, p3);
        total_r1 += bench::recall_at_k(hit_ids(idx.query(q, wide, p1)), oracle1);
        total_r3 += bench::recall_at_k(hit_ids(multi_probe_query(idx, q, wide, p3)), oracle3);
    }
    CHECK(total_r3 / 25.0 >= total_r1 / 25.0);
}

TEST_CASE("multi_probe_query requires an expanding predicate") {
    Rng rng(11);
    auto store = random_store(rng, 50, 4);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);
    SearchParams params;
    params.probes = 3;
    QueryFilter exact;
    exact.predicates.push_back(ExactPredicate{"cat", std::string("a")});
    std::vector<float> q(4, 0.0f);
    CHECK_THROWS_AS(multi_probe_query(idx, q, exact, params), std::invalid_argument);
}

TEST_CASE("one-of results are contained in the union of exact-probe results") {
    Rng rng(12);
    auto store = random_store(rng, 300, 6);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 300;
    params.c = 1e9;
    QueryFilter one_of;
    one_of.predicates.push_back(OneOfPredicate{"cat", {std::string("a"), std::string("b")}});
    QueryFilter ex_a, ex_b;
    ex_a.predicates.push_back(ExactPredicate{"cat", std::string("a")});
    ex_b.predicates.push_back(ExactPredicate{"cat", std::string("b")});

    std::vector<float> q(6);
    for (auto& x : q) x = float(rng.gaussian());
    auto union_ids = hit_ids(idx.query(q, ex_a, params));
    auto b_ids = hit_ids(idx.query(q, ex_b, params));
    std::set<std::uint32_t> allowed(union_ids.begin(), union_ids.end());
    allowed.insert(b_ids.begin(), b_ids.end());
    for (auto id : hit_ids(multi_probe_query(idx, q, one_of, params))) CHECK(allowed.count(id) == 1);
}

TEST_CASE("probe cap surfaces as metadata") {
    Rng rng(13);
    FilterSchema s;
    s.attributes.push_back({"p", AttrKind::numeric, {}, 0, 1});
    s.attributes.push_back({"q", AttrKind::numeric, {}, 0, 1});
    RecordStore store;
    store.schema = s;
    store.vectors = FloatMatrix(50, 4);
    store.filters = FloatMatrix(50, 2);
    for (auto& x : store.vectors.data) x = float(rng.gaussian());
    for (auto& x : store.filters.data) x = float(rng.uniform01());
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.probes = 8;
    QueryFilter qf;
    qf.predicates.push_back(RangePredicate{"p", 0.0, 1.0});
    qf.predicates.push_back(RangePredicate{"q", 0.0, 1.0});
    auto r = idx.query(std::vector<float>(4, 0.0f), qf, params);
    CHECK(r.probes_trimmed);
    CHECK(r.probe_count <= kProbeCap);
}

TEST_CASE("prefilter matches the crisp subset") {
    Rng rng(14);
    auto store = random_store(rng, 500, 6);
    auto base = BaselineIndex::build(store, BackendChoice::brute_force, {}, 1);

    SearchParams params;
    params.k = 20;
    QueryFilter narrow;
    narrow.predicates.push_back(RangePredicate{"price", 10.0, 12.0});
    std::vector<float> q(6);
    for (auto& x : q) x = float(rng.gaussian());
    auto r = prefilter_search(base, q, narrow, params);
    for (const auto& h : r.hits)
        CHECK(narrow.matches(store.schema, store.filters.row(h.id)));

    // a predicate matching exactly one record returns it regardless of distance
    QueryFilter single;
    single.predicates.push_back(ExactPredicate{"price", double(store.filters.at(7, 0))});
    auto r1 = prefilter_search(base, q, single, params);
    REQUIRE(r1.hits.size() >= 1);
    bool found = false;
    for (const auto& h : r1.hits) found = found || h.id == 7;
    CHECK(found);
}

TEST_CASE("prefilter over a match-all predicate is plain k-NN") {
    Rng rng(15);
    auto store = random_store(rng, 200, 5);
    auto base = BaselineIndex::build(store, BackendChoice::brute_force, {}, 1);
    SearchParams params;
    params.k = 10;
    QueryFilter all;
    all.predicates.push_back(RangePredicate{"price", 0.0, 100.0});
    std::vector<float> q(5);
    for (auto& x : q) x = float(rng.gaussian());
    auto r = prefilter_search(base, q, all, params);

    auto q_norm = normalize_vector(base.data().stats, q);
    std::vector<std::pair<double, std::uint32_t>> plain;
    for (std::size_t i = 0; i < 200; ++i)
        plain.emplace_back(l2(base.data().norm_vectors.row(i), std::span<const double>(q_norm)),
                           std::uint32_t(i));
    std::sort(plain.begin(), plain.end());
    std::set<std::uint32_t> got;
    for (const auto& h : r.hits) got.insert(h.id);
    for (std::size_t i = 0; i < 10; ++i) CHECK(got.count(plain[i].second) == 1);
}

TEST_CASE("postfilter basics") {
    Rng rng(16);
    auto store = random_store(rng, 400, 5);
    auto base = BaselineIndex::build(store, BackendChoice::brute_force, {}, 1);
    SearchParams params;
    params.k = 10;
    std::vector<float> q(5);
    for (auto& x : q) x = float(rng.gaussian());

    QueryFilter all;
    all.predicates.push_back(RangePredicate{"price", 0.0, 100.0});
    auto rall = postfilter_search(base, q, all, params, 10);
    auto rpre = prefilter_search(base, q, all, params);
    auto all_ids = hit_ids(rall);
    auto pre_ids = hit_ids(rpre);
    CHECK(all_ids.size() == 10);
    std::set<std::uint32_t> a(all_ids.begin(), all_ids.end());
    std::set<std::uint32_t> b(pre_ids.begin(), pre_ids.end());
    CHECK(a == b);  // match-everything filter: both are plain k-NN

    QueryFilter none;
    none.predicates.push_back(RangePredicate{"price", 200.0, 300.0});
    CHECK(postfilter_search(base, q, none, params, 10).hits.empty());
}

TEST_CASE("postfilter recall falls below prefilter at 1% selectivity") {
    bench::WorkloadSpec spec;
    spec.n = 4000;
    spec.d = 16;
    spec.m = 4;
    spec.selectivity = 0.01;
    spec.query_count = 20;
    spec.seed = 17;
    spec.noise_scale = 2.0;
    spec.spectrum_decay = 0.8;
    auto wl = bench::gen_synthetic(spec);
    auto base = BaselineIndex::build(wl.records, BackendChoice::brute_force, {}, 1);
    SearchParams params;
    params.k = 20;

    double pre_total = 0.0, post_total = 0.0;
    for (const auto& q : wl.queries) {
        auto oracle = bench::oracle_for_query(base.data(), q.vector, q.filter, params);
        pre_total +=
            bench::recall_at_k(hit_ids(prefilter_search(base, q.vector, q.filter, params)), oracle);
        post_total += bench::recall_at_k(
            hit_ids(postfilter_search(base, q.vector, q.filter, params, 10)), oracle);
    }
    CHECK(post_total < pre_total);
}

TEST_CASE("engine insert and delete reflect in queries") {
    Rng rng(19);
    auto store = random_store(rng, 50, 4);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);

    std::vector<float> v{9.0f, 9.0f, 9.0f, 9.0f};
    auto enc = encode_filter_values(store.schema, {{"price", 55.0}, {"cat", std::string("c")}});
    std::vector<float> f(4);
    for (std::size_t j = 0; j < 4; ++j) f[j] = float(enc[j]);
    auto id = idx.insert(v, f);
    CHECK(id == 50);
    CHECK(idx.size() == 51);

    SearchParams params;
    params.k = 1;
    QueryFilter qf;
    qf.predicates.push_back(ExactPredicate{"price", 55.0});
    qf.predicates.push_back(ExactPredicate{"cat", std::string("c")});
    auto r = idx.query(v, qf, params);
    REQUIRE(r.hits.size() == 1);
    CHECK(r.hits[0].id == 50);

    idx.mark_deleted(50);
    CHECK(idx.size() == 50);
    auto r2 = idx.query(v, qf, params);
    if (!r2.hits.empty()) CHECK(r2.hits[0].id != 50);
    CHECK_THROWS_AS(idx.mark_deleted(50), std::invalid_argument);
}

TEST_CASE("offset cache equals recomputation") {
    Rng rng(20);
    auto store = random_store(rng, 80, 6);
    BuildOptions opts;
    opts.alpha = 2.0;
    auto idx = FcviIndex::build(store, opts);
    CHECK(idx.offset_cache_size() == 0);

    auto probes = idx.data().normalized_probes(exact_filter_for(store, 5), 1);
    auto cached1 = idx.transform_offset(probes[0]);
    auto cached2 = idx.transform_offset(probes[0]);
    auto direct = psi_offset(idx.config(), probes[0]);
    CHECK(cached1 == direct);
    CHECK(cached2 == direct);
    CHECK(idx.offset_cache_size() == 1);
}

TEST_CASE("cluster and embedding variants build and query") {
    Rng rng(21);
    auto store = random_store(rng, 300, 6);

    BuildOptions cl;
    cl.variant = TransformVariant::cluster;
    cl.clusters_k = 4;
    cl.alpha = 1.5;
    auto idx_cl = FcviIndex::build(store, cl);
    CHECK(idx_cl.config().cluster_centers->rows == 4);

    BuildOptions em;
    em.variant = TransformVariant::embedding;
    em.alpha = 1.0;
    auto idx_em = FcviIndex::build(store, em);
    CHECK(idx_em.config().transformed_dim() == 6);

    SearchParams params;
    params.k = 5;
    std::vector<float> q(6);
    for (auto& x : q) x = float(rng.gaussian());
    auto qf = exact_filter_for(store, 3);
    CHECK(idx_cl.query(q, qf, params).hits.size() == 5);
    CHECK(idx_em.query(q, qf, params).hits.size() == 5);

    BuildOptions bad;
    bad.variant = TransformVariant::cluster;
    CHECK_THROWS_AS(FcviIndex::build(store, bad), std::invalid_argument);
}

TEST_CASE("query parameter validation") {
    Rng rng(22);
    auto store = random_store(rng, 30, 4);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);
    auto qf = exact_filter_for(store, 0);
    std::vector<float> q(4, 0.0f);

    SearchParams zero_lambda;
    zero_lambda.lambda = 0.0;
    CHECK_THROWS_AS(idx.query(q, qf, zero_lambda), std::invalid_argument);
    SearchParams zero_k;
    zero_k.k = 0;
    CHECK_THROWS_AS(idx.query(q, qf, zero_k), std::invalid_argument);
    SearchParams bad_c;
    bad_c.c = 0.0;
    CHECK_THROWS_AS(idx.query(q, qf, bad_c), std::invalid_argument);
    std::vector<float> wrong_dim(3, 0.0f);
    SearchParams ok;
    CHECK_THROWS_AS(idx.query(wrong_dim, qf, ok), std::invalid_argument);
    QueryFilter empty;
    CHECK_THROWS_AS(idx.query(q, empty, ok), std::invalid_argument);
}

TEST_CASE("query on an emptied index returns no hits") {
    Rng rng(24);
    auto store = random_store(rng, 5, 4);
    BuildOptions opts;
    auto idx = FcviIndex::build(store, opts);
    for (std::uint32_t id = 0; id < 5; ++id) idx.mark_deleted(id);
    SearchParams params;
    auto r = idx.query(std::vector<float>(4, 0.0f), exact_filter_for(store, 0), params);
    CHECK(r.hits.empty());
}

TEST_CASE("concurrent readers see identical results") {
    Rng rng(25);
    auto store = random_store(rng, 400, 6);
    BuildOptions opts;
    opts.backend = BackendChoice::hnsw;
    auto idx = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 10;
    std::vector<std::vector<float>> queries;
    std::vector<QueryFilter> filters;
    for (int t = 0; t < 16; ++t) {
        std::vector<float> q(6);
        for (auto& x : q) x = float(rng.gaussian());
        queries.push_back(q);
        filters.push_back(exact_filter_for(store, rng.index(400)));
    }
    std::vector<std::vector<std::uint32_t>> serial;
    for (int t = 0; t < 16; ++t) serial.push_back(hit_ids(idx.query(queries[t], filters[t], params)));

    std::vector<std::thread> threads;
    std::vector<bool> ok(8, false);
    for (int w = 0; w < 8; ++w) {
        threads.emplace_back([&, w] {
            bool all = true;
            for (int t = 0; t < 16; ++t)
                all = all && hit_ids(idx.query(queries[t], filters[t], params)) == serial[t];
            ok[w] = all;
        });
    }
    for (auto& th : threads) th.join();
    for (bool v : ok) CHECK(v);
}

TEST_CASE("queries are deterministic across identical builds") {
    Rng rng(23);
    auto store = random_store(rng, 250, 6);
    BuildOptions opts;
    opts.backend = BackendChoice::hnsw;
    opts.seed = 7;
    auto a = FcviIndex::build(store, opts);
    auto b = FcviIndex::build(store, opts);

    SearchParams params;
    params.k = 10;
    for (int t = 0; t < 5; ++t) {
        std::vector<float> q(6);
        for (auto& x : q) x = float(rng.gaussian());
        auto qf = exact_filter_for(store, rng.index(250));
        auto ra = a.query(q, qf, params);
        auto rb = b.query(q, qf, params);
        REQUIRE(ra.hits.size() == rb.hits.size());
        for (std::size_t i = 0; i < ra.hits.size(); ++i) {
            CHECK(ra.hits[i].id == rb.hits[i].id);
            CHECK(ra.hits[i].score == rb.hits[i].score);
        }
    }
}
